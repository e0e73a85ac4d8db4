""" Half-quadratic ADMM for robust CP approximation with orthonormal factors.

The problem is

    min Phi_delta(A - [[sigma; U_1, ..., U_d]])
    s.t. columns of U_1..U_{d-t} have unit length,
         U_{d-t+1}..U_d have orthonormal columns,

where Phi_delta sums the Cauchy loss over all entries. The solver splits
the model with a slack tensor T = [[sigma; U]] and keeps the multiplier Y and
the half-quadratic weights W. Every iteration updates, in this order:
factors of unit-column modes, factors of orthonormal modes, T, Y, sigma, W.
Each update has a closed form.
"""

import csv
import logging
import math
import time

import numpy as np

from hqcp import loss
from hqcp.config import *
from hqcp.enums import UNIT_COLUMNS, ORTHONORMAL
from hqcp.tensor import (DenseTensor, CPModel, TensorException, cp_reconstruct,
                         contract_columns, frob_norm, normalize_columns,
                         orthonormalize, polar)


class SolverException(Exception):
    """ Bad solver configuration or numerical failure.
    """
    def __init__(self, message, iteration=None):
        super(SolverException, self).__init__(message)
        self.iteration = iteration


class SolverConfig(object):
    """ Parameters of HQ-ADMM. Defaults reproduce the reference setup.
    """
    def __init__(self, tau=TAU, alpha=ALPHA, delta=DELTA,
                 max_iter=MAX_ITERATIONS, tol=TOLERANCE, seed=SEED,
                 diagnostics_on=DIAGNOSTICS, tau_theory_warn=TAU_THEORY_WARN):
        """ Create and validate configuration.
        :param tau: penalty parameter, positive.
        :param alpha: proximal weight of factor updates, positive.
        :param delta: Cauchy loss scale, positive.
        :param max_iter: iteration limit.
        :param tol: stop when fit changes less than this value.
        :param seed: seed for random initialization.
        :param diagnostics_on: record Lagrangian values and residuals.
        :param tau_theory_warn: warn if tau is below the theory bound.
        """
        self.tau = float(tau)
        self.alpha = float(alpha)
        self.delta = float(delta)
        self.max_iter = int(max_iter)
        self.tol = float(tol)
        self.seed = int(seed)
        self.diagnostics_on = bool(diagnostics_on)
        self.tau_theory_warn = bool(tau_theory_warn)
        for name in ('tau', 'alpha', 'delta', 'tol'):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise SolverException("{} should be positive, got {}"
                                      .format(name, v))
        if self.max_iter < 1:
            raise SolverException("max_iter should be at least 1")
        if self.seed < 0:
            raise SolverException("seed should be nonnegative")

    def in_theory_regime(self):
        """ Check if tau is large enough for monotone decrease of the
            proximal augmented Lagrangian.
        """
        return self.tau >= TAU_THEORY_MIN

    def as_dict(self):
        return {'tau': self.tau, 'alpha': self.alpha, 'delta': self.delta,
                'max_iter': self.max_iter, 'tol': self.tol,
                'seed': self.seed, 'diagnostics_on': self.diagnostics_on,
                'tau_theory_warn': self.tau_theory_warn}


TRACE_COLUMNS = ('iter', 'fit', 'aug_lagrangian', 'prox_aug_lagrangian',
                 'primal_residual', 'kkt_residual', 'dual_residual',
                 'primal_change', 'factor_change', 'multiplier_error')


class TraceRecord(object):
    """ Quantities measured after one iteration. Only iter and fit are set
        when diagnostics are off.
    """
    def __init__(self, iteration, fit, **values):
        self.iter = iteration
        self.fit = fit
        for name in TRACE_COLUMNS[2:]:
            setattr(self, name, values.get(name))

    def row(self):
        return [getattr(self, name) for name in TRACE_COLUMNS]


class SolverState(object):
    """ Iterate of HQ-ADMM. T, Y and W are DenseTensor objects of the data
        size, T_prev is T of the previous iteration.
    """
    def __init__(self, model, T, Y, W):
        self.model = model
        self.T = T
        self.Y = Y
        self.W = W
        self.T_prev = T
        self.iteration = 0
        self.trace = []


class SolveResult(object):
    """ Outcome of a solver run.
    """
    def __init__(self, model, iterations, final_fit, converged, trace=None,
                 state=None, elapsed_s=0.0):
        self.model = model
        self.iterations = iterations
        self.final_fit = final_fit
        self.converged = converged
        self.trace = trace
        self.state = state
        self.elapsed_s = elapsed_s


def random_model(dims, rank, n_orthonormal, rng):
    """ Draw factors from standard normal distribution and put them on their
        constraint sets. sigma is set to zeros.
    :param dims: mode sizes.
    :param rank: number of components.
    :param n_orthonormal: number of trailing orthonormal modes.
    :param rng: numpy Generator.
    :return: CPModel object.
    """
    d = len(dims)
    factors = []
    for j, n in enumerate(dims):
        f = rng.standard_normal((n, rank))
        if j >= d - n_orthonormal:
            f = orthonormalize(f)
        else:
            f = normalize_columns(f)
        factors.append(f)
    return CPModel(np.zeros(rank), factors, n_orthonormal)


def project_sigma(tensor, factors):
    """ sigma_i = <tensor, u_1i x ... x u_di>.
    :param tensor: DenseTensor object.
    :param factors: sequence of d factor matrices.
    :return: vector of length R.
    """
    last = len(factors) - 1
    v = contract_columns(tensor, factors, last)
    return np.sum(v * factors[last], axis=0)


def check_problem(A, rank, n_orthonormal):
    if n_orthonormal < 1 or n_orthonormal > A.order:
        raise TensorException("number of orthonormal modes should be in"
                              " [1, {}], got {}".format(A.order, n_orthonormal))
    if rank < 1:
        raise TensorException("rank should be at least 1")
    for j in range(A.order - n_orthonormal, A.order):
        if rank > A.dims[j]:
            raise TensorException("rank {} exceeds size {} of orthonormal mode"
                                  " {}".format(rank, A.dims[j], j))
    if not A.is_finite():
        raise SolverException("input tensor has non-finite values", 0)


def init_state(A, rank, n_orthonormal, config, rng=None, initial=None):
    """ Build the starting iterate: random factors (or initial model),
        sigma projected from A, T = [[sigma; U]], Y = 0, W = 1.
    :param A: DenseTensor with data.
    :param rank: number of components R.
    :param n_orthonormal: number of trailing orthonormal modes t.
    :param config: SolverConfig object.
    :param rng: numpy Generator, created from config.seed if None.
    :param initial: optional CPModel with starting factors.
    :return: SolverState object.
    """
    check_problem(A, rank, n_orthonormal)
    if initial is None:
        if rng is None:
            rng = np.random.default_rng(config.seed)
        model = random_model(A.dims, rank, n_orthonormal, rng)
    else:
        if initial.dims != A.dims or initial.rank != rank \
                or initial.n_orthonormal != n_orthonormal:
            raise TensorException("initial model does not fit the problem")
        model = initial.copy()
    model.sigma = project_sigma(A, model.factors)
    T = cp_reconstruct(model)
    return SolverState(model, T, DenseTensor(A.dims),
                       DenseTensor.wrap(np.ones(A.dims)))


def check_update(matrix, mode, iteration):
    """ Raise SolverException if a factor update produced inf or nan.
    :param matrix: direction matrix of the update.
    :param mode: mode index.
    :param iteration: number of the iteration being computed.
    """
    if not np.all(np.isfinite(matrix)):
        raise SolverException("non-finite values in update of mode {} at"
                              " iteration {}".format(mode, iteration),
                              iteration)


def checked_polar(matrix, mode, iteration):
    """ Orthonormal polar factor of a factor update. Non-finite input and
        SVD failures are reported as SolverException with the iteration.
    :return: matrix with orthonormal columns.
    """
    check_update(matrix, mode, iteration)
    try:
        u, _ = polar(matrix)
    except np.linalg.LinAlgError as e:
        raise SolverException("polar decomposition of mode {} failed at"
                              " iteration {}: {}".format(mode, iteration, e),
                              iteration)
    return u


def warn_theory_regime(config):
    if config.tau_theory_warn and not config.in_theory_regime():
        logging.warning("tau={} is below {:.4f}, monotone decrease of the"
                        " Lagrangian is not guaranteed"
                        .format(config.tau, TAU_THEORY_MIN))


def _gradient_base(state, config):
    # Y + tau * T, the tensor every factor update contracts
    return DenseTensor.wrap(state.Y.data + config.tau * state.T.data)


def update_unit_columns(state, mode, config, x=None):
    """ Normalized sigma_i * v_i + alpha * u_i for every column, where v_i is
        Y + tau * T contracted with the latest columns of the other modes.
    :param state: SolverState object, factors of previous modes already
                  updated in this iteration.
    :param mode: unit-columns mode index.
    :param config: SolverConfig object.
    :param x: precomputed Y + tau * T.
    :return: new factor matrix.
    """
    model = state.model
    if model.mode_kind(mode) != UNIT_COLUMNS:
        raise TensorException("mode {} is not a unit-columns mode".format(mode))
    if x is None:
        x = _gradient_base(state, config)
    v = contract_columns(x, model.factors, mode)
    v_tilde = v * model.sigma + config.alpha * model.factors[mode]
    norms = np.linalg.norm(v_tilde, axis=0)
    # inf or nan in v_tilde, or an overflowing column norm
    check_update(norms, mode, state.iteration + 1)
    if np.any(norms == 0):
        raise TensorException("zero direction in update of mode {}"
                              .format(mode))
    return v_tilde / norms


def update_orthonormal(state, mode, config, x=None):
    """ Polar factor of V * diag(sigma) + alpha * U.
    :param state: SolverState object, factors of previous modes already
                  updated in this iteration.
    :param mode: orthonormal mode index.
    :param config: SolverConfig object.
    :param x: precomputed Y + tau * T.
    :return: new factor matrix.
    """
    model = state.model
    if model.mode_kind(mode) != ORTHONORMAL:
        raise TensorException("mode {} is not an orthonormal mode"
                              .format(mode))
    if x is None:
        x = _gradient_base(state, config)
    v = contract_columns(x, model.factors, mode)
    v_tilde = v * model.sigma + config.alpha * model.factors[mode]
    return checked_polar(v_tilde, mode, state.iteration + 1)


def update_T(state, A, config, recon=None):
    """ T = (W * A - Y + tau * [[sigma; U]]) / (W + tau) entrywise.
    :param recon: precomputed [[sigma; U]] of the current model.
    :return: DenseTensor object.
    """
    if recon is None:
        recon = cp_reconstruct(state.model)
    w = state.W.data
    t = (w * A.data - state.Y.data + config.tau * recon.data) / (w + config.tau)
    return DenseTensor.wrap(t)


def update_Y(state, T_next, config, recon=None):
    """ Y - tau * ([[sigma; U]] - T_next).
    :param T_next: slack computed by update_T().
    :param recon: precomputed [[sigma; U]] of the current model.
    :return: DenseTensor object.
    """
    if recon is None:
        recon = cp_reconstruct(state.model)
    return DenseTensor.wrap(state.Y.data
                            - config.tau * (recon.data - T_next.data))


def update_sigma(state, config):
    """ sigma_i = <Y + tau * T, u_1i x ... x u_di> / tau with Y and T of the
        current iteration.
    :return: vector of length R.
    """
    return project_sigma(_gradient_base(state, config),
                         state.model.factors) / config.tau


def update_W(state, A, config):
    """ Half-quadratic weights of the residual T - A.
    :return: DenseTensor object with entries in (0, 1].
    """
    return DenseTensor.wrap(loss.hq_weight(state.T.data - A.data,
                                           config.delta))


def aug_lagrangian(state, A, config, recon=None):
    """ Augmented Lagrangian
        1/2 ||sqrt(W) * (A - T)||^2 + delta^2/2 sum rho(W)
        - <Y, [[sigma; U]] - T> + tau/2 ||[[sigma; U]] - T||^2.
    :return: float.
    """
    if recon is None:
        recon = cp_reconstruct(state.model)
    w = state.W.data
    penalty = loss.CauchyLoss(config.delta).penalty(state.W)
    r = A.data - state.T.data
    diff = recon.data - state.T.data
    return float(0.5 * np.sum(w * r * r) + penalty
                 - np.sum(state.Y.data * diff)
                 + 0.5 * config.tau * np.sum(diff * diff))


def prox_aug_lagrangian(state, A, config, T_prev=None, recon=None):
    """ Augmented Lagrangian plus 2/tau ||T - T_prev||^2. It does not
        increase along iterations when tau is not less than sqrt(10).
    :param T_prev: slack of the previous iteration, state.T_prev by default.
    :return: float.
    """
    if T_prev is None:
        T_prev = state.T_prev
    d = state.T.data - T_prev.data
    return aug_lagrangian(state, A, config, recon) \
        + 2.0 / config.tau * float(np.sum(d * d))


def kkt_residual(state, A, config, recon=None):
    """ Violation of the stationarity system, the maximum of:
        - ||(Y + tau T) x_{l != j} u_li - tau sigma_i u_ji|| for unit modes,
        - projected gradient norm for orthonormal modes, i.e. the part of
          G = [sigma_i (Y + tau T) x_{l != j} u_li]_i outside span(U) plus
          the skew part of U^T G,
        - ||(W + tau) * T - W * A + Y - tau [[sigma; U]]||,
        - ||[[sigma; U]] - T||,
        - ||W - hq_weight(T - A)||.
    :return: nonnegative float.
    """
    model = state.model
    if recon is None:
        recon = cp_reconstruct(model)
    x = _gradient_base(state, config)
    res = 0.0
    for j in range(model.order):
        u = model.factors[j]
        v = contract_columns(x, model.factors, j)
        if model.mode_kind(j) == UNIT_COLUMNS:
            e = np.max(np.linalg.norm(v - config.tau * u * model.sigma,
                                      axis=0))
        else:
            g = v * model.sigma
            utg = np.dot(u.T, g)
            e = np.linalg.norm(g - np.dot(u, utg)) \
                + np.linalg.norm(0.5 * (utg - utg.T))
        res = max(res, float(e))
    w, t, a = state.W.data, state.T.data, A.data
    res = max(res, float(np.linalg.norm((w + config.tau) * t - w * a
                                        + state.Y.data
                                        - config.tau * recon.data)))
    res = max(res, float(np.linalg.norm(recon.data - t)))
    res = max(res, float(np.linalg.norm(w - loss.hq_weight(t - a,
                                                           config.delta))))
    return res


def iterate(state, A, config):
    """ Run one HQ-ADMM iteration in place.
    :return: tuple (W used by the T-update, previous Y, previous factors).
    """
    model = state.model
    old_factors = [f.copy() for f in model.factors]
    x = _gradient_base(state, config)
    for j in range(model.order):
        if model.mode_kind(j) == UNIT_COLUMNS:
            model.factors[j] = update_unit_columns(state, j, config, x)
        else:
            model.factors[j] = update_orthonormal(state, j, config, x)
    recon = cp_reconstruct(model)
    T_next = update_T(state, A, config, recon)
    Y_next = update_Y(state, T_next, config, recon)
    W_prev, Y_prev = state.W, state.Y
    state.T_prev, state.T, state.Y = state.T, T_next, Y_next
    model.sigma = update_sigma(state, config)
    state.W = update_W(state, A, config)
    state.iteration += 1
    return W_prev, Y_prev, old_factors


def _record(state, A, config, fit, recon, W_prev, Y_prev, old_factors):
    if not config.diagnostics_on:
        return TraceRecord(state.iteration, fit)
    t_change = state.T.data - state.T_prev.data
    y_change = state.Y.data - Y_prev.data
    factor_change = sum(float(np.sum((f - g) ** 2)) for f, g
                        in zip(state.model.factors, old_factors))
    identity = state.Y.data + W_prev.data * (state.T.data - A.data)
    L = aug_lagrangian(state, A, config, recon)
    return TraceRecord(
        state.iteration, fit,
        aug_lagrangian=L,
        prox_aug_lagrangian=L + 2.0 / config.tau * float(np.sum(t_change ** 2)),
        primal_residual=frob_norm(recon - state.T),
        kkt_residual=kkt_residual(state, A, config, recon),
        dual_residual=float(np.linalg.norm(y_change)),
        primal_change=float(np.linalg.norm(t_change)),
        factor_change=factor_change,
        multiplier_error=float(np.max(np.abs(identity))))


def solve(A, rank, n_orthonormal, config=None, initial=None, rng=None):
    """ Robust CP approximation of A by HQ-ADMM.
    :param A: DenseTensor with data.
    :param rank: number of components R.
    :param n_orthonormal: number of trailing orthonormal modes, 1..d.
    :param config: SolverConfig object, defaults if None.
    :param initial: optional CPModel with starting factors.
    :param rng: optional numpy Generator for random initialization.
    :return: SolveResult object. converged is False if the iteration limit
             was reached.
    """
    if config is None:
        config = SolverConfig()
    warn_theory_regime(config)
    start = time.time()
    state = init_state(A, rank, n_orthonormal, config, rng, initial)
    fit = frob_norm(cp_reconstruct(state.model) - A)
    logging.info("HQ-ADMM start, dims {}, R={}, t={}, initial fit {}"
                 .format(A.dims, rank, n_orthonormal, fit))
    converged = False
    while state.iteration < config.max_iter:
        W_prev, Y_prev, old_factors = iterate(state, A, config)
        if not (state.T.is_finite() and state.Y.is_finite()
                and np.all(np.isfinite(state.model.sigma))):
            raise SolverException("non-finite values at iteration {}"
                                  .format(state.iteration), state.iteration)
        recon = cp_reconstruct(state.model)
        fit_prev, fit = fit, frob_norm(recon - A)
        record = _record(state, A, config, fit, recon, W_prev, Y_prev,
                         old_factors)
        state.trace.append(record)
        logging.debug("iteration {} fit {}".format(state.iteration, fit))
        if abs(fit - fit_prev) <= config.tol:
            converged = True
            break
    elapsed = time.time() - start
    logging.info("HQ-ADMM stop after {} iterations, fit {}, converged {}"
                 .format(state.iteration, fit, converged))
    return SolveResult(state.model, state.iteration, fit, converged,
                       state.trace, state, elapsed)


def write_trace_csv(trace, path):
    """ Save trace records to CSV file, missing values are left empty.
    :param trace: sequence of TraceRecord objects.
    :param path: output file name.
    """
    with open(path, 'w') as f:
        w = csv.writer(f, lineterminator='\n')
        w.writerow(TRACE_COLUMNS)
        for r in trace:
            w.writerow(['' if v is None else repr(v) for v in r.row()])
