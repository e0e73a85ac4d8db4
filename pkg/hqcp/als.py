""" Alternating least squares for orthogonal CP approximation.

Least squares counterpart of hqadmm.solve(): one sweep updates factors in the
same mode order, orthonormal factors through the polar decomposition, then
refits sigma. Used as the comparison solver in benchmarks.
"""

import logging
import time

import numpy as np

from hqcp.config import *
from hqcp.enums import ORTHONORMAL
from hqcp.hqadmm import (SolveResult, SolverException, TraceRecord,
                         random_model, project_sigma, check_problem,
                         check_update, checked_polar)
from hqcp.tensor import (TensorException, cp_reconstruct, contract_columns,
                         frob_norm)


def als_sweep(A, model, iteration=1):
    """ Update every factor of model in place and then sigma.
    :param A: DenseTensor with data.
    :param model: CPModel object.
    :param iteration: sweep number reported by numerical errors.
    """
    for j in range(model.order):
        g = contract_columns(A, model.factors, j)
        if model.mode_kind(j) == ORTHONORMAL:
            model.factors[j] = checked_polar(g * model.sigma, j, iteration)
        else:
            norms = np.linalg.norm(g, axis=0)
            check_update(norms, j, iteration)
            keep = norms == 0
            # zero direction leaves the column unchanged with zero weight
            norms[keep] = 1.0
            f = g / norms
            f[:, keep] = model.factors[j][:, keep]
            model.factors[j] = f
            model.sigma = np.where(keep, 0.0, norms)
    model.sigma = project_sigma(A, model.factors)


def als_solve(A, rank, n_orthonormal, max_iter=MAX_ITERATIONS,
              tol=TOLERANCE, seed=SEED, initial=None, rng=None):
    """ Least squares CP approximation of A.
    :param A: DenseTensor with data.
    :param rank: number of components R.
    :param n_orthonormal: number of trailing orthonormal modes, 1..d.
    :param max_iter: sweep limit.
    :param tol: stop when fit changes less than this value.
    :param seed: seed for random initialization.
    :param initial: optional CPModel with starting factors.
    :param rng: optional numpy Generator, overrides seed.
    :return: SolveResult object.
    """
    if max_iter < 1:
        raise SolverException("max_iter should be at least 1")
    if not tol > 0:
        raise SolverException("tol should be positive, got {}".format(tol))
    check_problem(A, rank, n_orthonormal)
    start = time.time()
    if initial is None:
        if rng is None:
            rng = np.random.default_rng(seed)
        model = random_model(A.dims, rank, n_orthonormal, rng)
    else:
        if initial.dims != A.dims or initial.rank != rank \
                or initial.n_orthonormal != n_orthonormal:
            raise TensorException("initial model does not fit the problem")
        model = initial.copy()
    model.sigma = project_sigma(A, model.factors)
    fit = frob_norm(cp_reconstruct(model) - A)
    logging.info("ALS start, dims {}, R={}, t={}, initial fit {}"
                 .format(A.dims, rank, n_orthonormal, fit))
    trace = []
    converged = False
    iteration = 0
    while iteration < max_iter:
        iteration += 1
        als_sweep(A, model, iteration)
        fit_prev, fit = fit, frob_norm(cp_reconstruct(model) - A)
        if not (np.all(np.isfinite(model.sigma)) and np.isfinite(fit)):
            raise SolverException("non-finite values at iteration {}"
                                  .format(iteration), iteration)
        trace.append(TraceRecord(iteration, fit))
        logging.debug("sweep {} fit {}".format(iteration, fit))
        if abs(fit - fit_prev) <= tol:
            converged = True
            break
    elapsed = time.time() - start
    logging.info("ALS stop after {} sweeps, fit {}, converged {}"
                 .format(iteration, fit, converged))
    return SolveResult(model, iteration, fit, converged, trace,
                       elapsed_s=elapsed)
