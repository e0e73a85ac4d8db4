""" Synthetic data, noise models and the benchmark runner.
"""

import copy
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from hqcp.config import *
from hqcp.enums import SOLVER_HQ_ADMM, SOLVER_ALS
from hqcp.loss import LossException
from hqcp.tensor import (DenseTensor, CPModel, TensorException, cp_reconstruct,
                         frob_norm, normalize_columns, orthonormalize)
from hqcp.hqadmm import (SolverConfig, SolverException, solve,
                         warn_theory_regime)
from hqcp.als import als_solve


class SynthException(Exception):
    """ Bad generator parameters or degenerate data.
    """
    pass


class NoiseSpec(object):
    """ Base class for noise models. Subclasses implement apply().
    """
    kind = None

    def apply(self, normalized, rng):
        """ Contaminate tensor.
        :param normalized: clean tensor with unit Frobenius norm.
        :param rng: numpy Generator.
        :return: DenseTensor object.
        """
        raise NotImplementedError

    def params(self):
        return {}

    def as_dict(self):
        d = {'noise': self.kind}
        for k, v in self.params().items():
            d['noise_' + k] = v
        return d

    def __str__(self):
        return self.kind


def _scaled_unit(noise, beta):
    norm = np.linalg.norm(noise)
    if norm == 0:
        raise SynthException("noise draw is zero")
    return beta * noise / norm


class NoNoise(NoiseSpec):
    kind = 'none'

    def apply(self, normalized, rng):
        return normalized.copy()


class CauchyNoise(NoiseSpec):
    """ A0 / ||A0|| + beta * N / ||N||, N with Cauchy distributed entries.
    """
    kind = 'cauchy'

    def __init__(self, scale=CAUCHY_SCALE, beta=CAUCHY_BETA):
        if not scale > 0:
            raise SynthException("cauchy scale should be positive")
        if not beta >= 0:
            raise SynthException("beta should be nonnegative")
        self.scale = float(scale)
        self.beta = float(beta)

    def apply(self, normalized, rng):
        if self.beta == 0:
            return normalized.copy()
        n = cauchy_samples(normalized.dims, self.scale, rng)
        return DenseTensor.wrap(normalized.data + _scaled_unit(n, self.beta))

    def params(self):
        return {'scale': self.scale, 'beta': self.beta}


class GaussianNoise(NoiseSpec):
    """ A0 / ||A0|| + beta * N / ||N||, N standard normal.
    """
    kind = 'gaussian'

    def __init__(self, beta=GAUSSIAN_BETA):
        if not beta >= 0:
            raise SynthException("beta should be nonnegative")
        self.beta = float(beta)

    def apply(self, normalized, rng):
        if self.beta == 0:
            return normalized.copy()
        n = rng.standard_normal(normalized.dims)
        return DenseTensor.wrap(normalized.data + _scaled_unit(n, self.beta))

    def params(self):
        return {'beta': self.beta}


class OutlierNoise(NoiseSpec):
    """ A0 / ||A0|| + O, where O is sparse with uniform values on
        [low, high] at the fraction density of entries.
    """
    kind = 'outliers'

    def __init__(self, density=OUTLIER_DENSITY, low=OUTLIER_LOW,
                 high=OUTLIER_HIGH):
        if not 0 <= density <= 1:
            raise SynthException("density should be in [0, 1]")
        if not low <= high:
            raise SynthException("outlier range is empty")
        self.density = float(density)
        self.low = float(low)
        self.high = float(high)

    def apply(self, normalized, rng):
        mask = rng.random(normalized.dims) < self.density
        values = rng.uniform(self.low, self.high, normalized.dims)
        return DenseTensor.wrap(normalized.data + np.where(mask, values, 0.0))

    def params(self):
        return {'density': self.density, 'low': self.low, 'high': self.high}


NOISE_KINDS = (NoNoise.kind, CauchyNoise.kind, OutlierNoise.kind,
               GaussianNoise.kind)


def make_noise(kind, scale=None, beta=None, density=None, low=None,
               high=None):
    """ Create noise model by name. Parameters which are None are left at
        defaults, parameters the model does not use are ignored.
    """
    def pick(v, default):
        return default if v is None else v

    if kind == NoNoise.kind:
        return NoNoise()
    if kind == CauchyNoise.kind:
        return CauchyNoise(pick(scale, CAUCHY_SCALE), pick(beta, CAUCHY_BETA))
    if kind == GaussianNoise.kind:
        return GaussianNoise(pick(beta, GAUSSIAN_BETA))
    if kind == OutlierNoise.kind:
        return OutlierNoise(pick(density, OUTLIER_DENSITY),
                            pick(low, OUTLIER_LOW), pick(high, OUTLIER_HIGH))
    raise SynthException("unknown noise '{}'".format(kind))


def cauchy_samples(shape, scale, rng):
    """ Cauchy distributed values with zero location by inverse transform.
    """
    return scale * np.tan(np.pi * (rng.random(shape) - 0.5))


def gen_ground_truth(dims, n_orthonormal, rank, rng):
    """ Random model with factors drawn uniformly from [-1, 1] and put on
        their constraint sets, sigma standard normal.
    :param dims: mode sizes.
    :param n_orthonormal: number of trailing orthonormal modes.
    :param rank: number of components.
    :param rng: numpy Generator.
    :return: tuple (CPModel, DenseTensor A0).
    """
    d = len(dims)
    if n_orthonormal < 1 or n_orthonormal > d:
        raise TensorException("number of orthonormal modes should be in"
                              " [1, {}]".format(d))
    factors = []
    for j, n in enumerate(dims):
        f = rng.uniform(-1.0, 1.0, (n, rank))
        if j >= d - n_orthonormal:
            f = orthonormalize(f)
        else:
            f = normalize_columns(f)
        factors.append(f)
    model = CPModel(rng.standard_normal(rank), factors, n_orthonormal)
    return model, cp_reconstruct(model)


def normalize(tensor):
    norm = frob_norm(tensor)
    if norm == 0:
        raise SynthException("can not normalize zero tensor")
    return tensor * (1.0 / norm)


def add_noise(A0, spec, rng):
    """ Scale A0 to unit Frobenius norm and contaminate it.
    :param A0: clean DenseTensor.
    :param spec: NoiseSpec object.
    :param rng: numpy Generator.
    :return: DenseTensor object.
    """
    return spec.apply(normalize(A0), rng)


def err_metric(A0, model):
    """ ||A0 / ||A0|| - A* / ||A*|||| with A* the model reconstruction.
    :return: float in [0, 2].
    """
    recon = cp_reconstruct(model)
    if frob_norm(recon) == 0:
        raise SynthException("model reconstruction is zero")
    return frob_norm(normalize(A0) - normalize(recon))


def run_solver(solver, A, rank, n_orthonormal, config, rng=None,
               initial=None):
    """ Dispatch by solver tag.
    :param solver: SOLVER_HQ_ADMM or SOLVER_ALS.
    :return: SolveResult object.
    """
    if solver == SOLVER_HQ_ADMM:
        return solve(A, rank, n_orthonormal, config, initial, rng)
    if solver == SOLVER_ALS:
        return als_solve(A, rank, n_orthonormal, config.max_iter, config.tol,
                         config.seed, initial, rng)
    raise SolverException("unknown solver {}".format(solver))


class BenchCase(object):
    """ One row of a benchmark table: n^d tensor, t orthonormal modes.
    """
    def __init__(self, n, d, t, rank=BENCH_RANK, noise=None,
                 instances=BENCH_INSTANCES, seed=SEED):
        if instances < 1:
            raise SynthException("instances should be at least 1")
        if d < 2 or not 1 <= t <= d:
            raise SynthException("bad case d={}, t={}".format(d, t))
        if rank > n:
            raise SynthException("rank {} exceeds size {}".format(rank, n))
        self.n = int(n)
        self.d = int(d)
        self.t = int(t)
        self.rank = int(rank)
        self.noise = noise if noise is not None else CauchyNoise()
        self.instances = int(instances)
        self.seed = int(seed)

    @property
    def dims(self):
        return (self.n, ) * self.d

    def __str__(self):
        return "n={} d={} t={} R={} noise={}".format(self.n, self.d, self.t,
                                                    self.rank, self.noise)


class BenchResult(object):
    """ Per instance outcomes of one solver on one case. Failed instances
        are counted but excluded from statistics.
    """
    def __init__(self, case, solver):
        self.case = case
        self.solver = solver
        self.errs = []
        self.iterations = []
        self.times = []
        self.failures = 0

    def add(self, err, iterations, elapsed):
        self.errs.append(err)
        self.iterations.append(iterations)
        self.times.append(elapsed)

    @staticmethod
    def _mean(values):
        if not values:
            return float('nan')
        return math.fsum(sorted(values)) / len(values)

    @property
    def err_median(self):
        if not self.errs:
            return float('nan')
        return float(np.median(self.errs))

    @property
    def err_mean(self):
        return self._mean(self.errs)

    @property
    def iter_mean(self):
        return self._mean(self.iterations)

    @property
    def time_mean(self):
        return self._mean(self.times)

    def row(self):
        c = self.case
        return [c.n, c.d, c.t, c.rank, str(c.noise), str(self.solver),
                repr(self.err_median), repr(self.err_mean),
                repr(self.iter_mean), '{:.6f}'.format(self.time_mean)]


BENCH_COLUMNS = ('n', 'd', 't', 'R', 'noise', 'solver', 'err_median',
                 'err_mean', 'iter_mean', 'time_mean_s')


def instance_seeds(seed, case_index, instance):
    """ Independent streams for instance data and solver initialization.
    :return: tuple (data Generator, solver seed sequence).
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(case_index, instance))
    data_ss, solver_ss = ss.spawn(2)
    return np.random.default_rng(data_ss), solver_ss


def run_instance(case, case_index, instance, solvers, config):
    """ Generate one instance and run every solver on it. All solvers start
        from the same random point.
    :return: list with tuple (err, iterations, time) or None on failure for
             every solver.
    """
    data_rng, solver_ss = instance_seeds(case.seed, case_index, instance)
    model, A0 = gen_ground_truth(case.dims, case.t, case.rank, data_rng)
    A = add_noise(A0, case.noise, data_rng)
    out = []
    for solver in solvers:
        try:
            res = run_solver(solver, A, case.rank, case.t, config,
                             np.random.default_rng(solver_ss))
            out.append((err_metric(A0, res.model), res.iterations,
                        res.elapsed_s))
        except (SolverException, TensorException, SynthException,
                LossException, np.linalg.LinAlgError) as e:
            logging.warning("{} failed on case {} instance {}: {}"
                            .format(solver, case, instance, e))
            out.append(None)
    return out


def run_bench(cases, solvers, config=None, jobs=1):
    """ Run benchmark.
    :param cases: sequence of BenchCase objects.
    :param solvers: sequence of solver tags.
    :param config: SolverConfig object, seed field is ignored.
    :param jobs: number of instances run in parallel.
    :return: list of BenchResult objects, case major order.
    """
    if config is None:
        config = SolverConfig()
    tasks = [(ci, case, i) for ci, case in enumerate(cases)
             for i in range(case.instances)]
    # once per run instead of once per solve
    if tasks and SOLVER_HQ_ADMM in solvers:
        warn_theory_regime(config)
    config = copy.copy(config)
    config.tau_theory_warn = False
    logging.info("benchmark: {} cases, {} instances, {} jobs"
                 .format(len(cases), len(tasks), jobs))

    def task(t):
        return run_instance(t[1], t[0], t[2], solvers, config)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(task, tasks))
    else:
        outcomes = [task(t) for t in tasks]
    results = {}
    for ci, case in enumerate(cases):
        for s in solvers:
            results[(ci, s)] = BenchResult(case, s)
    # outcomes are in task order, so aggregation does not depend on jobs
    for (ci, case, _), out in zip(tasks, outcomes):
        for s, o in zip(solvers, out):
            if o is None:
                results[(ci, s)].failures += 1
            else:
                results[(ci, s)].add(*o)
    return [results[(ci, s)] for ci in range(len(cases)) for s in solvers]


def write_bench_csv(results, path):
    with open(path, 'w') as f:
        w = csv.writer(f, lineterminator='\n')
        w.writerow(BENCH_COLUMNS)
        for r in results:
            w.writerow(r.row())


def format_summary(results):
    """ Human readable table with one line per case and solver.
    """
    lines = ['{:>4} {:>2} {:>2} {:>3} {:<9} {:<8} {:>10} {:>8} {:>9}'.format(
        'n', 'd', 't', 'R', 'noise', 'solver', 'err', 'iter', 'time')]
    for r in results:
        c = r.case
        lines.append('{:>4} {:>2} {:>2} {:>3} {:<9} {:<8} {:>10.2E} {:>8.1f}'
                     ' {:>9.3f}'.format(c.n, c.d, c.t, c.rank, str(c.noise),
                                        str(r.solver), r.err_median,
                                        r.iter_mean, r.time_mean))
    return '\n'.join(lines)


# (d, t, sizes) rows of the reference synthetic tables, R = 5
_SMALL = (10, 20, 30, 40)
_LARGE = (10, 20, 50, 80, 90, 100)
TABLE_GRIDS = {
    'cauchy': ((3, 1, _LARGE), (3, 2, (10, 20, 60, 80, 90, 100)),
               (3, 3, (80, 100)),
               (4, 1, _SMALL), (4, 2, _SMALL), (4, 3, _SMALL)),
    'outliers': ((3, 1, _LARGE), (3, 2, _LARGE), (3, 3, (80, 100)),
                 (4, 1, _SMALL), (4, 2, _SMALL), (4, 3, _SMALL)),
    'gaussian': ((3, 1, _LARGE), (3, 2, _LARGE),
                 (4, 1, _SMALL), (4, 2, _SMALL), (4, 3, _SMALL)),
}


def table_cases(table, instances=BENCH_INSTANCES, seed=SEED, noise=None):
    """ Expand preset grid into cases.
    :param table: key of TABLE_GRIDS, also the default noise kind.
    :return: list of BenchCase objects.
    """
    if table not in TABLE_GRIDS:
        raise SynthException("unknown table '{}'".format(table))
    if noise is None:
        noise = make_noise(table)
    return [BenchCase(n, d, t, BENCH_RANK, noise, instances, seed)
            for d, t, sizes in TABLE_GRIDS[table] for n in sizes]
