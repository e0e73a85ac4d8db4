""" Cauchy loss and its half-quadratic form.

    phi(t) = delta^2 / 2 * log(1 + t^2 / delta^2)

is the minimum over w > 0 of the quadratic

    w * t^2 / 2 + delta^2 / 2 * rho(w),   rho(w) = w - log(w) - 1,

which is attained at w = delta^2 / (delta^2 + t^2). This turns a robust fit
into a sequence of weighted least squares problems.
All functions below accept scalars or numpy arrays.
"""

import math

import numpy as np

from hqcp.config import DELTA


class LossException(Exception):
    """ Arguments out of the loss function domain.
    """
    pass


def check_delta(delta):
    """ Validate scale parameter.
    :param delta: scale parameter.
    :return: delta as float.
    """
    delta = float(delta)
    if not math.isfinite(delta) or delta <= 0:
        raise LossException("delta should be positive and finite, got {}"
                            .format(delta))
    return delta


# t / delta above this value would overflow when squared
_LARGE_RATIO = 1e150


def phi(t, delta):
    """ Cauchy loss. log1p keeps precision when t is much less than delta,
        for huge t it is evaluated as delta^2 (log|r| + log1p(1 / r^2) / 2).
    """
    r = np.abs(np.asarray(t, dtype=np.float64) / delta)
    large = r > _LARGE_RATIO
    small_r = np.where(large, 0.0, r)
    large_r = np.where(large, r, 1.0)
    value = np.where(large,
                     2.0 * np.log(large_r)
                     + np.log1p(1.0 / (large_r * large_r)),
                     np.log1p(small_r * small_r))
    return (0.5 * delta * delta * value)[()]


def phi_prime(t, delta):
    """ Derivative of the Cauchy loss, t / (1 + t^2 / delta^2).
        It reaches delta / 2 at |t| = delta and tends to zero at infinity.
    """
    t = np.asarray(t, dtype=np.float64)
    r = t / delta
    return t / (1.0 + r * r)


def hq_weight(t, delta):
    """ Optimal half-quadratic weight delta^2 / (delta^2 + t^2), in (0, 1].
    """
    r = np.asarray(t, dtype=np.float64) / delta
    return 1.0 / (1.0 + r * r)


def rho(w):
    """ Penalty on weights, w - log(w) - 1. Zero only at w = 1.
    """
    w = np.asarray(w, dtype=np.float64)
    if np.any(w <= 0):
        raise LossException("weights should be positive")
    return w - np.log(w) - 1.0


def hq_value(t, w, delta):
    """ Half-quadratic objective w * t^2 / 2 + delta^2 / 2 * rho(w).
        Equals phi(t, delta) for w = hq_weight(t, delta) and is not less
        than it for other w.
    """
    t = np.asarray(t, dtype=np.float64)
    return 0.5 * w * t * t + 0.5 * delta * delta * rho(w)


def total_loss(residual, delta):
    """ Sum of the Cauchy loss over all entries of the residual.
    :param residual: DenseTensor object.
    :param delta: scale parameter.
    :return: float.
    """
    return float(np.sum(phi(residual.data, delta)))


def loss_table(ts, deltas):
    """ Tabulate loss, derivative and weight.
    :param ts: sequence of arguments.
    :param deltas: sequence of scale parameters.
    :return: list of tuples (delta, t, phi, phi_prime, weight).
    """
    rows = []
    for delta in deltas:
        delta = check_delta(delta)
        for t in ts:
            rows.append((delta, float(t), float(phi(t, delta)),
                         float(phi_prime(t, delta)),
                         float(hq_weight(t, delta))))
    return rows


class CauchyLoss(object):
    """ Cauchy loss with fixed scale.
    """
    def __init__(self, delta=DELTA):
        """ Create object.
        :param delta: positive scale parameter.
        """
        self.delta = check_delta(delta)

    def phi(self, t):
        return phi(t, self.delta)

    def phi_prime(self, t):
        return phi_prime(t, self.delta)

    def weight(self, t):
        return hq_weight(t, self.delta)

    def hq_value(self, t, w):
        return hq_value(t, w, self.delta)

    def total(self, residual):
        return total_loss(residual, self.delta)

    def penalty(self, weights):
        """ delta^2 / 2 * sum of rho over all weights.
        :param weights: DenseTensor object with positive entries.
        """
        return 0.5 * self.delta * self.delta * float(np.sum(rho(weights.data)))
