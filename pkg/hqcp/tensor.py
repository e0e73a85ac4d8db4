""" Dense tensors, CP models and the multilinear kernels used by solvers.

Tensors are stored row-major, i.e. the last index varies fastest. Modes are
numbered from zero. Matricization in mode j keeps the remaining modes in
ascending order with the last one fastest, so it pairs with khatri_rao() of
the remaining factors taken in ascending mode order.
"""

import math

import numpy as np
import scipy.linalg

from hqcp.config import CONSTRAINT_TOLERANCE
from hqcp.enums import UNIT_COLUMNS, ORTHONORMAL


class TensorException(Exception):
    """ Structural errors: shapes, modes and constraints.
    """
    pass


class DenseTensor(object):
    """ Real tensor of order two or more with explicit dimensions.
    """
    def __init__(self, dims, data=None):
        """ Create tensor.
        :param dims: sequence of positive integers.
        :param data: values in row-major order, flat or already shaped.
                     Zeros if not specified. Values are copied.
        """
        dims = tuple(int(n) for n in dims)
        if len(dims) < 2:
            raise TensorException("tensor order should be at least 2, got {}"
                                  .format(len(dims)))
        if any(n < 1 for n in dims):
            raise TensorException("bad dimensions {}".format(dims))
        if data is None:
            self.data = np.zeros(dims)
            return
        data = np.array(data, dtype=np.float64)
        if data.size != int(np.prod(dims)):
            raise TensorException("data length {} does not match dimensions"
                                  " {}".format(data.size, dims))
        self.data = np.ascontiguousarray(data.reshape(dims))

    @classmethod
    def from_array(cls, array):
        """ Create tensor with the shape of numpy array.
        :param array: array with two or more dimensions.
        :return: DenseTensor object.
        """
        return cls(np.shape(array), array)

    @classmethod
    def wrap(cls, array):
        """ Create tensor which shares memory with float64 array.
            Caller must not modify the array afterwards.
        """
        t = cls.__new__(cls)
        if array.ndim < 2:
            raise TensorException("tensor order should be at least 2, got {}"
                                  .format(array.ndim))
        t.data = np.ascontiguousarray(array, dtype=np.float64)
        return t

    @property
    def dims(self):
        return self.data.shape

    @property
    def order(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def flat(self):
        """ Values in row-major order.
        :return: one dimensional array.
        """
        return self.data.ravel()

    def copy(self):
        return DenseTensor.wrap(self.data.copy())

    def is_finite(self):
        return bool(np.all(np.isfinite(self.data)))

    def __check(self, other):
        if self.dims != other.dims:
            raise TensorException("dimension mismatch {} and {}"
                                  .format(self.dims, other.dims))

    # build in function implementation
    def __add__(self, other):
        self.__check(other)
        return DenseTensor.wrap(self.data + other.data)

    def __sub__(self, other):
        self.__check(other)
        return DenseTensor.wrap(self.data - other.data)

    def __mul__(self, v):
        return DenseTensor.wrap(self.data * float(v))

    __rmul__ = __mul__

    def __neg__(self):
        return DenseTensor.wrap(-self.data)

    def __str__(self):
        return 'DenseTensor' + str(self.dims)


class CPModel(object):
    """ Weighted sum of rank-1 tensors [[sigma; U_1, ..., U_d]].
        The last n_orthonormal factors have orthonormal columns, columns of
        the other factors have unit length.
    """
    def __init__(self, sigma, factors, n_orthonormal):
        """ Create object. Values are copied, constraints are not checked,
            use check_constraints() for this.
        :param sigma: weights, vector of length R.
        :param factors: sequence of d matrices, j-th is n_j x R.
        :param n_orthonormal: number of trailing orthonormal factors.
        """
        self.sigma = np.array(sigma, dtype=np.float64).ravel()
        self.factors = [np.array(f, dtype=np.float64) for f in factors]
        rank = self.sigma.size
        if rank < 1:
            raise TensorException("rank should be at least 1")
        if len(self.factors) < 2:
            raise TensorException("model order should be at least 2")
        for j, f in enumerate(self.factors):
            if f.ndim != 2 or f.shape[1] != rank:
                raise TensorException("factor {} has shape {}, expected n x {}"
                                      .format(j, f.shape, rank))
        n_orthonormal = int(n_orthonormal)
        if n_orthonormal < 0 or n_orthonormal > len(self.factors):
            raise TensorException("bad number of orthonormal modes {}"
                                  .format(n_orthonormal))
        self.n_orthonormal = n_orthonormal

    @property
    def rank(self):
        return self.sigma.size

    @property
    def order(self):
        return len(self.factors)

    @property
    def dims(self):
        return tuple(f.shape[0] for f in self.factors)

    def mode_kind(self, mode):
        """ Get constraint of factor.
        :param mode: mode index.
        :return: UNIT_COLUMNS or ORTHONORMAL.
        """
        if mode >= self.order - self.n_orthonormal:
            return ORTHONORMAL
        return UNIT_COLUMNS

    def mode_kinds(self):
        return [self.mode_kind(j) for j in range(self.order)]

    def copy(self):
        return CPModel(self.sigma, self.factors, self.n_orthonormal)

    def constraint_error(self):
        """ Measure how far factors are from their constraint sets.
        :return: maximum entrywise deviation of U^T U from identity for
                 orthonormal factors and of column norms from one for the
                 others.
        """
        err = 0.0
        for j, f in enumerate(self.factors):
            if self.mode_kind(j) == ORTHONORMAL:
                gram = np.dot(f.T, f)
                e = np.max(np.abs(gram - np.eye(self.rank)))
            else:
                e = np.max(np.abs(np.linalg.norm(f, axis=0) - 1.0))
            err = max(err, float(e))
        return err

    def check_constraints(self, tolerance=CONSTRAINT_TOLERANCE):
        """ Raise TensorException if constraints are violated.
        """
        err = self.constraint_error()
        if err > tolerance:
            raise TensorException("factor constraints violated by {}"
                                  .format(err))

    def reconstruct(self):
        return cp_reconstruct(self)

    def storage_size(self):
        """ Number of reals needed to store the model.
        """
        return self.rank + sum(f.size for f in self.factors)


def khatri_rao(matrices):
    """ Columnwise Kronecker product, the last matrix varies fastest.
    :param matrices: sequence of matrices with equal column counts.
    :return: matrix (prod of row counts) x R.
    """
    if len(matrices) == 0:
        raise TensorException("khatri-rao product of nothing")
    matrices = [np.asarray(m, dtype=np.float64) for m in matrices]
    rank = matrices[0].shape[1] if matrices[0].ndim == 2 else None
    for m in matrices:
        if m.ndim != 2 or m.shape[1] != rank:
            raise TensorException("ragged column counts in khatri-rao product")
    res = matrices[0]
    for m in matrices[1:]:
        res = (res[:, None, :] * m[None, :, :]).reshape(-1, rank)
    return res


def matricize(tensor, mode):
    """ Unfold tensor.
    :param tensor: DenseTensor object.
    :param mode: mode which becomes rows.
    :return: matrix n_mode x (product of other dimensions).
    """
    if mode < 0 or mode >= tensor.order:
        raise TensorException("mode {} is out of range for order {}"
                              .format(mode, tensor.order))
    return np.moveaxis(tensor.data, mode, 0).reshape(tensor.dims[mode], -1)


def cp_reconstruct(model):
    """ Build full tensor sum_i sigma_i u_1i x ... x u_di.
    :param model: CPModel object.
    :return: DenseTensor object.
    """
    for f in model.factors:
        if f.ndim != 2 or f.shape[1] != model.rank:
            raise TensorException("factor dimensions mismatch")
    head = model.factors[0] * model.sigma
    rest = khatri_rao(model.factors[1:])
    return DenseTensor.wrap(np.dot(head, rest.T).reshape(model.dims))


def contract_all_but(tensor, vectors, mode):
    """ Multiply tensor by one vector in every mode except mode.
    :param tensor: DenseTensor object.
    :param vectors: d - 1 vectors in ascending mode order, mode skipped.
    :param mode: mode which is left.
    :return: vector of length n_mode.
    """
    if mode < 0 or mode >= tensor.order:
        raise TensorException("mode {} is out of range for order {}"
                              .format(mode, tensor.order))
    if len(vectors) != tensor.order - 1:
        raise TensorException("expected {} vectors, got {}"
                              .format(tensor.order - 1, len(vectors)))
    others = [l for l in range(tensor.order) if l != mode]
    res = tensor.data
    # contract from the last mode, so positions of remaining modes are kept
    for l, v in reversed(list(zip(others, vectors))):
        v = np.asarray(v, dtype=np.float64).ravel()
        if v.size != tensor.dims[l]:
            raise TensorException("vector for mode {} has length {}, expected"
                                  " {}".format(l, v.size, tensor.dims[l]))
        res = np.tensordot(res, v, axes=([l], [0]))
    return res


def contract_columns(tensor, factors, mode):
    """ contract_all_but() for all R columns at once.
    :param tensor: DenseTensor object.
    :param factors: d matrices, the one at mode is ignored.
    :param mode: mode which is left.
    :return: matrix n_mode x R, column i is the contraction with column i
             of every other factor.
    """
    others = [factors[l] for l in range(tensor.order) if l != mode]
    return np.dot(matricize(tensor, mode), khatri_rao(others))


def _check_dims(a, b):
    if a.dims != b.dims:
        raise TensorException("dimension mismatch {} and {}"
                              .format(a.dims, b.dims))


def inner(a, b):
    """ Sum of entrywise products.
    """
    _check_dims(a, b)
    return float(np.dot(a.flat(), b.flat()))


def frob_norm(a):
    """ Square root of the sum of squares.
    """
    return math.sqrt(inner(a, a))


def hadamard(a, b):
    """ Entrywise product.
    """
    _check_dims(a, b)
    return DenseTensor.wrap(a.data * b.data)


def term_gram(model):
    """ Gram matrix of vectorized rank-1 terms u_1i x ... x u_di.
    :param model: CPModel object.
    :return: R x R matrix, identity if at least one factor is orthonormal and
             the others have unit columns.
    """
    gram = np.ones((model.rank, model.rank))
    for f in model.factors:
        gram *= np.dot(f.T, f)
    return gram


def normalize_columns(matrix):
    """ Scale every column to unit Euclidean norm.
    """
    norms = np.linalg.norm(matrix, axis=0)
    if np.any(norms == 0):
        raise TensorException("can not normalize zero column")
    return matrix / norms


def orthonormalize(matrix):
    """ Thin QR factor with nonnegative diagonal of R.
    :param matrix: n x R matrix with n >= R.
    :return: n x R matrix with orthonormal columns.
    """
    n, rank = matrix.shape
    if rank > n:
        raise TensorException("can not have {} orthonormal columns of length"
                              " {}".format(rank, n))
    q, r = scipy.linalg.qr(matrix, mode='economic')
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def polar(matrix):
    """ Polar decomposition matrix = U H computed with thin SVD P S Q^T.
        Singular vector pairs are flipped so that the largest magnitude entry
        of every left singular vector is positive.
    :param matrix: n x R matrix with n >= R.
    :return: tuple (U, H), U = P Q^T has orthonormal columns and maximizes
             <matrix, U> over them, H = Q S Q^T is symmetric positive
             semidefinite.
    """
    n, rank = matrix.shape
    if rank > n:
        raise TensorException("can not have {} orthonormal columns of length"
                              " {}".format(rank, n))
    p, s, qt = scipy.linalg.svd(matrix, full_matrices=False,
                                lapack_driver='gesvd')
    idx = np.argmax(np.abs(p), axis=0)
    signs = np.sign(p[idx, np.arange(p.shape[1])])
    signs[signs == 0] = 1.0
    p = p * signs
    qt = qt * signs[:, None]
    return np.dot(p, qt), np.dot(qt.T * s, qt)
