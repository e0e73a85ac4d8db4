""" RCPD1 binary tensor files.

Layout, all values little-endian:
    4 bytes   magic 'RCPD'
    1 byte    version, 0x01
    uint32    order d
    d uint64  dimensions
    float64   values in row-major order, the last index varies fastest
"""

import os
import struct

import numpy as np

from hqcp.tensor import DenseTensor, CPModel, TensorException

MAGIC = b'RCPD'
VERSION = 1
_HEADER = struct.Struct('<4sBI')
_DIM = struct.Struct('<Q')


class RcpdException(Exception):
    """ Exceptions while parsing tensor files.
    """
    def __init__(self, message, offset=0):
        super(RcpdException, self).__init__("{} at byte {}"
                                            .format(message, offset))
        self.offset = offset


def parse_tensor(data):
    """ Decode tensor.
    :param data: bytes with RCPD1 content.
    :return: DenseTensor object.
    """
    if len(data) < _HEADER.size:
        raise RcpdException("truncated header", len(data))
    magic, version, order = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise RcpdException("bad magic {!r}".format(magic), 0)
    if version != VERSION:
        raise RcpdException("unsupported version {}".format(version), 4)
    if order < 2:
        raise RcpdException("tensor order should be at least 2, got {}"
                            .format(order), 5)
    offset = _HEADER.size
    dims = []
    for _ in range(order):
        if len(data) < offset + _DIM.size:
            raise RcpdException("truncated dimensions", len(data))
        n = _DIM.unpack_from(data, offset)[0]
        if n < 1:
            raise RcpdException("zero dimension", offset)
        dims.append(n)
        offset += _DIM.size
    count = int(np.prod(dims, dtype=object))
    expected = offset + 8 * count
    if len(data) < expected:
        raise RcpdException("truncated data, expected {} values"
                            .format(count), len(data))
    if len(data) > expected:
        raise RcpdException("extra bytes after data", expected)
    values = np.frombuffer(data, dtype='<f8', count=count, offset=offset)
    return DenseTensor(dims, values)


def encode_tensor(tensor):
    """ Encode tensor.
    :param tensor: DenseTensor object.
    :return: bytes.
    """
    header = _HEADER.pack(MAGIC, VERSION, tensor.order)
    dims = b''.join(_DIM.pack(n) for n in tensor.dims)
    return header + dims + tensor.flat().astype('<f8').tobytes()


def read_tensor(path):
    with open(path, 'rb') as f:
        data = f.read()
    return parse_tensor(data)


def write_tensor(path, tensor):
    with open(path, 'wb') as f:
        f.write(encode_tensor(tensor))


SIGMA_FILE = 'sigma.rcpd'
FACTOR_FILE = 'factor_{}.rcpd'


def write_model(directory, model):
    """ Save sigma as 1 x R matrix and every factor as n_j x R matrix.
    :param directory: existing directory.
    :param model: CPModel object.
    :return: list of written file names.
    """
    paths = [os.path.join(directory, SIGMA_FILE)]
    write_tensor(paths[0], DenseTensor((1, model.rank), model.sigma))
    for j, f in enumerate(model.factors):
        paths.append(os.path.join(directory, FACTOR_FILE.format(j)))
        write_tensor(paths[-1], DenseTensor.from_array(f))
    return paths


def read_model(directory, n_orthonormal):
    """ Load model saved by write_model().
    :param directory: directory with model files.
    :param n_orthonormal: number of trailing orthonormal factors.
    :return: CPModel object.
    """
    sigma = read_tensor(os.path.join(directory, SIGMA_FILE))
    if sigma.dims[0] != 1:
        raise TensorException("sigma should be stored as 1 x R matrix")
    factors = []
    j = 0
    while os.path.exists(os.path.join(directory, FACTOR_FILE.format(j))):
        factors.append(read_tensor(os.path.join(directory,
                                                FACTOR_FILE.format(j))).data)
        j += 1
    return CPModel(sigma.flat(), factors, n_orthonormal)
