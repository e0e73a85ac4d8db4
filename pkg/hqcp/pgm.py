""" Binary PGM (P5) images.
"""

import re

import numpy as np

from hqcp.config import PGM_MAXVAL

# header tokens separated by whitespace, comments run to the end of line
_TOKEN = re.compile(br'\s*(?:#[^\n]*\n\s*)*(\S+)')


class PgmException(Exception):
    """ Malformed or unsupported PGM data.
    """
    pass


def parse_pgm(data):
    """ Decode P5 image.
    :param data: file content, bytes.
    :return: tuple (pixels as 2d array of integers height x width, maxval).
    """
    tokens = []
    pos = 0
    while len(tokens) < 4:
        m = _TOKEN.match(data, pos)
        if m is None:
            raise PgmException("truncated header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b'P5':
        raise PgmException("not a binary PGM file, magic {!r}"
                           .format(tokens[0]))
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise PgmException("bad header values {!r}".format(tokens[1:]))
    if width < 1 or height < 1 or maxval < 1 or maxval > 65535:
        raise PgmException("bad header values {} {} {}"
                           .format(width, height, maxval))
    # exactly one whitespace byte separates header and raster
    pos += 1
    dtype = np.dtype('u1') if maxval < 256 else np.dtype('>u2')
    size = width * height * dtype.itemsize
    if len(data) - pos < size:
        raise PgmException("raster is too short, {} bytes instead of {}"
                           .format(len(data) - pos, size))
    pixels = np.frombuffer(data, dtype=dtype, count=width * height,
                           offset=pos)
    return pixels.reshape(height, width).astype(np.int64), maxval


def read_pgm(path):
    """ Read P5 image from file.
    :param path: file name.
    :return: tuple (pixels height x width, maxval).
    """
    with open(path, 'rb') as f:
        data = f.read()
    return parse_pgm(data)


def encode_pgm(pixels, maxval=PGM_MAXVAL):
    """ Encode integer image.
    :param pixels: 2d array with values in [0, maxval].
    :param maxval: maximum pixel value, up to 65535.
    :return: bytes.
    """
    pixels = np.asarray(pixels)
    if pixels.ndim != 2:
        raise PgmException("image should be two dimensional")
    if maxval < 1 or maxval > 65535:
        raise PgmException("bad maxval {}".format(maxval))
    if pixels.size and (pixels.min() < 0 or pixels.max() > maxval):
        raise PgmException("pixel values out of [0, {}]".format(maxval))
    dtype = np.dtype('u1') if maxval < 256 else np.dtype('>u2')
    height, width = pixels.shape
    header = 'P5\n{} {}\n{}\n'.format(width, height, maxval).encode('ascii')
    return header + pixels.astype(dtype).tobytes()


def write_pgm(path, pixels, maxval=PGM_MAXVAL):
    with open(path, 'wb') as f:
        f.write(encode_pgm(pixels, maxval))


def to_pixels(image, maxval=PGM_MAXVAL):
    """ Quantize real image with values in [0, 1], values outside are
        clamped.
    :return: integer array.
    """
    image = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    return np.rint(image * maxval).astype(np.int64)
