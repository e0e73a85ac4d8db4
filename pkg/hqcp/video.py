""" Foreground and background extraction from grayscale videos.

Frames are stacked into an l x m x n tensor and approximated by
[[D; U, V]] with orthonormal U, V and the frame weights D, so the background
of frame r is U diag(D_r) V^T and the foreground is what is left. The
background needs only R (l + m + n) reals.
"""

import glob
import logging
import os

import numpy as np

from hqcp.config import *
from hqcp.enums import (NORMALIZATION_MAXVAL, NORMALIZATION_FROBENIUS,
                        FOREGROUND_ABS, FOREGROUND_OFFSET)
from hqcp.hqadmm import SolverConfig, solve
from hqcp.pgm import read_pgm, write_pgm, to_pixels
from hqcp.tensor import DenseTensor


class VideoException(Exception):
    """ Exceptions of video processing.
    """
    pass


class VideoTensor(object):
    """ Frames as an l x m x n tensor. Values are raw pixels divided by
        scale, original_max is the largest PGM maxval of the source frames.
    """
    def __init__(self, tensor, original_max=PGM_MAXVAL,
                 normalization=NORMALIZATION_MAXVAL, scale=None):
        if tensor.order != 3:
            raise VideoException("video tensor should have order 3")
        self.tensor = tensor
        self.original_max = original_max
        self.normalization = normalization
        self.scale = float(original_max if scale is None else scale)

    @property
    def frames(self):
        return self.tensor.dims[0]

    @property
    def height(self):
        return self.tensor.dims[1]

    @property
    def width(self):
        return self.tensor.dims[2]

    def to_unit(self, values):
        """ Map values of the tensor scale to [0, 1] pixel intensities.
        """
        return np.asarray(values) * (self.scale / self.original_max)


class FBResult(object):
    """ Factors of the background model, backgrounds and foregrounds.
    """
    def __init__(self, video, D, U, V, solve_result=None):
        self.video = video
        self.D = D
        self.U = U
        self.V = V
        self.solve_result = solve_result
        self._background = None

    @property
    def rank(self):
        return self.D.shape[1]

    def background(self):
        """ B_r = U diag(D_r) V^T for every frame.
        :return: array l x m x n.
        """
        if self._background is None:
            self._background = np.einsum('ri,mi,ni->rmn', self.D, self.U,
                                         self.V)
        return self._background

    def foreground(self):
        """ F_r = A_r - B_r for every frame.
        :return: array l x m x n.
        """
        return self.video.tensor.data - self.background()

    def storage_size(self):
        return self.D.size + self.U.size + self.V.size


def load_frames(directory, normalization=NORMALIZATION_MAXVAL):
    """ Read P5 PGM frames, order is lexicographic by file name. Only files
        named *.pgm are frames, other files are skipped and logged, a
        *.pgm file which is not P5 raises PgmException.
    :param directory: directory with *.pgm files.
    :param normalization: NORMALIZATION_MAXVAL divides pixels by maxval,
                          NORMALIZATION_FROBENIUS scales the tensor to unit
                          Frobenius norm.
    :return: VideoTensor object.
    """
    if not os.path.isdir(directory):
        raise IOError("no such directory '{}'".format(directory))
    names = sorted(glob.glob(os.path.join(directory, '*.pgm')))
    others = sorted(set(p for p in glob.glob(os.path.join(directory, '*'))
                        if os.path.isfile(p)) - set(names))
    if others:
        logging.info("skipped {} files which are not *.pgm frames in {}:"
                     " {}".format(len(others), directory, ', '.join(
                         os.path.basename(p) for p in others)))
    if not names:
        raise VideoException("no PGM frames in '{}'".format(directory))
    frames = []
    maxvals = []
    for name in names:
        pixels, maxval = read_pgm(name)
        if frames and pixels.shape != frames[0].shape:
            raise VideoException("frame '{}' has size {}, expected {}"
                                 .format(name, pixels.shape, frames[0].shape))
        frames.append(pixels)
        maxvals.append(maxval)
    original_max = max(maxvals)
    # frames with smaller maxval are brought to the common scale
    raw = np.stack([f * (float(original_max) / mv)
                    for f, mv in zip(frames, maxvals)])
    if normalization == NORMALIZATION_MAXVAL:
        scale = float(original_max)
    elif normalization == NORMALIZATION_FROBENIUS:
        scale = float(np.linalg.norm(raw))
        if scale == 0:
            raise VideoException("all frames are black, can not normalize")
    else:
        raise VideoException("unknown normalization {}".format(normalization))
    logging.info("loaded {} frames {}x{} from {}".format(
        len(frames), frames[0].shape[0], frames[0].shape[1], directory))
    return VideoTensor(DenseTensor.wrap(raw / scale), original_max,
                       normalization, scale)


def extract(video, rank=VIDEO_RANK, config=None, initial=None):
    """ Split video into low rank background and foreground.
    :param video: VideoTensor object.
    :param rank: number of components, up to min(m, n).
    :param config: SolverConfig object.
    :param initial: optional CPModel with starting factors.
    :return: FBResult object.
    """
    if rank > min(video.height, video.width):
        raise VideoException("rank {} exceeds frame size {}x{}".format(
            rank, video.height, video.width))
    if config is None:
        config = SolverConfig()
    res = solve(video.tensor, rank, 2, config, initial)
    model = res.model
    D = model.factors[0] * model.sigma
    logging.info("extracted background, rank {}, {} iterations, compression"
                 " {:.2f}%".format(rank, res.iterations, compression_percent(
                     video.frames, video.height, video.width, rank)))
    return FBResult(video, D, model.factors[1], model.factors[2], res)


def linear_path(frames, height, width, block):
    """ Top left block positions from the upper left to the lower right
        corner.
    :return: list of (row, column) tuples.
    """
    if frames == 1:
        return [(0, 0)]
    return [(int(round((height - block) * k / (frames - 1.0))),
             int(round((width - block) * k / (frames - 1.0))))
            for k in range(frames)]


def gen_synthetic_video(frames, height, width, bg_rank=3, block=8, path=None,
                        contrast=0.8, rng=None):
    """ Static low rank background with a bright moving square.
    :param frames: number of frames l.
    :param height: frame height m.
    :param width: frame width n.
    :param bg_rank: rank of the background image.
    :param block: side of the square.
    :param path: top left positions per frame, linear_path() if None.
    :param contrast: square brightness above background, in [0, 1).
                     Background peaks at 1 - contrast.
    :param rng: numpy Generator.
    :return: tuple (VideoTensor, foreground mask l x m x n,
             true background l x m x n).
    """
    if not 1 <= bg_rank <= min(height, width):
        raise VideoException("background rank should be in [1, {}]"
                             .format(min(height, width)))
    if not 0 <= contrast < 1:
        raise VideoException("contrast should be in [0, 1)")
    if frames < 1 or block < 1:
        raise VideoException("bad video parameters")
    if rng is None:
        rng = np.random.default_rng(SEED)
    if path is None:
        if block > min(height, width):
            raise VideoException("block exceeds frame bounds")
        path = linear_path(frames, height, width, block)
    if len(path) != frames:
        raise VideoException("path should have {} positions".format(frames))
    image = np.dot(rng.random((height, bg_rank)),
                   rng.random((width, bg_rank)).T)
    image *= (1.0 - contrast) / image.max()
    background = np.repeat(image[None, :, :], frames, axis=0)
    data = background.copy()
    mask = np.zeros(data.shape, dtype=bool)
    for k, (r, c) in enumerate(path):
        if r < 0 or c < 0 or r + block > height or c + block > width:
            raise VideoException("block at ({}, {}) exceeds frame bounds"
                                 .format(r, c))
        if contrast > 0:
            data[k, r:r + block, c:c + block] += contrast
            mask[k, r:r + block, c:c + block] = True
    video = VideoTensor(DenseTensor.wrap(data), PGM_MAXVAL,
                        NORMALIZATION_MAXVAL)
    return video, mask, background


def write_frames(video, directory):
    """ Save video as P5 frames frame_00000.pgm, frame_00001.pgm and so on.
    :return: list of file names.
    """
    os.makedirs(directory, exist_ok=True)
    paths = []
    for k in range(video.frames):
        paths.append(os.path.join(directory, 'frame_{:05d}.pgm'.format(k)))
        write_pgm(paths[-1], to_pixels(video.to_unit(video.tensor.data[k]),
                                       video.original_max),
                  video.original_max)
    return paths


def export_frames(result, directory, foreground_mode=FOREGROUND_ABS):
    """ Save backgrounds to directory/background and foregrounds to
        directory/foreground as 8 bit P5 frames.
    :param result: FBResult object.
    :param directory: output directory.
    :param foreground_mode: FOREGROUND_ABS scales |F| by its maximum,
                            FOREGROUND_OFFSET maps F from [-1, 1] to [0, 1].
    :return: tuple (background file names, foreground file names).
    """
    video = result.video
    background = video.to_unit(result.background())
    foreground = video.to_unit(result.foreground())
    if foreground_mode == FOREGROUND_ABS:
        foreground = np.abs(foreground)
        peak = foreground.max()
        if peak > 0:
            foreground = foreground / peak
    elif foreground_mode == FOREGROUND_OFFSET:
        foreground = (foreground + 1.0) * 0.5
    else:
        raise VideoException("unknown foreground mode {}"
                             .format(foreground_mode))
    out = []
    for name, frames in (('background', background),
                         ('foreground', foreground)):
        d = os.path.join(directory, name)
        os.makedirs(d, exist_ok=True)
        paths = []
        for k in range(frames.shape[0]):
            paths.append(os.path.join(d, 'frame_{:05d}.pgm'.format(k)))
            write_pgm(paths[-1], to_pixels(frames[k], PGM_MAXVAL), PGM_MAXVAL)
        out.append(paths)
    return tuple(out)


def compression_ratio(frames, height, width, rank):
    """ R (l + m + n) / (l m n), storage of the factors relative to the raw
        background frames.
    """
    return rank * (frames + height + width) / float(frames * height * width)


def compression_percent(frames, height, width, rank):
    # integer numerator keeps ties like 0.15625 exact for formatting
    return 100 * rank * (frames + height + width) / (frames * height * width)


def compression_table(frames, height, width, ranks=(10, 20, 30, 40)):
    """ Compression of background factors for several ranks.
    :return: list of tuples (rank, percent string).
    """
    return [(r, '{:.2f}%'.format(compression_percent(frames, height, width, r)))
            for r in ranks]


def foreground_f1(result, mask, threshold):
    """ F1 score of |F| > threshold against the true foreground mask.
    :return: float in [0, 1], 1 if both masks are empty.
    """
    predicted = np.abs(result.foreground()) > threshold
    mask = np.asarray(mask, dtype=bool)
    tp = int(np.sum(predicted & mask))
    fp = int(np.sum(predicted & ~mask))
    fn = int(np.sum(~predicted & mask))
    if tp + fp + fn == 0:
        return 1.0
    return 2.0 * tp / (2 * tp + fp + fn)


def background_error(result, background):
    """ ||B - B_true|| / ||B_true||.
    :param background: true background, l x m x n array.
    """
    background = np.asarray(background, dtype=np.float64)
    norm = np.linalg.norm(background)
    if norm == 0:
        raise VideoException("true background is zero")
    return float(np.linalg.norm(result.background() - background) / norm)
