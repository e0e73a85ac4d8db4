import os
import shutil
import tempfile
import unittest

import numpy as np

from hqcp.video import *
from hqcp.pgm import PgmException


class TestVideo(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.rng = np.random.default_rng(4)

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def __frames(self, images, maxval=255, name='frame_{:03d}.pgm'):
        for k, image in enumerate(images):
            write_pgm(os.path.join(self.tmp, name.format(k)),
                      np.asarray(image), maxval)

    def test_black_frame(self):
        self.__frames([np.zeros((3, 4), dtype=int)])
        v = load_frames(self.tmp)
        self.assertEqual((v.frames, v.height, v.width), (1, 3, 4))
        self.assertEqual(np.count_nonzero(v.tensor.data), 0)
        self.assertRaises(VideoException, load_frames, self.tmp,
                          NORMALIZATION_FROBENIUS)

    def test_checkerboards(self):
        a = [[0, 255], [255, 0]]
        b = [[255, 0], [0, 255]]
        # names sort in a different order than they are written
        self.__frames([a], name='c.pgm')
        self.__frames([b], name='a.pgm')
        self.__frames([a], name='b.pgm')
        v = load_frames(self.tmp)
        expected = np.array([b, a, a]) / 255.0
        self.assertTrue(np.array_equal(v.tensor.data, expected))
        self.assertEqual(v.original_max, 255)
        v = load_frames(self.tmp, NORMALIZATION_FROBENIUS)
        self.assertAlmostEqual(np.linalg.norm(v.tensor.data), 1.0, places=14)
        self.assertAlmostEqual(v.to_unit(v.tensor.data)[0, 0, 0], 1.0,
                               places=14)

    def test_load_errors(self):
        self.assertRaises(IOError, load_frames,
                          os.path.join(self.tmp, 'missing'))
        self.assertRaises(VideoException, load_frames, self.tmp)
        self.__frames([np.zeros((2, 2), dtype=int),
                       np.zeros((2, 3), dtype=int)])
        self.assertRaises(VideoException, load_frames, self.tmp)
        shutil.rmtree(self.tmp)
        os.mkdir(self.tmp)
        with open(os.path.join(self.tmp, 'x.pgm'), 'wb') as f:
            f.write(b'P2\n1 1\n255\n0\n')
        self.assertRaises(PgmException, load_frames, self.tmp)

    def test_other_files(self):
        self.__frames([np.zeros((2, 3), dtype=int)] * 2)
        with open(os.path.join(self.tmp, 'notes.txt'), 'w') as f:
            f.write('not a frame\n')
        with open(os.path.join(self.tmp, 'frame_002.PGM.bak'), 'wb') as f:
            f.write(b'P5\n')
        os.mkdir(os.path.join(self.tmp, 'sub'))
        with self.assertLogs(level='INFO') as cm:
            v = load_frames(self.tmp)
        self.assertEqual(v.frames, 2)
        skipped = [r.getMessage() for r in cm.records
                   if 'skipped' in r.getMessage()]
        self.assertEqual(len(skipped), 1)
        self.assertIn('skipped 2 files', skipped[0])
        self.assertIn('notes.txt', skipped[0])
        self.assertIn('frame_002.PGM.bak', skipped[0])
        self.assertNotIn('sub', skipped[0].split(':')[-1])

    def test_roundtrip(self):
        video, _, _ = gen_synthetic_video(4, 10, 12, 2, 3)
        d = os.path.join(self.tmp, 'frames')
        paths = write_frames(video, d)
        self.assertEqual(len(paths), 4)
        v = load_frames(d)
        self.assertLessEqual(np.max(np.abs(v.tensor.data
                                           - video.tensor.data)),
                             0.5 / 255 + 1e-12)
        write_frames(v, os.path.join(self.tmp, 'again'))
        self.assertTrue(np.array_equal(load_frames(os.path.join(
            self.tmp, 'again')).tensor.data, v.tensor.data))

    def test_generator(self):
        video, mask, background = gen_synthetic_video(10, 20, 24, 3, 5,
                                                      contrast=0.6)
        self.assertEqual(int(mask.sum()), 25 * 10)
        diff = video.tensor.data - background
        self.assertTrue(np.allclose(diff[mask], 0.6))
        self.assertTrue(np.all(diff[~mask] == 0))
        self.assertLessEqual(video.tensor.data.max(), 1.0 + 1e-12)
        self.assertGreaterEqual(background.min(), 0.0)
        self.assertEqual(np.linalg.matrix_rank(background[0]), 3)
        self.assertEqual(linear_path(3, 20, 24, 5)[-1], (15, 19))
        video, mask, background = gen_synthetic_video(3, 8, 8, contrast=0.0)
        self.assertFalse(mask.any())
        self.assertTrue(np.array_equal(video.tensor.data, background))

    def test_generator_errors(self):
        self.assertRaises(VideoException, gen_synthetic_video, 5, 6, 6, 3, 8)
        self.assertRaises(VideoException, gen_synthetic_video, 2, 10, 10, 3,
                          4, [(0, 0), (7, 0)])
        self.assertRaises(VideoException, gen_synthetic_video, 2, 10, 10, 11)
        self.assertRaises(VideoException, gen_synthetic_video, 2, 10, 10,
                          contrast=1.0)

    def test_static_video(self):
        image = np.outer(self.rng.random(8), self.rng.random(9))
        video = VideoTensor(DenseTensor.wrap(np.repeat(image[None], 5, 0)))
        config = SolverConfig(tol=1e-14, max_iter=2000)
        res = extract(video, 1, config)
        self.assertLess(np.max(np.abs(res.foreground())), 1e-6)
        self.assertEqual(res.D.shape, (5, 1))
        self.assertEqual(res.storage_size(), 5 + 8 + 9)

    def test_extract(self):
        video, mask, background = gen_synthetic_video(6, 10, 12, 2, 3)
        res = extract(video, 4, SolverConfig(max_iter=50))
        self.assertLess(np.max(np.abs(np.dot(res.U.T, res.U) - np.eye(4))),
                        1e-10)
        self.assertLess(np.max(np.abs(np.dot(res.V.T, res.V) - np.eye(4))),
                        1e-10)
        self.assertTrue(np.allclose(res.background() + res.foreground(),
                                    video.tensor.data, rtol=0, atol=1e-12))
        self.assertRaises(VideoException, extract, video, 11)

    def test_export(self):
        video, _, _ = gen_synthetic_video(4, 10, 12, 2, 3)
        res = extract(video, 3, SolverConfig(max_iter=30))
        bg, fg = export_frames(res, self.tmp)
        self.assertEqual(len(bg), 4)
        self.assertEqual(len(fg), 4)
        back = load_frames(os.path.join(self.tmp, 'background'))
        self.assertEqual((back.height, back.width), (10, 12))
        expected = np.clip(res.background(), 0, 1)
        self.assertLessEqual(np.max(np.abs(back.tensor.data - expected)),
                             0.5 / 255 + 1e-12)
        fore = load_frames(os.path.join(self.tmp, 'foreground'))
        self.assertEqual(fore.tensor.data.max(), 1.0)
        export_frames(res, self.tmp, FOREGROUND_OFFSET)
        self.assertRaises(VideoException, export_frames, res, self.tmp,
                          NORMALIZATION_MAXVAL)

    def test_zero_foreground(self):
        rng = np.random.default_rng(1)
        U = np.linalg.qr(rng.random((6, 2)))[0]
        V = np.linalg.qr(rng.random((7, 2)))[0]
        D = rng.random((3, 2))
        data = np.einsum('ri,mi,ni->rmn', D, U, V)
        res = FBResult(VideoTensor(DenseTensor.wrap(data)), D, U, V)
        _, fg = export_frames(res, self.tmp)
        fore = load_frames(os.path.join(self.tmp, 'foreground'))
        self.assertEqual(np.count_nonzero(fore.tensor.data), 0)
        self.assertEqual(len(fg), 3)

    def test_compression(self):
        self.assertEqual('{:.2f}%'.format(compression_percent(1000, 144, 176,
                                                              30)), '0.16%')
        self.assertAlmostEqual(compression_ratio(1000, 144, 176, 30),
                               0.0015625, places=15)
        self.assertEqual(compression_table(1000, 144, 176),
                         [(10, '0.05%'), (20, '0.10%'), (30, '0.16%'),
                          (40, '0.21%')])

    def test_scores(self):
        video, mask, background = gen_synthetic_video(3, 8, 8, 2, 2)
        res = FBResult(video, np.zeros((3, 1)), np.zeros((8, 1)),
                       np.zeros((8, 1)))
        self.assertRaises(VideoException, background_error, res,
                          np.zeros((3, 8, 8)))
        self.assertAlmostEqual(background_error(res, background), 1.0)
        self.assertEqual(foreground_f1(res, np.zeros((3, 8, 8)), 2.0), 1.0)

    def test_moving_block(self):
        video, mask, background = gen_synthetic_video(
            100, 48, 64, 3, 8, contrast=0.8, rng=np.random.default_rng(2024))
        res = extract(video, 10, SolverConfig())
        threshold = FOREGROUND_THRESHOLD_FRACTION * 0.8
        self.assertGreater(foreground_f1(res, mask, threshold), 0.8)
        self.assertLess(background_error(res, background), 0.05)


if __name__ == "__main__":
    unittest.main()
