import os
import shutil
import struct
import tempfile
import unittest

import numpy as np

from hqcp.rcpd import *
from hqcp.tensor import orthonormalize, normalize_columns


class TestRcpd(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def __raw(self, dims, values, magic=MAGIC, version=VERSION):
        data = struct.pack('<4sBI', magic, version, len(dims))
        data += b''.join(struct.pack('<Q', n) for n in dims)
        return data + struct.pack('<{}d'.format(len(values)), *values)

    def test_parse(self):
        t = parse_tensor(self.__raw((2, 3), range(6)))
        self.assertEqual(t.dims, (2, 3))
        self.assertEqual(t.data[0, 2], 2.0)
        self.assertEqual(t.data[1, 0], 3.0)

    def test_encode(self):
        t = DenseTensor((2, 1, 2), [1.5, -2.0, 0.0, 7.25])
        self.assertEqual(encode_tensor(t),
                         self.__raw((2, 1, 2), [1.5, -2.0, 0.0, 7.25]))
        path = os.path.join(self.tmp, 't.rcpd')
        write_tensor(path, t)
        self.assertTrue(np.array_equal(read_tensor(path).data, t.data))

    def test_bad_magic(self):
        with self.assertRaises(RcpdException) as cm:
            parse_tensor(self.__raw((2, 2), range(4), magic=b'RCPX'))
        self.assertEqual(cm.exception.offset, 0)
        self.assertIn("at byte 0", str(cm.exception))

    def test_header_errors(self):
        with self.assertRaises(RcpdException) as cm:
            parse_tensor(self.__raw((2, 2), range(4), version=2))
        self.assertEqual(cm.exception.offset, 4)
        with self.assertRaises(RcpdException) as cm:
            parse_tensor(self.__raw((4, ), range(4)))
        self.assertEqual(cm.exception.offset, 5)
        with self.assertRaises(RcpdException) as cm:
            parse_tensor(self.__raw((2, 0), []))
        self.assertEqual(cm.exception.offset, 17)
        self.assertRaises(RcpdException, parse_tensor, b'RCP')

    def test_truncated(self):
        data = self.__raw((2, 3), range(6))
        with self.assertRaises(RcpdException) as cm:
            parse_tensor(data[:-1])
        self.assertEqual(cm.exception.offset, len(data) - 1)
        self.assertRaises(RcpdException, parse_tensor, data[:12])
        with self.assertRaises(RcpdException) as cm:
            parse_tensor(data + b'\0')
        self.assertEqual(cm.exception.offset, len(data))

    def test_model(self):
        rng = np.random.default_rng(0)
        factors = [normalize_columns(rng.standard_normal((4, 2))),
                   orthonormalize(rng.standard_normal((5, 2))),
                   orthonormalize(rng.standard_normal((6, 2)))]
        model = CPModel([2.0, -1.0], factors, 2)
        paths = write_model(self.tmp, model)
        self.assertEqual([os.path.basename(p) for p in paths],
                         ['sigma.rcpd', 'factor_0.rcpd', 'factor_1.rcpd',
                          'factor_2.rcpd'])
        self.assertEqual(read_tensor(paths[0]).dims, (1, 2))
        m = read_model(self.tmp, 2)
        self.assertEqual(list(m.sigma), [2.0, -1.0])
        for f, g in zip(m.factors, factors):
            self.assertTrue(np.array_equal(f, g))
        self.assertEqual(m.n_orthonormal, 2)


if __name__ == "__main__":
    unittest.main()
