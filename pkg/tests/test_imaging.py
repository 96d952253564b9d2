import math

import numpy as np
import pytest

from couplevar.imaging import (
    FormatError,
    add_gaussian_noise,
    mse,
    psnr,
    read_fgrid,
    read_image,
    synth_affine,
    write_fgrid,
    write_image,
)


class TestPgmPpm:
    def test_pgm_roundtrip_bitwise(self, tmp_path):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(16, 16)).astype(float)
        path = tmp_path / "img.pgm"
        write_image(img, path)
        back = read_image(path)
        np.testing.assert_array_equal(back, img)

    def test_ppm_roundtrip_three_channels(self, tmp_path):
        rng = np.random.default_rng(1)
        img = rng.integers(0, 256, size=(3, 8, 10)).astype(float)
        path = tmp_path / "img.ppm"
        write_image(img, path)
        back = read_image(path)
        assert back.shape == (3, 8, 10)
        np.testing.assert_array_equal(back, img)

    def test_write_clamps_and_rounds_half_up(self, tmp_path):
        img = np.array([[255.7, -3.0], [127.5, 126.4]])
        path = tmp_path / "c.pgm"
        write_image(img, path)
        back = read_image(path)
        np.testing.assert_array_equal(back, [[255.0, 0.0], [128.0, 126.0]])

    def test_bool_maps_become_0_255(self, tmp_path):
        img = np.array([[True, False], [False, True]])
        path = tmp_path / "b.pgm"
        write_image(img, path)
        back = read_image(path)
        np.testing.assert_array_equal(back, [[255.0, 0.0], [0.0, 255.0]])

    def test_header_comments_tolerated(self, tmp_path):
        path = tmp_path / "c.pgm"
        payload = bytes(range(6))
        path.write_bytes(b"P5\n# a comment\n3 2\n# more\n255\n" + payload)
        img = read_image(path)
        assert img.shape == (2, 3)
        np.testing.assert_array_equal(img.ravel(), np.arange(6.0))

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "x.pgm"
        path.write_bytes(b"P3\n2 2\n255\n0 0 0 0")
        with pytest.raises(FormatError):
            read_image(path)

    def test_wrong_maxval_rejected(self, tmp_path):
        path = tmp_path / "x.pgm"
        path.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
        with pytest.raises(FormatError):
            read_image(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "x.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(7))
        with pytest.raises(FormatError):
            read_image(path)


class TestFgrid:
    def test_roundtrip_exact_doubles(self, tmp_path):
        rng = np.random.default_rng(3)
        img = rng.standard_normal((5, 7)) * np.exp(
            rng.uniform(-30, 30, size=(5, 7))
        )
        path = tmp_path / "g.fgrid"
        write_fgrid(img, path)
        np.testing.assert_array_equal(read_fgrid(path), img)

    def test_roundtrip_multichannel(self, tmp_path):
        rng = np.random.default_rng(4)
        img = rng.standard_normal((3, 4, 6))
        path = tmp_path / "g.fgrid"
        write_fgrid(img, path)
        back = read_fgrid(path)
        assert back.shape == (3, 4, 6)
        np.testing.assert_array_equal(back, img)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "g.fgrid"
        path.write_text("GRID 2 2 1\n0 0 0 0")
        with pytest.raises(FormatError):
            read_fgrid(path)


class TestNoise:
    def test_sigma_zero_identity(self):
        rng = np.random.default_rng(5)
        img = 255.0 * rng.random((8, 8))
        np.testing.assert_array_equal(add_gaussian_noise(img, 0.0, seed=1), img)

    def test_seed_determinism(self):
        img = np.zeros((32, 32))
        a = add_gaussian_noise(img, 40.0, seed=7)
        b = add_gaussian_noise(img, 40.0, seed=7)
        np.testing.assert_array_equal(a, b)
        c = add_gaussian_noise(img, 40.0, seed=8)
        assert np.any(a != c)

    @pytest.mark.parametrize("sigma", [10.0, 40.0, 100.0])
    def test_moments_on_large_image(self, sigma):
        img = np.full((256, 256), 128.0)
        noisy = add_gaussian_noise(img, sigma, seed=42)
        noise = noisy - img
        assert abs(noise.mean()) <= 1.0
        assert abs(noise.std() - sigma) <= 2.0

    def test_values_not_clamped(self):
        img = np.full((64, 64), 250.0)
        noisy = add_gaussian_noise(img, 100.0, seed=0)
        assert noisy.max() > 255.0


class TestMetrics:
    def test_identical_zero(self):
        img = np.arange(12.0).reshape(3, 4)
        assert mse(img, img) == 0.0
        assert psnr(img, img) == math.inf

    def test_constant_shift(self):
        a = np.zeros((4, 4))
        assert mse(a, a + 3.0) == 9.0
        assert psnr(a, a + 3.0) == pytest.approx(
            10.0 * math.log10(255.0**2 / 9.0)
        )

    def test_multichannel_mean(self):
        a = np.zeros((2, 3, 3))
        b = a.copy()
        b[1] += 3.0
        assert mse(a, b) == pytest.approx(4.5)

    def test_reordered_sum_oracle(self):
        rng = np.random.default_rng(6)
        a = 255.0 * rng.random((33, 17))
        b = 255.0 * rng.random((33, 17))
        ref = math.fsum((x - y) ** 2 for x, y in zip(a.ravel(), b.ravel()))
        ref /= a.size
        assert mse(a, b) == pytest.approx(ref, rel=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mse(np.zeros((3, 3)), np.zeros((4, 3)))


class TestSynth:
    def test_constant_region(self):
        img = synth_affine(8, 6, "plane:77")
        assert img.shape == (6, 8)
        np.testing.assert_array_equal(img, 77.0)

    def test_twostep_exact_split(self):
        img = synth_affine(16, 8, "twostep")
        left, right = img[:, :8], img[:, 8:]
        assert np.all(left == left[0, 0])
        assert np.all(right == right[0, 0])
        assert right[0, 0] > left[0, 0]

    def test_disk_mask_partitions_exactly(self):
        m, n = 32, 32
        img = synth_affine(m, n, "plane:10;disk:16,16,8:200")
        inside = 0
        for j in range(n):
            for i in range(m):
                x, y = i + 0.5, j + 0.5
                if (x - 16.0) ** 2 + (y - 16.0) ** 2 <= 64.0:
                    inside += 1
                    assert img[j, i] == 200.0
                else:
                    assert img[j, i] == 10.0
        assert inside == np.count_nonzero(img == 200.0)

    def test_affine_ramp_region(self):
        img = synth_affine(10, 4, "plane:0,1,0")
        np.testing.assert_allclose(img[0], np.arange(10) + 0.5)

    def test_out_of_range_clamped_with_warning(self):
        with pytest.warns(UserWarning):
            img = synth_affine(4, 4, "plane:300")
        np.testing.assert_array_equal(img, 255.0)

    def test_affine_preset_in_range(self):
        img = synth_affine(256, 256, "affine")
        assert img.shape == (256, 256)
        assert img.min() >= 0.0 and img.max() <= 255.0
        # piecewise-affine: the interior of each region has a constant
        # discrete gradient, so the second difference vanishes there.
        gxx = np.diff(img, n=2, axis=1)
        assert np.count_nonzero(np.abs(gxx) > 1e-9) < img.size * 0.1
