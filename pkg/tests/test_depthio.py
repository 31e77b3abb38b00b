import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from depthbench import ConfigurationError, CropKind, CropSpec, DataError, DepthMap, DiscretizationScheme, FormatError
from depthbench.depthio import (
    apply_crop,
    colorize,
    load_class_map,
    load_depth_u16,
    save_class_map,
    save_depth_u16,
    save_rgb,
)


def write_u16(path, array):
    Image.fromarray(np.asarray(array, dtype=np.uint16)).save(path)


class TestDepthMap:
    def test_rejects_nonpositive_valid(self):
        with pytest.raises(DataError):
            DepthMap([[0.0]], [[True]])
        with pytest.raises(DataError):
            DepthMap([[np.nan]], [[True]])

    def test_shape_mismatch(self):
        with pytest.raises(DataError):
            DepthMap(np.ones((2, 2)), np.ones((2, 3), bool))

    def test_from_array_masks_bad_values(self):
        m = DepthMap.from_array([[1.0, 0.0, -2.0, np.inf]])
        assert m.valid.tolist() == [[True, False, False, False]]

    def test_immutable(self):
        m = DepthMap(np.ones((2, 2)), np.ones((2, 2), bool))
        with pytest.raises(ValueError):
            m.values[0, 0] = 3.0


class TestLoad:
    def test_kitti_convention(self, tmp_path):
        p = tmp_path / "d.png"
        write_u16(p, [[0, 256, 20480]])
        m = load_depth_u16(p, 256, zero_is_invalid=True)
        assert m.valid.tolist() == [[False, True, True]]
        assert m.values[0, 1] == 1.0 and m.values[0, 2] == 80.0

    def test_zero_without_flag_is_rejected(self, tmp_path):
        p = tmp_path / "d.png"
        write_u16(p, [[0, 256]])
        with pytest.raises(DataError):
            load_depth_u16(p, 256, zero_is_invalid=False)
        write_u16(p, [[1, 256]])
        assert load_depth_u16(p, 256, zero_is_invalid=False).valid.all()

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError, match="does not exist"):
            load_depth_u16(tmp_path / "nope.png")

    def test_eight_bit_rejected(self, tmp_path):
        p = tmp_path / "d.png"
        Image.fromarray(np.zeros((2, 2), np.uint8)).save(p)
        with pytest.raises(FormatError, match="16-bit"):
            load_depth_u16(p)

    def test_rgb_rejected(self, tmp_path):
        p = tmp_path / "d.png"
        Image.fromarray(np.zeros((2, 2, 3), np.uint8)).save(p)
        with pytest.raises(FormatError, match="single channel"):
            load_depth_u16(p)

    def test_garbage_file(self, tmp_path):
        p = tmp_path / "d.png"
        p.write_bytes(b"not an image at all")
        with pytest.raises(FormatError) as err:
            load_depth_u16(p)
        assert str(p) in str(err.value)


class TestSave:
    def test_all_invalid_is_all_zero(self, tmp_path):
        p = tmp_path / "d.png"
        save_depth_u16(DepthMap(np.zeros((3, 4)), np.zeros((3, 4), bool)), p)
        assert np.array_equal(np.asarray(Image.open(p)), np.zeros((3, 4), np.uint16))

    def test_overflow(self, tmp_path):
        with pytest.raises(DataError, match="300"):
            save_depth_u16(DepthMap([[300.0]], [[True]]), tmp_path / "d.png", 256)

    def test_max_encodable(self, tmp_path):
        p = tmp_path / "d.png"
        save_depth_u16(DepthMap([[65535 / 256]], [[True]]), p, 256)
        assert np.asarray(Image.open(p))[0, 0] == 65535

    def test_round_half_up(self, tmp_path):
        p = tmp_path / "d.png"
        save_depth_u16(DepthMap([[1.5 / 256, 2.5 / 256, 2.49 / 256]], [[True] * 3]), p, 256)
        assert np.asarray(Image.open(p)).tolist() == [[2, 3, 2]]

    def test_underflow(self, tmp_path):
        with pytest.raises(DataError, match="rounds to 0"):
            save_depth_u16(DepthMap([[0.001]], [[True]]), tmp_path / "d.png", 256)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 9), st.integers(1, 9), st.sampled_from([256.0, 100.0, 1000.0]))
    def test_round_trip_bit_exact(self, tmp_path_factory, seed, h, w, divisor):
        rng = np.random.default_rng(seed)
        stored = rng.integers(1, 65536, size=(h, w))
        valid = rng.random((h, w)) < 0.8
        m = DepthMap(np.where(valid, stored / divisor, 0.0), valid)
        p = tmp_path_factory.mktemp("rt") / "d.png"
        save_depth_u16(m, p, divisor)
        back = load_depth_u16(p, divisor)
        assert np.array_equal(back.valid, m.valid)
        assert np.array_equal(back.values[back.valid], m.values[m.valid])


class TestClassMapFile:
    def test_round_trip(self, tmp_path):
        labels = np.array([[0, 5, 255], [70, 1, 2]], np.uint8)
        save_class_map(labels, tmp_path / "c.png")
        assert np.array_equal(load_class_map(tmp_path / "c.png"), labels)

    def test_rejects_u16(self, tmp_path):
        write_u16(tmp_path / "c.png", [[1, 2]])
        with pytest.raises(FormatError):
            load_class_map(tmp_path / "c.png")


class TestCrop:
    def make(self, h, w):
        values = np.arange(1, h * w + 1, dtype=float).reshape(h, w)
        valid = (np.arange(h * w).reshape(h, w) % 3) != 0
        return DepthMap(np.where(valid, values, 0.0), valid)

    def test_none_is_identity(self):
        m = self.make(5, 7)
        assert apply_crop(m, CropSpec()) is m

    def test_bottom_center_crop_does_not_fit_kitti(self):
        with pytest.raises(ConfigurationError, match="420x800"):
            apply_crop(self.make(375, 1242), CropSpec.bottom_center(420, 800))

    def test_bottom_center_anchor(self):
        m = self.make(10, 20)
        out = apply_crop(m, CropSpec.bottom_center(4, 6))
        assert out.shape == (4, 6)
        assert np.array_equal(out.values, m.values[6:10, 7:13])

    def test_eigen_window(self):
        spec = CropSpec.eigen()
        assert spec.resolve(375, 1242) == (153, 372, 44, 1198)
        out = apply_crop(self.make(375, 1242), spec)
        assert out.shape == (372 - 153, 1198 - 44)

    def test_window_preserves_pixels(self):
        m = self.make(8, 9)
        out = apply_crop(m, CropSpec(CropKind.FIXED, window=(2, 3, 4, 5)))
        assert np.array_equal(out.values, m.values[2:6, 3:8])
        assert np.array_equal(out.valid, m.valid[2:6, 3:8])

    def test_window_out_of_bounds(self):
        with pytest.raises(ConfigurationError):
            apply_crop(self.make(8, 9), CropSpec(CropKind.FIXED, window=(6, 0, 4, 5)))

    @pytest.mark.parametrize("fractions", [(0.5, 0.5, 0, 1), (0.2, 0.1, 0, 1), (0, 1, -0.1, 0.5), (0, 1.2, 0, 1)])
    def test_bad_fractions(self, fractions):
        with pytest.raises(ConfigurationError):
            CropSpec(CropKind.FRACTIONAL, fractions=fractions)


class TestColorize:
    scheme = DiscretizationScheme("sid", 2.0, 50.0, 10)

    def paint(self, depths, valid=None):
        depths = np.atleast_2d(np.asarray(depths, float))
        valid = np.ones(depths.shape, bool) if valid is None else np.atleast_2d(valid)
        return colorize(DepthMap(np.where(valid, depths, 0.0), valid), self.scheme)

    def test_anchors(self):
        rgb = self.paint([2.0, math.sqrt(2.0 * 50.0), 50.0])
        assert rgb[0].tolist() == [[0, 0, 255], [0, 255, 0], [255, 0, 0]]

    def test_clamped_outside_range(self):
        rgb = self.paint([0.5, 500.0])
        assert rgb[0].tolist() == [[0, 0, 255], [255, 0, 0]]

    def test_invalid_black(self):
        rgb = self.paint([10.0, 10.0], valid=[True, False])
        assert rgb[0, 1].tolist() == [0, 0, 0]
        assert rgb[0, 0].tolist() != [0, 0, 0]

    def test_quarter_point(self):
        # t = 0.25 -> halfway between blue and green
        d = 2.0 * (50.0 / 2.0) ** 0.25
        r, g, b = self.paint([d])[0, 0].tolist()
        assert r == 0 and abs(g - 127.5) <= 0.5 and abs(b - 127.5) <= 0.5

    def test_nearer_is_bluer(self):
        rgb = self.paint(np.exp(np.linspace(np.log(2.0), np.log(50.0), 50))).astype(int)[0]
        assert np.all(np.diff(rgb[:, 2]) <= 0)
        assert np.all(np.diff(rgb[:, 0]) >= 0)

    def test_save_rgb(self, tmp_path):
        save_rgb(self.paint([2.0, 50.0]), tmp_path / "c.png")
        img = Image.open(tmp_path / "c.png")
        assert img.mode == "RGB" and img.size == (2, 1)
