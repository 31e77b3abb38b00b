import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depthbench import IGNORE, ConfigurationError, boundaries, quantize_map, DepthMap, DiscretizationScheme, compute_metrics, quantize
from depthbench.baseline import (
    Constant,
    RoundTrip,
    RowPrior,
    class_histograms,
    constant_for_scheme,
    fit_row_prior_maps,
    load_row_prior,
    predict,
    predict_roundtrip,
    save_row_prior,
)
from depthbench.discretization import representatives

from helpers import random_map

KITTI_BOUND = math.sqrt(80.0 ** (1 / 71)) - 1


def rows_map(row_depths, width=5, valid=None):
    values = np.repeat(np.asarray(row_depths, float)[:, None], width, axis=1)
    valid = np.ones(values.shape, bool) if valid is None else valid
    return DepthMap(np.where(valid, values, 0.0), valid)


class TestRoundTrip:
    def test_fixed_point(self, kitti):
        reps = representatives(kitti)
        gt = DepthMap(np.full((3, 3), reps[17]), np.ones((3, 3), bool))
        assert predict_roundtrip(gt, kitti) == gt

    def test_mask_drops_beyond_beta(self, kitti):
        gt = DepthMap([[10.0, 85.0, 1.0]], [[True, True, False]])
        pred = predict_roundtrip(gt, kitti)
        assert pred.valid.tolist() == [[True, False, False]]

    def test_k1_is_constant(self):
        scheme = DiscretizationScheme("sid", 1.0, 80.0, 1)
        pred = predict_roundtrip(rows_map([1.0, 5.0, 79.0]), scheme)
        np.testing.assert_allclose(pred.values, math.sqrt(80.0))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_kitti_bound(self, seed):
        kitti = DiscretizationScheme("sid", 1.0, 80.0, 71)
        gt = random_map(np.random.default_rng(seed), (12, 12))
        r = compute_metrics(predict_roundtrip(gt, kitti), gt)
        assert r.abs_rel <= 0.0314 and r.delta1 == 1.0

    @pytest.mark.parametrize("k,expect_perfect", [(9, False), (10, True), (71, True)])
    def test_delta1_threshold_in_k(self, k, expect_perfect):
        # worst-case ratio sqrt((80)^(1/K)) < 1.25 iff K >= 10
        scheme = DiscretizationScheme("sid", 1.0, 80.0, k)
        edges = boundaries(scheme)
        gt = DepthMap(edges[None, :-1], np.ones((1, k), bool))
        r = compute_metrics(predict_roundtrip(gt, scheme), gt)
        assert (r.delta1 == 1.0) is expect_perfect

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1.0, 80.0))
    def test_dominates_constant(self, seed, c):
        kitti = DiscretizationScheme("sid", 1.0, 80.0, 71)
        gt = random_map(np.random.default_rng(seed), (8, 8), holes=0.1)
        rt = compute_metrics(predict_roundtrip(gt, kitti), gt)
        const = compute_metrics(predict(Constant(c), gt.shape, kitti), gt)
        assert rt.abs_rel <= const.abs_rel + 1e-12
        assert rt.rmse <= const.rmse + 1e-12
        assert rt.rmse_log <= const.rmse_log + 1e-12
        assert rt.delta1 >= const.delta1


class TestRowPrior:
    def test_constant_rows(self, kitti):
        depths = [2.0, 5.0, 11.0, 40.0]
        prior = fit_row_prior_maps([rows_map(depths), rows_map(depths)], kitti)
        assert prior.table.tolist() == [quantize(d, kitti) for d in depths]

    def test_all_invalid(self, kitti):
        m = DepthMap(np.zeros((3, 4)), np.zeros((3, 4), bool))
        assert fit_row_prior_maps([m], kitti).table.tolist() == [IGNORE] * 3

    def test_conflicting_modes_against_histogram_oracle(self, kitti, rng):
        maps = [random_map(rng, (5, 9), 1.0, 80.0, holes=0.3) for _ in range(2)]
        prior = fit_row_prior_maps(maps, kitti)
        for r in range(5):
            counts = {}
            for m in maps:
                for c in range(9):
                    if m.valid[r, c]:
                        label = quantize(float(m.values[r, c]), kitti)
                        if label != IGNORE:
                            counts[label] = counts.get(label, 0) + 1
            if not counts:
                assert prior.table[r] == IGNORE
                continue
            best = max(counts.values())
            assert prior.table[r] == min(k for k, v in counts.items() if v == best)

    def test_tie_breaks_low(self, kitti):
        m = DepthMap([[2.0, 40.0]], [[True, True]])
        assert fit_row_prior_maps([m], kitti).table.tolist() == [quantize(2.0, kitti)]

    def test_inconsistent_heights(self, kitti):
        with pytest.raises(ConfigurationError):
            fit_row_prior_maps([rows_map([1.0, 2.0]), rows_map([1.0, 2.0, 3.0])], kitti)

    def test_empty(self, kitti):
        with pytest.raises(ConfigurationError):
            fit_row_prior_maps([], kitti)

    def test_histograms_merge(self, kitti, rng):
        maps = [random_map(rng, (4, 6)) for _ in range(4)]
        labels = [quantize_map(m, kitti) for m in maps]
        whole = class_histograms(labels, kitti)
        split = class_histograms(labels[:2], kitti) + class_histograms(labels[2:], kitti)
        assert np.array_equal(whole, split)

    def test_predict_scores_like_roundtrip(self, kitti):
        depths = [1.5, 3.0, 9.0, 30.0, 70.0]
        gt = rows_map(depths)
        prior = fit_row_prior_maps([gt], kitti)
        r = compute_metrics(predict(prior, gt.shape, kitti), gt)
        assert r.abs_rel <= KITTI_BOUND

    def test_all_ignore_table(self, kitti):
        pred = predict(RowPrior([IGNORE] * 3), (3, 4), kitti)
        assert not pred.valid.any()

    def test_height_mismatch(self, kitti):
        with pytest.raises(ConfigurationError):
            predict(RowPrior([0, 1]), (3, 4), kitti)

    def test_unfitted(self, kitti):
        with pytest.raises(ConfigurationError):
            predict(RowPrior(), (3, 4), kitti)

    def test_bad_entry(self, kitti):
        with pytest.raises(ConfigurationError):
            predict(RowPrior([0, 80, 1]), (3, 4), kitti)

    def test_file_round_trip(self, kitti, tmp_path):
        prior = RowPrior([0, IGNORE, 70, 12])
        save_row_prior(prior, tmp_path / "rows.txt")
        assert (tmp_path / "rows.txt").read_text() == "0\n255\n70\n12\n"
        assert load_row_prior(tmp_path / "rows.txt") == prior

    def test_file_accepts_ignore_word(self, tmp_path):
        (tmp_path / "rows.txt").write_text("3\nIGNORE\n")
        assert load_row_prior(tmp_path / "rows.txt").table.tolist() == [3, IGNORE]


class TestPredict:
    def test_constant_matches_k1_roundtrip(self, kitti):
        gt = random_map(np.random.default_rng(0), (4, 4), holes=0.0)
        single = DiscretizationScheme("sid", 1.0, 80.0, 1)
        const = predict(constant_for_scheme(kitti), gt.shape, kitti)
        np.testing.assert_allclose(const.values, predict_roundtrip(gt, single).values, rtol=1e-15)

    @pytest.mark.parametrize("depth", [0.0, -1.0, 80.5])
    def test_constant_out_of_range(self, kitti, depth):
        with pytest.raises(ConfigurationError):
            predict(Constant(depth), (2, 2), kitti)

    def test_roundtrip_needs_gt(self, kitti):
        with pytest.raises(ConfigurationError):
            predict(RoundTrip(), (2, 2), kitti)

    def test_deterministic(self, kitti, rng):
        gt = random_map(rng)
        assert predict(RoundTrip(), gt.shape, kitti, gt=gt) == predict(RoundTrip(), gt.shape, kitti, gt=gt)

    def test_bad_shape(self, kitti):
        with pytest.raises(ConfigurationError):
            predict(Constant(5.0), (0, 3), kitti)
