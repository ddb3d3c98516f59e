import numpy as np
import pytest

from entropic_causal import (
    CauseEffectPair,
    DECISION_UNDECIDED,
    DECISION_XY,
    DECISION_YX,
    PairDataset,
    clopper_pearson,
    curve_csv,
    empirical_joint,
    evaluate_dataset,
    infer_direction,
    load_pairs,
    quantize_pair,
    sample_low_entropy,
    sample_random_function,
    sample_simplex_uniform,
)
from entropic_causal.pairs import (
    EmptyDatasetError,
    MissingMetadataError,
    MissingPairFileError,
    UnparsableRowError,
)

# Clopper-Pearson oracle values, frozen from 50-digit mpmath Beta-CDF
# bisection before build.
CP_61_95 = (0.5372024765649964, 0.7378856565937323)
CP_5_10 = (0.18708602844739853, 0.8129139715526015)


class TestQuantizePair:
    def test_default_level_hundred_samples(self):
        samples = np.column_stack([np.arange(100.0), np.arange(100.0)])
        _, n = quantize_pair(samples)
        assert n == 10

    def test_level_capped_at_512(self):
        samples = np.column_stack([np.arange(10000.0), np.arange(10000.0)])
        _, n = quantize_pair(samples)
        assert n == 512

    def test_floor_of_small_counts(self):
        samples = np.column_stack([np.arange(25.0), np.arange(25.0)])
        _, n = quantize_pair(samples)
        assert n == 2

    def test_override(self):
        samples = np.column_stack([np.arange(100.0), np.arange(100.0)])
        _, n = quantize_pair(samples, n_override=7)
        assert n == 7
        with pytest.raises(ValueError):
            quantize_pair(samples, n_override=1)

    def test_monotone_per_axis(self):
        rng = np.random.default_rng(40)
        x = np.sort(rng.normal(size=200))
        samples = np.column_stack([x, rng.normal(size=200)])
        discrete, _ = quantize_pair(samples)
        assert np.all(np.diff(discrete[:, 0]) >= 0)

    def test_extremes_land_in_end_bins(self):
        x = np.linspace(0.0, 1.0, 50)
        discrete, n = quantize_pair(np.column_stack([x, x]))
        assert discrete[0, 0] == 0
        assert discrete[-1, 0] == n - 1  # top edge folds into the last bin

    def test_constant_axis_collapses(self):
        samples = np.column_stack([np.zeros(40), np.arange(40.0)])
        discrete, n = quantize_pair(samples)
        assert set(discrete[:, 0]) == {0}
        # degenerate geometry: the direction test abstains
        v = infer_direction(empirical_joint(discrete, n), t=0.0)
        assert v.decision == DECISION_UNDECIDED

    def test_too_few_samples(self):
        samples = np.column_stack([np.arange(19.0), np.arange(19.0)])
        with pytest.raises(ValueError, match="samples"):
            quantize_pair(samples)


class TestEmpiricalJoint:
    def test_diagonal_counting(self):
        j = empirical_joint(np.array([[0, 0], [0, 0], [1, 1], [1, 1]]), 2)
        np.testing.assert_array_equal(j.cells, np.diag([0.5, 0.5]))

    def test_uniform_counting(self):
        j = empirical_joint(np.array([[0, 0], [0, 1], [1, 0], [1, 1]]), 2)
        np.testing.assert_array_equal(j.cells, np.full((2, 2), 0.25))

    def test_single_repeated_cell(self):
        j = empirical_joint(np.tile([[0, 1]], (30, 1)), 2)
        assert j.cells[1, 0] == 1.0  # row is y, column is x
        assert j.cells.sum() == 1.0

    def test_marginals_match_histograms(self):
        rng = np.random.default_rng(41)
        discrete = rng.integers(0, 4, size=(64, 2))  # dyadic N: exact division
        j = empirical_joint(discrete, 4)
        np.testing.assert_array_equal(
            j.cells.sum(axis=0), np.bincount(discrete[:, 0], minlength=4) / 64
        )
        np.testing.assert_array_equal(
            j.cells.sum(axis=1), np.bincount(discrete[:, 1], minlength=4) / 64
        )

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            empirical_joint(np.array([[0, 5]]), 2)


class TestClopperPearson:
    def test_zero_successes_low_boundary(self):
        low, high = clopper_pearson(0, 10, 0.05)
        assert low == 0.0 and high < 1.0

    def test_all_successes_high_boundary(self):
        low, high = clopper_pearson(10, 10, 0.05)
        assert high == 1.0 and low > 0.0

    def test_oracle_values(self):
        np.testing.assert_allclose(clopper_pearson(61, 95, 0.05), CP_61_95, atol=1e-12)
        np.testing.assert_allclose(clopper_pearson(5, 10, 0.05), CP_5_10, atol=1e-12)

    def test_interval_contains_point_estimate(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(1, 200))
            k = int(rng.integers(0, n + 1))
            low, high = clopper_pearson(k, n, 0.05)
            assert low - 1e-12 <= k / n <= high + 1e-12

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            clopper_pearson(5, 3, 0.05)
        with pytest.raises(ValueError):
            clopper_pearson(-1, 3, 0.05)
        with pytest.raises(ValueError):
            clopper_pearson(1, 3, 1.5)


def _write_pair_dir(tmp_path, pairs, meta_lines):
    for pair_id, data in pairs.items():
        np.savetxt(tmp_path / f"pair{pair_id}.txt", data)
    (tmp_path / "pairmeta.txt").write_text("\n".join(meta_lines) + "\n")
    return tmp_path


class TestLoadPairs:
    def test_happy_path(self, tmp_path):
        rng = np.random.default_rng(43)
        _write_pair_dir(
            tmp_path, {"0001": rng.normal(size=(100, 2))}, ["0001 -> 1.0"]
        )
        ds = load_pairs(tmp_path)
        assert len(ds) == 1
        pair = ds.pairs[0]
        assert pair.pair_id == "0001"
        assert pair.n_samples == 100
        assert pair.ground_truth == DECISION_XY
        assert pair.weight == 1.0

    def test_reverse_direction_and_bare_ids(self, tmp_path):
        rng = np.random.default_rng(44)
        _write_pair_dir(tmp_path, {"0002": rng.normal(size=(50, 2))}, ["2 <- 0.5"])
        ds = load_pairs(tmp_path)
        assert ds.pairs[0].ground_truth == DECISION_YX
        assert ds.pairs[0].weight == 0.5

    def test_multivariate_skipped_with_warning(self, tmp_path):
        rng = np.random.default_rng(45)
        _write_pair_dir(
            tmp_path,
            {"0001": rng.normal(size=(50, 2)), "0002": rng.normal(size=(50, 3))},
            ["1 -> 1.0", "2 -> 1.0"],
        )
        with pytest.warns(UserWarning, match="multivariate"):
            ds = load_pairs(tmp_path)
        assert [p.pair_id for p in ds.pairs] == ["0001"]

    def test_missing_metadata(self, tmp_path):
        np.savetxt(tmp_path / "pair0001.txt", np.zeros((30, 2)))
        with pytest.raises(MissingMetadataError):
            load_pairs(tmp_path)

    def test_missing_pair_file_names_id(self, tmp_path):
        (tmp_path / "pairmeta.txt").write_text("7 -> 1.0\n")
        with pytest.raises(MissingPairFileError, match="0007"):
            load_pairs(tmp_path)

    def test_unparsable_data(self, tmp_path):
        (tmp_path / "pair0001.txt").write_text("1.0 banana\n" * 30)
        (tmp_path / "pairmeta.txt").write_text("1 -> 1.0\n")
        with pytest.raises(UnparsableRowError):
            load_pairs(tmp_path)

    def test_bad_metadata_line(self, tmp_path):
        rng = np.random.default_rng(46)
        np.savetxt(tmp_path / "pair0001.txt", rng.normal(size=(30, 2)))
        (tmp_path / "pairmeta.txt").write_text("1 sideways 1.0\n")
        with pytest.raises(UnparsableRowError):
            load_pairs(tmp_path)

    def test_empty_metadata(self, tmp_path):
        (tmp_path / "pairmeta.txt").write_text("# nothing here\n")
        with pytest.raises(EmptyDatasetError):
            load_pairs(tmp_path)

    def test_not_a_directory(self, tmp_path):
        with pytest.raises(MissingPairFileError):
            load_pairs(tmp_path / "absent")

    def test_short_pair_rejected(self, tmp_path):
        rng = np.random.default_rng(47)
        _write_pair_dir(tmp_path, {"0001": rng.normal(size=(10, 2))}, ["1 -> 1.0"])
        with pytest.raises(UnparsableRowError, match="samples"):
            load_pairs(tmp_path)


def _synthetic_pair(rng, n=16, n_samples=2000, reverse=False):
    """Sample a causal pair from a random low-exogenous-entropy model."""
    theta = n * (n - 1)
    p_x = sample_simplex_uniform(n, rng)
    while True:
        p_e = sample_low_entropy(theta, 6.0, rng)
        if -(p_e.masses[p_e.masses > 0] * np.log2(p_e.masses[p_e.masses > 0])).sum() <= np.log2(n):
            break
    f = sample_random_function(n, theta, rng)
    xs = rng.choice(n, size=n_samples, p=p_x.masses)
    es = rng.choice(theta, size=n_samples, p=p_e.masses)
    ys = f.table[xs, es]
    if reverse:
        return ys.astype(float), xs.astype(float), DECISION_YX
    return xs.astype(float), ys.astype(float), DECISION_XY


class TestEvaluateDataset:
    def test_single_decided_pair(self):
        rng = np.random.default_rng(48)
        x, y, truth = _synthetic_pair(rng)
        ds = PairDataset(
            (CauseEffectPair("0001", x, y, truth, 1.0),)
        )
        curve = evaluate_dataset(ds, [0.0], n_override=16)
        assert len(curve.points) == 1
        point = curve.points[0]
        assert point.t == 0.0
        assert point.decision_rate == 1.0
        assert point.accuracy in (0.0, 1.0)
        assert point.n_decided == 1

    def test_synthetic_accuracy_above_point_nine(self):
        rng = np.random.default_rng(49)
        pairs = []
        for k in range(50):
            reverse = bool(rng.integers(0, 2))
            x, y, truth = _synthetic_pair(rng, n_samples=1500, reverse=reverse)
            pairs.append(CauseEffectPair(f"{k:04d}", x, y, truth, 1.0))
        curve = evaluate_dataset(PairDataset(tuple(pairs)), [0.0], n_override=16)
        assert curve.points[0].accuracy > 0.9

    def test_decision_rate_nonincreasing_and_deterministic(self):
        rng = np.random.default_rng(50)
        pairs = []
        for k in range(10):
            x, y, truth = _synthetic_pair(rng, n=8, n_samples=400)
            pairs.append(CauseEffectPair(f"{k:04d}", x, y, truth, 1.0))
        ds = PairDataset(tuple(pairs))
        grid = [0.0, 0.02, 0.05, 0.1, 0.2, 0.5]
        curve = evaluate_dataset(ds, grid, n_override=8)
        rates = [p.decision_rate for p in curve.points]
        assert rates == sorted(rates, reverse=True)
        again = evaluate_dataset(ds, grid, n_override=8)
        assert curve_csv(curve) == curve_csv(again)
        parallel = evaluate_dataset(ds, grid, n_override=8, jobs=2)
        assert curve_csv(curve) == curve_csv(parallel)

    def test_weighted_vs_unweighted_accuracy(self):
        rng = np.random.default_rng(51)
        x1, y1, _ = _synthetic_pair(rng)
        x2, y2, _ = _synthetic_pair(rng)
        # label pair 1 (weight 1) correct and pair 2 (weight 2) wrong by
        # setting ground truth from each pair's own verdict
        v1 = infer_direction(
            empirical_joint(*quantize_pair(np.column_stack([x1, y1]), 16)), 0.0
        )
        v2 = infer_direction(
            empirical_joint(*quantize_pair(np.column_stack([x2, y2]), 16)), 0.0
        )
        assert v1.decision in (DECISION_XY, DECISION_YX)
        assert v2.decision in (DECISION_XY, DECISION_YX)
        truth2 = DECISION_YX if v2.decision == DECISION_XY else DECISION_XY
        ds = PairDataset(
            (
                CauseEffectPair("0001", x1, y1, v1.decision, 1.0),
                CauseEffectPair("0002", x2, y2, truth2, 2.0),
            )
        )
        point = evaluate_dataset(ds, [0.0], n_override=16).points[0]
        assert point.accuracy == pytest.approx(1.0 / 3.0)
        assert point.accuracy_unweighted == pytest.approx(0.5)
        low, high = clopper_pearson(1, 2, 0.05)
        assert (point.ci_low, point.ci_high) == (low, high)

    def test_grid_must_start_at_zero(self):
        rng = np.random.default_rng(52)
        x, y, truth = _synthetic_pair(rng, n=4, n_samples=200)
        ds = PairDataset((CauseEffectPair("0001", x, y, truth, 1.0),))
        with pytest.raises(ValueError, match="t_grid"):
            evaluate_dataset(ds, [0.1, 0.2])
        with pytest.raises(ValueError, match="t_grid"):
            evaluate_dataset(ds, [0.0, 0.2, 0.1])

    def test_csv_shape(self):
        rng = np.random.default_rng(53)
        x, y, truth = _synthetic_pair(rng, n=4, n_samples=200)
        ds = PairDataset((CauseEffectPair("0001", x, y, truth, 1.0),))
        csv = curve_csv(evaluate_dataset(ds, [0.0], n_override=4))
        lines = csv.strip().split("\n")
        assert lines[0] == "t,decision_rate,accuracy,ci_low,ci_high,n_decided"
