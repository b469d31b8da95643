import numpy as np
import pytest

from fuzzprobe.errors import InsufficientDataError
from fuzzprobe.membership import GeneralizedBell, Tabulated
from fuzzprobe.scoring import OracleSpec, score_oracle
from fuzzprobe.smoothing import (
    EntailmentCurve,
    SmootherConfig,
    build_curves,
    gcv_score,
    read_curves,
    select_lambda,
    smooth,
    write_curves,
)
from fuzzprobe.stimuli import StimulusConfig, Unit, generate_dataset

TEMPS = tuple(range(-50, 123))


def make_curve(values, temps=TEMPS, unit=Unit.NONE, category="warm"):
    return EntailmentCurve(unit, None, category, tuple(zip(temps, values)))


def sine_truth():
    t = np.array(TEMPS, dtype=float)
    return 0.5 + 0.4 * np.sin(t / 20.0)


class TestCurveType:
    def test_requires_ascending_temperatures(self):
        with pytest.raises(ValueError, match="ascending"):
            EntailmentCurve(Unit.NONE, None, "hot", ((0, 0.5), (0, 0.6)))

    def test_requires_unit_interval_values(self):
        with pytest.raises(ValueError, match="outside"):
            EntailmentCurve(Unit.NONE, None, "hot", ((0, 1.5),))

    def test_smoothed_must_share_grid(self):
        with pytest.raises(ValueError, match="grid"):
            EntailmentCurve(
                Unit.NONE, None, "hot",
                samples=((0, 0.5), (1, 0.5)),
                smoothed=((0, 0.5), (2, 0.5)),
            )


class TestSmoothBehaviour:
    def test_constant_curve_unchanged(self):
        curve = make_curve([0.5] * len(TEMPS))
        out = smooth(curve, SmootherConfig())
        np.testing.assert_allclose(out.smoothed_values, 0.5, atol=1e-12)

    @pytest.mark.parametrize("lam", [1e-4, 1.0, 1e4])
    def test_affine_data_passes_through(self, lam):
        """The penalty only sees curvature, so affine data is a fixed point."""
        t = np.array(TEMPS, dtype=float)
        values = 0.1 + (t + 50.0) * (0.8 / 172.0)
        curve = make_curve(values)
        out = smooth(curve, SmootherConfig(selection="fixed", fixed_lambda=lam))
        np.testing.assert_allclose(out.smoothed_values, values, atol=1e-9)

    def test_noisy_sine_recovery(self):
        """GCV smoothing beats the raw samples against the known truth."""
        truth = sine_truth()
        rng = np.random.default_rng(0)
        noisy = np.clip(truth + rng.normal(0, 0.1, truth.size), 0.0, 1.0)
        out = smooth(make_curve(noisy), SmootherConfig())
        rmse_smooth = np.sqrt(np.mean((out.smoothed_values - truth) ** 2))
        rmse_raw = np.sqrt(np.mean((noisy - truth) ** 2))
        assert rmse_smooth < 0.1
        assert rmse_smooth < rmse_raw

    def test_smallest_lambda_interpolates_smooth_data(self):
        truth = sine_truth()
        out = smooth(make_curve(truth), SmootherConfig(selection="fixed", fixed_lambda=1e-4))
        np.testing.assert_allclose(out.smoothed_values, truth, atol=1e-3)

    def test_largest_lambda_matches_regression_line_on_linear_data(self):
        t = np.array(TEMPS, dtype=float)
        values = 0.2 + (t + 50.0) * (0.5 / 172.0)
        out = smooth(make_curve(values), SmootherConfig(selection="fixed", fixed_lambda=1e4))
        coeffs = np.polyfit(t, values, 1)
        np.testing.assert_allclose(out.smoothed_values, np.polyval(coeffs, t), atol=1e-3)

    def test_gcv_choice_minimizes_gcv_over_grid(self):
        rng = np.random.default_rng(3)
        truth = sine_truth()
        noisy = np.clip(truth + rng.normal(0, 0.08, truth.size), 0.0, 1.0)
        grid = SmootherConfig().lambda_grid
        chosen, scores = select_lambda(np.array(TEMPS, float), noisy, grid)
        chosen_score = gcv_score(np.array(TEMPS, float), noisy, chosen)
        for lam, score in scores:
            assert chosen_score <= score + 1e-12

    def test_raw_samples_untouched_and_grid_preserved(self):
        rng = np.random.default_rng(4)
        values = rng.uniform(0, 1, len(TEMPS))
        curve = make_curve(values)
        out = smooth(curve)
        assert out.samples == curve.samples
        assert [t for t, _ in out.smoothed] == [t for t, _ in curve.samples]
        assert len(out.smoothed) == len(curve.samples)

    def test_too_few_samples_rejected(self):
        curve = make_curve([0.5] * 9, temps=range(9))
        with pytest.raises(InsufficientDataError, match="at least 10"):
            smooth(curve)
        smooth(make_curve([0.5] * 10, temps=range(10)))  # boundary is fine

    def test_clamping_keeps_unit_interval(self):
        temps = range(30)
        values = [0.0] * 15 + [1.0] * 15  # step: the spline overshoots both ends
        raw = smooth(
            make_curve(values, temps=temps),
            SmootherConfig(selection="fixed", fixed_lambda=2.0, clamp_output=False),
        )
        assert raw.smoothed_values.max() > 1.0 and raw.smoothed_values.min() < 0.0
        clamped = smooth(
            make_curve(values, temps=temps),
            SmootherConfig(selection="fixed", fixed_lambda=2.0),
        )
        assert clamped.smoothed_values.max() <= 1.0
        assert clamped.smoothed_values.min() >= 0.0

    def test_bad_configs_rejected(self):
        with pytest.raises(ValueError):
            SmootherConfig(lambda_grid=())
        with pytest.raises(ValueError):
            SmootherConfig(lambda_grid=(0.0, 1.0))
        with pytest.raises(ValueError):
            SmootherConfig(selection="fixed")
        with pytest.raises(ValueError):
            SmootherConfig(selection="loess")


class TestBuildCurves:
    def scored(self):
        config = StimulusConfig(
            units=(Unit.NONE,),
            ranges={Unit.NONE: (0, 11)},
            locations=("", "outside"),
            categories=("warm", "hot"),
        )
        warm = GeneralizedBell(6, 2, 6)
        spec = OracleSpec({Unit.NONE: {"warm": warm, "hot": warm}})
        return score_oracle(generate_dataset(config), spec)

    def test_pooled_by_default(self):
        curves = build_curves(self.scored())
        assert len(curves) == 2
        assert all(c.location is None for c in curves)
        assert [c.category for c in curves] == ["warm", "hot"]
        assert len(curves[0].samples) == 12

    def test_pooling_averages_locations(self):
        scored = self.scored()
        # perturb one location's scores by rebuilding with distinct oracle levels
        flat_a = Tabulated((-10, 20), (0.2, 0.2))
        flat_b = Tabulated((-10, 20), (0.8, 0.8))
        by_location = []
        for item in scored:
            level = flat_a if item.pair.location == "" else flat_b
            e = level.evaluate(0.0)
            from fuzzprobe.scoring import LabelScores, ScoredPair

            by_location.append(
                ScoredPair(item.pair, LabelScores(e, 0.7 * (1 - e), 1 - e - 0.7 * (1 - e)), "x")
            )
        pooled = build_curves(by_location)
        for curve in pooled:
            np.testing.assert_allclose(curve.values, 0.5)

    def test_per_location_mode(self):
        curves = build_curves(self.scored(), per_location=True)
        assert len(curves) == 4
        assert {c.location for c in curves} == {"", "outside"}


class TestCurveIO:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(9)
        curves = [
            smooth(make_curve(np.clip(sine_truth() + rng.normal(0, 0.05, len(TEMPS)), 0, 1)))
        ]
        curves.append(make_curve(rng.uniform(0, 1, len(TEMPS)), category="hot"))
        path = tmp_path / "curves.jsonl"
        write_curves(curves, path)
        assert read_curves(path) == curves
