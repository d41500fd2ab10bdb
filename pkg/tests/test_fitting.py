"""Fitting pipeline tests: data validation, round-trip recovery of known
coefficients, region weighting, stability screen, and CSV ingestion."""

import numpy as np
import pytest

from foamact.defaults import default_compression_curve
from foamact.fitting import (
    DataValidationError,
    StressStrainCurve,
    classify_regions,
    fit_hyperfoam,
    load_curve_csv,
    residuals,
    rms_relative_error,
    save_curve_csv,
    stability_check,
    synthetic_foam_curve,
    write_fit_report,
)
from foamact.material import HyperfoamModel, hyperfoam_uniaxial_nominal


def curve_from_model(model, strain_min=-0.6, n=40, noise=0.0, seed=0):
    strain = np.linspace(strain_min, 0.0, n)
    stress = hyperfoam_uniaxial_nominal(model, 1.0 + strain)
    if noise:
        rng = np.random.default_rng(seed)
        stress = stress * (1.0 + noise * rng.standard_normal(stress.shape))
        stress[strain == 0.0] = 0.0
    return StressStrainCurve(strain, stress, {"density_kg_m3": 40.0})


class TestCurveValidation:
    def test_rejects_mismatched_lengths(self):
        with pytest.raises(DataValidationError):
            StressStrainCurve(np.zeros(5), np.zeros(4))

    def test_rejects_nonmonotone(self):
        e = np.array([0.0, -0.1, -0.05, -0.2, -0.3, -0.4, -0.5, -0.6])
        with pytest.raises(DataValidationError, match="monotone"):
            StressStrainCurve(e, -np.abs(e))

    def test_rejects_nonfinite(self):
        e = np.linspace(-0.6, 0.0, 10)
        s = -np.abs(e)
        s[3] = np.nan
        with pytest.raises(DataValidationError, match="non-finite"):
            StressStrainCurve(e, s)

    def test_rejects_strain_at_or_below_minus_one(self):
        e = np.linspace(-1.0, 0.0, 10)
        with pytest.raises(DataValidationError):
            StressStrainCurve(e, -np.abs(e))

    def test_rejects_too_few_samples(self):
        e = np.linspace(-0.5, 0.0, 5)
        with pytest.raises(DataValidationError, match="samples"):
            StressStrainCurve(e, -np.abs(e))

    def test_prepends_reference_sample(self):
        e = np.linspace(-0.6, -0.05, 12)
        c = StressStrainCurve(e, -np.abs(e))
        assert c.strain[-1] == 0.0 and c.stress[-1] == 0.0
        assert c.strain.size == 13

    def test_normalizes_to_increasing_strain(self):
        e = np.linspace(0.0, -0.6, 12)  # decreasing order in, increasing out
        c = StressStrainCurve(e, -np.abs(e))
        assert np.all(np.diff(c.strain) > 0)

    def test_stretch_property(self):
        c = synthetic_foam_curve()
        assert np.allclose(c.stretch, 1.0 + c.strain)


class TestFitRoundTrip:
    @pytest.mark.parametrize("coeffs", [
        ((0.02, 5.0, 0.0),),
        ((0.015, 8.0, 0.0), (0.005, -4.0, 0.0)),
    ])
    def test_recovers_known_model(self, coeffs):
        truth = HyperfoamModel(coeffs)
        data = curve_from_model(truth)
        result = fit_hyperfoam(data, order=truth.order)
        assert result.converged
        assert result.rms_relative_error < 0.01
        pred = hyperfoam_uniaxial_nominal(result.model, data.stretch)
        assert rms_relative_error(pred, data.stress) < 0.01

    def test_noisy_data_still_fits(self):
        truth = HyperfoamModel(((0.015, 8.0, 0.0), (0.005, -4.0, 0.0)))
        data = curve_from_model(truth, noise=0.02, seed=7)
        result = fit_hyperfoam(data, order=2)
        assert result.converged
        assert result.rms_relative_error < 0.08

    def test_packaged_dataset_fits_within_tolerance(self):
        data = default_compression_curve()
        result = fit_hyperfoam(data, order=2)
        assert result.converged
        assert result.rms_relative_error <= 0.05

    def test_region_weights_shift_emphasis(self):
        data = default_compression_curve()
        plain = fit_hyperfoam(data, order=2)
        weighted = fit_hyperfoam(data, order=2,
                                 region_weights={"densification": 4.0})
        labels = classify_regions(data)
        dens = labels == 2
        if np.count_nonzero(dens) >= 3:
            _, rms_plain = residuals(plain.model, data)
            res_p, _ = residuals(plain.model, data)
            res_w, _ = residuals(weighted.model, data)
            # emphasized region should not get worse
            assert (np.abs(res_w[dens]).mean()
                    <= np.abs(res_p[dens]).mean() * 1.0 + 1e-12)

    def test_invalid_order_rejected(self):
        with pytest.raises(DataValidationError, match="order"):
            fit_hyperfoam(synthetic_foam_curve(), order=4)

    def test_fitted_model_is_monotone_over_data(self):
        data = default_compression_curve()
        result = fit_hyperfoam(data, order=2)
        lam = np.linspace(data.stretch.min(), data.stretch.max(), 200)
        p = hyperfoam_uniaxial_nominal(result.model, lam)
        assert np.all(np.diff(p) > 0)


class TestStabilityCheck:
    def test_passes_conventional_model(self):
        report = stability_check(HyperfoamModel(((0.02, 5.0, 0.0),)))
        assert report.passed and not report.violating_indices

    def test_flags_densification_term(self):
        model = HyperfoamModel(((0.02, 5.0, 0.0), (0.001, -4.0, 0.0)))
        report = stability_check(model)
        assert report.sum_mu_ok
        assert report.violating_indices == [1]
        assert not report.passed


class TestRegions:
    def test_labels_cover_three_regions(self):
        data = synthetic_foam_curve()
        labels = classify_regions(data)
        assert set(np.unique(labels)) <= {0, 1, 2}
        assert 0 in labels and 1 in labels


class TestCsv:
    def test_round_trip(self, tmp_path):
        curve = synthetic_foam_curve(noise=0.01, seed=3)
        path = tmp_path / "curve.csv"
        save_curve_csv(curve, path)
        back = load_curve_csv(path)
        assert np.allclose(back.strain, curve.strain, rtol=1e-9)
        assert np.allclose(back.stress, curve.stress, rtol=1e-9)

    def test_comments_and_header_accepted(self, tmp_path):
        path = tmp_path / "curve.csv"
        rows = ["# uniaxial compression, specimen 40x40 mm", "strain,stress_MPa"]
        for e in np.linspace(-0.6, 0.0, 10):
            rows.append(f"{e},{-abs(e) * 0.01}")
        path.write_text("\n".join(rows) + "\n")
        curve = load_curve_csv(path)
        assert curve.strain.size == 10

    def test_malformed_row_names_the_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        lines = ["strain,stress_MPa"]
        for e in np.linspace(-0.6, -0.1, 9):
            lines.append(f"{e},{-abs(e) * 0.01}")
        lines.insert(4, "-0.35,oops")
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataValidationError, match=r"bad\.csv:5"):
            load_curve_csv(path)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text("-0.5,-0.01\n-0.4,-0.008\n")
        with pytest.raises(DataValidationError, match="header"):
            load_curve_csv(path)

    def test_fit_report(self, tmp_path):
        import json
        data = curve_from_model(HyperfoamModel(((0.02, 5.0, 0.0),)))
        result = fit_hyperfoam(data, order=1)
        path = tmp_path / "report.json"
        write_fit_report(result, path)
        doc = json.loads(path.read_text())
        assert doc["converged"] is True
        assert doc["model"]["family"] == "hyperfoam"
