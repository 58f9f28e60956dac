import json
import math

import numpy as np
import pytest

import ridgebounds as rb


def test_spectrum_and_effective_ranks():
    spec = rb.build_spectrum("explicit", 100, values=[1.0] * 100)
    ranks = rb.effective_ranks(spec, 0.0, 10, 0)
    assert ranks.rho_k == pytest.approx(10.0)
    assert ranks.big_R_k == pytest.approx(100.0)
    assert rb.select_k_star(spec, 0.0, 10, 5.0) == 0

    exp = rb.build_spectrum("exponential", 3, gamma=1.0)
    assert exp.eigenvalues == pytest.approx([math.exp(-1), math.exp(-2), math.exp(-3)])

    with pytest.raises(ValueError):
        rb.build_spectrum("explicit", 3, values=[1.0, 2.0, 3.0])


def test_matched_bounds_worked_instance():
    spec = rb.build_spectrum("explicit", 100, values=[1.0] * 100)
    theta = [0.0] * 100
    theta[0] = 1.0
    mb = rb.matched_bounds(spec, theta, 10, 0.0, 0)
    assert mb.B_under == pytest.approx(100.0 / 121.0, abs=1e-12)
    assert mb.B_over == pytest.approx(1.0, abs=1e-12)
    assert mb.V_under == pytest.approx(10.0 / 144.0, abs=1e-12)
    assert mb.V_over == pytest.approx(0.1, abs=1e-12)
    caps = rb.ratio_caps_kstar(10.0, 5.0, 10)
    assert caps.B_cap == pytest.approx(36.0)


def test_dual_primal_agreement():
    spec = rb.build_spectrum("explicit", 30, values=[1.0] * 30)
    X = rb.sample_design("gaussian", spec, 12, 7)
    rng = np.random.default_rng(0)
    y = rng.normal(size=12)
    fit = rb.ridge_fit_dual(X, y, 0.5)
    oracle = rb.ridge_fit_primal_oracle(X, y, 0.5)
    assert fit.pd_margin > 0
    np.testing.assert_allclose(fit.theta_hat, oracle, rtol=1e-8, atol=1e-10)
    assert rb.exact_bias(X, spec, [1.0] * 30, 0.5) >= 0
    assert rb.exact_variance(X, spec, 0.5) > 0

    with pytest.raises(Exception):
        rb.ridge_fit_dual(X, y, -1e9)


def test_sweep_from_config_json():
    config = json.loads(rb.preset_spiked_negative_json(2, 200, 50.0, 1.0, 16, 10.0, 3))
    config["lambda_grid"] = [0.0, 5.0]
    csv, summary = rb.run_sweep_json(json.dumps(config), 2)
    lines = csv.strip().splitlines()
    assert lines[0].startswith("lambda,replicate,bias")
    assert len(lines) == 1 + 2 * 3
    parsed = json.loads(summary)
    assert parsed["lambda_opt"] in config["lambda_grid"]
    for entry in parsed["per_lambda"]:
        assert entry["available"]

    # Determinism across thread counts, byte for byte.
    csv_again, _ = rb.run_sweep_json(json.dumps(config), 1)
    assert csv_again == csv


def test_concentration_audit_shape():
    spec = rb.build_spectrum("explicit", 200, values=[1.0] * 200)
    audit = rb.concentration_audit(spec, "gaussian", 20, 0, 0.0, 100, 11)
    assert "sum_sq_norms" in audit
    assert audit["sum_sq_norms"]["samples"] == 100
    assert audit["hanson_wright_identity"]["q50"] == pytest.approx(1.0, rel=0.3)
