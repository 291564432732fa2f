import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tailbetti.density import ExpDensity, PowerLawDensity, ball_volume
from tailbetti.harness import PRESETS, preset
from tailbetti.regimes import (
    NoCoreError,
    RegimeSpec,
    annulus_radii_exp,
    annulus_radii_power,
    classify_regime,
    eta_n,
    loglog_slope,
    n_f,
    rho_n,
    weak_core_radius,
    write_scaler_csv,
)

PROBE = [1e4, 1e6, 1e8, 1e10]


def test_power_radii_by_hand():
    r = annulus_radii_power(4.0, 2, 1.0, 1e4)
    assert r[0] == math.inf and r[-1] == 0.0 and len(r) == 4
    assert r[1] == pytest.approx(10 ** (4 * 3 / 10), rel=1e-12)
    assert r[1] == pytest.approx(15.848931924611133, rel=1e-12)
    assert r[2] == pytest.approx(10.0, rel=1e-12)


def test_exp_radii_by_hand():
    n = math.exp(10)
    r = annulus_radii_exp(1.0, 2, 1.0, n)
    assert r[0] == math.inf and r[-1] == 0.0
    assert r[1] == pytest.approx(10 + math.log(10) / 3, rel=1e-12)
    assert r[1] == pytest.approx(10.767528364331348, rel=1e-12)
    assert r[2] == pytest.approx(10.0, rel=1e-12)
    r = annulus_radii_exp(0.5, 3, 2.0, 1e6)
    L = 0.5 * math.log(1e6)
    assert r[3] == pytest.approx((L + 0.5 * math.log(2.0)) ** 2, rel=1e-12)


def test_exp_radii_domain_error():
    with pytest.raises(ValueError, match="not positive"):
        annulus_radii_exp(1.0, 2, 1e-3, 3)


@given(st.integers(2, 4), st.floats(0.5, 6.0), st.floats(0.1, 10.0), st.floats(10.0, 1e15))
def test_power_radii_decreasing(d, extra, C, n):
    r = annulus_radii_power(d + extra, d, C, n)
    if C * n > 1:
        assert all(a > b for a, b in zip(r, r[1:]))


@given(st.integers(2, 4), st.floats(0.2, 1.0), st.floats(1e3, 1e15))
def test_exp_radii_decreasing(d, tau, n):
    r = annulus_radii_exp(tau, d, 1.0, n)
    assert all(a > b for a, b in zip(r, r[1:]))


def test_radii_preconditions():
    with pytest.raises(ValueError):
        annulus_radii_power(2.0, 2, 1.0, 100)
    with pytest.raises(ValueError):
        annulus_radii_power(4.0, 2, 1.0, 1)
    with pytest.raises(ValueError):
        annulus_radii_exp(1.5, 2, 1.0, 100)


def test_rho_direct_formula():
    m = PowerLawDensity(2, 4.0)
    n, R = 1e6, 30.0
    f = m.normC / (1 + R**4)
    assert rho_n(m, 1, n, R) == pytest.approx(n**3 * R**2 * f**3, rel=1e-12)
    with pytest.raises(ValueError):
        rho_n(m, 1, n, 0.0)


def test_eta_direct_formula_and_doubling():
    m = ExpDensity(3, 1.0)
    n, R = 1e8, 12.0
    f = m.normC * math.exp(-R)
    assert eta_n(m, 1, n, R) == pytest.approx(n**3 * R**2 * f**3, rel=1e-12)
    ratio = eta_n(m, 1, n, 2 * R) / eta_n(m, 1, n, R)
    assert ratio == pytest.approx(4 * math.exp(-3 * R), rel=1e-12)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_preset_scaler_asymptotics(name):
    spec = preset(name).regime_spec()
    n = 1e12
    assert spec.scaler(n) / spec.asymptotic_scaler(n) == pytest.approx(1.0, abs=0.05)


def test_weak_core_power():
    m = PowerLawDensity(2, 4.0)
    for n in (1e3, 1e6, 1e9):
        R = weak_core_radius(m, n)
        assert n_f(m, n, R) == pytest.approx(1.0, abs=1e-9)
        assert R == pytest.approx((n * m.normC - 1) ** 0.25, rel=1e-10)
    assert weak_core_radius(m, 1e12) / (1e12 * m.normC) ** 0.25 == pytest.approx(1.0, abs=1e-6)


def test_weak_core_exponential():
    m = ExpDensity(2, 0.5)
    prev = 0.0
    ratios = []
    for n in (1e4, 1e8, 1e16, 1e32):
        R = weak_core_radius(m, n)
        assert n_f(m, n, R) == pytest.approx(1.0, abs=1e-9)
        assert R > prev
        prev = R
        ratios.append(R / (0.5 * math.log(n) + 0.5 * math.log(m.normC)) ** 2)
    assert abs(ratios[-1] - 1) < abs(ratios[0] - 1) or ratios[0] == pytest.approx(1.0, abs=1e-9)
    assert ratios[-1] == pytest.approx(1.0, abs=1e-6)


@given(st.floats(10.0, 1e12), st.floats(1.01, 10.0))
def test_weak_core_increasing(n, factor):
    m = PowerLawDensity(3, 5.0)
    assert weak_core_radius(m, n * factor) > weak_core_radius(m, n)


def test_no_core():
    m = PowerLawDensity(2, 4.0)
    with pytest.raises(NoCoreError):
        weak_core_radius(m, 0.5 / m.normC)


def test_classify_weak_core():
    cfg = preset("ex31-iii")
    spec = cfg.regime_spec()
    label, lam = classify_regime(spec, PROBE)
    assert label == "weak-core-regime"
    assert lam == pytest.approx(spec.model.normC / spec.param, rel=1e-2)
    assert spec.lam() == spec.model.normC / spec.param


def test_classify_sparse():
    assert classify_regime(preset("ex32-i").regime_spec(), PROBE)[0] == "sparse-CLT-regime"
    assert classify_regime(preset("ex31-ii").regime_spec(), PROBE)[0] == "sparse-CLT-regime"


def test_classify_absurd_radius():
    spec = RegimeSpec(PowerLawDensity(2, 4.0), "custom", 1, {"radius": lambda n: n})
    assert classify_regime(spec, PROBE)[0] in ("poisson-regime", "degenerate")


def test_classify_needs_wide_probe():
    with pytest.raises(ValueError):
        classify_regime(preset("ex31-i").regime_spec(), [1e4, 1e5, 1e6])


@pytest.mark.parametrize("name", [p for p in sorted(PRESETS) if p.startswith("ex31")])
def test_lambda_hat_power(name):
    spec = preset(name).regime_spec()
    lam_hat = n_f(spec.model, 1e10, spec.radius(1e10))
    if spec.lam() == 0:
        # a relative tolerance is void at 0; check the decay rate of n f(R_n) instead
        m = spec.model
        expo = {"power-case-i": 1 - m.alpha / (m.alpha - m.d / 3),
                "power-case-ii": 1 - m.alpha / (m.alpha - m.d / spec.param)}[spec.rule]
        lo = n_f(m, 1e8, spec.radius(1e8))
        slope = math.log(lam_hat / lo) / math.log(100.0)
        assert slope == pytest.approx(expo, rel=0.01 if spec.rule == "power-case-ii" else 0.1)
    else:
        assert lam_hat == pytest.approx(spec.lam(), rel=0.01)


def test_boundary_radius_keeps_rho_order_one():
    m = PowerLawDensity(2, 4.0)
    k = 1
    vals = [rho_n(m, k, n, annulus_radii_power(4.0, 2, m.normC, n)[k]) for n in (1e8, 1e10)]
    assert vals[1] / vals[0] == pytest.approx(1.0, abs=0.10)


def test_rule_parameter_ranges():
    pm, em = PowerLawDensity(2, 4.0), ExpDensity(2, 1.0)
    bad = [
        (pm, "power-case-i", {"xi": 0.0}),
        (pm, "power-case-ii", {"b": 3.0}),
        (pm, "power-case-iii", {"c": pm.normC * math.e * ball_volume(2) * 0.99}),
        (em, "exp-case-i", {"b": 0.5}),
        (em, "exp-case-ii", {"c1": 100.0}),
        (pm, "exp-case-i", {"b": 0.1}),
        (pm, "power-case-i", {}),
        (pm, "nonsense", {"xi": 1.0}),
    ]
    for model, rule, params in bad:
        with pytest.raises(ValueError):
            RegimeSpec(model, rule, 1, params)
    with pytest.raises(ValueError):
        RegimeSpec(pm, "power-case-i", 2, {"xi": 0.1})


def test_loglog_slope_recovers_exponent():
    ns = np.logspace(4, 12, 9)
    assert loglog_slope(ns, 3.0 * np.log(ns) ** 0.8) == pytest.approx(0.8, rel=1e-12)
    spec = preset("ex31-i").regime_spec()
    slope = loglog_slope(ns, [spec.scaler(n) for n in ns])
    assert slope > 0


def test_scaler_csv(tmp_path):
    spec = preset("ex32-ii").regime_spec()
    path = tmp_path / "scalers.csv"
    write_scaler_csv(spec, [1e3, 1e6], path)
    rows = list(csv.DictReader(open(path)))
    assert list(rows[0]) == ["n", "R_n", "nf(R_n)", "scaler"]
    assert float(rows[1]["R_n"]) == spec.radius(1e6)
    assert float(rows[1]["scaler"]) == spec.scaler(1e6)
