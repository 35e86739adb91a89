import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from etforge.analysis import (
    ETCurve,
    IDACurve,
    Limit,
    ShearBuildingModel,
    check_performance,
    compare_et_vs_ida,
    edp_history,
    envelope,
    integrate_building,
    profile_from_meta,
    read_et_csv,
    read_ida_csv,
    run_et_analysis,
    run_ida,
    synthetic_records,
    write_et_csv,
    write_ida_csv,
)
from etforge.sdof import SDOFModel, integrate_sdof, response_spectra, substeps
from etforge.signal import AccelerationRecord
from etforge.target import BaseTargetSpectrum, IntensifyingProfile, intensity_to_time

from oracles import fine_input, shear_building_newmark

PROFILE = IntensifyingProfile("linear", 10.0, t_max=20.48)
LAMBDAS = 0.25 * np.arange(1, 9)


def noise(n=600, seed=0, scale=2.0, dt=0.02):
    s = scale * np.random.default_rng(seed).standard_normal(n)
    s[0] = 0.0
    return AccelerationRecord(dt, s, f"noise-{seed}")


def test_envelope_examples():
    np.testing.assert_array_equal(envelope([0, 1, -3, 2], 0.1).values, [0, 1, 3, 3])
    np.testing.assert_array_equal(envelope([-2.5] * 5, 0.1).values, [2.5] * 5)
    with pytest.raises(ValueError):
        envelope([0.0, np.nan], 0.1)


def test_envelope_long_history_brute_force():
    f = np.random.default_rng(3).standard_normal(10_000)
    env = envelope(f, 0.01).values
    running = 0.0
    for i, val in enumerate(f):
        running = max(running, abs(val))
        assert env[i] == running


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(1, 300), elements=st.floats(-1e6, 1e6)))
def test_envelope_is_prefix_max(f):
    env = envelope(f, 0.01).values
    assert all(env[i] == max(abs(v) for v in f[: i + 1]) for i in range(f.size))


def test_zero_etef_gives_zero_curve():
    rec = AccelerationRecord(0.02, np.zeros(500))
    for model in (SDOFModel(0.5), ShearBuildingModel.uniform(3, 0.6, hysteresis="epp", yield_drift=0.01)):
        assert not run_et_analysis(model, rec, "drift").values.any()


def test_single_story_building_reduces_to_sdof():
    rec = noise()
    sdof = SDOFModel(0.7, 0.05)
    bld = ShearBuildingModel(stiffness=(sdof.stiffness,), damping=0.05)
    assert bld.periods[0] == pytest.approx(0.7, rel=1e-14)
    x = integrate_sdof(sdof, rec).displacement
    np.testing.assert_allclose(integrate_building(bld, rec).displacement[:, 0], x, atol=1e-9 * np.max(np.abs(x)))
    et_b = run_et_analysis(bld, rec, "drift")
    et_s = run_et_analysis(sdof, rec, "drift")
    np.testing.assert_allclose(et_b.values, envelope(x / 3.0, rec.dt).values, rtol=1e-9, atol=1e-15)
    np.testing.assert_allclose(et_s.values, et_b.values, rtol=1e-9, atol=1e-15)


def test_three_story_epp_step_refinement(desk_etef):
    model = ShearBuildingModel.uniform(3, 0.6, hysteresis="epp", yield_drift=0.012)
    curve = run_et_analysis(model, desk_etef, "drift")
    assert curve.collapsed_at is None
    m = substeps(model.periods[-1], desk_etef.dt)
    agf, h = fine_input(desk_etef.samples, desk_etef.dt, 10 * m)
    k0 = np.asarray(model.stiffness)
    u = shear_building_newmark(agf, h, np.asarray(model.mass), k0, k0 * 0.012, np.zeros(3),
                               np.ascontiguousarray(model.damping_matrix()))
    drift = np.max(np.abs(np.diff(np.hstack([np.zeros((u.shape[0], 1)), u]), axis=1)) / 3.0, axis=1)
    ref = np.maximum.accumulate(drift)[:: 10 * m]
    assert ref[-1] > 0.012 / 3.0 * 2  # well into the inelastic range
    for t in 2.5 * np.arange(1, 9):
        i = int(round(t / desk_etef.dt))
        assert curve.values[i] == pytest.approx(ref[i], rel=0.02)


def test_building_modal_damping_and_uniform_period():
    bld = ShearBuildingModel.uniform(4, 0.8, damping=0.05)
    assert bld.periods[0] == pytest.approx(0.8, rel=1e-12)
    K, C = bld.stiffness_matrix(), bld.damping_matrix()
    import scipy.linalg as la

    w2, phi = la.eigh(K, np.diag(bld.mass))
    w = np.sqrt(w2)
    xi = np.diag(phi.T @ C @ phi) / (2 * w)
    assert xi[0] == pytest.approx(0.05, rel=1e-10)
    # Rayleigh damping hits the target at w1 and 3 w1 and is classical
    A = np.array([[1 / (2 * w[0]), w[0] / 2], [1 / (6 * w[0]), 3 * w[0] / 2]])
    a0, a1 = np.linalg.solve(A, [0.05, 0.05])
    np.testing.assert_allclose(xi, a0 / (2 * w) + a1 * w / 2, rtol=1e-10)
    modal = phi.T @ C @ phi
    assert np.max(np.abs(modal - np.diag(np.diag(modal)))) < 1e-12


def test_building_collapse_truncates_and_reports():
    bld = ShearBuildingModel.uniform(2, 1.0, hysteresis="epp", yield_drift=0.002)
    rec = AccelerationRecord(0.02, np.concatenate([[0.0], np.full(999, -3.0)]))
    resp = integrate_building(bld, rec, collapse_drift=0.05)
    assert resp.collapsed_at is not None
    curve = run_et_analysis(bld, rec, "drift", collapse_drift=0.05)
    assert curve.at(curve.times[-1] + 1.0) == math.inf


def test_edp_selectors():
    rec = noise()
    model = SDOFModel(0.5, hysteresis="bilinear", yield_accel=3.0, post_yield_ratio=0.1)
    roof, _ = edp_history(model, rec, "roof")
    drift, _ = edp_history(model, rec, "drift", height=2.0)
    duct, _ = edp_history(model, rec, "ductility")
    np.testing.assert_allclose(drift, roof / 2.0)
    np.testing.assert_allclose(duct, roof / model.yield_disp)
    with pytest.raises(ValueError):
        edp_history(SDOFModel(0.5), rec, "ductility")
    with pytest.raises(ValueError):
        edp_history(model, rec, "rotation")


def test_ida_zero_and_linearity():
    recs = [noise(seed=s) for s in range(3)]
    model = SDOFModel(0.4)
    ida = run_ida(model, recs, [0.0, 0.5, 1.0, 3.0], "roof")
    assert not ida.edp[:, 0].any()
    np.testing.assert_array_equal(ida.edp[:, 1], 0.5 * ida.edp[:, 2])
    np.testing.assert_allclose(ida.edp[:, 3], 3.0 * ida.edp[:, 2], rtol=1e-12)
    with pytest.raises(ValueError, match="no records"):
        run_ida(model, [], [1.0])


def test_ida_median_matches_independent_loop():
    base = BaseTargetSpectrum()
    recs = synthetic_records(base, count=5, seed=1)
    model = SDOFModel(0.5, hysteresis="bilinear", yield_accel=0.7 * float(base.accel(0.5)), post_yield_ratio=0.1)
    ida = run_ida(model, recs, LAMBDAS, "roof", workers=2)
    table = [[np.max(np.abs(integrate_sdof(model, r.scaled(lam), x_cap=0.3).displacement)) for lam in LAMBDAS]
             for r in recs]
    np.testing.assert_array_equal(ida.median, np.median(np.array(table), axis=0))
    assert run_ida(model, recs, LAMBDAS, "roof").edp.tobytes() == ida.edp.tobytes()


def test_collapsed_cells_count_as_infinite():
    # five records, the largest one collapsed: sorted ranks 0..4, 84% sits at 3.36
    ida = IDACurve([1.0], list("abcde"), [[0.1], [0.2], [0.3], [0.4], [0.5]],
                   [[False], [False], [False], [False], [True]])
    fr = ida.fractiles()
    assert fr[16][0] == pytest.approx(0.1 + 0.64 * 0.1)
    assert fr[50][0] == pytest.approx(0.3)
    assert fr[84][0] == math.inf


def test_synthetic_records_track_base_spectrum():
    base = BaseTargetSpectrum()
    recs = synthetic_records(base, count=3, seed=4)
    again = synthetic_records(base, count=3, seed=4)
    assert [r.samples.tobytes() for r in recs] == [r.samples.tobytes() for r in again]
    T = np.geomspace(0.1, 3.0, 12)
    for r in recs:
        sa, _ = response_spectra(r, T, [r.duration])
        ratio = sa.values[:, 0] / base.accel(T)
        assert 0.6 < np.mean(ratio) < 1.4
        assert r.samples[0] == 0.0


def test_compare_self_and_anti_monotone():
    ida = IDACurve(LAMBDAS, ["a", "b", "c"],
                   np.outer([0.8, 1.0, 1.3], LAMBDAS ** 1.2), np.zeros((3, 8), bool))
    med = ida.median
    times = np.array([intensity_to_time(PROFILE, lam) for lam in LAMBDAS])
    self_curve = ETCurve(times, med)
    rep = compare_et_vs_ida(self_curve, PROFILE, ida)
    assert rep["correlation"] == pytest.approx(1.0, abs=1e-12)
    assert rep["mean_relative_error"] == pytest.approx(0.0, abs=1e-12)
    rep = compare_et_vs_ida(ETCurve(times, med[::-1]), PROFILE, ida)
    assert rep["correlation"] <= 0
    with pytest.raises(ValueError, match="do not overlap"):
        compare_et_vs_ida(self_curve, PROFILE, IDACurve([5.0], ["a"], [[1.0]], [[False]]))


def test_check_performance_patterns():
    curve = ETCurve(np.array([0.0, 5.0, 10.0, 15.0]), np.array([0.0, 0.01, 0.02, 0.04]))
    assert all(r["passed"] for r in check_performance(curve, PROFILE, [Limit(0.5, math.inf), Limit(1.5, math.inf)]))
    assert not check_performance(curve, PROFILE, [{"intensity": 0.5, "cap": 0.0}])[0]["passed"]
    res = check_performance(curve, PROFILE, [Limit(0.5, 0.015), Limit(1.0, 0.025), Limit(1.5, 0.03)])
    assert [r["passed"] for r in res] == [True, True, False]
    assert res[2]["demand"] == 0.04 and res[2]["time"] == 15.0


def test_desk_curve_performance_pattern(desk_etef):
    model = ShearBuildingModel.uniform(3, 0.6, hysteresis="epp", yield_drift=0.012)
    curve = run_et_analysis(model, desk_etef, "drift", PROFILE)
    d = [curve.at(intensity_to_time(PROFILE, lam)) for lam in (0.5, 1.0, 1.5)]
    caps = [d[0] * 1.1, d[1] * 1.1, d[2] * 0.9]
    res = check_performance(curve, PROFILE, [Limit(l, c) for l, c in zip((0.5, 1.0, 1.5), caps)])
    assert [r["passed"] for r in res] == [True, True, False]


def test_et_and_ida_csv_round_trip(tmp_path):
    rec = noise()
    curve = run_et_analysis(SDOFModel(0.5), rec, "roof", PROFILE)
    back = read_et_csv(write_et_csv(curve, tmp_path / "et.csv"), "roof")
    np.testing.assert_array_equal(back.values, curve.values)
    np.testing.assert_array_equal(back.lambdas, curve.lambdas)
    collapsed = ETCurve(curve.times, curve.values, "roof", 7.5)
    assert read_et_csv(write_et_csv(collapsed, tmp_path / "c.csv")).collapsed_at == 7.5

    ida = IDACurve(LAMBDAS[:3], ["r0", "r1"], [[0.1, 0.2, 0.3], [0.15, 0.25, 0.4]],
                   [[False, False, True], [False, False, False]], "roof")
    back = read_ida_csv(write_ida_csv(ida, tmp_path / "ida.csv"), "roof")
    np.testing.assert_array_equal(back.edp, ida.edp)
    np.testing.assert_array_equal(back.collapsed, ida.collapsed)
    assert back.record_ids == ida.record_ids


def test_profile_from_meta():
    prof = IntensifyingProfile("exponential", 10.0, gamma=0.5, alpha=0.04, t_max=20.0)
    meta = {"profile": "exponential", "t_target": "10.0", "gamma": "0.5", "alpha_g": "0.04", "t_max": "20.0"}
    assert profile_from_meta(meta) == prof
    assert profile_from_meta({}) is None
