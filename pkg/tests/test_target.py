import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etforge.target import (
    BaseTargetSpectrum,
    IntensifyingProfile,
    TargetModel,
    calibrate_exponential,
    intensity_to_time,
    period_grid,
    profile_value,
    read_tabulated_csv,
    target_surface,
    time_to_intensity,
)

LINEAR = IntensifyingProfile("linear", 10.0)


def test_linear_profile_values():
    assert profile_value(LINEAR, 10.0) == 1.0
    assert profile_value(LINEAR, 20.0) == 2.0
    assert profile_value(LINEAR, 5.0) == 0.5


def test_exponential_calibration_by_substitution():
    prof = calibrate_exponential(20.0, 1.0, 0.05)
    assert prof.b == pytest.approx(1 / (math.tanh(20.0) * math.exp(1.0)), rel=1e-15)
    assert abs(prof(20.0) - 1.0) <= 1e-12
    assert prof(0.0) == 0.0


@settings(max_examples=50, deadline=None)
@given(t_target=st.floats(1.0, 30.0), gamma=st.floats(0.01, 3.0), alpha=st.floats(0.001, 0.2))
def test_exponential_profile_properties(t_target, gamma, alpha):
    prof = calibrate_exponential(t_target, gamma, alpha)
    assert prof(t_target) == pytest.approx(1.0, abs=1e-12)
    t = np.linspace(0, prof.t_max, 2001)[1:]
    assert np.all(np.diff(prof(t)) > 0)
    expected = math.tanh(2 * gamma * t_target) / math.tanh(gamma * t_target) * math.exp(alpha * t_target)
    assert prof(2 * t_target) / prof(t_target) == pytest.approx(expected, rel=1e-12)


def test_profile_rejects_bad_parameters():
    with pytest.raises(ValueError):
        IntensifyingProfile("linear", 0.0)
    with pytest.raises(ValueError):
        IntensifyingProfile("cubic", 10.0)
    with pytest.raises(ValueError, match="too small"):
        IntensifyingProfile("exponential", 1e-6, gamma=1e-4)
    with pytest.raises(ValueError, match="non-negative"):
        profile_value(LINEAR, -1.0)


def test_mapping_closed_form_and_examples():
    assert intensity_to_time(LINEAR, 1.5) == 15.0
    assert intensity_to_time(LINEAR, 0.5) == 5.0
    t = np.linspace(0, 20, 100)
    for ti in t:
        assert intensity_to_time(LINEAR, time_to_intensity(LINEAR, ti)) == pytest.approx(ti, abs=1e-12)
    with pytest.raises(ValueError, match=r"\[0, 2.0\]"):
        intensity_to_time(LINEAR, 2.5)
    with pytest.raises(ValueError):
        time_to_intensity(LINEAR, 25.0)


@settings(max_examples=30, deadline=None)
@given(t_target=st.floats(2.0, 30.0), gamma=st.floats(0.05, 2.0), alpha=st.floats(0.005, 0.1))
def test_exponential_round_trip(t_target, gamma, alpha):
    prof = calibrate_exponential(t_target, gamma, alpha)
    for t in np.linspace(0, prof.t_max, 100):
        assert abs(intensity_to_time(prof, time_to_intensity(prof, t)) - t) <= 1e-9


def test_parametric_shape_is_continuous():
    base = BaseTargetSpectrum(plateau=7.0, t_b=0.15, t_c=0.6)
    eps = 1e-12
    assert base.accel(0.0) == pytest.approx(2.8)
    assert base.accel(0.15 - eps) == pytest.approx(7.0, rel=1e-9)
    assert base.accel(0.6 + eps) == pytest.approx(7.0, rel=1e-9)
    assert base.accel(1.2) == pytest.approx(3.5)
    T = np.geomspace(0.1, 4, 30)
    np.testing.assert_allclose(base.disp(T), base.accel(T) * (T / (2 * np.pi)) ** 2)


def test_tabulated_spectrum(tmp_path):
    path = tmp_path / "code.csv"
    path.write_text("period,sa\r\n0.1,5.0\r\n1.0,8.0\r\n2.0,4.0\r\n")
    base = read_tabulated_csv(path, "code")
    assert base.accel(0.55) == pytest.approx(6.5)
    assert base.accel(1.5) == pytest.approx(6.0)
    with pytest.raises(ValueError, match="outside tabulated range"):
        base.accel(3.0)
    with pytest.raises(ValueError):
        BaseTargetSpectrum("tabulated", table=((1.0, 2.0), (0.5, 1.0)))


def test_target_surface_rows():
    T = period_grid(0.1, 4.0, 30)
    base = BaseTargetSpectrum()
    model = TargetModel(base, LINEAR, tuple(T), (2.5, 5.0, 10.0, 20.0))
    sa, su = target_surface(model)
    np.testing.assert_array_equal(sa.at(10.0), base.accel(T))
    np.testing.assert_array_equal(su.at(10.0), base.disp(T))
    np.testing.assert_allclose(sa.at(20.0), 2 * sa.at(10.0), rtol=1e-15)
    np.testing.assert_allclose(sa.at(5.0), 2 * sa.at(2.5), rtol=1e-15)

    expo = TargetModel(base, calibrate_exponential(10.0, 1.0, 0.05), tuple(T), (0.0, 10.0))
    sa, su = target_surface(expo)
    assert not sa.at(0.0).any() and not su.at(0.0).any()


def test_period_grid_and_model_validation():
    g = period_grid(0.1, 4.0, 30)
    assert g[0] == 0.1 and g[-1] == 4.0 and g.size == 30
    np.testing.assert_allclose(np.diff(np.log(g)), np.log(40) / 29)
    with pytest.raises(ValueError):
        period_grid(1.0, 0.5, 10)
    with pytest.raises(ValueError):
        TargetModel(BaseTargetSpectrum(), LINEAR, (1.0, 0.5), (1.0,))
