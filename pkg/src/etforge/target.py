"""Base target spectra, intensifying profiles and time-varying target surfaces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .sdof import RunningSpectrum


@dataclass(frozen=True)
class BaseTargetSpectrum:
    """Acceleration target in m/s^2, either plateau-shaped or tabulated.

    The parametric shape ramps linearly from 0.4 * plateau at T = 0 to the
    plateau at ``t_b``, stays flat to ``t_c`` and decays as (t_c / T)**decay.
    Tabulated spectra interpolate linearly and refuse to extrapolate.
    """

    kind: str = "parametric"
    plateau: float = 7.0
    t_b: float = 0.15
    t_c: float = 0.6
    decay: float = 1.0
    table: tuple = field(default=())
    name: str = "plateau"

    def __post_init__(self):
        if self.kind == "parametric":
            if not (self.plateau > 0 and 0 < self.t_b <= self.t_c and self.decay > 0):
                raise ValueError("parametric spectrum needs plateau > 0, 0 < t_b <= t_c, decay > 0")
        elif self.kind == "tabulated":
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 1:
                raise ValueError("table must be a sequence of (period, value) pairs")
            if np.any(np.diff(tab[:, 0]) <= 0):
                raise ValueError("tabulated periods must be strictly increasing")
            if np.any(tab[:, 1] <= 0):
                raise ValueError("tabulated spectral values must be positive")
            object.__setattr__(self, "table", tuple(map(tuple, tab)))
        else:
            raise ValueError(f"unknown spectrum kind {self.kind!r}")

    def accel(self, periods) -> np.ndarray:
        T = np.asarray(periods, dtype=float)
        if self.kind == "tabulated":
            tab = np.asarray(self.table)
            lo, hi = tab[0, 0], tab[-1, 0]
            if np.any(T < lo - 1e-12) or np.any(T > hi + 1e-12):
                raise ValueError(f"periods outside tabulated range [{lo}, {hi}]")
            return np.interp(T, tab[:, 0], tab[:, 1])
        ramp = self.plateau * (0.4 + 0.6 * T / self.t_b)
        decay = self.plateau * (self.t_c / np.maximum(T, self.t_c)) ** self.decay
        return np.where(T < self.t_b, ramp, np.where(T <= self.t_c, self.plateau, decay))

    def disp(self, periods) -> np.ndarray:
        """Pseudo-spectral displacement S_a * (T / 2 pi)^2."""
        T = np.asarray(periods, dtype=float)
        return self.accel(T) * (T / (2 * np.pi)) ** 2


@dataclass(frozen=True)
class IntensifyingProfile:
    """Scale factor g(t) with g(t_target) = 1.

    ``linear``: g = t / t_target. ``exponential``: g = b tanh(gamma t) exp(alpha t)
    with b solved at construction. ``t_max`` bounds the usable range and
    defaults to twice the target time.
    """

    kind: str = "linear"
    t_target: float = 10.0
    gamma: float = 1.0
    alpha: float = 0.05
    t_max: float | None = None
    b: float = field(default=1.0, init=False)

    def __post_init__(self):
        if not self.t_target > 0:
            raise ValueError("t_target must be positive")
        if self.t_max is None:
            object.__setattr__(self, "t_max", 2.0 * self.t_target)
        if self.kind == "linear":
            object.__setattr__(self, "b", 1.0 / self.t_target)
        elif self.kind == "exponential":
            if not (self.gamma > 0 and self.alpha > 0):
                raise ValueError("exponential profile needs gamma > 0 and alpha > 0")
            arg = self.gamma * self.t_target
            if arg < 1e-8:
                raise ValueError("gamma * t_target is too small to calibrate b")
            object.__setattr__(self, "b", 1.0 / (math.tanh(arg) * math.exp(self.alpha * self.t_target)))
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    def __call__(self, t):
        return profile_value(self, t)


def profile_value(profile: IntensifyingProfile, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("profile time must be non-negative")
    if profile.kind == "linear":
        out = t_arr / profile.t_target
    else:
        out = profile.b * np.tanh(profile.gamma * t_arr) * np.exp(profile.alpha * t_arr)
    return float(out) if out.ndim == 0 else out


def calibrate_exponential(t_target: float, gamma: float, alpha: float, t_max: float | None = None):
    return IntensifyingProfile("exponential", t_target, gamma, alpha, t_max)


def time_to_intensity(profile: IntensifyingProfile, t: float) -> float:
    if not 0 <= t <= profile.t_max + 1e-12:
        raise ValueError(f"time {t} outside [0, {profile.t_max}]")
    return profile_value(profile, t)


def intensity_to_time(profile: IntensifyingProfile, lam: float) -> float:
    top = profile_value(profile, profile.t_max)
    if not 0 <= lam <= top * (1 + 1e-12):
        raise ValueError(f"intensity {lam} outside achievable range [0, {top}]")
    if profile.kind == "linear":
        return lam * profile.t_target
    if lam == 0:
        return 0.0
    return brentq(lambda t: profile_value(profile, t) - lam, 0.0, profile.t_max, xtol=1e-14)


@dataclass(frozen=True)
class TargetModel:
    base: BaseTargetSpectrum
    profile: IntensifyingProfile
    periods: tuple
    checkpoints: tuple

    def __post_init__(self):
        periods = np.asarray(self.periods, dtype=float)
        times = np.asarray(self.checkpoints, dtype=float)
        if periods.size == 0 or np.any(np.diff(periods) <= 0) or periods[0] <= 0:
            raise ValueError("period grid must be positive and strictly increasing")
        if times.size == 0 or np.any(np.diff(times) <= 0) or times[0] < 0:
            raise ValueError("checkpoint grid must be non-negative and strictly increasing")
        if np.any(self.base.accel(periods) <= 0):
            raise ValueError("base spectrum must be positive over the period grid")
        object.__setattr__(self, "periods", tuple(periods.tolist()))
        object.__setattr__(self, "checkpoints", tuple(times.tolist()))

    @property
    def period_array(self) -> np.ndarray:
        return np.asarray(self.periods)

    @property
    def time_array(self) -> np.ndarray:
        return np.asarray(self.checkpoints)


def target_surface(model: TargetModel) -> tuple[RunningSpectrum, RunningSpectrum]:
    T, t = model.period_array, model.time_array
    g = np.asarray(profile_value(model.profile, t))
    sa = model.base.accel(T)[:, None] * g[None, :]
    su = model.base.disp(T)[:, None] * g[None, :]
    return RunningSpectrum(T, t, sa, "acceleration"), RunningSpectrum(T, t, su, "displacement")


def period_grid(t_min: float, t_max: float, count: int, spacing: str = "log") -> np.ndarray:
    if not (0 < t_min < t_max) or count < 2:
        raise ValueError("period grid needs 0 < t_min < t_max and count >= 2")
    if spacing == "log":
        grid = np.geomspace(t_min, t_max, count)
    elif spacing == "linear":
        grid = np.linspace(t_min, t_max, count)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    grid[0], grid[-1] = t_min, t_max
    return grid


def read_tabulated_csv(path, name=None) -> BaseTargetSpectrum:
    rows = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh.read().replace("\r\n", "\n").split("\n"), start=1):
            line = line.strip()
            if not line or line.startswith("#") or line.lower().startswith("period"):
                continue
            try:
                period, value = (float(c) for c in line.split(","))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected 'period,value'") from None
            rows.append((period, value))
    return BaseTargetSpectrum(kind="tabulated", table=tuple(rows), name=name or str(path))
