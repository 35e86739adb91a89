"""Single-degree-of-freedom oscillators and running response spectra.

Everything is per unit mass: strengths are pseudo-accelerations (m/s^2) and
energies are m^2/s^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .signal import AccelerationRecord

DEFAULT_DAMPING = 0.05
HYSTERESIS = ("linear", "epp", "bilinear")


@dataclass(frozen=True)
class SDOFModel:
    period: float
    damping: float = DEFAULT_DAMPING
    hysteresis: str = "linear"
    yield_accel: float | None = None
    post_yield_ratio: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.period) and self.period > 0):
            raise ValueError(f"period must be positive, got {self.period}")
        if not 0 <= self.damping < 1:
            raise ValueError(f"damping ratio must lie in [0, 1), got {self.damping}")
        if self.hysteresis not in HYSTERESIS:
            raise ValueError(f"hysteresis must be one of {HYSTERESIS}")
        if self.hysteresis != "linear":
            if self.yield_accel is None or not self.yield_accel > 0:
                raise ValueError("nonlinear models need a positive yield_accel")
        if self.hysteresis == "epp":
            object.__setattr__(self, "post_yield_ratio", 0.0)
        if not 0 <= self.post_yield_ratio < 1:
            raise ValueError("post_yield_ratio must lie in [0, 1)")

    @property
    def omega(self) -> float:
        return 2 * math.pi / self.period

    @property
    def stiffness(self) -> float:
        return self.omega ** 2

    @property
    def yield_disp(self) -> float | None:
        return None if self.yield_accel is None else self.yield_accel / self.stiffness

    def kernel_args(self):
        """(kind, k, hardening modulus, eta, c) for the compiled integrators."""
        k = self.stiffness
        if self.hysteresis == "linear":
            return _kernels.LINEAR, k, 0.0, 0.0, 2 * self.damping * self.omega
        r = self.post_yield_ratio
        return _kernels.BILINEAR, k, r * k / (1 - r), float(self.yield_accel), 2 * self.damping * self.omega


@dataclass(frozen=True)
class SDOFResponse:
    dt: float
    displacement: np.ndarray
    velocity: np.ndarray
    rel_accel: np.ndarray
    abs_accel: np.ndarray
    restoring: np.ndarray
    energy: np.ndarray
    collapsed_at: float | None = None


@dataclass(frozen=True)
class RunningSpectrum:
    """Running-max spectrum on a (period x checkpoint time) grid."""

    periods: np.ndarray
    times: np.ndarray
    values: np.ndarray
    kind: str = "acceleration"

    def __post_init__(self):
        if self.kind not in ("acceleration", "displacement"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        for name in ("periods", "times", "values"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.values.shape != (self.periods.size, self.times.size):
            raise ValueError("values must be shaped (periods, times)")

    def at(self, t: float) -> np.ndarray:
        """Spectrum row at a stored checkpoint time."""
        idx = np.flatnonzero(np.isclose(self.times, t, rtol=0, atol=1e-9))
        if idx.size == 0:
            raise KeyError(f"no checkpoint at t={t}")
        return self.values[:, idx[0]]


def substeps(period: float, dt: float) -> int:
    """Substeps per record sample so the integration step is <= T/20."""
    return max(1, math.ceil(dt * 20.0 / period - 1e-9))


def integrate_sdof(model: SDOFModel, record: AccelerationRecord, x_cap: float = np.inf) -> SDOFResponse:
    """Zero-initial-condition Newmark response sampled at the record's time grid.

    If ``x_cap`` is finite the run stops once |x| exceeds it; histories are
    truncated there and ``collapsed_at`` holds the time.
    """
    kind, k, hard, eta, c = model.kernel_args()
    ag = np.ascontiguousarray(record.samples, dtype=float)
    m = substeps(model.period, record.dt)
    x, v, a, f, e, n = _kernels.sdof_history(ag, record.dt, m, kind, k, hard, eta, c, float(x_cap))
    collapsed = None if n == ag.size and not abs(x[-1]) > x_cap else (n - 1) * record.dt
    return SDOFResponse(
        dt=record.dt,
        displacement=x[:n],
        velocity=v[:n],
        rel_accel=a[:n],
        abs_accel=a[:n] + ag[:n],
        restoring=f[:n],
        energy=e[:n],
        collapsed_at=collapsed,
    )


def hysteretic_energy(response: SDOFResponse) -> float:
    """Final cumulative dissipated plastic work per unit mass."""
    return float(response.energy[-1])


def _grid(values, name) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.size == 0:
        raise ValueError(f"{name} grid is empty")
    if np.any(np.diff(arr) <= 0):
        raise ValueError(f"{name} grid must be strictly increasing")
    return arr


class SpectrumGrid:
    """Precomputed integration settings for a fixed (periods, checkpoints, dt).

    Shared by the spectrum evaluation and the finite-difference Jacobian so
    both walk exactly the same substep grid.
    """

    def __init__(self, periods, checkpoints, dt, n_samples, damping=DEFAULT_DAMPING):
        self.periods = _grid(periods, "period")
        self.checkpoints = _grid(checkpoints, "checkpoint")
        if np.any(self.periods <= 0):
            raise ValueError("periods must be positive")
        duration = dt * (n_samples - 1)
        if self.checkpoints[0] < 0 or self.checkpoints[-1] > duration + 1e-9:
            raise ValueError(f"checkpoints must lie within [0, {duration}]")
        self.dt = float(dt)
        self.n_samples = int(n_samples)
        self.damping = float(damping)
        omega = 2 * np.pi / self.periods
        self.ms = np.array([substeps(p, dt) for p in self.periods], dtype=np.int64)
        self.ks = omega ** 2
        self.cs = 2 * self.damping * omega
        fine_dt = self.dt / self.ms
        ends = np.floor(self.checkpoints[None, :] / fine_dt[:, None] + 1e-7).astype(np.int64)
        self.ck_end = np.minimum(ends, (self.n_samples - 1) * self.ms[:, None])

    def spectra(self, samples) -> tuple[np.ndarray, np.ndarray]:
        ag = np.ascontiguousarray(samples, dtype=float)
        if ag.size != self.n_samples:
            raise ValueError(f"expected {self.n_samples} samples, got {ag.size}")
        return _kernels.linear_spectra(ag, self.dt, self.ms, self.ks, self.cs, self.ck_end)

    def jacobian(self, samples, cols, step) -> tuple[np.ndarray, np.ndarray]:
        ag = np.ascontiguousarray(samples, dtype=float)
        cols = np.ascontiguousarray(cols, dtype=np.int64)
        return _kernels.fd_spectra_jacobian(
            ag, self.dt, self.ms, self.ks, self.cs, self.ck_end, cols, float(step)
        )


def response_spectra(record: AccelerationRecord, periods, checkpoints, damping=DEFAULT_DAMPING):
    """Running |x'' + ag| and |x| maxima over all substeps up to each checkpoint."""
    grid = SpectrumGrid(periods, checkpoints, record.dt, len(record), damping)
    sa, su = grid.spectra(record.samples)
    return (
        RunningSpectrum(grid.periods, grid.checkpoints, sa, "acceleration"),
        RunningSpectrum(grid.periods, grid.checkpoints, su, "displacement"),
    )


# -- CSV -------------------------------------------------------------------

def format_spectrum_csv(spec: RunningSpectrum) -> str:
    rows = ["\t".join(["period"] + [f"{t:.10g}" for t in spec.times])]
    for period, row in zip(spec.periods, spec.values):
        rows.append("\t".join([f"{period:.10g}"] + [f"{v:.10e}" for v in row]))
    return "\n".join(rows) + "\n"


def write_spectrum_csv(spec: RunningSpectrum, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(format_spectrum_csv(spec))
    return path


def read_spectrum_csv(path, kind="acceleration") -> RunningSpectrum:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh.read().replace("\r\n", "\n").split("\n") if ln.strip()]
    head = lines[0].split("\t")
    if head[0] != "period":
        raise ValueError("spectrum CSV must start with a 'period' header cell")
    times = [float(t) for t in head[1:]]
    body = np.array([[float(c) for c in ln.split("\t")] for ln in lines[1:]])
    return RunningSpectrum(body[:, 0], times, body[:, 1:], kind)
