"""Endurance Time response analysis and the incremental dynamic analysis oracle."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg
from scipy import signal as sps

from . import _kernels
from .sdof import DEFAULT_DAMPING, SDOFModel, SpectrumGrid, integrate_sdof, substeps
from .signal import AccelerationRecord
from .target import (
    BaseTargetSpectrum,
    IntensifyingProfile,
    intensity_to_time,
    period_grid,
    time_to_intensity,
)

EDPS = ("drift", "roof", "base_shear", "ductility")
DEFAULT_COLLAPSE_DRIFT = 0.10
DEFAULT_HEIGHT = 3.0
FRACTILES = (16, 50, 84)


@dataclass(frozen=True)
class ETCurve:
    times: np.ndarray
    values: np.ndarray
    edp: str = "drift"
    collapsed_at: float | None = None
    lambdas: np.ndarray | None = None

    def at(self, t: float) -> float:
        """Envelope at time t; +inf past a collapse truncation."""
        if t > self.times[-1] + 1e-9:
            return math.inf if self.collapsed_at is not None else float(self.values[-1])
        return float(np.interp(t, self.times, self.values))


def envelope(history, dt: float, edp: str = "response") -> ETCurve:
    f = np.asarray(history, dtype=float)
    if f.size == 0 or not np.all(np.isfinite(f)):
        raise ValueError("history must be nonempty and finite")
    return ETCurve(dt * np.arange(f.size), np.maximum.accumulate(np.abs(f)), edp)


# -- shear building --------------------------------------------------------

@dataclass(frozen=True)
class ShearBuildingModel:
    """Shear building, springs per story acting on inter-story drift.

    Masses default to 1 (mass-normalized units), so story stiffness reads in
    1/s^2. ``yield_drift`` (m) is required for non-linear stories.
    """

    stiffness: tuple
    mass: tuple | None = None
    hysteresis: tuple | str = "linear"
    yield_drift: tuple | float | None = None
    post_yield_ratio: tuple | float = 0.0
    story_height: tuple | float = DEFAULT_HEIGHT
    damping: float = DEFAULT_DAMPING

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.stiffness, dtype=float))
        n = k.size
        m = np.ones(n) if self.mass is None else np.atleast_1d(np.asarray(self.mass, dtype=float))

        def per_story(v, name):
            if isinstance(v, (str, int, float)):
                return (v,) * n
            v = tuple(v)
            if len(v) != n:
                raise ValueError(f"{name} needs one entry per story ({n})")
            return v

        hyst = per_story(self.hysteresis, "hysteresis")
        if m.size != n or np.any(m <= 0) or np.any(k <= 0):
            raise ValueError("masses and stiffnesses must be positive, one per story")
        for h in hyst:
            if h not in ("linear", "epp", "bilinear"):
                raise ValueError(f"unknown hysteresis {h!r}")
        dy = per_story(np.nan if self.yield_drift is None else self.yield_drift, "yield_drift")
        for h, d in zip(hyst, dy):
            if h != "linear" and not (d is not None and d > 0):
                raise ValueError("non-linear stories need a positive yield_drift")
        r = per_story(self.post_yield_ratio, "post_yield_ratio")
        r = tuple(0.0 if h == "epp" else float(v) for h, v in zip(hyst, r))
        if any(not 0 <= v < 1 for v in r):
            raise ValueError("post_yield_ratio must lie in [0, 1)")
        heights = per_story(self.story_height, "story_height")
        if any(not hh > 0 for hh in heights):
            raise ValueError("story heights must be positive")
        if not 0 <= self.damping < 1:
            raise ValueError("damping ratio must lie in [0, 1)")
        object.__setattr__(self, "stiffness", tuple(k.tolist()))
        object.__setattr__(self, "mass", tuple(m.tolist()))
        object.__setattr__(self, "hysteresis", hyst)
        object.__setattr__(self, "yield_drift", tuple(float(d) for d in dy))
        object.__setattr__(self, "post_yield_ratio", r)
        object.__setattr__(self, "story_height", tuple(float(hh) for hh in heights))

    @classmethod
    def uniform(cls, stories: int, period: float, **kw) -> "ShearBuildingModel":
        """Equal masses and stiffnesses tuned to a fundamental period."""
        unit = cls(stiffness=(1.0,) * stories, mass=kw.get("mass"))
        k = (unit.periods[0] / period) ** 2
        return cls(stiffness=(k,) * stories, **kw)

    @property
    def n(self) -> int:
        return len(self.stiffness)

    def stiffness_matrix(self) -> np.ndarray:
        k = np.asarray(self.stiffness)
        K = np.diag(k.copy())
        K[:-1, :-1] += np.diag(k[1:])
        for i in range(1, self.n):
            K[i - 1, i] = K[i, i - 1] = -k[i]
        return K

    @property
    def periods(self) -> np.ndarray:
        w2 = linalg.eigh(self.stiffness_matrix(), np.diag(self.mass), eigvals_only=True)
        return 2 * np.pi / np.sqrt(np.sort(w2))

    def damping_matrix(self) -> np.ndarray:
        """Rayleigh damping anchored at T1 and T1/3."""
        w1 = 2 * np.pi / self.periods[0]
        w2 = 3 * w1
        a0 = 2 * self.damping * w1 * w2 / (w1 + w2)
        a1 = 2 * self.damping / (w1 + w2)
        return a0 * np.diag(self.mass) + a1 * self.stiffness_matrix()


@dataclass
class BuildingResponse:
    dt: float
    displacement: np.ndarray
    story_force: np.ndarray
    energy: np.ndarray
    collapsed_at: float | None


def integrate_building(model: ShearBuildingModel, record: AccelerationRecord,
                       collapse_drift: float = DEFAULT_COLLAPSE_DRIFT) -> BuildingResponse:
    m = substeps(float(model.periods[-1]), record.dt)
    k0 = np.asarray(model.stiffness, dtype=float)
    r = np.asarray(model.post_yield_ratio)
    kinds = np.array([_kernels.LINEAR if h == "linear" else _kernels.BILINEAR for h in model.hysteresis], dtype=np.int64)
    dy = np.nan_to_num(np.asarray(model.yield_drift), nan=0.0)
    eta = k0 * dy
    hard = r * k0 / (1 - r)
    us, fs, es, n = _kernels.mdof_history(
        np.ascontiguousarray(record.samples, dtype=float), record.dt, m,
        np.asarray(model.mass), k0, hard, eta, kinds,
        np.ascontiguousarray(model.damping_matrix()), np.asarray(model.story_height), float(collapse_drift),
    )
    collapsed = None
    if n < len(record):
        collapsed = (n - 1) * record.dt
    elif n > 1:
        drifts = np.diff(np.concatenate([[0.0], us[-1]]))
        if np.any(np.abs(drifts) / np.asarray(model.story_height) > collapse_drift):
            collapsed = (n - 1) * record.dt
    return BuildingResponse(record.dt, us[:n], fs[:n], es[:n], collapsed)


# -- EDP extraction --------------------------------------------------------

def edp_history(model, record: AccelerationRecord, edp: str = "drift",
                collapse_drift: float = DEFAULT_COLLAPSE_DRIFT, height: float = DEFAULT_HEIGHT):
    """EDP time history at record samples and the collapse time (or None)."""
    if edp not in EDPS:
        raise ValueError(f"edp must be one of {EDPS}")
    if isinstance(model, SDOFModel):
        if edp == "ductility" and model.yield_disp is None:
            raise ValueError("ductility needs a non-linear model")
        resp = integrate_sdof(model, record, x_cap=collapse_drift * height)
        x = resp.displacement
        hist = {
            "drift": lambda: np.abs(x) / height,
            "roof": lambda: np.abs(x),
            "base_shear": lambda: np.abs(resp.restoring),
            "ductility": lambda: np.abs(x) / model.yield_disp,
        }[edp]()
        return hist, resp.collapsed_at
    if isinstance(model, ShearBuildingModel):
        if edp == "ductility" and any(h == "linear" for h in model.hysteresis):
            raise ValueError("ductility needs yield drifts on every story")
        resp = integrate_building(model, record, collapse_drift)
        u = resp.displacement
        drift = np.diff(np.hstack([np.zeros((u.shape[0], 1)), u]), axis=1)
        if edp == "drift":
            hist = np.max(np.abs(drift) / np.asarray(model.story_height), axis=1)
        elif edp == "roof":
            hist = np.abs(u[:, -1])
        elif edp == "base_shear":
            hist = np.abs(resp.story_force[:, 0]) / np.sum(model.mass)
        else:
            hist = np.max(np.abs(drift) / np.asarray(model.yield_drift), axis=1)
        return hist, resp.collapsed_at
    raise TypeError(f"unsupported model type {type(model).__name__}")


def run_et_analysis(model, etef: AccelerationRecord, edp: str = "drift", profile: IntensifyingProfile | None = None,
                    collapse_drift: float = DEFAULT_COLLAPSE_DRIFT, height: float = DEFAULT_HEIGHT) -> ETCurve:
    hist, collapsed = edp_history(model, etef, edp, collapse_drift, height)
    curve = envelope(hist, etef.dt, edp)
    lambdas = None
    if profile is not None:
        lambdas = np.asarray(profile(np.minimum(curve.times, profile.t_max)))
    return ETCurve(curve.times, curve.values, edp, collapsed, lambdas)


def profile_from_meta(meta: dict) -> IntensifyingProfile | None:
    if "profile" not in meta or "t_target" not in meta:
        return None
    kw = {"kind": meta["profile"], "t_target": float(meta["t_target"])}
    for key in ("gamma", "alpha_g", "t_max"):
        if key in meta:
            kw["alpha" if key == "alpha_g" else key] = float(meta[key])
    return IntensifyingProfile(**kw)


# -- IDA -------------------------------------------------------------------

@dataclass
class IDACurve:
    lambdas: np.ndarray
    record_ids: list
    edp: np.ndarray
    collapsed: np.ndarray
    edp_name: str = "drift"

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        self.edp = np.asarray(self.edp, dtype=float)
        self.collapsed = np.asarray(self.collapsed, dtype=bool)

    def fractiles(self) -> dict:
        """16/50/84% fractiles across records; collapsed cells count as +inf."""
        vals = np.where(self.collapsed, np.inf, self.edp)
        out = {}
        for q in FRACTILES:
            with np.errstate(invalid="ignore"):
                f = np.percentile(vals, q, axis=0)
            out[q] = np.where(np.isnan(f), np.inf, f)
        return out

    @property
    def median(self) -> np.ndarray:
        return self.fractiles()[50]


def run_ida(model, records, lambdas, edp: str = "drift", collapse_drift: float = DEFAULT_COLLAPSE_DRIFT,
            height: float = DEFAULT_HEIGHT, workers: int = 1) -> IDACurve:
    records = list(records)
    if not records:
        raise ValueError("no records")
    lam = np.asarray(lambdas, dtype=float)
    if lam.size == 0 or np.any(np.diff(lam) <= 0) or np.any(lam < 0):
        raise ValueError("lambda grid must be non-negative and strictly increasing")
    cells = [(i, j) for i in range(len(records)) for j in range(lam.size)]

    def run(cell):
        i, j = cell
        hist, collapsed = edp_history(model, records[i].scaled(lam[j]), edp, collapse_drift, height)
        return float(np.max(hist)), collapsed is not None

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]
    peak = np.zeros((len(records), lam.size))
    col = np.zeros_like(peak, dtype=bool)
    for (i, j), (v, c) in zip(cells, results):
        peak[i, j] = v
        col[i, j] = c
    return IDACurve(lam, [r.name for r in records], peak, col, edp)


def synthetic_records(base: BaseTargetSpectrum, count: int = 5, duration: float = 20.0, dt: float = 0.02,
                      seed: int = 0, periods=None, damping: float = DEFAULT_DAMPING,
                      iterations: int = 8) -> list:
    """Windowed band-limited noise records spectrally matched toward ``base``.

    Each record is shaped by a rise / strong-motion / exponential-decay window
    and iteratively corrected in the frequency domain by the ratio of target to
    achieved spectral acceleration.
    """
    periods = period_grid(0.05, 5.0, 40) if periods is None else np.asarray(periods, float)
    n = int(round(duration / dt)) + 1
    t = dt * np.arange(n)
    window = np.where(t < 1.5, (t / 1.5) ** 2, np.where(t < 0.6 * duration, 1.0,
                      np.exp(-3.0 * (t - 0.6 * duration) / (0.4 * duration))))
    grid = SpectrumGrid(periods, [t[-1]], dt, n, damping)
    target = base.accel(periods)
    freqs = np.fft.rfftfreq(n, dt)
    f_grid = 1.0 / periods[::-1]
    rng = np.random.default_rng(seed)
    out = []
    sos = sps.butter(4, [0.1, min(20.0, 0.45 / dt)], btype="bandpass", fs=1 / dt, output="sos")
    for idx in range(count):
        acc = sps.sosfiltfilt(sos, rng.standard_normal(n)) * window
        for _ in range(iterations):
            sa, _ = grid.spectra(acc)
            ratio = target / sa[:, 0]
            corr = np.interp(freqs, f_grid, ratio[::-1])
            acc = np.fft.irfft(np.fft.rfft(acc) * corr, n) * window
        sa, _ = grid.spectra(acc)
        acc = acc * np.mean(target) / np.mean(sa[:, 0])
        acc[0] = 0.0
        out.append(AccelerationRecord(dt, acc, f"synthetic-{seed}-{idx:02d}", {"kind": "synthetic"}))
    return out


# -- comparison and performance -------------------------------------------

def _pearson(a, b) -> float:
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.std() == 0 or b.std() == 0:
        return 1.0 if np.allclose(a, b) else 0.0
    return float(np.corrcoef(a, b)[0, 1])


def compare_et_vs_ida(et: ETCurve, profile: IntensifyingProfile, ida: IDACurve) -> dict:
    """Resample the ET curve onto the IDA intensity grid via g(t) and score it."""
    top = float(profile(profile.t_max))
    fr = ida.fractiles()
    keep, et_vals = [], []
    for j, lam in enumerate(ida.lambdas):
        if lam <= 0 or lam > top * (1 + 1e-12):
            continue
        t = intensity_to_time(profile, lam)
        if t > et.times[-1] + 1e-9:
            continue
        if not np.isfinite(fr[50][j]):
            continue
        keep.append(j)
        et_vals.append(et.at(t))
    if len(keep) == 0:
        raise ValueError("ET curve and IDA intensity ranges do not overlap")
    keep = np.asarray(keep)
    et_vals = np.asarray(et_vals)
    med = fr[50][keep]
    rel = np.abs(et_vals - med) / np.where(med > 0, med, np.nan)
    deviations = {}
    for q in FRACTILES:
        ref = fr[q][keep]
        ok = np.isfinite(ref) & (ref > 0)
        deviations[str(q)] = float(np.mean((et_vals[ok] - ref[ok]) / ref[ok])) if ok.any() else None
    return {
        "lambdas": ida.lambdas[keep].tolist(),
        "et": et_vals.tolist(),
        "ida_median": med.tolist(),
        "ida_16": fr[16][keep].tolist(),
        "ida_84": fr[84][keep].tolist(),
        "correlation": _pearson(et_vals, med) if keep.size > 1 else 1.0,
        "mean_relative_error": float(np.nanmean(rel)) if np.any(np.isfinite(rel)) else 0.0,
        "fractile_deviation": deviations,
    }


@dataclass(frozen=True)
class Limit:
    intensity: float
    cap: float
    label: str = ""


def check_performance(et: ETCurve, profile: IntensifyingProfile, limits) -> list:
    """Demand at each hazard level's equivalent time against its EDP cap."""
    out = []
    for lim in limits:
        if not isinstance(lim, Limit):
            lim = Limit(**lim)
        t = intensity_to_time(profile, lim.intensity)
        demand = et.at(t)
        out.append({
            "label": lim.label,
            "intensity": lim.intensity,
            "time": t,
            "demand": demand,
            "cap": lim.cap,
            "passed": bool(demand <= lim.cap),
        })
    return out


# -- CSV -------------------------------------------------------------------

def write_et_csv(curve: ETCurve, path, profile: IntensifyingProfile | None = None) -> Path:
    lam = curve.lambdas
    if lam is None and profile is not None:
        lam = np.asarray(profile(np.minimum(curve.times, profile.t_max)))
    with open(path, "w", newline="") as fh:
        if curve.collapsed_at is not None:
            fh.write(f"# collapsed_at={curve.collapsed_at!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "lambda", "edp"])
        for i, (t, v) in enumerate(zip(curve.times, curve.values)):
            w.writerow([repr(float(t)), "" if lam is None else repr(float(lam[i])), repr(float(v))])
    return Path(path)


def read_et_csv(path, edp: str = "drift") -> ETCurve:
    collapsed = None
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    while lines and lines[0].startswith("#"):
        key, _, value = lines.pop(0)[1:].strip().partition("=")
        if key == "collapsed_at":
            collapsed = float(value)
    rows = list(csv.DictReader(lines))
    if not rows:
        raise ValueError(f"{path}: empty ET curve")
    t = np.array([float(r["t"]) for r in rows])
    v = np.array([float(r["edp"]) for r in rows])
    lam = None if rows[0]["lambda"] == "" else np.array([float(r["lambda"]) for r in rows])
    return ETCurve(t, v, edp, collapsed, lam)


def write_ida_csv(ida: IDACurve, path) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "record_id", "edp", "collapsed"])
        for j, lam in enumerate(ida.lambdas):
            for i, rid in enumerate(ida.record_ids):
                w.writerow([repr(float(lam)), rid, repr(float(ida.edp[i, j])), int(ida.collapsed[i, j])])
    return Path(path)


def read_ida_csv(path, edp: str = "drift") -> IDACurve:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError("no records")
    lambdas = sorted({float(r["lambda"]) for r in rows})
    ids = list(dict.fromkeys(r["record_id"] for r in rows))
    li = {v: j for j, v in enumerate(lambdas)}
    ri = {v: i for i, v in enumerate(ids)}
    peak = np.full((len(ids), len(lambdas)), np.nan)
    col = np.zeros_like(peak, dtype=bool)
    for r in rows:
        i, j = ri[r["record_id"]], li[float(r["lambda"])]
        peak[i, j] = float(r["edp"])
        col[i, j] = bool(int(r["collapsed"]))
    return IDACurve(np.array(lambdas), ids, peak, col, edp)


__all__ = [
    "ETCurve", "ShearBuildingModel", "IDACurve", "Limit", "envelope", "run_et_analysis", "run_ida",
    "compare_et_vs_ida", "check_performance", "synthetic_records", "time_to_intensity",
    "intensity_to_time", "integrate_building", "edp_history",
]
