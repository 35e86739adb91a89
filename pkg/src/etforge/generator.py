"""Endurance Time excitation synthesis by damped Gauss-Newton spectral matching.

The record's first sample is pinned at zero (ground at rest), so a record of
``n`` intervals carries ``n`` free samples; with dt = 0.02 s and 20.48 s that
is 1024 variables, a dyadic count the wavelet spaces use directly.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .sdof import DEFAULT_DAMPING, SpectrumGrid, response_spectra
from .signal import AccelerationRecord
from .target import (
    BaseTargetSpectrum,
    IntensifyingProfile,
    TargetModel,
    period_grid,
    profile_value,
    read_tabulated_csv,
    target_surface,
)
from .wavelet import WaveletDecomposition, band_slices, dwt_forward, dwt_inverse, synthesis_matrix

log = logging.getLogger(__name__)

DEFAULT_SEED = 20040101
SPACES = ("time", "wavelet", "wavelet-masked")
FLOOR_FRACTION = 1e-3


class GenerationError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizerSettings:
    max_iterations: int = 100
    step_tolerance: float = 1e-9
    objective_tolerance: float = 1e-7
    initial_damping: float = 1e-3
    max_trials: int = 12


@dataclass(frozen=True)
class GenerationProblem:
    target: TargetModel
    duration: float
    dt: float
    space: str = "time"
    wavelet_levels: int = 5
    wavelet_basis: str = "db2"
    wavelet_mask: tuple = (1,)
    alpha: float | None = None
    residual: str = "absolute"
    damping: float = DEFAULT_DAMPING
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    name: str = "ETA-custom"

    def __post_init__(self):
        if not (self.dt > 0 and self.duration > 0):
            raise ValueError("dt and duration must be positive")
        intervals = self.duration / self.dt
        if abs(intervals - round(intervals)) > 1e-6:
            raise ValueError(f"duration {self.duration} is not a whole number of dt={self.dt} steps")
        if self.space not in SPACES:
            raise ValueError(f"space must be one of {SPACES}")
        if self.residual not in ("absolute", "relative"):
            raise ValueError("residual must be 'absolute' or 'relative'")
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        n = self.n_variables
        if self.space != "time":
            if n & (n - 1) or n < 2 ** self.wavelet_levels:
                raise ValueError(
                    f"wavelet spaces need a dyadic variable count >= 2**levels; got {n}"
                )
            if any(not 1 <= lev <= self.wavelet_levels for lev in self.wavelet_mask):
                raise ValueError("wavelet_mask levels must lie in 1..levels")
        times = self.target.time_array
        if times[-1] > self.duration + 1e-9:
            raise ValueError("checkpoint times must lie in (0, duration]")

    @property
    def n_variables(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def n_samples(self) -> int:
        return self.n_variables + 1

    @property
    def profile(self) -> IntensifyingProfile:
        return self.target.profile


# -- quadrature ------------------------------------------------------------

def trapezoid_weights(grid) -> np.ndarray:
    x = np.asarray(grid, dtype=float)
    w = np.zeros_like(x)
    if x.size == 1:
        return w
    d = np.diff(x)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def time_weights(checkpoints, duration) -> np.ndarray:
    """Trapezoid weights on the checkpoints, end cells held constant out to 0 and duration."""
    t = np.asarray(checkpoints, dtype=float)
    w = trapezoid_weights(t)
    w[0] += t[0]
    w[-1] += duration - t[-1]
    return w


# -- variable spaces -------------------------------------------------------

class VariableSpace:
    """Maps optimization variables to the free record samples (all but the first)."""

    def __init__(self, problem: GenerationProblem):
        self.kind = problem.space
        self.n = problem.n_variables
        self.levels = problem.wavelet_levels
        self.basis = problem.wavelet_basis
        if self.kind == "time":
            self.free = np.arange(self.n)
            self._synth = None
            return
        slices = band_slices(self.n, self.levels)
        mask = np.ones(self.n, dtype=bool)
        if self.kind == "wavelet-masked":
            for lev in problem.wavelet_mask:
                mask[slices[lev]] = False
        self.free = np.flatnonzero(mask)
        self._synth = synthesis_matrix(self.n, self.levels, self.basis)[:, self.free]

    @property
    def size(self) -> int:
        return self.free.size

    def to_samples(self, z) -> np.ndarray:
        if self.kind == "time":
            body = np.asarray(z, dtype=float)
        else:
            coeffs = np.zeros(self.n)
            coeffs[self.free] = z
            body = dwt_inverse(WaveletDecomposition.from_flat(coeffs, self.levels, self.n, self.n, self.basis))
        return np.concatenate([[0.0], body])

    def from_samples(self, samples) -> np.ndarray:
        body = np.asarray(samples, dtype=float)[1:]
        if self.kind == "time":
            return body.copy()
        return dwt_forward(body, self.levels, self.basis).flat()[self.free]

    def chain(self, jac_samples: np.ndarray) -> np.ndarray:
        """Jacobian w.r.t. free samples -> Jacobian w.r.t. variables."""
        return jac_samples if self._synth is None else jac_samples @ self._synth


# -- residuals -------------------------------------------------------------

class Evaluator:
    """Spectra, residual matrices and Jacobians for one problem."""

    def __init__(self, problem: GenerationProblem, alpha: float | None = None):
        self.problem = problem
        tm = problem.target
        self.grid = SpectrumGrid(tm.period_array, tm.time_array, problem.dt, problem.n_samples, problem.damping)
        sa_t, su_t = target_surface(tm)
        self.sa_target = sa_t.values
        self.su_target = su_t.values
        self.weights = trapezoid_weights(tm.period_array)[:, None] * time_weights(tm.time_array, problem.duration)[None, :]
        self.alpha = problem.alpha if alpha is None else alpha
        if problem.residual == "relative":
            floor_a = FLOOR_FRACTION * tm.base.accel(tm.period_array).max()
            floor_u = FLOOR_FRACTION * tm.base.disp(tm.period_array).max()
            self.scale_a = np.maximum(self.sa_target, floor_a)
            self.scale_u = np.maximum(self.su_target, floor_u)
            n_floor = int(np.sum(self.sa_target < floor_a) + np.sum(self.su_target < floor_u))
            if n_floor:
                log.info("relative residuals: %d target cells below the guard floor", n_floor)
        else:
            self.scale_a = np.ones_like(self.sa_target)
            self.scale_u = np.ones_like(self.su_target)

    def _alpha(self) -> float:
        if self.alpha is None:
            raise GenerationError("alpha is unresolved; call resolve_alpha first")
        return self.alpha

    def check(self, samples):
        a = np.asarray(samples, dtype=float)
        if a.size != self.problem.n_samples:
            raise ValueError(
                f"record has {a.size} samples; problem expects {self.problem.n_samples}"
            )
        return a

    def matrices(self, samples):
        sa, su = self.grid.spectra(self.check(samples))
        return (sa - self.sa_target) / self.scale_a, (su - self.su_target) / self.scale_u

    def objective(self, samples) -> float:
        ra, ru = self.matrices(samples)
        return float(np.sum(self.weights * (ra ** 2 + self._alpha() * ru ** 2)))

    def residual_vector(self, samples) -> np.ndarray:
        ra, ru = self.matrices(samples)
        sw = np.sqrt(self.weights)
        return np.concatenate([(sw * ra).ravel(), (np.sqrt(self._alpha()) * sw * ru).ravel()])

    def jacobian(self, samples, step) -> np.ndarray:
        """d residual_vector / d samples[1:] by forward differences."""
        a = self.check(samples)
        cols = np.arange(1, a.size)
        dsa, dsu = self.grid.jacobian(a, cols, step)
        sw = np.sqrt(self.weights)
        ja = (sw / self.scale_a)[:, :, None] * dsa
        ju = (np.sqrt(self._alpha()) * sw / self.scale_u)[:, :, None] * dsu
        return np.concatenate([ja.reshape(-1, cols.size), ju.reshape(-1, cols.size)])


def _as_samples(record, problem):
    if abs(record.dt - problem.dt) > 1e-12:
        raise ValueError(f"record dt {record.dt} differs from problem dt {problem.dt}")
    return record.samples


def objective(record: AccelerationRecord, problem: GenerationProblem) -> float:
    problem = resolve_alpha(problem)
    return Evaluator(problem).objective(_as_samples(record, problem))


def residual_vector(record: AccelerationRecord, problem: GenerationProblem) -> np.ndarray:
    problem = resolve_alpha(problem)
    return Evaluator(problem).residual_vector(_as_samples(record, problem))


def residual_matrices(record: AccelerationRecord, problem: GenerationProblem):
    return Evaluator(problem).matrices(_as_samples(record, problem))


# -- seed and alpha --------------------------------------------------------

def seed_record(problem: GenerationProblem, seed: int = DEFAULT_SEED) -> AccelerationRecord:
    """Band-limited Gaussian noise, modulated by g(t), scaled to the target level."""
    tm = problem.target
    rng = np.random.default_rng(seed)
    n = problem.n_samples
    noise = rng.standard_normal(n)
    fs = 1.0 / problem.dt
    lo = 1.0 / tm.period_array[-1]
    hi = 1.0 / tm.period_array[0]
    if hi < 0.45 * fs:
        sos = sps.butter(4, [lo, hi], btype="bandpass", fs=fs, output="sos")
    else:
        sos = sps.butter(4, lo, btype="highpass", fs=fs, output="sos")
    band = sps.sosfiltfilt(sos, noise)
    t = problem.dt * np.arange(n)
    raw = band * np.asarray(profile_value(tm.profile, t))
    raw[0] = 0.0
    t_ref = min(tm.profile.t_target, problem.duration)
    grid = SpectrumGrid(tm.period_array, [t_ref], problem.dt, n, problem.damping)
    sa, _ = grid.spectra(raw)
    level = np.mean(tm.base.accel(tm.period_array) * profile_value(tm.profile, t_ref))
    samples = raw * (level / np.mean(sa[:, 0]))
    meta = {"seed": str(seed), "kind": "seed"}
    return AccelerationRecord(problem.dt, samples, f"{problem.name}-seed", meta)


def auto_alpha(problem: GenerationProblem, record: AccelerationRecord) -> float:
    """Weight making the displacement term equal the acceleration term at t_target."""
    tm = problem.target
    t_ref = min(tm.profile.t_target, problem.duration)
    sa, su = response_spectra(record, tm.period_array, [t_ref], problem.damping)
    g = profile_value(tm.profile, t_ref)
    ta = g * tm.base.accel(tm.period_array)
    tu = g * tm.base.disp(tm.period_array)
    if problem.residual == "relative":
        ta_s = np.maximum(ta, FLOOR_FRACTION * tm.base.accel(tm.period_array).max())
        tu_s = np.maximum(tu, FLOOR_FRACTION * tm.base.disp(tm.period_array).max())
    else:
        ta_s = tu_s = 1.0
    w = trapezoid_weights(tm.period_array)
    num = np.sum(w * ((sa.values[:, 0] - ta) / ta_s) ** 2)
    den = np.sum(w * ((su.values[:, 0] - tu) / tu_s) ** 2)
    if den <= 0 or num <= 0:
        num = np.sum(w * (ta / ta_s) ** 2)
        den = np.sum(w * (tu / tu_s) ** 2)
    return float(num / den)


def resolve_alpha(problem: GenerationProblem, seed: int = DEFAULT_SEED) -> GenerationProblem:
    if problem.alpha is not None:
        return problem
    return replace(problem, alpha=auto_alpha(problem, seed_record(problem, seed)))


# -- optimizer -------------------------------------------------------------

@dataclass
class GenerationReport:
    objective_history: list
    residual_accel: np.ndarray
    residual_disp: np.ndarray
    iteration_times: list
    termination: str
    alpha: float
    space: str
    n_variables: int

    @property
    def seed_objective(self) -> float:
        return self.objective_history[0]

    @property
    def final_objective(self) -> float:
        return self.objective_history[-1]

    @property
    def iterations(self) -> int:
        return len(self.objective_history) - 1

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "termination": self.termination,
            "space": self.space,
            "n_variables": self.n_variables,
            "alpha": self.alpha,
            "iterations": self.iterations,
            "seed_objective": self.seed_objective,
            "final_objective": self.final_objective,
            "objective_history": list(map(float, self.objective_history)),
        }
        if timings:
            out["iteration_times"] = list(map(float, self.iteration_times))
        return out


def fd_step(x) -> float:
    return max(1e-6, 1e-4 * float(np.max(np.abs(x)))) if np.size(x) else 1e-6


def _damped_step(J, r, mu):
    m, n = J.shape
    if n > m:
        return -J.T @ np.linalg.solve(J @ J.T + mu * np.eye(m), r)
    return -np.linalg.solve(J.T @ J + mu * np.eye(n), J.T @ r)


def generate(problem: GenerationProblem, seed: int = DEFAULT_SEED, start: AccelerationRecord | None = None,
             callback=None):
    """Minimize the spectral objective; returns (record, report).

    ``start`` overrides the noise seed as the initial guess. ``callback`` is
    called with (iteration, objective) after each accepted step.
    """
    seed_rec = seed_record(problem, seed)
    if problem.alpha is None:
        problem = replace(problem, alpha=auto_alpha(problem, seed_rec))
    init = seed_rec if start is None else start
    space = VariableSpace(problem)
    ev = Evaluator(problem)
    opts = problem.optimizer

    x = space.from_samples(_as_samples(init, problem))
    samples = space.to_samples(x)
    r = ev.residual_vector(samples)
    f = float(r @ r)
    history, times = [f], []
    mu = None
    reason = "max_iterations"
    for it in range(opts.max_iterations):
        if f <= 0.0:
            reason = "zero_objective"
            break
        t0 = time.perf_counter()
        J = space.chain(ev.jacobian(samples, fd_step(x)))
        bad = np.argwhere(~np.isfinite(J))
        if bad.size:
            raise GenerationError(f"non-finite Jacobian entry for variable {bad[0][1]}")
        if mu is None:
            mu = opts.initial_damping * max(float(np.max(np.sum(J * J, axis=0))), 1e-300)
        accepted = False
        for _ in range(opts.max_trials):
            dx = _damped_step(J, r, mu)
            x_new = x + dx
            s_new = space.to_samples(x_new)
            r_new = ev.residual_vector(s_new)
            f_new = float(r_new @ r_new)
            if f_new < f:
                accepted = True
                mu /= 3.0
                break
            mu *= 10.0
        if not accepted:
            reason = "stalled"
            break
        decrease = f - f_new
        x, samples, r, f = x_new, s_new, r_new, f_new
        history.append(f)
        times.append(time.perf_counter() - t0)
        if callback is not None:
            callback(it + 1, f)
        if decrease <= opts.objective_tolerance * history[-2]:
            reason = "objective_tolerance"
            break
        if np.linalg.norm(dx) <= opts.step_tolerance * (np.linalg.norm(x) + opts.step_tolerance):
            reason = "step_tolerance"
            break

    ra, ru = ev.matrices(samples)
    tm = problem.target
    meta = {
        "target": tm.base.name.replace(" ", "_"),
        "t_target": repr(tm.profile.t_target),
        "profile": tm.profile.kind,
        "space": problem.space,
        "generation": f"seed{seed}",
        "alpha": repr(problem.alpha),
        "t_max": repr(tm.profile.t_max),
    }
    if tm.profile.kind == "exponential":
        meta.update(gamma=repr(tm.profile.gamma), alpha_g=repr(tm.profile.alpha))
    record = AccelerationRecord(problem.dt, samples, problem.name, meta)
    report = GenerationReport(history, ra, ru, times, reason, problem.alpha, problem.space, space.size)
    return record, report


# -- verification ----------------------------------------------------------

@dataclass(frozen=True)
class VerifyTolerance:
    misfit: float = 0.15
    ratio_band: float = 0.2
    ratio_fraction: float = 0.8
    ratio_times: tuple | None = None


@dataclass
class VerificationReport:
    periods: np.ndarray
    times: np.ndarray
    t_target: float
    misfit: np.ndarray
    ratios: np.ndarray
    expected_ratios: np.ndarray
    ratio_fractions: dict
    misfit_at_target: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "t_target": self.t_target,
            "times": self.times.tolist(),
            "mean_abs_relative_misfit": self.misfit.tolist(),
            "misfit_at_target": self.misfit_at_target,
            "expected_ratio": self.expected_ratios.tolist(),
            "ratio_table": {
                "periods": self.periods.tolist(),
                "ratios": self.ratios.tolist(),
            },
            "ratio_fraction_within_band": {repr(k): v for k, v in self.ratio_fractions.items()},
            "passed": self.passed,
        }


def verify_etef(record: AccelerationRecord, target: TargetModel, tolerance: VerifyTolerance = VerifyTolerance(),
                damping: float = DEFAULT_DAMPING) -> VerificationReport:
    """Spectral misfit per checkpoint and profile-ratio checks against g(t)."""
    prof = target.profile
    t_tgt = prof.t_target
    ratio_times = tolerance.ratio_times
    if ratio_times is None:
        ratio_times = (2 * t_tgt,) if 2 * t_tgt <= record.duration + 1e-9 else ()
    times = sorted({round(t, 9) for t in (*target.checkpoints, t_tgt, *ratio_times) if 0 < t <= record.duration + 1e-9})
    times = np.array(times)
    T = target.period_array
    sa, _ = response_spectra(record, T, times, damping)
    g = np.asarray(profile_value(prof, times))
    goal = target.base.accel(T)[:, None] * g[None, :]
    misfit = np.mean(np.abs(sa.values - goal) / goal, axis=0)
    i_tgt = int(np.argmin(np.abs(times - t_tgt)))
    ref = sa.values[:, i_tgt]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = sa.values / ref[:, None]
    expected = g / g[i_tgt]
    fractions = {}
    for t in ratio_times:
        k = int(np.argmin(np.abs(times - t)))
        rel = ratios[:, k] / expected[k]
        fractions[float(t)] = float(np.mean(np.abs(rel - 1) <= tolerance.ratio_band + 1e-12))
    passed = misfit[i_tgt] <= tolerance.misfit and all(v >= tolerance.ratio_fraction for v in fractions.values())
    return VerificationReport(T, times, t_tgt, misfit, ratios, expected, fractions, float(misfit[i_tgt]), bool(passed))


# -- config ----------------------------------------------------------------

def _get(d, key, kind, path, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"missing field '{path}{key}'")
        return default
    value = d[key]
    try:
        if kind is float:
            return float(value)
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            return int(value)
        if kind is str and not isinstance(value, str):
            raise TypeError
        return value
    except (TypeError, ValueError):
        raise ConfigError(f"field '{path}{key}': expected {kind.__name__}, got {value!r}") from None


def base_from_dict(d: dict, root: Path | None = None, path="target.base.") -> BaseTargetSpectrum:
    kind = _get(d, "kind", str, path, "parametric")
    name = _get(d, "name", str, path, None)
    try:
        if kind == "parametric":
            return BaseTargetSpectrum(
                "parametric",
                plateau=_get(d, "plateau", float, path, 7.0),
                t_b=_get(d, "t_b", float, path, 0.15),
                t_c=_get(d, "t_c", float, path, 0.6),
                decay=_get(d, "decay", float, path, 1.0),
                name=name or "plateau",
            )
        if kind == "tabulated":
            if "path" in d:
                p = Path(d["path"])
                if root is not None and not p.is_absolute():
                    p = root / p
                if not p.exists():
                    raise ConfigError(f"field '{path}path': file not found: {p}")
                return read_tabulated_csv(p, name or p.stem)
            return BaseTargetSpectrum("tabulated", table=tuple(map(tuple, d["table"])), name=name or "tabulated")
    except (ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"field '{path}': {exc}") from None
    raise ConfigError(f"field '{path}kind': unknown spectrum kind {kind!r}")


def profile_from_dict(d: dict, t_max=None, path="target.profile.") -> IntensifyingProfile:
    try:
        return IntensifyingProfile(
            kind=_get(d, "kind", str, path, "linear"),
            t_target=_get(d, "t_target", float, path, 10.0),
            gamma=_get(d, "gamma", float, path, 1.0),
            alpha=_get(d, "alpha", float, path, 0.05),
            t_max=_get(d, "t_max", float, path, t_max),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"field '{path}': {exc}") from None


def target_from_dict(d: dict, duration: float, root=None) -> TargetModel:
    base = base_from_dict(d.get("base", {}), root)
    profile = profile_from_dict(d.get("profile", {}), t_max=duration)
    pg = d.get("periods", {})
    if isinstance(pg, list):
        periods = np.asarray(pg, dtype=float)
    else:
        try:
            periods = period_grid(
                _get(pg, "t_min", float, "target.periods.", 0.1),
                _get(pg, "t_max", float, "target.periods.", 4.0),
                _get(pg, "count", int, "target.periods.", 30),
                _get(pg, "spacing", str, "target.periods.", "log"),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"field 'target.periods': {exc}") from None
    ck = d.get("checkpoints", {"count": 8})
    if isinstance(ck, list):
        times = np.asarray(ck, dtype=float)
    else:
        count = _get(ck, "count", int, "target.checkpoints.", 8)
        times = duration * np.arange(1, count + 1) / count
    try:
        return TargetModel(base, profile, tuple(periods), tuple(times))
    except ValueError as exc:
        raise ConfigError(f"field 'target': {exc}") from None


def problem_from_dict(d: dict, root=None) -> GenerationProblem:
    if not isinstance(d, dict):
        raise ConfigError("problem config must be a JSON object")
    duration = _get(d, "duration", float, "", required=True)
    dt = _get(d, "dt", float, "", required=True)
    target = target_from_dict(d.get("target", {}), duration, root)
    wav = d.get("wavelet", {})
    opt = d.get("optimizer", {})
    known = {f for f in OptimizerSettings.__dataclass_fields__}
    unknown = set(opt) - known
    if unknown:
        raise ConfigError(f"field 'optimizer': unknown keys {sorted(unknown)}")
    alpha = d.get("alpha")
    try:
        return GenerationProblem(
            target=target,
            duration=duration,
            dt=dt,
            space=_get(d, "space", str, "", "time"),
            wavelet_levels=_get(wav, "levels", int, "wavelet.", 5),
            wavelet_basis=_get(wav, "basis", str, "wavelet.", "db2"),
            wavelet_mask=tuple(wav.get("mask", [1])),
            alpha=None if alpha is None else _get(d, "alpha", float, ""),
            residual=_get(d, "residual", str, "", "absolute"),
            damping=_get(d, "damping", float, "", DEFAULT_DAMPING),
            optimizer=OptimizerSettings(**opt),
            name=_get(d, "name", str, "", "ETA-custom"),
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def problem_to_dict(problem: GenerationProblem) -> dict:
    tm = problem.target
    base = tm.base
    if base.kind == "parametric":
        base_d = {"kind": "parametric", "plateau": base.plateau, "t_b": base.t_b, "t_c": base.t_c,
                  "decay": base.decay, "name": base.name}
    else:
        base_d = {"kind": "tabulated", "table": [list(r) for r in base.table], "name": base.name}
    prof = tm.profile
    prof_d = {"kind": prof.kind, "t_target": prof.t_target, "t_max": prof.t_max}
    if prof.kind == "exponential":
        prof_d.update(gamma=prof.gamma, alpha=prof.alpha)
    return {
        "name": problem.name,
        "duration": problem.duration,
        "dt": problem.dt,
        "target": {"base": base_d, "profile": prof_d, "periods": list(tm.periods),
                   "checkpoints": list(tm.checkpoints)},
        "space": problem.space,
        "wavelet": {"levels": problem.wavelet_levels, "basis": problem.wavelet_basis,
                    "mask": list(problem.wavelet_mask)},
        "alpha": problem.alpha,
        "residual": problem.residual,
        "damping": problem.damping,
        "optimizer": asdict(problem.optimizer),
    }


def desk_problem(space: str = "time", **overrides) -> GenerationProblem:
    """The 20.48 s / 1024-variable reference problem used by the acceptance suite."""
    base = BaseTargetSpectrum()
    profile = IntensifyingProfile("linear", 10.0, t_max=20.48)
    periods = period_grid(0.1, 4.0, 30, "log")
    checkpoints = tuple(2.5 * np.arange(1, 9))
    target = TargetModel(base, profile, tuple(periods), checkpoints)
    kw = dict(target=target, duration=20.48, dt=0.02, space=space, name=f"ETA20-desk-{space}")
    kw.update(overrides)
    return GenerationProblem(**kw)


def write_matrix_csv(matrix, periods, times, path) -> Path:
    path = Path(path)
    rows = ["\t".join(["period"] + [f"{t:.10g}" for t in times])]
    for p, row in zip(periods, matrix):
        rows.append("\t".join([f"{p:.10g}"] + [f"{v:.10e}" for v in row]))
    path.write_text("\n".join(rows) + "\n")
    return path
