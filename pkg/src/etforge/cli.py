"""etforge command line: generate, spectra, analyze, ida, compare, verify.

Exit codes: 0 ok, 1 input error, 2 generation stalled (artifacts still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis as an
from .generator import (
    DEFAULT_SEED,
    ConfigError,
    VerifyTolerance,
    base_from_dict,
    generate,
    problem_from_dict,
    problem_to_dict,
    profile_from_dict,
    target_from_dict,
    verify_etef,
    write_matrix_csv,
)
from .sdof import SDOFModel, response_spectra, write_spectrum_csv
from .signal import RecordError, read_record_csv, write_record_csv
from .target import period_grid

log = logging.getLogger("etforge")

EXIT_OK, EXIT_INPUT, EXIT_STALLED = 0, 1, 2


class InputError(Exception):
    pass


def load_config(path) -> tuple[dict, Path]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {p}")
    try:
        return json.loads(p.read_text()), p.parent
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def dump_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _finite(x):
    """JSON has no infinity; emit null instead."""
    if isinstance(x, float) and not np.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def _path(root: Path, value) -> Path:
    p = Path(value)
    return p if p.is_absolute() else root / p


def _record(cfg, key, root):
    if key not in cfg:
        raise ConfigError(f"missing field '{key}'")
    p = _path(root, cfg[key])
    if not p.is_file():
        raise InputError(f"record file not found: {p}")
    return read_record_csv(p)


def model_from_dict(d: dict):
    if not isinstance(d, dict):
        raise ConfigError("field 'model' must be an object")
    kind = d.get("kind", "sdof")
    try:
        if kind == "sdof":
            return SDOFModel(
                period=float(d["period"]),
                damping=float(d.get("damping", 0.05)),
                hysteresis=d.get("hysteresis", "linear"),
                yield_accel=None if d.get("yield_accel") is None else float(d["yield_accel"]),
                post_yield_ratio=float(d.get("post_yield_ratio", 0.0)),
            )
        if kind == "shear_building":
            kw = {k: d[k] for k in ("mass", "hysteresis", "yield_drift", "post_yield_ratio", "story_height", "damping")
                  if k in d}
            if "stiffness" in d:
                return an.ShearBuildingModel(stiffness=tuple(d["stiffness"]), **kw)
            return an.ShearBuildingModel.uniform(int(d["stories"]), float(d["period"]), **kw)
    except KeyError as exc:
        raise ConfigError(f"field 'model.{exc.args[0]}' is required") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'model': {exc}") from None
    raise ConfigError(f"field 'model.kind': unknown model kind {kind!r}")


def _records(cfg, root):
    if "records" in cfg:
        paths = cfg["records"]
        if not paths:
            raise InputError("no records")
        out = []
        for p in paths:
            q = _path(root, p)
            if not q.is_file():
                raise InputError(f"record file not found: {q}")
            out.append(read_record_csv(q))
        return out
    if "synthetic" in cfg:
        s = cfg["synthetic"]
        if int(s.get("count", 5)) < 1:
            raise InputError("no records")
        return an.synthetic_records(
            base_from_dict(s.get("base", {}), root, "synthetic.base."),
            count=int(s.get("count", 5)),
            duration=float(s.get("duration", 20.0)),
            dt=float(s.get("dt", 0.02)),
            seed=int(s.get("seed", 0)),
        )
    raise InputError("no records")


def _tolerance(d) -> VerifyTolerance:
    if "ratio_times" in d:
        d = {**d, "ratio_times": tuple(d["ratio_times"])}
    try:
        return VerifyTolerance(**d)
    except TypeError as exc:
        raise ConfigError(f"field 'verify': {exc}") from None


# -- subcommands -----------------------------------------------------------

def cmd_generate(cfg, root, out: Path, seed: int, workers: int) -> int:
    problem = problem_from_dict(cfg, root)
    tol = _tolerance(cfg.get("verify", {}))

    def progress(it, f):
        log.info("iteration %d objective %.6g", it, f)

    record, report = generate(problem, seed, callback=progress)
    write_record_csv(record, out / f"{problem.name}.csv")
    dump_json({**report.to_dict(timings=False), "problem": problem_to_dict(problem), "seed": seed},
              out / "report.json")
    dump_json({"iteration_times": report.iteration_times}, out / "timings.json")
    tm = problem.target
    write_matrix_csv(report.residual_accel, tm.periods, tm.checkpoints, out / "residual_accel.csv")
    write_matrix_csv(report.residual_disp, tm.periods, tm.checkpoints, out / "residual_disp.csv")
    ver = verify_etef(record, tm, tol, problem.damping)
    dump_json(ver.to_dict(), out / "verification.json")
    log.info("termination: %s, objective %.6g -> %.6g", report.termination,
             report.seed_objective, report.final_objective)
    return EXIT_STALLED if report.termination == "stalled" else EXIT_OK


def cmd_spectra(cfg, root, out, seed, workers) -> int:
    record = _record(cfg, "record", root)
    pg = cfg.get("periods", {})
    periods = pg if isinstance(pg, list) else period_grid(
        float(pg.get("t_min", 0.1)), float(pg.get("t_max", 4.0)), int(pg.get("count", 30)), pg.get("spacing", "log"))
    ck = cfg.get("checkpoints", {"count": 8})
    times = ck if isinstance(ck, list) else record.duration * np.arange(1, int(ck["count"]) + 1) / int(ck["count"])
    sa, su = response_spectra(record, periods, times, float(cfg.get("damping", 0.05)))
    write_spectrum_csv(sa, out / "spectrum_accel.csv")
    write_spectrum_csv(su, out / "spectrum_disp.csv")
    return EXIT_OK


def _profile(cfg, record=None):
    if "profile" in cfg:
        t_max = record.duration if record is not None else None
        return profile_from_dict(cfg["profile"], t_max=t_max, path="profile.")
    if record is not None:
        prof = an.profile_from_meta(record.meta)
        if prof is not None:
            return prof
    raise ConfigError("missing field 'profile' (and the record carries no profile metadata)")


def cmd_analyze(cfg, root, out, seed, workers) -> int:
    record = _record(cfg, "record", root)
    model = model_from_dict(cfg.get("model"))
    profile = _profile(cfg, record)
    curve = an.run_et_analysis(model, record, cfg.get("edp", "drift"), profile,
                               float(cfg.get("collapse_drift", an.DEFAULT_COLLAPSE_DRIFT)),
                               float(cfg.get("height", an.DEFAULT_HEIGHT)))
    an.write_et_csv(curve, out / "et_curve.csv", profile)
    summary = {"edp": curve.edp, "collapsed_at": curve.collapsed_at, "peak": float(curve.values[-1])}
    if "limits" in cfg:
        summary["performance"] = an.check_performance(curve, profile, cfg["limits"])
    dump_json(_finite(summary), out / "analysis.json")
    return EXIT_OK


def _ida(cfg, root, workers):
    model = model_from_dict(cfg.get("model"))
    records = _records(cfg, root)
    lambdas = cfg.get("lambdas", (0.25 * np.arange(1, 9)).tolist())
    return an.run_ida(model, records, lambdas, cfg.get("edp", "drift"),
                      float(cfg.get("collapse_drift", an.DEFAULT_COLLAPSE_DRIFT)),
                      float(cfg.get("height", an.DEFAULT_HEIGHT)), workers)


def cmd_ida(cfg, root, out, seed, workers) -> int:
    ida = _ida(cfg, root, workers)
    an.write_ida_csv(ida, out / "ida.csv")
    fr = ida.fractiles()
    dump_json(_finite({"lambdas": ida.lambdas.tolist(), "fractiles": {str(k): v.tolist() for k, v in fr.items()}}),
              out / "ida.json")
    return EXIT_OK


def cmd_compare(cfg, root, out, seed, workers) -> int:
    edp = cfg.get("edp", "drift")
    record = None
    if "et_curve" in cfg:
        p = _path(root, cfg["et_curve"])
        if not p.is_file():
            raise InputError(f"ET curve file not found: {p}")
        curve = an.read_et_csv(p, edp)
    else:
        record = _record(cfg, "etef", root)
        curve = None
    profile = _profile(cfg, record)
    if curve is None:
        curve = an.run_et_analysis(model_from_dict(cfg.get("model")), record, edp, profile,
                                   float(cfg.get("collapse_drift", an.DEFAULT_COLLAPSE_DRIFT)),
                                   float(cfg.get("height", an.DEFAULT_HEIGHT)))
    if "ida" in cfg:
        p = _path(root, cfg["ida"])
        if not p.is_file():
            raise InputError(f"IDA file not found: {p}")
        ida = an.read_ida_csv(p, edp)
    else:
        ida = _ida(cfg, root, workers)
    report = an.compare_et_vs_ida(curve, profile, ida)
    an.write_et_csv(curve, out / "et_curve.csv", profile)
    an.write_ida_csv(ida, out / "ida.csv")
    dump_json(_finite(report), out / "comparison.json")
    log.info("correlation %.4f, mean relative error %.4f", report["correlation"], report["mean_relative_error"])
    return EXIT_OK


def cmd_verify(cfg, root, out, seed, workers) -> int:
    record = _record(cfg, "record", root)
    target = target_from_dict(cfg.get("target", {}), record.duration, root)
    ver = verify_etef(record, target, _tolerance(cfg.get("verify", {})), float(cfg.get("damping", 0.05)))
    dump_json(ver.to_dict(), out / "verification.json")
    log.info("verification %s (misfit at target %.4f)", "passed" if ver.passed else "failed", ver.misfit_at_target)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "spectra": cmd_spectra,
    "analyze": cmd_analyze,
    "ida": cmd_ida,
    "compare": cmd_compare,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="etforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--workers", type=int, default=None, help="defaults to $ETFORGE_WORKERS or 1")
        p.add_argument("--quiet", action="store_true")
    return parser


def _workers(arg) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("ETFORGE_WORKERS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise InputError(f"ETFORGE_WORKERS must be an integer, got {env!r}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INPUT
    try:
        workers = _workers(args.workers)
        import numba

        numba.set_num_threads(min(workers, numba.config.NUMBA_NUM_THREADS))
        cfg, root = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, root, out, args.seed, workers)
    except (InputError, ConfigError, RecordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
