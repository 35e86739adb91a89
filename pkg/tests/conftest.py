import json
import time

import numpy as np
import pytest

from etforge.generator import (
    GenerationProblem,
    OptimizerSettings,
    desk_problem,
    problem_to_dict,
)
from etforge.signal import read_record_csv
from etforge.target import BaseTargetSpectrum, IntensifyingProfile, TargetModel, period_grid


def make_small_problem(space="time", **kw):
    """256 variables, 6 periods, 4 checkpoints: quick enough for unit tests."""
    target = TargetModel(
        kw.pop("base", BaseTargetSpectrum()),
        IntensifyingProfile("linear", 1.28, t_max=2.56),
        tuple(period_grid(0.1, 1.0, 6)),
        kw.pop("checkpoints", (0.64, 1.28, 1.92, 2.56)),
    )
    kw.setdefault("optimizer", OptimizerSettings(max_iterations=8))
    return GenerationProblem(target, 2.56, 0.01, space=space, wavelet_levels=3, **kw)


@pytest.fixture
def small_problem():
    return make_small_problem()


@pytest.fixture(scope="session")
def desk_run(tmp_path_factory):
    """Desk-scale generation through the command line, run once per session."""
    from etforge.cli import main

    root = tmp_path_factory.mktemp("desk")
    config = root / "desk.json"
    config.write_text(json.dumps(problem_to_dict(desk_problem()), indent=2))
    out = root / "run1"
    t0 = time.perf_counter()
    code = main(["generate", "--config", str(config), "--out", str(out), "--quiet"])
    elapsed = time.perf_counter() - t0
    record = read_record_csv(out / "ETA20-desk-time.csv")
    return {
        "code": code,
        "elapsed": elapsed,
        "config": config,
        "out": out,
        "record": record,
        "report": json.loads((out / "report.json").read_text()),
        "verification": json.loads((out / "verification.json").read_text()),
    }


@pytest.fixture(scope="session")
def desk_etef(desk_run):
    return desk_run["record"]


def random_record_samples(n, seed, scale=3.0):
    s = scale * np.random.default_rng(seed).standard_normal(n)
    s[0] = 0.0
    return s


# -- acceptance summary ----------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split("-")[1])):
        terminalreporter.write_line(ACCEPTANCE[key])
