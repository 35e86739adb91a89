"""Uniform acceleration records, CSV I/O and scalar ground-motion metrics."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class RecordError(ValueError):
    pass


@dataclass(frozen=True)
class AccelerationRecord:
    """Uniformly sampled ground acceleration in m/s^2.

    ``meta`` holds free-form string annotations (target id, t_target,
    profile kind, ...). Values must not contain whitespace so the CSV header
    stays a flat ``key=value`` list.
    """

    dt: float
    samples: np.ndarray
    name: str = "record"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise RecordError(f"dt must be positive, got {self.dt}")
        if samples.ndim != 1 or samples.size < 2:
            raise RecordError("a record needs at least 2 samples")
        bad = np.flatnonzero(~np.isfinite(samples))
        if bad.size:
            raise RecordError(f"non-finite sample at index {bad[0]}")
        for key, value in self.meta.items():
            if re.search(r"\s", str(key)) or re.search(r"\s", str(value)):
                raise RecordError(f"meta entry {key!r} contains whitespace")
        samples.setflags(write=False)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "meta", {str(k): str(v) for k, v in self.meta.items()})

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.dt * (self.samples.size - 1)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.samples.size)

    def scaled(self, factor: float) -> "AccelerationRecord":
        return AccelerationRecord(self.dt, factor * self.samples, self.name, dict(self.meta))

    def with_samples(self, samples, **meta) -> "AccelerationRecord":
        return AccelerationRecord(self.dt, samples, self.name, {**self.meta, **meta})


def compute_cav(record: AccelerationRecord) -> np.ndarray:
    """Running cumulative absolute velocity (m/s), trapezoidal on |a|."""
    a = np.abs(record.samples)
    cav = np.zeros_like(a)
    cav[1:] = np.cumsum(0.5 * (a[1:] + a[:-1]) * record.dt)
    return cav


def integrate_trapezoid(values: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros_like(values, dtype=float)
    out[1:] = np.cumsum(0.5 * (values[1:] + values[:-1]) * dt)
    return out


def peak_metrics(record: AccelerationRecord) -> dict:
    vel = integrate_trapezoid(record.samples, record.dt)
    disp = integrate_trapezoid(vel, record.dt)
    return {
        "pga": float(np.max(np.abs(record.samples))),
        "pgv": float(np.max(np.abs(vel))),
        "pgd": float(np.max(np.abs(disp))),
    }


# -- CSV -------------------------------------------------------------------

def _format_header(record: AccelerationRecord) -> str:
    if re.search(r"\s", record.name):
        raise RecordError("record name must not contain whitespace")
    tokens = [f"name={record.name}", f"dt={record.dt!r}", "units=m/s2"]
    tokens += [f"{k}={v}" for k, v in sorted(record.meta.items())]
    return "# " + " ".join(tokens)


def format_record_csv(record: AccelerationRecord) -> str:
    lines = [_format_header(record)]
    lines += [repr(float(v)) for v in record.samples]
    return "\n".join(lines) + "\n"


def write_record_csv(record: AccelerationRecord, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(format_record_csv(record))
    return path


def parse_record_csv(text: str) -> AccelerationRecord:
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    if not lines or not lines[0].startswith("#"):
        raise RecordError("record CSV must start with a '# name=... dt=...' header")
    header = {}
    for token in lines[0][1:].split():
        if "=" not in token:
            raise RecordError(f"malformed header token {token!r}")
        key, value = token.split("=", 1)
        header[key] = value
    if "dt" not in header:
        raise RecordError("record header lacks dt")
    units = header.pop("units", "m/s2")
    if units != "m/s2":
        raise RecordError(f"unsupported units {units!r}")
    name = header.pop("name", "record")
    dt = float(header.pop("dt"))
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise RecordError(f"line {lineno}: not a number: {line!r}") from None
    return AccelerationRecord(dt, np.array(values), name, header)


def read_record_csv(path) -> AccelerationRecord:
    with open(path, newline="") as fh:
        return parse_record_csv(fh.read())
