"""Periodized orthogonal discrete wavelet transform (Haar and 4-tap Daubechies).

Periodization keeps the transform an orthogonal change of basis, so the
coefficient count equals the (dyadic) signal length and Parseval holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_S3 = np.sqrt(3.0)
LOWPASS = {
    "haar": np.array([1.0, 1.0]) / np.sqrt(2.0),
    "db2": np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * np.sqrt(2.0)),
}


def filters(basis: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        h = LOWPASS[basis]
    except KeyError:
        raise ValueError(f"unsupported wavelet basis {basis!r}; use one of {sorted(LOWPASS)}") from None
    g = h[::-1] * (-1.0) ** np.arange(h.size)
    return h, g


@dataclass(frozen=True)
class WaveletDecomposition:
    """Bands ordered ``[approx_L, detail_L, ..., detail_1]``; level 1 is finest."""

    levels: int
    bands: tuple
    original_length: int
    padded_length: int
    basis: str = "db2"

    def __post_init__(self):
        if len(self.bands) != self.levels + 1:
            raise ValueError(f"expected {self.levels + 1} bands, got {len(self.bands)}")
        expected = [self.padded_length >> self.levels] + [
            self.padded_length >> lev for lev in range(self.levels, 0, -1)
        ]
        got = [len(b) for b in self.bands]
        if got != expected:
            raise ValueError(f"inconsistent band lengths {got}, expected {expected}")

    def detail(self, level: int) -> np.ndarray:
        return self.bands[self.levels - level + 1]

    def flat(self) -> np.ndarray:
        return np.concatenate(self.bands)

    @classmethod
    def from_flat(cls, coeffs, levels, original_length, padded_length, basis="db2"):
        sizes = [padded_length >> levels] + [padded_length >> lev for lev in range(levels, 0, -1)]
        edges = np.cumsum(sizes)[:-1]
        bands = tuple(np.asarray(b, dtype=float) for b in np.split(np.asarray(coeffs, float), edges))
        return cls(levels, bands, original_length, padded_length, basis)


def _periodic_index(n: int, taps: int) -> np.ndarray:
    return (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n


def _analysis_step(s, h, g):
    idx = _periodic_index(s.size, h.size)
    blocks = s[idx]
    return blocks @ h, blocks @ g


def _synthesis_step(a, d, h, g):
    n = 2 * a.size
    out = np.zeros(n)
    np.add.at(out, _periodic_index(n, h.size), a[:, None] * h + d[:, None] * g)
    return out


def dyadic_length(n: int, levels: int) -> int:
    block = 1 << levels
    return -(-n // block) * block


def dwt_forward(signal, levels: int, basis: str = "db2") -> WaveletDecomposition:
    x = np.asarray(signal, dtype=float)
    if levels < 1:
        raise ValueError("levels must be a positive integer")
    if x.size < 2 ** levels:
        raise ValueError(
            f"signal of length {x.size} is too short for {levels} levels; "
            f"minimum length is {2 ** levels}"
        )
    h, g = filters(basis)
    padded = dyadic_length(x.size, levels)
    s = np.concatenate([x, np.zeros(padded - x.size)])
    details = []
    for _ in range(levels):
        s, d = _analysis_step(s, h, g)
        details.append(d)
    return WaveletDecomposition(levels, (s, *details[::-1]), x.size, padded, basis)


def dwt_inverse(decomp: WaveletDecomposition) -> np.ndarray:
    h, g = filters(decomp.basis)
    s = np.asarray(decomp.bands[0], dtype=float)
    for d in decomp.bands[1:]:
        s = _synthesis_step(s, np.asarray(d, dtype=float), h, g)
    return s[: decomp.original_length]


def synthesis_matrix(length: int, levels: int, basis: str = "db2") -> np.ndarray:
    """Columns are the time-domain atoms of the flattened coefficient vector."""
    eye = np.eye(length)
    cols = [
        dwt_inverse(WaveletDecomposition.from_flat(eye[i], levels, length, length, basis))
        for i in range(length)
    ]
    return np.column_stack(cols)


def band_slices(length: int, levels: int) -> dict:
    """Flat-vector slice of each band: ``'a'`` for approximation, ints for details."""
    sizes = [length >> levels] + [length >> lev for lev in range(levels, 0, -1)]
    keys = ["a"] + list(range(levels, 0, -1))
    out, start = {}, 0
    for key, size in zip(keys, sizes):
        out[key] = slice(start, start + size)
        start += size
    return out
