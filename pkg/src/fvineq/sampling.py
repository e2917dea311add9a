"""Test-function generators for empirical constant estimation.

Every random sample owns an independent RNG stream seeded by
``(seed, sample_index)``, so results do not depend on evaluation order or on
how samples are spread over threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

SAMPLE_KINDS = ("uniform", "smooth", "indicator", "checkerboard")


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("FVINEQ_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SamplePoints:
    """Where a sample is evaluated: one point per unknown.

    ``eligible`` marks unknowns carrying positive measure; indicators are
    only placed there.
    """

    points: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    cell_width: float
    eligible: np.ndarray | None = None


@dataclass(frozen=True)
class SamplerSpec:
    """Mix of test functions.

    Deterministic ``fields`` (callables of the coordinates) come first, then
    the constant function if requested, then ``n_samples`` random draws
    cycling through ``kinds`` with equal weights.
    """

    n_samples: int = 200
    kinds: tuple[str, ...] = SAMPLE_KINDS
    include_constant: bool = False
    fields: tuple[Callable, ...] = ()

    def __post_init__(self):
        unknown = set(self.kinds) - set(SAMPLE_KINDS)
        if unknown:
            raise ValueError(f"unknown sample kinds {sorted(unknown)}")
        if self.n_samples < 0 or (self.n_samples > 0 and not self.kinds):
            raise ValueError("need a non-negative sample count and at least one kind")
        if self.total < 1:
            raise ValueError("sampler produces no samples")

    @property
    def total(self) -> int:
        return len(self.fields) + int(self.include_constant) + self.n_samples

    def label(self, index: int) -> str:
        nf = len(self.fields)
        if index < nf:
            return f"field{index}"
        if self.include_constant and index == nf:
            return "constant"
        r = index - nf - int(self.include_constant)
        return self.kinds[r % len(self.kinds)]

    def draw(self, index: int, seed: int, where: SamplePoints) -> np.ndarray:
        x = where.points
        n = len(x)
        nf = len(self.fields)
        if index < nf:
            vals = self.fields[index](*x.T)
            return np.array(np.broadcast_to(np.asarray(vals, dtype=float), (n,)))
        if self.include_constant and index == nf:
            return np.ones(n)
        kind = self.label(index)
        rng = np.random.default_rng([int(seed), int(index)])
        if kind == "uniform":
            return rng.uniform(-1.0, 1.0, n)
        if kind == "smooth":
            return _smooth_field(rng, x, where.lower, where.upper)
        if kind == "indicator":
            pool = np.arange(n) if where.eligible is None else np.flatnonzero(where.eligible)
            vals = np.zeros(n)
            vals[pool[rng.integers(len(pool))]] = 1.0
            return vals
        block = (1, 2, 4)[rng.integers(3)]
        w = block * where.cell_width
        k = np.floor((x - where.lower) / w + 1e-9).astype(np.int64).sum(axis=1)
        return np.where(k % 2 == 0, 1.0, -1.0)


def _smooth_field(rng, x, lower, upper, terms: int = 3) -> np.ndarray:
    """Random trigonometric field.

    Half of the draws are sums of sine products vanishing on the bounding
    box, the others shifted cosine products plus an offset.
    """
    span = upper - lower
    t = (x - lower) / span
    vanishing = rng.random() < 0.5
    out = np.zeros(len(x)) if vanishing else np.full(len(x), rng.uniform(-1.0, 1.0))
    for i in range(terms):
        amp = rng.normal()
        if vanishing:
            freq = rng.integers(1, 4, size=x.shape[1])
            out += amp * 2.0 ** (-2 * i) * np.prod(np.sin(np.pi * freq * t), axis=1)
        else:
            freq = rng.integers(0, 4, size=x.shape[1])
            phase = rng.uniform(0.0, 2.0 * np.pi, size=x.shape[1])
            out += amp * np.prod(np.cos(np.pi * freq * t + phase), axis=1)
    return out


def evaluate_samples(spec: SamplerSpec, seed: int, where: SamplePoints,
                     ratio: Callable[[np.ndarray], float | None],
                     threads: int | None = None) -> list[float | None]:
    """Apply ``ratio`` to every sample; ``None`` marks a skipped sample."""
    threads = default_threads() if threads is None else threads

    def one(i: int):
        return ratio(spec.draw(i, seed, where))

    idx: Iterable[int] = range(spec.total)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, idx))
    return [one(i) for i in idx]


def summarize(results: Sequence[float | None]) -> tuple[np.ndarray, int, float, int]:
    """Ratios kept, skipped count, max ratio and the index attaining it."""
    kept = np.array([r for r in results if r is not None], dtype=float)
    skipped = sum(r is None for r in results)
    if kept.size == 0:
        return kept, skipped, float("nan"), -1
    finite = np.where(np.isfinite(kept), kept, -np.inf)
    best = int(np.argmax(finite))
    argmax = [i for i, r in enumerate(results) if r is not None][best]
    c_emp = float(np.max(kept)) if np.all(np.isfinite(kept)) else float("nan")
    return kept, skipped, c_emp, argmax
