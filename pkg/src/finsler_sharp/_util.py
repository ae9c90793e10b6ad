"""Shared small helpers: thread resolution, seeded RNG spawning, graded grids."""

from __future__ import annotations

import os

import numpy as np

ENV_THREADS = "FINSLER_SHARP_THREADS"


def resolve_workers(workers=None) -> int:
    """Explicit worker count, else the FINSLER_SHARP_THREADS override, else 1."""
    if workers is not None:
        w = int(workers)
    else:
        w = int(os.environ.get(ENV_THREADS, "1"))
    if w < 1:
        raise ValueError(f"worker count must be >= 1, got {w}")
    return w


def spawn_rngs(seed, workers: int):
    """Independent deterministic generators, one per worker."""
    children = np.random.SeedSequence(seed).spawn(workers)
    return [np.random.default_rng(c) for c in children]


def graded_grid(a: float, b: float, n: int, exponent: float = 2.0) -> np.ndarray:
    """Grid on [a, b] clustered at both endpoints with the given grading power."""
    t = np.linspace(0.0, 1.0, n)
    # symmetric smoothstep-style map: derivative vanishes to order exponent-1 at both ends
    s = t**exponent / (t**exponent + (1.0 - t) ** exponent)
    return a + (b - a) * s


def chunk_sizes(total: int, parts: int):
    """Split total into parts near-equal chunks, deterministically."""
    base, rem = divmod(total, parts)
    return [base + (1 if i < rem else 0) for i in range(parts)]


def split_quad(fn, a, b, points=(), epsabs=1e-12, epsrel=1e-10, limit=300) -> float:
    """Adaptive quadrature on [a, b] split at interior kink locations.

    scipy's QAGS handles integrable endpoint singularities on each panel;
    splitting keeps kinks at panel endpoints where the extrapolation works.
    """
    from scipy import integrate

    pts = sorted(float(p) for p in points if a < p < b)
    total = 0.0
    for lo, hi in zip([a] + pts, pts + [b]):
        if hi <= lo:
            continue
        val, _ = integrate.quad(fn, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
        total += val
    return total
