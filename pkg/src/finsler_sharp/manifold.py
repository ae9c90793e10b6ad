"""Finsler manifold instances on a single global chart of R^n.

Every shipped instance has an x-independent metric: Euclidean space,
a Minkowski space built from any norm, and the warped fiber-norm family
with a Euclidean base, which is itself a Minkowski norm.  Distances and
ball volumes are therefore exact; Monte-Carlo estimators exist alongside
them as consistency checks, and the warped family additionally carries
the certified interval implied by its metric sandwich
g <= F_eps <= sqrt(1 + eps) g.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._util import chunk_sizes, resolve_workers, spawn_rngs
from .constants import omega_n
from .norms import (
    MinkowskiNorm,
    VolumeEstimate,
    dual_norm,
    euclidean_norm,
    f_eps_fiber_norm,
    norm_from_descriptor,
    normalize as normalize_norm,
    wulff_volume_estimate,
)


@dataclass(frozen=True)
class FinslerInstance:
    """A manifold model with metric F(x, y) = norm(y) on the chart R^n."""

    dim: int
    kind: str  # "euclidean" | "minkowski" | "f_eps"
    norm: MinkowskiNorm
    eps: Optional[float] = None
    g: str = "euclidean"
    distance_mode: str = "closed_form"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def metric(self, x, y):
        return self.norm(y)

    def dual_metric(self, x, alpha):
        return dual_norm(self.norm, alpha)


@dataclass(frozen=True)
class BallVolumeCurve:
    center: np.ndarray
    radii: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray

    def ratios(self, n: int):
        return self.values / (omega_n(n) * self.radii**n)

    def ratio_stderrs(self, n: int):
        return self.stderrs / (omega_n(n) * self.radii**n)


@dataclass(frozen=True)
class AvrEstimate:
    lo: float
    hi: float
    point: float
    stderr: float
    method: str
    bg_ok: bool
    curve: Optional[BallVolumeCurve] = None


def euclidean_instance(n: int) -> FinslerInstance:
    return FinslerInstance(dim=n, kind="euclidean", norm=euclidean_norm(n))


def minkowski_instance(h: MinkowskiNorm) -> FinslerInstance:
    return FinslerInstance(dim=h.dim, kind="minkowski", norm=h)


def f_eps_instance(n: int, eps: float, normalize: bool = False) -> FinslerInstance:
    """Warped fiber-norm instance over a Euclidean base.

    With a Euclidean base the metric does not depend on the base point,
    so the instance is a Minkowski space and all closed forms apply; the
    sandwich interval is still reported by avr() as the certificate the
    construction provides without using that flatness.
    """
    h = f_eps_fiber_norm(n, eps)
    if normalize:
        h = normalize_norm(h)
    return FinslerInstance(dim=n, kind="f_eps", norm=h, eps=eps)


def instance_from_descriptor(desc: dict) -> FinslerInstance:
    """Schema: {"kind": "euclidean"|"minkowski"|"f_eps", "n": int,
    "norm": <norm descriptor>?, "eps": real?, "g": "euclidean"?,
    "normalize": bool?}."""
    d = dict(desc)
    kind = d.pop("kind", None)
    n = d.pop("n", None)
    g = d.pop("g", "euclidean")
    if g != "euclidean":
        raise ValueError(f"only a Euclidean base is supported, got g={g!r}")
    if kind == "euclidean":
        if n is None:
            raise ValueError("euclidean instance needs 'n'")
        inst = euclidean_instance(int(n))
    elif kind == "minkowski":
        nd = d.pop("norm", None)
        if nd is None:
            raise ValueError("minkowski instance needs a 'norm' descriptor")
        if n is not None and int(n) != int(nd.get("n", n)):
            raise ValueError("instance and norm dimensions disagree")
        if d.pop("normalize", False):
            nd = dict(nd, normalize=True)
        inst = minkowski_instance(norm_from_descriptor(nd))
    elif kind == "f_eps":
        if n is None or "eps" not in d:
            raise ValueError("f_eps instance needs 'n' and 'eps'")
        inst = f_eps_instance(int(n), float(d.pop("eps")), bool(d.pop("normalize", False)))
    else:
        raise ValueError(f"unknown instance kind {kind!r}")
    if d:
        raise ValueError(f"unknown instance descriptor keys: {sorted(d)}")
    return inst


def fiber_volume(m: FinslerInstance, **kw) -> VolumeEstimate:
    """Euclidean volume of the tangent unit ball, cached per instance."""
    key = ("fiber_volume", tuple(sorted(kw.items())))
    if key not in m._cache:
        m._cache[key] = wulff_volume_estimate(m.norm, **kw)
    return m._cache[key]


def bh_density(m: FinslerInstance, x=None, **kw) -> float:
    """Busemann-Hausdorff density omega_n / Vol(tangent unit ball).

    Constant over the chart for every shipped instance; x is accepted for
    signature compatibility and ignored.
    """
    return omega_n(m.dim) / fiber_volume(m, **kw).value


def distance(m: FinslerInstance, x0, x1) -> float:
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    return float(m.norm(x1 - x0))


def polyline_distance_upper(m: FinslerInstance, x0, x1, k: int = 32, sweeps: int = 60) -> float:
    """Upper bound on the distance by coordinate descent on a k-segment path.

    On the shipped translation-invariant instances the straight segment is
    optimal, so this must reproduce distance() up to solver tolerance; it
    exists as the generic fallback bound for metrics without a closed form.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    nodes = x0 + np.linspace(0.0, 1.0, k + 1)[:, None] * (x1 - x0)

    def length(nd):
        return float(np.sum(m.norm(np.diff(nd, axis=0))))

    best = length(nodes)
    step = float(m.norm(x1 - x0)) / k
    for _ in range(sweeps):
        improved = False
        for i in range(1, k):
            for j in range(m.dim):
                for s in (step, -step):
                    trial = nodes.copy()
                    trial[i, j] += s
                    lt = length(trial)
                    if lt < best - 1e-15:
                        nodes, best, improved = trial, lt, True
        if not improved:
            step *= 0.5
            if step < 1e-12:
                break
    return best


def ball_volume(m: FinslerInstance, x0, r: float) -> float:
    """Volume of the metric ball of radius r in the canonical measure.

    Exact for every shipped instance: the density is the constant
    omega_n / Vol{H < 1} and the ball is the Wulff set r {H < 1}, so the
    volume is omega_n r^n regardless of the norm.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    return omega_n(m.dim) * r**m.dim


def ball_volume_mc(
    m: FinslerInstance, x0, r: float, n_samples: int = 1_000_000, seed: int = 0, workers=None
) -> VolumeEstimate:
    """Monte-Carlo ball volume: density times sampled Lebesgue measure.

    The density factor comes from the deterministic fiber quadrature, so
    the reported standard error is purely the sampling error of the
    indicator of {distance < r} over the dual bounding box.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    workers = resolve_workers(workers)
    x0 = np.asarray(x0, dtype=float)
    sigma = bh_density(m)
    half = r * np.array([dual_norm(m.norm, e) for e in np.eye(m.dim)]) * (1.0 + 1e-9)
    box_vol = float(np.prod(2.0 * half))
    sizes = chunk_sizes(n_samples, workers)
    rngs = spawn_rngs(seed, workers)

    def count_hits(args):
        rng, size = args
        hits = 0
        done = 0
        while done < size:
            mm = min(size - done, 262144)
            pts = rng.uniform(-1.0, 1.0, size=(mm, m.dim)) * half
            hits += int(np.count_nonzero(m.norm(pts) < r))
            done += mm
        return hits

    if workers == 1:
        totals = [count_hits((rngs[0], sizes[0]))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            totals = list(ex.map(count_hits, zip(rngs, sizes)))
    phat = sum(totals) / n_samples
    value = sigma * box_vol * phat
    stderr = sigma * box_vol * math.sqrt(max(phat * (1.0 - phat), 0.0) / n_samples)
    return VolumeEstimate(value, stderr, "mc", n_samples, seed, workers)


def ball_volume_curve(
    m: FinslerInstance, x0, radii, n_samples: int = 1_000_000, seed: int = 0, workers=None
) -> BallVolumeCurve:
    """Monte-Carlo volumes over a radius schedule, independent streams per radius."""
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or not np.all(np.diff(radii) > 0) or radii[0] <= 0:
        raise ValueError("radius schedule must be increasing and positive")
    seeds = np.random.SeedSequence(seed).generate_state(len(radii))
    vals = np.empty(len(radii))
    errs = np.empty(len(radii))
    for i, r in enumerate(radii):
        est = ball_volume_mc(m, x0, float(r), n_samples=n_samples, seed=int(seeds[i]), workers=workers)
        vals[i], errs[i] = est.value, est.stderr
    return BallVolumeCurve(np.asarray(x0, dtype=float), radii, vals, errs)


def bishop_gromov_ok(curve: BallVolumeCurve, n: int, sigma_level: float = 3.0) -> bool:
    """r -> Vol/ (omega_n r^n) nonincreasing within the error bars."""
    q = curve.ratios(n)
    e = curve.ratio_stderrs(n)
    for i in range(len(q) - 1):
        if q[i + 1] > q[i] + sigma_level * (e[i] + e[i + 1]):
            return False
    return True


def avr(
    m: FinslerInstance,
    x0=None,
    r_schedule=None,
    method: str = "auto",
    n_samples: int = 1_000_000,
    seed: int = 0,
    workers=None,
    sigma_level: float = 3.0,
) -> AvrEstimate:
    """Asymptotic volume ratio estimate with a Bishop-Gromov consistency check.

    Shipped instances are translation invariant, so the exact value is 1
    and the "auto" method short-circuits.  method="mc" runs the honest
    estimator over the radius schedule: point estimate is the last ratio,
    the interval is the metric-sandwich certificate for the warped family
    ([(1+eps)^(-n/2), 1] over a Euclidean base) and [0, 1] otherwise, and
    a monotonicity violation beyond the error bars raises, since it would
    signal either a bug or an instance outside the admissible class.
    """
    if x0 is None:
        x0 = np.zeros(m.dim)
    if method == "auto":
        method = "exact"
    if method == "exact":
        lo, hi = (((1.0 + m.eps) ** (-m.dim / 2.0), 1.0) if m.kind == "f_eps" else (1.0, 1.0))
        return AvrEstimate(lo=lo, hi=hi, point=1.0, stderr=0.0, method="exact", bg_ok=True)
    if method != "mc":
        raise ValueError(f"unknown avr method {method!r}")
    if r_schedule is None:
        r_schedule = [1.0, 2.0, 4.0, 8.0]
    curve = ball_volume_curve(m, x0, r_schedule, n_samples=n_samples, seed=seed, workers=workers)
    ok = bishop_gromov_ok(curve, m.dim, sigma_level)
    if not ok:
        raise RuntimeError(
            "ball-volume ratio curve increases beyond error bars: "
            "inconsistent estimator or instance outside the admissible class"
        )
    q = curve.ratios(m.dim)
    e = curve.ratio_stderrs(m.dim)
    if m.kind == "f_eps":
        lo, hi = (1.0 + m.eps) ** (-m.dim / 2.0), 1.0
    else:
        lo, hi = 0.0, 1.0
    return AvrEstimate(
        lo=lo, hi=hi, point=float(q[-1]), stderr=float(e[-1]), method="mc", bg_ok=ok, curve=curve
    )


def finsler_gradient(m: FinslerInstance, x, du) -> np.ndarray:
    """Legendre transform of the covector du at x.

    Computed as the gradient of half the squared dual norm by central
    differences; the result y* satisfies du(y*) = F*(x, du)^2 and
    F(x, y*) = F*(x, du).  du = 0 maps to the zero vector.
    """
    du = np.asarray(du, dtype=float)
    if not np.any(du):
        return np.zeros(m.dim)
    h = 1e-6 * max(1.0, float(np.linalg.norm(du)))
    out = np.empty(m.dim)
    for j in range(m.dim):
        e = np.zeros(m.dim)
        e[j] = h
        fp = dual_norm(m.norm, du + e)
        fm = dual_norm(m.norm, du - e)
        out[j] = (fp**2 - fm**2) / (4.0 * h)
    return out
