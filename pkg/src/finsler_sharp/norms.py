"""Reversible Minkowski norms on n-space.

A norm is stored as an immutable evaluator plus a multiplicative scale,
so that renormalization never wraps closures around closures.  All
evaluators are vectorized: they accept arrays of shape (..., dim) and
return shape (...).

The dual (polar) norm is computed analytically when a closed form is
attached, and otherwise by multi-start projected gradient ascent on the
Euclidean unit sphere followed by golden-section refinement along the
best great-circle direction.  Unit-ball volumes come from a closed form
when known, adaptive radial-angular quadrature in dimensions 2 and 3,
or Monte-Carlo over the dual bounding box.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import special

from ._util import chunk_sizes, resolve_workers, spawn_rngs
from .constants import omega_n


class DualMaximizerError(RuntimeError):
    """Dual-norm maximizer failed to converge; carries the best value found."""

    def __init__(self, message: str, best_value: float):
        super().__init__(f"{message} (best value found: {best_value!r})")
        self.best_value = best_value


@dataclass(frozen=True)
class MinkowskiNorm:
    """A reversible norm H(y) = scale * base(y) on R^dim.

    base must be positively 1-homogeneous, even, convex and positive off
    the origin; these invariants are testable, not enforced.  analytic_dual,
    analytic_gradient and analytic_volume all refer to the unscaled base
    norm; the scale algebra is applied by the accessors here.
    """

    dim: int
    base: Callable = field(repr=False)
    scale: float = 1.0
    analytic_dual: Optional[Callable] = field(default=None, repr=False)
    analytic_gradient: Optional[Callable] = field(default=None, repr=False)
    analytic_volume: Optional[float] = None
    label: str = "custom"
    smooth: bool = True
    normalized: bool = False

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return self.scale * self.base(y)

    def dual(self, alpha):
        return dual_norm(self, alpha)

    def gradient(self, y):
        """Gradient of H at y, analytic when available else central differences."""
        y = np.asarray(y, dtype=float)
        if self.analytic_gradient is not None:
            return self.scale * np.asarray(self.analytic_gradient(y), dtype=float)
        h = 1e-6 * max(1.0, float(np.linalg.norm(y)))
        g = np.empty(self.dim)
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = h
            g[j] = (self(y + e) - self(y - e)) / (2.0 * h)
        return g


@dataclass(frozen=True)
class WulffShape:
    """The sublevel set {H < radius} of a Minkowski norm."""

    norm: MinkowskiNorm
    radius: float = 1.0

    def volume(self, **kw) -> float:
        return self.radius**self.norm.dim * wulff_volume(self.norm, **kw)


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    method: str
    n_samples: int = 0
    seed: Optional[int] = None
    workers: int = 1


def euclidean_norm(n: int) -> MinkowskiNorm:
    """The Euclidean norm; self-dual and already normalized."""
    return MinkowskiNorm(
        dim=n,
        base=lambda y: np.sqrt(np.sum(np.square(y), axis=-1)),
        analytic_dual=lambda a: np.sqrt(np.sum(np.square(a), axis=-1)),
        analytic_gradient=lambda y: y / np.linalg.norm(y),
        analytic_volume=omega_n(n),
        label="euclidean",
        normalized=True,
    )


def _lp_ball_volume(n: int, p: float) -> float:
    if math.isinf(p):
        return 2.0**n
    return (2.0 * special.gamma(1.0 + 1.0 / p)) ** n / special.gamma(1.0 + n / p)


def lp_norm(n: int, p: float) -> MinkowskiNorm:
    """The l^p norm with its Hoelder dual l^q, 1/p + 1/q = 1.

    p = 1 and p = inf are admitted for oracle values only and are
    flagged non-smooth.
    """
    if p < 1:
        raise ValueError(f"l^p requires p >= 1, got {p}")
    if math.isinf(p):
        base = lambda y: np.max(np.abs(y), axis=-1)
        dual = lambda a: np.sum(np.abs(a), axis=-1)
        grad = None
    elif p == 1:
        base = lambda y: np.sum(np.abs(y), axis=-1)
        dual = lambda a: np.max(np.abs(a), axis=-1)
        grad = None
    else:
        q = p / (p - 1.0)
        base = lambda y: np.sum(np.abs(y) ** p, axis=-1) ** (1.0 / p)
        dual = lambda a: np.sum(np.abs(a) ** q, axis=-1) ** (1.0 / q)

        def grad(y, _p=p):
            r = np.sum(np.abs(y) ** _p) ** (1.0 / _p)
            return np.sign(y) * np.abs(y) ** (_p - 1.0) / r ** (_p - 1.0)

    return MinkowskiNorm(
        dim=n,
        base=base,
        analytic_dual=dual,
        analytic_gradient=grad,
        analytic_volume=_lp_ball_volume(n, p),
        label=f"l{p}",
        smooth=(1.0 < p < math.inf),
        normalized=False,
    )


def f_eps_fiber_norm(n: int, eps: float) -> MinkowskiNorm:
    """Fiber norm sqrt(|v|^2 + w^2 + eps sqrt(|v|^4 + w^4)) with y = (v, w).

    v collects the first n-1 coordinates and w the last.  For eps = 0
    this is Euclidean; for eps > 0 it is a genuinely non-Euclidean
    reversible norm squeezed between |y| and sqrt(1 + eps) |y|.
    """
    if n < 2:
        raise ValueError(f"fiber norm needs n >= 2, got {n}")
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")

    def base(y, _e=eps):
        v2 = np.sum(np.square(y[..., :-1]), axis=-1)
        w2 = np.square(y[..., -1])
        return np.sqrt(v2 + w2 + _e * np.sqrt(v2**2 + w2**2))

    return MinkowskiNorm(dim=n, base=base, label=f"f_eps({eps})")


def custom_norm(n, func, dual=None, gradient=None, volume=None, label="custom", smooth=True):
    return MinkowskiNorm(
        dim=n,
        base=func,
        analytic_dual=dual,
        analytic_gradient=gradient,
        analytic_volume=volume,
        label=label,
        smooth=smooth,
    )


def norm_from_descriptor(desc: dict) -> MinkowskiNorm:
    """Build a norm from a config descriptor.

    Schema: {"kind": "euclidean"|"lp"|"f_eps_fiber", "n": int, "p": real?,
    "eps": real?, "normalize": bool?}.  Custom norms carry code and are
    constructed in Python, not from config.
    """
    d = dict(desc)
    kind = d.pop("kind", None)
    n = d.pop("n", None)
    do_norm = d.pop("normalize", False)
    if n is None:
        raise ValueError("norm descriptor needs a dimension field 'n'")
    if kind == "euclidean":
        h = euclidean_norm(int(n))
    elif kind == "lp":
        if "p" not in d:
            raise ValueError("lp norm descriptor needs 'p'")
        h = lp_norm(int(n), float(d.pop("p")))
    elif kind == "f_eps_fiber":
        if "eps" not in d:
            raise ValueError("f_eps_fiber norm descriptor needs 'eps'")
        h = f_eps_fiber_norm(int(n), float(d.pop("eps")))
    elif kind == "custom":
        raise ValueError("custom norms are constructed in code, not from config")
    else:
        raise ValueError(f"unknown norm kind {kind!r}")
    if d:
        raise ValueError(f"unknown norm descriptor keys: {sorted(d)}")
    return normalize(h) if do_norm else h


def _unit_rows(y: np.ndarray) -> np.ndarray:
    return y / np.linalg.norm(y, axis=-1, keepdims=True)


def _ratio(h: MinkowskiNorm, alpha: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (y @ alpha) / h(y)


def _ratio_gradient(h: MinkowskiNorm, alpha, y, fy, hy, fd_step=1e-7):
    # gradient of y -> alpha.y / H(y):  alpha/H - f * DH / H, DH by central differences
    m, n = y.shape
    shift = np.zeros((n, 1, 1, n))
    for j in range(n):
        shift[j, 0, 0, j] = fd_step
    pts = y[None, None, :, :] + np.concatenate([shift, -shift], axis=1)
    vals = h(pts.reshape(-1, n)).reshape(n, 2, m)
    dh = (vals[:, 0, :] - vals[:, 1, :]).T / (2.0 * fd_step)
    return alpha[None, :] / hy[:, None] - (fy / hy)[:, None] * dh


def _golden_max(f, a: float, b: float, tol: float = 1e-11, max_iter: int = 200):
    """Golden-section maximization of f on [a, b]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def dual_norm(
    h: MinkowskiNorm,
    alpha,
    seed: int = 0,
    n_random: int = 8,
    max_iter: int = 400,
    fd_step: float = 1e-7,
) -> float:
    """Dual (polar) norm H*(alpha) = sup {alpha.y : H(y) <= 1}.

    Uses the attached closed form when present.  Otherwise maximizes the
    0-homogeneous ratio alpha.y / H(y) on the unit sphere from 2*dim
    coordinate starts plus the direction of alpha plus n_random seeded
    random starts, by projected gradient ascent with per-start adaptive
    steps, then refines the winner by golden-section search along its
    final great-circle ascent direction.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (h.dim,):
        raise ValueError(f"covector must have shape ({h.dim},), got {alpha.shape}")
    if not np.all(np.isfinite(alpha)):
        raise ValueError("covector must be finite")
    if h.analytic_dual is not None:
        return float(h.analytic_dual(alpha)) / h.scale
    norm_a = float(np.linalg.norm(alpha))
    if norm_a == 0.0:
        return 0.0

    rng = np.random.default_rng(seed)
    starts = [np.eye(h.dim), -np.eye(h.dim), (alpha / norm_a)[None, :]]
    starts.append(_unit_rows(rng.standard_normal((n_random, h.dim))))
    y = _unit_rows(np.concatenate(starts, axis=0))
    m = y.shape[0]
    step = np.full(m, 0.25)
    hy = h(y)
    fy = (y @ alpha) / hy
    last_best = -np.inf
    stalled = 0
    for _ in range(max_iter):
        g = _ratio_gradient(h, alpha, y, fy, hy, fd_step)
        g -= np.sum(g * y, axis=1, keepdims=True) * y
        cand = _unit_rows(y + step[:, None] * g)
        hc = h(cand)
        fc = (cand @ alpha) / hc
        up = fc > fy
        y[up], fy[up], hy[up] = cand[up], fc[up], hc[up]
        step[up] *= 1.3
        step[~up] *= 0.5
        best = float(fy.max())
        if best - last_best < 1e-14 * max(1.0, abs(best)):
            stalled += 1
            if stalled >= 8:
                break
        else:
            stalled = 0
        last_best = best
    else:
        if stalled < 8:
            raise DualMaximizerError(
                f"dual-norm ascent did not settle in {max_iter} iterations",
                best_value=float(fy.max()),
            )

    y0 = y[int(np.argmax(fy))]
    # golden-section polish along the projected-gradient great circle
    for _ in range(3):
        hy0 = h(y0[None, :])
        fy0 = np.array([float(y0 @ alpha)]) / hy0
        g = _ratio_gradient(h, alpha, y0[None, :], fy0, hy0, fd_step)[0]
        g -= float(g @ y0) * y0
        gn = float(np.linalg.norm(g))
        if gn < 1e-13:
            break
        d = g / gn

        def along(t, _y=y0, _d=d):
            z = math.cos(t) * _y + math.sin(t) * _d
            return float(z @ alpha) / float(h(z))

        t_star, _ = _golden_max(along, -1e-2, 1e-2)
        y0 = _unit_rows((math.cos(t_star) * y0 + math.sin(t_star) * d)[None, :])[0]
    return float(y0 @ alpha) / float(h(y0))


def _quadrature_volume(h: MinkowskiNorm, n_theta: int = 4096, n_polar: int = 400) -> float:
    # radial-angular: Vol = (1/n) * integral of r(direction)^n over the sphere
    if h.dim == 2:
        th = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
        r = 1.0 / h(dirs)
        # periodic trapezoid: spectrally accurate for smooth norms
        return 0.5 * float(np.mean(r**2)) * 2.0 * math.pi
    if h.dim == 3:
        u, wu = np.polynomial.legendre.leggauss(n_polar)  # u = cos(polar angle)
        th = np.linspace(0.0, 2.0 * math.pi, 2 * n_polar, endpoint=False)
        su = np.sqrt(1.0 - u**2)
        dirs = np.empty((n_polar, 2 * n_polar, 3))
        dirs[..., 0] = su[:, None] * np.cos(th)[None, :]
        dirs[..., 1] = su[:, None] * np.sin(th)[None, :]
        dirs[..., 2] = u[:, None]
        r = 1.0 / h(dirs.reshape(-1, 3)).reshape(n_polar, 2 * n_polar)
        inner = np.mean(r**3, axis=1) * 2.0 * math.pi
        return float(np.sum(wu * inner)) / 3.0
    raise ValueError(f"radial-angular quadrature supports dim 2 and 3, got {h.dim}")


def _mc_volume(h: MinkowskiNorm, n_samples: int, seed, workers: int):
    half = np.array([dual_norm(h, e) for e in np.eye(h.dim)])
    if not np.all(np.isfinite(half)) or np.any(half <= 0):
        raise ValueError("bounding box not found: degenerate norm")
    half = half * (1.0 + 1e-9)
    box_vol = float(np.prod(2.0 * half))
    sizes = chunk_sizes(n_samples, workers)
    rngs = spawn_rngs(seed, workers)

    def count_hits(args):
        rng, size = args
        hits = 0
        done = 0
        while done < size:
            m = min(size - done, 262144)
            pts = rng.uniform(-1.0, 1.0, size=(m, h.dim)) * half
            hits += int(np.count_nonzero(h(pts) < 1.0))
            done += m
        return hits

    if workers == 1:
        totals = [count_hits((rngs[0], sizes[0]))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            totals = list(ex.map(count_hits, zip(rngs, sizes)))
    phat = sum(totals) / n_samples
    value = box_vol * phat
    stderr = box_vol * math.sqrt(max(phat * (1.0 - phat), 0.0) / n_samples)
    return value, stderr, box_vol


def wulff_volume_estimate(
    h: MinkowskiNorm,
    method: str = "auto",
    n_samples: int = 1_000_000,
    seed: int = 0,
    workers=None,
) -> VolumeEstimate:
    """Euclidean volume of the unit sublevel set {H < 1}, with diagnostics.

    method: "analytic" (closed form attached to the norm), "quadrature"
    (radial-angular, dim 2 or 3), "mc" (Monte-Carlo over the dual
    bounding box, 1-sigma standard error reported), or "auto".
    """
    workers = resolve_workers(workers)
    scale_factor = h.scale ** (-h.dim)
    if method == "auto":
        if h.analytic_volume is not None:
            method = "analytic"
        elif h.dim in (2, 3):
            method = "quadrature"
        else:
            method = "mc"
    if method == "analytic":
        if h.analytic_volume is None:
            raise ValueError(f"norm {h.label!r} has no closed-form volume")
        return VolumeEstimate(h.analytic_volume * scale_factor, 0.0, "analytic")
    if method == "quadrature":
        return VolumeEstimate(_quadrature_volume(h), 0.0, "quadrature")
    if method == "mc":
        value, stderr, _ = _mc_volume(h, n_samples, seed, workers)
        return VolumeEstimate(value, stderr, "mc", n_samples, seed, workers)
    raise ValueError(f"unknown volume method {method!r}")


def wulff_volume(h: MinkowskiNorm, **kw) -> float:
    """Euclidean volume of {H < 1}; see wulff_volume_estimate for options."""
    return wulff_volume_estimate(h, **kw).value


def normalize(h: MinkowskiNorm, **kw) -> MinkowskiNorm:
    """Rescale so the unit sublevel set has volume omega_n.

    The scale factor is c = (Vol{H < 1} / omega_n)^(1/n).  Normalizing a
    second time with the same method and seed reuses the identical sample
    geometry by homogeneity, so the operation is idempotent to rounding.
    """
    vol = wulff_volume(h, **kw)
    c = (vol / omega_n(h.dim)) ** (1.0 / h.dim)
    return replace(h, scale=h.scale * c, normalized=True)


def eikonal_residual(h: MinkowskiNorm, samples) -> float:
    """max over samples of |H*(DH(x)) - 1|.

    DH uses the attached gradient when present, else central differences
    with step 1e-6 * max(1, |x|).
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    worst = 0.0
    for x in samples:
        if not np.any(x):
            raise ValueError("eikonal samples must avoid the origin")
        worst = max(worst, abs(dual_norm(h, h.gradient(x)) - 1.0))
    return worst
