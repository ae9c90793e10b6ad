"""Radial variational solvers on Wulff balls of normalized Minkowski norms.

For radial profiles on the ball the anisotropic Dirichlet integrals reduce
to one-dimensional weighted quadratures, so the eigenvalue problem with an
inverse-square potential, the semilinear ground-state problem, and the
critical-profile exploration for oscillatory nonlinearities all become
singular ODE problems in the radial variable.  Shooting starts from the
regular Frobenius branch at the origin; discrete energies live on a graded
grid and their exact gradients drive the polish/minimization steps.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, linalg, optimize

from ._util import graded_grid, split_quad
from .constants import bpv_constant, omega_n


@lru_cache(maxsize=64)
def _cached_grid(radius: float, n_nodes: int, grading: float) -> np.ndarray:
    g = graded_grid(0.0, radius, n_nodes, exponent=grading)
    g.setflags(write=False)
    return g


def _check_mu(n: int, mu: float) -> None:
    if mu < 0:
        raise ValueError(f"singular-potential strength must be >= 0, got {mu}")
    if n == 2:
        if mu != 0.0:
            raise ValueError("inverse-square potential requires mu = 0 in dimension 2")
    elif mu >= ((n - 2) / 2.0) ** 2:
        raise ValueError(
            f"mu = {mu} is outside the admissible range [0, {((n - 2) / 2.0) ** 2}) "
            f"for dimension {n}"
        )


@dataclass(frozen=True)
class RadialBvp:
    """Radial boundary-value problem on the Wulff ball of radius R.

    nonlinearity is one of "eigen", ("power", p), or ("general", nl) where
    nl carries h/H callables.  Profiles are nodal arrays on grid() with the
    Dirichlet condition u(R) = 0.
    """

    n: int
    radius: float
    mu: float = 0.0
    lam: float = 0.0
    nonlinearity: object = "eigen"
    n_nodes: int = 4096
    grading: float = 2.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"dimension must be >= 2, got {self.n}")
        if self.radius <= 0:
            raise ValueError(f"domain radius must be positive, got {self.radius}")
        if self.n_nodes < 16:
            raise ValueError("grid needs at least 16 nodes")
        _check_mu(self.n, self.mu)
        kind = self.nonlinearity
        if isinstance(kind, str):
            if kind != "eigen":
                raise ValueError(f"unknown nonlinearity descriptor {kind!r}")
        elif isinstance(kind, tuple) and len(kind) == 2 and kind[0] == "power":
            if kind[1] <= 2:
                raise ValueError("power nonlinearity needs exponent > 2")
        elif isinstance(kind, tuple) and len(kind) == 2 and kind[0] == "general":
            pass
        else:
            raise ValueError(f"unknown nonlinearity descriptor {kind!r}")

    def grid(self) -> np.ndarray:
        return _cached_grid(self.radius, self.n_nodes, self.grading)

    def frobenius_exponent(self) -> float:
        half = (self.n - 2) / 2.0
        return -half + math.sqrt(half * half - self.mu)

    def spectral_bound(self) -> float:
        """Sharp L2 lower bound of the quadratic form on this ball."""
        vol = omega_n(self.n) * self.radius ** self.n
        _, s = bpv_constant(self.mu, self.n, 1.0, vol)
        return s


@dataclass(frozen=True)
class EnergyValue:
    total: float
    quadratic: float
    nonlinear: float
    dirichlet: float
    l2: float
    residual: float
    singular: bool = False


@dataclass(frozen=True)
class MountainPassSolution:
    grid: np.ndarray
    values: np.ndarray
    amplitude: float
    level: float
    energy: EnergyValue
    residual: float
    shooting_gap: float


@dataclass(frozen=True)
class CriticalProfile:
    grid: np.ndarray
    values: np.ndarray
    sup: float
    level: float
    residual: float
    truncation: float
    bound_active: bool


def coercivity_constant(bvp: RadialBvp) -> float:
    """Equivalence constant between the shifted quadratic form and the
    Dirichlet energy; positive precisely above the spectral threshold."""
    s = bvp.spectral_bound()
    if bvp.lam <= -s:
        raise ValueError(
            f"lambda = {bvp.lam} is at or below the spectral bound -{s}"
        )
    base = min(1.0, 1.0 + bvp.lam / s)
    if bvp.n == 2:
        return base
    half = (bvp.n - 2) / 2.0
    mu_bar_sq = half * half - bvp.mu
    return mu_bar_sq / (half * half) * base


def _panels(rho: np.ndarray, n: int):
    drho = np.diff(rho)
    rbar = 0.5 * (rho[1:] + rho[:-1])
    return drho, rbar, rbar ** (n - 1)


def _as_nodal(u, rho: np.ndarray) -> np.ndarray:
    vals = u(rho) if callable(u) else u
    vals = np.asarray(vals, dtype=float)
    if vals.shape != rho.shape:
        raise ValueError(f"profile has shape {vals.shape}, grid has {rho.shape}")
    return vals


def _general_pair(descriptor, h_override):
    nl = h_override if h_override is not None else descriptor
    if hasattr(nl, "h") and hasattr(nl, "H"):
        return nl.h, nl.H
    if isinstance(nl, tuple) and len(nl) == 2:
        return nl[0], nl[1]
    raise ValueError("general nonlinearity needs h and its antiderivative H")


def radial_energy(u, bvp: RadialBvp, p: Optional[float] = None, h=None) -> EnergyValue:
    """Energy of a radial profile for the problem family of the bvp.

    Eigen and power families use half the shifted quadratic form minus the
    positive-part potential; the general family uses the p-energy minus
    lambda times the integrated nonlinearity.  residual is the norm of the
    discrete Euler-Lagrange gradient, scaled by the profile magnitude.
    """
    rho = bvp.grid()
    vals = _as_nodal(u, rho)
    sup = float(np.max(np.abs(vals), initial=0.0))
    if abs(vals[-1]) > 1e-8 * max(1.0, sup):
        raise ValueError("profile must vanish at the outer radius")
    n = bvp.n
    won = omega_n(n)
    drho, rbar, shell = _panels(rho, n)
    du = np.diff(vals)
    ubar = 0.5 * (vals[1:] + vals[:-1])

    dirichlet2 = n * won * float(np.sum((du / drho) ** 2 * shell * drho))
    l2 = n * won * float(np.sum(ubar ** 2 * shell * drho))
    singular = False
    hardy = 0.0
    if bvp.mu != 0.0:
        hardy = n * won * float(np.sum(ubar ** 2 * rbar ** (n - 3) * drho))
        # integrable for the dimensions in scope unless u misbehaves at 0
        if n >= 5 and abs(vals[0]) > 1e-6 * max(1.0, sup):
            singular = True

    kind = bvp.nonlinearity
    if kind == "eigen":
        quadratic = dirichlet2 - bvp.mu * hardy + bvp.lam * l2
        nonlinear = 0.0
        total = 0.5 * quadratic
        grad = _grad_quadratic(vals, rho, n, bvp.mu, bvp.lam, None, won)
        dirichlet = dirichlet2
    elif isinstance(kind, tuple) and kind[0] == "power":
        q = kind[1] if p is None else p
        quadratic = dirichlet2 - bvp.mu * hardy + bvp.lam * l2
        nonlinear = n * won * float(
            np.sum(np.maximum(ubar, 0.0) ** q / q * shell * drho)
        )
        total = 0.5 * quadratic - nonlinear
        grad = _grad_quadratic(
            vals, rho, n, bvp.mu, bvp.lam, lambda s: np.maximum(s, 0.0) ** (q - 1), won
        )
        dirichlet = dirichlet2
    else:
        if p is None or p <= bvp.n:
            raise ValueError("general nonlinearity needs an exponent p > n")
        hfun, bigh = _general_pair(kind, h)
        dirichlet = n * won * float(np.sum(np.abs(du / drho) ** p * shell * drho))
        nonlinear = n * won * float(np.sum(np.asarray(bigh(ubar), dtype=float) * shell * drho))
        quadratic = dirichlet
        total = dirichlet / p - bvp.lam * nonlinear
        grad = _grad_plaplace(vals, rho, n, p, bvp.lam, hfun, won)

    grad = grad.copy()
    grad[-1] = 0.0  # Dirichlet node is not a degree of freedom
    scale = n * won * max(1.0, sup) * max(1.0, bvp.radius ** (n - 1))
    residual = float(np.linalg.norm(grad)) / scale
    if singular:
        total = math.inf
    return EnergyValue(
        total=total, quadratic=quadratic, nonlinear=nonlinear,
        dirichlet=dirichlet, l2=l2, residual=residual, singular=singular,
    )


def _grad_quadratic(vals, rho, n, mu, lam, gprime, won) -> np.ndarray:
    """Gradient of 1/2 K^2 - sum G(ubar) under the midpoint discretization."""
    drho, rbar, shell = _panels(rho, n)
    du = np.diff(vals)
    ubar = 0.5 * (vals[1:] + vals[:-1])
    flux = du / drho * shell  # d(dirichlet/2)/d(du)
    mass = lam * ubar * shell * drho
    if mu != 0.0:
        mass = mass - mu * ubar * rbar ** (n - 3) * drho
    if gprime is not None:
        mass = mass - np.asarray(gprime(ubar), dtype=float) * shell * drho
    g = np.zeros_like(vals)
    np.add.at(g, np.arange(len(vals) - 1), -flux + 0.5 * mass)
    np.add.at(g, np.arange(1, len(vals)), flux + 0.5 * mass)
    return n * won * g


def _grad_plaplace(vals, rho, n, p, lam, hfun, won) -> np.ndarray:
    drho, rbar, shell = _panels(rho, n)
    du = np.diff(vals)
    ubar = 0.5 * (vals[1:] + vals[:-1])
    slope = du / drho
    flux = np.abs(slope) ** (p - 2) * slope * shell
    hterm = -lam * np.asarray(hfun(ubar), dtype=float) * shell * drho
    g = np.zeros_like(vals)
    np.add.at(g, np.arange(len(vals) - 1), -flux + 0.5 * hterm)
    np.add.at(g, np.arange(1, len(vals)), flux + 0.5 * hterm)
    return n * won * g


def _kkt_residual(u, g, hi, scale):
    kkt = g.copy()
    kkt[-1] = 0.0
    at_lo = u <= 1e-14
    at_hi = u >= hi * (1.0 - 1e-12)
    kkt[at_lo] = np.minimum(kkt[at_lo], 0.0)
    kkt[at_hi] = np.maximum(kkt[at_hi], 0.0)
    return float(np.linalg.norm(kkt)) / scale, kkt


def _polish_plaplace(u, rho, n, p, lam, nl, hi, won, max_iter=60):
    """Damped projected Newton on the truncated p-energy, started from a
    box minimizer.  The Hessian is tridiagonal; plateau panels with nearly
    flat slope make it degenerate, so a Levenberg shift backstops the solve.
    """
    if not hasattr(nl, "dh"):
        return u
    m = len(u)
    drho, rbar, shell = _panels(rho, n)
    idx = np.arange(m - 1)
    scale = n * won * max(1.0, np.max(u) ** (p - 1)) * max(1.0, rho[-1] ** (n - 1))

    u = u.copy()
    g = _grad_plaplace(u, rho, n, p, lam, nl.h, won)
    best, _ = _kkt_residual(u, g, hi, scale)
    lev = 0.0
    for _ in range(max_iter):
        if best < 1e-10:
            break
        du = np.diff(u)
        ubar = 0.5 * (u[1:] + u[:-1])
        k_diag = (p - 1.0) * np.abs(du / drho) ** (p - 2) * shell / drho
        c = -lam * np.asarray(nl.dh(ubar), dtype=float) * 0.25 * shell * drho
        diag = np.zeros(m)
        np.add.at(diag, idx, k_diag + c)
        np.add.at(diag, idx + 1, k_diag + c)
        off = -k_diag + c
        fixed = (u <= 1e-14) | (u >= hi * (1.0 - 1e-12))
        fixed[-1] = True
        floor = 1e-12 * max(float(np.max(np.abs(diag))), 1.0)
        diag = np.maximum(diag + lev, floor)
        ab = np.zeros((3, m))
        ab[0, 1:] = np.where(fixed[:-1] | fixed[1:], 0.0, off)
        ab[1] = np.where(fixed, 1.0, diag)
        ab[2, :-1] = ab[0, 1:]
        rhs = np.where(fixed, 0.0, -g / (n * won))
        try:
            step = linalg.solve_banded((1, 1), ab, rhs)
        except linalg.LinAlgError:
            lev = max(10.0 * lev, floor * 1e4)
            continue
        t, improved = 1.0, False
        for _ in range(25):
            trial = np.clip(u + t * step, 0.0, hi)
            trial[-1] = 0.0
            gt = _grad_plaplace(trial, rho, n, p, lam, nl.h, won)
            rt, _ = _kkt_residual(trial, gt, hi, scale)
            if rt < best:
                u, g, best, improved = trial, gt, rt, True
                break
            t *= 0.5
        if improved:
            lev *= 0.25
        else:
            lev = max(10.0 * lev, floor * 1e4)
            if lev > 1e20 * floor:
                break
    return u


def _frobenius_start(bvp: RadialBvp, lam: float, amplitude: float = 1.0):
    s = bvp.frobenius_exponent()
    c2 = -lam / (2.0 * (2.0 * s + bvp.n))
    eps = 1e-6 * bvp.radius
    u0 = amplitude * eps ** s * (1.0 + c2 * eps * eps)
    w0 = amplitude * (
        s * eps ** (s + bvp.n - 2) + c2 * (s + 2.0) * eps ** (s + bvp.n)
    )
    return eps, u0, w0, s, c2


def _shoot_linear(bvp: RadialBvp, lam: float):
    n, mu = bvp.n, bvp.mu
    eps, u0, w0, _, _ = _frobenius_start(bvp, lam)

    def rhs(rho, y):
        return [y[1] / rho ** (n - 1), -(mu * rho ** (n - 3) + lam * rho ** (n - 1)) * y[0]]

    return integrate.solve_ivp(
        rhs, (eps, bvp.radius), [u0, w0], method="DOP853",
        rtol=1e-12, atol=1e-14, dense_output=True,
    )


def first_eigenvalue(bvp: RadialBvp):
    """Smallest value of the spectral parameter with a positive radial
    solution vanishing at R; found by shooting from the regular branch and
    root-finding on the boundary value.  Returns (value, nodal profile)."""
    _check_mu(bvp.n, bvp.mu)

    def boundary(lam):
        sol = _shoot_linear(bvp, lam)
        return float(sol.y[0, -1])

    lam_lo = 0.5 / bvp.radius ** 2
    f_lo = boundary(lam_lo)
    if f_lo <= 0.0:
        # start overshot the ground branch; back down
        while f_lo <= 0.0 and lam_lo > 1e-12:
            lam_lo *= 0.25
            f_lo = boundary(lam_lo)
        if f_lo <= 0.0:
            raise RuntimeError("could not bracket the eigenvalue from below")
    lam_hi = lam_lo
    f_hi = f_lo
    for _ in range(200):
        lam_hi *= 1.6
        f_hi = boundary(lam_hi)
        if f_hi < 0.0:
            break
    else:
        raise RuntimeError("eigenvalue bracket search failed: no sign change")
    lam1 = optimize.brentq(boundary, lam_lo, lam_hi, xtol=1e-12, rtol=1e-14)

    sol = _shoot_linear(bvp, lam1)
    rho = bvp.grid()
    prof = _sample_frobenius(rho, sol, bvp, lam1, 1.0)
    prof[-1] = 0.0
    prof /= np.max(np.abs(prof))
    if prof[np.argmax(np.abs(prof))] < 0:
        prof = -prof
    return lam1, prof


def _sample_frobenius(rho, sol, bvp: RadialBvp, lam: float, amplitude: float):
    """Sample an ODE solution on the grid, patching the region below the
    shooting start with the series.  The singular branch (negative index,
    mu > 0) is unbounded at 0; the origin node gets the first positive
    node's value, which the graded quadratures cannot distinguish."""
    eps, _, _, s, c2 = _frobenius_start(bvp, lam, amplitude)
    vals = np.empty_like(rho)
    inner = (rho < eps) & (rho > 0.0)
    vals[inner] = amplitude * rho[inner] ** s * (1.0 + c2 * rho[inner] ** 2)
    outer = rho >= eps
    capped = np.minimum(rho[outer], sol.t[-1])
    vals[outer] = sol.sol(capped)[0]
    if rho[0] == 0.0:
        vals[0] = 0.0 if s > 0 else (amplitude if s == 0 else vals[1])
    return vals


def eigen_quotient(bvp: RadialBvp):
    """First eigenvalue together with the quotient of its eigenprofile,
    both from the dense shooting solution: the Dirichlet integral uses the
    flux component directly, so the singular branch near 0 costs no
    accuracy.  Returns (lam1, quotient, parts dict)."""
    lam1, _ = first_eigenvalue(bvp)
    sol = _shoot_linear(bvp, lam1)
    n = bvp.n
    eps, _, _, s, _ = _frobenius_start(bvp, lam1)

    def val(r):
        return float(sol.sol(r)[0])

    def flux(r):
        return float(sol.sol(r)[1])

    dir_tail = split_quad(lambda r: flux(r) ** 2 * r ** (1 - n), eps, bvp.radius)
    l2_tail = split_quad(lambda r: val(r) ** 2 * r ** (n - 1), eps, bvp.radius)
    # series head u ~ rho^s: analytic leading-order integrals
    dir_head = s * s * eps ** (2 * s + n - 2) / (2 * s + n - 2) if s != 0.0 else 0.0
    l2_head = eps ** (2 * s + n) / (2 * s + n)
    won = omega_n(n)
    dirichlet = n * won * (dir_tail + dir_head)
    l2 = n * won * (l2_tail + l2_head)
    hardy = 0.0
    if bvp.mu != 0.0:
        hardy_tail = split_quad(lambda r: val(r) ** 2 * r ** (n - 3), eps, bvp.radius)
        hardy = n * won * (hardy_tail + eps ** (2 * s + n - 2) / (2 * s + n - 2))
    quotient = (dirichlet - bvp.mu * hardy) / l2
    return lam1, quotient, {"dirichlet": dirichlet, "hardy": hardy, "l2": l2}


def _shoot_ground(bvp: RadialBvp, p: float, amplitude: float):
    n, mu, lam = bvp.n, bvp.mu, bvp.lam
    eps, u0, w0, _, _ = _frobenius_start(bvp, lam, amplitude)

    def rhs(rho, y):
        u, w = y
        up = u if u > 0.0 else 0.0
        return [
            w / rho ** (n - 1),
            rho ** (n - 1) * (lam * u - up ** (p - 1)) - mu * rho ** (n - 3) * u,
        ]

    def crossing(rho, y):
        return y[0]

    crossing.terminal = True
    crossing.direction = -1.0
    sol = integrate.solve_ivp(
        rhs, (eps, bvp.radius), [u0, w0], method="DOP853",
        rtol=1e-11, atol=1e-13, dense_output=True, events=crossing,
    )
    if sol.t_events[0].size:
        return float(sol.t_events[0][0]) - bvp.radius, sol
    return float(sol.y[0, -1]), sol


def _check_subcritical(n: int, p: float) -> None:
    if p <= 2:
        raise ValueError(f"nonlinearity exponent must exceed 2, got {p}")
    if n >= 3 and p >= 2.0 * n / (n - 2):
        raise ValueError(
            f"p = {p} is not subcritical in dimension {n} (needs p < {2 * n / (n - 2)})"
        )


def mountain_pass_solve(bvp: RadialBvp, p: Optional[float] = None) -> MountainPassSolution:
    """Nonnegative ground-state profile of the semilinear problem.

    Shooting on the initial amplitude places the first zero exactly at R;
    a banded Newton polish on the graded grid then drives the discrete
    Euler-Lagrange gradient to roundoff.  The energy level of a nontrivial
    solution is strictly positive.
    """
    if p is None:
        if not (isinstance(bvp.nonlinearity, tuple) and bvp.nonlinearity[0] == "power"):
            raise ValueError("mountain_pass_solve needs a power nonlinearity")
        p = bvp.nonlinearity[1]
    _check_subcritical(bvp.n, p)
    _check_mu(bvp.n, bvp.mu)
    s_bound = bvp.spectral_bound()
    if bvp.lam <= -s_bound:
        raise ValueError(
            f"lambda = {bvp.lam} is at or below the spectral bound -{s_bound}; "
            "the shifted quadratic form degenerates on the eigen-branch"
        )

    scale = max(1.0, bvp.lam, s_bound) ** (1.0 / (p - 2.0))
    a_lo = 1e-3 * scale
    g_lo, _ = _shoot_ground(bvp, p, a_lo)
    for _ in range(40):
        if g_lo > 0.0:
            break
        a_lo *= 0.25
        g_lo, _ = _shoot_ground(bvp, p, a_lo)
    else:
        raise RuntimeError("no solution found in bracket: lower amplitude")
    a_hi = max(a_lo * 4.0, scale)
    g_hi, _ = _shoot_ground(bvp, p, a_hi)
    for _ in range(60):
        if g_hi < 0.0:
            break
        a_hi *= 2.0
        g_hi, _ = _shoot_ground(bvp, p, a_hi)
    else:
        raise RuntimeError("no solution found in bracket: amplitude sweep exhausted")

    amp = optimize.brentq(
        lambda a: _shoot_ground(bvp, p, a)[0], a_lo, a_hi, xtol=1e-13 * scale, rtol=1e-14
    )
    _, sol = _shoot_ground(bvp, p, amp)

    rho = bvp.grid()
    vals = _sample_frobenius(rho, sol, bvp, bvp.lam, amp)
    vals[rho > sol.t[-1]] = 0.0
    vals[-1] = 0.0
    vals = np.maximum(vals, 0.0)
    shoot_vals = vals.copy()

    vals = _newton_polish(vals, bvp, p)
    # head nodes of the singular branch are representation-dependent, so the
    # shooting-vs-grid agreement is meaningful on the outer region only
    outer = rho >= 0.1 * bvp.radius
    gap = float(np.max(np.abs(vals[outer] - shoot_vals[outer])))
    gap /= max(1.0, float(np.max(np.abs(shoot_vals[outer]))))

    work = RadialBvp(
        n=bvp.n, radius=bvp.radius, mu=bvp.mu, lam=bvp.lam,
        nonlinearity=("power", p), n_nodes=bvp.n_nodes, grading=bvp.grading,
    )
    energy = radial_energy(vals, work)
    return MountainPassSolution(
        grid=rho, values=vals, amplitude=float(np.max(vals)),
        level=energy.total, energy=energy, residual=energy.residual,
        shooting_gap=gap,
    )


def _newton_polish(vals, bvp: RadialBvp, p: float, max_iter: int = 40):
    """Banded Newton on the discrete Euler-Lagrange system; the Dirichlet
    node stays pinned.  Falls back to damped steps when the full step
    grows the gradient."""
    n = bvp.n
    won = omega_n(n)
    rho = bvp.grid()
    drho, rbar, shell = _panels(rho, n)
    m = len(vals)
    free = m - 1

    def grad(u):
        g = _grad_quadratic(
            u, rho, n, bvp.mu, bvp.lam, lambda t: np.maximum(t, 0.0) ** (p - 1), won
        )
        return g[:free]

    def hess_banded(u):
        ubar = 0.5 * (u[1:] + u[:-1])
        k_diag = shell / drho
        w_mass = (bvp.lam * shell - bvp.mu * rbar ** (n - 3)) * drho
        w_nl = -(p - 1) * np.maximum(ubar, 0.0) ** (p - 2) * shell * drho
        c = 0.25 * (w_mass + w_nl)
        main = np.zeros(m)
        np.add.at(main, np.arange(m - 1), k_diag + c)
        np.add.at(main, np.arange(1, m), k_diag + c)
        off = -k_diag + c
        ab = np.zeros((3, free))
        ab[1, :] = main[:free]
        ab[0, 1:] = off[: free - 1]
        ab[2, :-1] = off[: free - 1]
        return n * won * ab

    u = vals.copy()
    g = grad(u)
    gnorm = np.linalg.norm(g)
    tol = 1e-13 * n * won * max(1.0, float(np.max(u))) * max(1.0, bvp.radius ** (n - 1))
    for _ in range(max_iter):
        if gnorm < tol:
            break
        ab = hess_banded(u)
        try:
            step = linalg.solve_banded((1, 1), ab, g)
        except linalg.LinAlgError:
            break
        t = 1.0
        for _ in range(30):
            trial = u.copy()
            trial[:free] -= t * step
            g_trial = grad(trial)
            if np.linalg.norm(g_trial) < gnorm:
                u, g = trial, g_trial
                gnorm = np.linalg.norm(g)
                break
            t *= 0.5
        else:
            break
    return u


# --- oscillatory nonlinearity with exact antiderivative ---

class OscillatoryNonlinearity:
    """Nonnegative continuous h with h(0) = 0, vanishing on the plateaus
    [2^(k^2), 2^(k^2+k)] and rising in between so that the antiderivative H
    interpolates the plateau values a_k^p with a C^1 smoothstep.  H is
    exact, which keeps the energies cheap.
    """

    def __init__(self, p: float, k_cap: int = 12):
        if p <= 2:
            raise ValueError("growth exponent must exceed 2")
        self.p = float(p)
        a = [2.0 ** (k * k) for k in range(1, k_cap + 1)]
        b = [2.0 ** (k * k + k) for k in range(1, k_cap + 1)]
        self.plateau_lo = np.asarray(a)
        self.plateau_hi = np.asarray(b)
        # breakpoints: rise_k = [b_{k-1}, a_k] with b_0 = 1
        self.rise_lo = np.concatenate(([1.0], self.plateau_hi[:-1]))
        self.rise_hi = self.plateau_lo
        self.levels = np.concatenate(([0.0], self.plateau_lo ** self.p))

    def plateau(self, k: int):
        return float(self.plateau_lo[k - 1]), float(self.plateau_hi[k - 1])

    def _locate(self, s):
        # region index: 2j for rise j, 2j+1 for plateau j (0-based)
        edges = np.empty(2 * len(self.rise_lo))
        edges[0::2] = self.rise_lo
        edges[1::2] = self.rise_hi
        return np.searchsorted(edges, s, side="right")

    def H(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        pos = s > self.rise_lo[0]
        if not np.any(pos):
            return out if out.ndim else float(out)
        idx = self._locate(s[pos])
        region = (idx - 1) // 2
        region = np.clip(region, 0, len(self.rise_lo) - 1)
        on_rise = (idx % 2) == 1
        lo_lvl = self.levels[region]
        hi_lvl = self.levels[region + 1]
        vals = np.where(on_rise, lo_lvl, hi_lvl)
        rise_pos = on_rise & (idx >= 1)
        if np.any(rise_pos):
            r = region[rise_pos]
            tau = (s[pos][rise_pos] - self.rise_lo[r]) / (self.rise_hi[r] - self.rise_lo[r])
            tau = np.clip(tau, 0.0, 1.0)
            smooth = tau * tau * (3.0 - 2.0 * tau)
            vals = vals.copy()
            vals[rise_pos] = self.levels[r] + (self.levels[r + 1] - self.levels[r]) * smooth
        out[pos] = vals
        return out if out.ndim else float(out)

    def h(self, s):
        return self._rise_eval(s, lambda dlvl, tau, w: dlvl * 6.0 * tau * (1.0 - tau) / w)

    def dh(self, s):
        return self._rise_eval(s, lambda dlvl, tau, w: dlvl * 6.0 * (1.0 - 2.0 * tau) / (w * w))

    def _rise_eval(self, s, fn):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        pos = s > self.rise_lo[0]
        if not np.any(pos):
            return out if out.ndim else float(out)
        idx = self._locate(s[pos])
        region = np.clip((idx - 1) // 2, 0, len(self.rise_lo) - 1)
        on_rise = (idx % 2) == 1
        if np.any(on_rise):
            r = region[on_rise]
            width = self.rise_hi[r] - self.rise_lo[r]
            tau = (s[pos][on_rise] - self.rise_lo[r]) / width
            tau = np.clip(tau, 0.0, 1.0)
            dvals = fn(self.levels[r + 1] - self.levels[r], tau, width)
            tmp = np.zeros(int(np.sum(pos)))
            tmp[on_rise] = dvals
            out[pos] = tmp
        return out if out.ndim else float(out)


def multiplicity_explore(
    bvp: RadialBvp,
    h: Optional[OscillatoryNonlinearity] = None,
    lam: Optional[float] = None,
    k_max: int = 3,
    p: Optional[float] = None,
):
    """Look for distinct critical profiles of the p-energy with an
    oscillatory nonlinearity by minimizing over nested height truncations.

    Each truncation caps the profile at the top of one plateau; a minimizer
    whose height settles strictly inside the plateau is a critical point of
    the untruncated energy (the nonlinearity vanishes there, so the cap is
    inactive).  Returns the distinct stationary profiles found; fewer than
    two distinct hits is a warning, not an error.  No existence claim is
    made beyond what is found.
    """
    if p is None:
        if isinstance(bvp.nonlinearity, tuple) and bvp.nonlinearity[0] == "general":
            raise ValueError("pass the energy exponent p explicitly")
        raise ValueError("multiplicity exploration needs the energy exponent p")
    if p <= bvp.n:
        raise ValueError(f"needs p > n, got p = {p}, n = {bvp.n}")
    if h is None:
        h = OscillatoryNonlinearity(p)
    lam = bvp.lam if lam is None else float(lam)
    n = bvp.n
    won = omega_n(n)
    # no singular weight here, so a uniform grid keeps the p-energy Hessian
    # well conditioned; graded boundary panels raised to p-1 stall L-BFGS-B
    m = min(bvp.n_nodes, 513)
    rho = np.linspace(0.0, bvp.radius, m)
    drho, rbar, shell = _panels(rho, n)

    def objective(u):
        du = np.diff(u)
        ubar = 0.5 * (u[1:] + u[:-1])
        e = n * won * (
            float(np.sum(np.abs(du / drho) ** p * shell * drho)) / p
            - lam * float(np.sum(np.asarray(h.H(ubar)) * shell * drho))
        )
        return e, _grad_plaplace(u, rho, n, p, lam, h.h, won)

    profiles = []
    zero_seen = False
    prev = None
    for k in range(1, k_max + 1):
        a_k, b_k = h.plateau(k)
        bounds = [(0.0, b_k)] * (m - 1) + [(0.0, 0.0)]
        starts = []
        ramp = np.clip(2.5 * (1.0 - rho / bvp.radius), 0.0, 1.0)
        starts.append(0.98 * a_k * ramp)
        if prev is not None:
            starts.append(np.minimum(prev * (a_k / max(np.max(prev), 1e-12)), b_k))
        best = None
        for u0 in starts:
            res = optimize.minimize(
                objective, u0, jac=True, method="L-BFGS-B", bounds=bounds,
                options={"maxiter": 4000, "ftol": 1e-14, "gtol": 1e-12, "maxcor": 40},
            )
            if best is None or res.fun < best.fun:
                best = res
        u = _polish_plaplace(np.asarray(best.x), rho, n, p, lam, h, b_k, won)
        sup = float(np.max(u))
        level, g = objective(u)
        scale = n * won * max(1.0, sup ** (p - 1)) * max(1.0, bvp.radius ** (n - 1))
        residual, _ = _kkt_residual(u, g, b_k, scale)
        at_hi = u >= b_k * (1.0 - 1e-12)
        bound_active = bool(np.any(at_hi & (g < -1e-10 * scale)))
        if sup < 1e-8:
            zero_seen = True
            prev = None
            continue
        if bound_active:
            prev = u
            continue
        profiles.append(CriticalProfile(
            grid=rho, values=u, sup=sup, level=float(level), residual=residual,
            truncation=b_k, bound_active=bound_active,
        ))
        prev = u

    profiles.sort(key=lambda c: c.sup)
    distinct = []
    for c in profiles:
        if all(abs(c.sup - d.sup) > 1e-6 * max(1.0, d.sup) for d in distinct):
            distinct.append(c)
    if len(distinct) < 2:
        warnings.warn(
            "multiplicity exploration found fewer than two distinct critical profiles"
            + (" (only the zero profile)" if zero_seen and not distinct else ""),
            RuntimeWarning,
        )
    return distinct


def weak_residual(vals, bvp: RadialBvp, p: float, n_tests: int = 20, seed: int = 0) -> float:
    """Largest pairing of the Euler-Lagrange form against random smooth
    test profiles vanishing at R, normalized by the solution scale."""
    rho = bvp.grid()
    vals = _as_nodal(vals, rho)
    n = bvp.n
    won = omega_n(n)
    drho, rbar, shell = _panels(rho, n)
    du = np.diff(vals) / drho
    ubar = 0.5 * (vals[1:] + vals[:-1])
    rng = np.random.default_rng(seed)
    sup = float(np.max(np.abs(vals), initial=0.0))
    scale = n * won * max(1.0, sup) ** (p - 1) * max(1.0, bvp.radius ** n)
    worst = 0.0
    for _ in range(n_tests):
        coef = rng.normal(size=6) / (np.arange(1, 7) ** 2)
        c0 = rng.normal()
        phi = c0 * (1.0 - rho / bvp.radius)  # nonzero at the origin
        dphi = np.full_like(rbar, -c0 / bvp.radius)
        for j, c in enumerate(coef, start=1):
            w = j * math.pi / bvp.radius
            phi += c * np.sin(w * rho)
            dphi += c * w * np.cos(w * rbar)
        phibar = 0.5 * (phi[1:] + phi[:-1])
        core = (du * dphi + bvp.lam * ubar * phibar
                - np.maximum(ubar, 0.0) ** (p - 1) * phibar) * shell
        if bvp.mu != 0.0:
            core = core - bvp.mu * ubar * phibar * rbar ** (n - 3)
        pairing = n * won * float(np.sum(core * drho))
        worst = max(worst, abs(pairing) / scale)
    return worst
