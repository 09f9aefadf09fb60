"""One-dimensional cross-section machinery.

Everything that lives on the transverse interval (0,1): the
Dirichlet-Neumann spectrum, the Robin comparison problem and its
transcendental ground value nu0, the weighted first eigenvalue
lambda0(s) of the bent cross-section, the perturbation coefficient
beta(s, eps), the monotone function r(x) with its root x0, and the
two appendix results (Robin monotonicity, deep-well limit).

Discretizations are symmetric 3-point stencils of the weighted forms
with lumped mass; eigenvalues come from tridiagonal solves and are
upgraded to ~4th order by two-grid Richardson extrapolation where the
caller asks for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .profiles import (
    StripProfile,
    ProfileError,
    metric_f,
    metric_f_dtt,
)

__all__ = [
    "PI_HALF_SQ",
    "chi1",
    "chi1_prime",
    "dn_eigenvalues_1d",
    "solve_nu0",
    "r_function",
    "find_x0",
    "RobinProblem",
    "RobinEigenvalue",
    "robin_first_eigenvalue",
    "TransverseEigenvalue",
    "lambda0_transverse",
    "beta_coefficient",
    "effective_limit_check",
    "dirichlet_line_eigenvalues",
    "richardson",
]

PI_HALF_SQ = (math.pi / 2.0) ** 2


def chi1(t):
    """Ground transverse mode sqrt(2) sin(pi t / 2), normalized on (0,1)."""
    return math.sqrt(2.0) * np.sin(0.5 * math.pi * np.asarray(t, dtype=float))


def chi1_prime(t):
    return math.sqrt(2.0) * 0.5 * math.pi * np.cos(0.5 * math.pi * np.asarray(t, dtype=float))


def dn_eigenvalues_1d(count: int) -> np.ndarray:
    """Spectrum ((2j-1) pi/2)^2 of the Dirichlet(0)/Neumann(1) Laplacian on (0,1)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    j = np.arange(1, count + 1, dtype=float)
    return ((2.0 * j - 1.0) * math.pi / 2.0) ** 2


def solve_nu0(alpha: float) -> float:
    """First eigenvalue nu0 of the Robin comparison operator.

    For alpha > 0 solves sqrt(nu) = -alpha * tan(sqrt(nu)) on the branch
    sqrt(nu) in (pi/2, pi) by bisection; alpha = 0 is the Neumann limit
    (pi/2)^2.  Negative alpha is outside the bent-strip hypotheses.
    """
    if alpha < 0:
        raise ValueError("solve_nu0: alpha must be nonnegative (kappa_g >= 0)")
    if alpha == 0.0:
        return PI_HALF_SQ

    def g(mu):
        return mu + alpha * math.tan(mu)

    lo = math.pi / 2.0 + 1e-14
    hi = math.pi - 1e-14
    # g is strictly increasing: g -> -inf at pi/2+, g(pi-) = pi > 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = g(mid)
        if abs(val) < 1e-12 or (hi - lo) < 4.0 * np.finfo(float).eps:
            return mid * mid
        if val < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.25 * (lo + hi) ** 2


def r_function(x) -> float:
    """r(x) = x^2 (2-x) / (4 (1-x)^2 (4-5x)) on [0, 4/5)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x >= 0.8):
        raise ValueError("r_function: argument must lie in [0, 4/5)")
    out = x**2 * (2.0 - x) / (4.0 * (1.0 - x) ** 2 * (4.0 - 5.0 * x))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=1)
def find_x0() -> float:
    """Root of r(x) = (pi/2)^2 in (0, 4/5), by bisection on the monotone form."""
    target = PI_HALF_SQ
    lo, hi = 1e-12, 0.8 - 1e-12
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = r_function(mid) - target
        if abs(val) < 1e-13 or (hi - lo) < 2.0 * np.finfo(float).eps:
            return mid
        if val < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ----------------------------------------------------------------------
# discrete 1D solvers
# ----------------------------------------------------------------------

def richardson(solver: Callable[[int], float], resolution: int) -> float:
    """Two-grid (h, h/2) extrapolation of a second-order quantity."""
    coarse = solver(resolution)
    fine = solver(2 * resolution)
    return (4.0 * fine - coarse) / 3.0


def _weighted_dn_ground(weight: Callable, resolution: int) -> float:
    """First eigenvalue of -psi'' - (w'/w) psi' on (0,1), psi(0)=psi'(1)=0.

    Discretizes the weighted form int |psi'|^2 w dt / int |psi|^2 w dt
    with midpoint stiffness weights and lumped node mass.
    """
    n = int(resolution)
    if n < 16:
        raise ValueError("resolution must be >= 16")
    h = 1.0 / n
    t_mid = (np.arange(n) + 0.5) * h
    t_node = np.arange(1, n + 1) * h
    w_mid = np.asarray(weight(t_mid), dtype=float)
    w_node = np.asarray(weight(t_node), dtype=float)
    if np.any(w_mid <= 0.0) or np.any(w_node <= 0.0):
        raise ProfileError("transverse weight vanishes: eps*kappa_g >= 1")

    diag = np.empty(n)
    diag[: n - 1] = (w_mid[:-1] + w_mid[1:]) / h
    diag[n - 1] = w_mid[n - 1] / h
    off = -w_mid[1:] / h
    mass = h * w_node.copy()
    mass[-1] *= 0.5

    d = diag / mass
    e = off / np.sqrt(mass[:-1] * mass[1:])
    _, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    u = vecs[:, 0] / np.sqrt(mass)
    # Rayleigh quotient in difference form: no 1/h^2 cancellation, and
    # second-order insensitive to the eigenvector error, so the value is
    # accurate to ~1e-15 where the assembled-matrix eigenvalue drifts at
    # the ||A||*eps level
    du = np.diff(u, prepend=0.0)
    return float(np.sum(w_mid * du**2) / h / np.sum(mass * u**2))


@dataclass(frozen=True)
class RobinProblem:
    """-psi'' + V psi on (0,1) with psi(0) = 0, psi'(1) + alpha psi(1) = 0."""

    potential: Optional[Callable] = None
    robin_alpha: float = 0.0


@dataclass(frozen=True)
class RobinEigenvalue:
    eigenvalue: float
    boundary_sq: float
    norm_sq: float

    @property
    def boundary_ratio(self) -> float:
        return self.boundary_sq / self.norm_sq


def robin_first_eigenvalue(problem: RobinProblem,
                           resolution: int = 256) -> RobinEigenvalue:
    """First eigenvalue E1(alpha) plus psi1(1)^2 and ||psi1||^2.

    The boundary data feeds the monotone Robin bound
    E1(a1) <= E1(a2) + (a1 - a2) psi1(1)^2 / ||psi1||^2 with psi1 the
    eigenfunction of the larger coefficient a2 (tangent-line inequality
    of the concave map alpha -> E1(alpha)).
    """
    n = int(resolution)
    if n < 16:
        raise ValueError("resolution must be >= 16")
    h = 1.0 / n
    t_node = np.arange(1, n + 1) * h

    diag = np.full(n, 2.0 / h)
    diag[-1] = 1.0 / h
    off = np.full(n - 1, -1.0 / h)
    mass = np.full(n, h)
    mass[-1] = 0.5 * h
    if problem.potential is not None:
        diag += mass * np.asarray(problem.potential(t_node), dtype=float)
    diag[-1] += problem.robin_alpha

    d = diag / mass
    e = off / np.sqrt(mass[:-1] * mass[1:])
    _, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    u = vecs[:, 0] / np.sqrt(mass)
    norm_sq = float(np.sum(mass * u**2))
    du = np.diff(u, prepend=0.0)
    v_node = (np.asarray(problem.potential(t_node), dtype=float)
              if problem.potential is not None else 0.0)
    energy = (np.sum(du**2) / h + np.sum(mass * v_node * u**2)
              + problem.robin_alpha * u[-1] ** 2)
    return RobinEigenvalue(float(energy / norm_sq), float(u[-1] ** 2), norm_sq)


# ----------------------------------------------------------------------
# bent cross-section: lambda0(s), Sigma(s, eps), beta(s, eps)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TransverseEigenvalue:
    """Ground transverse data at one (s, eps)."""

    s: float
    epsilon: float
    lambda0: float          # first eigenvalue, affine weight h_eps
    sigma: float            # first eigenvalue, full weight f_eps
    alpha: float            # eps*kappa_g / (2 h_eps(s,1))
    nu0: Optional[float]    # Robin comparison ground value (kappa_g >= 0 only)

    @property
    def gap(self) -> float:
        return self.lambda0 - PI_HALF_SQ


def lambda0_transverse(profile: StripProfile, epsilon: float, s: float,
                       resolution: int = 256) -> TransverseEigenvalue:
    """Ground eigenvalue of the weighted cross-section operator at s.

    Solves the h_eps-weighted problem (lambda0) and the f_eps-weighted
    problem (Sigma) by the same symmetric discretization, Richardson
    extrapolated over (resolution, 2*resolution).
    """
    if epsilon <= 0:
        raise ProfileError("epsilon must be positive")
    kappa = float(np.asarray(profile.kappa_g(s), dtype=float))
    if epsilon * kappa >= 1.0:
        raise ProfileError(f"weight vanishes at s={s}: eps*kappa_g = {epsilon*kappa:.3g} >= 1")

    def h_weight(t):
        return 1.0 - epsilon * kappa * np.asarray(t, dtype=float)

    def f_weight(t):
        return metric_f(profile, epsilon, s, t)

    lam0 = richardson(lambda n: _weighted_dn_ground(h_weight, n), resolution)
    sig = richardson(lambda n: _weighted_dn_ground(f_weight, n), resolution)
    h1 = 1.0 - epsilon * kappa
    alpha = epsilon * kappa / (2.0 * h1)
    nu0 = solve_nu0(alpha) if alpha >= 0.0 else None
    return TransverseEigenvalue(float(s), float(epsilon), lam0, sig, alpha, nu0)


def beta_coefficient(profile: StripProfile, epsilon: float, s):
    """Perturbation coefficient beta(s, eps) of Sigma(s, eps).

    First term: (eps k - eps^2 k^2 - eps^2 tau^2) / f_eps(s, 1); second
    term: (1/2) int_0^1 (d_t^2 f_eps) chi1^2 dt by 64-interval composite
    Simpson quadrature.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    k = np.asarray(profile.kappa_g(s_arr), dtype=float)
    tv = np.asarray(profile.tau(s_arr), dtype=float)
    f1 = metric_f(profile, epsilon, s_arr, 1.0)
    lead = (epsilon * k - epsilon**2 * k**2 - epsilon**2 * tv**2) / f1

    m = 64
    t = np.linspace(0.0, 1.0, m + 1)
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= 1.0 / (3.0 * m)
    ftt = metric_f_dtt(profile, epsilon, s_arr[:, None], t[None, :])
    integ = (ftt * chi1(t)[None, :] ** 2) @ w
    beta = lead + 0.5 * integ
    return float(beta[0]) if np.isscalar(s) or np.asarray(s).ndim == 0 else beta


# ----------------------------------------------------------------------
# appendix: deep-well limit on the line
# ----------------------------------------------------------------------

def dirichlet_line_eigenvalues(potential: Optional[Callable], half_length: float,
                               resolution: int, count: int = 1) -> np.ndarray:
    """First eigenvalues of -u'' + V u on (-L, L) with Dirichlet ends (3-point FD)."""
    n = int(resolution)
    if n < 16:
        raise ValueError("resolution must be >= 16")
    x = np.linspace(-half_length, half_length, n + 2)[1:-1]
    h = x[1] - x[0]
    d = np.full(n, 2.0 / h**2)
    if potential is not None:
        d = d + np.asarray(potential(x), dtype=float)
    e = np.full(n - 1, -1.0 / h**2)
    return eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1),
                            eigvals_only=True)


def effective_limit_check(potential: Callable, mu_list: Sequence[float],
                          j: int = 1, half_length: float = 10.0,
                          resolution: int = 2000) -> np.ndarray:
    """lambda_j(-Delta + mu V)/mu for each mu; approaches inf V as mu grows."""
    if j < 1:
        raise ValueError("eigenvalue index j must be >= 1")
    out = []
    for mu in mu_list:
        if mu <= 0:
            raise ValueError("mu values must be positive")
        lam = dirichlet_line_eigenvalues(
            lambda x: mu * np.asarray(potential(x), dtype=float),
            half_length, resolution, count=j)[j - 1]
        out.append(lam / mu)
    return np.asarray(out)
