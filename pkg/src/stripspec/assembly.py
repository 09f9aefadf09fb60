"""Sparse symmetric pairs discretizing the strip quadratic forms.

Bilinear tensor-product elements on the truncated rectangle
[-L, L] x [0, 1] with 2x2 Gauss quadrature per cell.  Dirichlet rows
(t = 0 and s = +-L) are eliminated from the unknown set; the Neumann
side t = 1 is natural and carries the boundary integrals of the
flattened forms.  Unknown ordering is t-fastest.

Longitudinal truncation uses Dirichlet conditions at s = +-L, so every
computed eigenvalue is an upper bound for the continuum one; a value
below the essential-spectrum threshold is rigorous evidence of discrete
spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.io
import scipy.sparse as sp

from . import profiles as prof
from .profiles import MissingTwistData, StripProfile

__all__ = [
    "GridSpec",
    "FormPair",
    "assemble_b",
    "assemble_d",
    "assemble_y_scaled",
    "assemble_effective_1d",
    "assemble_decoupled",
    "assemble_hardy_mass",
    "d_potential",
    "d_boundary_density",
    "y_potential",
    "y_boundary_density",
    "dn_fd_matrix",
    "dn_fd_eigenvalues",
    "transverse_fem_pair",
    "interval_fem_pair",
    "dump_matrix",
]


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid on [-L, L] x [0, 1].

    Unknowns exclude the Dirichlet nodes (t = 0 row, s = +-L columns)
    and include the Neumann row t = 1.
    """

    half_length: float
    n_s: int
    n_t: int

    def __post_init__(self):
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")
        if self.n_s < 8 or self.n_t < 8:
            raise ValueError("grid too coarse: need n_s, n_t >= 8")

    @property
    def h_s(self) -> float:
        return 2.0 * self.half_length / (self.n_s - 1)

    @property
    def h_t(self) -> float:
        return 1.0 / (self.n_t - 1)

    @property
    def s_nodes(self) -> np.ndarray:
        return np.linspace(-self.half_length, self.half_length, self.n_s)

    @property
    def t_nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_t)

    @property
    def ndof(self) -> int:
        return (self.n_s - 2) * (self.n_t - 1)

    def dof_map(self) -> np.ndarray:
        """Node (i, j) -> unknown index, -1 on Dirichlet nodes; t-fastest."""
        dof = -np.ones((self.n_s, self.n_t), dtype=np.int64)
        idx = np.arange(self.ndof, dtype=np.int64).reshape(self.n_s - 2, self.n_t - 1)
        dof[1:-1, 1:] = idx
        return dof

    def refined(self, factor: int = 2) -> "GridSpec":
        """Same domain with each cell split `factor` times per direction."""
        return GridSpec(self.half_length,
                        (self.n_s - 1) * factor + 1,
                        (self.n_t - 1) * factor + 1)


@dataclass
class FormPair:
    """Stiffness/mass pair (A, B) for a quadratic form and its inner product.

    A is exactly symmetric by construction (symmetric local blocks merged
    in sorted (row, col) order).  B is symmetric positive definite; the
    eigensolver certifies this operationally by monitoring B-inner
    products during the Lanczos sweep.
    """

    A: sp.csr_matrix
    B: sp.csr_matrix
    form_tag: str
    grid: Optional[GridSpec] = None
    nodes: Optional[np.ndarray] = None

    @property
    def ndof(self) -> int:
        return self.A.shape[0]


# 2x2 Gauss points on the unit square, weight 1/4 each
_G1 = 0.5 - 0.5 / math.sqrt(3.0)
_G2 = 0.5 + 0.5 / math.sqrt(3.0)
_QX = np.array([_G1, _G1, _G2, _G2])
_QY = np.array([_G1, _G2, _G1, _G2])
_QW = np.full(4, 0.25)
# corner ordering c = 2*a_s + a_t, a_s/a_t in {0, 1}
_CORNER_S = np.array([0, 0, 1, 1])
_CORNER_T = np.array([0, 1, 0, 1])


def _shape_values():
    l0 = lambda x: 1.0 - x
    l1 = lambda x: x
    lv = [l0, l1]
    n_val = np.empty((4, 4))
    dxi = np.empty((4, 4))
    deta = np.empty((4, 4))
    for c in range(4):
        a_s, a_t = _CORNER_S[c], _CORNER_T[c]
        n_val[c] = lv[a_s](_QX) * lv[a_t](_QY)
        dxi[c] = (1.0 if a_s else -1.0) * lv[a_t](_QY)
        deta[c] = lv[a_s](_QX) * (1.0 if a_t else -1.0)
    return n_val, dxi, deta


_NVAL, _DXI, _DETA = _shape_values()


def _dedupe_csr(rows, cols, vals, ndof):
    order = np.lexsort((cols, rows))
    r, c, v = rows[order], cols[order], vals[order]
    if len(r) == 0:
        return sp.csr_matrix((ndof, ndof))
    new_group = np.empty(len(r), dtype=bool)
    new_group[0] = True
    new_group[1:] = (np.diff(r) != 0) | (np.diff(c) != 0)
    starts = np.nonzero(new_group)[0]
    vsum = np.add.reduceat(v, starts)
    return sp.csr_matrix((vsum, (r[starts], c[starts])), shape=(ndof, ndof))


def _assemble_2d(grid: GridSpec, c_ss, c_tt, c_mass,
                 c_pot=None, c_mix=None, c_bnd=None):
    """Assemble (A, B) from coefficient callables evaluated at Gauss points.

    c_ss, c_tt weight |d_s psi|^2 and |d_t psi|^2; c_mass the inner
    product; c_pot an additional zeroth-order term in A; c_mix the
    symmetrized first-order-in-s term c(s,t) * psi d_s psi; c_bnd a mass
    density on the Neumann edge t = 1.  Each callable receives broadcast
    arrays (S, T) of quadrature coordinates.
    """
    hs, ht = grid.h_s, grid.h_t
    ncs, nct = grid.n_s - 1, grid.n_t - 1
    s_cells = grid.s_nodes[:-1]
    t_cells = grid.t_nodes[:-1]
    S = s_cells[:, None, None] + _QX[None, None, :] * hs   # (ncs, 1, 4)
    T = t_cells[None, :, None] + _QY[None, None, :] * ht   # (1, nct, 4)

    def local(coef, ga, gb, scale):
        cq = np.broadcast_to(np.asarray(coef(S, T), dtype=float) * _QW,
                             (ncs, nct, 4))
        # shape products first: for ga is gb the (a,b,q) tensor is bitwise
        # symmetric, which carries exact A = A^T through the contraction
        g2 = np.einsum("aq,bq->abq", ga, gb)
        return scale * np.einsum("ijq,abq->ijab", cq, g2)

    a_local = local(c_ss, _DXI, _DXI, ht / hs)
    a_local += local(c_tt, _DETA, _DETA, hs / ht)
    if c_pot is not None:
        a_local += local(c_pot, _NVAL, _NVAL, hs * ht)
    if c_mix is not None:
        half = local(c_mix, _NVAL, _DXI, 0.5 * ht)
        a_local += half + np.transpose(half, (0, 1, 3, 2))
    b_local = local(c_mass, _NVAL, _NVAL, hs * ht)

    dof = grid.dof_map()
    ci = np.arange(ncs)[:, None, None]
    cj = np.arange(nct)[None, :, None]
    nid = dof[ci + _CORNER_S[None, None, :], cj + _CORNER_T[None, None, :]]
    rows = np.broadcast_to(nid[:, :, :, None], (ncs, nct, 4, 4))
    cols = np.broadcast_to(nid[:, :, None, :], (ncs, nct, 4, 4))
    keep = (rows >= 0) & (cols >= 0)
    r_all = [rows[keep]]
    c_all = [cols[keep]]
    va = [a_local[keep]]
    vb = b_local[keep]

    if c_bnd is not None:
        # 1D mass on the top edge (t = 1) of the last cell row
        gx = np.array([_G1, _G2])
        sq = s_cells[:, None] + gx[None, :] * hs
        cq = np.asarray(c_bnd(sq), dtype=float) * 0.5        # 2-pt weights 1/2
        shp = np.array([1.0 - gx, gx])                       # (2 corners, 2 q)
        shp2 = np.einsum("aq,bq->abq", shp, shp)
        loc = hs * np.einsum("iq,abq->iab", cq, shp2)
        top = dof[:, -1]
        eid = np.stack([top[:-1], top[1:]], axis=1)          # (ncs, 2)
        er = np.broadcast_to(eid[:, :, None], (ncs, 2, 2))
        ec = np.broadcast_to(eid[:, None, :], (ncs, 2, 2))
        ek = (er >= 0) & (ec >= 0)
        r_all.append(er[ek])
        c_all.append(ec[ek])
        va.append(loc[ek])

    rows = np.concatenate(r_all)
    cols = np.concatenate(c_all)
    A = _dedupe_csr(rows, cols, np.concatenate(va), grid.ndof)
    B = _dedupe_csr(r_all[0], c_all[0], vb, grid.ndof)
    return A, B


def assemble_b(profile: StripProfile, epsilon: float, grid: GridSpec) -> FormPair:
    """Weighted form b_eps: int |d_s psi|^2/f + (1/eps^2) int |d_t psi|^2 f,
    inner product int |psi|^2 f."""
    prof.require_valid(profile, epsilon)

    def f(S, T):
        return prof.metric_f(profile, epsilon, S, T)

    A, B = _assemble_2d(
        grid,
        c_ss=lambda S, T: 1.0 / f(S, T),
        c_tt=lambda S, T: f(S, T) / epsilon**2,
        c_mass=f,
    )
    return FormPair(A, B, "b_eps", grid)


def d_potential(profile: StripProfile, epsilon: float, S, T):
    """Effective potential V_eps of the flattened form d_eps."""
    e = epsilon
    fv = prof.metric_f(profile, e, S, T)
    fs = prof.metric_f_ds(profile, e, S, T)
    ft = prof.metric_f_dt(profile, e, S, T)
    ftt = prof.metric_f_dtt(profile, e, S, T)
    return (0.25 * fs**2 / fv**4
            - 0.25 * ft**2 / (e**2 * fv**2)
            + 0.5 * ftt / (e**2 * fv))


def d_boundary_density(profile: StripProfile, epsilon: float, s):
    """Neumann boundary density v_eps(s) of d_eps on the edge t = 1."""
    e = epsilon
    k = np.asarray(profile.kappa_g(s), dtype=float)
    tv = np.asarray(profile.tau(s), dtype=float)
    f1_sq = (1.0 - e * k) ** 2 + (e * tv) ** 2
    return (k - e * k**2 - e * tv**2) / (2.0 * e * f1_sq)


def assemble_d(profile: StripProfile, epsilon: float, grid: GridSpec) -> FormPair:
    """Flattened form d_eps (flat measure, effective potential V_eps,
    symmetrized mixed term, Neumann boundary density v_eps)."""
    prof.require_valid(profile, epsilon)
    if not profile.has_derivative_data:
        raise MissingTwistData(
            f"profile {profile.name!r}: d_eps needs twist derivative data")

    e = epsilon

    def f(S, T):
        return prof.metric_f(profile, e, S, T)

    A, B = _assemble_2d(
        grid,
        c_ss=lambda S, T: 1.0 / f(S, T) ** 2,
        c_tt=lambda S, T: np.full(np.broadcast_shapes(S.shape, T.shape),
                                  1.0 / e**2),
        c_mass=lambda S, T: np.ones(np.broadcast_shapes(S.shape, T.shape)),
        c_pot=lambda S, T: d_potential(profile, e, S, T),
        c_mix=lambda S, T: -prof.metric_f_ds(profile, e, S, T) / f(S, T) ** 3,
        c_bnd=lambda s: d_boundary_density(profile, e, s),
    )
    return FormPair(A, B, "d_eps", grid)


def y_potential(profile: StripProfile, epsilon: float, S, T):
    """Effective potential W_eps of the scaled form (converges to tau^2/2)."""
    e = epsilon
    hv = prof.metric_h_scaled(profile, e, S, T)
    hs = prof.metric_h_ds(profile, e, S, T)
    ht = prof.metric_h_dt(profile, e, S, T)
    htt = prof.metric_h_dtt(profile, e, S, T)
    return (0.25 * hs**2 / hv**4
            - 0.25 * ht**2 / (e * hv**2)
            + 0.5 * htt / (e * hv))


def y_boundary_density(profile: StripProfile, epsilon: float, s):
    """Boundary density w_eps(s) of the scaled form on the edge t = 1."""
    e = epsilon
    k = np.asarray(profile.kappa_g(s), dtype=float)
    tv = np.asarray(profile.tau(s), dtype=float)
    h1_sq = (1.0 - e * k) ** 2 + e * tv**2
    return (k - e * k**2 - tv**2) / (2.0 * h1_sq)


def assemble_y_scaled(profile: StripProfile, epsilon: float,
                      grid: GridSpec) -> FormPair:
    """Scaled-strip form assembled as eps * y_eps (Theorem-8 normalization).

    Uses the dilated weight h~_eps; the transverse stiffness carries 1/eps
    (not 1/eps^2), W_eps and the boundary density w_eps are the dilated
    analogues of V_eps and v_eps.
    """
    prof.require_valid(profile, epsilon)
    if not profile.has_derivative_data:
        raise MissingTwistData(
            f"profile {profile.name!r}: y_eps needs twist derivative data")

    e = epsilon

    def h(S, T):
        return prof.metric_h_scaled(profile, e, S, T)

    A, B = _assemble_2d(
        grid,
        c_ss=lambda S, T: 1.0 / h(S, T) ** 2,
        c_tt=lambda S, T: np.full(np.broadcast_shapes(S.shape, T.shape), 1.0 / e),
        c_mass=lambda S, T: np.ones(np.broadcast_shapes(S.shape, T.shape)),
        c_pot=lambda S, T: y_potential(profile, e, S, T),
        c_mix=lambda S, T: -prof.metric_h_ds(profile, e, S, T) / h(S, T) ** 3,
        c_bnd=lambda s: y_boundary_density(profile, e, s),
    )
    return FormPair(A, B, "y_eps", grid)


# ----------------------------------------------------------------------
# 1D building blocks and the decoupled operator
# ----------------------------------------------------------------------

def assemble_effective_1d(potential: Optional[Callable], half_length: float,
                          n: int) -> FormPair:
    """Tridiagonal  -u'' + V u  on (-L, L), Dirichlet ends, identity mass."""
    if n < 16:
        raise ValueError("need n >= 16 nodes")
    x = np.linspace(-half_length, half_length, n)[1:-1]
    h = 2.0 * half_length / (n - 1)
    m = n - 2
    d = np.full(m, 2.0 / h**2)
    if potential is not None:
        d = d + np.asarray(potential(x), dtype=float)
    e = np.full(m - 1, -1.0 / h**2)
    A = sp.diags([e, d, e], [-1, 0, 1], format="csr")
    B = sp.identity(m, format="csr")
    return FormPair(A, B, "effective_1d", nodes=x)


def dn_fd_matrix(n_unknowns: int, h: float) -> sp.csr_matrix:
    """Symmetrized finite-difference Dirichlet(0)/Neumann(1) Laplacian.

    Spectrum (4/h^2) sin^2((2m-1) pi h / 4); the Neumann end is the
    lumped-mass symmetrization, hence the sqrt(2) in the last coupling.
    """
    d = np.full(n_unknowns, 2.0 / h**2)
    e = np.full(n_unknowns - 1, -1.0 / h**2)
    e[-1] = -math.sqrt(2.0) / h**2
    return sp.diags([e, d, e], [-1, 0, 1], format="csr")


def dn_fd_eigenvalues(n_unknowns: int, h: float, count: int) -> np.ndarray:
    m = np.arange(1, count + 1, dtype=float)
    return (4.0 / h**2) * np.sin((2.0 * m - 1.0) * math.pi * h / 4.0) ** 2


def assemble_decoupled(profile: StripProfile, epsilon: float,
                       grid: GridSpec) -> FormPair:
    """Kronecker sum H_eps = (-Delta + kappa_g/eps) (x) I + I (x) (DN/eps^2).

    Both factors live on the 2D grid's own 1D node sets, so the pair
    shares the index space of the 2D assemblies; identity mass.
    """
    prof.require_valid(profile, epsilon)
    pair_s = assemble_effective_1d(
        lambda x: np.asarray(profile.kappa_g(x), dtype=float) / epsilon,
        grid.half_length, grid.n_s)
    S_t = dn_fd_matrix(grid.n_t - 1, grid.h_t)
    m, nt = grid.n_s - 2, grid.n_t - 1
    A = (sp.kron(pair_s.A, sp.identity(nt), format="csr")
         + sp.kron(sp.identity(m), S_t, format="csr") / epsilon**2)
    B = sp.identity(grid.ndof, format="csr")
    return FormPair(A, B, "decoupled", grid)


def assemble_hardy_mass(grid: GridSpec, weight_center: float = 0.0,
                        profile: Optional[StripProfile] = None,
                        epsilon: Optional[float] = None) -> sp.csr_matrix:
    """Mass matrix with weight rho(s - center) * f_eps (or * 1) for the
    Hardy Rayleigh quotient, rho(s) = 1/(1+s^2)."""
    def c_mass(S, T):
        rho = 1.0 / (1.0 + (S - weight_center) ** 2)
        if profile is not None:
            return rho * prof.metric_f(profile, epsilon, S, T)
        return rho * np.ones(np.broadcast_shapes(S.shape, T.shape))

    _, B = _assemble_2d(
        grid,
        c_ss=lambda S, T: np.zeros(np.broadcast_shapes(S.shape, T.shape)),
        c_tt=lambda S, T: np.zeros(np.broadcast_shapes(S.shape, T.shape)),
        c_mass=c_mass,
    )
    return B


def transverse_fem_pair(n_t: int, h_t: float):
    """1D P1 pair on (0,1), Dirichlet at 0, natural at 1 (n_t-1 unknowns)."""
    n = n_t - 1
    kd = np.full(n, 2.0 / h_t)
    kd[-1] = 1.0 / h_t
    ke = np.full(n - 1, -1.0 / h_t)
    md = np.full(n, 4.0 * h_t / 6.0)
    md[-1] = 2.0 * h_t / 6.0
    me = np.full(n - 1, h_t / 6.0)
    K = sp.diags([ke, kd, ke], [-1, 0, 1], format="csr")
    M = sp.diags([me, md, me], [-1, 0, 1], format="csr")
    return K, M


def interval_fem_pair(half_length: float, n_s: int):
    """1D P1 pair on (-L, L) with Dirichlet ends (n_s-2 unknowns)."""
    h = 2.0 * half_length / (n_s - 1)
    n = n_s - 2
    K = sp.diags([np.full(n - 1, -1.0 / h), np.full(n, 2.0 / h),
                  np.full(n - 1, -1.0 / h)], [-1, 0, 1], format="csr")
    M = sp.diags([np.full(n - 1, h / 6.0), np.full(n, 4.0 * h / 6.0),
                  np.full(n - 1, h / 6.0)], [-1, 0, 1], format="csr")
    return K, M


def dump_matrix(matrix: sp.spmatrix, path) -> None:
    """MatrixMarket coordinate dump for external cross-checks."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(matrix))
