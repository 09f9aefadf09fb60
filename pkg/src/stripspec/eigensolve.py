"""Lowest eigenpairs of sparse symmetric pencils and resolvent gap norms.

The eigensolver is shift-invert Lanczos: factor (A - sigma B) once with a
sparse direct factorization, then run a Lanczos process in the B-inner
product with full reorthogonalization and a deterministic all-ones start
vector.  Residuals ||A x - lambda B x|| / ||B x|| are certified for every
reported pair, so repeated runs are bit-identical and a returned result
is trustworthy independent of solver internals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import splu

from .assembly import FormPair

__all__ = [
    "EigenSolveError",
    "MassNotPositiveDefinite",
    "EigResult",
    "lowest_eigenpairs",
    "resolvent_gap_norm",
    "operator_norm_power",
]


class EigenSolveError(RuntimeError):
    """Factorization failure or violated solver hypothesis."""


class MassNotPositiveDefinite(EigenSolveError):
    """A B-inner product came out nonpositive during the Lanczos sweep."""


@dataclass
class EigResult:
    """Converged lowest eigenpairs of A x = lambda B x.

    eigenvalues are ascending; eigenvectors B-orthonormal columns;
    residuals[j] = ||A x_j - lambda_j B x_j|| / ||B x_j||.  When
    found_below_shift is True the supplied shift was not below lambda_1
    and the caller should retry with a lower one.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool
    found_below_shift: bool = False

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])


def _factorize(A, B, shift):
    mat = (A - shift * B).tocsc()
    try:
        return splu(mat), shift
    except RuntimeError:
        # shift hit the spectrum: perturb once, then give up
        bumped = shift - max(1e-8, 1e-6 * abs(shift))
        try:
            return splu((A - bumped * B).tocsc()), bumped
        except RuntimeError as exc:
            raise EigenSolveError(
                f"factorization of (A - shift B) failed twice (shift={shift:g})"
            ) from exc


def lowest_eigenpairs(pair: FormPair, k: int, tol: float = 1e-9,
                      shift: float = 0.0, max_basis: int = 150,
                      check_every: int = 5) -> EigResult:
    """Compute the k lowest eigenpairs of the pencil (A, B) above `shift`.

    `shift` must lie strictly below lambda_1; the all-ones start vector is
    B-normalized, the Krylov basis fully reorthogonalized (two passes),
    and iteration stops once all k Ritz pairs meet `tol` in certified
    residual or the basis cap is reached (partial result, converged=False).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    A, B = pair.A.tocsr(), pair.B.tocsr()
    n = A.shape[0]
    if n < k:
        raise ValueError(f"pencil dimension {n} < requested pairs {k}")
    lu, shift = _factorize(A, B, shift)

    def b_inner(x, y):
        return float(x @ (B @ y))

    m_max = min(max_basis, n)
    V = np.zeros((n, m_max))
    alphas: list[float] = []
    betas: list[float] = []

    # all-ones start with a deterministic kick on the first component: the
    # plain ones vector is orthogonal to every s-antisymmetric eigenvector
    # on symmetric profiles, and full reorthogonalization would keep it so
    v = np.ones(n)
    v[0] = 2.0
    nrm2 = b_inner(v, v)
    if nrm2 <= 0:
        raise MassNotPositiveDefinite("start vector has nonpositive B-norm")
    V[:, 0] = v / np.sqrt(nrm2)

    restart_index = 0
    result: Optional[tuple] = None
    j = 0
    while j < m_max:
        w = lu.solve(B @ V[:, j])
        alphas.append(b_inner(w, V[:, j]))
        w -= alphas[-1] * V[:, j]
        if j > 0:
            w -= betas[-1] * V[:, j - 1]
        for _ in range(2):  # full reorthogonalization, two passes
            coeffs = V[:, : j + 1].T @ (B @ w)
            w -= V[:, : j + 1] @ coeffs
        wb = b_inner(w, w)
        if wb < 0:
            raise MassNotPositiveDefinite(
                "mass matrix is not positive definite (negative B-norm)")
        beta = np.sqrt(wb)

        done = False
        if (j + 1) % check_every == 0 or j + 1 == m_max or beta < 1e-13:
            result = _extract(alphas, betas, V[:, : j + 1], A, B, shift, k, tol)
            done = result is not None and result[4]
        if done and j + 1 >= k:
            return _package(result, iterations=j + 1, converged=True)

        if beta < 1e-13:
            # invariant subspace: deterministic restart with a canonical vector
            w = None
            while restart_index < n:
                cand = np.zeros(n)
                cand[restart_index] = 1.0
                restart_index += 1
                coeffs = V[:, : j + 1].T @ (B @ cand)
                cand -= V[:, : j + 1] @ coeffs
                cb = b_inner(cand, cand)
                if cb > 1e-20:
                    w, beta = cand / np.sqrt(cb), 1.0
                    break
            if w is None:
                break  # exhausted the space
            betas.append(0.0)
            if j + 1 < m_max:
                V[:, j + 1] = w
            j += 1
            continue

        betas.append(beta)
        if j + 1 < m_max:
            V[:, j + 1] = w / beta
        j += 1

    result = _extract(alphas, betas, V[:, :j], A, B, shift, k, tol)
    if result is None:
        raise EigenSolveError("Lanczos produced no admissible Ritz pairs")
    return _package(result, iterations=j, converged=result[4])


def _extract(alphas, betas, V, A, B, shift, k, tol):
    mdim = V.shape[1]
    a = np.asarray(alphas[:mdim])
    b = np.asarray(betas[: mdim - 1]) if mdim > 1 else np.empty(0)
    if mdim == 1:
        theta = a.copy()
        Y = np.ones((1, 1))
    else:
        theta, Y = eigh_tridiagonal(a, b)
    order = np.argsort(theta)[::-1]          # largest theta = lowest lambda
    found_below = bool(np.any(theta <= 0.0))
    pos = [i for i in order if theta[i] > 0.0][:k]
    if not pos:
        return None
    lams, vecs, residuals = [], [], []
    for i in pos:
        lam = shift + 1.0 / theta[i]
        x = V @ Y[:, i]
        bx = B @ x
        xn = np.sqrt(float(x @ bx))
        x /= xn
        bx /= xn
        res = float(np.linalg.norm(A @ x - lam * bx) / np.linalg.norm(bx))
        lams.append(lam)
        vecs.append(x)
        residuals.append(res)
    ok = len(lams) == k and all(r <= tol for r in residuals)
    return (np.asarray(lams), np.column_stack(vecs), np.asarray(residuals),
            found_below, ok)


def _package(result, iterations, converged):
    lams, vecs, res, found_below, _ = result
    order = np.argsort(lams)
    return EigResult(
        eigenvalues=lams[order],
        eigenvectors=vecs[:, order],
        residuals=res[order],
        iterations=iterations,
        converged=converged,
        found_below_shift=found_below,
    )


# ----------------------------------------------------------------------
# resolvent gap norm
# ----------------------------------------------------------------------

def operator_norm_power(apply_m: Callable, apply_mt: Callable, n: int,
                        tol: float = 1e-3, max_iter: int = 500,
                        min_iter: int = 20) -> float:
    """Spectral norm of a linear map by power iteration on M^T M.

    Deterministic all-ones start; the estimate grows monotonically, so
    iteration stops only after it stays relatively stable to `tol` over
    four consecutive steps (clustered singular values plateau slowly).
    """
    z = np.ones(n) / np.sqrt(n)
    sigma_prev = None
    stable = 0
    sigma = 0.0
    for it in range(max_iter):
        u = apply_m(z)
        sigma = float(np.linalg.norm(u))
        if sigma == 0.0:
            return 0.0
        z = apply_mt(u / sigma)
        zn = float(np.linalg.norm(z))
        if zn == 0.0:
            return 0.0
        z /= zn
        if sigma_prev is not None and abs(sigma - sigma_prev) <= tol * sigma:
            stable += 1
            if stable >= 4 and it + 1 >= min_iter:
                return sigma
        else:
            stable = 0
        sigma_prev = sigma
    return sigma


def _definiteness_probe(lu, A, B, iters: int = 25) -> float:
    """Rayleigh quotient of the pencil eigenvalue nearest zero."""
    z = np.ones(A.shape[0])
    z /= np.linalg.norm(z)
    for _ in range(iters):
        z = lu.solve(B @ z)
        z /= np.linalg.norm(z)
    num = float(z @ (A @ z))
    den = float(z @ (B @ z))
    return num / den


def resolvent_gap_norm(pair_l: FormPair, pair_n: FormPair,
                       tol: float = 1e-3, max_iter: int = 500,
                       check_definite: bool = True) -> float:
    """Spectral norm of A_L^{-1} B_L - A_N^{-1} B_N on the shared index space.

    The pairs must represent the *shifted, positive* operators (the caller
    folds the threshold and kappa shifts into A).  Each application of the
    difference costs one sparse solve per operator; the transpose reuses
    the same factorizations.
    """
    if pair_l.A.shape != pair_n.A.shape:
        raise ValueError("resolvent_gap_norm: pairs live on different index spaces")
    A_l, B_l = pair_l.A.tocsc(), pair_l.B.tocsr()
    A_n, B_n = pair_n.A.tocsc(), pair_n.B.tocsr()
    try:
        lu_l = splu(A_l)
        lu_n = splu(A_n)
    except RuntimeError as exc:
        raise EigenSolveError(f"factorization failed: {exc}") from exc
    if check_definite:
        for tag, lu, A, B in (("left", lu_l, A_l, B_l), ("right", lu_n, A_n, B_n)):
            rq = _definiteness_probe(lu, A, B)
            if rq <= 0:
                raise EigenSolveError(
                    f"shifted {tag} operator is not positive definite "
                    f"(pencil value nearest zero: {rq:.3g}); "
                    "check kappa + inf kappa_g > 0")

    def apply_m(x):
        return lu_l.solve(B_l @ x) - lu_n.solve(B_n @ x)

    def apply_mt(y):
        return B_l @ lu_l.solve(y) - B_n @ lu_n.solve(y)

    return operator_norm_power(apply_m, apply_mt, A_l.shape[0], tol, max_iter)
