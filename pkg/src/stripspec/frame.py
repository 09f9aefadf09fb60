"""Relatively parallel adapted frames and the strip embedding.

Integrates the linear frame system

    T'   =  k_1 N_1 + ... + k_n N_n
    N_j' = -k_j T

with a classical 4th-order one-step method, realizes the embedding
L_eps(s,t) = Gamma(s) + eps t N_Theta(s), and cross-validates the
closed-form metric against the numerically computed first fundamental
form.  The embedding is for visualization and metric validation only;
all spectral computations use the (kappa_g, tau) closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .profiles import MissingTwistData, StripProfile

__all__ = [
    "FrameError",
    "FramePath",
    "integrate_frame",
    "embed",
    "first_fundamental_form",
    "write_xyz",
]


class FrameError(ValueError):
    """Bad frame data (non-orthonormal start, non-finite curvature, ...)."""


@dataclass(frozen=True)
class FramePath:
    """Frame samples on a uniform s-grid.

    frames[m] has rows (T, N_1, ..., N_n) at s[m]; gamma[m] is the curve
    point.  drift is the largest orthonormality defect max|F F^T - I|
    observed before any re-orthonormalization.
    """

    s: np.ndarray
    gamma: np.ndarray
    frames: np.ndarray
    drift: float

    @property
    def n_normals(self) -> int:
        return self.frames.shape[1] - 1

    def gram_defect(self) -> float:
        eye = np.eye(self.frames.shape[1])
        g = self.frames @ np.transpose(self.frames, (0, 2, 1))
        return float(np.max(np.abs(g - eye)))


def _default_frame(n: int) -> np.ndarray:
    return np.eye(n + 1)


def _gram_schmidt(rows: np.ndarray) -> np.ndarray:
    out = rows.copy()
    for i in range(out.shape[0]):
        for j in range(i):
            out[i] -= (out[i] @ out[j]) * out[j]
        out[i] /= np.linalg.norm(out[i])
    return out


def integrate_frame(curvatures: Sequence[Callable], s_range,
                    step: float,
                    initial_frame: Optional[np.ndarray] = None,
                    initial_point: Optional[np.ndarray] = None,
                    renormalize_every: int = 1000) -> FramePath:
    """Integrate the frame system over s_range = (s0, s1) with fixed step.

    The initial frame must be orthonormal within 1e-12 (any orthonormal
    completion of T(s0) is admissible; different choices differ by a
    constant rotation of the normal bundle).  Frames are re-orthonormalized
    by modified Gram-Schmidt every ``renormalize_every`` steps and the
    drift before each cleanup is reported as a quality metric.
    """
    if step <= 0:
        raise FrameError("step must be positive")
    n = len(curvatures)
    if n < 1:
        raise FrameError("need at least one curvature function")
    s0, s1 = float(s_range[0]), float(s_range[1])
    if s1 <= s0:
        raise FrameError("s_range must be increasing")

    frame = _default_frame(n) if initial_frame is None else np.array(initial_frame, dtype=float)
    if frame.shape[0] != n + 1 or frame.shape[1] < n + 1:
        raise FrameError(f"initial frame must have {n + 1} rows spanning R^d, d >= {n + 1}")
    defect = np.max(np.abs(frame @ frame.T - np.eye(n + 1)))
    if defect > 1e-12:
        raise FrameError(f"initial frame not orthonormal: defect {defect:.3g}")
    d = frame.shape[1]
    gamma = np.zeros(d) if initial_point is None else np.asarray(initial_point, dtype=float)

    # snap the step so the grid lands exactly on s1
    m = max(int(round((s1 - s0) / step)), 1)
    step = (s1 - s0) / m
    s_nodes = s0 + step * np.arange(m + 1)

    def rhs(s, g, fr):
        k = np.array([float(kj(s)) for kj in curvatures])
        if not np.all(np.isfinite(k)):
            raise FrameError(f"non-finite curvature at s = {s:.6g}: {k}")
        dfr = np.empty_like(fr)
        dfr[0] = k @ fr[1:]
        dfr[1:] = -np.outer(k, fr[0])
        return fr[0].copy(), dfr

    eye = np.eye(n + 1)
    frames = np.empty((m + 1, n + 1, d))
    points = np.empty((m + 1, d))
    frames[0], points[0] = frame, gamma
    drift = 0.0

    for i in range(m):
        s = s_nodes[i]
        g1, f1 = rhs(s, gamma, frame)
        g2, f2 = rhs(s + 0.5 * step, gamma + 0.5 * step * g1, frame + 0.5 * step * f1)
        g3, f3 = rhs(s + 0.5 * step, gamma + 0.5 * step * g2, frame + 0.5 * step * f2)
        g4, f4 = rhs(s + step, gamma + step * g3, frame + step * f3)
        gamma = gamma + (step / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4)
        frame = frame + (step / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
        if (i + 1) % renormalize_every == 0:
            drift = max(drift, float(np.max(np.abs(frame @ frame.T - eye))))
            frame = _gram_schmidt(frame)
        frames[i + 1], points[i + 1] = frame, gamma

    drift = max(drift, float(np.max(np.abs(frame @ frame.T - eye))))
    return FramePath(s_nodes, points, frames, drift)


def embed(profile: StripProfile, path: FramePath, epsilon: float,
          t_nodes) -> np.ndarray:
    """Evaluate L_eps(s,t) = Gamma(s) + eps t N_Theta(s) on the grid.

    Returns an array of shape (len(path.s), len(t_nodes), d).  For one
    normal the profile must be twist-free (N_Theta = N_1); for two
    normals the angle components realize N_Theta = cos(theta) N_1 +
    sin(theta) N_2.
    """
    if epsilon <= 0:
        raise FrameError("epsilon must be positive")
    t = np.asarray(t_nodes, dtype=float)
    n = path.n_normals
    if n == 1:
        if not profile.tau_is_zero:
            raise MissingTwistData(
                "twisted profile needs two normal fields (n = 2)")
        n_theta = path.frames[:, 1, :]
    elif n == 2:
        if profile.tau_components is None:
            if not profile.tau_is_zero:
                raise MissingTwistData(
                    f"profile {profile.name!r} lacks angle components")
            n_theta = path.frames[:, 1, :]
        else:
            theta = np.asarray(profile.tau_components.theta(path.s), dtype=float)
            n_theta = (np.cos(theta)[:, None] * path.frames[:, 1, :]
                       + np.sin(theta)[:, None] * path.frames[:, 2, :])
    else:
        raise MissingTwistData("embedding supports n = 1 or n = 2 normals only")
    return (path.gamma[:, None, :]
            + epsilon * t[None, :, None] * n_theta[:, None, :])


def first_fundamental_form(points: np.ndarray, i: int, j: int,
                           h_s: float, h_t: float) -> np.ndarray:
    """Central-difference first fundamental form at interior grid point (i, j)."""
    ns, nt = points.shape[0], points.shape[1]
    if not (1 <= i < ns - 1 and 1 <= j < nt - 1):
        raise ValueError(f"({i}, {j}) is not interior: stencil incomplete")
    ds = (points[i + 1, j] - points[i - 1, j]) / (2.0 * h_s)
    dt = (points[i, j + 1] - points[i, j - 1]) / (2.0 * h_t)
    return np.array([[ds @ ds, ds @ dt], [dt @ ds, dt @ dt]])


def write_xyz(points: np.ndarray, path) -> None:
    """Dump the embedded point cloud, one whitespace-separated point per line."""
    flat = np.asarray(points, dtype=float).reshape(-1, points.shape[-1])
    with open(path, "w", encoding="ascii") as fh:
        for row in flat:
            fh.write(" ".join(format(v, ".17g") for v in row) + "\n")
