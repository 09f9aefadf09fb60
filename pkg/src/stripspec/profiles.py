"""Strip profiles: the curvature/twist data that determines the ruled-strip metric.

A profile carries the geodesic curvature ``kappa_g`` and the twist speed
``tau`` as plain callables (vectorized over numpy arrays), together with
declared sup-norm bounds and a decay class.  The metric weight

    f_eps(s, t) = sqrt((1 - eps*t*kappa_g(s))^2 + eps^2 t^2 tau(s)^2)

and its closed-form derivatives live here as well, so every downstream
assembly routine differentiates analytically instead of numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import erf

__all__ = [
    "ProfileError",
    "MissingTwistData",
    "TwistComponents",
    "DecayClass",
    "StripProfile",
    "ValidationCheck",
    "ValidationReport",
    "validate",
    "require_valid",
    "metric_f",
    "metric_f_ds",
    "metric_f_dt",
    "metric_f_dtt",
    "metric_h_scaled",
    "metric_h_ds",
    "metric_h_dt",
    "metric_h_dtt",
    "zero_profile",
    "constant_profile",
    "gaussian_bump",
    "smooth_compact_bump",
    "gaussian_twist",
    "rational_twist",
    "combine",
    "build_family",
]


class ProfileError(ValueError):
    """Invalid profile data or violated validation hypothesis."""


class MissingTwistData(ProfileError):
    """Operation needs the angle components theta, theta', theta''."""


@dataclass(frozen=True)
class TwistComponents:
    """Angle realization Theta = (cos theta, sin theta) for n = 2."""

    theta: Callable
    theta_prime: Callable
    theta_double_prime: Callable


@dataclass(frozen=True)
class DecayClass:
    """Behavior of kappa_g and tau as |s| -> infinity.

    kind is one of ``compact_support`` (with ``radius``),
    ``rational_decay`` (with ``delta``: |value| <= delta/(1+s^2)) or
    ``none``.
    """

    kind: str
    radius: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("compact_support", "rational_decay", "none"):
            raise ProfileError(f"unknown decay class {self.kind!r}")


@dataclass(frozen=True)
class StripProfile:
    """Curvature/twist data of a ruled strip.

    ``kappa_g`` is the geodesic curvature k.Theta, ``tau`` the twist speed
    |Theta'| (nonnegative), ``kappa_g_prime`` the derivative (k.Theta)'.
    The sup_* fields are declared bounds audited by :func:`validate`.
    """

    kappa_g: Callable
    tau: Callable
    kappa_g_prime: Callable
    sup_kappa: float
    sup_tau: float
    sup_tau_prime: float
    decay: DecayClass
    tau_components: Optional[TwistComponents] = None
    tau_is_zero: bool = False
    name: str = "profile"

    def tau_tau_prime(self, s):
        """tau * tau' = theta' * theta'', needed by the d_eps/y_eps weights."""
        if self.tau_is_zero:
            return np.zeros_like(np.asarray(s, dtype=float))
        if self.tau_components is None:
            raise MissingTwistData(
                f"profile {self.name!r}: tau*tau' requires angle components"
            )
        c = self.tau_components
        return np.asarray(c.theta_prime(s)) * np.asarray(c.theta_double_prime(s))

    @property
    def has_derivative_data(self) -> bool:
        """True when the d_eps / y_eps assemblies can be formed."""
        return self.tau_is_zero or self.tau_components is not None


# ----------------------------------------------------------------------
# metric weights and closed-form derivatives
# ----------------------------------------------------------------------

def metric_f(profile: StripProfile, eps: float, s, t):
    """f_eps(s,t) = sqrt((1 - eps t kappa_g)^2 + eps^2 t^2 tau^2)."""
    k = np.asarray(profile.kappa_g(s), dtype=float)
    tv = np.asarray(profile.tau(s), dtype=float)
    t = np.asarray(t, dtype=float)
    return np.sqrt((1.0 - eps * t * k) ** 2 + (eps * t * tv) ** 2)


def metric_f_dt(profile, eps, s, t):
    k = np.asarray(profile.kappa_g(s), dtype=float)
    tv = np.asarray(profile.tau(s), dtype=float)
    t = np.asarray(t, dtype=float)
    f = metric_f(profile, eps, s, t)
    return (-eps * k * (1.0 - eps * t * k) + eps**2 * t * tv**2) / f


def metric_f_ds(profile, eps, s, t):
    k = np.asarray(profile.kappa_g(s), dtype=float)
    kp = np.asarray(profile.kappa_g_prime(s), dtype=float)
    ttp = profile.tau_tau_prime(s)
    t = np.asarray(t, dtype=float)
    f = metric_f(profile, eps, s, t)
    return (-eps * t * kp * (1.0 - eps * t * k) + eps**2 * t**2 * ttp) / f


def metric_f_dtt(profile, eps, s, t):
    k = np.asarray(profile.kappa_g(s), dtype=float)
    tv = np.asarray(profile.tau(s), dtype=float)
    f = metric_f(profile, eps, s, t)
    ft = metric_f_dt(profile, eps, s, t)
    return (eps**2 * (k**2 + tv**2) - ft**2) / f


def metric_h_scaled(profile: StripProfile, eps: float, s, t):
    """h~_eps(s,t) = sqrt((1 - eps t kappa_g)^2 + eps t^2 tau^2).

    First power of eps on the twist term; this is the weight of the
    horizontally dilated strip.
    """
    k = np.asarray(profile.kappa_g(s), dtype=float)
    tv = np.asarray(profile.tau(s), dtype=float)
    t = np.asarray(t, dtype=float)
    return np.sqrt((1.0 - eps * t * k) ** 2 + eps * (t * tv) ** 2)


def metric_h_dt(profile, eps, s, t):
    k = np.asarray(profile.kappa_g(s), dtype=float)
    tv = np.asarray(profile.tau(s), dtype=float)
    t = np.asarray(t, dtype=float)
    h = metric_h_scaled(profile, eps, s, t)
    return (-eps * k * (1.0 - eps * t * k) + eps * t * tv**2) / h


def metric_h_ds(profile, eps, s, t):
    k = np.asarray(profile.kappa_g(s), dtype=float)
    kp = np.asarray(profile.kappa_g_prime(s), dtype=float)
    ttp = profile.tau_tau_prime(s)
    t = np.asarray(t, dtype=float)
    h = metric_h_scaled(profile, eps, s, t)
    return (-eps * t * kp * (1.0 - eps * t * k) + eps * t**2 * ttp) / h


def metric_h_dtt(profile, eps, s, t):
    k = np.asarray(profile.kappa_g(s), dtype=float)
    tv = np.asarray(profile.tau(s), dtype=float)
    h = metric_h_scaled(profile, eps, s, t)
    ht = metric_h_dt(profile, eps, s, t)
    return (eps**2 * k**2 + eps * tv**2 - ht**2) / h


# ----------------------------------------------------------------------
# validation
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str
    hard: bool = False


@dataclass(frozen=True)
class ValidationReport:
    profile_name: str
    epsilon: float
    checks: tuple
    flat: bool

    @property
    def ok(self) -> bool:
        """No hard failure: metric positive, bounds honored, data finite."""
        return all(c.passed for c in self.checks if c.hard)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ValidationCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary_lines(self):
        return [
            f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}"
            for c in self.checks
        ]


def _sample_grid(reference_length: float):
    # uniform core plus geometric tails out to 1e3 * L for decay auditing
    core = np.linspace(-reference_length, reference_length, 2001)
    tail = np.geomspace(reference_length, 1e3 * reference_length, 200)
    return np.unique(np.concatenate([core, tail, -tail]))


def validate(profile: StripProfile, epsilon: float,
             reference_length: float = 10.0) -> ValidationReport:
    """Audit the profile hypotheses at the given strip width.

    Checks eps*sup|kappa_g| < 1 (metric positivity), the declared sup
    bounds against samples, tau >= 0, the asymptotic-flatness condition
    per decay class, and the bent-strip hypothesis eps*sup|kappa_g| <= x0.
    """
    if not (isinstance(epsilon, (int, float)) and math.isfinite(epsilon)) or epsilon <= 0:
        raise ProfileError(f"epsilon must be a positive real, got {epsilon!r}")

    s = _sample_grid(reference_length)
    k = np.asarray(profile.kappa_g(s), dtype=float)
    tv = np.asarray(profile.tau(s), dtype=float)
    kp = np.asarray(profile.kappa_g_prime(s), dtype=float)
    if not (np.all(np.isfinite(k)) and np.all(np.isfinite(tv)) and np.all(np.isfinite(kp))):
        raise ProfileError(f"profile {profile.name!r} produced non-finite samples")

    checks = []

    max_k = float(np.max(np.abs(k)))
    checks.append(ValidationCheck(
        "sup_kappa_bound", max_k <= profile.sup_kappa + 1e-12,
        f"max sampled |kappa_g| = {max_k:.6g}, declared {profile.sup_kappa:.6g}",
        hard=True))

    min_tau = float(np.min(tv))
    checks.append(ValidationCheck(
        "tau_nonnegative", min_tau >= -1e-15,
        f"min sampled tau = {min_tau:.6g}", hard=True))

    max_tau = float(np.max(tv))
    checks.append(ValidationCheck(
        "sup_tau_bound", max_tau <= profile.sup_tau + 1e-12,
        f"max sampled tau = {max_tau:.6g}, declared {profile.sup_tau:.6g}",
        hard=True))

    ek = epsilon * profile.sup_kappa
    checks.append(ValidationCheck(
        "subcritical", ek < 1.0,
        f"eps*sup|kappa_g| = {ek:.6g} (must be < 1)", hard=True))

    if profile.tau_components is not None:
        tp = np.abs(np.asarray(profile.tau_components.theta_prime(s), dtype=float))
        dev = float(np.max(np.abs(tp - tv)))
        checks.append(ValidationCheck(
            "tau_matches_components", dev <= 1e-12,
            f"max |tau - |theta'|| = {dev:.3g}", hard=True))

    checks.append(_decay_check(profile, s, k, tv, reference_length))

    from .transverse import find_x0  # local import: avoids module cycle
    x0 = find_x0()
    checks.append(ValidationCheck(
        "theorem3_hypothesis", ek <= x0,
        f"eps*sup|kappa_g| = {ek:.6g} vs x0 = {x0:.6g}"))

    min_k = float(np.min(k))
    checks.append(ValidationCheck(
        "kappa_nonnegative", min_k >= -1e-15,
        f"min sampled kappa_g = {min_k:.6g}"))

    flat = max_k == 0.0 and max_tau == 0.0
    return ValidationReport(profile.name, float(epsilon), tuple(checks), flat)


def _decay_check(profile, s, k, tv, reference_length):
    mag = np.maximum(np.abs(k), tv)
    d = profile.decay
    if d.kind == "compact_support":
        outside = np.abs(s) > d.radius + 1e-12
        worst = float(np.max(mag[outside])) if np.any(outside) else 0.0
        return ValidationCheck(
            "asymptotically_flat", worst == 0.0,
            f"compact support radius {d.radius:g}: max outside = {worst:.3g}")
    if d.kind == "rational_decay":
        bound = d.delta / (1.0 + s**2)
        excess = float(np.max(mag - bound))
        return ValidationCheck(
            "asymptotically_flat", excess <= 1e-10,
            f"rational decay delta = {d.delta:g}: max excess = {excess:.3g}")
    tail = np.abs(s) >= reference_length
    worst = float(np.max(mag[tail]))
    return ValidationCheck(
        "asymptotically_flat", False,
        f"decay class 'none': tail magnitude {worst:.3g}")


def require_valid(profile: StripProfile, epsilon: float) -> ValidationReport:
    """Validate and raise on any hard failure."""
    report = validate(profile, epsilon)
    if not report.ok:
        bad = "; ".join(c.detail for c in report.checks if c.hard and not c.passed)
        raise ProfileError(f"profile {profile.name!r} rejected at eps={epsilon}: {bad}")
    return report


# ----------------------------------------------------------------------
# built-in families
# ----------------------------------------------------------------------

def _const(value):
    return lambda s: np.full_like(np.asarray(s, dtype=float), value)


def _rational_bound_gaussian(a: float, w: float, c: float) -> float:
    # exact stationary points of (1+s^2) exp(-((s-c)/w)^2): cubic in s
    roots = np.roots([1.0, -c, 1.0 - w**2, -c])
    cand = [r.real for r in roots if abs(r.imag) < 1e-9] + [0.0, c]
    vals = [abs(a) * (1 + s**2) * math.exp(-(((s - c) / w) ** 2)) for s in cand]
    return max(vals) * (1 + 1e-12)


def zero_profile() -> StripProfile:
    """The flat strip: kappa_g = tau = 0 (exactly solvable baseline)."""
    return StripProfile(
        kappa_g=_const(0.0), tau=_const(0.0), kappa_g_prime=_const(0.0),
        sup_kappa=0.0, sup_tau=0.0, sup_tau_prime=0.0,
        decay=DecayClass("compact_support", radius=0.0),
        tau_is_zero=True, name="zero")


def constant_profile(amplitude: float) -> StripProfile:
    """Constant geodesic curvature, no twist.  Does not decay."""
    if amplitude == 0.0:
        return zero_profile()
    return StripProfile(
        kappa_g=_const(float(amplitude)), tau=_const(0.0),
        kappa_g_prime=_const(0.0),
        sup_kappa=abs(amplitude), sup_tau=0.0, sup_tau_prime=0.0,
        decay=DecayClass("none"),
        tau_is_zero=True, name=f"constant({amplitude:g})")


def gaussian_bump(amplitude: float, width: float = 1.0,
                  center: float = 0.0) -> StripProfile:
    """Bending bump kappa_g(s) = a * exp(-((s-c)/w)^2), tau = 0."""
    if width <= 0:
        raise ProfileError("gaussian_bump: width must be positive")
    a, w, c = float(amplitude), float(width), float(center)

    def kappa(s):
        s = np.asarray(s, dtype=float)
        return a * np.exp(-(((s - c) / w) ** 2))

    def kappa_prime(s):
        s = np.asarray(s, dtype=float)
        return a * (-2.0 * (s - c) / w**2) * np.exp(-(((s - c) / w) ** 2))

    return StripProfile(
        kappa_g=kappa, tau=_const(0.0), kappa_g_prime=kappa_prime,
        sup_kappa=abs(a), sup_tau=0.0, sup_tau_prime=0.0,
        decay=DecayClass("rational_decay",
                         delta=_rational_bound_gaussian(a, w, c)),
        tau_is_zero=True,
        name=f"gaussian_bump(a={a:g}, w={w:g}, c={c:g})")


def smooth_compact_bump(amplitude: float, radius: float = 2.0) -> StripProfile:
    """Compactly supported C^3 bending bump a*(1-(s/r)^2)^4 on |s| < r."""
    if radius <= 0:
        raise ProfileError("smooth_compact_bump: radius must be positive")
    a, r = float(amplitude), float(radius)

    def kappa(s):
        s = np.asarray(s, dtype=float)
        u = np.clip(s / r, -1.0, 1.0)
        return a * (1.0 - u**2) ** 4

    def kappa_prime(s):
        s = np.asarray(s, dtype=float)
        u = np.clip(s / r, -1.0, 1.0)
        return a * 4.0 * (1.0 - u**2) ** 3 * (-2.0 * u / r)

    return StripProfile(
        kappa_g=kappa, tau=_const(0.0), kappa_g_prime=kappa_prime,
        sup_kappa=abs(a), sup_tau=0.0, sup_tau_prime=0.0,
        decay=DecayClass("compact_support", radius=r),
        tau_is_zero=True,
        name=f"smooth_compact_bump(a={a:g}, r={r:g})")


def gaussian_twist(amplitude: float, width: float = 1.0,
                   center: float = 0.0) -> StripProfile:
    """Purely twisted strip with theta'(s) = a * exp(-((s-c)/w)^2), a > 0."""
    if amplitude <= 0 or width <= 0:
        raise ProfileError("gaussian_twist: amplitude and width must be positive")
    a, w, c = float(amplitude), float(width), float(center)

    def theta(s):
        s = np.asarray(s, dtype=float)
        return a * w * math.sqrt(math.pi) / 2.0 * erf((s - c) / w)

    def theta_prime(s):
        s = np.asarray(s, dtype=float)
        return a * np.exp(-(((s - c) / w) ** 2))

    def theta_double_prime(s):
        s = np.asarray(s, dtype=float)
        return a * (-2.0 * (s - c) / w**2) * np.exp(-(((s - c) / w) ** 2))

    return StripProfile(
        kappa_g=_const(0.0), tau=theta_prime, kappa_g_prime=_const(0.0),
        sup_kappa=0.0, sup_tau=a,
        sup_tau_prime=a * math.sqrt(2.0) * math.exp(-0.5) / w,
        decay=DecayClass("rational_decay",
                         delta=_rational_bound_gaussian(a, w, c)),
        tau_components=TwistComponents(theta, theta_prime, theta_double_prime),
        name=f"gaussian_twist(a={a:g}, w={w:g}, c={c:g})")


def rational_twist(delta: float) -> StripProfile:
    """Twist saturating the Theorem-4 envelope: tau(s) = delta/(1+s^2)."""
    if delta < 0:
        raise ProfileError("rational_twist: delta must be nonnegative")
    d = float(delta)

    def theta(s):
        return d * np.arctan(np.asarray(s, dtype=float))

    def theta_prime(s):
        s = np.asarray(s, dtype=float)
        return d / (1.0 + s**2)

    def theta_double_prime(s):
        s = np.asarray(s, dtype=float)
        return -2.0 * d * s / (1.0 + s**2) ** 2

    # max |theta''| at s = 1/sqrt(3)
    sup_tp = d * 3.0 * math.sqrt(3.0) / 8.0
    return StripProfile(
        kappa_g=_const(0.0), tau=theta_prime, kappa_g_prime=_const(0.0),
        sup_kappa=0.0, sup_tau=d, sup_tau_prime=sup_tp,
        decay=DecayClass("rational_decay", delta=d),
        tau_components=TwistComponents(theta, theta_prime, theta_double_prime),
        name=f"rational_twist(delta={d:g})")


def combine(bend: StripProfile, twist: StripProfile) -> StripProfile:
    """Merge a bending-only profile with a twist-only profile."""
    if not bend.tau_is_zero:
        raise ProfileError("combine: first argument must be twist-free")
    if twist.sup_kappa != 0.0:
        raise ProfileError("combine: second argument must be bend-free")
    decay = _combine_decay(bend, twist)
    return StripProfile(
        kappa_g=bend.kappa_g, tau=twist.tau,
        kappa_g_prime=bend.kappa_g_prime,
        sup_kappa=bend.sup_kappa, sup_tau=twist.sup_tau,
        sup_tau_prime=twist.sup_tau_prime,
        decay=decay, tau_components=twist.tau_components,
        tau_is_zero=twist.tau_is_zero,
        name=f"{bend.name} + {twist.name}")


def _combine_decay(bend, twist):
    a, b = bend.decay, twist.decay
    if "none" in (a.kind, b.kind):
        return DecayClass("none")
    if a.kind == b.kind == "compact_support":
        return DecayClass("compact_support", radius=max(a.radius, b.radius))
    # mixed: fold the compact piece into a rational envelope over its support
    da = bend.sup_kappa * (1 + a.radius**2) if a.kind == "compact_support" else a.delta
    db = twist.sup_tau * (1 + b.radius**2) if b.kind == "compact_support" else b.delta
    return DecayClass("rational_decay", delta=max(da, db))


_FAMILIES = {
    "zero": (zero_profile, ()),
    "constant": (constant_profile, ("amplitude",)),
    "gaussian_bump": (gaussian_bump, ("amplitude", "width", "center")),
    "smooth_compact_bump": (smooth_compact_bump, ("amplitude", "radius")),
    "gaussian_twist": (gaussian_twist, ("amplitude", "width", "center")),
    "rational_twist": (rational_twist, ("delta",)),
}


def build_family(family: str, **params) -> StripProfile:
    """Construct a built-in family by name (configuration-file entry point)."""
    if family not in _FAMILIES:
        raise ProfileError(
            f"unknown profile family {family!r}; known: {sorted(_FAMILIES)}")
    ctor, allowed = _FAMILIES[family]
    unknown = set(params) - set(allowed)
    if unknown:
        raise ProfileError(
            f"profile family {family!r}: unknown parameters {sorted(unknown)}")
    return ctor(**params)
