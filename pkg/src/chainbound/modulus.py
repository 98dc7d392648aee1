"""Moduli of continuity on (0,1] and their dyadic growth constants.

A modulus w maps (0,1] to (0,oo), is non-decreasing, and vanishes at 0+.
The quantities that drive every chaining bound are the dyadic growth ratios

    r(x) = w(x) / w(x/2),        x in (0,1],

whose infimum d_w and supremum c_w are the growth constants.  A modulus is
admissible when 1 < d_w <= c_w < oo; admissibility is what makes the weighted
dyadic tail sum(k>=m) w(x/2^k) collapse to a single term times d_w/(d_w-1).

Five closed-form kinds are supported, all natural-log based:

    power        w(x) = x^alpha,                      alpha in (0,1]
    scaled       w(x) = lam * base(x),                lam > 0
    log_damped   w(x) = (1 - beta*log x)^(-gamma) * base(x)
    log_boosted  w(x) = (1 - beta*log x)^(+gamma) * base(x)
    log_pd       w(x) = (p - d*log x)^(-1/2) * base(x),   p >= 1, d > 0

plus an uncertified ``custom`` kind wrapping an arbitrary callable.  Only the
closed-form kinds carry growth-constant certificates; custom moduli are
checked on a grid and never certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    DomainError,
    InvalidModulusError,
    NotAdmissibleError,
    NotCertifiedError,
)

LOG2 = math.log(2.0)

_CLOSED_FORM_KINDS = ("power", "scaled", "log_damped", "log_boosted", "log_pd")


@dataclass(frozen=True)
class Modulus:
    """A modulus of continuity, closed-form or custom.

    Instances are immutable and safe to share across workers.  Use the
    constructors :func:`power`, :func:`scaled`, :func:`log_damped`,
    :func:`log_boosted`, :func:`log_pd`, :func:`custom` rather than
    building directly.
    """

    kind: str
    alpha: Optional[float] = None
    lam: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    p: Optional[float] = None
    d: Optional[float] = None
    base: Optional["Modulus"] = None
    fn: Optional[Callable] = field(default=None, compare=False)
    label: Optional[str] = None

    def __call__(self, x):
        return eval_modulus(self, x)

    def describe(self) -> str:
        if self.label is not None:
            return self.label
        if self.kind == "power":
            return f"power({self.alpha:g})"
        if self.kind == "scaled":
            return f"scaled({self.lam:g}, {self.base.describe()})"
        if self.kind == "log_damped":
            return f"log_damped({self.beta:g}, {self.gamma:g}, {self.base.describe()})"
        if self.kind == "log_boosted":
            return f"log_boosted({self.beta:g}, {self.gamma:g}, {self.base.describe()})"
        if self.kind == "log_pd":
            return f"log_pd(p={self.p:g}, d={self.d:g}, {self.base.describe()})"
        return "custom"


def power(alpha: float) -> Modulus:
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"power modulus needs alpha in (0,1], got {alpha}")
    return Modulus(kind="power", alpha=float(alpha))


def scaled(lam: float, base: Modulus) -> Modulus:
    if lam <= 0.0:
        raise DomainError(f"scale factor must be positive, got {lam}")
    return Modulus(kind="scaled", lam=float(lam), base=base)


def log_damped(beta: float, gamma: float, base: Modulus) -> Modulus:
    if beta <= 0.0 or gamma <= 0.0:
        raise DomainError("log_damped needs beta > 0 and gamma > 0")
    return Modulus(kind="log_damped", beta=float(beta), gamma=float(gamma), base=base)


def log_boosted(beta: float, gamma: float, base: Modulus) -> Modulus:
    if beta <= 0.0 or gamma <= 0.0:
        raise DomainError("log_boosted needs beta > 0 and gamma > 0")
    return Modulus(kind="log_boosted", beta=float(beta), gamma=float(gamma), base=base)


def log_pd(p: float, d: float, base: Modulus) -> Modulus:
    if p < 1.0:
        raise DomainError(f"log_pd needs p >= 1, got {p}")
    if d <= 0.0:
        raise DomainError(f"log_pd needs d > 0, got {d}")
    return Modulus(kind="log_pd", p=float(p), d=float(d), base=base)


def custom(fn: Callable, label: str = "custom") -> Modulus:
    return Modulus(kind="custom", fn=fn, label=label)


def eval_modulus(w: Modulus, x):
    """Evaluate w at x (scalar or array), x in (0,1].

    Raises DomainError outside (0,1] and InvalidModulusError on a
    non-positive value.
    """
    arr = np.asarray(x, dtype=float)
    if arr.size and (np.any(arr <= 0.0) or np.any(arr > 1.0)):
        raise DomainError("modulus argument must lie in (0,1]")
    out = _eval_raw(w, arr)
    if np.any(~np.isfinite(out)) or np.any(out <= 0.0):
        raise InvalidModulusError(
            f"modulus {w.describe()} evaluated non-positive or non-finite"
        )
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def _eval_raw(w: Modulus, arr: np.ndarray) -> np.ndarray:
    if w.kind == "power":
        return arr ** w.alpha
    if w.kind == "scaled":
        return w.lam * _eval_raw(w.base, arr)
    logx = np.log(arr)
    if w.kind == "log_damped":
        return (1.0 - w.beta * logx) ** (-w.gamma) * _eval_raw(w.base, arr)
    if w.kind == "log_boosted":
        return (1.0 - w.beta * logx) ** w.gamma * _eval_raw(w.base, arr)
    if w.kind == "log_pd":
        return (w.p - w.d * logx) ** (-0.5) * _eval_raw(w.base, arr)
    if w.kind == "custom":
        return np.asarray(w.fn(arr), dtype=float)
    raise InvalidModulusError(f"unknown modulus kind {w.kind!r}")


def dyadic_grid(depth: int, points_per_octave: int = 64) -> np.ndarray:
    """Ascending grid over (2^-depth, 1] with geometric spacing per octave."""
    blocks = []
    for j in range(depth - 1, -1, -1):
        lo, hi = 2.0 ** -(j + 1), 2.0 ** -j
        pts = np.geomspace(lo, hi, points_per_octave, endpoint=False)[1:]
        blocks.append(pts)
        blocks.append([hi])
    return np.concatenate([np.atleast_1d(b) for b in blocks])


def growth_constants(
    w: Modulus, depth: int = 14, points_per_octave: int = 64
) -> tuple[float, float]:
    """Estimate (c_w, d_w) = (sup, inf) of x -> w(x)/w(x/2) on a dyadic grid.

    The grid spans ``depth`` octaves below 1 with ``points_per_octave``
    geometric samples each.  Power (and rescalings of it) short-circuit to
    the exact closed form 2^alpha.
    """
    if depth < 8:
        raise DomainError(f"growth-constant grid needs depth >= 8, got {depth}")
    if w.kind == "power":
        v = 2.0 ** w.alpha
        return v, v
    if w.kind == "scaled":
        return growth_constants(w.base, depth, points_per_octave)
    xs = dyadic_grid(depth, points_per_octave)
    num = eval_modulus(w, xs)
    den = eval_modulus(w, xs / 2.0)
    ratios = num / den
    return float(ratios.max()), float(ratios.min())


def certified_constants(w: Modulus) -> tuple[float, float]:
    """Closed-form (c_w, d_w) bounds valid on all of (0,1].

    Returns an upper bound for c_w and a lower bound for d_w, which is the
    safe direction for every chaining estimate.  Raises NotCertifiedError
    for custom moduli or parameter ranges without a certificate.
    """
    if w.kind == "power":
        v = 2.0 ** w.alpha
        return v, v
    if w.kind == "scaled":
        return certified_constants(w.base)
    if w.kind == "log_damped":
        c_b, d_b = certified_constants(w.base)
        return c_b * (1.0 + w.beta * LOG2) ** w.gamma, d_b
    if w.kind == "log_pd":
        c_b, d_b = certified_constants(w.base)
        return c_b * math.sqrt(1.0 + (w.d / w.p) * LOG2), d_b
    if w.kind == "log_boosted":
        c_b, d_b = certified_constants(w.base)
        beta_max = (d_b ** (1.0 / w.gamma) - 1.0) / LOG2
        if not w.beta < beta_max:
            raise NotCertifiedError(
                f"log_boosted certificate needs beta < {beta_max:.6g}, got {w.beta}"
            )
        d_lo = (1.0 + w.beta * LOG2) ** (-w.gamma) * d_b
        # The boosted form is only a modulus when it stays non-decreasing;
        # certificate is conditional on that, so scan a grid.
        if not _monotone_on_grid(w, depth=14):
            raise NotCertifiedError(
                "log_boosted certificate needs the boosted weight to be "
                "non-decreasing; grid scan found a decrease"
            )
        return c_b, d_lo
    raise NotCertifiedError(f"no growth-constant certificate for kind {w.kind!r}")


def _monotone_on_grid(w: Modulus, depth: int, points_per_octave: int = 64) -> bool:
    xs = dyadic_grid(depth, points_per_octave)
    vals = eval_modulus(w, xs)
    # allow 1-ulp-scale wiggle from rounding
    return bool(np.all(np.diff(vals) >= -1e-12 * np.abs(vals[1:])))


@dataclass(frozen=True)
class AdmissibilityReport:
    modulus: str
    monotone: bool
    c_w: float
    d_w: float
    passed: bool
    certified: bool
    note: str

    def __bool__(self) -> bool:
        return self.passed


def check_admissible(
    w: Modulus, depth: int = 14, tol: float = 1e-6
) -> AdmissibilityReport:
    """Grid admissibility check: monotone, d_w >= 1 + tol, c_w finite.

    The grid cannot certify continuity on all of (0,1]; a certificate flag
    is set only for the closed-form catalog, where the growth bounds are
    backed by the closed forms rather than the grid extrema.
    """
    if depth < 8:
        raise DomainError(f"admissibility check needs depth >= 8, got {depth}")
    if tol <= 0.0:
        raise DomainError("tolerance must be positive")
    monotone = _monotone_on_grid(w, depth)
    c_est, d_est = growth_constants(w, depth)
    certified = False
    note = "grid check only; continuity on (0,1] is not certified"
    if w.kind in _CLOSED_FORM_KINDS:
        try:
            c_cert, d_cert = certified_constants(w)
        except NotCertifiedError as exc:
            note = f"catalog certificate unavailable: {exc}"
        else:
            certified = True
            note = (
                f"closed-form catalog certificate: c_w <= {c_cert:.6g}, "
                f"d_w >= {d_cert:.6g}"
            )
    passed = monotone and (d_est >= 1.0 + tol) and math.isfinite(c_est)
    return AdmissibilityReport(
        modulus=w.describe(),
        monotone=monotone,
        c_w=c_est,
        d_w=d_est,
        passed=passed,
        certified=certified and passed,
        note=note,
    )


def dyadic_tail_bound(
    w: Modulus, x: float, m: int, rel_tol: float = 1e-16
) -> tuple[float, float]:
    """Partial dyadic tail sum vs. its geometric-series bound.

    Returns (lhs, rhs) with lhs = sum_{k>=m} w(x/2^k), truncated once terms
    fall below ``rel_tol`` of the running sum, and
    rhs = d_w/(d_w-1) * w(x/2^m).  Contract: lhs <= rhs.
    """
    if not 0.0 < x <= 1.0:
        raise DomainError("x must lie in (0,1]")
    if m < 0:
        raise DomainError("m must be >= 0")
    try:
        _, d_w = certified_constants(w)
    except NotCertifiedError:
        _, d_w = growth_constants(w)
    if d_w <= 1.0:
        raise NotAdmissibleError(
            f"dyadic tail bound needs d_w > 1, estimated d_w = {d_w:.6g}"
        )
    lhs = 0.0
    k = m
    while True:
        term = eval_modulus(w, x / 2.0 ** k)
        lhs += term
        k += 1
        if term <= rel_tol * lhs or k - m > 20000:
            break
    rhs = d_w / (d_w - 1.0) * eval_modulus(w, x / 2.0 ** m)
    return lhs, rhs


def w_log_pd(p: float, d: float, base: Modulus) -> Modulus:
    """The p,d-damped companion weight (p - d*log x)^(-1/2) * base(x)."""
    return log_pd(p, d, base)


def parse_modulus(spec) -> Modulus:
    """Build a modulus from a tagged config record.

    Example: {"kind": "log_pd", "p": 2, "d": 4,
              "base": {"kind": "power", "alpha": 0.5}}
    """
    if isinstance(spec, Modulus):
        return spec
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DomainError("modulus config must be a dict with a 'kind' tag")
    kind = spec["kind"]
    if kind == "power":
        return power(spec["alpha"])
    if kind == "scaled":
        return scaled(spec["lam"], parse_modulus(spec["base"]))
    if kind == "log_damped":
        return log_damped(spec["beta"], spec["gamma"], parse_modulus(spec["base"]))
    if kind == "log_boosted":
        return log_boosted(spec["beta"], spec["gamma"], parse_modulus(spec["base"]))
    if kind == "log_pd":
        return log_pd(spec["p"], spec["d"], parse_modulus(spec["base"]))
    raise DomainError(f"unknown modulus kind {kind!r}")
