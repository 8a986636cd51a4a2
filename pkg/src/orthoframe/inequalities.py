"""Closed-form bounds from hypercontractivity and the slicing induction, plus checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .gegenbauer import gegenbauer_zero_exact
from .zonal import default_order, density, funk_hecke_spectrum, make_quadrature

__all__ = [
    "LEVEL_D_CONSTANT",
    "DEFAULT_EPS0",
    "DEFAULT_C",
    "LevelDParams",
    "BudgetParams",
    "LevelDReport",
    "BudgetResult",
    "PreconditionError",
    "level_d_bound",
    "admissible_degrees",
    "check_level_d",
    "sphere_moment_bound",
    "norm_conversion_factor",
    "budget_chain",
    "zero_bound_violations",
]

LEVEL_D_CONSTANT = 100.0
DEFAULT_EPS0 = 0.01
DEFAULT_C = 10.0


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class LevelDParams:
    alpha: float
    d: int
    n: int

    def __post_init__(self):
        a, d, n = self.alpha, self.d, self.n
        if not 0.0 < a <= 0.5:
            raise PreconditionError(f"need 0 < alpha <= 1/2, got alpha={a}")
        if n < 2:
            raise PreconditionError(f"need n >= 2, got n={n}")
        if a < 2.0 ** (-n):
            raise PreconditionError(f"need alpha >= 2^-n = {2.0 ** -n:.3e}, got alpha={a}")
        if d < 0 or d > math.log(1.0 / a):
            raise PreconditionError(f"need 0 <= d <= ln(1/alpha) = {math.log(1.0 / a):.4f}, got d={d}")


def level_d_bound(p, constant=LEVEL_D_CONSTANT):
    """alpha^2 (constant * ln(1/alpha) / d)^d; alpha^2 at d = 0 by convention."""
    if p.d == 0:
        return p.alpha**2
    return p.alpha**2 * (constant * math.log(1.0 / p.alpha) / p.d) ** p.d


def admissible_degrees(alpha, n):
    """All d with (alpha, d, n) satisfying the level-d preconditions."""
    if not 0.0 < alpha <= 0.5 or alpha < 2.0 ** (-n):
        return []
    return list(range(0, int(math.floor(math.log(1.0 / alpha))) + 1))


@dataclass(frozen=True)
class LevelDReport:
    applicable: bool
    n: int
    d: int
    alpha: float = float("nan")
    complemented: bool = False
    measured: float = float("nan")
    bound: float = float("nan")
    holds: bool = True
    reason: str = ""

    @property
    def slack(self):
        return self.bound / self.measured if self.measured > 0 else math.inf

    def to_json(self):
        return {
            "applicable": self.applicable,
            "n": self.n,
            "d": self.d,
            "alpha": self.alpha,
            "complemented": self.complemented,
            "measured": self.measured,
            "bound": self.bound,
            "holds": self.holds,
            "reason": self.reason,
        }


# bound equals the measurement at d = 0; allow rounding there
_LEVEL_D_RTOL = 1e-12


def check_level_d(profile, d, rule=None, constant=LEVEL_D_CONSTANT):
    """Compare ||f^{=d}||^2 of a zonal indicator with the level-d bound.

    When the density exceeds 1/2 the check runs on 1 - f, whose mean is
    eps = 1 - alpha and whose degree-d components agree with f's for d >= 1.
    """
    if profile.kind != "indicator":
        raise TypeError("level-d checks need an indicator profile")
    n = profile.n
    rule = rule or make_quadrature(n, default_order(max(d, 1)))
    alpha = density(profile, rule)
    target, complemented = profile, False
    if alpha > 0.5:
        target, complemented = profile.complement(), True
        alpha = density(target, rule)
    try:
        params = LevelDParams(alpha, d, n)
    except PreconditionError as exc:
        return LevelDReport(False, n, d, alpha, complemented, reason=f"not applicable: {exc}")
    spec = funk_hecke_spectrum(target, rule, max(d, 0))
    measured = spec.component_norm_sq(d)
    bound = level_d_bound(params, constant)
    holds = measured <= bound * (1.0 + _LEVEL_D_RTOL)
    return LevelDReport(True, n, d, alpha, complemented, measured, bound, holds)


def sphere_moment_bound(n, d, q):
    """(q-1)^{d/2} exp(d^2 q / n): the L^q/L^2 ratio bound for degree-d harmonics on S^{n-1}."""
    if q < 2:
        raise ValueError("q must be >= 2")
    return (q - 1.0) ** (d / 2.0) * math.exp(d * d * q / n)


def norm_conversion_factor(n, d, q):
    """||f||_{L^q(sphere)} / ||f||_{L^q(gamma)} for f homogeneous of degree d.

    (Gamma(n/2) / (2^{dq/2} Gamma((dq + n)/2)))^{1/q}, evaluated in log space.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    log_val = math.lgamma(n / 2) - (d * q / 2) * math.log(2.0) - math.lgamma((d * q + n) / 2)
    return math.exp(log_val / q)


@dataclass(frozen=True)
class BudgetParams:
    epsilon: float
    n: int
    n0: int
    C: float = DEFAULT_C

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 0.5:
            raise PreconditionError(f"need 0 < epsilon <= 1/2, got {self.epsilon}")
        if not 1 <= self.n0 <= self.n:
            raise PreconditionError(f"need 1 <= n0 <= n, got n0={self.n0}, n={self.n}")
        if self.C < 0:
            raise PreconditionError(f"need C >= 0, got {self.C}")


@dataclass(frozen=True)
class BudgetResult:
    final_density_lower_bound: float
    dims: np.ndarray = field(repr=False)
    losses: np.ndarray = field(repr=False)
    bounds: np.ndarray = field(repr=False)
    exhausted: bool = False
    failing_step: int = -1
    invariant_ok: bool = True

    @property
    def per_step(self):
        return [
            {"step": k, "dim": int(m), "loss": float(l), "bound": float(b)}
            for k, (m, l, b) in enumerate(zip(self.dims, self.losses, self.bounds))
        ]

    def to_json(self, max_steps=50):
        steps = self.per_step
        return {
            "final_density_lower_bound": self.final_density_lower_bound,
            "steps": len(steps),
            "exhausted": self.exhausted,
            "failing_step": self.failing_step,
            "invariant_ok": self.invariant_ok,
            "per_step_head": steps[:max_steps],
        }


def budget_chain(p):
    """Guaranteed density left after slicing from dimension n down to n0.

    Step k (ambient dimension n - k) loses
    C eps_k ln^2(1/eps_k) / (n-k)^2 + C / (n-k)^3, with eps_k replaced by the
    worst value of x ln^2(1/x) over x in (0, 2 eps].  ``exhausted`` marks the
    first step whose running bound is below 1 - 1/(2 n0), the density the
    terminal random-frame search needs; ``invariant_ok`` records whether the
    running bound stayed above 1 - 2 eps, which the substitution relies on.
    """
    eps = p.epsilon
    x = min(2.0 * eps, math.exp(-2.0))  # x ln^2(1/x) increases on (0, e^-2]
    phi = x * math.log(1.0 / x) ** 2
    dims = np.arange(p.n, p.n0, -1, dtype=float)
    losses = p.C * phi / dims**2 + p.C / dims**3
    bounds = (1.0 - eps) - np.cumsum(losses)
    final = float(bounds[-1]) if bounds.size else 1.0 - eps
    invariant_ok = bool(final >= 1.0 - 2.0 * eps)
    floor = 1.0 - 1.0 / (2.0 * p.n0)
    if 1.0 - eps < floor:
        return BudgetResult(final, dims, losses, bounds, True, 0, invariant_ok)
    bad = np.nonzero(bounds < floor)[0]
    if bad.size:
        return BudgetResult(final, dims, losses, bounds, True, int(bad[0]), invariant_ok)
    return BudgetResult(final, dims, losses, bounds, False, -1, invariant_ok)


def zero_bound_violations(n_range, d_range):
    """(n, d) pairs where |P_{n,d}(0)| > |P_{n,6}(0)| or |P_{n,6}(0)| > 15/n^3 (exact arithmetic)."""
    bad = []
    for n in n_range:
        p6 = abs(gegenbauer_zero_exact(n, 6))
        cap = Fraction(15, n**3)
        for d in d_range:
            pd = abs(gegenbauer_zero_exact(n, d))
            if pd > p6 or p6 > cap:
                bad.append((n, d))
    return bad
