"""Zonal subsets and functions of S^{n-1} via their 1-D profiles.

A zonal function is f(x) = g(<x, e>) for a fixed axis e (here e_1 unless an
oracle says otherwise).  Its degree-d harmonic component is
dim H_{n,d} * ghat_d * P_{n,d}(<x, e>) with

    ghat_d = int g(t) P_{n,d}(t) p_n(t) dt,

where p_n is the density of <x, e> for x uniform on the sphere,
p_n(t) proportional to (1 - t^2)^{(n-3)/2}.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betainc, betaincinv, gammaln

from .gegenbauer import dim_harmonic_float, gegenbauer_all, gegenbauer_eval

__all__ = [
    "QuadratureRule",
    "ZonalProfile",
    "HarmonicSpectrum",
    "GtValue",
    "ParsevalError",
    "make_quadrature",
    "default_order",
    "marginal_log_density",
    "density",
    "funk_hecke_spectrum",
    "projection_inner_product",
    "g_t_zonal",
    "cap_measure",
    "full_sphere",
    "band",
    "band_with_measure",
    "double_cap",
    "cap",
    "cap_with_measure",
    "cap_complement",
]

PARSEVAL_TOL = 1e-8
DEFAULT_DMAX = 20


class ParsevalError(ArithmeticError):
    """Harmonic energy exceeds the squared norm: quadrature is too coarse."""


def default_order(d_max=DEFAULT_DMAX):
    return max(64, 4 * d_max)


def _log_normalizer(n):
    # log int_0^pi sin^{n-2}(theta) dtheta = log B(1/2, (n-1)/2)
    return 0.5 * math.log(math.pi) + gammaln((n - 1) / 2) - gammaln(n / 2)


def marginal_log_density(n, t):
    """log p_n(t) for |t| < 1, computed in log space to survive large n."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return 0.5 * (n - 3) * np.log1p(-t * t) - _log_normalizer(n)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule for the probability weight p_n on [-1, 1]."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, values):
        return np.asarray(values) @ self.weights


def make_quadrature(n, order):
    """Golub-Welsch Gauss rule for p_n, exact through degree 2*order - 1.

    The symmetric Jacobi matrix of the monic Gegenbauer family with
    lam = (n-2)/2 has off-diagonal entries sqrt(beta_k),
    beta_k = k (k + 2 lam - 1) / (4 (k + lam)(k + lam - 1)), and
    beta_1 = 1 / (2 (1 + lam)).  Weights are squared first components of
    the eigenvectors, so they sum to one without any Gamma evaluation.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    if int(order) != order or order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    n, order = int(n), int(order)
    lam = (n - 2) / 2
    k = np.arange(2, order, dtype=float)
    beta = np.empty(order - 1)
    if order > 1:
        beta[0] = 1.0 / (2.0 * (1.0 + lam))
        beta[1:] = k * (k + 2 * lam - 1) / (4 * (k + lam) * (k + lam - 1))
    try:
        nodes, vecs = eigh_tridiagonal(np.zeros(order), np.sqrt(beta))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"Gauss node computation failed for n={n}, order={order}") from exc
    weights = vecs[0] ** 2
    weights = weights / weights.sum()
    return QuadratureRule(n=n, nodes=nodes, weights=weights, order=order)


@lru_cache(maxsize=32)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def _theta_panels(n, a, b, order):
    """Nodes (as t = cos theta) and p_n-weights for integrating over t in [a, b].

    Works in the angle variable, where the weight sin^{n-2}(theta) is smooth
    for every n.  The range is clipped to the window around the equator
    outside which the weight is below exp(-800), then split into panels
    narrower than the weight's width.
    """
    th_lo, th_hi = math.acos(min(b, 1.0)), math.acos(max(a, -1.0))
    if n > 2:
        half = min(math.pi / 2, 40.0 / math.sqrt(n - 2))
        th_lo = max(th_lo, math.pi / 2 - half)
        th_hi = min(th_hi, math.pi / 2 + half)
        width = min(math.pi / 8, 2.0 / math.sqrt(n - 2))
    else:
        width = math.pi / 8
    if th_hi <= th_lo:
        return np.empty(0), np.empty(0)
    panels = max(1, math.ceil((th_hi - th_lo) / width))
    x, w = _leggauss(order)
    edges = np.linspace(th_lo, th_hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half_len = 0.5 * np.diff(edges)[:, None]
    theta = (mid + half_len * x).ravel()
    wt = (half_len * w).ravel()
    sin = np.sin(theta)
    if n == 2:
        logw = np.full(theta.shape, -math.log(math.pi))
    else:
        with np.errstate(divide="ignore"):
            logw = (n - 2) * np.log(sin) - _log_normalizer(n)
    return np.cos(theta), wt * np.exp(logw)


@dataclass(frozen=True)
class ZonalProfile:
    """Profile g on [-1, 1] of a zonal set or function on S^{n-1}.

    ``kind == "indicator"``: g is 1 on the union of the intervals
    (breakpoints[0], breakpoints[1]), (breakpoints[2], breakpoints[3]), ...
    and 0 elsewhere.  ``kind == "callable"``: g is ``func``.
    """

    n: int
    kind: str
    breakpoints: tuple = ()
    func: Optional[Callable] = field(default=None, compare=False)
    symmetric: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if self.kind == "indicator":
            bp = tuple(float(b) for b in self.breakpoints)
            object.__setattr__(self, "breakpoints", bp)
            if len(bp) % 2:
                raise ValueError("indicator breakpoints come in (start, end) pairs")
            if any(b < -1.0 or b > 1.0 for b in bp):
                raise ValueError("breakpoints must lie in [-1, 1]")
            if any(x > y for x, y in zip(bp, bp[1:])):
                raise ValueError("breakpoints must be sorted")
            if self.symmetric and not np.allclose(bp, [-b for b in reversed(bp)], atol=1e-14):
                raise ValueError("symmetric flag set but breakpoints are not symmetric about 0")
        elif self.kind == "callable":
            if self.func is None:
                raise ValueError("callable profile needs func")
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @property
    def intervals(self):
        bp = self.breakpoints
        return [(bp[i], bp[i + 1]) for i in range(0, len(bp), 2) if bp[i + 1] > bp[i]]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "callable":
            return np.asarray(self.func(t), dtype=float)
        return self.contains(t).astype(float)

    def contains(self, t):
        """Membership of inner products t; open intervals, closed at +-1."""
        if self.kind != "indicator":
            raise TypeError("membership is only defined for indicator profiles")
        t = np.asarray(t, dtype=float)
        inside = np.zeros(t.shape, dtype=bool)
        for a, b in self.intervals:
            lo = (t >= a) if a <= -1.0 else (t > a)
            hi = (t <= b) if b >= 1.0 else (t < b)
            inside |= lo & hi
        return inside

    def complement(self):
        if self.kind != "indicator":
            raise TypeError("complement is only defined for indicator profiles")
        pts = [-1.0]
        for a, b in self.intervals:
            pts.extend([a, b])
        pts.append(1.0)
        bp = []
        for i in range(0, len(pts), 2):
            if pts[i + 1] > pts[i]:
                bp.extend(pts[i : i + 2])
        return ZonalProfile(self.n, "indicator", tuple(bp), symmetric=self.symmetric)

    def restricted(self, k, r):
        """Profile of the slice by a k-dim subspace whose unit ball meets the axis at length r.

        If the axis e projects onto the subspace with norm r and direction u,
        then <y, e> = r <y, u> for y in the subspace, so the slice is zonal
        about u with profile s -> g(r s).
        """
        if self.kind != "indicator":
            return ZonalProfile(k, "callable", func=lambda s, g=self.func, r=r: g(r * np.asarray(s)))
        if r <= 0.0:
            full = bool(self.contains(np.array(0.0)))
            return ZonalProfile(k, "indicator", (-1.0, 1.0) if full else (), symmetric=True)
        bp = []
        for a, b in self.intervals:
            lo, hi = max(a / r, -1.0), min(b / r, 1.0)
            if a <= -1.0:
                lo = -1.0
            if b >= 1.0:
                hi = 1.0
            if hi > lo:
                bp.extend([lo, hi])
        return ZonalProfile(k, "indicator", tuple(bp), symmetric=self.symmetric)

    def to_json(self):
        if self.kind != "indicator":
            raise TypeError("only indicator profiles are serializable")
        return {"n": self.n, "kind": self.kind, "breakpoints": list(self.breakpoints), "symmetric": self.symmetric}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        allowed = {"n", "kind", "breakpoints", "symmetric"}
        extra = set(obj) - allowed
        if extra:
            raise ValueError(f"unknown profile key(s): {sorted(extra)}")
        missing = {"n", "kind", "breakpoints"} - set(obj)
        if missing:
            raise ValueError(f"missing profile key(s): {sorted(missing)}")
        if obj["kind"] != "indicator":
            raise ValueError(f"only indicator profiles can be deserialized, got kind={obj['kind']!r}")
        return cls(int(obj["n"]), "indicator", tuple(obj["breakpoints"]), symmetric=bool(obj.get("symmetric", False)))


def _check_rule(profile, rule):
    if rule.n != profile.n:
        raise ValueError(f"dimension mismatch: profile n={profile.n}, rule n={rule.n}")


def _integrate(profile, rule, funcs):
    """int g(t) F_i(t) p_n(t) dt for each row F_i of funcs(t)."""
    if profile.kind == "callable":
        g = profile(rule.nodes)
        return funcs(rule.nodes) @ (g * rule.weights)
    total = funcs(np.empty(0)) @ np.empty(0)
    for a, b in profile.intervals:
        t, w = _theta_panels(profile.n, a, b, rule.order)
        total = total + funcs(t) @ w
    return total


def density(profile, rule):
    """Measure of the zonal set (or mean of the zonal function)."""
    _check_rule(profile, rule)
    return float(_integrate(profile, rule, lambda t: np.ones((1, t.size)))[0])


def _norm_sq(profile, rule):
    if profile.kind == "indicator":
        return density(profile, rule)
    g = profile(rule.nodes)
    return float(rule.integrate(g * g))


@dataclass(frozen=True)
class HarmonicSpectrum:
    """Funk-Hecke coefficients ghat_0..ghat_{D_max} of a zonal profile."""

    n: int
    d_max: int
    coeffs: np.ndarray
    tail_norm_sq: float
    norm_sq: float

    def component_norm_sq(self, d):
        """||f^{=d}||^2 = dim H_{n,d} * ghat_d^2."""
        self._check_degree(d)
        return dim_harmonic_float(self.n, d) * self.coeffs[d] ** 2

    def component(self, d):
        """The zonal profile of f^{=d}: t -> dim * ghat_d * P_{n,d}(t)."""
        self._check_degree(d)
        scale = dim_harmonic_float(self.n, d) * self.coeffs[d]
        return ZonalProfile(self.n, "callable", func=lambda t: scale * gegenbauer_eval(self.n, d, t))

    def energies(self):
        return np.array([self.component_norm_sq(d) for d in range(self.d_max + 1)])

    def _check_degree(self, d):
        if not 0 <= d <= self.d_max:
            raise ValueError(f"degree {d} outside truncation 0..{self.d_max}")


def funk_hecke_spectrum(profile, rule, d_max=DEFAULT_DMAX):
    """Spectrum of a zonal profile; raises ParsevalError if the quadrature is too coarse."""
    _check_rule(profile, rule)
    if d_max < 0:
        raise ValueError("d_max must be >= 0")
    n = profile.n
    coeffs = np.asarray(_integrate(profile, rule, lambda t: gegenbauer_all(n, d_max, t)), dtype=float)
    if profile.symmetric:
        coeffs[1::2] = 0.0
    norm_sq = _norm_sq(profile, rule)
    dims = np.array([dim_harmonic_float(n, d) for d in range(d_max + 1)])
    captured = float(np.sum(dims * coeffs**2))
    excess = captured - norm_sq
    if excess > PARSEVAL_TOL * max(1.0, norm_sq):
        raise ParsevalError(
            f"harmonic energy {captured!r} exceeds ||g||^2 = {norm_sq!r} by {excess:.3e} "
            f"(n={n}, d_max={d_max}, order={rule.order}); increase the quadrature order"
        )
    return HarmonicSpectrum(n=n, d_max=d_max, coeffs=coeffs, tail_norm_sq=max(norm_sq - captured, 0.0), norm_sq=norm_sq)


def _check_pair(fs, hs, d=None):
    if fs.n != hs.n:
        raise ValueError(f"dimension mismatch: {fs.n} vs {hs.n}")
    if d is not None and (d > fs.d_max or d > hs.d_max or d < 0):
        raise ValueError(f"degree {d} exceeds truncation ({fs.d_max}, {hs.d_max})")


def projection_inner_product(fs, hs, d):
    """<f^{=d}, h^{=d}> for two zonal functions sharing an axis."""
    _check_pair(fs, hs, d)
    return dim_harmonic_float(fs.n, d) * fs.coeffs[d] * hs.coeffs[d]


class GtValue(NamedTuple):
    value: float
    tail_bound: float


def g_t_zonal(fs, hs, t):
    """Truncated harmonic expansion of G_t(f, h) with a Cauchy-Schwarz tail bound.

    The tail sum_{d > D} P_{n,d}(t) <f^{=d}, h^{=d}> is bounded by
    sup_{d > D} |P_{n,d}(t)| * sqrt(tail_f * tail_h).  The sup is 15/n^3
    (capped at 1) for t = 0 and D >= 6, and 1 otherwise.
    """
    _check_pair(fs, hs)
    if abs(t) > 1.0:
        raise ValueError("t must lie in [-1, 1]")
    n = fs.n
    d_max = min(fs.d_max, hs.d_max)
    p = gegenbauer_all(n, d_max, t)
    dims = np.array([dim_harmonic_float(n, d) for d in range(d_max + 1)])
    value = float(np.sum(p * dims * fs.coeffs[: d_max + 1] * hs.coeffs[: d_max + 1]))
    # energy between the common truncation and each spectrum's own D_max belongs to the tail
    tail_f = fs.tail_norm_sq + _extra_energy(fs, d_max)
    tail_h = hs.tail_norm_sq + _extra_energy(hs, d_max)
    sup = min(1.0, 15.0 / n**3) if (t == 0 and d_max >= 6) else 1.0
    return GtValue(value, sup * math.sqrt(tail_f * tail_h))


def _extra_energy(spec, d_max):
    return float(sum(spec.component_norm_sq(d) for d in range(d_max + 1, spec.d_max + 1)))


def cap_measure(n, threshold):
    """Measure of {x in S^{n-1} : <x, e> > threshold}."""
    tau = float(threshold)
    if tau >= 1.0:
        return 0.0
    if tau <= -1.0:
        return 1.0
    half = 0.5 * float(betainc((n - 1) / 2, 0.5, 1.0 - tau * tau))
    return half if tau >= 0 else 1.0 - half


def _cap_threshold(n, measure):
    if not 0.0 < measure < 1.0:
        raise ValueError("cap measure must lie in (0, 1)")
    if measure <= 0.5:
        return math.sqrt(1.0 - float(betaincinv((n - 1) / 2, 0.5, 2 * measure)))
    return -_cap_threshold(n, 1.0 - measure)


def full_sphere(n):
    return ZonalProfile(n, "indicator", (-1.0, 1.0), symmetric=True)


def band(n, width=None):
    """{|<x, e>| < width}; the default width 1/sqrt(n) is the frame-free band."""
    w = 1.0 / math.sqrt(n) if width is None else float(width)
    w = min(w, 1.0)
    return ZonalProfile(n, "indicator", (-w, w), symmetric=True)


def band_with_measure(n, measure):
    """Symmetric band {|<x, e>| < w} of the given measure."""
    if not 0.0 < measure < 1.0:
        raise ValueError("band measure must lie in (0, 1)")
    return band(n, _cap_threshold(n, (1.0 - measure) / 2.0))


def double_cap(n, threshold=1.0 / math.sqrt(2.0)):
    tau = float(threshold)
    return ZonalProfile(n, "indicator", (-1.0, -tau, tau, 1.0), symmetric=True)


def cap(n, threshold):
    return ZonalProfile(n, "indicator", (float(threshold), 1.0))


def cap_with_measure(n, measure):
    return cap(n, _cap_threshold(n, measure))


def cap_complement(n, eps):
    """Complement of the cap about e of measure eps."""
    return ZonalProfile(n, "indicator", (-1.0, _cap_threshold(n, eps)))
