"""Normalized Gegenbauer polynomials P_{n,d} on [-1, 1].

P_{n,d} is the degree-d member of the orthogonal family for the weight
(1 - t^2)^{(n-3)/2}, scaled so that P_{n,d}(1) = 1.  It is the eigenvalue
of the fixed-inner-product averaging operator on degree-d spherical
harmonics in R^n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "HarmonicIndex",
    "gegenbauer_eval",
    "gegenbauer_all",
    "gegenbauer_eval_explicit",
    "gegenbauer_zero",
    "gegenbauer_zero_exact",
    "dim_harmonic",
    "dim_harmonic_float",
    "EXPLICIT_MAX_DEGREE",
]

EXPLICIT_MAX_DEGREE = 30
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class HarmonicIndex:
    n: int
    d: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"ambient dimension must be an integer >= 2, got n={self.n}")
        if int(self.d) != self.d or self.d < 0:
            raise ValueError(f"degree must be an integer >= 0, got d={self.d}")


def _check_t(t):
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("argument must be finite")
    if np.any(np.abs(arr) > 1.0 + _DOMAIN_SLACK):
        raise ValueError("argument outside [-1, 1]")
    return np.clip(arr, -1.0, 1.0)


def _recurrence(n, dmax, t):
    # P_d = [(2d+n-4) t P_{d-1} - (d-1) P_{d-2}] / (d+n-3)
    out = np.empty((dmax + 1,) + t.shape)
    out[0] = 1.0
    if dmax >= 1:
        out[1] = t
    for d in range(2, dmax + 1):
        out[d] = ((2 * d + n - 4) * t * out[d - 1] - (d - 1) * out[d - 2]) / (d + n - 3)
    return out


def gegenbauer_eval(n, d, t):
    """Evaluate P_{n,d}(t) by the three-term recurrence.

    ``t`` may be a scalar or an array; the result has the same shape.
    """
    idx = HarmonicIndex(n, d)
    tt = _check_t(t)
    val = _recurrence(idx.n, idx.d, tt)[idx.d]
    return float(val) if val.ndim == 0 else val


def gegenbauer_all(n, dmax, t):
    """Values P_{n,0..dmax}(t) stacked along a new leading axis."""
    HarmonicIndex(n, dmax)
    return _recurrence(int(n), int(dmax), _check_t(t))


def _explicit_coefficients(n, d):
    """Exact monomial coefficients of P_{n,d} as {power: Fraction}.

    For n >= 3 the Gamma ratio Gamma(d-l+lam)/Gamma(lam) is the rising
    factorial (lam)_{d-l} with lam = (n-2)/2, so every term is rational.
    n = 2 is the lam -> 0 limit, which is the Chebyshev sum
    T_d(t) = (d/2) sum_l (-1)^l (d-l-1)! / (l! (d-2l)!) (2t)^{d-2l}.
    """
    if d == 0:
        return {0: Fraction(1)}
    coeffs = {}
    if n == 2:
        for l in range(d // 2 + 1):
            c = Fraction(d * math.factorial(d - l - 1), 2 * math.factorial(l) * math.factorial(d - 2 * l))
            coeffs[d - 2 * l] = (-1) ** l * c * 2 ** (d - 2 * l)
        return coeffs
    lam = Fraction(n - 2, 2)
    norm = Fraction(math.comb(n + d - 3, d))
    for l in range(d // 2 + 1):
        rising = Fraction(1)
        for j in range(d - l):
            rising *= lam + j
        c = rising / (math.factorial(l) * math.factorial(d - 2 * l))
        coeffs[d - 2 * l] = (-1) ** l * c * 2 ** (d - 2 * l) / norm
    return coeffs


def gegenbauer_eval_explicit(n, d, t):
    """Evaluate P_{n,d}(t) by direct summation of the explicit Gamma-ratio formula.

    The alternating sum cancels badly in floating point (for d = 20 the
    absolute terms exceed the result by ~1e7), so it is summed in exact
    rational arithmetic and rounded once.  Restricted to
    d <= EXPLICIT_MAX_DEGREE.
    """
    idx = HarmonicIndex(n, d)
    if idx.d > EXPLICIT_MAX_DEGREE:
        raise ValueError(f"explicit formula limited to d <= {EXPLICIT_MAX_DEGREE}, got d={idx.d}")
    num, den = _integer_coefficients(idx.n, idx.d)
    tt = _check_t(t)
    flat = [_horner_exact(num, den, float(x)) for x in tt.ravel()]
    out = np.array(flat, dtype=float).reshape(tt.shape)
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"explicit formula overflowed for n={idx.n}, d={idx.d}")
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def _integer_coefficients(n, d):
    coeffs = _explicit_coefficients(n, d)
    den = 1
    for c in coeffs.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    num = [0] * (d + 1)
    for p, c in coeffs.items():
        num[p] = int(c * den)
    return tuple(num), den


def _horner_exact(num, den, x):
    # x = m/q exactly; accumulate sum_p num[p] m^p q^(d-p), then divide by den q^d
    m, q = x.as_integer_ratio()
    acc, qpow = 0, 1
    for a in reversed(num):
        acc = acc * m + a * qpow
        qpow *= q
    return float(Fraction(acc, den * qpow // q))


def gegenbauer_zero_exact(n, d):
    """P_{n,d}(0) as an exact Fraction, via P_{n,d}(0) = -(d-1)/(n-3+d) P_{n,d-2}(0)."""
    idx = HarmonicIndex(n, d)
    if idx.d % 2:
        return Fraction(0)
    val = Fraction(1)
    for k in range(2, idx.d + 1, 2):
        val *= Fraction(-(k - 1), idx.n - 3 + k)
    return val


def gegenbauer_zero(n, d):
    return float(gegenbauer_zero_exact(n, d))


def _comb0(a, b):
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)


def dim_harmonic(n, d):
    """Dimension of the space of degree-d homogeneous harmonic polynomials in n variables."""
    idx = HarmonicIndex(n, d)
    return _comb0(idx.n + idx.d - 1, idx.n - 1) - _comb0(idx.n + idx.d - 3, idx.n - 1)


def dim_harmonic_float(n, d):
    """dim_harmonic as a float, refusing values that do not fit a double."""
    k = dim_harmonic(n, d)
    try:
        return float(k)
    except OverflowError:
        raise OverflowError(f"dim H_{{{n},{d}}} exceeds double range") from None
