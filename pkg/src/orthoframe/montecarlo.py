"""Seeded Monte Carlo estimators on the sphere and in Gaussian space.

Every estimator splits its sample budget into fixed-size chunks and draws
chunk ``i`` from the Philox substream keyed by ``(seed, tag, i)``.  Chunk
statistics are combined in chunk order, so the result is a pure function of
(inputs, seed, samples) regardless of how many worker threads run the chunks.
"""
from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .gegenbauer import dim_harmonic_float, gegenbauer_eval
from .zonal import ZonalProfile

__all__ = [
    "CHUNK",
    "substream",
    "McEstimate",
    "MembershipOracle",
    "TracelessQuadratic",
    "NoiseReport",
    "zonal_oracle",
    "full_oracle",
    "complement_oracle",
    "sample_sphere",
    "sample_subsphere",
    "sample_pair",
    "mc_mean",
    "mc_g_t",
    "zonal_harmonic",
    "noise_operator_check",
    "gaussian_moment_ratio",
    "sphere_moment_ratio",
    "quadratic_nonpositive_measure",
    "quadratic_nonpositive_measure_eigen",
    "random_traceless",
    "rank_one_stress",
]

CHUNK = 1 << 16


def _tag_key(tag):
    if isinstance(tag, int):
        return tag
    return zlib.crc32(str(tag).encode())


def substream(seed, *key):
    """Independent generator for (seed, *key); keys may be ints or strings."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(_tag_key(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int

    def to_json(self):
        return {"mean": self.mean, "stderr": self.stderr, "samples": self.samples, "seed": self.seed}

    def within(self, target, k=3.0, slack=0.0):
        return abs(self.mean - target) <= k * self.stderr + slack


# --- oracles -------------------------------------------------------------


@dataclass(frozen=True)
class MembershipOracle:
    """Deterministic point-in-set test on batches of unit vectors.

    ``predicate`` maps an (m, n) array to an (m,) bool array.  With
    ``symmetrize`` the effective set is A | -A.  Sets must have a boundary
    of measure zero; the predicate is evaluated on the exact floating input.
    ``zonal`` optionally records (profile, axis) when A is zonal.
    """

    n: int
    predicate: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    symmetrize: bool = False
    density: Optional[float] = None
    name: str = ""
    zonal: Optional[tuple] = field(default=None, compare=False)

    def raw_contains(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        out = np.asarray(self.predicate(np.atleast_2d(x)), dtype=bool)
        return bool(out[0]) if single else out

    def contains(self, x):
        if not self.symmetrize:
            return self.raw_contains(x)
        x = np.asarray(x, dtype=float)
        return self.raw_contains(x) | self.raw_contains(-x)

    __call__ = contains

    def with_symmetrize(self, flag):
        return MembershipOracle(self.n, self.predicate, flag, self.density, self.name, self.zonal)


def zonal_oracle(profile: ZonalProfile, axis=None, symmetrize=False, density=None, name="zonal"):
    if profile.kind != "indicator":
        raise TypeError("oracles need an indicator profile")
    e = np.zeros(profile.n)
    if axis is None:
        e[0] = 1.0
    else:
        e = np.asarray(axis, dtype=float)
        e = e / np.linalg.norm(e)
    return MembershipOracle(
        profile.n, lambda x: profile.contains(x @ e), symmetrize, density, name, zonal=(profile, e)
    )


def full_oracle(n):
    profile = ZonalProfile(n, "indicator", (-1.0, 1.0), symmetric=True)
    return zonal_oracle(profile, density=1.0, name="full")


def complement_oracle(oracle):
    zonal = None
    if oracle.zonal is not None:
        zonal = (oracle.zonal[0].complement(), oracle.zonal[1])
    dens = None if oracle.density is None else 1.0 - oracle.density
    return MembershipOracle(
        oracle.n, lambda x: ~np.asarray(oracle.predicate(x), dtype=bool), False, dens, f"not({oracle.name})", zonal
    )


# --- samplers ------------------------------------------------------------


def sample_sphere(n, rng, size=None):
    """Uniform points on S^{n-1} as normalized Gaussian vectors."""
    m = 1 if size is None else int(size)
    x = rng.standard_normal((m, n))
    r = np.linalg.norm(x, axis=1)
    while np.any(r == 0.0):
        bad = r == 0.0
        x[bad] = rng.standard_normal((int(bad.sum()), n))
        r = np.linalg.norm(x, axis=1)
    x /= r[:, None]
    return x[0] if size is None else x


def sample_subsphere(basis, rng, size=None):
    """Uniform points on the unit sphere of span(basis columns); basis is (n, k) orthonormal."""
    z = sample_sphere(basis.shape[1], rng, size)
    return z @ basis.T


def sample_pair(t, n, rng, size=None):
    """Pairs (x, y) with x uniform and y uniform on {<x, y> = t}.

    y = t x + sqrt(1 - t^2) u with u uniform on the unit sphere of x-perp,
    which is the law of (g x0, g y0) for Haar-random g.
    """
    if abs(t) > 1.0:
        raise ValueError("t must lie in [-1, 1]")
    if n < 2:
        raise ValueError("pairs need n >= 2")
    m = 1 if size is None else int(size)
    x = sample_sphere(n, rng, m)
    g = rng.standard_normal((m, n))
    u = g - np.sum(g * x, axis=1)[:, None] * x
    u /= np.linalg.norm(u, axis=1)[:, None]
    y = t * x + math.sqrt(1.0 - t * t) * u
    if size is None:
        return x[0], y[0]
    return x, y


# --- chunked engine ------------------------------------------------------


def _run_chunks(kernel, samples, seed, tag, workers):
    """Sum of values and of outer products over all chunks, in chunk order.

    kernel(rng, m) returns an (m, k) array of per-sample statistics.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = [min(CHUNK, samples - i) for i in range(0, samples, CHUNK)]

    def one(i):
        v = np.asarray(kernel(substream(seed, tag, i), sizes[i]), dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        return v.sum(axis=0), v.T @ v

    if workers and workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(i) for i in range(len(sizes))]
    s1 = parts[0][0].copy()
    s2 = parts[0][1].copy()
    for a, b in parts[1:]:
        s1 += a
        s2 += b
    return s1, s2


def _moments(s1, s2, samples):
    mean = s1 / samples
    if samples > 1:
        cov = (s2 - samples * np.outer(mean, mean)) / (samples - 1)
    else:
        cov = np.zeros_like(s2)
    return mean, cov / samples


def mc_mean(kernel, samples, seed, tag="mean", workers=1):
    """Mean of a scalar per-sample statistic with its standard error."""
    s1, s2 = _run_chunks(kernel, samples, seed, tag, workers)
    mean, cov = _moments(s1, s2, samples)
    return McEstimate(float(mean[0]), float(math.sqrt(max(cov[0, 0], 0.0))), int(samples), int(seed))


def mc_g_t(f, h, t, samples, seed, workers=1):
    """Unbiased estimate of G_t(1_A, 1_B) by fixed-inner-product pair sampling."""
    if f.n != h.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {h.n}")

    def kernel(rng, m):
        x, y = sample_pair(t, f.n, rng, m)
        return (f.contains(x) & h.contains(y)).astype(float)

    return mc_mean(kernel, samples, seed, tag=("g_t", repr(float(t))), workers=workers)


# --- hypercontractivity --------------------------------------------------


@dataclass(frozen=True)
class TracelessQuadratic:
    """Degree-2 harmonic x -> x^T M x with M symmetric and traceless."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        if np.max(np.abs(m - m.T), initial=0.0) > 1e-12:
            raise ValueError("matrix must be symmetric")
        if abs(np.trace(m)) > 1e-12:
            raise ValueError(f"matrix must be traceless, trace = {np.trace(m):.3e}")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self):
        return self.matrix.shape[0]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.einsum("...i,ij,...j->...", x, self.matrix, x)

    def gaussian_second_moment(self):
        """E (X^T M X)^2 = 2 tr(M^2) for X standard Gaussian and tr M = 0."""
        return 2.0 * float(np.sum(self.matrix * self.matrix))


def random_traceless(n, rng):
    g = rng.standard_normal((n, n))
    m = (g + g.T) / 2.0
    m[np.diag_indices(n)] -= np.trace(m) / n
    return TracelessQuadratic(m)


def rank_one_stress(n, sign=1.0):
    """sign * diag(n-1, -1, ..., -1): the near-rank-1 extreme."""
    diag = -np.ones(n)
    diag[0] = n - 1
    return TracelessQuadratic(sign * np.diag(diag))


def zonal_harmonic(n, d, axis=None):
    """Degree-d zonal harmonic polynomial F(z) = |z|^d P_{n,d}(<z, e>/|z|)."""
    e = np.zeros(n)
    if axis is None:
        e[0] = 1.0
    else:
        e = np.asarray(axis, dtype=float) / np.linalg.norm(axis)

    def F(z):
        z = np.asarray(z, dtype=float)
        r = np.linalg.norm(z, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        t = np.clip((z @ e) / safe, -1.0, 1.0)
        return r**d * gegenbauer_eval(n, d, t)

    return F


def _gaussian_norm_sq_zonal(n, d):
    # sphere norm^2 of P_{n,d}(<x,e>) is 1/dim; E|Z|^{2d} = 2^d Gamma(n/2+d)/Gamma(n/2)
    log_radial = d * math.log(2.0) + math.lgamma(n / 2 + d) - math.lgamma(n / 2)
    return math.exp(log_radial) / dim_harmonic_float(n, d)


@dataclass(frozen=True)
class NoiseReport:
    d: int
    n: int
    rho: float
    expected: float
    estimate: McEstimate
    passed: bool

    def to_json(self):
        return {
            "d": self.d,
            "n": self.n,
            "rho": self.rho,
            "expected": self.expected,
            "estimate": self.estimate.to_json(),
            "passed": self.passed,
        }


def noise_operator_check(d, n, rho, samples, seed, quadratic=None, workers=1):
    """Check T_rho F = rho^d F for a degree-d harmonic F by Gaussian sampling.

    Estimates E[F(X) F(rho X + sqrt(1 - rho^2) Y)] / E[F(X)^2], which equals
    <F, T_rho F> / ||F||^2 and hence rho^d exactly when F is an eigenfunction.
    F is the zonal harmonic of degree d, or ``quadratic`` when given (d = 2).
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if quadratic is not None:
        if d != 2 or quadratic.n != n:
            raise ValueError("a quadratic test function needs d = 2 and matching n")
        F = quadratic
        norm_sq = quadratic.gaussian_second_moment()
    else:
        F = zonal_harmonic(n, d)
        norm_sq = _gaussian_norm_sq_zonal(n, d)
    c = math.sqrt(1.0 - rho * rho)

    def kernel(rng, m):
        x = rng.standard_normal((m, n))
        y = rng.standard_normal((m, n))
        return F(x) * F(rho * x + c * y) / norm_sq

    est = mc_mean(kernel, samples, seed, tag=("noise", d, repr(float(rho))), workers=workers)
    expected = rho**d
    return NoiseReport(d, n, float(rho), expected, est, est.within(expected, 3.0, 1e-12))


def _ratio_estimate(kernel, q, samples, seed, tag, workers):
    """||F||_q / ||F||_2 from sampled values with a delta-method standard error."""
    q = float(q)

    def stats(rng, m):
        v = np.abs(kernel(rng, m))
        return np.column_stack([v**q, v * v])

    s1, s2 = _run_chunks(stats, samples, seed, tag, workers)
    mean, cov = _moments(s1, s2, samples)
    a, b = mean
    if a <= 0.0 or b <= 0.0:
        return McEstimate(float("nan"), float("nan"), int(samples), int(seed))
    ratio = a ** (1.0 / q) / math.sqrt(b)
    grad = np.array([ratio / (q * a), -ratio / (2.0 * b)])
    var = float(grad @ cov @ grad)
    return McEstimate(float(ratio), math.sqrt(max(var, 0.0)), int(samples), int(seed))


def gaussian_moment_ratio(quad, moment_q, samples, seed, workers=1):
    """||f||_{L^q(gamma)} / ||f||_{L^2(gamma)} for f(x) = x^T M x."""
    if moment_q < 2:
        raise ValueError("moment_q must be >= 2")
    n = quad.n
    return _ratio_estimate(
        lambda rng, m: quad(rng.standard_normal((m, n))), moment_q, samples, seed, ("gauss_ratio", repr(float(moment_q))), workers
    )


def sphere_moment_ratio(func, n, moment_q, samples, seed, workers=1):
    """||f||_{L^q(S^{n-1})} / ||f||_{L^2(S^{n-1})} for a function on points of R^n."""
    if moment_q < 2:
        raise ValueError("moment_q must be >= 2")
    return _ratio_estimate(
        lambda rng, m: func(sample_sphere(n, rng, m)), moment_q, samples, seed, ("sphere_ratio", repr(float(moment_q))), workers
    )


def quadratic_nonpositive_measure(quad, samples, seed, workers=1):
    """mu{x in S^{n-1} : x^T M x <= 0} by uniform sphere sampling."""
    if not np.any(quad.matrix):
        raise ValueError("M must be nonzero")
    n = quad.n
    return mc_mean(
        lambda rng, m: (quad(sample_sphere(n, rng, m)) <= 0.0).astype(float), samples, seed, "nonpos", workers
    )


def quadratic_nonpositive_measure_eigen(quad, samples, seed, workers=1):
    """Same measure through the spectrum: Pr[sum_i lam_i X_i^2 <= 0]."""
    if not np.any(quad.matrix):
        raise ValueError("M must be nonzero")
    lam = np.linalg.eigvalsh(quad.matrix)
    return mc_mean(
        lambda rng, m: ((rng.standard_normal((m, lam.size)) ** 2 @ lam) <= 0.0).astype(float),
        samples,
        seed,
        "nonpos_eigen",
        workers,
    )
