"""Extract n pairwise orthogonal members of a dense set A in S^{n-1}.

The search mirrors the slicing induction: at each level pick a point x of A
(inside the current subspace) whose orthogonal slice keeps as much of A as
possible, recurse into the slice, and once the subspace is n0-dimensional
try Haar-random orthonormal frames until one lands entirely in A.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .gegenbauer import gegenbauer_eval
from .montecarlo import McEstimate, MembershipOracle, mc_mean, sample_subsphere, substream
from .zonal import ZonalProfile, funk_hecke_spectrum, make_quadrature

__all__ = [
    "FinderConfig",
    "SubspaceFrame",
    "OrthoFrame",
    "TerminalResult",
    "FinderResult",
    "SparseSetError",
    "slice_density",
    "select_next",
    "terminal_search",
    "find_orthogonal_frame",
    "verify_frame",
    "mean_slice_density",
]

ORTHO_TOL = 1e-9
NORM_TOL = 1e-12
SUBSPACE_TOL = 1e-9


class SparseSetError(RuntimeError):
    """Rejection sampling found no member of A in the current subsphere."""


@dataclass(frozen=True)
class FinderConfig:
    candidates_per_level: int = 16
    slice_samples: int = 2000
    n0: int = 4
    terminal_trials: int = 200
    seed: int = 0
    max_rejections: int = 100_000
    restrict_to_b: bool = False
    workers: int = 1

    def __post_init__(self):
        for name in ("candidates_per_level", "slice_samples", "terminal_trials", "max_rejections", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.n0 < 2:
            raise ValueError("n0 must be >= 2")


@dataclass
class SubspaceFrame:
    """Working subspace (orthonormal columns of ``basis``) and the points chosen so far."""

    ambient_n: int
    basis: np.ndarray
    chosen: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def full(cls, n):
        return cls(n, np.eye(n))

    @property
    def dim(self):
        return self.basis.shape[1]

    def contains_point(self, x, tol=SUBSPACE_TOL):
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.basis @ (self.basis.T @ x))) <= tol

    def complement_of(self, x):
        """Orthonormal basis of x-perp inside the current subspace."""
        z = self.basis.T @ np.asarray(x, dtype=float)
        z /= np.linalg.norm(z)
        # Householder reflection sending z to e_1; its other columns span z-perp
        v = z.copy()
        v[0] += math.copysign(1.0, z[0] if z[0] != 0 else 1.0)
        v /= np.linalg.norm(v)
        h = np.eye(z.size) - 2.0 * np.outer(v, v)
        return self.basis @ h[:, 1:]

    def split_off(self, x):
        """Subspace frame after accepting x: x joins ``chosen``, basis becomes x-perp."""
        x = np.asarray(x, dtype=float)
        x = x / np.linalg.norm(x)
        chosen = self.chosen + [x]
        q = self.complement_of(x)
        c = np.array(chosen).T
        q = q - c @ (c.T @ q)
        q, r = np.linalg.qr(q)
        q *= np.where(np.diag(r) < 0, -1.0, 1.0)
        return SubspaceFrame(self.ambient_n, q, chosen)


@dataclass(frozen=True)
class OrthoFrame:
    vectors: np.ndarray

    def to_json(self):
        return [[float(c) for c in v] for v in self.vectors]


def verify_frame(vectors, oracle, ortho_tol=ORTHO_TOL, norm_tol=NORM_TOL):
    """Pairwise orthogonality, unit norms and raw membership of every vector."""
    v = np.asarray(vectors, dtype=float)
    gram = v @ v.T
    off = gram - np.diag(np.diag(gram))
    max_dot = float(np.max(np.abs(off))) if len(v) > 1 else 0.0
    max_norm_dev = float(np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0)))
    members = np.asarray(oracle.raw_contains(v), dtype=bool)
    return {
        "count": int(len(v)),
        "max_abs_dot": max_dot,
        "max_norm_deviation": max_norm_dev,
        "all_members": bool(members.all()),
        "passed": bool(len(v) == oracle.n and max_dot <= ortho_tol and max_norm_dev <= norm_tol and members.all()),
    }


def slice_density(oracle, x, frame, samples, seed, stream=()):
    """Monte Carlo measure of A on the unit sphere of x-perp within the current subspace."""
    x = np.asarray(x, dtype=float)
    if not frame.contains_point(x):
        raise ValueError("x does not lie in the current subspace")
    if not oracle.contains(x):
        raise ValueError("x is not a member of the set")
    w = frame.complement_of(x)
    return mc_mean(
        lambda rng, m: oracle.contains(sample_subsphere(w, rng, m)).astype(float),
        samples,
        seed,
        tag=("slice",) + tuple(stream),
    )


def _degree_two_filter(oracle, frame):
    """Predicate x -> f^{=2}(x) <= 0 for the slice of a zonal A in the current subspace."""
    profile, axis = oracle.zonal
    if oracle.symmetrize:
        profile = _symmetrized(profile)
    proj = frame.basis.T @ axis
    r = float(np.linalg.norm(proj))
    k = frame.dim
    sliced = profile.restricted(k, min(r, 1.0))
    spec = funk_hecke_spectrum(sliced, make_quadrature(k, 64), 2)
    g2 = spec.coeffs[2]
    if r == 0.0 or g2 == 0.0:
        return lambda pts: np.ones(len(pts), dtype=bool)
    u = frame.basis @ (proj / r)
    return lambda pts: g2 * gegenbauer_eval(k, 2, np.clip(pts @ u, -1.0, 1.0)) <= 0.0


def _symmetrized(profile):
    pieces = sorted(profile.intervals + [(-b, -a) for a, b in profile.intervals])
    merged = []
    for a, b in pieces:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    bp = tuple(v for ab in merged for v in ab)
    return ZonalProfile(profile.n, "indicator", bp, symmetric=True)


def _draw_candidates(oracle, frame, cfg, level):
    rng = substream(cfg.seed, "candidates", level)
    keep = _degree_two_filter(oracle, frame) if (cfg.restrict_to_b and oracle.zonal is not None) else None
    batch = max(64, 4 * cfg.candidates_per_level)
    found, misses = [], 0
    while len(found) < cfg.candidates_per_level:
        pts = sample_subsphere(frame.basis, rng, batch)
        ok = oracle.contains(pts)
        if keep is not None:
            ok &= keep(pts)
        for p, good in zip(pts, ok):
            if good:
                found.append(p)
                misses = 0
                if len(found) == cfg.candidates_per_level:
                    break
            else:
                misses += 1
                if misses >= cfg.max_rejections:
                    raise SparseSetError(
                        f"{cfg.max_rejections} consecutive rejections at level {level} (subspace dim {frame.dim})"
                    )
    return found


def select_next(oracle, frame, cfg, level=0):
    """Best of ``candidates_per_level`` members of A by estimated slice density.

    Returns (x, estimate, all_estimates); ties go to the first drawn.
    """
    if frame.dim < cfg.n0 + 1:
        raise ValueError(f"subspace dim {frame.dim} leaves no room above n0={cfg.n0}")
    cands = _draw_candidates(oracle, frame, cfg, level)

    def score(i):
        return slice_density(oracle, cands[i], frame, cfg.slice_samples, cfg.seed, stream=(level, i))

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            ests = list(pool.map(score, range(len(cands))))
    else:
        ests = [score(i) for i in range(len(cands))]
    best = int(np.argmax([e.mean for e in ests]))
    return cands[best], ests[best], ests


@dataclass(frozen=True)
class TerminalResult:
    vectors: Optional[np.ndarray]
    trials: int
    best_member_count: int

    @property
    def success(self):
        return self.vectors is not None


def _haar_orthogonal(k, rng):
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def terminal_search(oracle, frame, cfg, rng=None):
    """Haar-random orthonormal frames of the current subspace until one lies in A."""
    rng = rng if rng is not None else substream(cfg.seed, "terminal")
    k = frame.dim
    best = 0
    for trial in range(1, cfg.terminal_trials + 1):
        vecs = (frame.basis @ _haar_orthogonal(k, rng)).T
        ok = oracle.contains(vecs)
        best = max(best, int(ok.sum()))
        if ok.all():
            return TerminalResult(vecs, trial, k)
    return TerminalResult(None, cfg.terminal_trials, best)


@dataclass
class FinderResult:
    success: bool
    frame: Optional[OrthoFrame]
    levels_completed: int
    level_estimates: List[McEstimate]
    terminal: Optional[TerminalResult]
    verification: Optional[dict] = None
    reason: str = ""

    def to_json(self):
        return {
            "success": self.success,
            "frame": self.frame.to_json() if self.frame is not None else None,
            "levels_completed": self.levels_completed,
            "level_estimates": [e.to_json() for e in self.level_estimates],
            "terminal_trials": self.terminal.trials if self.terminal else 0,
            "verification": self.verification,
            "reason": self.reason,
        }


def _sign_correct(vectors, oracle):
    out = []
    for v in vectors:
        v = v / np.linalg.norm(v)
        out.append(v if oracle.raw_contains(v) else -v)
    return np.array(out)


def find_orthogonal_frame(oracle: MembershipOracle, cfg: FinderConfig = FinderConfig()):
    """Run the slicing search; failures come back as a FinderResult with success=False."""
    n = oracle.n
    frame = SubspaceFrame.full(n)
    target = min(cfg.n0, n)
    estimates = []
    level = 0
    try:
        while frame.dim > target:
            x, est, _ = select_next(oracle, frame, cfg, level)
            estimates.append(est)
            frame = frame.split_off(x)
            level += 1
    except SparseSetError as exc:
        return FinderResult(False, None, level, estimates, None, reason=str(exc))
    term = terminal_search(oracle, frame, cfg, substream(cfg.seed, "terminal"))
    if not term.success:
        return FinderResult(
            False, None, level, estimates, term,
            reason=f"terminal search failed after {term.trials} trials (best {term.best_member_count}/{frame.dim})",
        )
    vecs = np.vstack([np.array(frame.chosen).reshape(-1, n), term.vectors])
    vecs = _sign_correct(vecs, oracle)
    check = verify_frame(vecs, oracle)
    if not check["passed"]:
        return FinderResult(False, None, level, estimates, term, check, reason="output failed verification")
    return FinderResult(True, OrthoFrame(vecs), level, estimates, term, check)


def mean_slice_density(oracle, points, slice_samples, seed):
    """Average of slice_density over ``points`` members of A drawn uniformly by rejection.

    Times mu(A) this estimates G_0(1_A, 1_A).
    """
    n = oracle.n
    frame = SubspaceFrame.full(n)
    rng = substream(seed, "slice_points")
    xs = []
    while len(xs) < points:
        pts = sample_subsphere(frame.basis, rng, 4 * points)
        xs.extend(pts[oracle.contains(pts)][: points - len(xs)])
    means = np.array(
        [slice_density(oracle, x, frame, slice_samples, seed, stream=("avg", i)).mean for i, x in enumerate(xs)]
    )
    stderr = float(means.std(ddof=1) / math.sqrt(points)) if points > 1 else 0.0
    return McEstimate(float(means.mean()), stderr, int(points * slice_samples), int(seed))
