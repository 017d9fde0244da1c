"""Sampled Morse-spectrum polytopes and their scalar images under root functionals."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cocycle import BilinearControlSystem, ControlSignal, evolve_trail, polar_exponent
from .lie import (
    AlgebraSpec,
    CartanVector,
    FlagType,
    RootFunctional,
    WeylElement,
    moved_negative_roots,
    pi_sets,
    simple_roots,
    weyl_subgroup,
)

DEFAULT_FLAG_TOL = 0.1
VERTEX_TOL = 1e-9


@dataclass(frozen=True)
class SamplingPlan:
    """Which controls feed the polytope estimate.

    Random signals switch between corners of the control box with dwell
    times drawn uniformly from ``[dwell_min, dwell_max]`` (rounded to ``dt``).
    """

    horizon: float = 50.0
    n_random: int = 24
    dwell_min: float = 0.5
    dwell_max: float = 3.0
    include_vertices: bool = True
    include_zero: bool = True
    seed: int = 0
    dt: float = 1e-2

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.n_random < 0:
            raise ValueError("n_random must be non-negative")
        if not 0 < self.dwell_min <= self.dwell_max:
            raise ValueError("need 0 < dwell_min <= dwell_max")
        if not self.include_vertices:
            raise ValueError("constant extremal controls are always part of the plan")

    def signals(self, system: BilinearControlSystem) -> list[ControlSignal]:
        out = []
        if system.n_controls == 0:
            return [ControlSignal.constant(())]
        corners = system.vertices()
        out.extend(ControlSignal.constant(v) for v in corners)
        if self.include_zero:
            out.append(ControlSignal.constant(np.zeros(system.n_controls)))
        rng = np.random.default_rng(self.seed)
        for _ in range(self.n_random):
            segs, total = [], 0.0
            while total < self.horizon:
                d = rng.uniform(self.dwell_min, self.dwell_max)
                d = max(self.dt, round(d / self.dt) * self.dt)
                segs.append((d, tuple(corners[rng.integers(len(corners))])))
                total += d
            out.append(ControlSignal(tuple(segs)))
        return out


def _affine_frame(points: np.ndarray, tol: float):
    center = points.mean(axis=0)
    centered = points - center
    if len(points) == 1:
        return center, np.zeros((0, points.shape[1]))
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(1.0, float(np.abs(points).max()))
    rank = int(np.sum(s > tol * scale * math.sqrt(len(points))))
    return center, vt[:rank]


def hull_vertices(points: np.ndarray, tol: float = VERTEX_TOL) -> np.ndarray:
    """Vertices of the convex hull of ``points`` (rows), in the affine hull's dimension."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or len(points) == 0:
        raise ValueError("need a nonempty 2-d array of points")
    center, basis = _affine_frame(points, tol)
    if len(basis) == 0:
        return points[:1].copy()
    coords = (points - center) @ basis.T
    if len(basis) == 1:
        idx = [int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))]
    else:
        from scipy.spatial import ConvexHull

        idx = sorted(ConvexHull(coords).vertices.tolist())
    return _dedupe(points[idx], tol)


def _dedupe(points: np.ndarray, tol: float) -> np.ndarray:
    keep: list[np.ndarray] = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= tol for q in keep):
            keep.append(p)
    keep.sort(key=lambda p: tuple(-p))
    return np.array(keep)


@dataclass(frozen=True)
class SpectrumPolytope:
    """Convex hull of finitely many exponent vectors.

    ``vertices`` are the hull vertices; ``theta_phi`` is the flag type used
    for symmetrisation.  ``samples`` holds the raw (chamber-ordered) polar
    exponents when the polytope was estimated from trajectories.
    """

    spec: AlgebraSpec
    vertices: tuple[CartanVector, ...]
    theta_phi: FlagType
    samples: tuple[CartanVector, ...] = ()
    halving_delta: float = 0.0
    symmetrization_residual: float = 0.0
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("a spectrum polytope needs at least one vertex")

    @classmethod
    def from_points(cls, spec: AlgebraSpec, points, theta_phi: FlagType | None = None,
                    symmetrize: bool = True, flag_tol: float = DEFAULT_FLAG_TOL) -> "SpectrumPolytope":
        """Hull of explicit points; ``theta_phi`` is inferred when not given."""
        vecs = [p if isinstance(p, CartanVector) else CartanVector.from_flat(spec, p) for p in points]
        raw = hull_vertices(np.array([v.flat for v in vecs]))
        base = cls(spec, tuple(CartanVector.from_flat(spec, r) for r in raw),
                   theta_phi if theta_phi is not None else FlagType.empty(spec), samples=tuple(vecs))
        warnings: tuple[str, ...] = ()
        if theta_phi is None:
            theta_phi, warnings = _infer(base.vertices, spec, flag_tol)
        base = SpectrumPolytope(spec, base.vertices, theta_phi, tuple(vecs), warnings=warnings)
        return symmetrize_polytope(base) if symmetrize else base

    def matrix(self) -> np.ndarray:
        return np.array([v.flat for v in self.vertices])

    def values(self, root: RootFunctional) -> np.ndarray:
        return self.matrix() @ root.vector(self.spec)

    def scaled(self, c: float) -> "SpectrumPolytope":
        if c <= 0:
            raise ValueError("scale must be positive")
        return SpectrumPolytope(self.spec, tuple(v.scaled(c) for v in self.vertices), self.theta_phi,
                                tuple(v.scaled(c) for v in self.samples))

    def contains(self, point: Sequence[float], tol: float = 1e-7) -> bool:
        """Hull membership by LP feasibility."""
        from scipy.optimize import linprog

        v = self.matrix()
        p = np.asarray(point.flat if isinstance(point, CartanVector) else point, dtype=float)
        a_eq = np.vstack([v.T, np.ones(len(v))])
        b_eq = np.concatenate([p, [1.0]])
        # minimise the l1 residual; feasible iff it is ~0
        m, d = len(v), len(p) + 1
        c = np.concatenate([np.zeros(m), np.ones(2 * d)])
        a = np.hstack([a_eq, np.eye(d), -np.eye(d)])
        res = linprog(c, A_eq=a, b_eq=b_eq, bounds=[(0, None)] * (m + 2 * d), method="highs")
        return bool(res.success and res.fun <= tol)


def _simple_minima(vertices: Sequence[CartanVector], spec: AlgebraSpec) -> dict[RootFunctional, float]:
    return {a: min(a(v) for v in vertices) for a in simple_roots(spec)}


def _infer(vertices, spec, tol) -> tuple[FlagType, tuple[str, ...]]:
    mins = _simple_minima(vertices, spec)
    theta = FlagType(spec, frozenset(a for a, m in mins.items() if m <= tol))
    warnings = tuple(
        f"flag-type margin ambiguous: min {a.label(spec)} = {m:.6g} lies in ({tol:g}, {2 * tol:g})"
        for a, m in mins.items() if tol < m < 2 * tol
    )
    return theta, warnings


def infer_flag_type(polytope: SpectrumPolytope, tol: float = DEFAULT_FLAG_TOL) -> tuple[FlagType, tuple[str, ...]]:
    """Simple roots whose minimum over the raw exponents is at most ``tol``.

    Returns the flag type and a tuple of ambiguity warnings (values in
    ``(tol, 2 tol)``).  Raw samples are used when available because the
    symmetrised hull is no longer chamber-ordered.
    """
    pts = polytope.samples or polytope.vertices
    return _infer(pts, polytope.spec, tol)


def symmetrize_polytope(polytope: SpectrumPolytope) -> SpectrumPolytope:
    """Orbit union under ``W_{theta_phi}`` followed by a fresh hull."""
    spec = polytope.spec
    group = sorted(weyl_subgroup(polytope.theta_phi), key=lambda w: (w.length(), str(w)))
    pts = [w.act_cartan(v).flat for v in polytope.vertices for w in group]
    verts = hull_vertices(np.array(pts))
    vecs = tuple(CartanVector.from_flat(spec, r) for r in verts)
    out = SpectrumPolytope(spec, vecs, polytope.theta_phi, polytope.samples,
                           polytope.halving_delta, 0.0, polytope.warnings)
    return SpectrumPolytope(spec, vecs, polytope.theta_phi, polytope.samples,
                            polytope.halving_delta, weyl_residual(out), polytope.warnings)


def weyl_residual(polytope: SpectrumPolytope) -> float:
    """Largest distance from ``w v`` to the nearest vertex over ``w`` in ``W_{theta_phi}``."""
    verts = polytope.matrix()
    worst = 0.0
    for w in weyl_subgroup(polytope.theta_phi):
        for v in polytope.vertices:
            img = w.act_cartan(v).flat
            worst = max(worst, float(np.min(np.max(np.abs(verts - img), axis=1))))
    return worst


def _threads(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    try:
        return max(1, int(os.environ.get("FLAGDYN_THREADS", "1")))
    except ValueError:
        return 1


def sample_polar_exponents(system: BilinearControlSystem, plan: SamplingPlan,
                           workers: int | None = None) -> tuple[list[CartanVector], float]:
    """Polar exponents at the plan's horizon and the largest change versus half the horizon."""
    signals = plan.signals(system)

    def run(sig):
        trail = evolve_trail(system, sig, plan.horizon, dt=plan.dt)
        full = polar_exponent(trail)
        half = polar_exponent(trail, float(trail.times[len(trail.times) // 2]))
        return full, float(np.max(np.abs(full.flat - half.flat)))

    n = _threads(workers)
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            results = list(pool.map(run, signals))
    else:
        results = [run(s) for s in signals]
    return [r[0] for r in results], max(r[1] for r in results)


def estimate_attractor_polytope(system: BilinearControlSystem, plan: SamplingPlan,
                                flag_tol: float = DEFAULT_FLAG_TOL,
                                workers: int | None = None) -> SpectrumPolytope:
    """Hull of sampled finite-horizon polar exponents, symmetrised by the inferred ``W_{theta_phi}``."""
    samples, delta = sample_polar_exponents(system, plan, workers)
    spec = system.spec
    raw = hull_vertices(np.array([s.flat for s in samples]))
    verts = tuple(CartanVector.from_flat(spec, r) for r in raw)
    theta_phi, warnings = _infer(samples, spec, flag_tol)
    base = SpectrumPolytope(spec, verts, theta_phi, tuple(samples), delta, 0.0, warnings)
    return symmetrize_polytope(base)


@dataclass(frozen=True)
class ScalarSpectrum:
    """Finite union of closed intervals, kept sorted and merged."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        ivs = sorted((float(a), float(b)) for a, b in self.intervals)
        if any(a > b for a, b in ivs):
            raise ValueError("interval with lo > hi")
        merged: list[list[float]] = []
        for a, b in ivs:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        object.__setattr__(self, "intervals", tuple((a, b) for a, b in merged))

    @classmethod
    def point(cls, x: float) -> "ScalarSpectrum":
        return cls(((x, x),))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def lo(self) -> float:
        if self.is_empty:
            raise ValueError("empty spectrum has no minimum")
        return self.intervals[0][0]

    @property
    def hi(self) -> float:
        if self.is_empty:
            raise ValueError("empty spectrum has no maximum")
        return self.intervals[-1][1]

    def union(self, other: "ScalarSpectrum") -> "ScalarSpectrum":
        return ScalarSpectrum(self.intervals + other.intervals)

    def scaled(self, c: float) -> "ScalarSpectrum":
        if c <= 0:
            raise ValueError("scale must be positive")
        return ScalarSpectrum(tuple((c * a, c * b) for a, b in self.intervals))

    def shifted(self, d: float) -> "ScalarSpectrum":
        return ScalarSpectrum(tuple((a + d, b + d) for a, b in self.intervals))

    def within(self, lo: float, hi: float) -> bool:
        return all(lo <= a and b <= hi for a, b in self.intervals)

    def subset_of(self, other: "ScalarSpectrum") -> bool:
        return all(any(c <= a and b <= d for c, d in other.intervals) for a, b in self.intervals)

    def __str__(self) -> str:
        if self.is_empty:
            return "{}"
        return " U ".join(f"[{a:.6g}, {b:.6g}]" for a, b in self.intervals)


def scalar_spectrum(polytope: SpectrumPolytope, roots: Iterable[RootFunctional]) -> ScalarSpectrum:
    """Union over ``roots`` of the image interval ``alpha(hull)``."""
    ivs = []
    for a in roots:
        vals = polytope.values(a)
        ivs.append((float(vals.min()), float(vals.max())))
    return ScalarSpectrum(tuple(ivs))


def center_symmetrize(spectrum: ScalarSpectrum) -> ScalarSpectrum:
    """Smallest interval ``[-m, m]`` containing the spectrum."""
    if spectrum.is_empty:
        return spectrum
    m = max(abs(spectrum.lo), abs(spectrum.hi))
    return ScalarSpectrum(((0.0 - m, m),))  # avoid -0.0 in output


def regular_lyapunov_values(lambda_plus: CartanVector, theta: FlagType, w: WeylElement) -> list[float]:
    """``alpha(lambda_plus)`` for every ``alpha`` in ``w(Pi^- \\ <theta>)``, with multiplicity."""
    if not lambda_plus.in_closed_chamber():
        raise ValueError("lambda_plus must lie in the closed positive chamber")
    roots = sorted(moved_negative_roots(theta, w), key=lambda r: r.sort_key())
    return sorted(a(lambda_plus) for a in roots)


def regular_lyapunov_spectrum(lambda_plus: CartanVector, theta: FlagType, w: WeylElement,
                              tol: float = 1e-12) -> tuple[float, ...]:
    """Distinct regular Lyapunov exponents on the flag manifold of type ``theta`` near ``E(w)``."""
    out: list[float] = []
    for v in regular_lyapunov_values(lambda_plus, theta, w):
        if not out or v - out[-1] > tol:
            out.append(v)
    return tuple(out)


@dataclass(frozen=True)
class EntropyBound:
    value: float
    valid: bool
    center_spectrum: ScalarSpectrum
    plus_roots: frozenset[RootFunctional] = field(default_factory=frozenset)


def entropy_lower_bound(polytope: SpectrumPolytope, theta_phi: FlagType, theta: FlagType,
                        w: WeylElement, tol: float = 0.05) -> EntropyBound:
    """Minimal unstable-volume growth rate over the polytope.

    ``valid`` records whether the center spectrum lies in ``[-tol, tol]``,
    which is the hypothesis under which the value bounds the invariance
    entropy.  An empty center spectrum counts as valid.
    """
    pi = pi_sets(theta_phi, theta, w)
    if pi.plus:
        total = sum(r.vector(polytope.spec) for r in pi.plus)
        value = float(np.min(polytope.matrix() @ total))
    else:
        value = 0.0
    center = scalar_spectrum(polytope, pi.zero)
    return EntropyBound(value, center.within(-tol, tol), center, pi.plus)
