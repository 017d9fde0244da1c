"""Hyperbolicity verdicts for chain control sets from their Morse spectra."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from .lie import (
    AlgebraSpec,
    CartanVector,
    FlagType,
    LieError,
    PiTriple,
    RootFunctional,
    WeylElement,
    bundle_dims,
    coset_representative,
    double_cosets,
    flag_manifold_name,
    pi_sets,
    proper_flag_types,
    simple_roots,
    theta_of,
)
from .spectrum import ScalarSpectrum, SpectrumPolytope, center_symmetrize, scalar_spectrum


class Verdict(str, enum.Enum):
    UNIFORM = "uniformly hyperbolic"
    PARTIAL = "partially hyperbolic"
    NOT_PARTIAL = "not partially hyperbolic"
    DEGENERATE = "degenerate"

    def __str__(self) -> str:
        return self.value

    @property
    def hyperbolic(self) -> bool:
        """Partially hyperbolic in the wide sense (uniform is the special case without center)."""
        return self in (Verdict.UNIFORM, Verdict.PARTIAL)


class DescriptorError(ValueError):
    pass


@dataclass(frozen=True)
class ChainControlSetDescriptor:
    theta_phi: FlagType
    theta: FlagType
    w: WeylElement
    pi: PiTriple
    dims: tuple[int, int, int]
    minus: ScalarSpectrum
    zero: ScalarSpectrum
    plus: ScalarSpectrum

    def __post_init__(self):
        if tuple(self.dims) != bundle_dims(self.pi):
            raise DescriptorError(f"dims {self.dims} disagree with the root sets {bundle_dims(self.pi)}")
        if not self.minus.is_empty and self.minus.hi >= 0:
            raise DescriptorError(f"stable spectrum {self.minus} is not negative")
        if not self.plus.is_empty and self.plus.lo <= 0:
            raise DescriptorError(f"unstable spectrum {self.plus} is not positive")

    @property
    def manifold(self) -> str:
        return flag_manifold_name(self.theta)

    @classmethod
    def bare(cls, dims, minus=(), zero=(), plus=(), spec: AlgebraSpec | None = None):
        """Descriptor from spectra and dimensions only; placeholder root sets are synthesised.

        Handy for exercising the decision rule on hand-written spectra.
        """
        spec = spec or AlgebraSpec((max(2, sum(dims) + 1),))
        n = spec.factors[0]
        pool = iter([RootFunctional(0, i, j) for i in range(n) for j in range(i + 1, n)])
        d_minus, d_zero, d_plus = dims
        plus_roots = frozenset(next(pool) for _ in range(d_plus))
        zero_roots = frozenset(next(pool) for _ in range(d_zero))
        minus_roots = frozenset(-next(pool) for _ in range(d_minus))
        pi = PiTriple(plus_roots, zero_roots, minus_roots)
        empty = FlagType.empty(spec)
        return cls(empty, empty, WeylElement.identity(spec), pi, tuple(dims),
                   ScalarSpectrum(tuple(minus)), ScalarSpectrum(tuple(zero)), ScalarSpectrum(tuple(plus)))


def describe(polytope: SpectrumPolytope, theta: FlagType, w: WeylElement,
             theta_phi: FlagType | None = None) -> ChainControlSetDescriptor:
    """Root sets, bundle dimensions and Morse spectra of ``E_theta(w)``.

    The center spectrum is closed up to the symmetric interval it must be;
    on a symmetrised polytope this changes nothing.
    """
    theta_phi = polytope.theta_phi if theta_phi is None else theta_phi
    pi = pi_sets(theta_phi, theta, w)
    return ChainControlSetDescriptor(
        theta_phi, theta, w, pi, bundle_dims(pi),
        scalar_spectrum(polytope, pi.minus),
        center_symmetrize(scalar_spectrum(polytope, pi.zero)),
        scalar_spectrum(polytope, pi.plus),
    )


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    margin: float
    trace: str


def classify(desc: ChainControlSetDescriptor, gap_tol: float = 0.0) -> Classification:
    """Separate center rates from stable and unstable rates with a strict gap."""
    if gap_tol < 0:
        raise ValueError("gap_tol must be non-negative")
    d_minus, d_zero, d_plus = desc.dims
    if d_minus + d_plus == 0:
        return Classification(Verdict.DEGENERATE, 0.0, "dim E- + dim E+ = 0")
    top = desc.plus.lo if not desc.plus.is_empty else math.inf
    bottom = -desc.minus.hi if not desc.minus.is_empty else math.inf
    if d_zero == 0:
        return Classification(Verdict.UNIFORM, min(top, bottom), "empty center roots")
    if desc.zero.is_empty:
        raise DescriptorError("center roots present but center spectrum empty")
    upper = top - desc.zero.hi
    lower = desc.zero.lo - (desc.minus.hi if not desc.minus.is_empty else -math.inf)
    margin = min(upper, lower) - gap_tol
    which = "min L+ - max L0" if upper <= lower else "min L0 - max L-"
    if margin > 0:
        return Classification(Verdict.PARTIAL, margin, f"{which} - gap_tol > 0")
    return Classification(Verdict.NOT_PARTIAL, margin, f"{which} - gap_tol <= 0")


@dataclass(frozen=True)
class CaseRow:
    manifold: str
    theta: FlagType
    block: frozenset
    descriptor: ChainControlSetDescriptor
    classification: Classification

    @property
    def w(self) -> WeylElement:
        return self.descriptor.w


@dataclass(frozen=True)
class CaseReport:
    theta_phi: FlagType
    rows: tuple[CaseRow, ...]

    @property
    def all_hyperbolic(self) -> bool:
        return all(r.classification.verdict.hyperbolic for r in self.rows)

    def row(self, manifold: str, w: str) -> CaseRow:
        for r in self.rows:
            if r.manifold == manifold and r.w.short_label() == w:
                return r
        raise KeyError((manifold, w))


def case_report(polytope: SpectrumPolytope, theta_phi: FlagType | None = None,
                gap_tol: float = 0.0) -> CaseReport:
    """Every chain control set on every proper flag manifold of the polytope's algebra."""
    theta_phi = polytope.theta_phi if theta_phi is None else theta_phi
    rows = []
    for theta in proper_flag_types(polytope.spec):
        for block in double_cosets(theta_phi, theta):
            w = coset_representative(block)
            desc = describe(polytope, theta, w, theta_phi)
            rows.append(CaseRow(flag_manifold_name(theta), theta, block, desc, classify(desc, gap_tol)))
    return CaseReport(theta_phi, tuple(rows))


def sl3_case_report(polytope: SpectrumPolytope, h_case: CartanVector | None = None,
                    gap_tol: float = 0.0, zero_tol: float = 1e-9) -> CaseReport:
    """Case table for sl(3) on the full flags, the projective plane and the Grassmannian.

    The flag type comes from ``h_case`` when given, else from the polytope.
    """
    if polytope.spec != AlgebraSpec((3,)):
        raise LieError("sl3_case_report needs an sl(3) polytope")
    theta_phi = theta_of(h_case, zero_tol) if h_case is not None else polytope.theta_phi
    return case_report(polytope, theta_phi, gap_tol)


def half_space_criterion(polytope: SpectrumPolytope, upper: str = "a23", lower: str = "a12") -> bool:
    """``min upper > max lower`` over the polytope (the sl(3) summary criterion)."""
    up = RootFunctional.parse(upper, polytope.spec)
    lo = RootFunctional.parse(lower, polytope.spec)
    return bool(polytope.values(up).min() > polytope.values(lo).max())


class AmbiguityWarning(UserWarning):
    pass


def zero_flag_report(polytope: SpectrumPolytope, tol: float = 0.05) -> Classification:
    """Verdict when every simple root vanishes on the polytope: one chain control set, degenerate."""
    worst = max(abs(v) for a in simple_roots(polytope.spec) for v in polytope.values(a))
    if worst > tol:
        raise LieError(f"simple-root value {worst:.6g} exceeds tol {tol:g}; flag type is not full")
    if worst > 1e-9:
        warnings.warn(f"simple roots only vanish up to {worst:.3g}", AmbiguityWarning, stacklevel=2)
        return Classification(Verdict.DEGENERATE, 0.0,
                              f"theta_phi = all simple roots (ambiguous, max |alpha| = {worst:.6g})")
    return Classification(Verdict.DEGENERATE, 0.0, "theta_phi = all simple roots; chain transitive")
