"""Root systems, Weyl groups and flag types for products of sl(n, R).

Everything here is exact: roots are index triples, Weyl elements are
permutation tuples.  Floating point only enters when a root is evaluated
on a :class:`CartanVector`.

Conventions
-----------
* Factors and matrix positions are 1-based in all user-facing text
  (``a12``, ``(1 3)``) and 0-based internally.
* ``alpha_{f,i,j}(H) = H_{f,i} - H_{f,j}``; the root is positive iff ``i < j``.
* Weyl elements act on diagonal positions: ``(wH)_{w(k)} = H_k``, so that
  ``(w alpha)(H) = alpha(w^{-1} H)`` gives ``w alpha_{ij} = alpha_{w(i) w(j)}``.
* Composition is ``(v * w)(k) = v(w(k))``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

DEFAULT_ZERO_TOL = 1e-9


class LieError(ValueError):
    """Invalid algebraic input (bad spec, non-traceless matrix, ...)."""


@dataclass(frozen=True)
class AlgebraSpec:
    """Direct product of split factors sl(n_1) x ... x sl(n_k)."""

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(n) for n in self.factors)
        if not factors:
            raise LieError("an algebra needs at least one factor")
        if any(n < 2 for n in factors):
            raise LieError(f"every factor needs n >= 2, got {factors}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def parse(cls, text: str) -> "AlgebraSpec":
        """Parse ``"sl3"`` or ``"sl2xsl2"``."""
        parts = text.strip().lower().split("x")
        factors = []
        for part in parts:
            m = re.fullmatch(r"sl\(?(\d+)\)?", part.strip())
            if m is None:
                raise LieError(f"cannot parse algebra {text!r}")
            factors.append(int(m.group(1)))
        return cls(tuple(factors))

    def __str__(self) -> str:
        return "x".join(f"sl{n}" for n in self.factors)

    @property
    def dim_cartan(self) -> int:
        """Number of Cartan coordinates (sum of n_f, before the trace condition)."""
        return sum(self.factors)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for n in self.factors:
            out.append(acc)
            acc += n
        return tuple(out)

    @property
    def rank(self) -> int:
        return sum(n - 1 for n in self.factors)


@dataclass(frozen=True, order=True)
class RootFunctional:
    """The root ``H -> H_{f,i} - H_{f,j}`` (0-based ``factor``, ``i``, ``j``)."""

    factor: int
    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise LieError("a root needs i != j")

    def __neg__(self) -> "RootFunctional":
        return RootFunctional(self.factor, self.j, self.i)

    @property
    def is_positive(self) -> bool:
        return self.i < self.j

    @property
    def is_simple(self) -> bool:
        return self.j == self.i + 1

    def vector(self, spec: AlgebraSpec) -> np.ndarray:
        v = np.zeros(spec.dim_cartan)
        off = spec.offsets[self.factor]
        v[off + self.i] = 1.0
        v[off + self.j] = -1.0
        return v

    def __call__(self, h: "CartanVector") -> float:
        part = h.parts[self.factor]
        return part[self.i] - part[self.j]

    def sort_key(self):
        return (self.factor, min(self.i, self.j), max(self.i, self.j), not self.is_positive)

    def label(self, spec: AlgebraSpec | None = None) -> str:
        lo, hi = min(self.i, self.j) + 1, max(self.i, self.j) + 1
        core = f"a{lo}{hi}" if hi < 10 else f"a({lo},{hi})"
        if spec is not None and len(spec.factors) > 1:
            core += f"@{self.factor + 1}"
        return core if self.is_positive else "-" + core

    @classmethod
    def parse(cls, text: str, spec: AlgebraSpec) -> "RootFunctional":
        m = re.fullmatch(r"\s*(-?)a(?:(\d)(\d)|\((\d+),(\d+)\))(?:@(\d+))?\s*", text)
        if m is None:
            raise LieError(f"cannot parse root {text!r}")
        i = int(m.group(2) or m.group(4)) - 1
        j = int(m.group(3) or m.group(5)) - 1
        factor = int(m.group(6)) - 1 if m.group(6) else 0
        if not 0 <= factor < len(spec.factors):
            raise LieError(f"root {text!r} names a missing factor")
        n = spec.factors[factor]
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise LieError(f"root {text!r} out of range for {spec}")
        root = cls(factor, i, j)
        return -root if m.group(1) else root


def format_roots(roots: Iterable[RootFunctional], spec: AlgebraSpec | None = None) -> str:
    """``{-a13, -a23}`` style text, in canonical order."""
    items = sorted(roots, key=RootFunctional.sort_key)
    return "{" + ", ".join(r.label(spec) for r in items) + "}"


def parse_roots(text: str, spec: AlgebraSpec) -> frozenset[RootFunctional]:
    body = text.strip()
    if body[:1] in "{[" and body[-1:] in "}]":
        body = body[1:-1]
    if not body.strip():
        return frozenset()
    return frozenset(RootFunctional.parse(tok, spec) for tok in body.split(","))


@dataclass(frozen=True)
class CartanVector:
    """Element of the Cartan space: one traceless real diagonal per factor."""

    spec: AlgebraSpec
    parts: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        parts = tuple(tuple(float(x) for x in p) for p in self.parts)
        if len(parts) != len(self.spec.factors):
            raise LieError("one diagonal per factor is required")
        for n, p in zip(self.spec.factors, parts):
            if len(p) != n:
                raise LieError(f"factor of size {n} got {len(p)} entries")
            if abs(sum(p)) > 1e-12 * max(1.0, max(abs(x) for x in p)):
                raise LieError(f"diagonal {p} is not traceless")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def from_flat(cls, spec: AlgebraSpec, values: Sequence[float], project: bool = False):
        values = np.asarray(values, dtype=float)
        if values.shape != (spec.dim_cartan,):
            raise LieError(f"expected {spec.dim_cartan} coordinates, got {values.shape}")
        parts = []
        for off, n in zip(spec.offsets, spec.factors):
            p = values[off:off + n]
            if project:
                p = p - p.mean()
            parts.append(tuple(p))
        return cls(spec, tuple(parts))

    @classmethod
    def diag(cls, *entries: float) -> "CartanVector":
        """Single-factor shortcut: ``CartanVector.diag(1, 1, -2)``."""
        return cls(AlgebraSpec((len(entries),)), (tuple(entries),))

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([np.asarray(p) for p in self.parts])

    def in_closed_chamber(self, tol: float = DEFAULT_ZERO_TOL) -> bool:
        return all(p[k] >= p[k + 1] - tol for p in self.parts for k in range(len(p) - 1))

    def chamber_sorted(self) -> "CartanVector":
        return CartanVector(self.spec, tuple(tuple(sorted(p, reverse=True)) for p in self.parts))

    def scaled(self, c: float) -> "CartanVector":
        return CartanVector(self.spec, tuple(tuple(c * x for x in p) for p in self.parts))

    def __str__(self) -> str:
        return "|".join("(" + ", ".join(f"{x:.6g}" for x in p) + ")" for p in self.parts)


@dataclass(frozen=True)
class WeylElement:
    """Per-factor permutation of diagonal positions; ``perms[f][k] = w(k)``."""

    spec: AlgebraSpec
    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        perms = tuple(tuple(int(x) for x in p) for p in self.perms)
        if len(perms) != len(self.spec.factors):
            raise LieError("one permutation per factor is required")
        for n, p in zip(self.spec.factors, perms):
            if sorted(p) != list(range(n)):
                raise LieError(f"{p} is not a permutation of {n} positions")
        object.__setattr__(self, "perms", perms)

    @classmethod
    def identity(cls, spec: AlgebraSpec) -> "WeylElement":
        return cls(spec, tuple(tuple(range(n)) for n in spec.factors))

    @classmethod
    def longest(cls, spec: AlgebraSpec) -> "WeylElement":
        return cls(spec, tuple(tuple(range(n - 1, -1, -1)) for n in spec.factors))

    @classmethod
    def reflection(cls, root: RootFunctional, spec: AlgebraSpec) -> "WeylElement":
        perms = [list(range(n)) for n in spec.factors]
        p = perms[root.factor]
        p[root.i], p[root.j] = p[root.j], p[root.i]
        return cls(spec, tuple(tuple(q) for q in perms))

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        _check_same(self.spec, other.spec)
        return WeylElement(
            self.spec,
            tuple(tuple(a[b[k]] for k in range(len(a))) for a, b in zip(self.perms, other.perms)),
        )

    def inverse(self) -> "WeylElement":
        inv = []
        for p in self.perms:
            q = [0] * len(p)
            for k, v in enumerate(p):
                q[v] = k
            inv.append(tuple(q))
        return WeylElement(self.spec, tuple(inv))

    @property
    def is_identity(self) -> bool:
        return all(p == tuple(range(len(p))) for p in self.perms)

    def length(self) -> int:
        """Coxeter length: number of inversions."""
        return sum(
            1 for p in self.perms for a, b in itertools.combinations(range(len(p)), 2) if p[a] > p[b]
        )

    def act_root(self, root: RootFunctional) -> RootFunctional:
        p = self.perms[root.factor]
        return RootFunctional(root.factor, p[root.i], p[root.j])

    def act_cartan(self, h: CartanVector) -> CartanVector:
        _check_same(self.spec, h.spec)
        parts = []
        for p, part in zip(self.perms, h.parts):
            out = [0.0] * len(part)
            for k, x in enumerate(part):
                out[p[k]] = x
            parts.append(tuple(out))
        return CartanVector(self.spec, tuple(parts))

    def permutation_matrix(self) -> np.ndarray:
        """Matrix ``P`` on flat Cartan coordinates with ``flat(wH) = P @ flat(H)``."""
        d = self.spec.dim_cartan
        mat = np.zeros((d, d))
        for off, p in zip(self.spec.offsets, self.perms):
            for k, v in enumerate(p):
                mat[off + v, off + k] = 1.0
        return mat

    def __call__(self, x):
        if isinstance(x, RootFunctional):
            return self.act_root(x)
        if isinstance(x, CartanVector):
            return self.act_cartan(x)
        raise TypeError(f"Weyl elements act on roots and Cartan vectors, not {type(x).__name__}")

    def cycles(self) -> list[list[tuple[int, ...]]]:
        out = []
        for p in self.perms:
            seen, cyc = set(), []
            for start in range(len(p)):
                if start in seen or p[start] == start:
                    continue
                c, k = [], start
                while k not in seen:
                    seen.add(k)
                    c.append(k + 1)
                    k = p[k]
                cyc.append(tuple(c))
            out.append(cyc)
        return out

    def __str__(self) -> str:
        texts = []
        for cyc in self.cycles():
            texts.append("".join("(" + " ".join(map(str, c)) + ")" for c in cyc) or "()")
        return "|".join(texts)

    def short_label(self) -> str:
        """``w1``, ``w12``, ``w123`` ... (single-cycle factors only; falls back to cycles)."""
        labels = []
        for cyc in self.cycles():
            if not cyc:
                labels.append("w1")
            elif len(cyc) == 1 and all(k < 10 for k in cyc[0]):
                labels.append("w" + "".join(map(str, cyc[0])))
            else:
                labels.append("w" + "".join("(" + " ".join(map(str, c)) + ")" for c in cyc))
        return "x".join(labels)

    @classmethod
    def parse(cls, text: str, spec: AlgebraSpec) -> "WeylElement":
        """Parse cycle notation ``(1 3)``, ``(1 2 3)``, ``()``; factors split by ``|``."""
        body = text.strip()
        if body.startswith("w="):
            body = body[2:]
        chunks = body.split("|")
        if len(chunks) != len(spec.factors):
            raise LieError(f"{text!r}: expected {len(spec.factors)} factor(s)")
        perms = []
        for n, chunk in zip(spec.factors, chunks):
            p = list(range(n))
            chunk = chunk.strip()
            if chunk in ("", "1", "e", "id"):
                perms.append(tuple(p))
                continue
            cycles = re.findall(r"\(([^()]*)\)", chunk)
            if re.sub(r"\([^()]*\)", "", chunk).strip():
                raise LieError(f"cannot parse Weyl element {text!r}")
            # cycles compose right-to-left
            for body_ in reversed(cycles):
                elems = [int(t) - 1 for t in body_.replace(",", " ").split()]
                if any(not 0 <= e < n for e in elems) or len(set(elems)) != len(elems):
                    raise LieError(f"bad cycle in {text!r}")
                step = list(range(n))
                for a, b in zip(elems, elems[1:] + elems[:1]):
                    step[a] = b
                p = [step[p[k]] for k in range(n)]
            perms.append(tuple(p))
        return cls(spec, tuple(perms))


@dataclass(frozen=True)
class FlagType:
    """A subset of the simple roots; ``()`` is the maximal flag manifold."""

    spec: AlgebraSpec
    roots: frozenset[RootFunctional]

    def __post_init__(self):
        roots = frozenset(self.roots)
        for r in roots:
            if not (r.is_positive and r.is_simple):
                raise LieError(f"{r.label(self.spec)} is not a simple root")
            if r.factor >= len(self.spec.factors) or r.j >= self.spec.factors[r.factor]:
                raise LieError(f"{r} does not belong to {self.spec}")
        object.__setattr__(self, "roots", roots)

    @classmethod
    def parse(cls, text: str, spec: AlgebraSpec) -> "FlagType":
        body = text.strip()
        if body.startswith("theta="):
            body = body[len("theta="):]
        return cls(spec, parse_roots(body, spec))

    @classmethod
    def empty(cls, spec: AlgebraSpec) -> "FlagType":
        return cls(spec, frozenset())

    @classmethod
    def full(cls, spec: AlgebraSpec) -> "FlagType":
        return cls(spec, frozenset(simple_roots(spec)))

    def __str__(self) -> str:
        items = sorted(self.roots, key=RootFunctional.sort_key)
        return "[" + ",".join(r.label(self.spec) for r in items) + "]"

    def __contains__(self, root) -> bool:
        return root in self.roots

    def __len__(self) -> int:
        return len(self.roots)


def _check_same(a: AlgebraSpec, b: AlgebraSpec):
    if a != b:
        raise LieError(f"spec mismatch: {a} vs {b}")


@lru_cache(maxsize=None)
def all_roots(spec: AlgebraSpec) -> frozenset[RootFunctional]:
    return frozenset(
        RootFunctional(f, i, j)
        for f, n in enumerate(spec.factors)
        for i in range(n)
        for j in range(n)
        if i != j
    )


def positive_roots(spec: AlgebraSpec) -> frozenset[RootFunctional]:
    return frozenset(r for r in all_roots(spec) if r.is_positive)


def negative_roots(spec: AlgebraSpec) -> frozenset[RootFunctional]:
    return frozenset(r for r in all_roots(spec) if not r.is_positive)


def simple_roots(spec: AlgebraSpec) -> tuple[RootFunctional, ...]:
    return tuple(
        RootFunctional(f, i, i + 1) for f, n in enumerate(spec.factors) for i in range(n - 1)
    )


def invariant_inner(x: Sequence[np.ndarray], y: Sequence[np.ndarray]) -> float:
    """``B(X, Y) = -Killing(X, zeta Y)`` with ``zeta Y = -Y^T``, i.e. ``sum 2n tr(X Y^T)``."""
    if len(x) != len(y):
        raise LieError("factor count mismatch")
    total = 0.0
    for xf, yf in zip(x, y):
        xf, yf = np.asarray(xf, dtype=float), np.asarray(yf, dtype=float)
        if xf.shape != yf.shape or xf.ndim != 2 or xf.shape[0] != xf.shape[1]:
            raise LieError("factors must be square matrices of equal size")
        for m in (xf, yf):
            if abs(np.trace(m)) > 1e-12 * max(1.0, np.abs(m).max()):
                raise LieError("inputs must be traceless")
        total += 2 * xf.shape[0] * float(np.sum(xf * yf))
    return total


def theta_of(h: CartanVector, tol: float = DEFAULT_ZERO_TOL) -> FlagType:
    """Simple roots vanishing on a closed-chamber element."""
    if not h.in_closed_chamber(tol):
        raise LieError(f"{h} is not in the closed positive chamber")
    return FlagType(h.spec, frozenset(a for a in simple_roots(h.spec) if abs(a(h)) <= tol))


def generated_roots(theta: FlagType) -> frozenset[RootFunctional]:
    """Roots in the integer span of ``theta``.

    In type A a root ``a_{ij}`` is a sum of the consecutive simple roots
    between ``min(i,j)`` and ``max(i,j)``, so it lies in the span iff all of
    those simple roots are in ``theta``.
    """
    out = set()
    for r in all_roots(theta.spec):
        lo, hi = min(r.i, r.j), max(r.i, r.j)
        if all(RootFunctional(r.factor, k, k + 1) in theta.roots for k in range(lo, hi)):
            out.add(r)
    return frozenset(out)


@lru_cache(maxsize=None)
def weyl_group(spec: AlgebraSpec) -> tuple[WeylElement, ...]:
    """All Weyl group elements, sorted by (length, cycle text)."""
    elems = [
        WeylElement(spec, perms)
        for perms in itertools.product(*(itertools.permutations(range(n)) for n in spec.factors))
    ]
    return tuple(sorted(elems, key=lambda w: (w.length(), str(w))))


@lru_cache(maxsize=None)
def weyl_subgroup(theta: FlagType) -> frozenset[WeylElement]:
    """Subgroup generated by the reflections in the roots of ``theta``."""
    spec = theta.spec
    gens = [WeylElement.reflection(a, spec) for a in theta.roots]
    group = {WeylElement.identity(spec)}
    frontier = list(group)
    while frontier:
        nxt = []
        for w in frontier:
            for g in gens:
                v = g * w
                if v not in group:
                    group.add(v)
                    nxt.append(v)
        frontier = nxt
    return frozenset(group)


def double_cosets(theta1: FlagType, theta2: FlagType) -> list[frozenset[WeylElement]]:
    """Partition of W into blocks ``W_theta1 * w * W_theta2``.

    Blocks are listed in the order of their canonical representatives
    (see :func:`coset_representative`).
    """
    _check_same(theta1.spec, theta2.spec)
    left, right = weyl_subgroup(theta1), weyl_subgroup(theta2)
    seen: set[WeylElement] = set()
    blocks = []
    for w in weyl_group(theta1.spec):
        if w in seen:
            continue
        block = frozenset(a * w * b for a in left for b in right)
        seen |= block
        blocks.append(block)
    blocks.sort(key=lambda b: _rep_key(coset_representative(b)))
    return blocks


def coset_representative(block: Iterable[WeylElement]) -> WeylElement:
    """Identity if present, else the longest element if present, else the shortest.

    This is the attractor/repeller-first labelling used for the sl(3) tables
    (``w1``, ``w23``, ``w13`` on the full flags; ``w1``, ``w13`` on RP2 and Gr2).
    """
    block = list(block)
    spec = block[0].spec
    one, top = WeylElement.identity(spec), WeylElement.longest(spec)
    if one in block:
        return one
    if top in block:
        return top
    return min(block, key=lambda w: (w.length(), str(w)))


def _rep_key(w: WeylElement):
    top = WeylElement.longest(w.spec)
    return (0 if w.is_identity else 2 if w == top else 1, w.length(), str(w))


@dataclass(frozen=True)
class PiTriple:
    """Roots split into unstable (plus), center (zero) and stable (minus) directions."""

    plus: frozenset[RootFunctional]
    zero: frozenset[RootFunctional]
    minus: frozenset[RootFunctional]

    def __post_init__(self):
        if self.plus & self.zero or self.plus & self.minus or self.zero & self.minus:
            raise LieError("Pi sets must be pairwise disjoint")

    @property
    def union(self) -> frozenset[RootFunctional]:
        return self.plus | self.zero | self.minus

    def __getitem__(self, key: str) -> frozenset[RootFunctional]:
        return {"+": self.plus, "0": self.zero, "-": self.minus}[key]


def moved_negative_roots(theta: FlagType, w: WeylElement) -> frozenset[RootFunctional]:
    """``w(Pi^- minus <theta>)``: the root directions tangent to the flag manifold at ``w b_theta``."""
    base = negative_roots(theta.spec) - generated_roots(theta)
    return frozenset(w.act_root(r) for r in base)


def pi_sets(theta_phi: FlagType, theta: FlagType, w: WeylElement) -> PiTriple:
    _check_same(theta_phi.spec, theta.spec)
    moved = moved_negative_roots(theta, w)
    gen_phi = generated_roots(theta_phi)
    spec = theta.spec
    return PiTriple(
        plus=(positive_roots(spec) - gen_phi) & moved,
        zero=gen_phi & moved,
        minus=(negative_roots(spec) - gen_phi) & moved,
    )


def bundle_dims(pi: PiTriple) -> tuple[int, int, int]:
    """``(dim E-, dim E0, dim E+)``; every root space is one-dimensional here."""
    return len(pi.minus), len(pi.zero), len(pi.plus)


def uniformly_hyperbolic_condition(theta_phi: FlagType, theta: FlagType, w: WeylElement) -> bool:
    """``<theta_phi> subset w <theta>``."""
    return generated_roots(theta_phi) <= frozenset(w.act_root(r) for r in generated_roots(theta))


_SL3_NAMES = {"[]": "F", "[a23]": "RP2", "[a12]": "Gr2", "[a12,a23]": "point"}


def flag_manifold_name(theta: FlagType) -> str:
    key = str(theta)
    if theta.spec.factors == (3,) and key in _SL3_NAMES:
        return _SL3_NAMES[key]
    if all(n == 2 for n in theta.spec.factors):
        # each sl2 factor contributes P unless its root is collapsed
        names = ["pt" if RootFunctional(f, 0, 1) in theta.roots else "P"
                 for f in range(len(theta.spec.factors))]
        return "x".join(names)
    return "F" + key


def proper_flag_types(spec: AlgebraSpec) -> list[FlagType]:
    """All ``theta`` strictly smaller than the full simple system, maximal flag first."""
    simple = simple_roots(spec)
    out = []
    for k in range(len(simple)):
        for combo in itertools.combinations(simple[::-1], k):
            out.append(FlagType(spec, frozenset(combo)))
    return out
