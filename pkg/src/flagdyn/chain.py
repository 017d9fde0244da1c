"""Set-oriented chain graphs on P^1 and P^1 x P^1 and their Morse decompositions.

Points of P^1 are angles mod pi.  Cell ``k`` on an axis with ``r`` cells
of width ``h = pi / r`` is the arc ``[(k - 1/2) h, (k + 1/2) h)``, so cell
centres sit at ``k h`` and, for even ``r``, the coordinate lines ``[e1]``
and ``[e2]`` are cell centres.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.linalg import expm

from .cocycle import BilinearControlSystem, projective_angle
from .lie import LieError


@dataclass(frozen=True)
class CellComplex:
    """Uniform grid of half-open angle cells on ``(P^1)^d`` (d = 1 circle, d = 2 torus)."""

    resolution: tuple[int, ...]

    def __post_init__(self):
        res = tuple(int(r) for r in self.resolution)
        if not 1 <= len(res) <= 2 or any(r < 2 for r in res):
            raise ValueError("need one or two axes with at least 2 cells each")
        object.__setattr__(self, "resolution", res)

    @classmethod
    def circle(cls, n: int) -> "CellComplex":
        return cls((n,))

    @classmethod
    def torus(cls, n1: int, n2: int | None = None) -> "CellComplex":
        return cls((n1, n1 if n2 is None else n2))

    @property
    def manifold(self) -> str:
        return "circle" if len(self.resolution) == 1 else "torus"

    @property
    def dim(self) -> int:
        return len(self.resolution)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(math.pi / r for r in self.resolution)

    @property
    def diameter(self) -> float:
        """Cell diameter in the max-norm on angle coordinates."""
        return max(self.widths)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.resolution))

    def strides(self) -> tuple[int, ...]:
        if self.dim == 1:
            return (1,)
        return (self.resolution[1], 1)

    def index(self, multi: Sequence[int]) -> int:
        return int(sum(int(m) % r * s for m, r, s in zip(multi, self.resolution, self.strides())))

    def multi_index(self, flat: int) -> tuple[int, ...]:
        if self.dim == 1:
            return (int(flat),)
        return divmod(int(flat), self.resolution[1])

    def axis_cell(self, axis: int, angle):
        h = self.widths[axis]
        return np.mod(np.floor(np.mod(angle, math.pi) / h + 0.5).astype(int), self.resolution[axis])

    def cell_of(self, angles: Sequence[float]) -> int:
        return self.index([int(self.axis_cell(a, x)) for a, x in enumerate(angles)])

    def centre(self, flat: int) -> tuple[float, ...]:
        return tuple(k * h for k, h in zip(self.multi_index(flat), self.widths))

    def bounds(self, flat: int) -> tuple[tuple[float, float], ...]:
        return tuple(((k - 0.5) * h, (k + 0.5) * h) for k, h in zip(self.multi_index(flat), self.widths))

    def axis_points(self, axis: int, per_axis: int) -> np.ndarray:
        """Stratified sample angles, shape ``(cells, per_axis)``; odd counts include the centre."""
        h = self.widths[axis]
        offs = (np.arange(per_axis) - (per_axis - 1) / 2) / per_axis
        k = np.arange(self.resolution[axis])
        return np.mod((k[:, None] + offs[None, :]) * h, math.pi)

    def ball_cells(self, axis: int, angles: np.ndarray, eps: float) -> np.ndarray:
        """Cells meeting ``[x - eps, x + eps]``: array with a trailing axis of candidates (padded by repetition)."""
        h = self.widths[axis]
        r = self.resolution[axis]
        angles = np.asarray(angles, dtype=float)
        if 2 * eps >= math.pi:
            return np.broadcast_to(np.arange(r), angles.shape + (r,)).copy()
        first = np.floor((angles - eps) / h - 0.5).astype(int) + 1
        last = np.floor((angles + eps) / h + 0.5).astype(int)
        count = last - first + 1
        width = min(int(count.max()), r)
        steps = np.minimum(np.arange(width), (count - 1)[..., None])
        return np.mod(first[..., None] + steps, r)


def control_grid(system: BilinearControlSystem, levels: int = 3) -> list[np.ndarray]:
    """Full tensor grid of ``levels`` equispaced values per control (odd levels include 0)."""
    axes = [np.linspace(lo, hi, levels) for lo, hi in zip(system.lo, system.hi)]
    return [np.array(v) for v in itertools.product(*axes)]


def default_controls(system: BilinearControlSystem) -> list[np.ndarray]:
    """Corners of the control box plus its centre."""
    return system.vertices() + ([np.zeros(system.n_controls)] if system.n_controls else [])


def _check_rank_one(system: BilinearControlSystem, cells: CellComplex):
    if len(system.spec.factors) != cells.dim or any(n != 2 for n in system.spec.factors):
        raise LieError("chain graphs need one sl(2) factor per cell axis")


def flow_map(system: BilinearControlSystem, control, horizon: float) -> tuple[np.ndarray, ...]:
    """Exact time-``horizon`` maps of the constant control, one 2x2 matrix per factor."""
    return tuple(expm(horizon * a) for a in system.generator(control))


def flow_angles(maps: Sequence[np.ndarray], angles: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Projective images of angle arrays under per-factor matrices."""
    out = []
    for g, x in zip(maps, angles):
        x = np.asarray(x, dtype=float)
        v = np.stack([np.cos(x), np.sin(x)], axis=-1)
        out.append(projective_angle(v @ g.T))
    return out


@dataclass
class ChainGraph:
    cells: CellComplex
    graph: nx.DiGraph
    eps: float
    horizon: float
    controls: tuple[tuple[float, ...], ...]
    points_per_axis: int

    def edge_rows(self) -> list[tuple[int, int]]:
        return sorted(self.graph.edges())

    def has_path(self, a: int, b: int) -> bool:
        return nx.has_path(self.graph, a, b)


def build_chain_graph(
    system: BilinearControlSystem,
    cells: CellComplex,
    eps: float | None = None,
    horizon: float = 1.0,
    control_samples: Sequence[Sequence[float]] | None = None,
    points_per_axis: int = 3,
) -> ChainGraph:
    """Edges ``c -> c'`` whenever a sampled time-``horizon`` image of ``c`` is within ``eps`` of ``c'``.

    ``eps`` defaults to 1.5 cell diameters.  Start points are a stratified
    ``points_per_axis``-per-axis grid in each cell, and controls are held
    constant over each hop.
    """
    _check_rank_one(system, cells)
    eps = 1.5 * cells.diameter if eps is None else float(eps)
    if eps <= 0 or horizon <= 0:
        raise ValueError("eps and horizon must be positive")
    if points_per_axis < 1:
        raise ValueError("points_per_axis must be >= 1")
    controls = [np.atleast_1d(np.asarray(c, dtype=float)) if system.n_controls else np.zeros(0)
                for c in (control_samples if control_samples is not None else default_controls(system) or [()])]
    d, p = cells.dim, points_per_axis
    starts = [cells.axis_points(a, p) for a in range(d)]
    strides = cells.strides()

    def placed(arr, slots):
        shape = [1] * (3 * d)
        for s, n in zip(slots, arr.shape):
            shape[s] = n
        return arr.reshape(shape)

    src = sum(placed(np.arange(r) * s, [a]) for a, (r, s) in enumerate(zip(cells.resolution, strides)))
    codes = []
    n = cells.n_cells
    for u in controls:
        images = flow_angles(flow_map(system, u, horizon), starts)
        dst = 0
        for a in range(d):
            targets = cells.ball_cells(a, images[a], eps)
            dst = dst + placed(targets * strides[a], [a, d + a, 2 * d + a])
        s, t = np.broadcast_arrays(src, dst)
        codes.append(np.unique(s.ravel() * n + t.ravel()))
    codes = np.unique(np.concatenate(codes))
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from(zip((codes // n).tolist(), (codes % n).tolist()))
    return ChainGraph(cells, g, eps, horizon, tuple(tuple(map(float, u)) for u in controls), p)


@dataclass(frozen=True)
class MorseComponent:
    id: int
    members: tuple[int, ...]
    attractor: bool
    repeller: bool


@dataclass
class MorseGraph:
    cells: CellComplex
    components: tuple[MorseComponent, ...]
    order: nx.DiGraph  # edge a -> b: component b is reachable from component a

    @property
    def attractors(self) -> list[MorseComponent]:
        return [c for c in self.components if c.attractor]

    @property
    def repellers(self) -> list[MorseComponent]:
        return [c for c in self.components if c.repeller]

    def component(self, cid: int) -> MorseComponent:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(f"unknown component {cid}")

    def component_of_cell(self, cell: int) -> MorseComponent | None:
        for c in self.components:
            if cell in c.members:
                return c
        return None

    def hasse_edges(self) -> list[tuple[int, int]]:
        return sorted(nx.transitive_reduction(self.order).edges())


def chain_components(chain: ChainGraph) -> MorseGraph:
    """Nontrivial strongly connected components ordered by reachability."""
    g = chain.graph
    cond = nx.condensation(g)
    keep = []
    for node, data in cond.nodes(data=True):
        members = sorted(data["members"])
        if len(members) > 1 or g.has_edge(members[0], members[0]):
            keep.append((members, node))
    keep.sort()
    reach = {node: nx.descendants(cond, node) for _, node in keep}
    order = nx.DiGraph()
    order.add_nodes_from(range(len(keep)))
    for i, (_, a) in enumerate(keep):
        for j, (_, b) in enumerate(keep):
            if i != j and b in reach[a]:
                order.add_edge(i, j)
    comps = tuple(
        MorseComponent(i, tuple(m), order.out_degree(i) == 0, order.in_degree(i) == 0)
        for i, (m, _) in enumerate(keep)
    )
    return MorseGraph(chain.cells, comps, order)


def _merge_arcs(idx: Sequence[int], r: int, h: float) -> list[tuple[float, float]]:
    """Contiguous runs of cell indices on a circle of ``r`` cells, as angle intervals."""
    idx = sorted(set(int(i) for i in idx))
    if len(idx) == r:
        return [(-0.5 * h, math.pi - 0.5 * h)]
    runs: list[list[int]] = []
    for i in idx:
        if runs and i == runs[-1][1] + 1:
            runs[-1][1] = i
        else:
            runs.append([i, i])
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == r - 1:
        last = runs.pop()
        runs[0][0] = last[0] - r
    return sorted(((a - 0.5) * h, (b + 0.5) * h) for a, b in runs)


@dataclass(frozen=True)
class ComponentExtent:
    """Per-axis angle intervals covering a component; ``is_product`` if it equals their product."""

    axes: tuple[tuple[tuple[float, float], ...], ...]
    is_product: bool
    n_cells: int


def component_extent(morse: MorseGraph, cid: int) -> ComponentExtent:
    comp = morse.component(cid)
    cells = morse.cells
    multi = [cells.multi_index(m) for m in comp.members]
    axes = []
    proj = []
    for a in range(cells.dim):
        ks = sorted({mi[a] for mi in multi})
        proj.append(ks)
        axes.append(tuple(_merge_arcs(ks, cells.resolution[a], cells.widths[a])))
    is_product = len(comp.members) == int(np.prod([len(k) for k in proj]))
    return ComponentExtent(tuple(axes), is_product, len(comp.members))


def arc_contains(arcs: Sequence[tuple[float, float]], angle: float) -> bool:
    """Whether an angle mod pi lies in one of the intervals (which may start below 0)."""
    for lo, hi in arcs:
        for shift in (-math.pi, 0.0, math.pi):
            if lo <= angle + shift <= hi:
                return True
    return False


def arc_length(arcs: Sequence[tuple[float, float]]) -> float:
    return float(sum(hi - lo for lo, hi in arcs))
