"""Scenario configs and the staged batch pipeline behind the command line."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import tomli

from . import lie
from .chain import (
    CellComplex,
    build_chain_graph,
    chain_components,
    component_extent,
    control_grid,
    default_controls,
)
from .classify import case_report
from .cocycle import (
    BilinearControlSystem,
    ControlSignal,
    evolve_trail,
    oseledets,
    trail_summary_rows,
)
from .lie import AlgebraSpec, CartanVector, FlagType, WeylElement
from .spectrum import (
    SamplingPlan,
    SpectrumPolytope,
    entropy_lower_bound,
    estimate_attractor_polytope,
)

SCHEMA_VERSION = 1
STAGES = ("lie", "spectrum", "classify", "chain", "entropy")


class SchemaError(ValueError):
    """Config does not follow the scenario schema."""


class MissingArtifactError(FileNotFoundError):
    """A stage needs a file that an upstream stage writes."""


def derive_seed(root: int, stage: str) -> int:
    """Stage seed from the root seed by hashing ``"root:stage"``."""
    digest = hashlib.sha256(f"{int(root)}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def fmt(x: float) -> str:
    """12 significant digits, ``.`` separator, no negative zero."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, ".12g")
    return "0" if s in ("-0", "0") else s


def fmt_spectrum(s) -> str:
    if s.is_empty:
        return "{}"
    return " U ".join(f"[{fmt(a)}, {fmt(b)}]" for a, b in s.intervals)


@dataclass(frozen=True)
class ChainSettings:
    resolution: tuple[int, ...]
    eps_cells: float = 1.5
    horizon: float = 1.0
    points_per_axis: int = 3
    controls: str = "box"
    levels: int = 3


@dataclass(frozen=True)
class OseledetsSettings:
    n_max: int = 200
    gap: float = 0.05
    control: tuple[float, ...] | None = None
    dt: float = 1e-2


@dataclass(frozen=True)
class Tolerances:
    zero: float = lie.DEFAULT_ZERO_TOL
    gap: float = 0.0
    flag: float = 0.1
    entropy: float = 0.05


@dataclass(frozen=True)
class Scenario:
    name: str
    spec: AlgebraSpec
    seed: int
    system: BilinearControlSystem | None = None
    sampling: SamplingPlan | None = None
    vertices: tuple[tuple[float, ...], ...] | None = None
    theta_phi: FlagType | None = None
    symbolic_theta_phi: tuple[FlagType, ...] = ()
    tolerances: Tolerances = Tolerances()
    chain: ChainSettings | None = None
    oseledets: OseledetsSettings | None = None
    entropy_cases: tuple[tuple[FlagType, WeylElement], ...] = ()
    stages: tuple[str, ...] = ()
    write_trail: bool = False
    raw: dict = field(default_factory=dict, compare=False)

    def default_stages(self) -> tuple[str, ...]:
        if self.stages:
            return self.stages
        out = ["lie"]
        if self.system is not None or self.vertices is not None:
            out += ["spectrum", "classify", "entropy"]
        if self.chain is not None:
            out.append("chain")
        return tuple(s for s in STAGES if s in out)


def _need(table: dict, key: str, where: str):
    if key not in table:
        raise SchemaError(f"missing key '{key}' in {where}")
    return table[key]


def _matrices(spec: AlgebraSpec, rows: Any, where: str) -> tuple[np.ndarray, ...]:
    if not isinstance(rows, list) or len(rows) != len(spec.factors):
        raise SchemaError(f"{where}: need one row-major list per factor ({len(spec.factors)})")
    out = []
    for n, r in zip(spec.factors, rows):
        if not isinstance(r, list) or len(r) != n * n:
            raise SchemaError(f"{where}: factor sl{n} needs {n * n} entries")
        try:
            out.append(np.array(r, dtype=float).reshape(n, n))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: non-numeric entry ({exc})") from None
    return tuple(out)


def _positive(x, where: str, allow_zero: bool = False) -> float:
    try:
        x = float(x)
    except (TypeError, ValueError):
        raise SchemaError(f"{where} must be a number") from None
    if x < 0 or (x == 0 and not allow_zero):
        raise SchemaError(f"{where} must be positive")
    return x


def parse_scenario(data: dict, source: str = "<config>") -> Scenario:
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{source}: schema_version must be {SCHEMA_VERSION}")
    known = {"schema_version", "name", "algebra", "seed", "stages", "system", "sampling", "polytope",
             "symbolic", "tolerances", "chain", "oseledets", "entropy", "output"}
    extra = set(data) - known
    if extra:
        raise SchemaError(f"{source}: unknown keys {sorted(extra)}")
    try:
        spec = AlgebraSpec.parse(str(_need(data, "algebra", source)))
    except lie.LieError as exc:
        raise SchemaError(str(exc)) from None
    seed = _need(data, "seed", source)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise SchemaError("seed must be an integer")

    def flag(text, where):
        try:
            return FlagType.parse(str(text), spec)
        except lie.LieError as exc:
            raise SchemaError(f"{where}: {exc}") from None

    tol_raw = data.get("tolerances", {})
    tols = Tolerances(
        zero=_positive(tol_raw.get("zero", lie.DEFAULT_ZERO_TOL), "tolerances.zero"),
        gap=_positive(tol_raw.get("gap", 0.0), "tolerances.gap", allow_zero=True),
        flag=_positive(tol_raw.get("flag", 0.1), "tolerances.flag"),
        entropy=_positive(tol_raw.get("entropy", 0.05), "tolerances.entropy"),
    )

    system = None
    if "system" in data:
        s = data["system"]
        drift = _matrices(spec, _need(s, "drift", "system"), "system.drift")
        ctrls, lo, hi = [], [], []
        for k, c in enumerate(s.get("controls", [])):
            where = f"system.controls[{k}]"
            mats = _matrices(spec, _need(c, "matrices", where), where + ".matrices")
            a, b = float(_need(c, "lo", where)), float(_need(c, "hi", where))
            if a == b == 0.0:
                continue  # a zero range is the autonomous case
            ctrls.append(mats)
            lo.append(a)
            hi.append(b)
        try:
            system = BilinearControlSystem(spec, drift, tuple(ctrls), tuple(lo), tuple(hi))
        except lie.LieError as exc:
            raise SchemaError(f"system: {exc}") from None

    sampling = None
    if system is not None:
        sm = data.get("sampling", {})
        try:
            sampling = SamplingPlan(
                horizon=float(sm.get("horizon", 50.0)),
                n_random=int(sm.get("n_random", 24)),
                dwell_min=float(sm.get("dwell_min", 0.5)),
                dwell_max=float(sm.get("dwell_max", 3.0)),
                include_zero=bool(sm.get("include_zero", True)),
                seed=derive_seed(seed, "spectrum"),
                dt=float(sm.get("dt", 1e-2)),
            )
        except ValueError as exc:
            raise SchemaError(f"sampling: {exc}") from None

    vertices = theta_phi = None
    if "polytope" in data:
        p = data["polytope"]
        verts = _need(p, "vertices", "polytope")
        if not verts or any(len(v) != spec.dim_cartan for v in verts):
            raise SchemaError(f"polytope.vertices: each vertex needs {spec.dim_cartan} coordinates")
        vertices = tuple(tuple(float(x) for x in v) for v in verts)
        for v in vertices:
            try:
                CartanVector.from_flat(spec, v)
            except lie.LieError as exc:
                raise SchemaError(f"polytope.vertices: {exc}") from None
        if "theta_phi" in p:
            theta_phi = flag(p["theta_phi"], "polytope.theta_phi")
    if system is not None and vertices is not None:
        raise SchemaError("give either [system] or [polytope], not both")

    symbolic = tuple(flag(t, "symbolic.theta_phi") for t in data.get("symbolic", {}).get("theta_phi", []))

    chain = None
    if "chain" in data:
        c = data["chain"]
        res = _need(c, "resolution", "chain")
        if not isinstance(res, list) or not all(isinstance(r, int) and r >= 2 for r in res):
            raise SchemaError("chain.resolution must be a list of integers >= 2")
        mode = c.get("controls", "box")
        if mode not in ("box", "grid"):
            raise SchemaError("chain.controls must be 'box' or 'grid'")
        chain = ChainSettings(tuple(res), _positive(c.get("eps_cells", 1.5), "chain.eps_cells"),
                              _positive(c.get("horizon", 1.0), "chain.horizon"),
                              int(c.get("points_per_axis", 3)), mode, int(c.get("levels", 3)))
        if system is None:
            raise SchemaError("[chain] needs a [system]")

    osel = None
    if "oseledets" in data:
        o = data["oseledets"]
        ctrl = o.get("control")
        osel = OseledetsSettings(int(o.get("n_max", 200)), _positive(o.get("gap", 0.05), "oseledets.gap"),
                                 None if ctrl is None else tuple(float(x) for x in ctrl),
                                 _positive(o.get("dt", 1e-2), "oseledets.dt"))
        if system is None:
            raise SchemaError("[oseledets] needs a [system]")

    cases = []
    for k, case in enumerate(data.get("entropy", {}).get("cases", [])):
        where = f"entropy.cases[{k}]"
        try:
            cases.append((flag(_need(case, "theta", where), where),
                          WeylElement.parse(str(_need(case, "w", where)), spec)))
        except lie.LieError as exc:
            raise SchemaError(f"{where}: {exc}") from None

    stages = tuple(data.get("stages", ()))
    if any(s not in STAGES for s in stages):
        raise SchemaError(f"stages must be drawn from {STAGES}")
    output = data.get("output", {})
    return Scenario(
        name=str(data.get("name", Path(source).stem)), spec=spec, seed=seed, system=system,
        sampling=sampling, vertices=vertices, theta_phi=theta_phi, symbolic_theta_phi=symbolic,
        tolerances=tols, chain=chain, oseledets=osel, entropy_cases=tuple(cases), stages=stages,
        write_trail=bool(output.get("trail", False)), raw=data,
    )


def bundled_scenarios() -> list[str]:
    root = resources.files("flagdyn") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def load_scenario(path_or_name: str) -> Scenario:
    """Read a TOML scenario from a path, or a bundled scenario by name."""
    path = Path(path_or_name)
    if path.is_file():
        text, source = path.read_text(), str(path)
    elif path_or_name in bundled_scenarios():
        res = resources.files("flagdyn") / "scenarios" / f"{path_or_name}.toml"
        text, source = res.read_text(), path_or_name
    else:
        raise SchemaError(f"no config file or bundled scenario named '{path_or_name}'")
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise SchemaError(f"{source}: {exc}") from None
    return parse_scenario(data, source)


def with_overrides(sc: Scenario, seed=None, tol_zero=None, tol_gap=None, horizon=None) -> Scenario:
    tols = sc.tolerances
    if tol_zero is not None:
        tols = replace(tols, zero=_positive(tol_zero, "--tol-zero"))
    if tol_gap is not None:
        tols = replace(tols, gap=_positive(tol_gap, "--tol-gap", allow_zero=True))
    sampling = sc.sampling
    if seed is not None:
        sc = replace(sc, seed=int(seed))
        if sampling is not None:
            sampling = replace(sampling, seed=derive_seed(int(seed), "spectrum"))
    if horizon is not None and sampling is not None:
        sampling = replace(sampling, horizon=_positive(horizon, "--horizon"))
    return replace(sc, tolerances=tols, sampling=sampling)


# ---------------------------------------------------------------- artifacts


def _write_csv(path: Path, header: list[str], rows: list[list]):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in r])
    path.write_text(buf.getvalue())


def write_polytope_csv(path: Path, poly: SpectrumPolytope):
    d = poly.spec.dim_cartan
    rows = [[str(poly.spec), str(poly.theta_phi), k, *map(float, v.flat)] for k, v in enumerate(poly.vertices)]
    _write_csv(path, ["algebra", "theta_phi", "vertex"] + [f"h{i + 1}" for i in range(d)], rows)


def read_polytope_csv(path: Path) -> SpectrumPolytope:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"missing upstream artifact: {path} (run the 'spectrum' stage first)")
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SchemaError(f"{path}: no vertices")
    spec = AlgebraSpec.parse(rows[0]["algebra"])
    theta_phi = FlagType.parse(rows[0]["theta_phi"], spec)
    verts = tuple(CartanVector.from_flat(spec, [float(r[f"h{i + 1}"]) for i in range(spec.dim_cartan)],
                                         project=True) for r in rows)
    return SpectrumPolytope(spec, verts, theta_phi)


def _coset_text(block) -> str:
    return "{" + ", ".join(str(w) for w in sorted(block, key=lambda w: (w.length(), str(w)))) + "}"


def _roots_text(roots, spec) -> str:
    return lie.format_roots(roots, spec)


class Pipeline:
    """Runs stages for one scenario and writes artifacts into ``out_dir``."""

    def __init__(self, scenario: Scenario, out_dir: Path, polytope_path: Path | None = None,
                 workers: int | None = None):
        self.sc = scenario
        self.out = Path(out_dir)
        self.polytope_path = polytope_path
        self.workers = workers
        self.report: dict[str, Any] = {"scenario": scenario.name, "algebra": str(scenario.spec),
                                       "seed": scenario.seed, "stages": []}
        self.warnings: list[str] = []
        self.lines: list[str] = []

    def warn(self, msg: str):
        if msg not in self.warnings:
            self.warnings.append(msg)

    def run(self, stages) -> dict:
        self.out.mkdir(parents=True, exist_ok=True)
        for st in STAGES:
            if st in stages:
                getattr(self, f"stage_{st}")()
                self.report["stages"].append(st)
        self.report["warnings"] = list(self.warnings)
        self.report["tolerances"] = vars(self.sc.tolerances)
        (self.out / "report.json").write_text(json.dumps(self.report, indent=2, sort_keys=True) + "\n")
        text = "\n".join(self.lines + [f"warning: {w}" for w in self.warnings]) + "\n"
        (self.out / "report.txt").write_text(text)
        return self.report

    # -- stages --------------------------------------------------------

    def stage_lie(self):
        spec = self.sc.spec
        tps = self.sc.symbolic_theta_phi or (
            (self.sc.theta_phi,) if self.sc.theta_phi is not None else tuple(all_flag_types(spec)))
        pi_rows, table = lie_tables(spec, tps)
        _write_csv(self.out / "pi_tables.csv",
                   ["theta_phi", "manifold", "theta", "w", "coset", "plus", "zero", "minus",
                    "d_minus", "d_zero", "d_plus"], pi_rows)
        self.lines += table
        self.report["lie"] = [dict(zip(["theta_phi", "manifold", "theta", "w", "coset", "plus", "zero",
                                        "minus", "d_minus", "d_zero", "d_plus"], r)) for r in pi_rows]

    def _build_polytope(self) -> SpectrumPolytope:
        sc = self.sc
        if sc.vertices is not None:
            return SpectrumPolytope.from_points(sc.spec, sc.vertices, sc.theta_phi, flag_tol=sc.tolerances.flag)
        if sc.system is None:
            raise SchemaError("the spectrum stage needs a [system] or a [polytope]")
        return estimate_attractor_polytope(sc.system, sc.sampling, sc.tolerances.flag, self.workers)

    def stage_spectrum(self):
        poly = self._build_polytope()
        path = self.out / "polytope.csv"
        write_polytope_csv(path, poly)
        for w in poly.warnings:
            self.warn(w)
        self.report["polytope"] = {
            "theta_phi": str(poly.theta_phi),
            "vertices": [[fmt(x) for x in v.flat] for v in poly.vertices],
            "n_samples": len(poly.samples),
            "horizon_halving_delta": fmt(poly.halving_delta),
            "symmetrization_residual": fmt(poly.symmetrization_residual),
        }
        self.lines.append(f"polytope: {len(poly.vertices)} vertices, theta_phi = {poly.theta_phi}, "
                          f"halving delta = {fmt(poly.halving_delta)}")
        for v in poly.vertices:
            self.lines.append("  (" + ", ".join(fmt(x) for x in v.flat) + ")")
        if self.sc.write_trail and self.sc.system is not None:
            sig = ControlSignal.constant(np.zeros(self.sc.system.n_controls))
            trail = evolve_trail(self.sc.system, sig, self.sc.sampling.horizon, dt=self.sc.sampling.dt)
            d = self.sc.spec.dim_cartan
            _write_csv(self.out / "trail.csv",
                       ["t"] + [f"a{i + 1}" for i in range(d)] + [f"polar{i + 1}" for i in range(d)],
                       [[float(x) for x in r] for r in trail_summary_rows(trail)])
        if self.sc.oseledets is not None:
            self._oseledets()

    def _oseledets(self):
        o, system = self.sc.oseledets, self.sc.system
        value = o.control if o.control is not None else tuple([0.0] * system.n_controls)
        data = oseledets(system, ControlSignal.constant(value), o.n_max, o.gap, dt=o.dt)
        self.report["oseledets"] = {"exponents": [fmt(x) for x in data.exponents],
                                    "multiplicities": list(data.multiplicities),
                                    "equivariance_residual": fmt(data.equivariance_residual)}
        self.lines.append("oseledets exponents: " + ", ".join(
            f"{fmt(x)} (x{m})" for x, m in zip(data.exponents, data.multiplicities)))

    def _load_polytope(self) -> SpectrumPolytope:
        path = self.polytope_path or (self.out / "polytope.csv")
        return read_polytope_csv(path)

    def stage_classify(self):
        poly = self._load_polytope()
        rep = case_report(poly, gap_tol=self.sc.tolerances.gap)
        spec = poly.spec
        vrows, srows, out = [], [], []
        for r in rep.rows:
            d, c = r.descriptor, r.classification
            wl = d.w.short_label()
            vrows.append([r.manifold, str(r.theta), wl, _coset_text(r.block), *d.dims,
                          fmt_spectrum(d.minus), fmt_spectrum(d.zero), fmt_spectrum(d.plus),
                          c.verdict.value, float(c.margin), c.trace])
            for kind, roots, s in (("minus", d.pi.minus, d.minus), ("zero", d.pi.zero, d.zero),
                                   ("plus", d.pi.plus, d.plus)):
                srows.append([r.manifold, str(r.theta), wl, kind, _roots_text(roots, spec), fmt_spectrum(s),
                              float(s.lo) if not s.is_empty else "", float(s.hi) if not s.is_empty else ""])
            out.append(dict(zip(["manifold", "theta", "w", "coset", "d_minus", "d_zero", "d_plus",
                                 "minus", "zero", "plus", "verdict", "margin", "trace"],
                                [*vrows[-1][:10], fmt(c.margin), c.trace])))
        _write_csv(self.out / "verdicts.csv",
                   ["manifold", "theta", "w", "coset", "d_minus", "d_zero", "d_plus", "L_minus", "L_zero",
                    "L_plus", "verdict", "margin", "trace"], vrows)
        _write_csv(self.out / "spectra.csv", ["manifold", "theta", "w", "bundle", "roots", "spectrum", "lo", "hi"],
                   srows)
        self.report["verdicts"] = out
        self.lines.append(f"verdicts (theta_phi = {rep.theta_phi}):")
        for v in vrows:
            self.lines.append(f"  {v[0]:<6} E({v[2]}): {v[10]} (margin {fmt(v[11])})")

    def stage_entropy(self):
        poly = self._load_polytope()
        spec = poly.spec
        cases = self.sc.entropy_cases or tuple(
            (theta, lie.coset_representative(b))
            for theta in lie.proper_flag_types(spec) for b in lie.double_cosets(poly.theta_phi, theta))
        rows, out = [], []
        self.lines.append("entropy lower bounds:")
        for theta, w in cases:
            eb = entropy_lower_bound(poly, poly.theta_phi, theta, w, self.sc.tolerances.entropy)
            man = lie.flag_manifold_name(theta)
            rows.append([man, str(theta), w.short_label(), _roots_text(eb.plus_roots, spec), float(eb.value),
                         str(eb.valid).lower(), fmt_spectrum(eb.center_spectrum)])
            out.append({"manifold": man, "theta": str(theta), "w": w.short_label(), "value": fmt(eb.value),
                        "valid": eb.valid})
            self.lines.append(f"  {man:<6} E({w.short_label()}): bound {fmt(eb.value)} valid={str(eb.valid).lower()}")
            if not eb.valid:
                self.warn(f"center spectrum {fmt_spectrum(eb.center_spectrum)} of {man} E({w.short_label()}) "
                          f"exceeds +-{fmt(self.sc.tolerances.entropy)}; entropy bound not justified")
        _write_csv(self.out / "entropy.csv", ["manifold", "theta", "w", "plus_roots", "bound", "valid",
                                              "center_spectrum"], rows)
        self.report["entropy"] = out

    def stage_chain(self):
        sc = self.sc
        if sc.chain is None or sc.system is None:
            raise SchemaError("the chain stage needs [system] and [chain] sections")
        cs = sc.chain
        cells = CellComplex(cs.resolution)
        ctrls = control_grid(sc.system, cs.levels) if cs.controls == "grid" else default_controls(sc.system)
        graph = build_chain_graph(sc.system, cells, cs.eps_cells * cells.diameter, cs.horizon,
                                  ctrls if sc.system.n_controls else None, cs.points_per_axis)
        morse = chain_components(graph)
        _write_csv(self.out / "chain_edges.csv", ["src", "dst"], [list(e) for e in graph.edge_rows()])
        rows, comps = [], []
        for c in morse.components:
            ext = component_extent(morse, c.id)
            ext_txt = " x ".join(" U ".join(f"[{fmt(a)}, {fmt(b)}]" for a, b in ax) for ax in ext.axes)
            succ = " ".join(str(j) for j in sorted(morse.order.successors(c.id)))
            rows.append([c.id, len(c.members), str(c.attractor).lower(), str(c.repeller).lower(), succ,
                         str(ext.is_product).lower(), ext_txt, " ".join(map(str, c.members))])
            comps.append({"id": c.id, "n_cells": len(c.members), "attractor": c.attractor,
                          "repeller": c.repeller, "successors": succ, "is_product": ext.is_product,
                          "extent": ext_txt})
        _write_csv(self.out / "chain_components.csv",
                   ["component", "n_cells", "attractor", "repeller", "successors", "is_product", "extent",
                    "members"], rows)
        self.report["chain"] = {"cells": cells.n_cells, "edges": graph.graph.number_of_edges(),
                                "eps": fmt(graph.eps), "components": comps}
        self.lines.append(f"chain graph: {cells.n_cells} cells, {graph.graph.number_of_edges()} edges, "
                          f"{len(morse.components)} components, {len(morse.attractors)} attractor(s)")
        for c in comps:
            tag = "attractor" if c["attractor"] else ("repeller" if c["repeller"] else "saddle")
            self.lines.append(f"  component {c['id']} ({tag}): {c['extent']}")


def all_flag_types(spec: AlgebraSpec) -> list[FlagType]:
    simple = lie.simple_roots(spec)
    return [FlagType(spec, frozenset(c)) for k in range(len(simple) + 1)
            for c in itertools.combinations(simple, k)]


def lie_tables(spec: AlgebraSpec, theta_phis) -> tuple[list[list], list[str]]:
    """CSV rows and text lines of the root-set tables for each ``theta_phi``."""
    rows, lines = [], []
    for tp in theta_phis:
        lines.append(f"theta_phi = {tp}")
        for theta in lie.proper_flag_types(spec):
            man = lie.flag_manifold_name(theta)
            lines.append(f"  {man} (theta = {theta})")
            for block in lie.double_cosets(tp, theta):
                w = lie.coset_representative(block)
                pi = lie.pi_sets(tp, theta, w)
                dims = lie.bundle_dims(pi)
                plus, zero, minus = (_roots_text(pi.plus, spec), _roots_text(pi.zero, spec),
                                     _roots_text(pi.minus, spec))
                rows.append([str(tp), man, str(theta), w.short_label(), _coset_text(block),
                             plus, zero, minus, *dims])
                lines.append(f"    {w.short_label():<6} coset {_coset_text(block)}: "
                             f"Pi+ = {plus}, Pi0 = {zero}, Pi- = {minus}")
    return rows, lines
