"""Command line: ``flagdyn <lie|spectrum|classify|chain|entropy|report> [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import lie
from .cocycle import IntegrationError, UnresolvedSpectrumError
from .scenario import (
    STAGES,
    MissingArtifactError,
    Pipeline,
    SchemaError,
    bundled_scenarios,
    lie_tables,
    load_scenario,
    with_overrides,
)

EXIT_SCHEMA = 2
EXIT_INTEGRATION = 3
EXIT_UNRESOLVED = 4
EXIT_MISSING = 5


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flagdyn", description="Spectra, hyperbolicity and chain graphs "
                                "for invariant control systems on flag manifolds.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario TOML file or bundled scenario name")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", default="flagdyn-out")
    common.add_argument("--tol-zero", type=float)
    common.add_argument("--tol-gap", type=float)
    common.add_argument("--horizon", type=float, help="override the sampling horizon")
    common.add_argument("--threads", type=int, help="worker threads (default: $FLAGDYN_THREADS or 1)")
    for name, help_ in (("lie", "root-set tables and double cosets"),
                        ("spectrum", "estimate the Morse spectrum polytope"),
                        ("classify", "hyperbolicity verdicts from a polytope"),
                        ("chain", "chain graph and Morse components"),
                        ("entropy", "invariance entropy lower bounds"),
                        ("report", "run several stages")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if name == "lie":
            sp.add_argument("--algebra", help="e.g. sl3 or sl2xsl2 (instead of --config)")
            sp.add_argument("--theta-phi", action="append", default=None,
                            help="flag type of the flow, e.g. a12 or '[a12]'; repeatable")
        if name in ("classify", "entropy"):
            sp.add_argument("--polytope", help="polytope CSV written by the spectrum stage")
        if name == "report":
            sp.add_argument("--stages", help=f"comma-separated subset of {','.join(STAGES)}")
    sub.add_parser("scenarios", help="list bundled scenarios")
    return p


def _lie_direct(args) -> int:
    spec = lie.AlgebraSpec.parse(args.algebra)
    tps = args.theta_phi or ["[]"]
    flags = []
    for t in tps:
        t = t.strip()
        flags.append(lie.FlagType.parse(t if t.startswith(("[", "theta=")) else f"[{t}]", spec))
    rows, lines = lie_tables(spec, flags)
    print("\n".join(lines))
    if args.out_dir:
        from .scenario import _write_csv

        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "pi_tables.csv", ["theta_phi", "manifold", "theta", "w", "coset", "plus", "zero",
                                           "minus", "d_minus", "d_zero", "d_plus"], rows)
    return 0


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "scenarios":
            print("\n".join(bundled_scenarios()))
            return 0
        if args.command == "lie" and args.config is None:
            if not args.algebra:
                raise SchemaError("lie needs --config or --algebra")
            return _lie_direct(args)
        if args.config is None:
            raise SchemaError(f"{args.command} needs --config")
        sc = with_overrides(load_scenario(args.config), args.seed, args.tol_zero, args.tol_gap, args.horizon)
        if args.command == "report":
            stages = tuple(s.strip() for s in args.stages.split(",")) if args.stages else sc.default_stages()
            bad = [s for s in stages if s not in STAGES]
            if bad:
                raise SchemaError(f"unknown stages {bad}")
        else:
            stages = (args.command,)
        poly = getattr(args, "polytope", None)
        pipe = Pipeline(sc, Path(args.out_dir), Path(poly) if poly else None, args.threads)
        pipe.run(stages)
        print((Path(args.out_dir) / "report.txt").read_text(), end="")
        return 0
    except (SchemaError, lie.LieError) as exc:
        print(f"flagdyn: config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except MissingArtifactError as exc:
        print(f"flagdyn: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except IntegrationError as exc:
        print(f"flagdyn: integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except UnresolvedSpectrumError as exc:
        print(f"flagdyn: unresolved spectrum: {exc}", file=sys.stderr)
        return EXIT_UNRESOLVED


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
