"""Command-line interface.

Subcommands: ``gen`` (sample a random instance), ``solve`` (one matching
run on an instance file), ``simulate`` (multi-period replay of the
cooperation regimes), ``sweep`` (grid over cycle caps and pool ratios),
and ``report`` (summarise CSV output).

Exit codes: 0 success, 2 configuration error, 3 solver timeout, 4 I/O
error.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

from .errors import ConfigurationError, IkepError, InstanceFormatError
from .enumeration import enumerate_cycles, enumerate_segments, make_cycle
from .graph import country_subgraph, parse_instance, write_instance
from .lp_format import export_lp_text
from .model import (add_layer_constraints, build_bounded_unbounded_model,
                    build_cycle_model, build_edge_model, build_mixed_model)
from .policies import Regime, run_regime
from .policy import Cap, merged_policy
from .sampling import CountrySpec, InstanceSpec, sample_instance
from .simulator import (SimulationConfig, run_simulation, sweep,
                        write_run_report, write_stage_report)
from .plots import stage_chart, sweep_heatmap
from .solver import decode, solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TIMEOUT = 3
EXIT_IO = 4


def _parse_caps(text: str) -> tuple[Cap, ...]:
    """Parse colon-separated cycle caps, e.g. ``3:4`` or ``3:inf``."""
    out: list[Cap] = []
    for part in text.split(":"):
        part = part.strip().lower()
        if part in ("inf", "none", "unbounded"):
            out.append(None)
        else:
            try:
                v = int(part)
            except ValueError:
                raise ConfigurationError(f"bad cap {part!r} in {text!r}") from None
            out.append(v)
    if not out:
        raise ConfigurationError("empty cap list")
    return tuple(out)


def _parse_ratio(text: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(p) for p in text.split(":"))
    except ValueError:
        raise ConfigurationError(f"bad ratio {text!r}; expected e.g. 1:2") from None
    if not parts or any(p < 1 for p in parts):
        raise ConfigurationError(f"ratio entries must be >= 1, got {text!r}")
    return parts


def _parse_regimes(text: str) -> tuple[Regime, ...]:
    out = []
    for name in text.split(","):
        try:
            out.append(Regime(name.strip()))
        except ValueError:
            valid = ", ".join(r.value for r in Regime)
            raise ConfigurationError(f"unknown regime {name!r}; valid: {valid}") from None
    return tuple(out)


def _load_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; blank lines and ``#`` comments ignored."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InstanceFormatError(0, f"cannot read config {path}: {e}") from None
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{ln}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _apply_config(args: argparse.Namespace, defaults: argparse.Namespace) -> None:
    """Fill unset flags from --config; explicit flags win."""
    if not getattr(args, "config", None):
        return
    parsed = _load_config_file(args.config)
    casts = {
        "bounds": _parse_caps, "ratio": _parse_ratio, "regimes": _parse_regimes,
        "stages": int, "instances": int, "seed": int, "pairs": int,
        "timeout": float, "scale": str, "out": str, "model": str,
    }
    for key, raw in parsed.items():
        if key not in casts:
            raise ConfigurationError(f"unknown config key {key!r}")
        if getattr(args, key, None) == getattr(defaults, key, None):
            setattr(args, key, casts[key](raw))


def _scale(args: argparse.Namespace) -> tuple[int, int]:
    """(pairs per country, instances) for the chosen scale preset."""
    if args.scale == "desk":
        pairs, instances = 100, 20
    elif args.scale == "full":
        pairs, instances = 100, 100
    else:
        raise ConfigurationError(f"unknown scale {args.scale!r}")
    if args.pairs is not None:
        pairs = args.pairs
    if args.instances is not None:
        instances = args.instances
    return pairs, instances


# -- subcommands -------------------------------------------------------

def cmd_gen(args: argparse.Namespace) -> int:
    sizes = [int(p) for p in args.sizes.split(":")]
    spec = InstanceSpec(
        countries=tuple(CountrySpec(pairs=s, altruists=args.altruists) for s in sizes),
        exclude_direct_compatible=not args.keep_compatible,
        seed=args.seed,
    )
    g = sample_instance(spec)
    buf = io.StringIO()
    write_instance(g, buf)
    if args.out == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(args.out).write_text(buf.getvalue())
    return EXIT_OK


def _build_model(g, caps: tuple[Cap, ...], model_name: str, policy):
    unbounded = [k for k, c in enumerate(caps, start=1) if c is None]
    if model_name == "cycle":
        if unbounded:
            raise ConfigurationError(
                "the cycle model needs finite caps; use --model atcz (two "
                "countries, one unbounded) or --model mixed"
            )
        return build_cycle_model(enumerate_cycles(g, policy), len(g.nodes))
    if model_name == "edge":
        if policy.international_cycle_cap is None:
            raise ConfigurationError(
                "the edge model needs a finite cycle cap; use --model atcz "
                "or --model mixed for unbounded countries"
            )
        return build_edge_model(g, policy.international_cycle_cap)
    if model_name == "mixed":
        lifted = []
        for k in range(1, g.num_countries + 1):
            sub = country_subgraph(g, k)
            for c in enumerate_cycles(sub.graph, policy):
                lifted.append(make_cycle(g, tuple(sub.to_parent[v] for v in c.nodes)))
        model = build_mixed_model(g, lifted, enumerate_segments(g, policy), policy)
        return add_layer_constraints(model, g, T=None, policy=policy)
    if model_name == "atcz":
        if len(caps) != 2 or len(unbounded) != 1:
            raise ConfigurationError(
                "--model atcz needs exactly two countries with one unbounded cap"
            )
        bounded = 3 - unbounded[0]
        sub = country_subgraph(g, bounded)
        cycles = [make_cycle(g, tuple(sub.to_parent[v] for v in c.nodes))
                  for c in enumerate_cycles(sub.graph, policy)]
        segments = enumerate_segments(g, policy, countries=(bounded,))
        return build_bounded_unbounded_model(g, cycles, segments, bounded_country=bounded)
    raise ConfigurationError(f"unknown model {model_name!r}")


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        with open(args.instance) as fh:
            g = parse_instance(fh)
    except OSError as e:
        print(f"error: cannot read {args.instance}: {e}", file=sys.stderr)
        return EXIT_IO
    caps = args.bounds
    if len(caps) != g.num_countries:
        raise ConfigurationError(
            f"instance has {g.num_countries} countries but --bounds gives {len(caps)}"
        )
    policy = merged_policy(caps)
    model = _build_model(g, caps, args.model, policy)
    if args.export_lp:
        Path(args.export_lp).write_text(export_lp_text(model))
    if args.explain:
        for tag, count in sorted(model.tag_counts().items()):
            print(f"{tag}: {count}")
        return EXIT_OK
    assignment = solve(model, args.timeout)
    plan = decode(model, assignment, g)
    print(f"objective: {assignment.objective:g}")
    print(f"transplants: {plan.total_transplants}")
    for k in sorted(plan.per_country):
        print(f"country {k}: {plan.per_country[k]}")
    for c in plan.cycles:
        print("cycle:", " ".join(str(v) for v in c.nodes))
    for ch in plan.chains:
        print("chain:", " ".join(str(v) for v in ch))
    if assignment.timed_out:
        print("warning: time limit reached; solution may be suboptimal", file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_OK


def _sim_config(args: argparse.Namespace) -> SimulationConfig:
    pairs, instances = _scale(args)
    return SimulationConfig(
        pairs_per_country=pairs,
        caps=args.bounds,
        stages=args.stages,
        instances=instances,
        ratio=args.ratio,
        regimes=args.regimes,
        seed=args.seed,
        time_limit=args.timeout,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _sim_config(args)
    result = run_simulation(cfg)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_stage_report(result, outdir / "stage_report.csv")
    write_run_report(result, outdir / "run_report.csv")
    for regime in cfg.regimes:
        stage_chart(result, regime.value, outdir / f"stages_{regime.value}.svg")
    for regime in cfg.regimes:
        totals = result.totals(regime)
        total = sum(totals.values())
        per = " ".join(f"c{k}={v}" for k, v in sorted(totals.items()))
        print(f"{regime.value}: {total} transplants ({per})")
    skipped = result.instances_timed_out()
    if skipped:
        print(f"warning: instances hit the time limit: {sorted(skipped)}",
              file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _sim_config(args)
    caps_grid = [_parse_caps(b) for b in args.bounds_grid.split(",")]
    ratios = ([_parse_ratio(r) for r in args.ratio_grid.split(",")]
              if args.ratio_grid else [cfg.ratio])
    cells = sweep(cfg, caps_grid, ratios)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for cell in cells:
        caps_s = "-".join("inf" if c is None else str(c) for c in cell.caps)
        ratio_s = ("base" if cell.ratio is None
                   else "-".join(str(r) for r in cell.ratio))
        write_run_report(cell.result, outdir / f"run_{caps_s}_{ratio_s}.csv")
    for regime in cfg.regimes:
        sweep_heatmap(cells, regime.value, outdir / f"heatmap_{regime.value}.svg")
    timed_out = False
    for cell in cells:
        caps_s = ":".join("inf" if c is None else str(c) for c in cell.caps)
        for regime in cfg.regimes:
            total = sum(cell.result.totals(regime).values())
            print(f"caps {caps_s} ratio {cell.ratio or 'base'} "
                  f"{regime.value}: {total}")
        timed_out |= bool(cell.result.instances_timed_out())
    return EXIT_TIMEOUT if timed_out else EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    from .simulator import read_run_report
    try:
        records = read_run_report(args.report)
    except OSError as e:
        print(f"error: cannot read {args.report}: {e}", file=sys.stderr)
        return EXIT_IO
    by_regime: dict[str, dict[int, int]] = {}
    drops: dict[str, int] = {}
    for r in records:
        by_regime.setdefault(r.regime, {})
        by_regime[r.regime][r.country] = by_regime[r.regime].get(r.country, 0) + r.transplants
        drops[r.regime] = drops.get(r.regime, 0) + r.dropouts
    local = by_regime.get(Regime.NO_COOPERATION.value, {})
    for regime, per in sorted(by_regime.items()):
        total = sum(per.values())
        parts = []
        for k in sorted(per):
            ratio = ""
            if regime != Regime.NO_COOPERATION.value and local.get(k):
                ratio = f" ({per[k] / local[k]:.2f}x local)"
            parts.append(f"c{k}={per[k]}{ratio}")
        print(f"{regime}: {total} transplants, {drops.get(regime, 0)} dropouts; "
              + " ".join(parts))
    return EXIT_OK


# -- argument parsing --------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ikep",
                                description="International kidney-exchange matching tools")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a random instance")
    g.add_argument("--sizes", default="10:10", help="pairs per country, e.g. 20:20")
    g.add_argument("--altruists", type=int, default=0)
    g.add_argument("--keep-compatible", action="store_true",
                   help="keep pairs whose own donor is compatible")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="-", help="output file, or - for stdout")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="one matching run on an instance file")
    s.add_argument("instance")
    s.add_argument("--bounds", type=_parse_caps, default=(3, 3),
                   help="cycle cap per country, e.g. 3:4 or 3:inf")
    s.add_argument("--model", default="cycle",
                   choices=["cycle", "edge", "mixed", "atcz"])
    s.add_argument("--export-lp", default=None, help="also write the model in LP text form")
    s.add_argument("--explain", action="store_true",
                   help="print constraint-group counts instead of solving")
    s.add_argument("--timeout", type=float, default=None)
    s.set_defaults(func=cmd_solve)

    def add_sim_flags(sp):
        sp.add_argument("--bounds", type=_parse_caps, default=(3, 3))
        sp.add_argument("--ratio", type=_parse_ratio, default=None)
        sp.add_argument("--regimes", type=_parse_regimes,
                        default=(Regime.NO_COOPERATION, Regime.CONSECUTIVE,
                                 Regime.MERGED),
                        help="comma-separated: local,seq,merged")
        sp.add_argument("--stages", type=int, default=12)
        sp.add_argument("--instances", type=int, default=None)
        sp.add_argument("--pairs", type=int, default=None,
                        help="pairs per country (overrides --scale)")
        sp.add_argument("--scale", default="desk", choices=["desk", "full"])
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--timeout", type=float, default=None,
                        help="per-solve time limit in seconds")
        sp.add_argument("--config", default=None,
                        help="flat key = value config file; flags take precedence")

    m = sub.add_parser("simulate", help="multi-period simulation")
    add_sim_flags(m)
    m.add_argument("--out", default="sim_out")
    m.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="grid over caps and pool ratios")
    add_sim_flags(w)
    w.add_argument("--bounds-grid", default="2:2,3:3,4:4",
                   help="comma-separated cap pairs, e.g. 2:2,3:3")
    w.add_argument("--ratio-grid", default=None,
                   help="comma-separated ratios, e.g. 1:1,1:2")
    w.add_argument("--out", default="sweep_out")
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="summarise a run_report.csv")
    r.add_argument("report")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            defaults = parser.parse_args([args.command])
            _apply_config(args, defaults)
    except IkepError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except InstanceFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except IkepError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
