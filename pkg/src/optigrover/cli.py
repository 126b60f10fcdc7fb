"""Command-line front end.

Exit codes: 0 success, 1 validation or usage error, 2 internal error.
Flags override values from ``--config FILE`` (flat ``key = value`` lines
using the long flag names).  ``OPTIGROVER_OUTDIR`` prefixes relative
``--out`` paths.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, circuits, compiler, oracle
from .errors import InvalidArgumentError, InvalidStateError
from .state import uniform_superposition

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _p(x: float) -> str:
    return repr(round(float(x), 12) + 0.0)


def _csv(name: str, header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {name} v{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out:
        path = Path(args.out)
        outdir = os.environ.get("OPTIGROVER_OUTDIR")
        if outdir and not path.is_absolute():
            path = Path(outdir) / path
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)


def _json(payload: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, sort_keys=True) + "\n"


def _load_circuit(source: str, setting, iterations=None) -> circuits.Circuit:
    path = Path(source)
    if path.suffix == ".circ" or path.exists():
        if not path.exists():
            raise InvalidArgumentError(f"circuit file {source!r} not found")
        return circuits.Circuit.from_text(path.read_text())
    return circuits.builtin_circuit(source, setting, iterations)


def _matrix_json(u: np.ndarray):
    return [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row] for row in u]


# -- subcommands ------------------------------------------------------------------

def cmd_simulate(args) -> None:
    setting = oracle.parse_oracle(args.oracle)
    c = _load_circuit(args.circuit, setting, args.iterations)
    outcomes = circuits.detector_probabilities(c, circuits.input_state(c))
    if args.format == "json":
        _emit(args, _json({"circuit": c.name, "oracle": args.oracle, "outcomes": [
            {"detector": o.detector, "port": o.port, "pol": o.pol, "probability": o.probability} for o in outcomes]}))
    else:
        _emit(args, _csv("detector-distribution", ["detector", "pol", "probability"],
                         [(o.detector, o.pol, _p(o.probability)) for o in outcomes]))


def cmd_build(args) -> None:
    setting = oracle.parse_oracle(args.oracle)
    _emit(args, circuits.builtin_circuit(args.circuit, setting, args.iterations).to_text())


def cmd_compile(args) -> None:
    setting = oracle.parse_oracle(args.oracle)
    c = _load_circuit(args.input, setting, args.iterations)
    out, report = compiler.compile(c, tol=args.tol)
    if args.out:
        _emit(args, out.to_text())
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text if args.out else "\n" + text)
    if not args.out:
        sys.stdout.write(out.to_text())


def cmd_oracle_check(args) -> None:
    nets, marks = {}, {}
    for pc, lc in oracle.EO_SETTINGS:
        key = f"{pc},{lc}"
        nets[key] = _matrix_json(oracle.electro_optic_oracle_net(pc, lc))
        marks[key] = oracle.oracle_marked_element(pc, lc)
    overlaps = oracle.post_oracle_overlaps()
    _emit(args, _json({
        "basis": ["aH", "aV", "bH", "bV"],
        "net_unitaries": nets,
        "marked": marks,
        "bijection": sorted(marks.values()) == ["00", "01", "10", "11"],
        "orthogonality": [[_p(x) for x in row] for row in overlaps],
        "settings": [f"{pc},{lc}" for pc, lc in oracle.EO_SETTINGS],
    }))


def _need_seed(args) -> None:
    if args.seed is None:
        raise InvalidArgumentError("--seed is required when sigma > 0")


def cmd_noise_sweep(args) -> None:
    _need_seed(args)
    eo = not args.ideal_oracle
    rows = oracle.noise_sweep(_floats(args.sigmas), n_seeds=args.samples, seed=args.seed, electro_optic=eo)
    sigma_star = oracle.calibrate_sigma(args.target, n_seeds=args.samples, seed=args.seed, electro_optic=eo)
    if args.format == "json":
        _emit(args, _json({"rows": [{"sigma": s, "mean_error": m, "stderr": e} for s, m, e in rows],
                           "sigma_star": sigma_star, "target": args.target, "samples": args.samples,
                           "seed": args.seed, "rng": oracle.RNG_ALGORITHM}))
    else:
        text = _csv("noise-sweep", ["sigma", "mean_error", "stderr"], [(repr(s), repr(m), repr(e)) for s, m, e in rows])
        text += f"# sigma_star={sigma_star!r} target={args.target!r} samples={args.samples} seed={args.seed}\n"
        text += f"# rng: {oracle.RNG_ALGORITHM}\n"
        _emit(args, text)


def cmd_ifm(args) -> None:
    rows = []
    for marked in ("00", "01", "10", "11"):
        res = analysis.ifm_simulate(marked)
        for (port, pol), p in res.probabilities.items():
            rows.append((marked, port, pol, _p(p)))
    if args.format == "json":
        _emit(args, _json({"rows": [dict(zip(("marked", "port", "pol", "probability"), r)) for r in rows]}))
    else:
        _emit(args, _csv("ifm", ["marked", "port", "pol", "probability"], rows))


def cmd_grover_abstract(args) -> None:
    rows = []
    for N in _ints(args.N):
        if args.k:
            for k in _ints(args.k):
                rows.append((N, "given", k, repr(analysis.grover_success_closed_form(N, k))))
        else:
            for rule, k in analysis.iteration_counts(N).items():
                rows.append((N, rule, k, repr(analysis.grover_success_closed_form(N, k))))
    _emit(args, _csv("grover-abstract", ["N", "rule", "k", "success"], rows))


def cmd_decohere_sweep(args) -> None:
    rows = []
    for ratio in _floats(args.ratios):
        gamma = analysis.coherence_factor(ratio, 1.0)
        rows.append((repr(ratio), repr(gamma), repr(round(analysis.fringe_visibility("00", gamma), 12))))
    _emit(args, _csv("decohere-sweep", ["delta_L_over_L_c", "gamma", "visibility"], rows))


def cmd_fig3(args) -> None:
    if args.sigma < 0:
        raise InvalidArgumentError(f"sigma must be >= 0, got {args.sigma}")
    rows = [(r[0], r[1], 0.0, *r[2:]) for r in oracle.detector_matrix(0.0)]
    if args.sigma > 0:
        _need_seed(args)
        rows += [(r[0], r[1], args.sigma, *r[2:]) for r in oracle.detector_matrix(args.sigma, args.samples, args.seed)]
    header = ["setting", "marked", "sigma", "p1", "p2", "p3", "p4"]
    if args.format == "json":
        _emit(args, _json({"rows": [dict(zip(header, r)) for r in rows], "rng": oracle.RNG_ALGORITHM}))
    else:
        _emit(args, _csv("fig3", header, [(r[0], r[1], repr(r[2]), *(_p(x) for x in r[3:])) for r in rows]))


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="optigrover", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat key = value file; flags override it")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p, fmt=("csv", "json")):
        p.add_argument("--format", choices=fmt, default=fmt[0])
        p.add_argument("--out", default=None)
        p.add_argument("--tol", type=float, default=1e-9)
        return p

    p = common(sub.add_parser("simulate", help="detector distribution of a circuit"))
    p.add_argument("--circuit", required=True, help="built-in name or .circ file")
    p.add_argument("--oracle", default="ideal:00")
    p.add_argument("--iterations", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("build", help="write a built-in circuit as a circuit file"), fmt=("circ",))
    p.add_argument("--circuit", required=True)
    p.add_argument("--oracle", default="ideal:00")
    p.add_argument("--iterations", type=int, default=None)
    p.set_defaults(func=cmd_build)

    p = common(sub.add_parser("compile", help="consolidate a circuit and report"), fmt=("json",))
    p.add_argument("--in", dest="input", required=True, help="built-in name or .circ file")
    p.add_argument("--oracle", default="ideal:00")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--report", default=None, help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_compile)

    p = common(sub.add_parser("oracle-check", help="electro-optic oracle unitaries and bijection"), fmt=("json",))
    p.set_defaults(func=cmd_oracle_check)

    p = common(sub.add_parser("noise-sweep", help="mean error vs phase-noise sigma"))
    p.add_argument("--sigmas", default="0,0.025,0.05,0.075,0.1,0.15,0.2,0.3")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None, help="required when sigma > 0")
    p.add_argument("--target", type=float, default=0.028)
    p.add_argument("--ideal-oracle", action="store_true")
    p.set_defaults(func=cmd_noise_sweep)

    p = common(sub.add_parser("ifm", help="interaction-free measurement table"))
    p.set_defaults(func=cmd_ifm)

    p = common(sub.add_parser("grover-abstract", help="closed-form success rows"), fmt=("csv",))
    p.add_argument("--N", default="4,8,16,64,256,1024")
    p.add_argument("--k", default=None, help="explicit iteration counts instead of floor/round/ceil")
    p.set_defaults(func=cmd_grover_abstract)

    p = common(sub.add_parser("decohere-sweep", help="coherence factor and fringe visibility"), fmt=("csv",))
    p.add_argument("--ratios", default="0,0.25,0.5,1,1.5,2,3")
    p.set_defaults(func=cmd_decohere_sweep)

    p = common(sub.add_parser("fig3", help="oracle setting x detector probability matrix"))
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None, help="required when sigma > 0")
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_fig3)
    return parser


def _read_config(path: str) -> dict[str, str]:
    cfg = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidArgumentError(f"config line without '=': {line!r}")
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((tok for tok in argv if tok in choices), None)
    if known.config and command:
        subparser = choices[command]
        actions = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, value in _read_config(known.config).items():
            if key not in actions:
                raise InvalidArgumentError(f"config key {key!r} is not an option of {command}")
            action = actions[key]
            if isinstance(action, argparse._StoreTrueAction):
                value = value.lower() in ("1", "true", "yes")
            elif action.type is not None:
                value = action.type(value)
            if action.choices is not None and value not in action.choices:
                raise InvalidArgumentError(f"config {key}={value!r}: choose from {list(action.choices)}")
            defaults[key] = value
            action.required = False
        subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (InvalidArgumentError, InvalidStateError, FileNotFoundError) as exc:
        print(f"optigrover: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        print(f"optigrover: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
