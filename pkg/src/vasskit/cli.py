"""Batch command-line front end.

Exit codes: 0 = yes/ok, 1 = no/unreachable/contract violated, 2 = usage or
internal error, 3 = inconclusive (node budget exhausted).  Data goes to
stdout (or --out); diagnostics go to stderr, so data streams are
byte-reproducible.
"""

from __future__ import annotations

import argparse
import sys

from . import core, lang, reach, reductions, suites
from .core import Configuration, FormatError, Run, VassError, parse_config
from .gadgets import CtrlSpec, expand_pair_tests, expand_triple_tests, instrument_ctrl
from .lang import CtrlTag, PairFinal, PairSpec, TripleSpec, ZeroTest

OK, NO, USAGE, INCONCLUSIVE = 0, 1, 2, 3


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# Run files

def run_to_text(run: Run, endpoint: Configuration | None = None) -> str:
    lines = [f"start {core.format_config(run.start)}"]
    for t in run.steps:
        zt = getattr(t, "zero_test", None)
        mark = f" zt={zt + 1}" if zt is not None else ""
        lines.append(f"step {t.src} {core.format_vector(t.effect)}{mark} {t.dst}")
    if endpoint is not None:
        lines.append(f"endpoint {core.format_config(endpoint)}")
    return "\n".join(lines) + "\n"


def run_from_text(text: str) -> tuple[Run, Configuration | None]:
    start = None
    endpoint = None
    steps: list[core.CaTransition] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "start":
                start = parse_config(parts[1])
            elif parts[0] == "endpoint":
                endpoint = parse_config(parts[1])
            elif parts[0] == "step":
                if len(parts) == 5:
                    if not parts[3].startswith("zt="):
                        raise FormatError("expected zt=<k>")
                    zt = int(parts[3][3:]) - 1
                    steps.append(core.CaTransition(parts[1], core.parse_vector(parts[2]),
                                                   parts[4], zero_test=zt))
                else:
                    steps.append(core.CaTransition(parts[1], core.parse_vector(parts[2]),
                                                   parts[3]))
            else:
                raise FormatError(f"unknown item {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            raise FormatError(f"line {lineno}: {raw!r}") from exc
    if start is None:
        raise FormatError("run file lacks a start line")
    return Run(start, tuple(steps)), endpoint


# ---------------------------------------------------------------------------
# Marker elimination driven by the strategy tags in the program

def eliminate_markers(cp: lang.CoreProgram) -> lang.CoreProgram:
    """Expand triple/pair markers and instrument every ctrl family."""
    triple_specs: list[TripleSpec] = []
    pair_specs: list[PairSpec] = []
    ctrl_targets: dict[str, set[str]] = {}

    def scan(body) -> None:
        for st in body:
            if isinstance(st, ZeroTest):
                tag = st.strategy
                if isinstance(tag, TripleSpec) and tag not in triple_specs:
                    triple_specs.append(tag)
                elif isinstance(tag, PairSpec) and tag not in pair_specs:
                    pair_specs.append(tag)
                elif isinstance(tag, CtrlTag):
                    ctrl_targets.setdefault(tag.ctrl, set()).add(st.counter)
                elif tag is None:
                    raise VassError(f"marker on {st.counter!r} carries no strategy")
            elif isinstance(st, PairFinal):
                if st.spec not in pair_specs:
                    pair_specs.append(st.spec)
            elif isinstance(st, lang.Loop):
                scan(st.body)
            elif isinstance(st, lang.Choice):
                scan(st.left)
                scan(st.right)

    scan(cp.body)
    for spec in triple_specs:
        cp = expand_triple_tests(cp, spec)
    for spec in pair_specs:
        cp = expand_pair_tests(cp, spec)
    for ctrl, controlled in sorted(ctrl_targets.items()):
        cp = instrument_ctrl(cp, CtrlSpec(ctrl, sorted(controlled)))
    return cp


# ---------------------------------------------------------------------------
# Manifests

def _manifest(construction: str, params: dict[str, int], v: core.Vass,
              encoding: str, source: Configuration, target: Configuration) -> str:
    lines = [f"construction={construction}"]
    for key, value in params.items():
        lines.append(f"{key}={value}")
    lines += [
        f"dimension={v.dimension}",
        f"encoding={encoding}",
        f"states={len(v.states)}",
        f"transitions={len(v.transitions)}",
        f"initial={v.initial}",
        f"final={v.final}",
        f"source={core.format_config(source)}",
        f"target={core.format_config(target)}",
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Verbs

def _cmd_compile(args) -> int:
    env = {}
    for item in args.param or []:
        key, _, value = item.partition("=")
        env[key] = int(value)
    prog = lang.parse(_read(args.program))
    cp = eliminate_markers(lang.expand(prog, env))
    v = lang.compile(cp)
    _write(core.to_dot(v) if args.format == "dot" else core.dumps(v), args.out)
    return OK


def _cmd_reduce(args) -> int:
    name = args.construction
    if name == "subset-sum":
        inst = reductions.SubsetSumInstance(args.s0, tuple(args.set or ()))
        v = reductions.subset_sum_to_vass(inst)
        zero = Configuration(v.initial, (0,) * 4)
        manifest = _manifest(name, {"s0": inst.target,
                                    **{f"v{i+1}": x for i, x in enumerate(inst.values)}},
                             v, "unary", zero, Configuration(v.final, (0,) * 4))
    elif name == "pspace":
        p = reductions.PumpParams(args.s, args.n)
        v = reductions.pspace_pump(p)
        manifest = _manifest(name, {"s": p.s, "n": p.n}, v, "unary",
                             Configuration(v.initial, (0,) * 5),
                             Configuration(v.final, reductions.pspace_target(p)))
    elif name == "expspace":
        p = reductions.PumpParams(args.s, args.n)
        v = reductions.expspace_pump(p)
        manifest = _manifest(name, {"s": p.s, "n": p.n}, v, "binary",
                             Configuration(v.initial, (0,) * 6),
                             Configuration(v.final, reductions.expspace_target(p)))
    elif name == "tower":
        p = reductions.TowerParams(args.n, args.seed)
        v = reductions.tower_pump(p)
        amplified = 2 ** p.seed if p.seed != 1 else 2
        target = Configuration(v.final, (amplified, 1, amplified, 0, 0, 0, 0, 0))
        manifest = _manifest(name, {"n": p.n, "seed": p.seed}, v, "unary",
                             Configuration(v.initial, (0,) * 8), target)
    elif name in ("ca-triple", "ca-pair"):
        obj = core.loads(_read(args.automaton))
        if not isinstance(obj, core.CounterAutomaton):
            obj = core.CounterAutomaton(obj.name, obj.dimension, obj.states,
                                        tuple(core.CaTransition(t.src, t.effect, t.dst)
                                              for t in obj.transitions),
                                        obj.initial, obj.final)
        if name == "ca-triple":
            v = reductions.ca_to_vass_triple(obj, args.bound, args.tests)
            manifest = _manifest(name, {"bound": args.bound, "tests": args.tests}, v, "unary",
                                 reductions.ca_triple_source(obj, args.bound, args.tests),
                                 reductions.ca_triple_target(obj, args.bound))
        else:
            v = reductions.ca_to_vass_pair(obj, args.bound)
            manifest = _manifest(name, {"bound": args.bound}, v, "unary",
                                 reductions.ca_pair_source(obj, args.bound),
                                 reductions.ca_pair_target(obj))
    else:  # pragma: no cover
        raise VassError(f"unknown construction {name!r}")
    out = args.out or f"{name}.vass"
    _write(core.dumps(v), out)
    sys.stdout.write(manifest)
    return OK


def _parse_caps(args, dimension: int) -> reach.Caps:
    per = None
    if args.caps:
        per = tuple(int(x) for x in args.caps.split(","))
        if len(per) != dimension:
            raise VassError(f"caps need {dimension} entries")
    return reach.Caps(per_counter=per, total=args.total, node_budget=args.budget)


def _cmd_explore(args) -> int:
    v = core.loads(_read(args.vass))
    if isinstance(v, core.CounterAutomaton):
        raise VassError("explore runs on plain VASSes")
    src = parse_config(getattr(args, "from"))
    caps = _parse_caps(args, v.dimension)
    if args.target is not None:
        trg = parse_config(args.target)
        run, report = reach.find_run(v, src, trg, caps)
        sys.stdout.write(f"explored={report.explored}\n"
                         f"exhausted={'yes' if report.frontier_exhausted else 'no'}\n"
                         f"found={'yes' if run is not None else 'no'}\n")
        if run is not None:
            if args.out:
                _write(run_to_text(run, trg), args.out)
            return OK
        return NO if report.frontier_exhausted else INCONCLUSIVE
    report = reach.explore(v, src, caps)
    sys.stdout.write(f"explored={report.explored}\n"
                     f"exhausted={'yes' if report.frontier_exhausted else 'no'}\n"
                     f"reached={len(report.reached)}\n")
    return OK if report.frontier_exhausted else INCONCLUSIVE


def _cmd_witness(args) -> int:
    params: dict[str, int] = {}
    if args.construction in ("pspace", "expspace"):
        params = {"s": args.s, "n": args.n}
    elif args.construction == "tower":
        params = {"n": args.n, "seed": args.seed}
    else:
        params = {"target": args.s0, "values": tuple(args.set or ())}
    try:
        cert = reach.canonical_witness(args.construction, **params)
    except reach.InfeasibleParams as exc:
        sys.stderr.write(f"infeasible: {exc}\n")
        return NO
    _write(run_to_text(cert.run, cert.endpoint), args.out)
    sys.stderr.write(f"witness of {len(cert.run)} steps ends at "
                     f"{core.format_config(cert.endpoint)}\n")
    return OK


def _cmd_validate(args) -> int:
    obj = core.loads(_read(args.vass))
    run, endpoint = run_from_text(_read(args.run))
    try:
        if isinstance(obj, core.CounterAutomaton):
            if args.bound is None:
                raise VassError("counter automaton runs need --bound")
            final = core.ca_validate_run(obj, run, args.bound)
        else:
            final, _ = core.validate_run(obj, run)
    except core.RunValidationError as exc:
        sys.stderr.write(f"invalid: {exc}\n")
        return NO
    if endpoint is not None and final != endpoint:
        sys.stderr.write(f"endpoint mismatch: run ends at {core.format_config(final)}, "
                         f"file says {core.format_config(endpoint)}\n")
        return NO
    sys.stdout.write(f"final={core.format_config(final)}\n")
    return OK


def _cmd_export_dot(args) -> int:
    _write(core.to_dot(core.loads(_read(args.vass))), args.out)
    return OK


def _cmd_verify(args) -> int:
    names = suites.SUITE_ORDER if args.suite == "all" else [args.suite]
    text, ok = suites.run_suites(names, args.jobs)
    sys.stdout.write(text)
    return OK if ok else NO


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vasskit")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("compile", help="compile a counter program to a VASS")
    p.add_argument("program")
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--out")
    p.add_argument("--format", choices=["text", "dot"], default="text")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("reduce", help="generate a hardness construction")
    rsub = p.add_subparsers(dest="construction", required=True)
    q = rsub.add_parser("subset-sum")
    q.add_argument("--s0", type=int, required=True)
    q.add_argument("--set", type=int, nargs="+")
    for name in ("pspace", "expspace"):
        q = rsub.add_parser(name)
        q.add_argument("--s", type=int, default=1)
        q.add_argument("--n", type=int, default=1)
    q = rsub.add_parser("tower")
    q.add_argument("--n", type=int, default=1)
    q.add_argument("--seed", type=int, default=8)
    for name in ("ca-triple", "ca-pair"):
        q = rsub.add_parser(name)
        q.add_argument("automaton")
        q.add_argument("--bound", type=int, required=True)
        if name == "ca-triple":
            q.add_argument("--tests", type=int, required=True)
    for q in rsub.choices.values():
        q.add_argument("--out")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("explore", help="capped breadth-first exploration")
    p.add_argument("vass")
    p.add_argument("--from", required=True, metavar="CONFIG")
    p.add_argument("--target", metavar="CONFIG")
    p.add_argument("--caps", metavar="C1,...,CD")
    p.add_argument("--total", type=int)
    p.add_argument("--budget", type=int, default=10_000_000)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_explore)

    p = sub.add_parser("witness", help="build and write a canonical witness run")
    wsub = p.add_subparsers(dest="construction", required=True)
    q = wsub.add_parser("subset-sum")
    q.add_argument("--s0", type=int, required=True)
    q.add_argument("--set", type=int, nargs="+")
    for name in ("pspace", "expspace"):
        q = wsub.add_parser(name)
        q.add_argument("--s", type=int, default=1)
        q.add_argument("--n", type=int, default=1)
    q = wsub.add_parser("tower")
    q.add_argument("--n", type=int, default=1)
    q.add_argument("--seed", type=int, default=8)
    for q in wsub.choices.values():
        q.add_argument("--out")
    p.set_defaults(func=_cmd_witness)

    p = sub.add_parser("validate", help="replay a run file against a VASS")
    p.add_argument("vass")
    p.add_argument("run")
    p.add_argument("--bound", type=int)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("export-dot", help="DOT rendering of a VASS file")
    p.add_argument("vass")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_export_dot)

    p = sub.add_parser("verify", help="run the acceptance suites")
    p.add_argument("suite", choices=suites.SUITE_ORDER + ["all"])
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_verify)

    return parser


def run_cli(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    try:
        return args.func(args)
    except (VassError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE


def main() -> None:  # console entry point
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
