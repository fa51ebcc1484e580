"""Command-line interface.

Exit status: 0 on success, 1 on bad input or options, 2 on internal
errors, 3 when ``--strict-verdicts`` is set and some verdict is unknown.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import bench, emit
from .attacks import grounded_repair
from .errors import (
    InputError,
    InternalInconsistency,
    InvalidCombination,
    ModeMismatch,
    OracleTooLarge,
    SearchBudgetExceeded,
)
from .ingest import load_answers, load_instance, parse_facts
from .model import LENIENT, STRICT, AnswerCauses, PrioritizedInstance, validate
from .optimality import RepairKind, enumerate_repairs, is_optimal
from .sat import DEFAULT_BUDGET, Budget
from .solver import DEFAULT_GRID, LOCALIZE_CHOICES, UNKNOWN, Decision, Semantics, Solver, decisions_to_csv

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL, EXIT_UNKNOWN = 0, 1, 2, 3
HELP_WIDTH = 100
PARALLEL_MIN_TASKS = 64


class _Formatter(argparse.ArgumentDefaultsHelpFormatter):
    def __init__(self, prog: str):
        super().__init__(prog, width=HELP_WIDTH, max_help_position=32)


# -- input helpers -------------------------------------------------------------

def _read(path: str) -> str:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    parse_facts(text, source=path)  # syntax errors carry the file name
    return text


def _load(args) -> tuple[PrioritizedInstance, list[AnswerCauses]]:
    mode = LENIENT if args.lenient else STRICT
    inst = load_instance(_read(args.conflicts), _read(args.pref) if args.pref else "", mode)
    answers: list[AnswerCauses] = []
    if getattr(args, "answers", None):
        inst, answers = load_answers(_read(args.answers), inst, mode)
    return inst, answers


def _semantics_list(text: str | None) -> list[Semantics]:
    if not text:
        return list(DEFAULT_GRID)
    try:
        return [Semantics.parse(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _jobs(n: int) -> int:
    return n if n > 0 else (os.cpu_count() or 1)


def _decide_chunk(job) -> list[Decision]:
    instance, answers, sems, localize, binary, budget, tiered = job
    solver = Solver(instance, localize=localize, binary=binary, budget=budget)
    return solver.decide_all(answers, sems, tiered)


def _decide(inst, answers, sems, args) -> list[Decision]:
    binary = args.binary and inst.binary
    tiered = not args.direct
    jobs = _jobs(args.jobs)
    if jobs == 1 or len(answers) < 2 or len(answers) * len(sems) < PARALLEL_MIN_TASKS:
        return _decide_chunk((inst, answers, sems, args.localize, binary, args.budget, tiered))
    chunks = [answers[k::jobs] for k in range(jobs) if answers[k::jobs]]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(_decide_chunk, [(inst, c, sems, args.localize, binary, args.budget, tiered)
                                              for c in chunks]))
    # restore input order: answer-major, then semantics
    by_key = {(d.answer_id, d.semantics): d for part in parts for d in part}
    return [by_key[(a.answer_id, s.label)] for a in answers for s in sems]


def _print_decisions(decisions: list[Decision], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps([d.to_dict() for d in decisions], indent=2))
    elif fmt == "csv":
        sys.stdout.write(decisions_to_csv(decisions))
    else:
        for d in decisions:
            extra = f"  ({d.reason})" if d.reason else ""
            print(f"{d.answer_id}\t{d.semantics}\t{d.verdict}\t{d.tier}{extra}")


def _verdict_status(decisions: list[Decision], args) -> int:
    if args.strict_verdicts and any(d.verdict == UNKNOWN for d in decisions):
        return EXIT_UNKNOWN
    return EXIT_OK


# -- subcommands ---------------------------------------------------------------

def cmd_validate(args) -> int:
    mode = LENIENT if args.lenient else STRICT
    ctext = _read(args.conflicts)
    ptext = _read(args.pref) if args.pref else ""
    inst = load_instance(ctext, ptext, mode)
    answers: list[AnswerCauses] = []
    if args.answers:
        inst, answers = load_answers(_read(args.answers), inst, mode)
    report = validate(inst, answers, mode)
    info = {"facts": len(inst.universe), "conflicting": len(inst.conflicting),
            "conflicts": len(inst.conflicts), "priority_pairs": len(inst.priority),
            "binary": inst.binary, "answers": len(answers)}
    if args.format == "json":
        print(json.dumps({"ok": True, **info, "notes": report.lines()}, indent=2))
    else:
        print("ok: " + ", ".join(f"{k}={v}" for k, v in info.items()))
        for line in report.lines():
            print("  " + line)
    return EXIT_OK


def cmd_grounded(args) -> int:
    inst, answers = _load(args)
    res = grounded_repair(inst)
    steps = [inst.names_of(s) for s in res.steps]
    if args.format == "json":
        out = {"grounded_size": len(res.grounded), "steps": [len(s) for s in steps],
               "unconflicted": len(res.unconflicted)}
        if args.list:
            out["grounded"] = sorted(inst.names_of(res.grounded))
            out["step_facts"] = steps
        print(json.dumps(out, indent=2))
        return EXIT_OK
    if args.steps:
        for k, names in enumerate(steps, start=1):
            tail = "  " + " ".join(names) if args.list else ""
            print(f"step {k}: +{len(names)}{tail}")
    print(f"grounded: {len(res.grounded)} facts ({len(res.unconflicted)} unconflicted) "
          f"in {len(steps)} steps")
    if args.list:
        print(" ".join(sorted(inst.names_of(res.grounded))))
    return EXIT_OK


def cmd_decide(args) -> int:
    inst, answers = _load(args)
    if not answers:
        raise InputError("decide needs --answers with at least one cause")
    decisions = _decide(inst, answers, _semantics_list(args.semantics), args)
    _print_decisions(decisions, args.format)
    return _verdict_status(decisions, args)


def cmd_iar(args) -> int:
    inst, answers = _load(args)
    kind = RepairKind(args.kind)
    if answers:
        decisions = _decide(inst, answers, [Semantics("iar", kind)], args)
        _print_decisions(decisions, args.format)
        return _verdict_status(decisions, args)
    # no answers: list the facts lying in every optimal repair
    solver = Solver(inst, localize=args.localize, binary=args.binary and inst.binary, budget=args.budget)
    inside, unknown = [], []
    for a in inst.universe:
        try:
            if solver.fact_in_all(a, kind, Budget(args.budget)):
                inside.append(inst.name(a))
        except SearchBudgetExceeded:
            unknown.append(inst.name(a))
    if args.format == "json":
        print(json.dumps({"kind": kind.value, "facts": inside, "unknown": unknown}, indent=2))
    else:
        print(f"{kind.value}-IAR facts ({len(inside)}): " + " ".join(inside))
        if unknown:
            print(f"unknown ({len(unknown)}): " + " ".join(unknown))
    return EXIT_UNKNOWN if args.strict_verdicts and unknown else EXIT_OK


def cmd_enumerate(args) -> int:
    inst, _ = _load(args)
    kind = RepairKind(args.kind)
    budget = Budget(args.budget)
    found = []
    for r in enumerate_repairs(inst, budget):
        if kind is RepairKind.S or is_optimal(inst, r, kind, budget):
            found.append(sorted(inst.names_of(r)))
            if args.limit and len(found) >= args.limit:
                break
    found.sort()
    if args.format == "json":
        print(json.dumps({"kind": kind.value, "repairs": found}, indent=2))
    else:
        for names in found:
            print("{" + ", ".join(names) + "}")
        print(f"{len(found)} {kind.value}-repairs")
    return EXIT_OK


def cmd_emit(args) -> int:
    style = emit.HeaderStyle(args.header_exists, args.header_forall, args.header_constraint)
    if args.block:
        text = emit.emit_block(args.block)
    elif args.grounded:
        text = emit.emit_grounded_program()
    elif args.facts:
        inst, answers = _load(args)
        text = emit.emit_instance_facts(inst, answers[0] if len(answers) == 1 else None)
        if len(answers) > 1:
            text += emit.emit_answer_facts(inst, answers)
    else:
        if not args.semantics or "," in args.semantics:
            raise InputError("emit needs exactly one --semantics, --block, --grounded or --facts")
        text = emit.program_text(args.semantics, args.localize, args.binary, args.gar_variant, style)
        if args.check:
            return _emit_check(args, style)
    if args.out:
        out = Path(args.out)
        if out.is_dir():
            name = emit.program_filename(args.semantics, args.localize, args.binary, args.gar_variant) \
                if args.semantics else (f"{args.block}.lp" if args.block else "facts.lp")
            out = out / name
        out.write_text(text, encoding="utf-8")
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _emit_check(args, style) -> int:
    """Compare an outside solver's verdicts on the emitted program with the native ones."""
    sem = Semantics.parse(args.semantics)
    aspq = sem.kind is RepairKind.G
    env = emit.ASPQ_SOLVER_ENV if aspq else emit.ASP_SOLVER_ENV
    ext = emit.ExternalSolver.from_env(env, autodetect=not aspq, timeout=args.timeout)
    if ext is None:
        raise InputError(f"no external solver configured; set {env}")
    if not args.conflicts or not args.answers:
        raise InputError("emit --check needs --conflicts and --answers")
    inst, answers = _load(args)
    solver = Solver(inst, localize="off", budget=args.budget)
    disagreements = 0
    for a in answers:
        native = solver.decide(a, sem).verdict
        other = emit.external_verdict(ext, inst, a, sem, args.localize, args.binary, args.gar_variant, style)
        status = "agree" if other == native or UNKNOWN in (other, native) else "DISAGREE"
        disagreements += status == "DISAGREE"
        print(f"{a.answer_id}\t{sem.label}\tnative={native}\texternal={other}\t{status}")
    if disagreements:
        raise InternalInconsistency(f"{disagreements} verdict(s) differ from the external solver")
    return EXIT_OK


def _gen_params(args, seed: int) -> bench.GenParams:
    p = bench.GenParams(
        n_facts=args.facts, conflict_ratio=args.ratio, binary=args.nonbinary_count == 0,
        nonbinary_count=args.nonbinary_count, nonbinary_size=args.nonbinary_size,
        avg_degree=args.degree, prio_mode=args.prio_mode, levels=args.levels,
        orient_prob=args.orient_prob, n_answers=args.n_answers, seed=seed)
    p.check()
    return p


def cmd_gen(args) -> int:
    inst, answers = bench.gen_instance(_gen_params(args, args.seed))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    facts = emit.emit_instance_facts(inst)
    conf_lines = [ln for ln in facts.splitlines(keepends=True) if not ln.startswith("pref(")]
    pref_lines = [ln for ln in facts.splitlines(keepends=True) if ln.startswith("pref(")]
    paths = {"conflicts": out / f"{args.prefix}.conflicts.lp", "pref": out / f"{args.prefix}.pref.lp",
             "answers": out / f"{args.prefix}.answers.lp", "params": out / f"{args.prefix}.params.json"}
    paths["conflicts"].write_text("".join(conf_lines), encoding="utf-8")
    paths["pref"].write_text("".join(pref_lines), encoding="utf-8")
    paths["answers"].write_text(emit.emit_answer_facts(inst, answers), encoding="utf-8")
    paths["params"].write_text(json.dumps(bench.params_dict(_gen_params(args, args.seed)), indent=2) + "\n",
                               encoding="utf-8")
    for p in paths.values():
        print(f"wrote {p}")
    return EXIT_OK


def _instances(args) -> list[tuple[str, PrioritizedInstance, list[AnswerCauses]]]:
    if args.conflicts:
        inst, answers = _load(args)
        return [(Path(args.conflicts).stem, inst, answers)]
    out = []
    for k in range(args.instances):
        seed = args.seed + k
        inst, answers = bench.gen_instance(_gen_params(args, seed))
        out.append((f"gen{seed}", inst, answers))
    return out


def cmd_bench(args) -> int:
    instances = _instances(args)
    records, summary = bench.run_suite(instances, _semantics_list(args.semantics), args.budget,
                                       _jobs(args.jobs), args.localize, args.binary, not args.direct)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        writers = {"records.csv": (bench.write_records_csv, records),
                   "cactus.csv": (bench.write_cactus_csv, records),
                   "summary.csv": (bench.write_summary_csv, summary)}
        for name, (fn, data) in writers.items():
            with open(out / name, "w", encoding="utf-8", newline="") as fh:
                fn(data, fh)
            print(f"wrote {out / name}")
    if args.format == "json":
        print(json.dumps({"total": summary.total, "unknown": summary.unknown,
                          "tiers": summary.table(), "grounded_steps": summary.grounded_steps}, indent=2))
    elif args.format == "csv":
        bench.write_summary_csv(summary, sys.stdout)
    else:
        cols = ("Trivial", "Grounded", "ParetoBound", "Direct", "yes", "no", "unknown")
        print("semantics\t" + "\t".join(cols))
        for row in summary.table():
            print(row["semantics"] + "\t" + "\t".join(str(row[c]) for c in cols))
        print(f"{summary.total} decisions, {summary.unknown} unknown")
    if args.strict_verdicts and summary.unknown:
        return EXIT_UNKNOWN
    return EXIT_OK


def cmd_stats(args) -> int:
    rows = [bench.instance_stats(inst, oracle=args.oracle, label=label) for label, inst, _ in _instances(args)]
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    elif args.format == "csv":
        bench.write_stats_csv(rows, sys.stdout)
    else:
        for row in rows:
            print("  ".join(f"{k}={v}" for k, v in row.items()))
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _add_input(p, answers: bool = True, required: bool = True) -> None:
    p.add_argument("--conflicts", required=required, metavar="PATH", help="conf/inConf facts")
    p.add_argument("--pref", metavar="PATH", help="pref facts")
    if answers:
        p.add_argument("--answers", metavar="PATH", help="cause/inCause (and answer) facts")
    p.add_argument("--lenient", action="store_true",
                   help="repair fixable input problems instead of rejecting them")


def _add_engine(p, semantics: bool = True) -> None:
    if semantics:
        p.add_argument("--semantics", metavar="LIST",
                       help="comma-separated semantics, e.g. g-ar,p-brave,grounded "
                            "(default grid: grounded plus p/g/c x brave/ar)")
    p.add_argument("--localize", choices=LOCALIZE_CHOICES, default="auto",
                   help="restrict searches to reachable facts; auto is weak for G, strong otherwise")
    p.add_argument("--binary", action="store_true", help="use binary-conflict procedures when all conflicts are binary")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search nodes per decision")
    p.add_argument("--jobs", type=int, default=0, help="worker processes; 0 means all cores")
    p.add_argument("--direct", action="store_true", help="skip the cheap tiers and always search")
    p.add_argument("--strict-verdicts", action="store_true", help="exit with status 3 if any verdict is unknown")


def _add_format(p, choices=("text", "json", "csv")) -> None:
    p.add_argument("--format", choices=choices, default="text", help="output format")


def _add_gen(p) -> None:
    g = p.add_argument_group("generation")
    g.add_argument("--facts", type=int, default=1000, help="number of facts")
    g.add_argument("--ratio", type=float, default=0.2, help="fraction of facts in some conflict")
    g.add_argument("--degree", type=float, default=1.5, help="average number of binary conflicts per conflicting fact")
    g.add_argument("--nonbinary-count", type=int, default=0, help="number of larger conflicts")
    g.add_argument("--nonbinary-size", type=int, default=3, help="size of the larger conflicts")
    g.add_argument("--prio-mode", choices=bench.PRIO_MODES, default="nonscore", help="priority construction")
    g.add_argument("--levels", type=int, default=5, help="levels for score priorities")
    g.add_argument("--orient-prob", type=float, default=0.8, help="orientation probability for nonscore")
    g.add_argument("--n-answers", type=int, default=20, help="candidate answers to sample")
    g.add_argument("--seed", type=int, default=0, help="random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prioqa", formatter_class=_Formatter,
        description="Query answering over inconsistent fact bases with a priority relation.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, formatter_class=_Formatter)
        p.set_defaults(func=fn)
        return p

    p = cmd("validate", cmd_validate, "check input files and report problems")
    _add_input(p)
    _add_format(p, ("text", "json"))

    p = cmd("grounded", cmd_grounded, "compute the grounded repair")
    _add_input(p, answers=False)
    p.add_argument("--steps", action="store_true", help="print the facts added at each step")
    p.add_argument("--list", action="store_true", help="print the fact names")
    _add_format(p, ("text", "json"))

    p = cmd("decide", cmd_decide, "decide candidate answers under the chosen semantics")
    _add_input(p)
    _add_engine(p)
    _add_format(p)

    p = cmd("iar", cmd_iar, "facts in every optimal repair, or IAR verdicts for --answers")
    _add_input(p)
    p.add_argument("--kind", choices=[k.value for k in RepairKind], default="P", help="repair kind")
    _add_engine(p, semantics=False)
    _add_format(p)

    p = cmd("enumerate", cmd_enumerate, "list the optimal repairs of a small instance")
    _add_input(p, answers=False)
    p.add_argument("--kind", choices=[k.value for k in RepairKind], default="S", help="repair kind")
    p.add_argument("--limit", type=int, default=0, help="stop after this many repairs; 0 for all")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search nodes")
    _add_format(p, ("text", "json"))

    p = cmd("emit", cmd_emit, "write ASP or ASP(Q) program text")
    what = p.add_mutually_exclusive_group()
    what.add_argument("--semantics", metavar="SEM", help="program for one semantics, e.g. p-brave")
    what.add_argument("--block", choices=[b.value for b in emit.ProgramBlock], help="a single building block")
    what.add_argument("--grounded", action="store_true", help="the incremental grounded-repair program")
    what.add_argument("--facts", action="store_true", help="the input facts of --conflicts/--pref/--answers")
    p.add_argument("--localize", choices=emit.EMIT_LOCALIZE + ("auto",), default="off",
                   help="reachability block to use")
    p.add_argument("--binary", action="store_true", help="use the binary-conflict rules")
    p.add_argument("--gar-variant", type=int, choices=(1, 2), default=1, help="G-AR encoding variant")
    p.add_argument("--header-exists", default=emit.DEFAULT_STYLE.exists, help="existential block header")
    p.add_argument("--header-forall", default=emit.DEFAULT_STYLE.forall, help="universal block header")
    p.add_argument("--header-constraint", default=emit.DEFAULT_STYLE.constraint, help="constraint block header")
    p.add_argument("--out", metavar="PATH", help="output file or directory; standard output when absent")
    p.add_argument("--check", action="store_true",
                   help=f"run an external solver ({emit.ASP_SOLVER_ENV}, or {emit.ASPQ_SOLVER_ENV} "
                        "for G) on --answers and compare verdicts")
    p.add_argument("--timeout", type=float, default=emit.DEFAULT_TIMEOUT, help="external solver timeout in seconds")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search nodes for native verdicts")
    _add_input(p, required=False)

    p = cmd("gen", cmd_gen, "generate a synthetic instance with candidate answers")
    _add_gen(p)
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--prefix", default="instance", help="file name prefix")

    p = cmd("bench", cmd_bench, "run a batch of decisions and write CSV reports")
    _add_input(p, required=False)
    _add_engine(p)
    _add_gen(p)
    p.add_argument("--instances", type=int, default=5, help="generated instances when no input is given")
    p.add_argument("--out-dir", help="directory for records.csv, cactus.csv and summary.csv")
    _add_format(p)

    p = cmd("stats", cmd_stats, "instance statistics")
    _add_input(p, answers=False, required=False)
    _add_gen(p)
    p.add_argument("--instances", type=int, default=1, help="generated instances when no input is given")
    p.add_argument("--oracle", action="store_true", help="add brute-force columns (small instances only)")
    _add_format(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 is kept for internal errors here
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, InvalidCombination, ModeMismatch, OracleTooLarge) as exc:
        print(f"prioqa: error: {exc}", file=sys.stderr)
        report = getattr(exc, "report", None)
        if report is not None:
            for line in report.lines():
                print(f"  {line}", file=sys.stderr)
        return EXIT_INPUT
    except InternalInconsistency as exc:
        print(f"prioqa: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - report anything unexpected as internal
        print(f"prioqa: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
