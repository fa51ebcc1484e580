"""ASP program text: building blocks, composed programs and input facts.

The blocks are the rule sets used by the ASP and ASP(Q) encodings of the
optimal-repair semantics and of the grounded repair.  Nothing is solved
here; ``ExternalSolver`` hands the text to an outside solver process when
one is configured.
"""

from __future__ import annotations

import enum
import importlib.util
import os
import shlex
import shutil
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import InvalidCombination
from .ingest import quote
from .model import AnswerCauses, PrioritizedInstance
from .optimality import RepairKind

ASP_SOLVER_ENV = "PRIOQA_ASP_SOLVER"
ASPQ_SOLVER_ENV = "PRIOQA_ASPQ_SOLVER"
DEFAULT_TIMEOUT = 60.0


class ProgramBlock(enum.Enum):
    REACH_ALL = "ReachAll"
    ATTACK = "Attack"
    REACH_S = "ReachS"
    REACH_W = "ReachW"
    REACH_BIN = "ReachBin"
    SUB_REP = "SubRep"
    REP = "Rep"
    REP_BIN = "RepBin"
    SAT_IF_CAUSE = "SatIfCause"
    SOME_CAUSE = "SomeCause"
    NO_CAUSE = "NoCause"
    GIMP = "GImp"
    PART_GIMP = "PartGImp"
    POPT = "POpt"
    POPT_BIN = "POptBin"
    COMPL = "Compl"
    COPT = "COpt"
    GAMMA_EMPTY = "GammaEmpty"
    GAMMA_INCR = "GammaIncr"


B = ProgramBlock

_INCLUDES: dict[ProgramBlock, tuple[ProgramBlock, ...]] = {
    B.REACH_S: (B.ATTACK,),
    B.REP: (B.SUB_REP,),
    B.REP_BIN: (B.SUB_REP,),
    B.SOME_CAUSE: (B.SAT_IF_CAUSE,),
    B.NO_CAUSE: (B.SAT_IF_CAUSE,),
    B.POPT: (B.ATTACK,),
    B.COPT: (B.COMPL,),
}

_KEEP_OUT = ":- reachable(A), not inRepair(A), not keepOut(A)."

_PART_GIMP = (
    "{global_imp(A)} :- reachable(A).",
    "solved_global(C) :- inConf(C,A), not global_imp(A).",
    ":- conf(C), not solved_global(C).",
    "impMinusRepair(A) :- global_imp(A), not inRepair(A).",
    "repairMinusImp(A) :- inRepair(A), not global_imp(A).",
    "diff :- impMinusRepair(A).",
    "diff :- repairMinusImp(A).",
    "fake_improvement :- not diff.",
    "ok(A) :- repairMinusImp(A),impMinusRepair(B),pref(B,A).",
    "fake_improvement :- repairMinusImp(A), not ok(A).",
    "global_improvement :- not fake_improvement.",
)

# Each block's own rules; included blocks are listed in _INCLUDES.
RULES: dict[ProgramBlock, tuple[str, ...]] = {
    B.REACH_ALL: (
        "reachable(A) :- inCause(C,A).",
        "reachable(A) :- inConf(C,A).",
    ),
    B.ATTACK: (
        "non_attacking(C, A) :- conf(C), inConf(C, A), inConf(C, B), A != B, pref(A, B).",
        "attacks(C, A) :- conf(C), inConf(C, A), not non_attacking(C, A).",
    ),
    B.REACH_S: (
        "reachable(A) :- cause(C), inCause(C,A).",
        "reachable(A) :- conf(C), attacks(C,B), reachable(B), inConf(C,A).",
    ),
    B.REACH_W: (
        "weak_attacks(C, A) :- conf(C), inConf(C, A), inConf(C, B), A != B, not pref(A, B).",
        "reachable(A) :- cause(C), inCause(C,A).",
        "reachable(A) :- conf(C), weak_attacks(C,B), reachable(B), inConf(C,A).",
    ),
    B.REACH_BIN: (
        "reachable(A) :- cause(C), inCause(C,A).",
        "reachable(A) :- conf(C), inConf(C,B), reachable(B), inConf(C,A), not pref(B,A).",
    ),
    B.SUB_REP: (
        "{inRepair(A)} :- reachable(A).",
        "solved(C) :- inConf(C,A), not inRepair(A).",
        ":- conf(C), not solved(C).",
    ),
    B.REP: (
        "safe(C) :- inConf(C, A), inConf(C, B), not A = B, not inRepair(A), not inRepair(B).",
        "keepOut(A) :- inConf(C, A),not inRepair(A), not safe(C).",
        _KEEP_OUT,
    ),
    B.REP_BIN: (
        "dangerous(C) :- conf(C),inConf(C, A), inRepair(A).",
        "keepOut(A) :- dangerous(C),inConf(C, A), not inRepair(A).",
        _KEEP_OUT,
    ),
    B.SAT_IF_CAUSE: (
        "violatedCause(C) :- inCause(C,A), not inRepair(A).",
        "sat :- cause(C), not violatedCause(C).",
    ),
    B.SOME_CAUSE: (":- not sat.",),
    B.NO_CAUSE: (":- sat.",),
    B.GIMP: _PART_GIMP + (":- not global_improvement.",),
    B.PART_GIMP: _PART_GIMP,
    B.POPT: (
        "valid(A) :- reachable(A), inRepair(A).",
        "invalid_att(C, A) :- reachable(A), attacks(C, A), inConf(C, B), not inRepair(B), not A = B.",
        "valid(A) :- reachable(A), conf(C), not inRepair(A), attacks(C, A), not invalid_att(C, A).",
        ":- reachable(A), not valid(A).",
    ),
    B.POPT_BIN: (
        "valid(A) :- reachable(A), inRepair(A).",
        "valid(A) :- reachable(A), conf(C), not inRepair(A), inConf(C, A), not pref(A,B), "
        "inConf(C, B), inRepair(B).",
        ":- reachable(A), not valid(A).",
    ),
    B.COMPL: (
        "pref_comp(A, B) :- reachable(A), reachable(B), pref(A, B).",
        "1{pref_comp(A, B); pref_comp(B, A)}1 :- reachable(A), reachable(B), inConf(C, A), "
        "inConf(C, B), not pref(A, B), not pref(B, A), not A = B.",
        "trans_cl_comp(A, B) :- pref_comp(A, B).",
        "trans_cl_comp(A, B) :- trans_cl_comp(A, Y), pref_comp(Y, B).",
        ":- trans_cl_comp(A, A).",
    ),
    B.COPT: (
        "valid(A) :- reachable(A), inRepair(A).",
        "invalid_att(C, A) :- reachable(A), not inRepair(A), inConf(C, A), not A = B, "
        "inConf(C, B), not inRepair(B).",
        "invalid_att(C, A) :- reachable(A), not inRepair(A), inConf(C, A), inConf(C, B), "
        "not A = B, pref_comp(A, B).",
        "valid(A) :- reachable(A), not inRepair(A), inConf(C, A), not invalid_att(C, A).",
        ":- reachable(A), not valid(A).",
    ),
    B.GAMMA_EMPTY: (
        "unsafe(A, 0) :- attacks(C, A).",
        "safe(A, 0) :- inConf(C, A), not unsafe(A, 0).",
    ),
    B.GAMMA_INCR: (
        "safe(A, t) :- safe(A, t-1).",
        "non_subset(C, A, t) :- conf(C), inConf(C, A), inConf(C, B), A != B, not safe(B, t-1).",
        "subset(C, A, t) :- conf(C), inConf(C, A), not non_subset(C, A, t).",
        "protected(C, A, t) :- attacks(C, A), inConf(C, B), A != B, attacks(C2, B), subset(C2, B, t).",
        "unsafe(A, t) :- attacks(C, A), not protected(C, A, t).",
        "safe(A, t) :- inConf(C, A), not unsafe(A, t).",
        "continue(t) :- safe(A, t), not safe(A,t-1).",
    ),
}


def expand(blocks: Sequence[ProgramBlock], seen: set[ProgramBlock] | None = None) -> list[ProgramBlock]:
    """Blocks with their includes placed first, each block once."""
    seen = set() if seen is None else seen
    out = []
    for b in blocks:
        b = ProgramBlock(b)
        if b in seen:
            continue
        out.extend(expand(_INCLUDES.get(b, ()), seen))
        seen.add(b)
        out.append(b)
    return out


def render_blocks(blocks: Sequence[ProgramBlock], seen: set[ProgramBlock] | None = None) -> str:
    lines = []
    for b in expand(blocks, seen):
        lines.append(f"% {b.value}")
        lines.extend(RULES[b])
    return "".join(line + "\n" for line in lines)


def emit_block(name: ProgramBlock | str) -> str:
    """Text of one block, preceded by the blocks it includes."""
    return render_blocks([ProgramBlock(name)])


# -- composed programs ---------------------------------------------------------

@dataclass(frozen=True)
class HeaderStyle:
    exists: str = "%@exists"
    forall: str = "%@forall"
    constraint: str = "%@constraint"


DEFAULT_STYLE = HeaderStyle()


@dataclass(frozen=True)
class AspqDocument:
    """Quantified program: a sequence of (quantifier, blocks) and a constraint part."""

    levels: tuple[tuple[str, tuple[ProgramBlock, ...]], ...]
    constraint_blocks: tuple[ProgramBlock, ...] = ()
    constraint_rules: tuple[str, ...] = ()

    def render(self, style: HeaderStyle = DEFAULT_STYLE) -> str:
        parts = []
        for quantifier, blocks in self.levels:
            parts.append(getattr(style, quantifier) + "\n")
            parts.append(render_blocks(blocks))
        parts.append(style.constraint + "\n")
        parts.append(render_blocks(self.constraint_blocks))
        parts.extend(rule + "\n" for rule in self.constraint_rules)
        return "".join(parts)

    def __str__(self) -> str:
        return self.render()


EMIT_LOCALIZE = ("off", "strong", "weak", "bin")


def _semantics(sem):
    from .solver import Semantics

    return sem if isinstance(sem, Semantics) else Semantics.parse(str(sem))


def program_blocks(semantics, localize: str = "off", binary_rules: bool = False,
                   gar_variant: int = 1) -> AspqDocument | tuple[ProgramBlock, ...]:
    """Block composition for a semantics: a document for G, a block list otherwise."""
    sem = _semantics(semantics)
    if sem.kind is None:
        raise InvalidCombination(f"{sem.label} has no repair-based encoding; see emit_grounded_program")
    if sem.mode == "iar":
        raise InvalidCombination(f"{sem.label} is decided fact by fact through AR programs")
    if sem.kind is RepairKind.S:
        raise InvalidCombination("no optimal-repair encoding for plain repairs")
    if localize == "auto":
        localize = "weak" if sem.kind is RepairKind.G else "strong"
    if localize not in EMIT_LOCALIZE:
        raise InvalidCombination(f"unknown localization {localize!r}")
    if localize == "strong" and sem.kind is RepairKind.G:
        raise InvalidCombination("strong localization is not known to be sound for G semantics")
    if gar_variant not in (1, 2):
        raise InvalidCombination(f"unknown G-AR variant {gar_variant!r}")
    if gar_variant == 2 and sem.label != "g-ar":
        raise InvalidCombination("the second variant exists for G-AR only")

    if localize == "bin" or (binary_rules and localize != "off"):
        reach = B.REACH_BIN
    else:
        reach = {"off": B.REACH_ALL, "strong": B.REACH_S, "weak": B.REACH_W}[localize]
    cause = B.SOME_CAUSE if sem.mode == "brave" else B.NO_CAUSE

    if sem.kind is RepairKind.G:
        rep = B.REP_BIN if binary_rules else B.REP
        if gar_variant == 2:
            return AspqDocument(
                (("forall", (reach, rep)), ("exists", (B.PART_GIMP,))),
                (B.SAT_IF_CAUSE,),
                (":- not sat, not global_improvement.",),
            )
        return AspqDocument(
            (("exists", (reach, rep, cause)), ("forall", (B.GIMP,))),
            (),
            (":- not fail.",),
        )
    if sem.kind is RepairKind.P:
        opt = B.POPT_BIN if binary_rules else B.POPT
    else:
        opt = B.COPT
    return (reach, B.SUB_REP, opt, cause)


def emit_semantics_program(semantics, localize: str = "off", binary_rules: bool = False,
                           gar_variant: int = 1) -> AspqDocument | str:
    """The program for a semantics: an ASP(Q) document for G, plain text for P and C.

    A plain program is coherent iff some optimal repair contains a cause
    (brave) or some optimal repair contains none (AR, so AR holds iff the
    program is incoherent).
    """
    comp = program_blocks(semantics, localize, binary_rules, gar_variant)
    if isinstance(comp, AspqDocument):
        return comp
    return render_blocks(comp)


def program_text(semantics, localize: str = "off", binary_rules: bool = False,
                 gar_variant: int = 1, style: HeaderStyle = DEFAULT_STYLE) -> str:
    prog = emit_semantics_program(semantics, localize, binary_rules, gar_variant)
    return prog.render(style) if isinstance(prog, AspqDocument) else prog


def program_filename(semantics, localize: str = "off", binary_rules: bool = False,
                     gar_variant: int = 1) -> str:
    sem = _semantics(semantics)
    parts = [sem.label + ("-2" if gar_variant == 2 else "")]
    if localize != "off":
        parts.append(localize)
    if binary_rules and localize != "bin":
        parts.append("bin")
    return ".".join(parts) + ".aspq.lp"


def emit_grounded_program() -> str:
    """Incremental program for the grounded repair: ``safe(A,t)`` holds for
    the facts of the ``t``-th iterate; stop at the first ``t`` without
    ``continue(t)``."""
    return ("#program base.\n" + render_blocks([B.ATTACK, B.GAMMA_EMPTY])
            + "#program step(t).\n" + render_blocks([B.GAMMA_INCR]))


# -- input facts ---------------------------------------------------------------

def emit_instance_facts(instance: PrioritizedInstance, answer: AnswerCauses | None = None) -> str:
    """``conf``/``inConf``/``pref`` facts, then ``cause``/``inCause`` for ``answer``.

    Facts outside every conflict only appear through causes, so an
    instance reparses to itself when each of its facts is conflicting or
    belongs to a cause of ``answer``.
    """
    q = lambda i: quote(instance.name(i))  # noqa: E731
    lines = []
    for c in instance.conflicts:
        label = quote(c.label)
        lines.append(" ".join([f"conf({label})."] + [f"inConf({label},{q(a)})." for a in c.members]))
    for a, b in sorted(instance.priority):
        lines.append(f"pref({q(a)},{q(b)}).")
    if answer is not None:
        for kid, cause in zip(answer.cause_ids, answer.causes):
            k = quote(kid)
            lines.append(" ".join([f"cause({k})."] + [f"inCause({k},{q(a)})." for a in cause]))
    return "".join(line + "\n" for line in lines)


def emit_answer_facts(instance: PrioritizedInstance, answers: Sequence[AnswerCauses]) -> str:
    """Several answers in one file: causes are renamed ``<answer>_<cause>``
    and grouped with ``answer/2`` facts."""
    lines = []
    for ans in answers:
        q = quote(ans.answer_id)
        for kid, cause in zip(ans.cause_ids, ans.causes):
            k = quote(f"{ans.answer_id}_{kid}")
            lines.append(" ".join([f"answer({q},{k}).", f"cause({k})."]
                                  + [f"inCause({k},{quote(instance.name(a))})." for a in cause]))
    return "".join(line + "\n" for line in lines)


# -- external solvers ----------------------------------------------------------

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


@dataclass
class ExternalResult:
    status: str
    returncode: int | None
    elapsed_s: float
    output: str = field(default="", repr=False)


class ExternalSolver:
    """Runs ``command + [program file, facts file]`` and reads the verdict.

    The output is searched for ``UNSATISFIABLE``/``SATISFIABLE`` (also
    ``INCOHERENT``/``COHERENT``); failing that, exit codes 20 and 10 mean
    unsatisfiable and satisfiable as in clingo.
    """

    def __init__(self, command: Sequence[str], timeout: float = DEFAULT_TIMEOUT):
        self.command = list(command)
        self.timeout = timeout

    @classmethod
    def from_env(cls, var: str = ASP_SOLVER_ENV, autodetect: bool = True,
                 timeout: float = DEFAULT_TIMEOUT) -> ExternalSolver | None:
        """Solver named by ``var``; else clingo on PATH or as a module."""
        cmd = os.environ.get(var)
        if cmd:
            return cls(shlex.split(cmd), timeout)
        if not autodetect:
            return None
        exe = shutil.which("clingo")
        if exe:
            return cls([exe], timeout)
        if importlib.util.find_spec("clingo") is not None:
            return cls([sys.executable, "-m", "clingo"], timeout)
        return None

    def run(self, program: str, facts: str) -> ExternalResult:
        with tempfile.TemporaryDirectory(prefix="prioqa-") as tmp:
            prog = Path(tmp, "program.lp")
            data = Path(tmp, "facts.lp")
            prog.write_text(program, encoding="utf-8")
            data.write_text(facts, encoding="utf-8")
            start = time.perf_counter()
            try:
                proc = subprocess.run(self.command + [str(prog), str(data)], capture_output=True,
                                      text=True, timeout=self.timeout)
            except subprocess.TimeoutExpired:
                return ExternalResult(UNKNOWN, None, time.perf_counter() - start)
            elapsed = time.perf_counter() - start
        out = proc.stdout
        words = set(out.split())
        if "UNSATISFIABLE" in words or "INCOHERENT" in words:
            status = UNSAT
        elif "SATISFIABLE" in words or "COHERENT" in words:
            status = SAT
        elif proc.returncode == 20:
            status = UNSAT
        elif proc.returncode in (10, 30):
            status = SAT
        else:
            status = UNKNOWN
        return ExternalResult(status, proc.returncode, elapsed, out + proc.stderr)


def external_verdict(solver: ExternalSolver, instance: PrioritizedInstance, answer: AnswerCauses,
                     semantics, localize: str = "off", binary_rules: bool = False,
                     gar_variant: int = 1, style: HeaderStyle = DEFAULT_STYLE) -> str:
    """yes/no/unknown from an outside solver run on the emitted program."""
    from .solver import NO, UNKNOWN as U, YES

    sem = _semantics(semantics)
    text = program_text(sem, localize, binary_rules, gar_variant, style)
    res = solver.run(text, emit_instance_facts(instance, answer))
    if res.status == UNKNOWN:
        return U
    coherent = res.status == SAT
    # brave and the second G-AR form hold iff coherent; the other AR forms iff incoherent
    holds = coherent if (sem.mode == "brave" or gar_variant == 2) else not coherent
    return YES if holds else NO
