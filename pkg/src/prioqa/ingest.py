"""Reader for ground-fact input files.

Accepted predicates::

    conf(C).  inConf(C,A).  pref(A,B).  cause(K).  inCause(K,A).  answer(Q,K).

``answer/2`` groups causes into answers so one file can carry many
candidate answers; a file without it describes a single answer.  Arguments
are bare identifiers or double-quoted strings such as ``"A(a)"``.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field

from . import errors
from .factset import FactSet
from .model import (
    LENIENT,
    STRICT,
    AnswerCauses,
    PrioritizedInstance,
    preprocess,
    restrict,
    validate,
)

ARITY = {"conf": 1, "inConf": 2, "pref": 2, "cause": 1, "inCause": 2, "answer": 2}

_TOKEN = re.compile(
    r'(?P<ws>\s+)|(?P<comment>%[^\n]*)|(?P<ident>[A-Za-z0-9_]+)|(?P<string>"(?:[^"\\\n]|\\.)*")'
    r"|(?P<punct>[(),.])"
)


@dataclass(frozen=True)
class RawFact:
    pred: str
    args: tuple[str, ...]
    line: int
    col: int


@dataclass
class RawFactBag:
    facts: list[RawFact] = field(default_factory=list)

    def of(self, pred: str) -> list[RawFact]:
        return [f for f in self.facts if f.pred == pred]

    def __len__(self) -> int:
        return len(self.facts)


def quote(name: str) -> str:
    """Render ``name`` as an argument: bare if it is a lowercase constant."""
    if re.fullmatch(r"[a-z][A-Za-z0-9_]*|[0-9]+", name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def unquote(token: str) -> str:
    """Inverse of ``quote``: bare tokens come back unchanged."""
    if not (len(token) >= 2 and token[0] == token[-1] == '"'):
        return token
    return re.sub(r"\\(.)", r"\1", token[1:-1])


def parse_facts(text: str, source: str | None = None) -> RawFactBag:
    """Tokenize and parse ``pred(arg, ...).`` facts; errors carry line/column."""
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def where(pos: int) -> tuple[int, int]:
        ln = bisect.bisect_right(line_starts, pos)
        return ln, pos - line_starts[ln - 1] + 1

    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise errors.FactSyntaxError(f"unexpected character {text[pos]!r}", *where(pos), source)
        kind = m.lastgroup
        if kind in ("ident", "punct"):
            tokens.append((kind, m.group(), pos))
        elif kind == "string":
            tokens.append(("ident", unquote(m.group()), pos))
        pos = m.end()

    bag = RawFactBag()
    i = 0
    n = len(tokens)

    def expect(value: str | None, what: str) -> tuple[str, str, int]:
        nonlocal i
        if i >= n:
            raise errors.FactSyntaxError(f"unexpected end of input, expected {what}",
                                         *where(len(text)), source)
        tok = tokens[i]
        if (value is None and tok[0] != "ident") or (value is not None and tok[1] != value):
            raise errors.FactSyntaxError(f"expected {what}, found {tok[1]!r}", *where(tok[2]), source)
        i += 1
        return tok

    while i < n:
        _, pred, start = expect(None, "predicate name")
        expect("(", "'('")
        args = [expect(None, "argument")[1]]
        while i < n and tokens[i][1] == ",":
            i += 1
            args.append(expect(None, "argument")[1])
        expect(")", "')'")
        expect(".", "'.'")
        line, col = where(start)
        if pred not in ARITY:
            raise errors.UnknownPredicate(f"unknown predicate {pred}/{len(args)}", line, col, source)
        if ARITY[pred] != len(args):
            raise errors.ArityError(
                f"{pred} takes {ARITY[pred]} argument(s), got {len(args)}", line, col, source)
        bag.facts.append(RawFact(pred, tuple(args), line, col))
    return bag


def _group(bag: RawFactBag, decl: str, member: str, mode: str, kind: type) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    for f in bag.of(decl):
        groups.setdefault(f.args[0], [])
    for f in bag.of(member):
        key, fact = f.args
        if key not in groups:
            if mode == STRICT:
                raise kind(f"line {f.line}: {member}({key},{fact}) refers to undeclared {decl} {key}",
                           (key,))
            groups[key] = []
        if fact not in groups[key]:
            groups[key].append(fact)
    return groups


def load_instance(conflict_text: str, pref_text: str = "", mode: str = STRICT) -> PrioritizedInstance:
    """Parse, validate and preprocess an instance given as conflict and priority facts."""
    bag = parse_facts(conflict_text)
    bag.facts.extend(parse_facts(pref_text).facts)
    groups = _group(bag, "conf", "inConf", mode, errors.ValidationError)
    for label, members in groups.items():
        if not members:
            raise errors.ValidationError(f"conflict {label} has no members", (label,))
    pref = [f.args for f in bag.of("pref")]
    inst = PrioritizedInstance.build(list(groups.items()), pref)
    report = validate(inst, (), mode)
    inst = report.instance
    # pref-only facts are not part of the data
    if inst.conflicting != inst.universe:
        inst = restrict(inst, inst.conflicting)
    return preprocess(inst)


def load_answers(
    answer_text: str,
    instance: PrioritizedInstance,
    mode: str = STRICT,
    default_id: str = "q",
) -> tuple[PrioritizedInstance, list[AnswerCauses]]:
    """Parse candidate answers against ``instance``.

    Cause facts unknown to the instance are added to its universe as
    conflict-free facts, so the returned instance may differ from the input.
    """
    bag = parse_facts(answer_text)
    causes = _group(bag, "cause", "inCause", mode, errors.DanglingCauseFact)

    interner = instance.interner
    new_names = [a for fs in causes.values() for a in fs if a not in interner.index]
    if new_names:
        interner = interner.copy()
        extra = FactSet(interner.intern(a) for a in new_names)
        instance = PrioritizedInstance(interner, instance.universe | extra,
                                       instance.conflicts, instance.priority)

    grouping: dict[str, list[str]] = {}
    for f in bag.of("answer"):
        q, k = f.args
        if k not in causes:
            if mode == STRICT:
                raise errors.DanglingCauseFact(
                    f"line {f.line}: answer({q},{k}) refers to undeclared cause {k}", (q, k))
            continue
        grouping.setdefault(q, [])
        if k not in grouping[q]:
            grouping[q].append(k)
    if not grouping:
        grouping = {default_id: list(causes)} if causes else {}
    else:
        used = {k for ks in grouping.values() for k in ks}
        loose = [k for k in causes if k not in used]
        if loose and mode == STRICT:
            raise errors.DanglingCauseFact(f"causes {loose} belong to no answer", tuple(loose))

    answers = [
        AnswerCauses(q, tuple(instance.facts(causes[k]) for k in ks), tuple(ks))
        for q, ks in grouping.items()
    ]
    report = validate(instance, answers, mode if mode == LENIENT else STRICT)
    return report.instance, report.answers


def load_instance_files(conflict_path, pref_path=None, mode: str = STRICT) -> PrioritizedInstance:
    from pathlib import Path

    ctext = Path(conflict_path).read_text(encoding="utf-8")
    ptext = Path(pref_path).read_text(encoding="utf-8") if pref_path else ""
    return load_instance(ctext, ptext, mode)
