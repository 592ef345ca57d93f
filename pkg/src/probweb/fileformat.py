"""Reader and writer for ``.pks`` system files and joint-distribution files.

System file, one statement per line, ``#`` starts a comment::

    descriptor X1 2
    descriptor X2 2
    absolute X1 : 0.5 0.5
    conditional X2 given X1 : 0.9 0.1 0.2 0.8

Table entries run in lexicographic order with the first listed descriptor
most significant.  Conditional rows are concatenated given-state-major.

Joint file::

    joint
    descriptor X1 2
    values : 0.25 0.25 0.25 0.25
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .event_space import DEFAULT_TOL, EventSpace, JointDistribution
from .exceptions import DomainError, ParseError, ValidationError
from .system import ComponentTable, ProbabilitySystem

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\Z")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*\Z")


@dataclass
class _Token:
    text: str
    line: int
    col: int


def _tokenize(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = [_Token(m.group(), lineno, m.start() + 1) for m in re.finditer(r"\S+", line)]
        if toks:
            yield lineno, toks


def _number(tok: _Token) -> float:
    if not _NUMBER.match(tok.text):
        raise ParseError(f"malformed number {tok.text!r}", tok.line, tok.col)
    return float(tok.text)


def _split_colon(toks, lineno):
    for k, t in enumerate(toks):
        if t.text == ":":
            return toks[:k], toks[k + 1:]
    end = toks[-1]
    raise ParseError("expected ':' before the probabilities", lineno, end.col + len(end.text))


def _declare(toks, lineno, descriptors):
    if len(toks) != 3:
        raise ParseError("expected 'descriptor <name> <arity>'", lineno, toks[0].col)
    name, arity = toks[1], toks[2]
    if not _NAME.match(name.text):
        raise ParseError(f"invalid descriptor name {name.text!r}", name.line, name.col)
    if name.text in dict(descriptors):
        raise ParseError(f"descriptor {name.text} declared twice", name.line, name.col)
    if not re.fullmatch(r"\d+", arity.text):
        raise ParseError(f"arity must be an integer, got {arity.text!r}", arity.line, arity.col)
    if int(arity.text) < 2:
        raise ParseError(f"arity of {name.text} must be at least 2", arity.line, arity.col)
    descriptors.append((name.text, int(arity.text)))


def _names(toks, declared):
    out = []
    for t in toks:
        if t.text not in declared:
            raise ParseError(f"undeclared descriptor {t.text!r}", t.line, t.col)
        if t.text in out:
            raise ParseError(f"descriptor {t.text} repeated", t.line, t.col)
        out.append(t.text)
    return out


@dataclass
class SystemFile:
    """A parsed system file and the line each component came from."""

    path: Path | None
    system: ProbabilitySystem
    lines: dict = field(default_factory=dict)


def parse_system_file(text: str, path=None, table_tol: float = DEFAULT_TOL,
                      max_states: int | None = None) -> SystemFile:
    """Parse and validate a system file.

    Raises
    ------
    ParseError
        With line and column, for syntax errors, undeclared descriptors and
        wrong table sizes.
    ValidationError
        If a table row is negative or does not sum to 1 within ``table_tol``.
    """
    descriptors = []
    statements = []
    for lineno, toks in _tokenize(text):
        kw = toks[0].text
        if kw == "descriptor":
            if statements:
                raise ParseError("descriptors must be declared before components", lineno, toks[0].col)
            _declare(toks, lineno, descriptors)
        elif kw in ("absolute", "conditional"):
            statements.append((kw, lineno, toks))
        else:
            raise ParseError(f"unknown statement {kw!r}", lineno, toks[0].col)
    if not descriptors:
        raise ParseError("no descriptors declared", 1, 1)
    kwargs = {} if max_states is None else {"max_states": max_states}
    space = EventSpace(descriptors, **kwargs)
    declared = dict(descriptors)

    entries, lines = [], {}
    for kw, lineno, toks in statements:
        head, nums = _split_colon(toks, lineno)
        if kw == "absolute":
            if len(head) < 2:
                raise ParseError("absolute component needs at least one descriptor", lineno, toks[0].col)
            names = _names(head[1:], declared)
            expect = math.prod(declared[n] for n in names)
            values = [_number(t) for t in nums]
            if len(values) != expect:
                raise ParseError(f"expected {expect} probabilities, got {len(values)}",
                                 lineno, (nums[0] if nums else head[-1]).col)
            entry = ComponentTable.absolute(space, names, values)
        else:
            split = [k for k, t in enumerate(head) if t.text == "given"]
            if not split:
                raise ParseError("conditional component needs 'given'", lineno, toks[0].col)
            g = split[0]
            if g == 1:
                raise ParseError("conditional component needs target descriptors", lineno, head[g].col)
            if g == len(head) - 1:
                raise ParseError("conditional component needs given descriptors", lineno, head[g].col)
            targets = _names(head[1:g], declared)
            givens = _names(head[g + 1:], declared)
            overlap = set(targets) & set(givens)
            if overlap:
                raise ParseError(f"descriptor {sorted(overlap)[0]} is both target and given",
                                 lineno, head[g].col)
            n_z = math.prod(declared[n] for n in targets)
            n_w = math.prod(declared[n] for n in givens)
            values = [_number(t) for t in nums]
            if len(values) != n_z * n_w:
                raise ParseError(f"expected {n_w} rows of {n_z} probabilities "
                                 f"({n_z * n_w} numbers), got {len(values)}",
                                 lineno, (nums[0] if nums else head[-1]).col)
            rows = [values[k * n_z:(k + 1) * n_z] for k in range(n_w)]
            entry = ComponentTable.conditional(space, targets, givens, rows)
        if entry.component in lines:
            raise ParseError(f"component {entry.component} repeats line {lines[entry.component]}",
                             lineno, toks[0].col)
        lines[entry.component] = lineno
        entries.append(entry)
    pc = ProbabilitySystem(space, entries)
    violations = []
    for e in pc.entries:
        violations += [f"line {lines[e.component]}: {e.component}: {v}"
                       for v in e.table.violations(table_tol)]
    if violations:
        raise ValidationError(violations)
    return SystemFile(Path(path) if path else None, pc, lines)


def parse_system(text: str, table_tol: float = DEFAULT_TOL) -> ProbabilitySystem:
    return parse_system_file(text, table_tol=table_tol).system


def read_system(path, table_tol: float = DEFAULT_TOL) -> ProbabilitySystem:
    path = Path(path)
    return parse_system_file(path.read_text(encoding="utf-8"), path, table_tol).system


def _fmt(x: float) -> str:
    return repr(float(x))


def write_system(pc: ProbabilitySystem) -> str:
    """Serialize ``pc``; undefined conditional rows are written as uniform rows."""
    out = [f"descriptor {d.name} {d.arity}" for d in pc.space]
    for e in pc.entries:
        t = e.table
        if not e.component.is_conditional:
            nums = t.probabilities
            out.append(f"absolute {' '.join(t.descriptors)} : {' '.join(map(_fmt, nums))}")
            continue
        n_z = t.rows.shape[1]
        nums = []
        for k in range(len(t.rows)):
            nums += list(t.rows[k]) if t.defined[k] else [1.0 / n_z] * n_z
        out.append(f"conditional {' '.join(t.targets)} given {' '.join(t.givens)} : "
                   f"{' '.join(map(_fmt, nums))}")
    return "\n".join(out) + "\n"


def write_joint(p: JointDistribution) -> str:
    out = ["joint"] + [f"descriptor {d.name} {d.arity}" for d in p.space]
    out.append("values : " + " ".join(map(_fmt, p.probabilities)))
    return "\n".join(out) + "\n"


def parse_joint(text: str, tol: float = DEFAULT_TOL) -> JointDistribution:
    lines = list(_tokenize(text))
    if not lines or lines[0][1][0].text != "joint" or len(lines[0][1]) != 1:
        where = lines[0][1][0] if lines else _Token("", 1, 1)
        raise ParseError("joint file must start with 'joint'", where.line, where.col)
    descriptors, values = [], None
    for lineno, toks in lines[1:]:
        kw = toks[0].text
        if kw == "descriptor":
            if values is not None:
                raise ParseError("descriptor after values", lineno, toks[0].col)
            _declare(toks, lineno, descriptors)
        elif kw == "values":
            if values is not None:
                raise ParseError("values given twice", lineno, toks[0].col)
            head, nums = _split_colon(toks, lineno)
            if len(head) != 1:
                raise ParseError("expected 'values : <p0> ...'", lineno, head[-1].col)
            values = [_number(t) for t in nums]
            values_at = (lineno, toks[0].col)
        else:
            raise ParseError(f"unknown statement {kw!r}", lineno, toks[0].col)
    if not descriptors:
        raise ParseError("no descriptors declared", lines[0][0], 1)
    if values is None:
        raise ParseError("missing 'values' line", lines[-1][0], 1)
    space = EventSpace(descriptors)
    try:
        return JointDistribution(space, values, tol=tol)
    except DomainError as exc:
        raise ParseError(str(exc), *values_at) from None


def read_joint(path, tol: float = DEFAULT_TOL) -> JointDistribution:
    return parse_joint(Path(path).read_text(encoding="utf-8"), tol)


__all__ = ["SystemFile", "parse_system_file", "parse_system", "read_system", "write_system",
           "parse_joint", "read_joint", "write_joint"]
