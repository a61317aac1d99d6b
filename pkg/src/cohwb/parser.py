"""Text format for theories.

    sort s.
    fun f : s * t -> u.
    rel R : s * t.
    axiom [x:s, y:s] R(x,y) & R(y,x) => x = y.

Tokens: ``true false exists & | . => = * -> : , ( ) [ ] ~`` and identifiers.
``exists y:s. body`` binds the tightest formula to the right, so
``exists y:s. R(x,y) & S(x)`` is ``(exists y:s. R(x,y)) & S(x)``.
Constants are written as nullary applications ``c()``; a bare identifier in a
term position is a variable.  The context block may be omitted only when the
sequent has no free variables.

The same grammar is also used for first-order input: ``~phi``,
``phi -> psi`` (inside parentheses) and ``forall y:s. phi`` parse to the
first-order nodes that only the Morleyization accepts.
"""
from __future__ import annotations

import re
from typing import Dict, List, Optional, Tuple

from .logic import (
    And, App, Context, Eq, Exists, FALSE, Forall, Formula, Implies, Not, Or,
    Rel, Sequent, Signature, Term, TRUE, Theory, Var, conj, disj,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>\#[^\n]*)
      | (?P<arrow>=>)
      | (?P<fnarrow>->)
      | (?P<sym>[=*:,.()\[\]|&~])
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<qname>"[^"\n]*")
    """,
    re.VERBOSE,
)

_KEYWORDS = {"sort", "fun", "rel", "axiom", "true", "false", "exists", "forall"}
_PLAIN_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Tokens:
    def __init__(self, text: str):
        self.toks: List[Tuple[str, str, int, int]] = []  # (kind, value, line, col)
        line, col = 1, 1
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", line, col)
            value = m.group(0)
            kind = m.lastgroup or "sym"
            if kind not in ("ws", "comment"):
                if kind == "name" and value in _KEYWORDS:
                    kind = value
                elif kind == "qname":
                    if len(value) == 2:
                        raise ParseError("empty quoted name", line, col)
                    kind, value = "name", value[1:-1]
                self.toks.append((kind, value, line, col))
            nl = value.count("\n")
            if nl:
                line += nl
                col = len(value) - value.rfind("\n")
            else:
                col += len(value)
            pos = m.end()
        self.i = 0

    def peek(self) -> Optional[Tuple[str, str, int, int]]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> Tuple[str, str, int, int]:
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else ("", "", 1, 1)
            raise ParseError("unexpected end of input", last[2], last[3])
        self.i += 1
        return t

    def expect(self, kind: str, what: Optional[str] = None) -> Tuple[str, str, int, int]:
        t = self.next()
        if t[0] != kind or (what is not None and t[1] != what):
            raise ParseError(f"expected {what or kind!r}, found {t[1]!r}", t[2], t[3])
        return t

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        t = self.peek()
        if t is None:
            return False
        return t[0] == kind and (value is None or t[1] == value)


def _parse_term_list(ts: _Tokens) -> Tuple[Term, ...]:
    ts.expect("sym", "(")
    args: List[Term] = []
    if not ts.at("sym", ")"):
        args.append(_parse_term(ts))
        while ts.at("sym", ","):
            ts.next()
            args.append(_parse_term(ts))
    ts.expect("sym", ")")
    return tuple(args)


def _parse_term(ts: _Tokens) -> Term:
    t = ts.expect("name")
    if ts.at("sym", "("):
        return App(t[1], _parse_term_list(ts))
    return Var(t[1])


def _parse_atom(ts: _Tokens) -> Formula:
    t = ts.peek()
    if t is None:
        raise ParseError("expected a formula", 1, 1)
    if t[0] == "true":
        ts.next()
        return TRUE
    if t[0] == "false":
        ts.next()
        return FALSE
    if t[0] == "sym" and t[1] == "(":
        ts.next()
        f = _parse_formula(ts)
        if ts.at("fnarrow"):
            ts.next()
            g = _parse_formula(ts)
            f = Implies(f, g)
        ts.expect("sym", ")")
        return f
    if t[0] == "sym" and t[1] == "~":
        ts.next()
        return Not(_parse_unit(ts))
    if t[0] == "name":
        ts.next()
        if ts.at("sym", "("):
            args = _parse_term_list(ts)
            if ts.at("sym", "="):
                ts.next()
                return Eq(App(t[1], args), _parse_term(ts))
            return Rel(t[1], args)
        ts.expect("sym", "=")
        return Eq(Var(t[1]), _parse_term(ts))
    raise ParseError(f"expected a formula, found {t[1]!r}", t[2], t[3])


def _parse_unit(ts: _Tokens) -> Formula:
    if ts.at("exists") or ts.at("forall"):
        kw = ts.next()
        var = ts.expect("name")
        ts.expect("sym", ":")
        sort = ts.expect("name")
        ts.expect("sym", ".")
        body = _parse_unit(ts)
        return (Exists if kw[0] == "exists" else Forall)(var[1], sort[1], body)
    return _parse_atom(ts)


def _parse_formula(ts: _Tokens) -> Formula:
    parts = [_parse_conj(ts)]
    while ts.at("sym", "|"):
        ts.next()
        parts.append(_parse_conj(ts))
    if len(parts) == 1:
        return parts[0]
    return disj(*parts)


def _parse_conj(ts: _Tokens) -> Formula:
    parts = [_parse_unit(ts)]
    while ts.at("sym", "&"):
        ts.next()
        parts.append(_parse_unit(ts))
    if len(parts) == 1:
        return parts[0]
    return conj(*parts)


def parse_sequent_body(ts: _Tokens) -> Sequent:
    pairs: List[Tuple[str, str]] = []
    if ts.at("sym", "["):
        ts.next()
        if not ts.at("sym", "]"):
            while True:
                n = ts.expect("name")
                ts.expect("sym", ":")
                s = ts.expect("name")
                pairs.append((n[1], s[1]))
                if ts.at("sym", ","):
                    ts.next()
                    continue
                break
        ts.expect("sym", "]")
    lhs = _parse_formula(ts)
    ts.expect("arrow")
    rhs = _parse_formula(ts)
    return Sequent(Context(tuple(pairs)), lhs, rhs)


def parse_sequent(text: str) -> Sequent:
    """Parse a standalone ``[ctx] lhs => rhs`` (trailing dot optional)."""
    ts = _Tokens(text)
    seq = parse_sequent_body(ts)
    if ts.at("sym", "."):
        ts.next()
    t = ts.peek()
    if t is not None:
        raise ParseError(f"trailing input {t[1]!r}", t[2], t[3])
    return seq


def parse_formula(text: str) -> Formula:
    ts = _Tokens(text)
    f = _parse_formula(ts)
    t = ts.peek()
    if t is not None:
        raise ParseError(f"trailing input {t[1]!r}", t[2], t[3])
    return f


def parse_term(text: str) -> Term:
    ts = _Tokens(text)
    t = _parse_term(ts)
    tok = ts.peek()
    if tok is not None:
        raise ParseError(f"trailing input {tok[1]!r}", tok[2], tok[3])
    return t


def parse_theory(text: str) -> Tuple[Theory, Dict[int, str]]:
    """Parse a theory file; returns the theory and axiom-index -> location map."""
    ts = _Tokens(text)
    sorts: List[str] = []
    relations: Dict[str, Tuple[str, ...]] = {}
    functions: Dict[str, Tuple[Tuple[str, ...], str]] = {}
    axioms: List[Sequent] = []
    locations: Dict[int, str] = {}
    while ts.peek() is not None:
        t = ts.next()
        if t[0] == "sort":
            name = ts.expect("name")
            sorts.append(name[1])
            ts.expect("sym", ".")
        elif t[0] == "fun":
            name = ts.expect("name")
            ts.expect("sym", ":")
            args: List[str] = []
            if not ts.at("fnarrow"):
                args.append(ts.expect("name")[1])
                while ts.at("sym", "*"):
                    ts.next()
                    args.append(ts.expect("name")[1])
            ts.expect("fnarrow")
            res = ts.expect("name")
            functions[name[1]] = (tuple(args), res[1])
            ts.expect("sym", ".")
        elif t[0] == "rel":
            name = ts.expect("name")
            ts.expect("sym", ":")
            args = []
            if not ts.at("sym", "."):
                args.append(ts.expect("name")[1])
                while ts.at("sym", "*"):
                    ts.next()
                    args.append(ts.expect("name")[1])
            relations[name[1]] = tuple(args)
            ts.expect("sym", ".")
        elif t[0] == "axiom":
            locations[len(axioms)] = f"line {t[2]}"
            axioms.append(parse_sequent_body(ts))
            ts.expect("sym", ".")
        else:
            raise ParseError(f"expected a declaration, found {t[1]!r}", t[2], t[3])
    thy = Theory(Signature(tuple(sorts), relations, functions), tuple(axioms))
    return thy, locations


# ---------------------------------------------------------------------------
# printing (the inverse direction; output re-parses to an equal theory)


def emit_name(n: str) -> str:
    """A name token for ``n``, quoted when it is not a plain identifier."""
    if '"' in n or "\n" in n or not n:
        raise ValueError(f"name {n!r} cannot be written in the text format")
    if _PLAIN_NAME_RE.fullmatch(n) and n not in _KEYWORDS:
        return n
    return f'"{n}"'


def term_to_text(t: Term) -> str:
    if isinstance(t, Var):
        return emit_name(t.name)
    return f"{emit_name(t.fn)}({', '.join(term_to_text(a) for a in t.args)})"


def formula_to_text(f: Formula) -> str:
    return _fmt(f, 0)


def _fmt(f: Formula, level: int) -> str:
    """level 0: disjunctions allowed bare; 1: conjunct; 2: quantifier/neg body."""
    if isinstance(f, And) and not f.parts:
        return "true"
    if isinstance(f, Or) and not f.parts:
        return "false"
    if isinstance(f, Eq):
        return f"{term_to_text(f.lhs)} = {term_to_text(f.rhs)}"
    if isinstance(f, Rel):
        return f"{emit_name(f.name)}({', '.join(term_to_text(a) for a in f.args)})"
    if isinstance(f, Or):
        body = " | ".join(_fmt(p, 1) for p in f.parts)
        return body if level == 0 else f"({body})"
    if isinstance(f, And):
        body = " & ".join(_fmt(p, 2) for p in f.parts)
        return body if level <= 1 else f"({body})"
    if isinstance(f, Exists):
        return f"exists {emit_name(f.var)}:{emit_name(f.sort)}. {_fmt(f.body, 2)}"
    if isinstance(f, Forall):
        return f"forall {emit_name(f.var)}:{emit_name(f.sort)}. {_fmt(f.body, 2)}"
    if isinstance(f, Not):
        return f"~{_fmt(f.body, 2)}"
    if isinstance(f, Implies):
        return f"({_fmt(f.lhs, 0)} -> {_fmt(f.rhs, 0)})"
    raise TypeError(f"unknown formula node {type(f).__name__}")


def sequent_body_to_text(seq: Sequent) -> str:
    ctx = ", ".join(f"{emit_name(n)}:{emit_name(s)}" for n, s in seq.context)
    return f"[{ctx}] {formula_to_text(seq.lhs)} => {formula_to_text(seq.rhs)}"


def sequent_to_text(seq: Sequent) -> str:
    return f"axiom {sequent_body_to_text(seq)}."


def theory_to_text(thy: Theory) -> str:
    lines: List[str] = []
    for s in thy.signature.sorts:
        lines.append(f"sort {emit_name(s)}.")
    for f, (args, res) in thy.signature.functions.items():
        head = " * ".join(emit_name(a) for a in args) + " " if args else ""
        lines.append(f"fun {emit_name(f)} : {head}-> {emit_name(res)}.")
    for r, arity in thy.signature.relations.items():
        lines.append(f"rel {emit_name(r)} : {' * '.join(emit_name(a) for a in arity)}.")
    for ax in thy.axioms:
        lines.append(sequent_to_text(ax))
    return "\n".join(lines) + "\n"
