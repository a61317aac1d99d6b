import pytest

from cohwb.logic import And, Eq, Exists, Implies, Not, Or, Rel, Var
from cohwb.parser import (
    ParseError, emit_name, formula_to_text, parse_formula, parse_sequent,
    parse_term, parse_theory, sequent_body_to_text, sequent_to_text,
    theory_to_text,
)

T_TRANS_TEXT = """sort s.
rel R : s * s.
axiom [x:s] true => R(x, x).
axiom [x:s, y:s, z:s] R(x, y) & R(y, z) => R(x, z).
"""


def test_theory_parses_with_locations():
    thy, locs = parse_theory(T_TRANS_TEXT)
    assert thy.signature.sorts == ("s",)
    assert thy.signature.relations == {"R": ("s", "s")}
    assert len(thy.axioms) == 2
    assert locs == {0: "line 3", 1: "line 4"}


def test_emit_parse_round_trip_is_stable():
    thy, _ = parse_theory(T_TRANS_TEXT)
    text = theory_to_text(thy)
    again, _ = parse_theory(text)
    assert again == thy
    assert theory_to_text(again) == text


def test_quoted_names():
    thy, _ = parse_theory('sort "my sort".\nrel "R 1" : "my sort".\n')
    assert thy.signature.sorts == ("my sort",)
    text = theory_to_text(thy)
    assert '"my sort"' in text and '"R 1"' in text
    back, _ = parse_theory(text)
    assert back == thy
    # keywords must be quoted to be usable as names
    assert emit_name("sort") == '"sort"'
    with pytest.raises(ValueError):
        emit_name('has"quote')


def test_formula_shapes():
    f = parse_formula("A(x) & B(x) | C(x)")
    assert isinstance(f, Or) and isinstance(f.parts[0], And)
    g = parse_formula("~ P(x)")
    assert isinstance(g, Not)
    h = parse_formula("(P(x) -> Q(x))")
    assert isinstance(h, Implies)
    e = parse_formula("exists y:s. x = y")
    assert isinstance(e, Exists) and isinstance(e.body, Eq)
    assert parse_term("f(g(x), y)").fn == "f"


def test_sequent_text_round_trip():
    seq = parse_sequent("[x:s, y:s] R(x, y) => exists z:s. R(x, z)")
    body = sequent_body_to_text(seq)
    assert body.startswith("[x:s, y:s]")
    assert parse_sequent(body) == seq
    # statement form is what theory files carry
    assert sequent_to_text(seq) == f"axiom {body}."


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        parse_theory("sort s.\naxiom [x:s] tru => R(x).\n")
    assert e.value.line == 2
    with pytest.raises(ParseError):
        parse_formula("R(x")
    with pytest.raises(ParseError):
        parse_theory('sort "".')


def test_formula_to_text_parenthesizes():
    f = parse_formula("A(x) & (B(x) | C(x))")
    assert parse_formula(formula_to_text(f)) == f
    g = parse_formula("exists y:s. A(y) & B(y)")
    assert parse_formula(formula_to_text(g)) == g
