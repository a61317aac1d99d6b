import json

import pytest

from cohwb.logic import Context, ctx
from cohwb.parser import parse_formula, parse_sequent, parse_theory
from cohwb.semantics import (
    EnumerationBudgetError, FinStructure, context_tuples, enumerate_homs,
    enumerate_models, enumerate_structures, eval_term, holds_sequent,
    interpret_formula, interpret_term, is_homomorphism, is_isomorphism,
    is_model, restrict_signature, satisfies, structure_from_json,
    structure_to_json, validate_structure,
)


def _m(elems, pairs):
    return FinStructure({"s": tuple(elems)}, {"R": frozenset(pairs)})


def test_validate_structure_catches_bad_tables(ttrans):
    sig = ttrans.signature
    good = _m(["0", "1"], [("0", "0"), ("1", "1")])
    assert validate_structure(good, sig) == []
    stray = _m(["0"], [("0", "7")])
    assert any("7" in d for d in validate_structure(stray, sig))
    # a missing relation table just means the empty relation...
    assert validate_structure(FinStructure({"s": ("0",)}), sig) == []
    # ...but functions must be total
    fn_thy, _ = parse_theory("sort s.\nfun f : s -> s.\n")
    partial = FinStructure({"s": ("0",)}, {}, {"f": {}})
    assert any("undefined" in d for d in
               validate_structure(partial, fn_thy.signature))


def test_interpret_formula_is_the_definable_subset(ttrans):
    M = _m(["0", "1"], [("0", "0"), ("0", "1"), ("1", "1")])
    cx = ctx(("x", "s"), ("y", "s"))
    assert context_tuples(M, cx) == [
        ("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]
    sub = interpret_formula(M, cx, parse_formula("R(x, y)"))
    assert sub.tuples == frozenset({("0", "0"), ("0", "1"), ("1", "1")})
    ex = interpret_formula(M, ctx(("x", "s")), parse_formula("exists y:s. R(y, x)"))
    assert ex.tuples == frozenset({("0",), ("1",)})
    # empty context: a sentence denotes a subsingleton
    top = interpret_formula(M, Context(()), parse_formula("true"))
    assert top.tuples == frozenset({()})


def test_interpret_term_tabulates_on_context():
    thy, _ = parse_theory("sort s.\nfun f : s -> s.\n")
    M = FinStructure({"s": ("a", "b")}, {}, {"f": {("a",): "b", ("b",): "b"}})
    assert validate_structure(M, thy.signature) == []
    table = interpret_term(M, ctx(("x", "s")), parse_formula("f(f(x)) = x").lhs)
    assert table == {("a",): "b", ("b",): "b"}
    assert eval_term(M, {"x": "a"}, parse_formula("f(x) = x").lhs) == "b"


def test_holds_sequent_and_satisfies():
    seq = parse_sequent("[x:s, y:s] R(x, y) => R(y, x)")
    sym = _m(["0", "1"], [("0", "1"), ("1", "0")])
    assert holds_sequent(sym, seq)
    asym = _m(["0", "1"], [("0", "1")])
    assert not holds_sequent(asym, seq)
    assert satisfies(asym, {"x": "0", "y": "1"}, parse_formula("R(x, y)"))
    assert not satisfies(asym, {"x": "1", "y": "0"}, parse_formula("R(x, y)"))


def test_transitive_reflexive_model_counts(ttrans):
    models = enumerate_models(ttrans, 2)
    assert len(models) == 6
    by_size = sorted(len(M.sorts["s"]) for M in models)
    assert by_size == [0, 1, 2, 2, 2, 2]
    exact = enumerate_models(ttrans, 2, exact_sizes={"s": 2})
    assert len(exact) == 4
    for M in exact:
        assert M.sorts["s"] == ("0", "1")
        assert is_model(M, ttrans)


def test_enumeration_budget_is_enforced(ttrans):
    with pytest.raises(EnumerationBudgetError):
        list(enumerate_structures(ttrans.signature, 3, budget=10))
    # the error message names both numbers
    try:
        list(enumerate_structures(ttrans.signature, 3, budget=10))
    except EnumerationBudgetError as e:
        assert "10" in str(e)


def test_enumerate_homs_of_discrete_preorder(ttrans):
    # R = full relation on two points: every self-map is a homomorphism
    full = _m(["0", "1"], [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")])
    homs = enumerate_homs(full, full, ttrans.signature)
    assert len(homs) == 4
    for alpha in homs:
        assert is_homomorphism(alpha, full, full, ttrans.signature)
    isos = [a for a in homs if is_isomorphism(a, full, full, ttrans.signature)]
    assert len(isos) == 2
    # identity relation only: maps must preserve R, all 4 still work here,
    # but into the empty structure nothing maps
    empty = _m([], [])
    assert enumerate_homs(full, empty, ttrans.signature) == []
    assert len(enumerate_homs(empty, full, ttrans.signature)) == 1


def test_structure_json_round_trip_is_bit_identical():
    thy, _ = parse_theory("sort s.\nsort t.\nfun g : s -> t.\nrel P : t.\n")
    M = FinStructure(
        {"s": ("a", "b"), "t": ("u",)},
        {"P": frozenset({("u",)})},
        {"g": {("a",): "u", ("b",): "u"}},
    )
    assert validate_structure(M, thy.signature) == []
    text = structure_to_json(M)
    assert text.endswith("\n")
    again = structure_from_json(text)
    assert structure_to_json(again) == text
    assert again == M


def test_structure_json_refuses_comma_in_element_names():
    M = FinStructure({"s": ("a,b",)}, {}, {"f": {("a,b",): "a,b"}})
    with pytest.raises(ValueError):
        structure_to_json(M)


def test_restrict_signature_forgets_extra_symbols(ttrans):
    bigger, _ = parse_theory(
        "sort s.\nrel R : s * s.\nrel Extra : s.\nfun pick : -> s.\n")
    M = FinStructure(
        {"s": ("0",)},
        {"R": frozenset({("0", "0")}), "Extra": frozenset()},
        {"pick": {(): "0"}},
    )
    assert validate_structure(M, bigger.signature) == []
    small = restrict_signature(M, ttrans.signature)
    assert validate_structure(small, ttrans.signature) == []
    assert "Extra" not in small.rels and small.funs == {}
    assert small.rels["R"] == M.rels["R"]
