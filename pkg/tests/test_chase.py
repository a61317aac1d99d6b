import pytest

from cohwb.chase import (
    FactBase, OutcomeTag, ReplayError, TriState, functionality_sequents,
    provably_functional, prove_sequent, replay, saturate,
)
from cohwb.logic import And, Rel, Var, ctx
from cohwb.parser import parse_sequent, parse_theory


@pytest.fixture(scope="module")
def successor():
    thy, _ = parse_theory(
        "sort s.\nrel R : s * s.\n"
        "axiom [x:s] true => exists y:s. R(x, y).\n")
    return thy


def test_saturation_materializes_fresh_witnesses(successor):
    fb = FactBase(successor.signature)
    fb.add_const("c", "s")
    branches = saturate(successor, fb, 2)
    assert len(branches) == 1
    snap = branches[0].snapshot()
    assert snap["facts"] == ["R(c, w1)", "R(w1, w2)"]


def test_identity_sequent_needs_no_rounds(successor):
    seq = parse_sequent("[x:s] R(x, x) => R(x, x)")
    out = prove_sequent(successor, seq, 0)
    assert out.proved and out.rounds_used == 0
    assert out.tag is OutcomeTag.PROVED
    assert replay(successor, seq, out)


def test_disjunction_splits_and_certificate_replays():
    thy, _ = parse_theory(
        "sort s.\nrel A : s.\nrel B : s.\nrel C : s.\n"
        "axiom [x:s] A(x) => B(x) | C(x).\n"
        "axiom [x:s] B(x) => C(x).\n")
    seq = parse_sequent("[x:s] A(x) => C(x)")
    out = prove_sequent(thy, seq, 3)
    assert out.proved
    assert replay(thy, seq, out)
    # replaying a certificate against the wrong sequent must not pass
    other = parse_sequent("[x:s] A(x) => B(x)")
    try:
        ok = replay(thy, other, out)
    except ReplayError:
        ok = False
    assert not ok


def test_equality_propagates_through_function_symbols():
    thy, _ = parse_theory(
        "sort s.\nfun f : s -> s.\nrel P : s.\n"
        "axiom [x:s, y:s] x = y => P(f(x)).\n")
    seq = parse_sequent("[a:s, b:s] a = b => P(f(b))")
    out = prove_sequent(thy, seq, 2)
    assert out.proved and replay(thy, seq, out)


def test_totality_needs_one_materialization_round():
    thy, _ = parse_theory("sort s.\nfun f : s -> s.\nrel P : s.\n"
                          "axiom [x:s, y:s] x = y => P(f(x)).\n")
    seq = parse_sequent("[x:s] true => exists y:s. y = f(x)")
    assert not prove_sequent(thy, seq, 0).proved
    out = prove_sequent(thy, seq, 2)
    assert out.proved and replay(thy, seq, out)


def test_term_depth_sets_the_required_bound():
    thy, _ = parse_theory("sort s.\nfun f : s -> s.\n")
    seq = parse_sequent("[x:s] true => exists y:s. y = f(f(f(x)))")
    shallow = prove_sequent(thy, seq, 2)
    assert not shallow.proved
    assert shallow.tag is not OutcomeTag.PROVED
    deep = prove_sequent(thy, seq, 3)
    assert deep.proved and replay(thy, seq, deep)


def test_provably_functional_yes_and_no():
    functional, _ = parse_theory(
        "sort s.\nrel R : s * s.\n"
        "axiom [x:s] true => exists y:s. R(x, y).\n"
        "axiom [x:s, y:s, z:s] R(x, y) & R(x, z) => y = z.\n")
    theta = Rel("R", (Var("v0"), Var("w0")))
    src = (ctx(("v0", "s")), And(()))
    tgt = (ctx(("w0", "s")), And(()))
    rep = provably_functional(functional, theta, src, tgt, 4)
    assert rep.verdict is TriState.YES

    bare, _ = parse_theory("sort s.\nrel R : s * s.\n")
    rep2 = provably_functional(bare, theta, src, tgt, 3)
    assert rep2.verdict is TriState.NO
    assert rep2.countermodel is not None
    # the countermodel genuinely breaks one of the defining sequents
    from cohwb.semantics import holds_sequent
    broken = [s for s in functionality_sequents(theta, src, tgt)
              if not holds_sequent(rep2.countermodel, s)]
    assert broken
