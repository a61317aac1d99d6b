import pytest

from cohwb.logic import (
    And, App, Context, Eq, Exists, FALSE, Forall, Implies, Not, Or, Rel,
    Signature, TRUE, Var, WellFormednessError, alpha_eq, conj, ctx, disj,
    free_vars, fresh_name, is_coherent, morleyization, morleyize, normalize,
    normalize_sequent, rename_positional, substitute, wf_check, wf_formula,
    wf_sequent,
)
from cohwb.parser import parse_formula, parse_sequent, parse_theory
import cohwb.semantics as semantics


def test_signature_diagnostics():
    ok = Signature(("s",), {"R": ("s", "s")}, {"f": (("s",), "s")})
    assert ok.diagnostics() == []
    # one namespace for sorts, relations, functions
    clash = Signature(("s",), {"s": ("s",)})
    assert any("s" in d for d in clash.diagnostics())
    dangling = Signature(("s",), {"R": ("t",)})
    assert any("t" in d for d in dangling.diagnostics())


def test_coherent_fragment():
    x = Var("x")
    assert is_coherent(TRUE) and is_coherent(FALSE)
    assert is_coherent(Exists("y", "s", Rel("R", (x, Var("y")))))
    assert not is_coherent(Not(Rel("P", (x,))))
    assert not is_coherent(Implies(TRUE, TRUE))
    assert not is_coherent(Forall("y", "s", TRUE))
    # smart constructors flatten
    assert conj(TRUE, Rel("P", (x,))) == Rel("P", (x,))
    assert disj(FALSE, Rel("P", (x,))) == Rel("P", (x,))


def test_free_vars_first_occurrence_order():
    f = parse_formula("R(y, x) & exists z:s. R(z, y)")
    assert free_vars(f) == ["y", "x"]


def test_substitute_capture_avoiding():
    # [x := y] in  exists y. R(x, y)  must not capture
    f = Exists("y", "s", Rel("R", (Var("x"), Var("y"))))
    g = substitute(f, {"x": Var("y")})
    assert isinstance(g, Exists) and g.var != "y"
    assert free_vars(g) == ["y"]
    # the bound occurrence still refers to the binder
    assert g.body == Rel("R", (Var("y"), Var(g.var)))


def test_alpha_normalization():
    a = (ctx(("x", "s")), parse_formula("exists y:s. R(x, y)"))
    b = (ctx(("u", "s")), parse_formula("exists w:s. R(u, w)"))
    assert alpha_eq(a, b)
    assert normalize(*a) == normalize(*b)
    c = (ctx(("x", "s")), parse_formula("exists y:s. R(y, x)"))
    assert not alpha_eq(a, c)


def test_normalize_sequent_idempotent():
    seq = parse_sequent("[q:s, p:s] R(q, p) => exists r:s. R(p, r)")
    n1 = normalize_sequent(seq)
    assert normalize_sequent(n1) == n1
    assert [s for _, s in n1.context.pairs] == ["s", "s"]


def test_rename_positional():
    cx, f = rename_positional(ctx(("a", "s"), ("b", "s")),
                              parse_formula("R(a, b)"), ["v0", "v1"])
    assert [n for n, _ in cx.pairs] == ["v0", "v1"]
    assert f == Rel("R", (Var("v0"), Var("v1")))


def test_wf_formula_and_sequent():
    sig = Signature(("s",), {"R": ("s", "s")}, {"f": (("s",), "s")})
    assert wf_formula(sig, ctx(("x", "s")), parse_formula("R(x, f(x))")) == []
    out_of_scope = wf_formula(sig, ctx(("x", "s")), parse_formula("R(x, y)"))
    assert out_of_scope and "'y'" in out_of_scope[0]
    unknown_rel = wf_formula(sig, ctx(("x", "s")), parse_formula("Q(x)"))
    assert unknown_rel
    bad_ctx = wf_sequent(sig, parse_sequent("[x:t] true => R(x, x)"))
    assert any("unknown sort" in d for d in bad_ctx)


def test_wf_check_coherent_flag():
    thy, _ = parse_theory("sort a.\nrel P : a.\naxiom [x:a] true => ~ P(x).\n")
    assert wf_check(thy) == []
    flagged = wf_check(thy, require_coherent=True)
    assert flagged and "negation" in flagged[0]


def test_fresh_name():
    assert fresh_name("x", {"x", "x0", "x1"}) not in {"x", "x0", "x1"}
    assert fresh_name("y", set()) == "y"


# --- Morleyization ----------------------------------------------------------

def _models(thy, size, budget=2_000_000):
    return [M for M in
            semantics.enumerate_structures(thy.signature, size, budget=budget)
            if semantics.is_model(M, thy)]


@pytest.mark.parametrize("text,size", [
    # excluded middle, a non-coherent tautology
    ("sort s.\nrel Q : s.\naxiom [x:s] (Q(x) -> false) | Q(x) => true.\n", 2),
    # a genuine forall/implies axiom (checked small: the enriched signature
    # doubles the relation count, so size 2 would enumerate ~4M structures)
    ("sort s.\nrel Q : s.\nrel R : s * s.\n"
     "axiom [x:s] (forall y:s. R(x, y)) => Q(x).\n", 1),
])
def test_morleyization_model_bijection(text, size):
    thy, _ = parse_theory(text)
    mor = morleyization(thy)
    assert wf_check(mor.theory, require_coherent=True) == []
    src = _models(thy, size)
    out = _models(mor.theory, size, budget=10_000_000)
    # positive/negative expansion is a bijection between model classes
    expanded = [semantics.expand_structure(M, mor) for M in src]
    for E in expanded:
        assert semantics.is_model(E, mor.theory)
    assert len(out) == len(src)
    assert len({semantics.structure_to_json(E) for E in expanded}) == len(expanded)


def test_morleyize_is_conservative_on_coherent_input(ttrans):
    mor = morleyization(ttrans)
    out = morleyize(ttrans)
    # translation layer may add symbols, but every original model survives the
    # round trip: expand to the enriched signature, then forget back down
    for M in _models(ttrans, 2):
        exp = semantics.expand_structure(M, mor)
        assert semantics.is_model(exp, out)
        back = semantics.restrict_signature(exp, ttrans.signature)
        assert semantics.structure_to_json(back) == semantics.structure_to_json(M)
