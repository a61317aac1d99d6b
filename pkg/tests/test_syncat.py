import pytest

import cohwb.semantics as semantics
from cohwb.chase import TriState
from cohwb.logic import And, App, Eq, Rel, Var, conj, ctx
from cohwb.parser import parse_theory
from cohwb.syncat import ArrowRejected, CertifiedArrowViolation, SyntacticCategory


@pytest.fixture(scope="module")
def theory():
    thy, _ = parse_theory(
        "sort s.\nfun f : s -> s.\nrel R : s * s.\n"
        "axiom [x:s, y:s, z:s] R(x, y) & R(y, z) => R(x, z).\n")
    return thy


@pytest.fixture(scope="module")
def C(theory):
    return SyntacticCategory(theory, bound=4)


@pytest.fixture(scope="module")
def top(C):
    return C.object(ctx(("x", "s")), And(()))


@pytest.fixture(scope="module")
def graph_f(C, top):
    theta = Eq(Var("y"), App("f", (Var("x"),)))
    return C.arrow(ctx(("x", "s"), ("y", "s")), theta, top, top)


def test_objects_intern_up_to_alpha(C):
    o1 = C.object(ctx(("x", "s")), Rel("R", (Var("x"), Var("x"))))
    o2 = C.object(ctx(("y", "s")), Rel("R", (Var("y"), Var("y"))))
    assert o1 is o2
    # an unused context variable changes the object
    o3 = C.object(ctx(("x", "s"), ("y", "s")), Rel("R", (Var("x"), Var("x"))))
    assert o3 is not o1


def test_identity_and_graph_are_certified(C, top, graph_f):
    assert C.identity(top).certified
    assert graph_f.certified
    assert graph_f.verdict is TriState.YES


def test_non_functional_relation_is_rejected(C, top):
    with pytest.raises(ArrowRejected) as e:
        C.arrow(ctx(("x", "s"), ("y", "s")),
                Rel("R", (Var("x"), Var("y"))), top, top)
    assert e.value.report.countermodel is not None


def test_bound_zero_leaves_the_verdict_open(theory):
    C0 = SyntacticCategory(theory, bound=0)
    t0 = C0.object(ctx(("x", "s")), And(()))
    theta = Eq(Var("y"), App("f", (Var("x"),)))
    arrow = C0.arrow(ctx(("x", "s"), ("y", "s")), theta, t0, t0)
    assert arrow.verdict is TriState.UNKNOWN
    assert not arrow.certified


def test_composition_is_the_composed_graph(C, top, graph_f):
    ff = C.compose(graph_f, graph_f)
    assert ff.certified
    theta_ff = Eq(Var("y"), App("f", (App("f", (Var("x"),)),)))
    direct = C.arrow(ctx(("x", "s"), ("y", "s")), theta_ff, top, top)
    assert C.eq(ff, direct) is TriState.YES


def test_unit_and_associativity_laws(C, top, graph_f):
    assert C.eq(C.compose(C.identity(top), graph_f), graph_f) is TriState.YES
    assert C.eq(C.compose(graph_f, C.identity(top)), graph_f) is TriState.YES
    lhs = C.compose(C.compose(graph_f, graph_f), graph_f)
    rhs = C.compose(graph_f, C.compose(graph_f, graph_f))
    assert C.eq(lhs, rhs) is TriState.YES


def test_eq_no_is_backed_by_a_countermodel(C, top, graph_f):
    ident = C.arrow(ctx(("x", "s"), ("y", "s")), Eq(Var("y"), Var("x")),
                    top, top)
    assert C.eq(graph_f, ident) is TriState.NO


def test_eq_ignores_a_conjoined_truth(C, top, graph_f):
    theta = Eq(Var("y"), App("f", (Var("x"),)))
    padded = C.arrow(ctx(("x", "s"), ("y", "s")), conj(theta, And(())),
                     top, top)
    assert C.eq(graph_f, padded) is TriState.YES


@pytest.fixture(scope="module")
def eval_model(theory):
    models = semantics.enumerate_models(theory, 2)
    return next(m for m in models
                if len(m.sorts["s"]) == 2
                and any(v != k[0] for k, v in m.funs["f"].items()))


def test_evaluation_matches_the_function_table(C, top, graph_f, eval_model):
    E = C.eval_functor(eval_model)
    assert E.obj_set(top) == tuple((e,) for e in eval_model.sorts["s"])
    assert E.arr_fun(graph_f) == {
        (k[0],): (v,) for k, v in eval_model.funs["f"].items()}
    assert E.arr_fun(C.identity(top)) == {
        (e,): (e,) for e in eval_model.sorts["s"]}


def test_evaluation_is_functorial(C, graph_f, eval_model):
    E = C.eval_functor(eval_model)
    one = E.arr_fun(graph_f)
    two = E.arr_fun(C.compose(graph_f, graph_f))
    assert two == {x: one[one[x]] for x in one}


def test_structured_objects_evaluate_concretely(C, top, graph_f, eval_model):
    E = C.eval_functor(eval_model)
    diag = C.object(ctx(("x", "s")), Rel("R", (Var("x"), Var("x"))))

    prod, p1, p2 = C.product(diag, top)
    sp = E.obj_set(prod)
    s1, s2 = E.obj_set(diag), E.obj_set(top)
    assert set(sp) == {(a, b) for (a,) in s1 for (b,) in s2}
    g1, g2 = E.arr_fun(p1), E.arr_fun(p2)
    assert all(g1[t] == (t[0],) and g2[t] == (t[1],) for t in sp)

    img, e_arr, m_arr = C.image(graph_f)
    si = set(E.obj_set(img))
    assert si == {(v,) for v in eval_model.funs["f"].values()}
    assert set(E.arr_fun(e_arr).values()) == si
    assert all(E.arr_fun(m_arr)[t] == t for t in si)

    uni, _, _ = C.union(diag, diag)
    assert set(E.obj_set(uni)) == set(E.obj_set(diag))


def test_uncertified_arrows_refuse_to_evaluate(theory, eval_model):
    C0 = SyntacticCategory(theory, bound=0)
    t0 = C0.object(ctx(("x", "s")), And(()))
    theta = Eq(Var("y"), App("f", (Var("x"),)))
    open_arrow = C0.arrow(ctx(("x", "s"), ("y", "s")), theta, t0, t0)
    assert open_arrow.verdict is TriState.UNKNOWN
    E = C0.eval_functor(eval_model)
    with pytest.raises(ValueError):
        E.arr_fun(open_arrow)
    # the unsoundness alarm is importable and distinct from plain ValueError
    assert issubclass(CertifiedArrowViolation, RuntimeError)
