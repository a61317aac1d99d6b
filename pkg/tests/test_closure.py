import pytest

import cohwb.canon as canon
from cohwb.closure import (
    ClosureBudgetError, coherent_closure, factor_cocone_through_closure,
    verify_closed,
)
from cohwb.fincat import (
    FinFunctor, FragmentBuilder, terminal_category, validate_fragment,
)


@pytest.fixture()
def singleton():
    b = FragmentBuilder()
    b.add_object("S", ("*",))
    b.ensure_identities()
    return b.build()


@pytest.fixture()
def collapse():
    b = FragmentBuilder()
    b.add_object("X", ("0", "1"))
    b.add_object("Z", ("0",))
    b.add_arrow("f", "X", "Z", {"0": "0", "1": "0"})
    b.ensure_identities()
    return b.build()


def test_singleton_closes_in_one_round(singleton):
    res = coherent_closure(singleton, ["S"], list(singleton.cat.arrows), rounds=3)
    assert res.fixed_point and len(res.rounds) == 1
    assert all(i.status == "closed" for i in res.rounds[0].instances)
    frag = res.fragment()
    assert validate_fragment(frag) == []
    assert verify_closed(res) == []


def test_collapse_map_grows_with_pinned_witnesses(collapse):
    res = coherent_closure(collapse, ["X", "Z"], ["f"], rounds=2, max_objects=500)
    assert not res.fixed_point
    counts = [r.object_count for r in res.rounds]
    assert counts == sorted(counts), "growth must be monotone"
    assert set(res.sub_objects) >= {"X", "Z"} and "f" in res.sub_arrows
    frag = res.fragment()
    assert validate_fragment(frag) == []
    assert verify_closed(res, objects=["X", "Z"], arrows=["f"]) == []

    r1 = res.rounds[0]
    prod_xx = [i for i in r1.instances
               if i.kind == "product" and i.key == ("X", "X")]
    assert prod_xx and prod_xx[0].status == "created"
    P = prod_xx[0].realization[0]
    assert len(frag.sets[P]) == 4
    # f is already surjective onto Z, so its image instance is closed
    img_f = [i for i in r1.instances if i.kind == "image" and i.key == ("f",)]
    assert img_f and img_f[0].status == "closed"
    term = [i for i in r1.instances if i.kind == "terminal"]
    assert term[0].status == "closed" and term[0].realization == ("Z",)


def test_empty_seed_creates_only_the_terminal(collapse):
    res = coherent_closure(collapse, [], [], rounds=4)
    assert [i.kind for i in res.rounds[0].instances] == ["terminal"]
    assert res.fixed_point


def test_closing_a_closed_fragment_is_idempotent(singleton):
    once = coherent_closure(
        singleton, ["S"], list(singleton.cat.arrows), rounds=3).fragment()
    again = coherent_closure(once, list(once.cat.objects),
                             list(once.cat.arrows), rounds=2)
    assert again.fixed_point and len(again.rounds) == 1
    assert set(again.sub_objects) == set(once.cat.objects)


def test_budget_and_fixed_point_refusals(collapse):
    with pytest.raises(ClosureBudgetError):
        coherent_closure(collapse, ["X", "Z"], ["f"], rounds=3, max_objects=6)
    with pytest.raises(ClosureBudgetError):
        coherent_closure(collapse, ["X", "Z"], ["f"], rounds=1,
                         require_fixed_point=True, max_objects=500)


def test_cocone_factors_through_the_closure(collapse, singleton):
    pt = terminal_category()
    star = pt.objects[0]
    F1 = FinFunctor(pt, collapse.cat, {star: "X"}, {pt.identity[star]: "id_X"})
    F2 = FinFunctor(pt, collapse.cat, {star: "Z"}, {pt.identity[star]: "id_Z"})
    fac = factor_cocone_through_closure(collapse, [F1, F2], rounds=1,
                                        max_objects=500)
    assert len(fac.factors) == 2
    for orig, through in zip([F1, F2], fac.factors):
        assert through.obj == orig.obj

    closed = coherent_closure(
        singleton, ["S"], list(singleton.cat.arrows), rounds=3).fragment()
    G = FinFunctor(pt, closed.cat, {star: "S"},
                   {pt.identity[star]: closed.cat.identity["S"]})
    fac2 = factor_cocone_through_closure(closed, [G], rounds=2)
    assert fac2.closure.fixed_point
    assert fac2.factors[0].obj == G.obj


def test_closure_markers_feed_the_diagram_checker(collapse):
    frag = coherent_closure(collapse, ["X", "Z"], ["f"], rounds=2,
                            max_objects=500).fragment()
    mk = frag.cat.markers
    assert "terminal" in mk
    d = canon.MarkedDiagram("terminal", (), (mk["terminal"],))
    v = canon.verify_diagram_property(frag, d)
    assert v.semantic and v.sequent and v.agree
