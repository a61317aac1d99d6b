import itertools

import pytest

import cohwb.canon as canon
from cohwb.colimits import (
    ChainDiagram, NotFilteredError, StageBoundError, chain_colimit,
    factor_through_stage, filtered_set_classes, is_filtered, omega_chain,
    validate_chain, verify_colimit_coherent,
)
from cohwb.fincat import (
    FinCat, FinFunctor, FragmentBuilder, compose_functors, discrete_category,
    find_isomorphism, functor_eq, identity_functor, terminal_category,
    validate_fragment,
)


def poset(n):
    objs = [str(i) for i in range(n)]
    arrs = [f"r{i}{j}" for i in range(n) for j in range(i, n)]
    src = {f"r{i}{j}": str(i) for i in range(n) for j in range(i, n)}
    tgt = {f"r{i}{j}": str(j) for i in range(n) for j in range(i, n)}
    ident = {str(i): f"r{i}{i}" for i in range(n)}
    comp = {(f"r{j}{k}", f"r{i}{j}"): f"r{i}{k}"
            for i in range(n) for j in range(i, n) for k in range(j, n)}
    return FinCat(tuple(objs), tuple(arrs), src, tgt, ident, comp)


def closed_powerset_fragment(universe):
    """Subset lattice of `universe` as a concrete fragment (inclusions)."""
    b = FragmentBuilder()
    names = {}
    subsets = []
    for r in range(len(universe) + 1):
        for com in itertools.combinations(universe, r):
            nm = "{" + ",".join(com) + "}"
            b.add_object(nm, com)
            names[com] = nm
            subsets.append(com)
    for s in subsets:
        for t in subsets:
            if set(s) <= set(t):
                b.add_arrow(f"i_{names[s]}_{names[t]}", names[s], names[t],
                            {x: x for x in s})
    b.ensure_identities()
    b.close_composition()
    return b.build()


@pytest.fixture(scope="module")
def powerset_chain():
    f1 = closed_powerset_fragment(["0"])
    f2 = closed_powerset_fragment(["0", "1"])
    omap = {o: o for o in f1.cat.objects}
    amap = {}
    b2 = FragmentBuilder.from_fragment(f2)
    for a in f1.cat.arrows:
        amap[a] = b2.find_arrow(f1.cat.src[a], f1.cat.tgt[a], f1.funs[a])
        assert amap[a] is not None
    step = FinFunctor(f1.cat, f2.cat, omap, amap)
    d = omega_chain([f1.cat, f2.cat], [step], fragments=[f1, f2])
    assert validate_chain(d) == []
    return f1, f2, chain_colimit(d)


def test_discrete_chain_classes_and_oracle():
    c1 = discrete_category(["a"])
    c2 = discrete_category(["a", "b"])
    c3 = discrete_category(["a", "b", "c"])
    s12 = FinFunctor(c1, c2, {"a": "a"}, {"id_a": "id_a"})
    s23 = FinFunctor(c2, c3, {"a": "a", "b": "b"},
                     {"id_a": "id_a", "id_b": "id_b"})
    d = omega_chain([c1, c2, c3], [s12, s23])
    assert validate_chain(d) == []
    assert is_filtered(d.index)
    res = chain_colimit(d)
    assert len(res.colimit.objects) == 3
    # a appears at stage 0 and keeps its birth name through later stages
    assert res.obj_class[("0", "a")] == res.obj_class[("2", "a")] == "a@0"
    assert res.obj_class[("1", "b")] == "b@1"

    # agreement with the bare filtered-quotient computation
    items = {i: list(d.stages[i].objects) for i in d.index.objects}
    oracle = filtered_set_classes(d, items, lambda u, x: d.transitions[u].obj[x])
    got = {}
    for (i, x), nm in res.obj_class.items():
        got.setdefault(nm, set()).add((i, x))
    assert (sorted(map(sorted, oracle.values()))
            == sorted(map(sorted, got.values())))


def test_poset_chain_colimit_is_the_top_stage():
    p1, p2, p3 = poset(1), poset(2), poset(3)
    inc12 = FinFunctor(p1, p2, {"0": "0"}, {"r00": "r00"})
    inc23 = FinFunctor(p2, p3, {"0": "0", "1": "1"},
                       {"r00": "r00", "r01": "r01", "r11": "r11"})
    d = omega_chain([p1, p2, p3], [inc12, inc23])
    res = chain_colimit(d)
    assert find_isomorphism(res.colimit, p3) is not None
    # composites of classes are classes of composites
    a01 = res.arr_class[("2", "r01")]
    a12 = res.arr_class[("2", "r12")]
    assert res.colimit.comp[(a12, a01)] == res.arr_class[("2", "r02")]


def test_non_filtered_index_is_refused():
    c1 = discrete_category(["a"])
    bad_idx = discrete_category(["i", "j"])
    bad = ChainDiagram(bad_idx, {"i": c1, "j": c1},
                       {"id_i": identity_functor(c1),
                        "id_j": identity_functor(c1)})
    assert not is_filtered(bad_idx)
    with pytest.raises(NotFilteredError):
        chain_colimit(bad)


def test_fragment_chain_colimit_is_coherent(powerset_chain):
    f1, f2, res = powerset_chain
    assert validate_fragment(f1) == [] and validate_fragment(f2) == []
    assert verify_colimit_coherent(res) == []
    # every top-stage object reaches the colimit
    assert len(res.colimit.objects) == len(f2.cat.objects)


def test_factor_through_least_stage(powerset_chain):
    f1, f2, res = powerset_chain
    pt = terminal_category()
    star = pt.objects[0]
    low = FinFunctor(pt, res.colimit,
                     {star: res.obj_class[("0", "{0}")]},
                     {pt.identity[star]: res.arr_class[("0", f1.cat.identity["{0}"])]})
    fac = factor_through_stage(res, low)
    assert fac.stage == "0"
    high = FinFunctor(pt, res.colimit,
                      {star: res.obj_class[("1", "{1}")]},
                      {pt.identity[star]: res.arr_class[("1", f2.cat.identity["{1}"])]})
    fac2 = factor_through_stage(res, high)
    assert fac2.stage == "1"
    # strictness: coprojection after the factor recovers the original functor
    assert functor_eq(
        compose_functors(res.coprojections[fac2.stage], fac2.functor), high)


def test_factor_respects_marked_diagrams(powerset_chain):
    f1, _, res = powerset_chain
    pt = terminal_category()
    star = pt.objects[0]
    into_empty = FinFunctor(
        pt, res.colimit,
        {star: res.obj_class[("0", "{}")]},
        {pt.identity[star]: res.arr_class[("0", f1.cat.identity["{}"])]})
    # the empty subset is initial at every stage but terminal at none
    with pytest.raises(StageBoundError):
        factor_through_stage(res, into_empty,
                             respect=[canon.MarkedDiagram("terminal", (), (star,))])
    fac = factor_through_stage(res, into_empty,
                               respect=[canon.MarkedDiagram("initial", (), (star,))])
    assert fac.stage == "0"
