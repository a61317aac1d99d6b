import json

import pytest

from cohwb.fincat import (
    FinCat, FinFunctor, FragmentBuilder, IsofibrationRequired, TwoCell,
    are_equivalent, cat_from_json, cat_to_dot, cat_to_json, cell_eq,
    cell_from_json, cell_to_json, compose_functors, discrete_category,
    empty_category, enumerate_functors, enumerate_natural_isos, find_equivalence,
    find_isomorphism, functor_eq, functor_from_json, functor_to_json,
    identity_cell, identity_functor, inverse_arrow, invert_cell, is_iso,
    is_isofibration, is_terminal_object, iso_lifts, product_category,
    pullback_category, terminal_category, validate_category, validate_fragment,
    validate_functor, validate_two_cell, vcompose,
)


def walking_arrow():
    return FinCat(
        objects=("0", "1"),
        arrows=("id0", "id1", "a"),
        src={"id0": "0", "id1": "1", "a": "0"},
        tgt={"id0": "0", "id1": "1", "a": "1"},
        identity={"0": "id0", "1": "id1"},
        comp={("id0", "id0"): "id0", ("id1", "id1"): "id1",
              ("a", "id0"): "a", ("id1", "a"): "a"},
    )


def test_validate_category_accepts_and_rejects(jiso):
    assert validate_category(jiso) == []
    assert validate_category(walking_arrow()) == []
    broken = walking_arrow()
    broken.comp[("id1", "a")] = "id1"   # composite with wrong source
    assert validate_category(broken)


def test_walking_iso_fixture_is_what_it_claims(jiso):
    assert sorted(jiso.objects) == ["u", "v"]
    assert is_iso(jiso, "i") and inverse_arrow(jiso, "i") == "j"
    assert inverse_arrow(jiso, "id_u") == "id_u"
    # every hom-set is a singleton, so both objects are terminal
    assert is_terminal_object(jiso, "u") and is_terminal_object(jiso, "v")
    # u and v are isomorphic but distinct, so J is equivalent to the point
    assert are_equivalent(jiso, terminal_category())
    assert find_isomorphism(jiso, terminal_category()) is None


def test_product_category_counts():
    two = discrete_category(["a", "b"])
    arrow = walking_arrow()
    prod, p, q = product_category(two, arrow)
    assert validate_category(prod) == []
    assert len(prod.objects) == 4
    assert len(prod.arrows) == 6
    assert validate_functor(p) == [] and validate_functor(q) == []
    for f in prod.arrows:
        assert prod.src[f] in prod.objects


def test_empty_and_terminal_special_cases():
    e = empty_category()
    t = terminal_category()
    assert e.objects == () and validate_category(e) == []
    assert len(t.objects) == 1 and is_terminal_object(t, t.objects[0])
    fs = list(enumerate_functors(e, t))
    assert len(fs) == 1   # the empty functor
    assert list(enumerate_functors(t, e)) == []


def test_functor_validation_and_composition(jiso, pt):
    bang = FinFunctor(jiso, pt, {o: pt.objects[0] for o in jiso.objects},
                      {a: pt.identity[pt.objects[0]] for a in jiso.arrows})
    assert validate_functor(bang) == []
    pick = FinFunctor(pt, jiso, {pt.objects[0]: "u"},
                      {pt.identity[pt.objects[0]]: "id_u"})
    assert validate_functor(pick) == []
    around = compose_functors(pick, bang)   # J -> pt -> J
    assert functor_eq(compose_functors(identity_functor(pt), bang), bang)
    assert around.obj == {o: "u" for o in jiso.objects}
    # a non-functorial assignment is reported
    bad = FinFunctor(jiso, jiso, {"u": "u", "v": "u"},
                     dict.fromkeys(jiso.arrows, "id_u"))
    bad.arr["i"] = "i"
    assert validate_functor(bad)


def test_two_cells_compose_and_invert(jiso, pt):
    pick_u = FinFunctor(pt, jiso, {pt.objects[0]: "u"},
                        {pt.identity[pt.objects[0]]: "id_u"})
    pick_v = FinFunctor(pt, jiso, {pt.objects[0]: "v"},
                        {pt.identity[pt.objects[0]]: "id_v"})
    nu = TwoCell(pick_u, pick_v, {pt.objects[0]: "i"})
    assert validate_two_cell(nu) == []
    back = invert_cell(nu)
    assert back is not None
    round_trip = vcompose(back, nu)
    assert cell_eq(round_trip, identity_cell(pick_u))
    isos = list(enumerate_natural_isos(pick_u, pick_v))
    assert len(isos) == 1 and isos[0].component == {pt.objects[0]: "i"}


def test_isofibration_gate_on_pullbacks(jiso, pt):
    pick_u = FinFunctor(pt, jiso, {pt.objects[0]: "u"},
                        {pt.identity[pt.objects[0]]: "id_u"})
    pick_v = FinFunctor(pt, jiso, {pt.objects[0]: "v"},
                        {pt.identity[pt.objects[0]]: "id_v"})
    assert not is_isofibration(pick_u)
    assert iso_lifts(pick_u, pt.objects[0], "i") == []
    with pytest.raises(IsofibrationRequired):
        pullback_category(pick_u, pick_v)
    forced, P, Q = pullback_category(pick_u, pick_v, force=True)
    assert forced.objects == ()   # strict pullback of the two points is empty
    # identity functors are isofibrations; their pullback is the whole thing
    idj = identity_functor(jiso)
    assert is_isofibration(idj)
    back, P2, Q2 = pullback_category(idj, idj)
    assert len(back.objects) == len(jiso.objects)


def test_cat_json_round_trip_bit_identical(jiso):
    text = cat_to_json(jiso)
    cat, frag = cat_from_json(text)
    assert frag is None
    assert cat_to_json(cat) == text
    assert validate_category(cat) == []


def test_cat_json_with_fragment_round_trip():
    b = FragmentBuilder()
    b.add_object("T", ("0",))
    b.add_object("A", ("0", "1"))
    b.add_arrow("f", "A", "T", {"0": "0", "1": "0"})
    b.ensure_identities()
    b.close_composition()
    frag = b.build()
    assert validate_fragment(frag) == []
    text = cat_to_json(frag.cat, frag)
    cat, frag2 = cat_from_json(text)
    assert frag2 is not None
    assert cat_to_json(cat, frag2) == text


def test_functor_and_cell_json_round_trips(jiso, pt):
    pick_u = FinFunctor(pt, jiso, {pt.objects[0]: "u"},
                        {pt.identity[pt.objects[0]]: "id_u"})
    ftext = functor_to_json(pick_u)
    again = functor_from_json(ftext)
    assert functor_to_json(again) == ftext
    pick_v = FinFunctor(pt, jiso, {pt.objects[0]: "v"},
                        {pt.identity[pt.objects[0]]: "id_v"})
    nu = TwoCell(pick_u, pick_v, {pt.objects[0]: "i"})
    ctext = cell_to_json(nu)
    nu2 = cell_from_json(ctext)
    assert cell_to_json(nu2) == ctext
    # a cell whose component is not a valid arrow is rejected on read
    doc = json.loads(ctext)
    doc["components"][pt.objects[0]] = "nope"
    with pytest.raises(ValueError):
        cell_from_json(json.dumps(doc))


def test_cat_to_dot_mentions_every_non_identity_arrow(jiso):
    dot = cat_to_dot(jiso, "J")
    assert dot.startswith("digraph")
    for a in jiso.arrows:
        if a not in jiso.identity.values():
            assert a in dot


def test_fragment_builder_dedups_and_renames():
    b = FragmentBuilder()
    b.add_object("X", ("0", "1"))
    b.add_object("Y", ("a",))
    first = b.add_arrow("f", "X", "Y", {"0": "a", "1": "a"})
    dup = b.add_arrow("g", "X", "Y", {"0": "a", "1": "a"})
    assert first == dup == "f"   # same graph, one arrow
    assert b.find_arrow("X", "Y", {"0": "a", "1": "a"}) == "f"
    b.add_object("Z", ("z",))
    clash = b.add_arrow("f", "Y", "Z", {"a": "z"})
    assert clash != "f" and clash.startswith("f")
    b.ensure_identities()
    b.close_composition()
    frag = b.build()
    assert validate_fragment(frag) == []


def test_equivalence_search_finds_the_skeleton(jiso):
    found = find_equivalence(jiso, terminal_category())
    assert found is not None
    F, G, eta, eps = found
    assert validate_two_cell(eta) == [] and validate_two_cell(eps) == []
