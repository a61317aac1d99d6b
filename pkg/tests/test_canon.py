import pytest

from cohwb import canon, semantics
from cohwb.canon import MalformedDiagram, MarkedDiagram
from cohwb.fincat import FragmentBuilder


@pytest.fixture(scope="module")
def split_pair():
    """T = {t}, A = {0, 1}, f : A -> T collapsing, g : T -> A picking 0."""
    b = FragmentBuilder()
    b.add_object("T", ("t",))
    b.add_object("A", ("0", "1"))
    b.add_arrow("f", "A", "T", {"0": "t", "1": "t"})
    b.add_arrow("g", "T", "A", {"t": "0"})
    b.ensure_identities()
    b.close_composition()
    return b.build()


def test_internal_theory_holds_in_the_fragment_itself(split_pair):
    thy = canon.internal_theory(split_pair.cat)
    assert set(thy.signature.sorts) == {"T", "A"}
    M = canon.identical_structure(split_pair)
    assert semantics.validate_structure(M, thy.signature) == []
    assert semantics.is_model(M, thy)


def test_internal_theory_of_iso_has_iso_models_only(jiso):
    thy = canon.internal_theory(jiso)
    for M in semantics.enumerate_models(thy, 2):
        iu = M.sorts["u"]
        iv = M.sorts["v"]
        # i and j interpret as mutually inverse maps
        im = M.funs["i"]
        jm = M.funs["j"]
        assert len(iu) == len(iv)
        for x in iu:
            assert jm[(im[(x,)],)] == x


def test_pinned_verdicts_on_the_split_pair(split_pair):
    cases = {
        ("terminal", (), ("T",)): True,
        ("initial", (), ("T",)): False,
        ("mono", ("g",), ()): True,
        ("mono", ("f",), ()): False,
        ("surjective", ("f",), ()): True,
        ("surjective", ("g",), ()): False,
        ("identity", ("id_A",), ()): True,
        ("identity", ("(g.f)",), ()): False,
        ("triangle", ("f", "g", "(g.f)"), ()): True,
        ("triangle", ("f", "id_T", "f"), ()): True,
        ("triangle", ("f", "g", "id_A"), ()): False,
        # A with projections (f, id_A) is a product of T and A
        ("product", ("f", "id_A"), ()): True,
        ("product", ("f", "f"), ()): False,
        # g equalizes id_A and g.f (the fixed points of 'collapse then pick 0')
        ("equalizer", ("g", "id_A", "(g.f)"), ()): True,
        ("equalizer", ("g", "id_A", "id_A"), ()): False,
        ("sup", ("g", "g", "g"), ()): True,
        ("inf", ("g", "g", "id_A"), ()): True,
        ("inf", ("g", "id_A", "id_A"), ()): False,
    }
    for (tag, arrows, objects), want in cases.items():
        v = canon.verify_diagram_property(
            split_pair, MarkedDiagram(tag, arrows=arrows, objects=objects))
        assert v.semantic is want, (tag, arrows, objects)
        assert v.sequent is want, (tag, arrows, objects)
        assert v.agree


def test_semantic_and_sequent_verdicts_agree_everywhere(split_pair):
    ds = list(canon.well_shaped_diagrams(split_pair))
    assert len(ds) > 50
    for d in ds:
        v = canon.verify_diagram_property(split_pair, d)
        assert v.agree, (d.tag, d.arrows, d.objects)


def test_internal_sequents_are_coherent_over_the_language(split_pair):
    from cohwb.logic import wf_check
    from cohwb.logic import Theory
    sig = canon.canonical_language(split_pair.cat)
    d = MarkedDiagram("terminal", objects=("T",))
    seqs = canon.internal_sequents(split_pair.cat, d)
    assert seqs
    thy = Theory(sig, tuple(seqs))
    assert wf_check(thy, require_coherent=True) == []


def test_shape_diagnostics_and_malformed_errors(split_pair):
    cat = split_pair.cat
    assert canon.shape_diagnostics(cat, MarkedDiagram("mono", arrows=("g",))) == []
    assert canon.shape_diagnostics(cat, MarkedDiagram("mono", arrows=("f", "g")))
    # identity needs an endo-arrow
    assert canon.shape_diagnostics(cat, MarkedDiagram("identity", arrows=("f",)))
    # triangle legs must be composable with matching composite endpoints
    assert canon.shape_diagnostics(
        cat, MarkedDiagram("triangle", arrows=("g", "g", "g")))
    with pytest.raises(MalformedDiagram):
        canon.verify_diagram_property(
            split_pair, MarkedDiagram("mono", arrows=("nope",)))
    with pytest.raises(MalformedDiagram):
        canon.verify_diagram_property(
            split_pair, MarkedDiagram("frobnicate", arrows=("f",)))


def test_well_shaped_matches_shape_diagnostics(split_pair):
    for d in canon.well_shaped_diagrams(split_pair):
        assert canon.well_shaped(split_pair, d)
        assert canon.shape_diagnostics(split_pair.cat, d) == []
