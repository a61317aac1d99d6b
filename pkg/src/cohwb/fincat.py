"""Finite categories, functors, natural isomorphisms, and set fragments.

A FinCat is given by explicit tables; a SetFragment pairs one with a faithful
realization by finite sets and functions.  Everything here is brute-force and
exact: universal properties are checked by enumerating all candidate cones and
mediating arrows.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Set, Tuple


class IsofibrationRequired(ValueError):
    """Strict pullbacks of categories are taken along an isofibration leg."""


# ---------------------------------------------------------------------------
# categories


@dataclass
class FinCat:
    objects: Tuple[str, ...]
    arrows: Tuple[str, ...]
    src: Dict[str, str]
    tgt: Dict[str, str]
    identity: Dict[str, str]               # object -> its identity arrow
    comp: Dict[Tuple[str, str], str]       # (g, f) -> g after f
    markers: Dict[str, object] = field(default_factory=dict)

    def hom(self, x: str, y: str) -> List[str]:
        return [a for a in self.arrows if self.src[a] == x and self.tgt[a] == y]

    def compose(self, g: str, f: str) -> str:
        if self.tgt[f] != self.src[g]:
            raise ValueError(f"{g} after {f}: not composable")
        return self.comp[(g, f)]

    def is_identity(self, a: str) -> bool:
        return self.identity.get(self.src[a]) == a

    def composable_pairs(self) -> Iterator[Tuple[str, str]]:
        for g in self.arrows:
            for f in self.arrows:
                if self.tgt[f] == self.src[g]:
                    yield g, f


def validate_category(c: FinCat) -> List[str]:
    """Empty iff the tables describe a category and markers are well-placed."""
    out: List[str] = []
    objs, arrs = set(c.objects), set(c.arrows)
    if len(objs) != len(c.objects):
        out.append("duplicate object names")
    if len(arrs) != len(c.arrows):
        out.append("duplicate arrow names")
    for a in c.arrows:
        if c.src.get(a) not in objs or c.tgt.get(a) not in objs:
            out.append(f"arrow {a}: src/tgt missing or not an object")
    for x in c.objects:
        i = c.identity.get(x)
        if i not in arrs:
            out.append(f"object {x}: no identity arrow")
        elif c.src[i] != x or c.tgt[i] != x:
            out.append(f"identity of {x} is not an endo-arrow on {x}")
    for g, f in c.composable_pairs():
        gf = c.comp.get((g, f))
        if gf is None:
            out.append(f"missing composite {g} after {f}")
            continue
        if gf not in arrs:
            out.append(f"composite {g} after {f} = {gf} is not an arrow")
            continue
        if c.src[gf] != c.src[f] or c.tgt[gf] != c.tgt[g]:
            out.append(f"composite {g} after {f} has wrong src/tgt")
    for (g, f) in c.comp:
        if g not in arrs or f not in arrs or c.tgt.get(f) != c.src.get(g):
            out.append(f"composition table row ({g},{f}) is not a composable pair")
    if out:
        return out
    for f in c.arrows:
        if c.comp[(f, c.identity[c.src[f]])] != f:
            out.append(f"{f} after identity differs from {f}")
        if c.comp[(c.identity[c.tgt[f]], f)] != f:
            out.append(f"identity after {f} differs from {f}")
    for h in c.arrows:
        for g in c.arrows:
            if c.tgt[h] != c.src[g]:
                continue
            for f in c.arrows:
                if c.tgt[g] != c.src[f]:
                    continue
                if c.comp[(f, c.comp[(g, h)])] != c.comp[(c.comp[(f, g)], h)]:
                    out.append(f"associativity fails on ({f},{g},{h})")
    out.extend(_validate_markers(c))
    return out


def _validate_markers(c: FinCat) -> List[str]:
    out: List[str] = []
    m = c.markers
    arrs, objs = set(c.arrows), set(c.objects)
    for key in ("mono", "surjective"):
        for a in m.get(key, ()):
            if a not in arrs:
                out.append(f"marker {key}: unknown arrow {a}")
    for key in ("terminal", "initial"):
        x = m.get(key)
        if x is not None and x not in objs:
            out.append(f"marker {key}: unknown object {x}")
    for cone in m.get("products", ()):
        legs = cone.get("legs", [])
        if len(legs) != 2 or any(a not in arrs for a in legs):
            out.append(f"product marker {cone}: needs two arrows")
        elif c.src[legs[0]] != c.src[legs[1]]:
            out.append(f"product marker {cone}: legs must share a source")
    for fork in m.get("equalizers", ()):
        eps, f, g = fork.get("mono"), fork.get("left"), fork.get("right")
        if any(a not in arrs for a in (eps, f, g)):
            out.append(f"equalizer marker {fork}: unknown arrow")
        elif not (c.tgt[eps] == c.src[f] == c.src[g] and c.tgt[f] == c.tgt[g]):
            out.append(f"equalizer marker {fork}: shape mismatch")
    for key in ("sups", "infs"):
        for d in m.get(key, ()):
            outer, family = d.get("outer"), d.get("family", [])
            if outer not in arrs or any(a not in arrs for a in family):
                out.append(f"{key} marker {d}: unknown arrow")
            elif any(c.tgt[a] != c.tgt[outer] for a in family):
                out.append(f"{key} marker {d}: family must share the outer target")
    return out


# -- small constructions ----------------------------------------------------


def terminal_category() -> FinCat:
    return FinCat(("*",), ("id",), {"id": "*"}, {"id": "*"}, {"*": "id"},
                  {("id", "id"): "id"})


def empty_category() -> FinCat:
    return FinCat((), (), {}, {}, {}, {})


def discrete_category(names: Sequence[str]) -> FinCat:
    ids = {x: f"id_{x}" for x in names}
    return FinCat(
        tuple(names), tuple(ids[x] for x in names),
        {ids[x]: x for x in names}, {ids[x]: x for x in names}, dict(ids),
        {(ids[x], ids[x]): ids[x] for x in names},
    )


def product_category(a: FinCat, b: FinCat) -> Tuple[FinCat, "FinFunctor", "FinFunctor"]:
    def nm(x: str, y: str) -> str:
        return f"({x}|{y})"

    objects = tuple(nm(x, y) for x in a.objects for y in b.objects)
    arrows = tuple(nm(f, g) for f in a.arrows for g in b.arrows)
    src = {nm(f, g): nm(a.src[f], b.src[g]) for f in a.arrows for g in b.arrows}
    tgt = {nm(f, g): nm(a.tgt[f], b.tgt[g]) for f in a.arrows for g in b.arrows}
    ident = {nm(x, y): nm(a.identity[x], b.identity[y]) for x in a.objects for y in b.objects}
    comp = {}
    for f1, g1 in itertools.product(a.arrows, b.arrows):
        for f2, g2 in itertools.product(a.arrows, b.arrows):
            if a.tgt[f2] == a.src[f1] and b.tgt[g2] == b.src[g1]:
                comp[(nm(f1, g1), nm(f2, g2))] = nm(a.comp[(f1, f2)], b.comp[(g1, g2)])
    cat = FinCat(objects, arrows, src, tgt, ident, comp)
    p1 = FinFunctor(cat, a, {nm(x, y): x for x in a.objects for y in b.objects},
                    {nm(f, g): f for f in a.arrows for g in b.arrows})
    p2 = FinFunctor(cat, b, {nm(x, y): y for x in a.objects for y in b.objects},
                    {nm(f, g): g for f in a.arrows for g in b.arrows})
    return cat, p1, p2


# -- arrow-level properties ---------------------------------------------------


def inverse_arrow(c: FinCat, f: str) -> Optional[str]:
    for g in c.hom(c.tgt[f], c.src[f]):
        if c.comp[(g, f)] == c.identity[c.src[f]] and c.comp[(f, g)] == c.identity[c.tgt[f]]:
            return g
    return None


def is_iso(c: FinCat, f: str) -> bool:
    return inverse_arrow(c, f) is not None


def is_mono_arrow(c: FinCat, f: str) -> bool:
    x = c.src[f]
    for w in c.objects:
        for u in c.hom(w, x):
            for v in c.hom(w, x):
                if u != v and c.comp[(f, u)] == c.comp[(f, v)]:
                    return False
    return True


def is_epi_arrow(c: FinCat, f: str) -> bool:
    y = c.tgt[f]
    for w in c.objects:
        for u in c.hom(y, w):
            for v in c.hom(y, w):
                if u != v and c.comp[(u, f)] == c.comp[(v, f)]:
                    return False
    return True


def is_terminal_object(c: FinCat, x: str) -> bool:
    return all(len(c.hom(w, x)) == 1 for w in c.objects)


def is_initial_object(c: FinCat, x: str) -> bool:
    return all(len(c.hom(x, w)) == 1 for w in c.objects)


# ---------------------------------------------------------------------------
# functors and natural isomorphisms


@dataclass
class FinFunctor:
    source: FinCat
    target: FinCat
    obj: Dict[str, str]
    arr: Dict[str, str]

    def __call__(self, name: str) -> str:
        if name in self.arr:
            return self.arr[name]
        return self.obj[name]


def validate_functor(F: FinFunctor) -> List[str]:
    out: List[str] = []
    A, B = F.source, F.target
    for x in A.objects:
        if F.obj.get(x) not in set(B.objects):
            out.append(f"object {x}: image missing or not in target")
    for f in A.arrows:
        if F.arr.get(f) not in set(B.arrows):
            out.append(f"arrow {f}: image missing or not in target")
    if out:
        return out
    for f in A.arrows:
        if B.src[F.arr[f]] != F.obj[A.src[f]] or B.tgt[F.arr[f]] != F.obj[A.tgt[f]]:
            out.append(f"arrow {f}: image has wrong src/tgt")
    if out:
        # images break src/tgt, so composite lookups below would be undefined
        return out
    for x in A.objects:
        if F.arr[A.identity[x]] != B.identity[F.obj[x]]:
            out.append(f"identity of {x} not preserved")
    for g, f in A.composable_pairs():
        if F.arr[A.comp[(g, f)]] != B.comp[(F.arr[g], F.arr[f])]:
            out.append(f"composition {g} after {f} not preserved")
    return out


def identity_functor(c: FinCat) -> FinFunctor:
    return FinFunctor(c, c, {x: x for x in c.objects}, {f: f for f in c.arrows})


def compose_functors(G: FinFunctor, F: FinFunctor) -> FinFunctor:
    if G.source is not F.target and G.source != F.target:
        raise ValueError("functors not composable")
    return FinFunctor(F.source, G.target,
                      {x: G.obj[F.obj[x]] for x in F.source.objects},
                      {f: G.arr[F.arr[f]] for f in F.source.arrows})


def functor_eq(F: FinFunctor, G: FinFunctor) -> bool:
    return F.obj == G.obj and F.arr == G.arr


@dataclass
class TwoCell:
    """Natural isomorphism between parallel functors, given componentwise."""
    source: FinFunctor
    target: FinFunctor
    component: Dict[str, str]        # object of the common domain -> arrow of codomain


def validate_two_cell(t: TwoCell) -> List[str]:
    out: List[str] = []
    F, G = t.source, t.target
    if F.source != G.source or F.target != G.target:
        return ["source and target functors are not parallel"]
    A, B = F.source, F.target
    for x in A.objects:
        cx = t.component.get(x)
        if cx not in set(B.arrows):
            out.append(f"component at {x}: missing or not an arrow")
            continue
        if B.src[cx] != F.obj[x] or B.tgt[cx] != G.obj[x]:
            out.append(f"component at {x}: wrong src/tgt")
        elif not is_iso(B, cx):
            out.append(f"component at {x}: not iso")
    if out:
        return out
    for f in A.arrows:
        x, y = A.src[f], A.tgt[f]
        if B.comp[(t.component[y], F.arr[f])] != B.comp[(G.arr[f], t.component[x])]:
            out.append(f"naturality square at {f} does not commute")
    return out


def identity_cell(F: FinFunctor) -> TwoCell:
    B = F.target
    return TwoCell(F, F, {x: B.identity[F.obj[x]] for x in F.source.objects})


def vcompose(b: TwoCell, a: TwoCell) -> TwoCell:
    """b after a (vertical composition)."""
    if not functor_eq(a.target, b.source):
        raise ValueError("2-cells not vertically composable")
    B = a.source.target
    return TwoCell(a.source, b.target,
                   {x: B.comp[(b.component[x], a.component[x])]
                    for x in a.source.source.objects})


def invert_cell(t: TwoCell) -> TwoCell:
    B = t.source.target
    comp = {}
    for x, cx in t.component.items():
        inv = inverse_arrow(B, cx)
        if inv is None:
            raise ValueError(f"component at {x} is not invertible")
        comp[x] = inv
    return TwoCell(t.target, t.source, comp)


def precompose_cell(t: TwoCell, H: FinFunctor) -> TwoCell:
    """Whisker on the right by H: components t_{H(z)} (a cell t.source∘H ⇒ t.target∘H)."""
    return TwoCell(compose_functors(t.source, H), compose_functors(t.target, H),
                   {z: t.component[H.obj[z]] for z in H.source.objects})


def postcompose_cell(K: FinFunctor, t: TwoCell) -> TwoCell:
    """Whisker on the left by K: components K(t_x) (a cell K∘t.source ⇒ K∘t.target)."""
    return TwoCell(compose_functors(K, t.source), compose_functors(K, t.target),
                   {x: K.arr[t.component[x]] for x in t.source.source.objects})


def cell_eq(a: TwoCell, b: TwoCell) -> bool:
    return a.component == b.component and functor_eq(a.source, b.source) \
        and functor_eq(a.target, b.target)


# -- enumeration ---------------------------------------------------------------


def enumerate_functors(A: FinCat, B: FinCat) -> Iterator[FinFunctor]:
    """All functors A -> B, in canonical order."""
    if not A.objects:
        yield FinFunctor(A, B, {}, {})
        return
    non_id = [f for f in A.arrows if not A.is_identity(f)]
    for omap in itertools.product(B.objects, repeat=len(A.objects)):
        obj = dict(zip(A.objects, omap))
        arr0 = {A.identity[x]: B.identity[obj[x]] for x in A.objects}
        spaces = [B.hom(obj[A.src[f]], obj[A.tgt[f]]) for f in non_id]
        for pick in itertools.product(*spaces):
            arr = dict(arr0)
            arr.update(zip(non_id, pick))
            ok = True
            for g, f in A.composable_pairs():
                if arr[A.comp[(g, f)]] != B.comp[(arr[g], arr[f])]:
                    ok = False
                    break
            if ok:
                yield FinFunctor(A, B, obj, arr)


def enumerate_natural_isos(F: FinFunctor, G: FinFunctor) -> Iterator[TwoCell]:
    """All natural isomorphisms F => G, in canonical order."""
    if F.source != G.source or F.target != G.target:
        return
    A, B = F.source, F.target
    spaces = [[a for a in B.hom(F.obj[x], G.obj[x]) if is_iso(B, a)] for x in A.objects]
    for pick in itertools.product(*spaces):
        t = TwoCell(F, G, dict(zip(A.objects, pick)))
        if not validate_two_cell(t):
            yield t


def find_isomorphism(A: FinCat, B: FinCat) -> Optional[FinFunctor]:
    """An invertible functor A -> B, if one exists."""
    if len(A.objects) != len(B.objects) or len(A.arrows) != len(B.arrows):
        return None
    for F in enumerate_functors(A, B):
        if len(set(F.obj.values())) == len(A.objects) and \
           len(set(F.arr.values())) == len(A.arrows):
            return F
    return None


def find_equivalence(A: FinCat, B: FinCat) -> Optional[Tuple[FinFunctor, FinFunctor, TwoCell, TwoCell]]:
    """(F, G, unit 1_A => GF, counit FG => 1_B) by exhaustive search."""
    for F in enumerate_functors(A, B):
        for G in enumerate_functors(B, A):
            unit = next(enumerate_natural_isos(identity_functor(A), compose_functors(G, F)), None)
            if unit is None:
                continue
            counit = next(enumerate_natural_isos(compose_functors(F, G), identity_functor(B)), None)
            if counit is not None:
                return F, G, unit, counit
    return None


def are_equivalent(A: FinCat, B: FinCat) -> bool:
    return find_equivalence(A, B) is not None


# -- isofibrations and strict pullbacks ----------------------------------------


def iso_lifts(F: FinFunctor, c: str, h: str) -> List[str]:
    """Isomorphisms k out of c in the domain with F(k) = h, canonical order."""
    return [k for k in F.source.arrows
            if F.source.src[k] == c and F.arr[k] == h and is_iso(F.source, k)]


def is_isofibration(F: FinFunctor) -> bool:
    B = F.target
    for c in F.source.objects:
        for h in B.arrows:
            if B.src[h] == F.obj[c] and is_iso(B, h) and not iso_lifts(F, c, h):
                return False
    return True


def pullback_category(
    F: FinFunctor, G: FinFunctor, force: bool = False
) -> Tuple[FinCat, FinFunctor, FinFunctor]:
    """Strict pullback of F: A -> D and G: B -> D: pairs with equal images.

    At least one leg must be an isofibration; otherwise the pair construction
    does not have the right universal behaviour up to isomorphism, and the
    call is refused unless ``force`` is set.
    """
    if F.target != G.target:
        raise ValueError("functors have different targets")
    if not force and not (is_isofibration(F) or is_isofibration(G)):
        raise IsofibrationRequired(
            "strict pullbacks of categories require an isofibration leg; "
            "neither functor lifts isomorphisms (pass force=True to build the "
            "bare pair category anyway)")
    A, B = F.source, G.source

    def nm(x: str, y: str) -> str:
        return f"({x}|{y})"

    objects = tuple(nm(x, y) for x in A.objects for y in B.objects
                    if F.obj[x] == G.obj[y])
    arrows = tuple(nm(f, g) for f in A.arrows for g in B.arrows
                   if F.arr[f] == G.arr[g])
    pairs = [(f, g) for f in A.arrows for g in B.arrows if F.arr[f] == G.arr[g]]
    src = {nm(f, g): nm(A.src[f], B.src[g]) for f, g in pairs}
    tgt = {nm(f, g): nm(A.tgt[f], B.tgt[g]) for f, g in pairs}
    ident = {nm(x, y): nm(A.identity[x], B.identity[y])
             for x in A.objects for y in B.objects if F.obj[x] == G.obj[y]}
    comp = {}
    for f1, g1 in pairs:
        for f2, g2 in pairs:
            if A.tgt[f2] == A.src[f1] and B.tgt[g2] == B.src[g1]:
                comp[(nm(f1, g1), nm(f2, g2))] = nm(A.comp[(f1, f2)], B.comp[(g1, g2)])
    cat = FinCat(objects, arrows, src, tgt, ident, comp)
    p1 = FinFunctor(cat, A,
                    {nm(x, y): x for x in A.objects for y in B.objects if F.obj[x] == G.obj[y]},
                    {nm(f, g): f for f, g in pairs})
    p2 = FinFunctor(cat, B,
                    {nm(x, y): y for x in A.objects for y in B.objects if F.obj[x] == G.obj[y]},
                    {nm(f, g): g for f, g in pairs})
    return cat, p1, p2


# -- limits inside a finite category --------------------------------------------


def cone_commutes(cat: FinCat, diagram: FinFunctor, apex: str, legs: Mapping[str, str]) -> bool:
    J = diagram.source
    for j in J.objects:
        leg = legs.get(j)
        if leg is None or cat.src[leg] != apex or cat.tgt[leg] != diagram.obj[j]:
            return False
    for u in J.arrows:
        if cat.comp[(diagram.arr[u], legs[J.src[u]])] != legs[J.tgt[u]]:
            return False
    return True


def enumerate_cones(cat: FinCat, diagram: FinFunctor) -> Iterator[Tuple[str, Dict[str, str]]]:
    J = diagram.source
    for apex in cat.objects:
        spaces = [cat.hom(apex, diagram.obj[j]) for j in J.objects]
        for pick in itertools.product(*spaces):
            legs = dict(zip(J.objects, pick))
            if cone_commutes(cat, diagram, apex, legs):
                yield apex, legs


def is_limit_cone_cat(cat: FinCat, diagram: FinFunctor, apex: str, legs: Mapping[str, str]) -> bool:
    """Universal property by full enumeration of competing cones."""
    if not cone_commutes(cat, diagram, apex, legs):
        return False
    J = diagram.source
    for apex2, legs2 in enumerate_cones(cat, diagram):
        mediators = [m for m in cat.hom(apex2, apex)
                     if all(cat.comp[(legs[j], m)] == legs2[j] for j in J.objects)]
        if len(mediators) != 1:
            return False
    return True


def find_limit_cones(cat: FinCat, diagram: FinFunctor) -> List[Tuple[str, Dict[str, str]]]:
    return [(apex, legs) for apex, legs in enumerate_cones(cat, diagram)
            if is_limit_cone_cat(cat, diagram, apex, legs)]


# ---------------------------------------------------------------------------
# set fragments


@dataclass
class SetFragment:
    cat: FinCat
    sets: Dict[str, Tuple[str, ...]]       # object -> elements
    funs: Dict[str, Dict[str, str]]        # arrow -> graph of a function


def validate_fragment(frag: SetFragment) -> List[str]:
    out = validate_category(frag.cat)
    c = frag.cat
    for x in c.objects:
        if x not in frag.sets:
            out.append(f"object {x}: no realization set")
        elif len(set(frag.sets[x])) != len(frag.sets[x]):
            out.append(f"object {x}: duplicate elements")
    for a in c.arrows:
        fn = frag.funs.get(a)
        if fn is None:
            out.append(f"arrow {a}: no realization function")
            continue
        dom, cod = frag.sets.get(c.src[a], ()), frag.sets.get(c.tgt[a], ())
        if set(fn) != set(dom):
            out.append(f"arrow {a}: function not total on its source set")
        elif any(v not in set(cod) for v in fn.values()):
            out.append(f"arrow {a}: value outside the target set")
    if out:
        return out
    for x in c.objects:
        if frag.funs[c.identity[x]] != {e: e for e in frag.sets[x]}:
            out.append(f"identity of {x}: realization is not the identity function")
    for g, f in c.composable_pairs():
        composed = {e: frag.funs[g][frag.funs[f][e]] for e in frag.sets[c.src[f]]}
        if frag.funs[c.comp[(g, f)]] != composed:
            out.append(f"realization of {g} after {f} disagrees with function composition")
    for x in c.objects:
        for y in c.objects:
            seen: Dict[Tuple[Tuple[str, str], ...], str] = {}
            for a in c.hom(x, y):
                key = tuple(sorted(frag.funs[a].items()))
                if key in seen:
                    out.append(f"arrows {seen[key]} and {a}: equal functions (not faithful)")
                else:
                    seen[key] = a
    return out


def fragment_functor_realizes(F: FinFunctor, A: SetFragment, B: SetFragment) -> List[str]:
    """Diagnostics: F maps A's realization into B's on the nose."""
    out = []
    for x in A.cat.objects:
        if tuple(A.sets[x]) != tuple(B.sets[F.obj[x]]):
            out.append(f"object {x}: realization changes along the functor")
    for a in A.cat.arrows:
        if A.funs[a] != B.funs[F.arr[a]]:
            out.append(f"arrow {a}: realization changes along the functor")
    return out


# -- growing fragments ----------------------------------------------------------


class FragmentBuilder:
    """Grow a concrete category of finite sets and functions.

    Arrows are deduplicated by their function graphs (parallel arrows with the
    same graph are the same arrow), which keeps the realization faithful by
    construction; composites are closed off on demand.
    """

    def __init__(self) -> None:
        self.objects: List[str] = []
        self.sets: Dict[str, Tuple[str, ...]] = {}
        self.arrow_names: List[str] = []
        self.src: Dict[str, str] = {}
        self.tgt: Dict[str, str] = {}
        self.funs: Dict[str, Dict[str, str]] = {}
        self.markers: Dict[str, object] = {}
        self._by_graph: Dict[Tuple, str] = {}   # (src, tgt, graph) -> arrow

    @classmethod
    def from_fragment(cls, frag: SetFragment) -> "FragmentBuilder":
        b = cls()
        for x in frag.cat.objects:
            b.add_object(x, frag.sets[x])
        for a in frag.cat.arrows:
            b.add_arrow(a, frag.cat.src[a], frag.cat.tgt[a], frag.funs[a])
        return b

    def add_object(self, name: str, elems: Sequence[str]) -> str:
        if name in self.sets:
            if tuple(self.sets[name]) != tuple(elems):
                raise ValueError(f"object {name} already present with another set")
            return name
        self.objects.append(name)
        self.sets[name] = tuple(elems)
        return name

    def object_with_set(self, elems: Sequence[str]) -> Optional[str]:
        want = tuple(sorted(set(elems)))
        for x in self.objects:
            if tuple(sorted(set(self.sets[x]))) == want:
                return x
        return None

    @staticmethod
    def _graph_key(src: str, tgt: str, fn: Mapping[str, str]) -> Tuple:
        return (src, tgt, frozenset(fn.items()))

    def find_arrow(self, src: str, tgt: str, fn: Mapping[str, str]) -> Optional[str]:
        return self._by_graph.get(self._graph_key(src, tgt, fn))

    def add_arrow(self, name: str, src: str, tgt: str, fn: Mapping[str, str]) -> str:
        """Returns the canonical arrow for this function, adding it if new."""
        if set(fn) != set(self.sets[src]):
            raise ValueError(f"arrow {name}: function not total on {src}")
        if any(v not in set(self.sets[tgt]) for v in fn.values()):
            raise ValueError(f"arrow {name}: value outside {tgt}")
        hit = self.find_arrow(src, tgt, fn)
        if hit is not None:
            return hit
        if name in self.src:
            i = 2
            while f"{name}_{i}" in self.src:
                i += 1
            name = f"{name}_{i}"
        self.arrow_names.append(name)
        self.src[name], self.tgt[name] = src, tgt
        self.funs[name] = dict(fn)
        self._by_graph[self._graph_key(src, tgt, fn)] = name
        return name

    def ensure_identities(self) -> None:
        for x in self.objects:
            self.add_arrow(f"id_{x}", x, x, {e: e for e in self.sets[x]})

    def close_composition(self) -> None:
        self.ensure_identities()
        changed = True
        while changed:
            changed = False
            for g in list(self.arrow_names):
                for f in list(self.arrow_names):
                    if self.tgt[f] != self.src[g]:
                        continue
                    fn = {e: self.funs[g][self.funs[f][e]] for e in self.sets[self.src[f]]}
                    if self.find_arrow(self.src[f], self.tgt[g], fn) is None:
                        self.add_arrow(f"({g}.{f})", self.src[f], self.tgt[g], fn)
                        changed = True

    def build(self) -> SetFragment:
        self.close_composition()
        identity = {}
        for x in self.objects:
            identity[x] = self.find_arrow(x, x, {e: e for e in self.sets[x]})
        comp = {}
        for g in self.arrow_names:
            for f in self.arrow_names:
                if self.tgt[f] == self.src[g]:
                    fn = {e: self.funs[g][self.funs[f][e]] for e in self.sets[self.src[f]]}
                    comp[(g, f)] = self.find_arrow(self.src[f], self.tgt[g], fn)
        cat = FinCat(tuple(self.objects), tuple(self.arrow_names),
                     dict(self.src), dict(self.tgt), identity, comp,
                     dict(self.markers))
        return SetFragment(cat, dict(self.sets), {a: dict(self.funs[a]) for a in self.arrow_names})


# -- concrete limits -------------------------------------------------------------


@dataclass
class ConcreteCone:
    """A limit of a diagram of finite sets: tuples plus projections."""
    vertex_order: Tuple[str, ...]                    # diagram objects, fixed order
    elements: Tuple[Tuple[str, ...], ...]
    legs: Dict[str, Dict[Tuple[str, ...], str]]      # diagram object -> projection


def finset_limit(frag: SetFragment, diagram: FinFunctor) -> ConcreteCone:
    """The standard concrete limit: compatible tuples with projections."""
    J = diagram.source
    order = tuple(J.objects)
    spaces = [frag.sets[diagram.obj[j]] for j in order]
    elems = []
    for combo in itertools.product(*spaces):
        at = dict(zip(order, combo))
        if all(frag.funs[diagram.arr[u]][at[J.src[u]]] == at[J.tgt[u]] for u in J.arrows):
            elems.append(tuple(combo))
    legs = {j: {e: e[i] for e in elems} for i, j in enumerate(order)}
    return ConcreteCone(order, tuple(elems), legs)


def image_factorization(
    frag: SetFragment, f: str, image_name: Optional[str] = None
) -> Tuple[SetFragment, str, str, str]:
    """Extend the fragment with the image of f: returns (fragment, e, m, image object).

    e is the corestriction of f onto its image and m the inclusion; m∘e = f,
    e is surjective onto the image and m injective.  The extended fragment
    reuses an existing object whose set already equals the image.
    """
    c = frag.cat
    fn = frag.funs[f]
    image = tuple(sorted(set(fn.values()), key=frag.sets[c.tgt[f]].index))
    b = FragmentBuilder.from_fragment(frag)
    obj = b.object_with_set(image)
    if obj is None:
        obj = b.add_object(image_name or f"im_{f}", image)
    e = b.add_arrow(f"e_{f}", c.src[f], obj, dict(fn))
    m = b.add_arrow(f"m_{f}", obj, c.tgt[f], {v: v for v in b.sets[obj]})
    out = b.build()
    return out, e, m, obj


def kernel_pair(frag: SetFragment, f: str) -> List[Tuple[str, str]]:
    fn = frag.funs[f]
    dom = frag.sets[frag.cat.src[f]]
    return [(x, y) for x in dom for y in dom if fn[x] == fn[y]]


def is_effective_epi(frag: SetFragment, f: str, test_size_slack: int = 1) -> bool:
    """True iff f coequalizes its kernel pair; checked two ways.

    The direct criterion in sets is surjectivity; the universal property is
    also enumerated over canonical test sets, and the two answers must agree.
    """
    c = frag.cat
    fn = frag.funs[f]
    dom, cod = frag.sets[c.src[f]], frag.sets[c.tgt[f]]
    surjective = set(fn.values()) == set(cod)

    kp = kernel_pair(frag, f)
    max_test = len(cod) + test_size_slack
    universal = True
    for size in range(1, max_test + 1):
        test = [str(i) for i in range(size)]
        for pick in itertools.product(test, repeat=len(dom)):
            u = dict(zip(dom, pick))
            if any(u[x] != u[y] for x, y in kp):
                continue
            mediators = [
                v for v in (dict(zip(cod, q)) for q in itertools.product(test, repeat=len(cod)))
                if all(v[fn[x]] == u[x] for x in dom)
            ]
            if len(mediators) != 1:
                universal = False
                break
        if not universal:
            break
    if surjective != universal:
        raise AssertionError(
            f"effective-epi checks disagree on {f}: surjective={surjective}, "
            f"universal={universal}")
    return surjective


# -- subobject lattice ------------------------------------------------------------


@dataclass
class SubLattice:
    """Subobjects of a fragment object as subsets of its realization."""
    frag: SetFragment
    obj: str

    def full(self) -> FrozenSet[str]:
        return frozenset(self.frag.sets[self.obj])

    def empty(self) -> FrozenSet[str]:
        return frozenset()

    def meet(self, a: FrozenSet[str], b: FrozenSet[str]) -> FrozenSet[str]:
        return a & b

    def join(self, a: FrozenSet[str], b: FrozenSet[str]) -> FrozenSet[str]:
        return a | b

    def le(self, a: FrozenSet[str], b: FrozenSet[str]) -> bool:
        return a <= b

    def all_subobjects(self) -> List[FrozenSet[str]]:
        base = list(self.frag.sets[self.obj])
        out = []
        for mask in itertools.product((False, True), repeat=len(base)):
            out.append(frozenset(e for e, keep in zip(base, mask) if keep))
        return out


def preimage_map(frag: SetFragment, f: str):
    """The lattice map along f: subsets of tgt(f) to subsets of src(f)."""
    fn = frag.funs[f]

    def pre(sub: FrozenSet[str]) -> FrozenSet[str]:
        return frozenset(x for x, v in fn.items() if v in sub)

    return pre


def check_preimage_lattice_hom(frag: SetFragment, f: str) -> List[str]:
    """Preimage preserves meets, joins, top and bottom — verified exhaustively."""
    out = []
    pre = preimage_map(frag, f)
    tgt = SubLattice(frag, frag.cat.tgt[f])
    src_full = frozenset(frag.sets[frag.cat.src[f]])
    if pre(tgt.full()) != src_full:
        out.append(f"{f}: preimage of the full subset is not full")
    if pre(frozenset()) != frozenset():
        out.append(f"{f}: preimage of the empty subset is not empty")
    subs = tgt.all_subobjects()
    for a in subs:
        for b in subs:
            if pre(a & b) != pre(a) & pre(b):
                out.append(f"{f}: preimage fails on a meet")
            if pre(a | b) != pre(a) | pre(b):
                out.append(f"{f}: preimage fails on a join")
    return out


# ---------------------------------------------------------------------------
# JSON and DOT


def cat_to_json(c: FinCat, realization: Optional[SetFragment] = None) -> str:
    doc = {
        "objects": list(c.objects),
        "arrows": [{"name": a, "src": c.src[a], "tgt": c.tgt[a]} for a in c.arrows],
        "identities": {x: c.identity[x] for x in c.objects},
        "composition": [[g, f, gf] for (g, f), gf in sorted(c.comp.items())],
        "markers": c.markers,
    }
    if realization is not None:
        doc["realization"] = {
            "objects": {x: list(realization.sets[x]) for x in c.objects},
            "arrows": {a: dict(realization.funs[a]) for a in c.arrows},
        }
    return json.dumps(doc, indent=2, sort_keys=True)


def cat_from_json(text: str) -> Tuple[FinCat, Optional[SetFragment]]:
    doc = json.loads(text)
    arrows = tuple(a["name"] for a in doc["arrows"])
    cat = FinCat(
        tuple(doc["objects"]),
        arrows,
        {a["name"]: a["src"] for a in doc["arrows"]},
        {a["name"]: a["tgt"] for a in doc["arrows"]},
        dict(doc["identities"]),
        {(g, f): gf for g, f, gf in doc["composition"]},
        dict(doc.get("markers", {})),
    )
    frag = None
    if "realization" in doc:
        r = doc["realization"]
        frag = SetFragment(cat,
                           {x: tuple(v) for x, v in r["objects"].items()},
                           {a: dict(fn) for a, fn in r["arrows"].items()})
    return cat, frag


def functor_to_json(F: FinFunctor) -> str:
    return json.dumps({
        "source": json.loads(cat_to_json(F.source)),
        "target": json.loads(cat_to_json(F.target)),
        "objects": F.obj,
        "arrows": F.arr,
    }, indent=2, sort_keys=True)


def functor_from_json(text: str) -> FinFunctor:
    doc = json.loads(text)
    src, _ = cat_from_json(json.dumps(doc["source"]))
    tgt, _ = cat_from_json(json.dumps(doc["target"]))
    return FinFunctor(src, tgt, dict(doc["objects"]), dict(doc["arrows"]))


def cell_to_json(t: TwoCell) -> str:
    return json.dumps({
        "source": json.loads(functor_to_json(t.source)),
        "target": json.loads(functor_to_json(t.target)),
        "components": t.component,
    }, indent=2, sort_keys=True)


def cell_from_json(text: str) -> TwoCell:
    doc = json.loads(text)
    F = functor_from_json(json.dumps(doc["source"]))
    G = functor_from_json(json.dumps(doc["target"]))
    cell = TwoCell(F, G, dict(doc["components"]))
    diags = validate_two_cell(cell)
    if diags:
        raise ValueError("invalid 2-cell: " + "; ".join(diags))
    return cell


def cat_to_dot(c: FinCat, name: str = "category") -> str:
    lines = [f"digraph {json.dumps(name)} {{"]
    for x in c.objects:
        lines.append(f"  {json.dumps(x)};")
    for a in c.arrows:
        if not c.is_identity(a):
            lines.append(f"  {json.dumps(c.src[a])} -> {json.dumps(c.tgt[a])} "
                         f"[label={json.dumps(a)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
