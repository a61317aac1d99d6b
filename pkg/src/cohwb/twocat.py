"""Bicategorical limit constructions on finite categories.

Strict limits of categories (pullback_category and friends in fincat) are only
well behaved when one leg lifts isomorphisms.  This module supplies the
homotopy-correct versions: every functor is factored as an equivalence
followed by an isofibration through its iso-comma category, and products /
pullbacks are computed so that their universal property holds up to coherent
isomorphism.  Mediating functors into a homotopy pullback are constructed
explicitly, connecting isomorphisms between two mediators are found and
checked unique, and 2-cells into a split equalizer cone are lifted.

All "this pasting equals that 2-cell" conditions are checked componentwise as
arrow equations in the codomain category, which keeps the checks independent
of any whiskering-order convention.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .fincat import (
    FinCat,
    FinFunctor,
    TwoCell,
    cell_eq,
    compose_functors,
    functor_eq,
    identity_cell,
    identity_functor,
    inverse_arrow,
    invert_cell,
    is_iso,
    is_isofibration,
    iso_lifts,
    postcompose_cell,
    precompose_cell,
    pullback_category,
    terminal_category,
    validate_category,
    validate_functor,
    validate_two_cell,
    vcompose,
)


# -- equivalences with explicit witnesses ---------------------------------------


@dataclass(frozen=True)
class EquivalenceData:
    """A functor together with everything that makes it an equivalence.

    ``unit`` goes 1 => functor∘quasi_inverse on the codomain and ``counit``
    goes quasi_inverse∘functor => 1 on the domain.
    """
    functor: FinFunctor
    quasi_inverse: FinFunctor
    unit: TwoCell
    counit: TwoCell


def validate_equivalence(e: EquivalenceData) -> List[str]:
    """Diagnostics: endpoint shapes, naturality, and both triangle identities."""
    out: List[str] = []
    phi, psi = e.functor, e.quasi_inverse
    if phi.source != psi.target or phi.target != psi.source:
        return ["quasi-inverse does not go the other way"]
    round_trip = compose_functors(phi, psi)          # on the codomain
    back_trip = compose_functors(psi, phi)           # on the domain
    if not functor_eq(e.unit.source, identity_functor(phi.target)):
        out.append("unit does not start at the identity of the codomain")
    if not functor_eq(e.unit.target, round_trip):
        out.append("unit does not end at functor∘quasi_inverse")
    if not functor_eq(e.counit.source, back_trip):
        out.append("counit does not start at quasi_inverse∘functor")
    if not functor_eq(e.counit.target, identity_functor(phi.source)):
        out.append("counit does not end at the identity of the domain")
    out.extend(f"unit: {m}" for m in validate_two_cell(e.unit))
    out.extend(f"counit: {m}" for m in validate_two_cell(e.counit))
    if out:
        return out
    # triangles: (phi·counit)∘(unit·phi) = 1_phi and (counit·psi)∘(psi·unit) = 1_psi
    tri1 = vcompose(postcompose_cell(phi, e.counit), precompose_cell(e.unit, phi))
    if not cell_eq(tri1, identity_cell(phi)):
        out.append("triangle identity on the functor fails")
    tri2 = vcompose(precompose_cell(e.counit, psi), postcompose_cell(psi, e.unit))
    if not cell_eq(tri2, identity_cell(psi)):
        out.append("triangle identity on the quasi-inverse fails")
    return out


# -- equivalence / isofibration factorization -----------------------------------


@dataclass(frozen=True)
class IsoCommaFactorization:
    """F = isofib ∘ equivalence.functor, strictly, through the iso-comma category."""
    original: FinFunctor
    comma: FinCat
    equivalence: EquivalenceData        # j : source(F) -> comma
    isofib: FinFunctor                  # comma -> target(F)


def _comma_obj(c: str, d: str, h: str) -> str:
    return f"({c};{d};{h})"


def _comma_arr(k: str, l: str, h: str, h1: str) -> str:
    return f"({k};{l};{h};{h1})"


def factor_equiv_isofib(F: FinFunctor) -> IsoCommaFactorization:
    """Factor F: C -> A as an equivalence followed by an isofibration.

    The middle category has objects (c, d, h) with h: F(c) -> d invertible and
    arrows the commuting squares (k, l).  The first factor j sends c to
    (c, F(c), id) and is an equivalence with an on-the-nose retraction; the
    second factor projects to d and lifts every isomorphism on the nose.
    """
    C, A = F.source, F.target
    obj_data: Dict[str, Tuple[str, str, str]] = {}
    for c in C.objects:
        for d in A.objects:
            for h in A.hom(F.obj[c], d):
                if is_iso(A, h):
                    obj_data[_comma_obj(c, d, h)] = (c, d, h)
    arr_data: Dict[str, Tuple[str, str, str, str]] = {}
    src: Dict[str, str] = {}
    tgt: Dict[str, str] = {}
    for o, (c, d, h) in obj_data.items():
        for o1, (c1, d1, h1) in obj_data.items():
            for k in C.hom(c, c1):
                for l in A.hom(d, d1):
                    if A.comp[(l, h)] == A.comp[(h1, F.arr[k])]:
                        name = _comma_arr(k, l, h, h1)
                        arr_data[name] = (k, l, h, h1)
                        src[name] = o
                        tgt[name] = o1
    ident = {o: _comma_arr(C.identity[c], A.identity[d], h, h)
             for o, (c, d, h) in obj_data.items()}
    comp: Dict[Tuple[str, str], str] = {}
    for a2, (k2, l2, _, h3) in arr_data.items():
        for a1, (k1, l1, h0, _) in arr_data.items():
            if tgt[a1] == src[a2]:
                comp[(a2, a1)] = _comma_arr(C.comp[(k2, k1)], A.comp[(l2, l1)], h0, h3)
    comma = FinCat(tuple(obj_data), tuple(arr_data), src, tgt, ident, comp)
    problems = validate_category(comma)
    assert not problems, f"iso-comma category is not a category: {problems}"

    j = FinFunctor(
        C, comma,
        {c: _comma_obj(c, F.obj[c], A.identity[F.obj[c]]) for c in C.objects},
        {k: _comma_arr(k, F.arr[k], A.identity[F.obj[C.src[k]]],
                       A.identity[F.obj[C.tgt[k]]])
         for k in C.arrows})
    proj = FinFunctor(comma, A,
                      {o: d for o, (_, d, _) in obj_data.items()},
                      {a: l for a, (_, l, _, _) in arr_data.items()})
    retract = FinFunctor(comma, C,
                         {o: c for o, (c, _, _) in obj_data.items()},
                         {a: k for a, (k, _, _, _) in arr_data.items()})
    for G in (j, proj, retract):
        problems = validate_functor(G)
        assert not problems, f"iso-comma structure functor broken: {problems}"

    # unit at (c, d, h) points back to (c, F(c), id) along (id_c, h^{-1}).
    unit_comp = {}
    for o, (c, d, h) in obj_data.items():
        hinv = inverse_arrow(A, h)
        unit_comp[o] = _comma_arr(C.identity[c], hinv, h, A.identity[F.obj[c]])
    unit = TwoCell(identity_functor(comma), compose_functors(j, retract), unit_comp)
    counit = TwoCell(compose_functors(retract, j), identity_functor(C),
                     {c: C.identity[c] for c in C.objects})
    equiv = EquivalenceData(j, retract, unit, counit)
    problems = validate_equivalence(equiv)
    assert not problems, f"iso-comma equivalence witnesses broken: {problems}"

    assert functor_eq(compose_functors(proj, j), F), \
        "factorization is not strictly equal to the original functor"
    assert is_isofibration(proj), "comma projection failed to lift an isomorphism"
    assert len(set(j.obj.values())) == len(C.objects), \
        "equivalence factor is not injective on objects"
    return IsoCommaFactorization(F, comma, equiv, proj)


# -- homotopy products -----------------------------------------------------------


@dataclass(frozen=True)
class HomotopyProduct:
    factors: Tuple[FinCat, ...]
    category: FinCat
    projections: Tuple[FinFunctor, ...]


def homotopy_product(factors: Sequence[FinCat]) -> HomotopyProduct:
    """Product of finitely many categories, with its projections.

    Every object/arrow of the product is a coordinate tuple, so the strict
    construction is already invariant under equivalence; the 2-dimensional
    part of the universal property is checked by product_mediating_cell.
    """
    factors = tuple(factors)
    if not factors:
        return HomotopyProduct(factors, terminal_category(), ())
    if len(factors) == 1:
        only = factors[0]
        return HomotopyProduct(factors, only, (identity_functor(only),))

    def nm(parts: Sequence[str]) -> str:
        return "(" + "|".join(parts) + ")"

    objects = tuple(nm(parts) for parts in itertools.product(*(c.objects for c in factors)))
    arr_parts = list(itertools.product(*(c.arrows for c in factors)))
    arrows = tuple(nm(parts) for parts in arr_parts)
    src = {nm(p): nm([c.src[a] for c, a in zip(factors, p)]) for p in arr_parts}
    tgt = {nm(p): nm([c.tgt[a] for c, a in zip(factors, p)]) for p in arr_parts}
    ident = {nm(p): nm([c.identity[x] for c, x in zip(factors, p)])
             for p in itertools.product(*(c.objects for c in factors))}
    comp: Dict[Tuple[str, str], str] = {}
    for p1 in arr_parts:
        for p2 in arr_parts:
            if all(c.tgt[b] == c.src[a] for c, a, b in zip(factors, p1, p2)):
                comp[(nm(p1), nm(p2))] = nm([c.comp[(a, b)]
                                             for c, a, b in zip(factors, p1, p2)])
    cat = FinCat(objects, arrows, src, tgt, ident, comp)
    projections = []
    for i, c in enumerate(factors):
        projections.append(FinFunctor(
            cat, c,
            {nm(p): p[i] for p in itertools.product(*(f.objects for f in factors))},
            {nm(p): p[i] for p in arr_parts}))
    return HomotopyProduct(factors, cat, tuple(projections))


def product_mediating_cell(prod: HomotopyProduct, F: FinFunctor, G: FinFunctor,
                           cells: Sequence[TwoCell]) -> TwoCell:
    """The unique 2-cell F => G into the product with the given projections.

    F and G land in prod.category; cells[i] must be a 2-cell proj_i∘F =>
    proj_i∘G.  The mediating cell has cells[i] as its i-th coordinate, and
    uniqueness is certified by checking that each component is the only arrow
    of the product with the required coordinates.
    """
    cells = list(cells)
    if len(cells) != len(prod.projections):
        raise ValueError("need exactly one 2-cell per projection")
    for pi, t in zip(prod.projections, cells):
        if not functor_eq(t.source, compose_functors(pi, F)) or \
           not functor_eq(t.target, compose_functors(pi, G)):
            raise ValueError("given 2-cell does not sit under its projection")
        bad = validate_two_cell(t)
        if bad:
            raise ValueError(f"coordinate 2-cell is not natural: {bad}")
    P = prod.category
    component: Dict[str, str] = {}
    for x in F.source.objects:
        cands = [a for a in P.hom(F.obj[x], G.obj[x])
                 if all(pi.arr[a] == t.component[x]
                        for pi, t in zip(prod.projections, cells))]
        assert len(cands) == 1, \
            f"product has {len(cands)} arrows with the required coordinates at {x}"
        component[x] = cands[0]
    cell = TwoCell(F, G, component)
    bad = validate_two_cell(cell)
    assert not bad, f"mediating cell is not natural: {bad}"
    for pi, t in zip(prod.projections, cells):
        assert cell_eq(postcompose_cell(pi, cell), t), \
            "mediating cell does not project to the given coordinate"
    return cell


# -- homotopy pullbacks ----------------------------------------------------------


@dataclass(frozen=True)
class HoPullbackResult:
    """Homotopy pullback of left: B -> A <- C :right.

    ``apex`` is the strict pullback of ``left`` against the iso-comma
    replacement of ``right``; ``to_left`` / ``to_right`` are the projections
    back to B and C, and ``filler`` is the coherent isomorphism
    left∘to_left => right∘to_right that fills the square.
    """
    left: FinFunctor
    right: FinFunctor
    factorization: IsoCommaFactorization
    apex: FinCat
    to_left: FinFunctor                 # apex -> B
    to_comma: FinFunctor                # apex -> iso-comma of right
    to_right: FinFunctor                # apex -> C
    filler: TwoCell


def homotopy_pullback(left: FinFunctor, right: FinFunctor) -> HoPullbackResult:
    if left.target != right.target:
        raise ValueError("functors have different targets")
    A = left.target
    fac = factor_equiv_isofib(right)
    apex, to_left, to_comma = pullback_category(left, fac.isofib)
    to_right = compose_functors(fac.equivalence.quasi_inverse, to_comma)
    # filler component at x: the isofibration applied to the unit at to_comma(x)
    filler = TwoCell(
        compose_functors(left, to_left),
        compose_functors(right, to_right),
        {x: fac.isofib.arr[fac.equivalence.unit.component[to_comma.obj[x]]]
         for x in apex.objects})
    bad = validate_two_cell(filler)
    assert not bad, f"pullback filler is not a natural isomorphism: {bad}"
    return HoPullbackResult(left, right, fac, apex, to_left, to_comma, to_right, filler)


def _pair_lookup(res: HoPullbackResult) -> Tuple[Dict[Tuple[str, str], str],
                                                 Dict[Tuple[str, str], str]]:
    objs = {(res.to_left.obj[p], res.to_comma.obj[p]): p for p in res.apex.objects}
    arrs = {(res.to_left.arr[a], res.to_comma.arr[a]): a for a in res.apex.arrows}
    return objs, arrs


@dataclass(frozen=True)
class ConeSolution:
    """A mediator into a homotopy pullback with its two comparison 2-cells."""
    mediator: FinFunctor                # D -> apex
    left_cell: TwoCell                  # to_left∘mediator => h1
    right_cell: TwoCell                 # to_right∘mediator => h2


def mediate_into_hopullback(res: HoPullbackResult, h1: FinFunctor, h2: FinFunctor,
                            nu: TwoCell) -> ConeSolution:
    """Mediate a cone (h1: D -> B, h2: D -> C, nu: left∘h1 => right∘h2).

    The C'-coordinate of the mediator at d is obtained by lifting nu_d^{-1}
    through the isofibration starting at the replacement of h2(d); on arrows
    the coordinate is conjugation by those lifts.  The pasting of the returned
    2-cells with the pullback filler is checked to reproduce nu componentwise.
    """
    A = res.left.target
    B, C = res.left.source, res.right.source
    D = h1.source
    if h2.source != D:
        raise ValueError("cone legs have different sources")
    if h1.target != B or h2.target != C:
        raise ValueError("cone legs do not match the pullback feet")
    if not functor_eq(nu.source, compose_functors(res.left, h1)) or \
       not functor_eq(nu.target, compose_functors(res.right, h2)):
        raise ValueError("cone 2-cell does not compare left∘h1 with right∘h2")
    bad = validate_two_cell(nu)
    if bad:
        raise ValueError(f"cone 2-cell must be a natural isomorphism: {bad}")

    fac = res.factorization
    comma, gp, j = fac.comma, fac.isofib, fac.equivalence.functor
    mu: Dict[str, str] = {}         # d -> iso replacement(h2 d) <- c'_d  in comma
    obj_c: Dict[str, str] = {}      # d -> c'_d
    for d in D.objects:
        nu_inv = inverse_arrow(A, nu.component[d])
        lifts = iso_lifts(gp, j.obj[h2.obj[d]], nu_inv)
        if not lifts:
            raise RuntimeError(
                "isofibration failed to lift the cone component; the pullback "
                "data does not come from this construction")
        lift = lifts[0]
        obj_c[d] = comma.tgt[lift]
        mu[d] = inverse_arrow(comma, lift)

    pair_obj, pair_arr = _pair_lookup(res)
    r_obj = {d: pair_obj[(h1.obj[d], obj_c[d])] for d in D.objects}
    r_arr: Dict[str, str] = {}
    for delta in D.arrows:
        d0, d1 = D.src[delta], D.tgt[delta]
        mid = comma.comp[(j.arr[h2.arr[delta]], mu[d0])]
        coord = comma.comp[(inverse_arrow(comma, mu[d1]), mid)]
        r_arr[delta] = pair_arr[(h1.arr[delta], coord)]
    r = FinFunctor(D, res.apex, r_obj, r_arr)
    bad = validate_functor(r)
    assert not bad, f"mediator is not a functor: {bad}"

    left_cell = TwoCell(compose_functors(res.to_left, r), h1,
                        {d: B.identity[h1.obj[d]] for d in D.objects})
    retract = fac.equivalence.quasi_inverse
    counit = fac.equivalence.counit
    right_cell = TwoCell(
        compose_functors(res.to_right, r), h2,
        {d: C.comp[(counit.component[h2.obj[d]], retract.arr[mu[d]])]
         for d in D.objects})
    for cell, what in ((left_cell, "left"), (right_cell, "right")):
        bad = validate_two_cell(cell)
        assert not bad, f"{what} comparison cell is not natural: {bad}"

    # pasting check: nu_d = right(right_cell_d) ∘ filler_{r(d)} ∘ left(left_cell_d)^{-1}
    for d in D.objects:
        back = inverse_arrow(B, left_cell.component[d])
        paste = A.comp[(res.right.arr[right_cell.component[d]],
                        A.comp[(res.filler.component[r_obj[d]],
                                res.left.arr[back])])]
        assert paste == nu.component[d], \
            f"pasting of the mediator cells differs from the cone at {d}"
    return ConeSolution(r, left_cell, right_cell)


def uniqueness_check(res: HoPullbackResult, sol1: ConeSolution,
                     sol2: ConeSolution) -> TwoCell:
    """The unique connecting isomorphism between two mediators of one cone.

    Builds the comparison cells beta (over B) and alpha (over C), checks the
    two are compatible over A up to the filler, and then enumerates every
    natural isomorphism mediator1 => mediator2 whose whiskers are beta and
    alpha.  Exactly one must exist; anything else is reported loudly.
    """
    A, B, C = res.left.target, res.left.source, res.right.source
    beta = vcompose(invert_cell(sol2.left_cell), sol1.left_cell)
    alpha = vcompose(invert_cell(sol2.right_cell), sol1.right_cell)
    r1, r2 = sol1.mediator, sol2.mediator
    for d in r1.source.objects:
        lhs = A.comp[(res.right.arr[alpha.component[d]],
                      res.filler.component[r1.obj[d]])]
        rhs = A.comp[(res.filler.component[r2.obj[d]],
                      res.left.arr[beta.component[d]])]
        if lhs != rhs:
            raise ValueError(
                f"solutions do not mediate the same cone: comparison cells are "
                f"incompatible over the base at {d}")
    found: List[TwoCell] = []
    for t in _natural_isos(r1, r2):
        if cell_eq(postcompose_cell(res.to_left, t), beta) and \
           cell_eq(postcompose_cell(res.to_right, t), alpha):
            found.append(t)
    assert found, "no connecting isomorphism between the two mediators"
    assert len(found) == 1, \
        f"{len(found)} connecting isomorphisms; mediator should be unique up to " \
        f"unique isomorphism"
    return found[0]


def _natural_isos(F: FinFunctor, G: FinFunctor):
    from .fincat import enumerate_natural_isos
    return enumerate_natural_isos(F, G)


# -- split equalizer cones -------------------------------------------------------


@dataclass(frozen=True)
class EqualizerCone:
    """A functor e together with cells comparing a parallel family along it.

    Each family entry (u, v, w) has u, v parallel out of e's codomain and
    w: u∘e => v∘e.  The cone is *split* for a 2-cell alpha: e∘g => e∘h when
    alpha lifts uniquely to a 2-cell g => h; equalizer_split finds the lift or
    reports why there is none.
    """
    e: FinFunctor
    family: Tuple[Tuple[FinFunctor, FinFunctor, TwoCell], ...] = ()


def validate_equalizer_cone(cone: EqualizerCone) -> List[str]:
    out: List[str] = []
    e = cone.e
    for i, (u, v, w) in enumerate(cone.family):
        if u.source != e.target or v.source != e.target or u.target != v.target:
            out.append(f"family entry {i}: functors are not parallel out of the codomain")
            continue
        if not functor_eq(w.source, compose_functors(u, e)) or \
           not functor_eq(w.target, compose_functors(v, e)):
            out.append(f"family entry {i}: comparison cell has wrong endpoints")
            continue
        out.extend(f"family entry {i}: {m}" for m in validate_two_cell(w))
    return out


@dataclass(frozen=True)
class SplitReport:
    gamma: Optional[TwoCell]
    unique: bool
    reason: str
    betas: Tuple[TwoCell, ...] = field(default=(), compare=False)


def equalizer_split(cone: EqualizerCone, g: FinFunctor, h: FinFunctor,
                    alpha: TwoCell) -> SplitReport:
    """Lift alpha: e∘g => e∘h to the unique gamma: g => h with e·gamma = alpha.

    Componentwise, gamma_d must be the arrow over alpha_d; if some component
    has no arrow over it, or the lifted components fail naturality, the cone
    was not an equalizer for this cell and the report says so.  The derived
    cells beta_i = (w_i at h)∘u_i(alpha) are computed and confirmed to agree
    with their other pasting v_i(alpha)∘(w_i at g) — they carry no extra
    constraint on gamma.
    """
    bad = validate_equalizer_cone(cone)
    if bad:
        raise ValueError(f"not an equalizer cone: {bad}")
    e = cone.e
    E = e.source
    if g.target != E or h.target != E or g.source != h.source:
        raise ValueError("g and h must be parallel into the equalizer source")
    if not functor_eq(alpha.source, compose_functors(e, g)) or \
       not functor_eq(alpha.target, compose_functors(e, h)):
        raise ValueError("2-cell does not compare e∘g with e∘h")
    bad = validate_two_cell(alpha)
    if bad:
        raise ValueError(f"2-cell to split must be a natural isomorphism: {bad}")

    betas = []
    for u, v, w in cone.family:
        one = vcompose(precompose_cell(w, h), postcompose_cell(u, alpha))
        other = vcompose(postcompose_cell(v, alpha), precompose_cell(w, g))
        assert cell_eq(one, other), \
            "interchange pastings of a family cell disagree"
        betas.append(one)
    betas = tuple(betas)

    D = g.source
    candidates: Dict[str, List[str]] = {}
    for d in D.objects:
        cands = [a for a in E.hom(g.obj[d], h.obj[d])
                 if e.arr[a] == alpha.component[d]]
        if not cands:
            return SplitReport(None, False,
                               f"no arrow over the component at {d}: the cone "
                               f"does not split this cell", betas)
        candidates[d] = cands

    combos = 1
    for cands in candidates.values():
        combos *= len(cands)
    if combos > 4096:
        return SplitReport(None, False,
                           "too many candidate lifts to decide uniqueness", betas)
    lifts: List[TwoCell] = []
    for pick in itertools.product(*(candidates[d] for d in D.objects)):
        t = TwoCell(g, h, dict(zip(D.objects, pick)))
        if not validate_two_cell(t):
            lifts.append(t)
    if not lifts:
        return SplitReport(None, False,
                           "componentwise lifts exist but none is a natural "
                           "isomorphism", betas)
    if len(lifts) > 1:
        return SplitReport(lifts[0], False,
                           f"{len(lifts)} distinct natural lifts: the functor is "
                           f"not faithful enough for an equalizer", betas)
    gamma = lifts[0]
    assert cell_eq(postcompose_cell(e, gamma), alpha), \
        "lift does not paste back to the given cell"
    return SplitReport(gamma, True, "split", betas)
