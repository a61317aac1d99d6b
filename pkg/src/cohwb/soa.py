"""Stage-bounded small object argument over theory presentations.

Coherent functors are handled here through the theories that present them: a
morphism of presentations maps sorts to sorts and symbols to symbols so that
translated axioms hold in the target (certified by the bounded prover, or
tagged Unknown).  Two parallel morphisms are compared through their
model-restriction semantics on a finite family of probe models — a sound but
deliberately incomplete stand-in for a natural isomorphism of the presented
functors.

On top of that the module builds coproducts and pushouts of theories,
ω-truncated transfinite compositions of strict extension chains, enumeration
of probe-witnessed lifting squares, right-lifting-property checks, and the
stage-bounded factorization f ≅ f″∘f′ where f′ is an iterated pushout of
coproducts of generating maps (the cell part, certified structurally by the
stage log) and f″ has the right lifting property against every enumerated
square at the final stage (verified, not proved — the bound is finite).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .chase import OutcomeTag, prove_sequent
from .logic import (
    And,
    App,
    Context,
    Eq,
    Exists,
    Formula,
    Or,
    Rel,
    Sequent,
    Signature,
    Term,
    Theory,
    Var,
    fresh_name,
    normalize_sequent,
)
from .parser import parse_theory, theory_to_text
from .semantics import FinStructure, enumerate_models, is_model


class MorphismError(ValueError):
    """A presentation map is structurally broken (bad arity, missing symbol)."""


class PushoutConflict(ValueError):
    """Symbols that would have to be identified have incompatible shapes."""


class StrictChainError(ValueError):
    """A chain stage is not a genuine presentation extension."""


class StageBudgetError(RuntimeError):
    """Square enumeration or lift search exceeded its budget."""


# -- theory morphisms ------------------------------------------------------------


@dataclass(frozen=True)
class TheoryMorphism:
    """A map of presentations: sorts to sorts, symbols to same-kind symbols.

    The induced semantics goes the other way: every model of the target
    restricts to a model of the source (restrict_model).  Axiom preservation
    is certified separately by certify_morphism.
    """
    source: Theory
    target: Theory
    sort_map: Dict[str, str]
    sym_map: Dict[str, str]

    def sort(self, s: str) -> str:
        return self.sort_map[s]

    def sym(self, x: str) -> str:
        return self.sym_map[x]


def morphism_diagnostics(m: TheoryMorphism) -> List[str]:
    out: List[str] = []
    src, tgt = m.source.signature, m.target.signature
    for s in src.sorts:
        if m.sort_map.get(s) not in tgt.sorts:
            out.append(f"sort {s!r} has no image")
    for f, (args, res) in src.functions.items():
        img = m.sym_map.get(f)
        if img not in tgt.functions:
            out.append(f"function {f!r} has no function image")
            continue
        want = (tuple(m.sort_map.get(a) for a in args), m.sort_map.get(res))
        have = (tuple(tgt.functions[img][0]), tgt.functions[img][1])
        if want != have:
            out.append(f"function {f!r}: image arity {have} differs from "
                       f"translated arity {want}")
    for r, arity in src.relations.items():
        img = m.sym_map.get(r)
        if img not in tgt.relations:
            out.append(f"relation {r!r} has no relation image")
            continue
        if tuple(tgt.relations[img]) != tuple(m.sort_map.get(a) for a in arity):
            out.append(f"relation {r!r}: image arity differs from translated arity")
    for extra in set(m.sort_map) - set(src.sorts):
        out.append(f"sort map mentions unknown sort {extra!r}")
    for extra in set(m.sym_map) - set(src.functions) - set(src.relations):
        out.append(f"symbol map mentions unknown symbol {extra!r}")
    return out


def check_morphism(m: TheoryMorphism) -> TheoryMorphism:
    bad = morphism_diagnostics(m)
    if bad:
        raise MorphismError("; ".join(bad))
    return m


def translate_term(m: TheoryMorphism, t: Term) -> Term:
    if isinstance(t, Var):
        return t
    return App(m.sym_map[t.fn], tuple(translate_term(m, a) for a in t.args))


def translate_formula(m: TheoryMorphism, f: Formula) -> Formula:
    if isinstance(f, Eq):
        return Eq(translate_term(m, f.lhs), translate_term(m, f.rhs))
    if isinstance(f, Rel):
        return Rel(m.sym_map[f.name], tuple(translate_term(m, a) for a in f.args))
    if isinstance(f, And):
        return And(tuple(translate_formula(m, p) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(translate_formula(m, p) for p in f.parts))
    if isinstance(f, Exists):
        return Exists(f.var, m.sort_map[f.sort], translate_formula(m, f.body))
    raise MorphismError(f"cannot translate non-coherent connective {type(f).__name__}")


def translate_sequent(m: TheoryMorphism, seq: Sequent) -> Sequent:
    context = Context(tuple((n, m.sort_map[s]) for n, s in seq.context))
    return Sequent(context, translate_formula(m, seq.lhs),
                   translate_formula(m, seq.rhs))


def identity_morphism(thy: Theory) -> TheoryMorphism:
    sig = thy.signature
    return TheoryMorphism(thy, thy, {s: s for s in sig.sorts},
                          {x: x for x in list(sig.functions) + list(sig.relations)})


def compose_morphisms(outer: TheoryMorphism, inner: TheoryMorphism) -> TheoryMorphism:
    """outer after inner."""
    if inner.target != outer.source:
        raise MorphismError("morphisms are not composable")
    return TheoryMorphism(
        inner.source, outer.target,
        {s: outer.sort_map[t] for s, t in inner.sort_map.items()},
        {x: outer.sym_map[y] for x, y in inner.sym_map.items()})


def morphism_eq(a: TheoryMorphism, b: TheoryMorphism) -> bool:
    return a.source == b.source and a.target == b.target and \
        a.sort_map == b.sort_map and a.sym_map == b.sym_map


def restrict_model(m: TheoryMorphism, M: FinStructure) -> FinStructure:
    """Pull a model of the target back to a structure for the source."""
    src = m.source.signature
    return FinStructure(
        {s: M.sorts[m.sort_map[s]] for s in src.sorts},
        {r: M.rels[m.sym_map[r]] for r in src.relations},
        {f: dict(M.funs[m.sym_map[f]]) for f in src.functions})


@dataclass(frozen=True)
class AxiomCertificate:
    sequent: str
    status: str              # Proved | Refuted | Unknown


@dataclass(frozen=True)
class MorphismCertificate:
    status: str              # Proved | Refuted | Unknown
    axioms: Tuple[AxiomCertificate, ...]


def certify_morphism(m: TheoryMorphism, bound: int = 4,
                     probe_size: int = 2) -> MorphismCertificate:
    """Prove each translated axiom in the target, refute on small models, or
    tag Unknown."""
    check_morphism(m)
    certs: List[AxiomCertificate] = []
    probes: Optional[List[FinStructure]] = None
    for ax in m.source.axioms:
        image = translate_sequent(m, ax)
        out = prove_sequent(m.target, image, bound)
        if out.tag is OutcomeTag.PROVED:
            certs.append(AxiomCertificate(str(image), "Proved"))
            continue
        if probes is None:
            probes = enumerate_models(m.target, probe_size)
        refuted = any(not is_model(M, Theory(m.target.signature, (image,)))
                      for M in probes)
        certs.append(AxiomCertificate(str(image), "Refuted" if refuted else "Unknown"))
    statuses = {c.status for c in certs}
    overall = ("Refuted" if "Refuted" in statuses
               else "Unknown" if "Unknown" in statuses else "Proved")
    return MorphismCertificate(overall, tuple(certs))


def is_strict_extension(m: TheoryMorphism) -> bool:
    """True when the morphism is literally an inclusion of presentations."""
    if any(m.sort_map[s] != s for s in m.source.signature.sorts):
        return False
    if any(m.sym_map[x] != x for x in m.sym_map):
        return False
    if morphism_diagnostics(m):
        return False
    have = {normalize_sequent(ax) for ax in m.target.axioms}
    return all(normalize_sequent(ax) in have for ax in m.source.axioms)


# -- probe-witnessed 2-cells -------------------------------------------------------


@dataclass(frozen=True)
class ProbeCell:
    """Equality of model restriction along two parallel morphisms, checked on
    every probe model of the common target.  This witnesses an (identity
    component) natural isomorphism of the presented functors; probe families
    are sound but not complete for 2-cell existence."""
    left: TheoryMorphism
    right: TheoryMorphism
    probe_size: int
    probes_checked: int


def probe_models(thy: Theory, size: int) -> List[FinStructure]:
    return enumerate_models(thy, size)


def restrictions_agree(a: TheoryMorphism, b: TheoryMorphism,
                       probes: Sequence[FinStructure]) -> bool:
    if a.source != b.source or a.target != b.target:
        return False
    return all(restrict_model(a, M) == restrict_model(b, M) for M in probes)


def probe_cell(a: TheoryMorphism, b: TheoryMorphism, probe_size: int,
               probes: Optional[Sequence[FinStructure]] = None) -> Optional[ProbeCell]:
    if probes is None:
        probes = probe_models(a.target, probe_size)
    if not restrictions_agree(a, b, probes):
        return None
    return ProbeCell(a, b, probe_size, len(probes))


# -- coproducts --------------------------------------------------------------------


@dataclass(frozen=True)
class CoproductResult:
    theory: Theory
    injections: Tuple[TheoryMorphism, ...]


def _coproduct_prefixes(ts: Sequence[Theory]) -> List[str]:
    width = 1
    while True:
        prefixes = [f"c{i}" + "_" * width for i in range(len(ts))]
        names = [p + n for p, t in zip(prefixes, ts)
                 for n in t.signature.all_names()]
        if len(names) == len(set(names)):
            return prefixes
        width += 1


def theory_coproduct(ts: Sequence[Theory]) -> CoproductResult:
    """Disjoint (namespaced) union of signatures and axioms, with injections."""
    ts = list(ts)
    if not ts:
        return CoproductResult(Theory(Signature(())), ())
    prefixes = _coproduct_prefixes(ts)
    sorts: List[str] = []
    functions: Dict[str, Tuple[Tuple[str, ...], str]] = {}
    relations: Dict[str, Tuple[str, ...]] = {}
    injections: List[TheoryMorphism] = []
    for p, t in zip(prefixes, ts):
        sig = t.signature
        sorts.extend(p + s for s in sig.sorts)
        for f, (args, res) in sig.functions.items():
            functions[p + f] = (tuple(p + a for a in args), p + res)
        for r, arity in sig.relations.items():
            relations[p + r] = tuple(p + a for a in arity)
    coproduct = Theory(Signature(tuple(sorts), relations, functions))
    axioms: List[Sequent] = []
    for p, t in zip(prefixes, ts):
        inj = TheoryMorphism(t, coproduct,
                             {s: p + s for s in t.signature.sorts},
                             {x: p + x for x in list(t.signature.functions)
                              + list(t.signature.relations)})
        injections.append(inj)
        axioms.extend(translate_sequent(inj, ax) for ax in t.axioms)
    coproduct = Theory(coproduct.signature, tuple(axioms))
    injections = [TheoryMorphism(i.source, coproduct, i.sort_map, i.sym_map)
                  for i in injections]
    for i in injections:
        check_morphism(i)
    return CoproductResult(coproduct, tuple(injections))


def cotuple(cop: CoproductResult, legs: Sequence[TheoryMorphism],
            target: Theory) -> TheoryMorphism:
    """The induced morphism out of a coproduct with the given legs."""
    legs = list(legs)
    if len(legs) != len(cop.injections):
        raise MorphismError("need exactly one leg per coproduct summand")
    sort_map: Dict[str, str] = {}
    sym_map: Dict[str, str] = {}
    for inj, leg in zip(cop.injections, legs):
        if leg.source != inj.source or leg.target != target:
            raise MorphismError("leg does not match its summand")
        for s, img in inj.sort_map.items():
            sort_map[img] = leg.sort_map[s]
        for x, img in inj.sym_map.items():
            sym_map[img] = leg.sym_map[x]
    return check_morphism(TheoryMorphism(cop.theory, target, sort_map, sym_map))


def coproduct_of_morphisms(gs: Sequence[TheoryMorphism]) \
        -> Tuple[CoproductResult, CoproductResult, TheoryMorphism]:
    """⊔gs: ⊔sources -> ⊔targets, componentwise on the namespaced symbols."""
    gs = list(gs)
    srcs = theory_coproduct([g.source for g in gs])
    tgts = theory_coproduct([g.target for g in gs])
    legs = [compose_morphisms(tinj, g) for tinj, g in zip(tgts.injections, gs)]
    return srcs, tgts, cotuple(srcs, legs, tgts.theory)


# -- pushouts ----------------------------------------------------------------------


@dataclass(frozen=True)
class PushoutResult:
    theory: Theory
    from_left: TheoryMorphism
    from_right: TheoryMorphism


class _UF:
    def __init__(self) -> None:
        self.parent: Dict[Tuple[str, str, str], Tuple[str, str, str]] = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def theory_pushout(left: TheoryMorphism, right: TheoryMorphism,
                   keep_right_names: bool = False) -> PushoutResult:
    """Amalgamated union of the two targets over the common source.

    The signature is the disjoint union of the target signatures with the two
    images of each source symbol identified.  A class generated by a source
    symbol is named after that symbol; unidentified symbols keep their names
    behind a side prefix.  With keep_right_names the right target's names are
    preserved verbatim (refusing to identify two of them) and left-only
    classes get fresh names — the mode used for growing a stage in place.
    """
    if left.source != right.source:
        raise PushoutConflict("the two legs have different sources")
    check_morphism(left)
    check_morphism(right)
    base = left.source.signature
    lt, rt = left.target.signature, right.target.signature

    def kind_of(sig: Signature, name: str) -> str:
        if name in sig.sorts:
            return "sort"
        return "fun" if name in sig.functions else "rel"

    uf = _UF()
    generators: Dict[Tuple[str, str, str], List[str]] = {}
    for s in base.sorts:
        a = ("sort", "l", left.sort_map[s])
        b = ("sort", "r", right.sort_map[s])
        uf.union(a, b)
        generators.setdefault(uf.find(a), []).append(s)
    for x in list(base.functions) + list(base.relations):
        kind = kind_of(base, x)
        a = (kind, "l", left.sym_map[x])
        b = (kind, "r", right.sym_map[x])
        if kind_of(lt, left.sym_map[x]) != kind or kind_of(rt, right.sym_map[x]) != kind:
            raise PushoutConflict(f"images of {x!r} are not both {kind}s")
        uf.union(a, b)
        generators.setdefault(uf.find(a), []).append(x)
    # regroup generators on the final roots
    gens: Dict[Tuple[str, str, str], List[str]] = {}
    for root, names in generators.items():
        gens.setdefault(uf.find(root), []).extend(names)

    # with keep_right_names the right target is being extended in place, so
    # its symbols (and axioms) come first and the new material is appended
    sides = (("r", rt), ("l", lt)) if keep_right_names else (("l", lt), ("r", rt))
    members: Dict[Tuple[str, str, str], List[Tuple[str, str, str]]] = {}
    order: List[Tuple[str, str, str]] = []
    for side, sig in sides:
        for s in sig.sorts:
            order.append(("sort", side, s))
    for side, sig in sides:
        for f in sig.functions:
            order.append(("fun", side, f))
        for r in sig.relations:
            order.append(("rel", side, r))
    for item in order:
        members.setdefault(uf.find(item), []).append(item)

    used: Set[str] = set()
    names: Dict[Tuple[str, str, str], str] = {}
    roots_in_order: List[Tuple[str, str, str]] = []
    for item in order:
        root = uf.find(item)
        if root not in names:
            roots_in_order.append(root)
            names[root] = ""          # placeholder to keep first-seen order
    if keep_right_names:
        for root in roots_in_order:
            right_names = sorted({n for k, side, n in members[root] if side == "r"})
            if len(right_names) > 1:
                raise PushoutConflict(
                    f"pushout would identify right-side symbols {right_names}")
            if right_names:
                names[root] = right_names[0]
                used.add(right_names[0])
        for root in roots_in_order:
            if not names[root]:
                bare = sorted(n for k, side, n in members[root])[0]
                names[root] = fresh_name(bare, used)
                used.add(names[root])
    else:
        for root in roots_in_order:
            if root in gens:
                candidate = min(gens[root])
            else:
                kind, side, bare = members[root][0]
                candidate = ("c0_" if side == "l" else "c1_") + bare
            names[root] = fresh_name(candidate, used)
            used.add(names[root])

    def cls(kind: str, side: str, name: str) -> str:
        return names[uf.find((kind, side, name))]

    # arity consistency across every class
    for root in roots_in_order:
        kinds = {k for k, _, _ in members[root]}
        if len(kinds) != 1:
            raise PushoutConflict(f"class {names[root]!r} mixes symbol kinds {kinds}")
        kind = kinds.pop()
        shapes = set()
        for k, side, n in members[root]:
            sig = lt if side == "l" else rt
            if kind == "fun":
                args, res = sig.functions[n]
                shapes.add((tuple(cls("sort", side, a) for a in args),
                            cls("sort", side, res)))
            elif kind == "rel":
                shapes.add(tuple(cls("sort", side, a) for a in sig.relations[n]))
        if len(shapes) > 1:
            raise PushoutConflict(
                f"class {names[root]!r} has incompatible arities {sorted(shapes)}")

    sorts = tuple(names[r] for r in roots_in_order if members[r][0][0] == "sort")
    functions: Dict[str, Tuple[Tuple[str, ...], str]] = {}
    relations: Dict[str, Tuple[str, ...]] = {}
    for root in roots_in_order:
        kind, side, n = members[root][0]
        sig = lt if side == "l" else rt
        if kind == "fun":
            args, res = sig.functions[n]
            functions[names[root]] = (tuple(cls("sort", side, a) for a in args),
                                      cls("sort", side, res))
        elif kind == "rel":
            relations[names[root]] = tuple(cls("sort", side, a)
                                           for a in sig.relations[n])
    signature = Signature(sorts, relations, functions)
    bad = signature.diagnostics()
    assert not bad, f"pushout produced a broken signature: {bad}"

    def side_morphism(side: str, thy: Theory, into: Theory) -> TheoryMorphism:
        sig = thy.signature
        return TheoryMorphism(
            thy, into,
            {s: cls("sort", side, s) for s in sig.sorts},
            {x: cls(kind_of(sig, x), side, x)
             for x in list(sig.functions) + list(sig.relations)})

    shell = Theory(signature)
    axioms: List[Sequent] = []
    seen: Set[Sequent] = set()
    axiom_sides = (("r", right.target), ("l", left.target)) if keep_right_names \
        else (("l", left.target), ("r", right.target))
    for side, thy in axiom_sides:
        mor = side_morphism(side, thy, shell)
        for ax in thy.axioms:
            image = translate_sequent(mor, ax)
            key = normalize_sequent(image)
            if key not in seen:
                seen.add(key)
                axioms.append(image)
    theory = Theory(signature, tuple(axioms))
    from_left = check_morphism(side_morphism("l", left.target, theory))
    from_right = check_morphism(side_morphism("r", right.target, theory))
    assert morphism_eq(compose_morphisms(from_left, left),
                       compose_morphisms(from_right, right)), \
        "pushout square does not commute on presentations"
    return PushoutResult(theory, from_left, from_right)


# -- transfinite (ω-truncated) composition ------------------------------------------


@dataclass(frozen=True)
class TransfiniteComposite:
    morphism: TheoryMorphism            # coprojection from stage 0 into the union
    union: Theory
    cofinal_checked: bool


def transfinite_composition(chain: Sequence[TheoryMorphism],
                            start: Optional[Theory] = None,
                            _check_cofinal: bool = True) -> TransfiniteComposite:
    """Compose a strict extension chain; the colimit is the union presentation.

    Every stage must literally include the previous one; the coprojection from
    stage 0 is returned.  The result is checked to be invariant under passing
    to a cofinal subsequence (composing consecutive pairs).
    """
    chain = list(chain)
    if not chain:
        if start is None:
            raise StrictChainError("empty chain needs an explicit starting theory")
        ident = identity_morphism(start)
        return TransfiniteComposite(ident, start, True)
    for i, m in enumerate(chain):
        if not is_strict_extension(m):
            raise StrictChainError(f"stage {i} is not a strict presentation extension")
        if i and m.source != chain[i - 1].target:
            raise StrictChainError(f"stage {i} does not start at stage {i-1}'s end")
    last = chain[-1].target
    # the union of an inclusion chain is its final stage; recompute honestly
    sorts: List[str] = []
    functions: Dict[str, Tuple[Tuple[str, ...], str]] = {}
    relations: Dict[str, Tuple[str, ...]] = {}
    axioms: List[Sequent] = []
    seen_ax: Set[Sequent] = set()
    stages = [chain[0].source] + [m.target for m in chain]
    for t in stages:
        for s in t.signature.sorts:
            if s not in sorts:
                sorts.append(s)
        functions.update(t.signature.functions)
        relations.update(t.signature.relations)
        for ax in t.axioms:
            key = normalize_sequent(ax)
            if key not in seen_ax:
                seen_ax.add(key)
                axioms.append(ax)
    union = Theory(Signature(tuple(sorts), relations, functions), tuple(axioms))
    assert union.signature == last.signature and \
        {normalize_sequent(a) for a in union.axioms} == \
        {normalize_sequent(a) for a in last.axioms}, \
        "union of a strict chain must equal its final stage"
    first = chain[0]
    composite = first
    for m in chain[1:]:
        composite = compose_morphisms(m, composite)
    composite = TheoryMorphism(composite.source, union, composite.sort_map,
                               composite.sym_map)
    check_morphism(composite)
    cofinal = False
    if _check_cofinal and len(chain) > 1:
        paired: List[TheoryMorphism] = []
        for i in range(0, len(chain) - 1, 2):
            paired.append(compose_morphisms(chain[i + 1], chain[i]))
        if len(chain) % 2:
            paired.append(chain[-1])
        again = transfinite_composition(paired, _check_cofinal=False)
        assert morphism_eq(again.morphism, composite) and again.union == union, \
            "composition is not invariant under a cofinal subsequence"
        cofinal = True
    return TransfiniteComposite(composite, union, cofinal)


# -- lifting squares and the right lifting property ---------------------------------


@dataclass(frozen=True)
class LiftingSquare:
    """A probe-witnessed square from g onto rho: rho∘top agrees with
    bottom∘g on every probe model of rho's target."""
    g: TheoryMorphism
    top: TheoryMorphism                 # source(g) -> source(rho)
    bottom: TheoryMorphism              # target(g) -> target(rho)
    eta: ProbeCell


@dataclass(frozen=True)
class SquareEnumeration:
    squares: Tuple[LiftingSquare, ...]
    complete: bool
    examined: int


def enumerate_morphisms(src: Theory, tgt: Theory, budget: int = 4096,
                        probes: Optional[Sequence[FinStructure]] = None) \
        -> Tuple[List[TheoryMorphism], bool, int]:
    """Structure-compatible presentation maps src -> tgt in lexicographic
    order of their sort and symbol choices, axiom-refutation-filtered on the
    probe models.  Returns (maps, complete, examined)."""
    ssig, tsig = src.signature, tgt.signature
    out: List[TheoryMorphism] = []
    examined = 0
    sort_choices = list(itertools.product(tsig.sorts, repeat=len(ssig.sorts)))
    if not ssig.sorts:
        sort_choices = [()]
    for pick in sort_choices:
        sort_map = dict(zip(ssig.sorts, pick))
        fun_spaces: List[List[str]] = []
        for f, (args, res) in ssig.functions.items():
            want = (tuple(sort_map[a] for a in args), sort_map[res])
            fun_spaces.append([g for g, (a2, r2) in tsig.functions.items()
                               if (tuple(a2), r2) == want])
        rel_spaces: List[List[str]] = []
        for r, arity in ssig.relations.items():
            want = tuple(sort_map[a] for a in arity)
            rel_spaces.append([q for q, a2 in tsig.relations.items()
                               if tuple(a2) == want])
        for sym_pick in itertools.product(*(fun_spaces + rel_spaces)):
            examined += 1
            if examined > budget:
                return out, False, examined - 1
            sym_map = dict(zip(list(ssig.functions) + list(ssig.relations),
                               sym_pick))
            m = TheoryMorphism(src, tgt, dict(sort_map), sym_map)
            if morphism_diagnostics(m):
                continue
            if probes is not None and src.axioms:
                if any(not is_model(restrict_model(m, M), src) for M in probes):
                    continue
            out.append(m)
    return out, True, examined


def enumerate_lifting_squares(I: Sequence[TheoryMorphism], rho: TheoryMorphism,
                              probe_size: int = 2, budget: int = 4096) \
        -> SquareEnumeration:
    """All probe-witnessed squares from members of I onto rho, canonically
    ordered; partial (complete=False) when the budget runs out."""
    probes_mid = probe_models(rho.source, probe_size)
    probes_out = probe_models(rho.target, probe_size)
    squares: List[LiftingSquare] = []
    examined = 0
    complete = True
    for g in I:
        tops, ok_t, n1 = enumerate_morphisms(g.source, rho.source, budget - examined,
                                             probes_mid)
        examined += n1
        if not ok_t:
            complete = False
            break
        bottoms, ok_b, n2 = enumerate_morphisms(g.target, rho.target,
                                                budget - examined, probes_out)
        examined += n2
        if not ok_b:
            complete = False
            break
        for top in tops:
            for bottom in bottoms:
                eta = probe_cell(compose_morphisms(rho, top),
                                 compose_morphisms(bottom, g),
                                 probe_size, probes_out)
                if eta is not None:
                    squares.append(LiftingSquare(g, top, bottom, eta))
    return SquareEnumeration(tuple(squares), complete, examined)


@dataclass(frozen=True)
class LiftSolution:
    lift: TheoryMorphism                # target(g) -> source(f)
    nu1: ProbeCell                      # lift∘g  vs  top     (over source(f))
    nu2: ProbeCell                      # f∘lift  vs  bottom  (over target(f))


@dataclass(frozen=True)
class RLPRefusal:
    status: str                         # Refuted | Unknown
    examined: int
    reason: str


def check_rlp(g: TheoryMorphism, f: TheoryMorphism, square: LiftingSquare,
              probe_size: int = 2, budget: int = 4096):
    """Search for a lift through the square; LiftSolution or RLPRefusal.

    A lift is a presentation morphism k: target(g) -> source(f) whose two
    triangles agree with the square's legs on the probe models; with
    identity-component witnesses their pasting is the square's own cell, which
    is re-verified.  Refuted means the full candidate space was exhausted;
    Unknown means the budget ran out first.
    """
    if square.g is not g and not morphism_eq(square.g, g):
        raise MorphismError("square was not built over this generating map")
    if square.top.target != f.source or square.bottom.target != f.target:
        raise MorphismError("square does not sit over this map")
    probes_src = probe_models(f.source, probe_size)
    probes_tgt = probe_models(f.target, probe_size)
    if not restrictions_agree(compose_morphisms(f, square.top),
                              compose_morphisms(square.bottom, g), probes_tgt):
        raise MorphismError("square does not commute on the probe family")
    cands, complete, examined = enumerate_morphisms(g.target, f.source, budget,
                                                    probes_src)
    for k in cands:
        nu1 = probe_cell(compose_morphisms(k, g), square.top, probe_size, probes_src)
        if nu1 is None:
            continue
        nu2 = probe_cell(compose_morphisms(f, k), square.bottom, probe_size,
                         probes_tgt)
        if nu2 is None:
            continue
        return LiftSolution(k, nu1, nu2)
    if complete:
        return RLPRefusal("Refuted", examined,
                          "no presentation morphism lifts the square on the probes")
    return RLPRefusal("Unknown", examined, "candidate budget exhausted")


# -- stage logs and the factorization ------------------------------------------------


@dataclass(frozen=True)
class StageData:
    """Everything attached while passing one successor stage."""
    squares: Tuple[LiftingSquare, ...]
    coproduct_sources: CoproductResult      # ⊔ A_s
    coproduct_targets: CoproductResult      # ⊔ B_s
    coproduct_map: TheoryMorphism           # ⊔ g_s
    attach: TheoryMorphism                  # ⊔ A_s -> Z_j
    bottom: TheoryMorphism                  # ⊔ B_s -> Y
    pushout: PushoutResult


@dataclass(frozen=True)
class CellStageLog:
    stages: Tuple[Theory, ...]              # Z_0 .. Z_n
    inclusions: Tuple[TheoryMorphism, ...]  # i_{j,j+1}
    rhos: Tuple[TheoryMorphism, ...]        # rho_j : Z_j -> Y
    data: Tuple[StageData, ...]             # per successor stage
    probe_size: int
    stabilized: bool


def _stage_step(rho: TheoryMorphism, squares: Sequence[LiftingSquare]) \
        -> Tuple[StageData, TheoryMorphism, TheoryMorphism]:
    """One successor stage: pushout of the coproduct of the squares' maps."""
    Zj, Y = rho.source, rho.target
    cop_src, cop_tgt, g_cop = coproduct_of_morphisms([sq.g for sq in squares])
    attach = cotuple(cop_src, [sq.top for sq in squares], Zj)
    bottom = cotuple(cop_tgt, [sq.bottom for sq in squares], Y)
    push = theory_pushout(g_cop, attach, keep_right_names=True)
    incl = push.from_right
    assert is_strict_extension(incl), \
        "stage inclusion must keep the previous presentation intact"
    next_sorts = push.theory.signature.sorts
    sort_map: Dict[str, str] = {}
    sym_map: Dict[str, str] = {}
    for s in next_sorts:
        if s in Zj.signature.sorts:
            sort_map[s] = rho.sort_map[s]
    for s, img in push.from_left.sort_map.items():
        sort_map.setdefault(img, bottom.sort_map[s])
    for x in list(push.theory.signature.functions) + \
            list(push.theory.signature.relations):
        if x in Zj.signature.functions or x in Zj.signature.relations:
            sym_map[x] = rho.sym_map[x]
    for x, img in push.from_left.sym_map.items():
        sym_map.setdefault(img, bottom.sym_map[x])
    rho_next = check_morphism(TheoryMorphism(push.theory, Y, sort_map, sym_map))
    assert morphism_eq(compose_morphisms(rho_next, incl), rho), \
        "next stage map must restrict to the previous one"
    data = StageData(tuple(squares), cop_src, cop_tgt, g_cop, attach, bottom, push)
    return data, incl, rho_next


@dataclass(frozen=True)
class InjVerification:
    status: str                         # verified | failed | unknown
    squares_checked: int
    failures: Tuple[RLPRefusal, ...]
    caveat: str


@dataclass(frozen=True)
class SoaResult:
    left: TheoryMorphism                # f' = i_{0,n}, the cell part
    right: TheoryMorphism               # f'' = rho_n
    strict_composite: bool              # f''∘f' literally equals f
    composite_probes_checked: int
    log: CellStageLog
    inj: InjVerification


def soa_factorize(f: TheoryMorphism, I: Sequence[TheoryMorphism], stages: int = 3,
                  probe_size: int = 2, budget: int = 4096) -> SoaResult:
    """Factor f through `stages` successor stages of square attachment.

    Each stage collects every probe-witnessed square from I onto the current
    rho, pushes out the coproduct of their generating maps, and extends rho.
    The left factor is the composite stage inclusion (structurally a cell
    complex, certified by the log); the right factor is checked against every
    square enumerable at the final stage — a finite-bound verification, not a
    proof over all of I-inj.
    """
    check_morphism(f)
    for g in I:
        check_morphism(g)
    stage_theories: List[Theory] = [f.source]
    inclusions: List[TheoryMorphism] = []
    rhos: List[TheoryMorphism] = [f]
    data: List[StageData] = []
    stabilized = False
    for _ in range(stages):
        enum = enumerate_lifting_squares(I, rhos[-1], probe_size, budget)
        if not enum.complete:
            raise StageBudgetError(
                f"square enumeration exceeded its budget ({enum.examined} examined)")
        if not enum.squares:
            stabilized = True
            break
        stage, incl, rho_next = _stage_step(rhos[-1], enum.squares)
        data.append(stage)
        inclusions.append(incl)
        rhos.append(rho_next)
        stage_theories.append(rho_next.source)
    log = CellStageLog(tuple(stage_theories), tuple(inclusions), tuple(rhos),
                       tuple(data), probe_size, stabilized)
    left = identity_morphism(f.source)
    for incl in inclusions:
        left = compose_morphisms(incl, left)
    right = rhos[-1]
    composite = compose_morphisms(right, left)
    strict = morphism_eq(composite, f)
    probes = probe_models(f.target, probe_size)
    assert restrictions_agree(composite, f, probes), \
        "factorization composite restricts models differently from f"

    final = enumerate_lifting_squares(I, right, probe_size, budget)
    failures: List[RLPRefusal] = []
    unknown = not final.complete
    for sq in final.squares:
        res = check_rlp(sq.g, right, sq, probe_size, budget)
        if isinstance(res, RLPRefusal):
            if res.status == "Unknown":
                unknown = True
            else:
                failures.append(res)
    status = ("failed" if failures else "unknown" if unknown else "verified")
    caveat = (f"right lifting property verified against {len(final.squares)} "
              f"squares enumerated at probe size {probe_size}; not a proof "
              f"over the full class")
    inj = InjVerification(status, len(final.squares), tuple(failures), caveat)
    return SoaResult(left, right, strict, len(probes), log, inj)


def verify_stage_log(log: CellStageLog, I: Sequence[TheoryMorphism]) -> List[str]:
    """Structural soundness of a stage log.

    Checks that every successor stage is literally the pushout of the
    coproduct of its squares' generating maps, that the generating maps come
    from I, that each rho restricts to the previous one along the inclusion,
    that the bottom triangles agree on the probe family, and that stages grow
    monotonically.
    """
    out: List[str] = []
    if len(log.stages) != len(log.inclusions) + 1 or \
       len(log.rhos) != len(log.stages) or len(log.data) != len(log.inclusions):
        return ["log shape: stages, inclusions, rhos, and data do not line up"]
    probes = probe_models(log.rhos[0].target, log.probe_size)
    for j, stage in enumerate(log.data):
        for sq in stage.squares:
            if not any(morphism_eq(sq.g, g) for g in I):
                out.append(f"stage {j}: a square's generating map is not in I")
        cop_src, cop_tgt, g_cop = coproduct_of_morphisms([sq.g for sq in stage.squares])
        if cop_src.theory != stage.coproduct_sources.theory or \
           cop_tgt.theory != stage.coproduct_targets.theory or \
           not morphism_eq(g_cop, stage.coproduct_map):
            out.append(f"stage {j}: logged coproduct differs from the recomputed one")
            continue
        redo = theory_pushout(stage.coproduct_map, stage.attach,
                              keep_right_names=True)
        if redo.theory != log.stages[j + 1]:
            out.append(f"stage {j}: stage theory is not the pushout of its squares")
        if not morphism_eq(redo.from_right, log.inclusions[j]):
            out.append(f"stage {j}: inclusion is not the pushout coprojection")
        if not morphism_eq(compose_morphisms(log.rhos[j + 1], log.inclusions[j]),
                           log.rhos[j]):
            out.append(f"stage {j}: rho does not restrict to the previous rho")
        if not is_strict_extension(log.inclusions[j]):
            out.append(f"stage {j}: not a strict presentation extension")
        via_left = compose_morphisms(log.rhos[j + 1], redo.from_left)
        if not restrictions_agree(via_left, stage.bottom, probes):
            out.append(f"stage {j}: bottom triangle fails on the probe family")
    return out


# -- JSON ---------------------------------------------------------------------------


def morphism_to_json(m: TheoryMorphism) -> str:
    return json.dumps({
        "source": theory_to_text(m.source),
        "target": theory_to_text(m.target),
        "sorts": dict(sorted(m.sort_map.items())),
        "symbols": dict(sorted(m.sym_map.items())),
    }, indent=2, sort_keys=True)


def morphism_from_json(text: str) -> TheoryMorphism:
    data = json.loads(text)
    src, _ = parse_theory(data["source"])
    tgt, _ = parse_theory(data["target"])
    return check_morphism(TheoryMorphism(src, tgt, dict(data["sorts"]),
                                         dict(data["symbols"])))


def stage_log_to_json(log: CellStageLog) -> str:
    def mor(m: TheoryMorphism) -> Dict:
        return {"sorts": dict(sorted(m.sort_map.items())),
                "symbols": dict(sorted(m.sym_map.items()))}

    return json.dumps({
        "probe_size": log.probe_size,
        "stabilized": log.stabilized,
        "stages": [theory_to_text(t) for t in log.stages],
        "inclusions": [mor(m) for m in log.inclusions],
        "rhos": [mor(m) for m in log.rhos],
        "stage_squares": [
            [{"g": mor(sq.g), "top": mor(sq.top), "bottom": mor(sq.bottom),
              "probes_checked": sq.eta.probes_checked}
             for sq in stage.squares]
            for stage in log.data
        ],
    }, indent=2, sort_keys=True)
