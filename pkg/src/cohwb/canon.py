"""The canonical language of a finite category and its internal theory.

A finite category speaks about itself through a signature with one sort per
object and one unary function symbol per arrow.  Marked diagrams (identities,
triangles, monos, surjections, terminal/initial objects, product cones,
equalizer forks, sups and infs of subobjects) translate to coherent sequents,
and for a set fragment each marked property can also be checked concretely —
the two verdicts must agree.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .logic import (
    And, App, Context, Eq, Exists, FALSE, Formula, Rel, Sequent, Signature,
    Term, Theory, TRUE, Var, conj, ctx, disj,
)
from . import semantics
from .semantics import FinStructure
from .fincat import FinCat, SetFragment

TAGS = ("identity", "triangle", "mono", "surjective", "terminal", "initial",
        "product", "equalizer", "sup", "inf")


@dataclass(frozen=True)
class MarkedDiagram:
    """A diagram shape in a category together with a claimed property."""
    tag: str
    arrows: Tuple[str, ...] = ()
    objects: Tuple[str, ...] = ()


class MalformedDiagram(ValueError):
    pass


def shape_diagnostics(c: FinCat, d: MarkedDiagram) -> List[str]:
    """Empty iff the named arrows/objects exist and fit the tag's shape."""
    arrs, objs = set(c.arrows), set(c.objects)
    out: List[str] = []
    if d.tag not in TAGS:
        return [f"unknown tag {d.tag!r}"]
    for a in d.arrows:
        if a not in arrs:
            out.append(f"unknown arrow {a!r}")
    for x in d.objects:
        if x not in objs:
            out.append(f"unknown object {x!r}")
    if out:
        return out
    t, A, O = d.tag, d.arrows, d.objects
    if t == "identity":
        if len(A) != 1 or O:
            out.append("identity takes one arrow")
        elif c.src[A[0]] != c.tgt[A[0]]:
            out.append("identity arrow must be an endo-arrow")
    elif t == "triangle":
        if len(A) != 3 or O:
            out.append("triangle takes arrows (f, g, h) with g after f parallel to h")
        else:
            f, g, h = A
            if not (c.tgt[f] == c.src[g] and c.src[f] == c.src[h] and c.tgt[g] == c.tgt[h]):
                out.append("triangle arrows do not fit g∘f = h")
    elif t in ("mono", "surjective"):
        if len(A) != 1 or O:
            out.append(f"{t} takes one arrow")
    elif t in ("terminal", "initial"):
        if len(O) != 1 or A:
            out.append(f"{t} takes one object")
    elif t == "product":
        if len(A) != 2 or O:
            out.append("product takes two legs out of a common vertex")
        elif c.src[A[0]] != c.src[A[1]]:
            out.append("product legs must share their source")
    elif t == "equalizer":
        if len(A) != 3 or O:
            out.append("equalizer takes arrows (mono, left, right)")
        else:
            e, f, g = A
            if not (c.tgt[e] == c.src[f] == c.src[g] and c.tgt[f] == c.tgt[g]):
                out.append("equalizer arrows do not fit E -> A => B")
    elif t in ("sup", "inf"):
        if len(A) < 1 or O:
            out.append(f"{t} takes an outer arrow followed by a family")
        else:
            outer, family = A[0], A[1:]
            if any(c.tgt[a] != c.tgt[outer] for a in family):
                out.append("family arrows must share the outer arrow's target")
    return out


def hook_diagnostics(frag: SetFragment, d: MarkedDiagram) -> List[str]:
    """Injectivity side conditions for the arrows a diagram presents as monos.

    Equalizer forks and sup/inf families come with their arrows already drawn
    as subobject inclusions; the property claimed by the tag is relative to
    that, so a non-injective realization makes the diagram malformed rather
    than false.
    """
    need: Tuple[str, ...] = ()
    if d.tag == "equalizer":
        need = d.arrows[:1]
    elif d.tag in ("sup", "inf"):
        need = d.arrows
    out = []
    for a in need:
        fn = frag.funs[a]
        if len(set(fn.values())) != len(fn):
            out.append(f"arrow {a} must be injective to present a subobject")
    return out


def well_shaped(frag: SetFragment, d: MarkedDiagram) -> bool:
    return not shape_diagnostics(frag.cat, d) and not hook_diagnostics(frag, d)


# ---------------------------------------------------------------------------
# canonical language and identical interpretation


def canonical_language(c: FinCat) -> Signature:
    """One sort per object, one unary function symbol per arrow."""
    return Signature(
        sorts=tuple(c.objects),
        relations={},
        functions={a: ((c.src[a],), c.tgt[a]) for a in c.arrows},
    )


def identical_structure(frag: SetFragment) -> FinStructure:
    """The fragment read as a structure over its own canonical language."""
    return FinStructure(
        sorts={x: tuple(frag.sets[x]) for x in frag.cat.objects},
        rels={},
        funs={a: {(e,): v for e, v in frag.funs[a].items()} for a in frag.cat.arrows},
    )


# ---------------------------------------------------------------------------
# the sequent table


def _ap(fn: str, t: Term) -> Term:
    return App(fn, (t,))


def internal_sequents(c: FinCat, d: MarkedDiagram) -> List[Sequent]:
    """The sequents expressing the marked property in the canonical language."""
    diags = shape_diagnostics(c, d)
    if diags:
        raise MalformedDiagram("; ".join(diags))
    t, A, O = d.tag, d.arrows, d.objects
    a, a2, b, cv, c2, e, x = (Var(n) for n in ("a", "a2", "b", "c", "c2", "e", "x"))
    if t == "identity":
        f = A[0]
        s = c.src[f]
        return [Sequent(ctx(("a", s)), TRUE, Eq(_ap(f, a), a))]
    if t == "triangle":
        f, g, h = A
        s = c.src[f]
        return [Sequent(ctx(("a", s)), TRUE, Eq(_ap(g, _ap(f, a)), _ap(h, a)))]
    if t == "mono":
        f = A[0]
        s = c.src[f]
        return [Sequent(ctx(("a", s), ("a2", s)),
                        Eq(_ap(f, a), _ap(f, a2)), Eq(a, a2))]
    if t == "surjective":
        f = A[0]
        return [Sequent(ctx(("b", c.tgt[f])), TRUE,
                        Exists("a", c.src[f], Eq(_ap(f, a), b)))]
    if t == "terminal":
        s = O[0]
        return [Sequent(ctx(("a", s), ("a2", s)), TRUE, Eq(a, a2)),
                Sequent(ctx(), TRUE, Exists("a", s, Eq(a, a)))]
    if t == "initial":
        s = O[0]
        return [Sequent(ctx(("a", s)), Eq(a, a), FALSE)]
    if t == "product":
        f, g = A
        v = c.src[f]
        sa, sb = c.tgt[f], c.tgt[g]
        return [
            Sequent(ctx(("c", v), ("c2", v)),
                    conj(Eq(_ap(f, cv), _ap(f, c2)), Eq(_ap(g, cv), _ap(g, c2))),
                    Eq(cv, c2)),
            Sequent(ctx(("a", sa), ("b", sb)), TRUE,
                    Exists("c", v, conj(Eq(_ap(f, cv), a), Eq(_ap(g, cv), b)))),
        ]
    if t == "equalizer":
        eps, f, g = A
        s = c.src[f]
        sE = c.src[eps]
        mem = Exists("e", sE, Eq(_ap(eps, e), a))
        return [
            Sequent(ctx(("a", s)), Eq(_ap(f, a), _ap(g, a)), mem),
            Sequent(ctx(("a", s)), mem, Eq(_ap(f, a), _ap(g, a))),
        ]
    if t in ("sup", "inf"):
        outer, family = A[0], A[1:]
        sX = c.tgt[outer]
        hit_outer = Exists("b", c.src[outer], Eq(_ap(outer, b), x))
        hits = [Exists("a", c.src[fi], Eq(_ap(fi, a), x)) for fi in family]
        combined = disj(*hits) if t == "sup" else conj(*hits)
        return [
            Sequent(ctx(("x", sX)), combined, hit_outer),
            Sequent(ctx(("x", sX)), hit_outer, combined),
        ]
    raise MalformedDiagram(f"unknown tag {t!r}")


def internal_theory(c: FinCat) -> Theory:
    """Identity and triangle sequents from the composition table, plus the
    sequents of every declared marker, over the canonical language."""
    axioms: List[Sequent] = []
    for xobj in c.objects:
        axioms += internal_sequents(c, MarkedDiagram("identity", (c.identity[xobj],)))
    for (g, f), h in sorted(c.comp.items()):
        if c.is_identity(g) or c.is_identity(f):
            continue
        axioms += internal_sequents(c, MarkedDiagram("triangle", (f, g, h)))
    m = c.markers
    for f in m.get("mono", ()):
        axioms += internal_sequents(c, MarkedDiagram("mono", (f,)))
    for f in m.get("surjective", ()):
        axioms += internal_sequents(c, MarkedDiagram("surjective", (f,)))
    if m.get("terminal") is not None:
        axioms += internal_sequents(c, MarkedDiagram("terminal", (), (m["terminal"],)))
    if m.get("initial") is not None:
        axioms += internal_sequents(c, MarkedDiagram("initial", (), (m["initial"],)))
    for cone in m.get("products", ()):
        axioms += internal_sequents(c, MarkedDiagram("product", tuple(cone["legs"])))
    for fork in m.get("equalizers", ()):
        axioms += internal_sequents(
            c, MarkedDiagram("equalizer", (fork["mono"], fork["left"], fork["right"])))
    for key, tag in (("sups", "sup"), ("infs", "inf")):
        for dd in m.get(key, ()):
            axioms += internal_sequents(
                c, MarkedDiagram(tag, (dd["outer"],) + tuple(dd["family"])))
    return Theory(canonical_language(c), tuple(axioms))


# ---------------------------------------------------------------------------
# concrete verdicts and the agreement check


def semantic_verdict(frag: SetFragment, d: MarkedDiagram) -> bool:
    """Direct check of the marked property in the sets of the fragment."""
    diags = shape_diagnostics(frag.cat, d) + hook_diagnostics(frag, d)
    if diags:
        raise MalformedDiagram("; ".join(diags))
    c, t, A, O = frag.cat, d.tag, d.arrows, d.objects
    if t == "identity":
        f = A[0]
        return frag.funs[f] == {e: e for e in frag.sets[c.src[f]]}
    if t == "triangle":
        f, g, h = A
        return all(frag.funs[g][frag.funs[f][e]] == frag.funs[h][e]
                   for e in frag.sets[c.src[f]])
    if t == "mono":
        fn = frag.funs[A[0]]
        return len(set(fn.values())) == len(fn)
    if t == "surjective":
        f = A[0]
        return set(frag.funs[f].values()) == set(frag.sets[c.tgt[f]])
    if t == "terminal":
        return len(frag.sets[O[0]]) == 1
    if t == "initial":
        return len(frag.sets[O[0]]) == 0
    if t == "product":
        f, g = A
        pairs = [(frag.funs[f][e], frag.funs[g][e]) for e in frag.sets[c.src[f]]]
        want = [(p, q) for p in frag.sets[c.tgt[f]] for q in frag.sets[c.tgt[g]]]
        return len(pairs) == len(set(pairs)) and set(pairs) == set(want)
    if t == "equalizer":
        eps, f, g = A
        image = set(frag.funs[eps].values())
        eq_set = {e for e in frag.sets[c.src[f]] if frag.funs[f][e] == frag.funs[g][e]}
        return image == eq_set
    if t in ("sup", "inf"):
        outer, family = A[0], A[1:]
        img = set(frag.funs[outer].values())
        fam = [set(frag.funs[fi].values()) for fi in family]
        if t == "sup":
            combined = set().union(*fam) if fam else set()
        else:
            combined = set.intersection(*fam) if fam else set(frag.sets[c.tgt[outer]])
        return img == combined
    raise MalformedDiagram(f"unknown tag {t!r}")


def sequent_verdict(frag: SetFragment, d: MarkedDiagram) -> bool:
    """Validity of the diagram's internal sequents in the identical structure."""
    M = identical_structure(frag)
    return all(semantics.holds_sequent(M, s) for s in internal_sequents(frag.cat, d))


@dataclass(frozen=True)
class DiagramVerdict:
    semantic: bool
    sequent: bool
    agree: bool


def verify_diagram_property(frag: SetFragment, d: MarkedDiagram) -> DiagramVerdict:
    sem = semantic_verdict(frag, d)
    seq = sequent_verdict(frag, d)
    return DiagramVerdict(sem, seq, sem == seq)


# ---------------------------------------------------------------------------
# generating well-shaped diagrams (for fuzzing the agreement)


def well_shaped_diagrams(
    frag: SetFragment,
    tags: Sequence[str] = TAGS,
    family_size: int = 2,
) -> Iterator[MarkedDiagram]:
    """Every well-shaped diagram over the fragment, tag by tag, in canonical
    order; sup/inf families have exactly ``family_size`` members."""
    c = frag.cat

    def injective(a: str) -> bool:
        fn = frag.funs[a]
        return len(set(fn.values())) == len(fn)

    for tag in tags:
        if tag == "identity":
            for f in c.arrows:
                if c.src[f] == c.tgt[f]:
                    yield MarkedDiagram("identity", (f,))
        elif tag == "triangle":
            for f in c.arrows:
                for g in c.arrows:
                    if c.tgt[f] != c.src[g]:
                        continue
                    for h in c.hom(c.src[f], c.tgt[g]):
                        yield MarkedDiagram("triangle", (f, g, h))
        elif tag in ("mono", "surjective"):
            for f in c.arrows:
                yield MarkedDiagram(tag, (f,))
        elif tag in ("terminal", "initial"):
            for x in c.objects:
                yield MarkedDiagram(tag, (), (x,))
        elif tag == "product":
            for f in c.arrows:
                for g in c.arrows:
                    if c.src[f] == c.src[g]:
                        yield MarkedDiagram("product", (f, g))
        elif tag == "equalizer":
            for eps in c.arrows:
                if not injective(eps):
                    continue
                for f in c.arrows:
                    if c.src[f] != c.tgt[eps]:
                        continue
                    for g in c.hom(c.src[f], c.tgt[f]):
                        yield MarkedDiagram("equalizer", (eps, f, g))
        elif tag in ("sup", "inf"):
            monos = [a for a in c.arrows if injective(a)]
            for outer in monos:
                into = [a for a in monos if c.tgt[a] == c.tgt[outer]]
                for fam in itertools.combinations_with_replacement(into, family_size):
                    yield MarkedDiagram(tag, (outer,) + fam)
