"""Filtered and chain colimits of finite categories.

The colimit of a filtered diagram of categories is computed on the arrow
sets: pairs (stage, name) modulo the closure of the one-step relation
"x at stage i ~ (transition along u)(x) at stage k".  For a filtered index
this closure coincides with the usual two-sided description (a direct
implementation of which is kept around as an oracle).  Composition pushes two
representatives to a common stage and composes there.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .fincat import (
    FinCat, FinFunctor, SetFragment, TwoCell, identity_cell, identity_functor,
    compose_functors, functor_eq, is_limit_cone_cat, is_mono_arrow, is_epi_arrow,
    validate_category, validate_functor,
)
from . import canon


class NotFilteredError(ValueError):
    pass


class StageBoundError(ValueError):
    pass


@dataclass
class ChainDiagram:
    """A diagram of categories over a finite index category."""
    index: FinCat
    stages: Dict[str, FinCat]
    transitions: Dict[str, FinFunctor]                  # index arrow -> functor
    fragments: Dict[str, SetFragment] = field(default_factory=dict)


def validate_chain(d: ChainDiagram) -> List[str]:
    out = validate_category(d.index)
    for i in d.index.objects:
        if i not in d.stages:
            out.append(f"no stage for index object {i}")
    for u in d.index.arrows:
        F = d.transitions.get(u)
        if F is None:
            out.append(f"no transition for index arrow {u}")
            continue
        if F.source != d.stages[d.index.src[u]] or F.target != d.stages[d.index.tgt[u]]:
            out.append(f"transition {u}: wrong source or target stage")
        else:
            out.extend(f"transition {u}: {msg}" for msg in validate_functor(F))
    if out:
        return out
    for i in d.index.objects:
        if not functor_eq(d.transitions[d.index.identity[i]], identity_functor(d.stages[i])):
            out.append(f"transition of the identity at {i} is not the identity functor")
    for g, f in d.index.composable_pairs():
        got = d.transitions[d.index.comp[(g, f)]]
        want = compose_functors(d.transitions[g], d.transitions[f])
        if not functor_eq(got, want):
            out.append(f"transition of {g} after {f} is not the composite")
    for i, frag in d.fragments.items():
        if frag.cat != d.stages.get(i):
            out.append(f"fragment at {i} realizes a different category")
    return out


def is_filtered(J: FinCat) -> bool:
    """Nonempty; every object pair has a cocone; every parallel pair is equalized."""
    if not J.objects:
        return False
    for x in J.objects:
        for y in J.objects:
            if not any(J.hom(x, k) and J.hom(y, k) for k in J.objects):
                return False
    for u in J.arrows:
        for v in J.arrows:
            if J.src[u] != J.src[v] or J.tgt[u] != J.tgt[v]:
                continue
            if not any(J.comp[(w, u)] == J.comp[(w, v)]
                       for k in J.objects for w in J.hom(J.tgt[u], k)):
                return False
    return True


def omega_chain(
    cats: Sequence[FinCat],
    steps: Sequence[FinFunctor],
    fragments: Optional[Sequence[SetFragment]] = None,
) -> ChainDiagram:
    """A truncated chain 0 -> 1 -> ... -> n-1 with the given step functors."""
    n = len(cats)
    if len(steps) != max(0, n - 1):
        raise ValueError("need exactly one step functor between consecutive stages")
    names = [str(i) for i in range(n)]
    arrows = [f"le_{i}_{j}" for i in range(n) for j in range(i, n)]
    src = {f"le_{i}_{j}": names[i] for i in range(n) for j in range(i, n)}
    tgt = {f"le_{i}_{j}": names[j] for i in range(n) for j in range(i, n)}
    ident = {names[i]: f"le_{i}_{i}" for i in range(n)}
    comp = {}
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                comp[(f"le_{j}_{k}", f"le_{i}_{j}")] = f"le_{i}_{k}"
    index = FinCat(tuple(names), tuple(arrows), src, tgt, ident, comp)
    trans: Dict[str, FinFunctor] = {}
    for i in range(n):
        for j in range(i, n):
            F = identity_functor(cats[i])
            for t in range(i, j):
                F = compose_functors(steps[t], F)
            trans[f"le_{i}_{j}"] = F
    frags = {names[i]: fragments[i] for i in range(n)} if fragments else {}
    return ChainDiagram(index, {names[i]: cats[i] for i in range(n)}, trans, frags)


# ---------------------------------------------------------------------------
# the colimit construction


class _UF:
    def __init__(self) -> None:
        self.parent: Dict[Tuple[str, str], Tuple[str, str]] = {}

    def add(self, x: Tuple[str, str]) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: Tuple[str, str]) -> Tuple[str, str]:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: Tuple[str, str], b: Tuple[str, str]) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    def classes(self) -> Dict[Tuple[str, str], List[Tuple[str, str]]]:
        out: Dict[Tuple[str, str], List[Tuple[str, str]]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return out


@dataclass
class ColimitResult:
    diagram: ChainDiagram
    colimit: FinCat
    obj_class: Dict[Tuple[str, str], str]        # (stage, object) -> colimit object
    arr_class: Dict[Tuple[str, str], str]        # (stage, arrow) -> colimit arrow
    coprojections: Dict[str, FinFunctor]


def chain_colimit(d: ChainDiagram) -> ColimitResult:
    """Colimit of a filtered diagram of finite categories."""
    issues = validate_chain(d)
    if issues:
        raise ValueError("; ".join(issues))
    if not is_filtered(d.index):
        raise NotFilteredError("index category is not filtered")
    J = d.index
    stage_pos = {i: n for n, i in enumerate(J.objects)}

    obj_uf, arr_uf = _UF(), _UF()
    for i in J.objects:
        for x in d.stages[i].objects:
            obj_uf.add((i, x))
        for f in d.stages[i].arrows:
            arr_uf.add((i, f))
    for u in J.arrows:
        i, k = J.src[u], J.tgt[u]
        T = d.transitions[u]
        for x in d.stages[i].objects:
            obj_uf.union((i, x), (k, T.obj[x]))
        for f in d.stages[i].arrows:
            arr_uf.union((i, f), (k, T.arr[f]))

    def name_classes(uf: _UF) -> Dict[Tuple[str, str], str]:
        named: Dict[Tuple[str, str], str] = {}
        for rep, members in uf.classes().items():
            stage, nm = min(members, key=lambda p: (stage_pos[p[0]], p[1]))
            named[rep] = f"{nm}@{stage}"
        return {x: named[uf.find(x)] for x in uf.parent}

    obj_class = name_classes(obj_uf)
    arr_class = name_classes(arr_uf)

    objects = tuple(sorted(set(obj_class.values())))
    arrows = tuple(sorted(set(arr_class.values())))
    rep_of_arr: Dict[str, Tuple[str, str]] = {}
    for (i, f), nm in sorted(arr_class.items(), key=lambda p: (stage_pos[p[0][0]], p[0][1])):
        rep_of_arr.setdefault(nm, (i, f))
    rep_of_obj: Dict[str, Tuple[str, str]] = {}
    for (i, x), nm in sorted(obj_class.items(), key=lambda p: (stage_pos[p[0][0]], p[0][1])):
        rep_of_obj.setdefault(nm, (i, x))

    src = {}
    tgt = {}
    for nm, (i, f) in rep_of_arr.items():
        src[nm] = obj_class[(i, d.stages[i].src[f])]
        tgt[nm] = obj_class[(i, d.stages[i].tgt[f])]
    ident = {}
    for nm, (i, x) in rep_of_obj.items():
        ident[nm] = arr_class[(i, d.stages[i].identity[x])]

    def compose_classes(gn: str, fn: str) -> str:
        (j, g), (i, f) = rep_of_arr[gn], rep_of_arr[fn]
        for k in J.objects:
            for u in J.hom(i, k):
                Tf = d.transitions[u].arr[f]
                for v in J.hom(j, k):
                    Tg = d.transitions[v].arr[g]
                    if d.stages[k].tgt[Tf] == d.stages[k].src[Tg]:
                        return arr_class[(k, d.stages[k].comp[(Tg, Tf)])]
        raise AssertionError(f"no common stage composes {gn} after {fn}")

    comp = {}
    for gn in arrows:
        for fn in arrows:
            if tgt[fn] == src[gn]:
                comp[(gn, fn)] = compose_classes(gn, fn)

    colim = FinCat(objects, arrows, src, tgt, ident, comp)
    coproj = {
        i: FinFunctor(d.stages[i], colim,
                      {x: obj_class[(i, x)] for x in d.stages[i].objects},
                      {f: arr_class[(i, f)] for f in d.stages[i].arrows})
        for i in J.objects
    }
    return ColimitResult(d, colim, obj_class, arr_class, coproj)


def filtered_set_classes(
    d: ChainDiagram, items: Mapping[str, Sequence[str]], push
) -> Dict[Tuple[str, str], Set[Tuple[str, str]]]:
    """Two-sided description of the colimit classes, as an independent oracle.

    ``items[i]`` lists the elements at stage i; ``push(u, x)`` moves an element
    along the index arrow u.  (x,i) ~ (y,j) iff some pair of index arrows into
    a common stage identifies them.
    """
    J = d.index
    pts = [(i, x) for i in J.objects for x in items[i]]

    def related(a: Tuple[str, str], b: Tuple[str, str]) -> bool:
        (i, x), (j, y) = a, b
        for k in J.objects:
            for u in J.hom(i, k):
                for v in J.hom(j, k):
                    if push(u, x) == push(v, y):
                        return True
        return False

    classes: Dict[Tuple[str, str], Set[Tuple[str, str]]] = {}
    for p in pts:
        hit = None
        for rep, members in classes.items():
            if related(p, rep):
                hit = rep
                break
        if hit is None:
            classes[p] = {p}
        else:
            classes[hit].add(p)
    # the relation must come out transitive on a filtered index; verify
    for rep, members in classes.items():
        for m in members:
            if not related(m, rep):
                raise AssertionError("two-sided relation failed to be transitive")
    return classes


# ---------------------------------------------------------------------------
# coherence of the colimit (sampled)


def verify_colimit_coherent(
    res: ColimitResult, max_pairs: int = 12, max_arrows: int = 12
) -> List[str]:
    """Sampled check that stage-level coherent structure survives into the colimit.

    For each stage: categorical limit cones over sampled pair/parallel-pair
    diagrams must map to limit cones; concrete image factorizations (for
    fragment stages) must map to epi-mono factorizations; marked sups must
    remain least upper bounds of subobjects.
    """
    from .fincat import find_limit_cones, discrete_category, FragmentBuilder

    d, colim = res.diagram, res.colimit
    out: List[str] = []
    for i in d.index.objects:
        cat = d.stages[i]
        mu = res.coprojections[i]
        # binary products present at this stage
        pair_shape = discrete_category(["1", "2"])
        seen = 0
        for x, y in itertools.combinations_with_replacement(cat.objects, 2):
            if seen >= max_pairs:
                break
            diag = FinFunctor(pair_shape, cat, {"1": x, "2": y},
                              {"id_1": cat.identity[x], "id_2": cat.identity[y]})
            cones = find_limit_cones(cat, diag)
            if not cones:
                continue
            seen += 1
            apex, legs = cones[0]
            im_diag = compose_functors(mu, diag)
            im_legs = {j: mu.arr[a] for j, a in legs.items()}
            if not is_limit_cone_cat(colim, im_diag, mu.obj[apex], im_legs):
                out.append(f"stage {i}: product cone over ({x},{y}) not preserved")
        # image factorizations of fragment arrows
        frag = d.fragments.get(i)
        if frag is not None:
            b = FragmentBuilder.from_fragment(frag)
            for f in list(cat.arrows)[:max_arrows]:
                fn = frag.funs[f]
                image = tuple(sorted(set(fn.values()),
                                     key=frag.sets[cat.tgt[f]].index))
                obj = b.object_with_set(image)
                if obj is None:
                    continue  # stage not closed under this image; nothing to check
                e = b.find_arrow(cat.src[f], obj, dict(fn))
                m = b.find_arrow(obj, cat.tgt[f], {v: v for v in image})
                if e is None or m is None:
                    continue
                if not is_epi_arrow(colim, mu.arr[e]):
                    out.append(f"stage {i}: image part of {f} not epi in the colimit")
                if not is_mono_arrow(colim, mu.arr[m]):
                    out.append(f"stage {i}: mono part of {f} not mono in the colimit")
                if colim.comp[(mu.arr[m], mu.arr[e])] != mu.arr[f]:
                    out.append(f"stage {i}: factorization of {f} broken in the colimit")
        # marked sups/infs: least upper bounds among subobject images
        for key, least in (("sups", True), ("infs", False)):
            for mk in cat.markers.get(key, ()):
                outer, family = mk["outer"], list(mk["family"])
                if not _cat_bound_ok(colim, mu.arr[outer],
                                     [mu.arr[a] for a in family], sup=least):
                    out.append(f"stage {i}: {key[:-1]} marker {outer} not preserved")
    return out


def _factors_through(cat: FinCat, f: str, m: str) -> bool:
    """Some arrow g has m∘g = f."""
    return any(cat.comp[(m, g)] == f
               for g in cat.hom(cat.src[f], cat.src[m]))


def _cat_bound_ok(cat: FinCat, outer: str, family: List[str], sup: bool) -> bool:
    """outer is the least (sup) / greatest (inf) mono bound of the family."""
    x = cat.tgt[outer]
    if any(cat.tgt[a] != x for a in family):
        return False
    if sup:
        if not all(_factors_through(cat, a, outer) for a in family):
            return False
        for m in cat.arrows:
            if cat.tgt[m] == x and is_mono_arrow(cat, m) and \
                    all(_factors_through(cat, a, m) for a in family):
                if not _factors_through(cat, outer, m):
                    return False
        return True
    if not all(_factors_through(cat, outer, a) for a in family):
        return False
    for m in cat.arrows:
        if cat.tgt[m] == x and is_mono_arrow(cat, m) and \
                all(_factors_through(cat, m, a) for a in family):
            if not _factors_through(cat, m, outer):
                return False
    return True


# ---------------------------------------------------------------------------
# factoring a functor through a stage


@dataclass
class StageFactorization:
    stage: str
    functor: FinFunctor                 # into the stage category
    correcting: TwoCell                 # identity cell: coprojection∘functor = F
    respected: Tuple[canon.MarkedDiagram, ...]


def factor_through_stage(
    res: ColimitResult,
    F: FinFunctor,
    respect: Sequence[canon.MarkedDiagram] = (),
) -> StageFactorization:
    """Least stage k with a strict factorization F = coprojection_k ∘ F'.

    ``respect`` lists marked diagrams on F's source; the stage is advanced
    until the factored functor maps each of them to a diagram satisfying the
    same property concretely in the stage fragment, correcting factors that
    land too early.  Strictness makes the correcting 2-cell an identity.
    """
    d, C = res.diagram, F.source
    if F.target != res.colimit:
        raise ValueError("functor does not land in this colimit")
    for k in d.index.objects:
        stage = d.stages[k]
        obj_cands = {x: [o for o in stage.objects if res.obj_class[(k, o)] == F.obj[x]]
                     for x in C.objects}
        arr_cands = {f: [a for a in stage.arrows if res.arr_class[(k, a)] == F.arr[f]]
                     for f in C.arrows}
        if any(not v for v in obj_cands.values()) or any(not v for v in arr_cands.values()):
            continue
        Fp = _search_factor(C, stage, obj_cands, arr_cands)
        if Fp is None:
            continue
        if respect:
            frag = d.fragments.get(k)
            if frag is None:
                raise ValueError(f"stage {k} carries no fragment to check diagrams in")
            mapped = [canon.MarkedDiagram(dd.tag,
                                          tuple(Fp.arr[a] for a in dd.arrows),
                                          tuple(Fp.obj[o] for o in dd.objects))
                      for dd in respect]
            if not all(canon.semantic_verdict(frag, md) for md in mapped):
                continue
        return StageFactorization(
            k, Fp, identity_cell(compose_functors(res.coprojections[k], Fp)),
            tuple(respect))
    raise StageBoundError(
        "chain prefix exhausted before the functor factored through a stage")


def _search_factor(
    C: FinCat, stage: FinCat,
    obj_cands: Dict[str, List[str]], arr_cands: Dict[str, List[str]],
) -> Optional[FinFunctor]:
    """First functor (canonical order) built from the candidate images."""
    objs = list(C.objects)
    arrs = [f for f in C.arrows]

    def backtrack_obj(n: int, obj: Dict[str, str]) -> Optional[FinFunctor]:
        if n == len(objs):
            return backtrack_arr(0, obj, {})
        x = objs[n]
        for o in obj_cands[x]:
            obj[x] = o
            got = backtrack_obj(n + 1, obj)
            if got is not None:
                return got
            del obj[x]
        return None

    def backtrack_arr(n: int, obj: Dict[str, str], arr: Dict[str, str]) -> Optional[FinFunctor]:
        if n == len(arrs):
            F = FinFunctor(C, stage, dict(obj), dict(arr))
            return F if not validate_functor(F) else None
        f = arrs[n]
        for a in arr_cands[f]:
            if stage.src[a] != obj[C.src[f]] or stage.tgt[a] != obj[C.tgt[f]]:
                continue
            arr[f] = a
            ok = True
            for g in list(arr)[:n]:
                for first, second in ((f, g), (g, f)):
                    if C.tgt[first] == C.src[second]:
                        cf = C.comp[(second, first)]
                        if cf in arr and stage.comp[(arr[second], arr[first])] != arr[cf]:
                            ok = False
            if ok:
                got = backtrack_arr(n + 1, obj, arr)
                if got is not None:
                    return got
            del arr[f]
        return None

    return backtrack_obj(0, {})
