"""Coherent closure of a subcategory of a concrete fragment.

Rounds enumerate small diagrams over the current subcategory — object pairs,
single arrows, parallel pairs, cospans, pairs of subobjects — and settle each
instance: *closed* if the subcategory already realizes it, *imported* if the
ambient fragment does, *created* if a fresh concrete witness (pair set, subset,
image, union) had to be built.  Limit instances are then completed with the
mediating arrows that make them genuine categorical limits, and the
subcategory is re-closed under composition.  Growth is finite per round; a
round that adds nothing is a fixed point.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from .fincat import FinCat, FinFunctor, FragmentBuilder, SetFragment


class ClosureBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class ClosureInstance:
    kind: str                       # terminal|product|image|equalizer|pullback|union
    key: Tuple[str, ...]
    realization: Tuple[str, ...]    # witnessing object/arrow names
    status: str                     # closed|imported|created


@dataclass
class ClosureRound:
    index: int
    instances: List[ClosureInstance]
    mediators_added: int
    object_count: int
    arrow_count: int


@dataclass
class ClosureResult:
    rounds: List[ClosureRound]
    fixed_point: bool
    sub_objects: Tuple[str, ...]
    sub_arrows: Tuple[str, ...]
    _builder: FragmentBuilder = field(repr=False, default=None)

    def ambient(self) -> SetFragment:
        return self._builder.build()

    def fragment(self) -> SetFragment:
        """The closed subcategory as a standalone fragment, markers included."""
        b = self._builder
        objs = [x for x in b.objects if x in set(self.sub_objects)]
        arrs = [a for a in b.arrow_names if a in set(self.sub_arrows)]
        ident = {x: b.find_arrow(x, x, {e: e for e in b.sets[x]}) for x in objs}
        comp = {}
        for g in arrs:
            for f in arrs:
                if b.tgt[f] == b.src[g]:
                    fn = {e: b.funs[g][b.funs[f][e]] for e in b.sets[b.src[f]]}
                    comp[(g, f)] = b.find_arrow(b.src[f], b.tgt[g], fn)
        markers = _markers_for(b, objs, arrs, self.rounds)
        cat = FinCat(tuple(objs), tuple(arrs), {a: b.src[a] for a in arrs},
                     {a: b.tgt[a] for a in arrs}, ident, comp, markers)
        return SetFragment(cat, {x: b.sets[x] for x in objs},
                           {a: dict(b.funs[a]) for a in arrs})

    def inclusion(self) -> FinFunctor:
        """The closed subcategory included back into the (extended) ambient."""
        sub = self.fragment()
        amb = self.ambient()
        return FinFunctor(sub.cat, amb.cat,
                          {x: x for x in sub.cat.objects},
                          {a: a for a in sub.cat.arrows})


def _markers_for(b: FragmentBuilder, objs: List[str], arrs: List[str],
                 rounds: List[ClosureRound]) -> Dict[str, object]:
    present = set(arrs)
    mono = [a for a in arrs
            if len(set(b.funs[a].values())) == len(set(b.sets[b.src[a]]))]
    surj = [a for a in arrs
            if set(b.funs[a].values()) == set(b.sets[b.tgt[a]])]
    markers: Dict[str, object] = {"mono": mono, "surjective": surj}
    prods, eqs, sups = [], [], []
    seen = set()
    for r in rounds:
        for inst in r.instances:
            if any(n not in present for n in inst.realization
                   if n in b.src):            # arrow names must be in the sub
                continue
            sig = (inst.kind, inst.key, inst.realization)
            if sig in seen:
                continue
            seen.add(sig)
            if inst.kind == "terminal":
                markers.setdefault("terminal", inst.realization[0])
            elif inst.kind == "product":
                prods.append({"legs": [inst.realization[1], inst.realization[2]]})
            elif inst.kind == "equalizer":
                eqs.append({"mono": inst.realization[1],
                            "left": inst.key[0], "right": inst.key[1]})
            elif inst.kind == "union":
                sups.append({"outer": inst.realization[1],
                             "family": [inst.key[0], inst.key[1]]})
    if prods:
        markers["products"] = prods
    if eqs:
        markers["equalizers"] = eqs
    if sups:
        markers["sups"] = sups
    return markers


class _Closure:
    def __init__(self, ambient: SetFragment, objects: Sequence[str],
                 arrows: Sequence[str], max_objects: int) -> None:
        self.b = FragmentBuilder.from_fragment(ambient)
        self.max_objects = max_objects
        self.sub_o: Set[str] = set()
        self.sub_a: Set[str] = set()
        for x in objects:
            if x not in self.b.sets:
                raise ValueError(f"seed object {x} not in the ambient fragment")
            self.sub_o.add(x)
        for a in arrows:
            if a not in self.b.src:
                raise ValueError(f"seed arrow {a} not in the ambient fragment")
            self._import_arrow(a)
        self._close_sub()
        self.rounds: List[ClosureRound] = []

    # -- bookkeeping -------------------------------------------------------

    def _import_arrow(self, a: str) -> None:
        self.sub_a.add(a)
        self.sub_o.add(self.b.src[a])
        self.sub_o.add(self.b.tgt[a])

    def _close_sub(self) -> None:
        for x in sorted(self.sub_o):
            self.sub_a.add(self.b.add_arrow(f"id_{x}", x, x,
                                            {e: e for e in self.b.sets[x]}))
        changed = True
        while changed:
            changed = False
            for g in sorted(self.sub_a):
                for f in sorted(self.sub_a):
                    if self.b.tgt[f] != self.b.src[g]:
                        continue
                    fn = {e: self.b.funs[g][self.b.funs[f][e]]
                          for e in self.b.sets[self.b.src[f]]}
                    c = self.b.add_arrow(f"({g}.{f})", self.b.src[f],
                                         self.b.tgt[g], fn)
                    if c not in self.sub_a:
                        self._import_arrow(c)
                        changed = True

    def _hom(self, names: Set[str], s: str, t: str) -> List[str]:
        return [a for a in sorted(names)
                if self.b.src[a] == s and self.b.tgt[a] == t]

    def _all_arrows(self) -> Set[str]:
        return set(self.b.arrow_names)

    def _ensure_object(self, hint: str, elems: Sequence[str]) -> str:
        hit = self.b.object_with_set(elems)
        if hit is not None:
            return hit
        name = hint
        i = 2
        while name in self.b.sets:
            name = f"{hint}#{i}"
            i += 1
        return self.b.add_object(name, tuple(elems))

    def _settle(self, kind: str, key: Tuple[str, ...],
                search, create) -> ClosureInstance:
        """Realize one instance: in the sub, else the ambient, else create."""
        got = search(self.sub_a, self.sub_o)
        if got is not None:
            inst = ClosureInstance(kind, key, got, "closed")
        else:
            got = search(self._all_arrows(), set(self.b.objects))
            if got is not None:
                inst = ClosureInstance(kind, key, got, "imported")
            else:
                inst = ClosureInstance(kind, key, create(), "created")
        for n in inst.realization:
            if n in self.b.src:
                self._import_arrow(n)
            else:
                self.sub_o.add(n)
        return inst

    # -- instance types ------------------------------------------------------

    def settle_terminal(self) -> ClosureInstance:
        def search(arrows: Set[str], objects: Set[str]):
            for t in sorted(objects):
                if len(set(self.b.sets[t])) == 1:
                    return (t,)
            return None

        def create():
            return (self._ensure_object("1", ("*",)),)

        inst = self._settle("terminal", (), search, create)
        self.terminal = inst.realization[0]
        return inst

    def settle_product(self, x: str, y: str) -> ClosureInstance:
        ex = list(dict.fromkeys(self.b.sets[x]))
        ey = list(dict.fromkeys(self.b.sets[y]))
        want = {(a, c) for a in ex for c in ey}

        def search(arrows: Set[str], objects: Set[str]):
            for p in sorted(objects):
                if len(set(self.b.sets[p])) != len(want):
                    continue
                for p1 in self._hom(arrows, p, x):
                    for p2 in self._hom(arrows, p, y):
                        graph = [(self.b.funs[p1][e], self.b.funs[p2][e])
                                 for e in set(self.b.sets[p])]
                        if len(set(graph)) == len(want) and set(graph) == want:
                            return (p, p1, p2)
            return None

        def create():
            pairs = [(a, c) for a in ex for c in ey]
            names = [f"({a},{c})" for a, c in pairs]
            p = self._ensure_object(f"({x}*{y})", names)
            order = list(self.b.sets[p])
            lookup = dict(zip(names, pairs))
            p1 = self.b.add_arrow(f"fst({x}*{y})", p, x,
                                  {n: lookup[n][0] for n in order})
            p2 = self.b.add_arrow(f"snd({x}*{y})", p, y,
                                  {n: lookup[n][1] for n in order})
            return (p, p1, p2)

        return self._settle("product", (x, y), search, create)

    def settle_image(self, f: str) -> ClosureInstance:
        x, y = self.b.src[f], self.b.tgt[f]
        order = list(dict.fromkeys(self.b.sets[y]))
        img = [v for v in order if v in set(self.b.funs[f].values())]

        def search(arrows: Set[str], objects: Set[str]):
            for i_obj in sorted(objects):
                for m in self._hom(arrows, i_obj, y):
                    fn_m = self.b.funs[m]
                    if len(set(fn_m.values())) != len(set(self.b.sets[i_obj])):
                        continue
                    if set(fn_m.values()) != set(img):
                        continue
                    for e in self._hom(arrows, x, i_obj):
                        if all(fn_m[self.b.funs[e][a]] == self.b.funs[f][a]
                               for a in self.b.sets[x]):
                            return (i_obj, e, m)
            return None

        def create():
            i_obj = self._ensure_object(f"im({f})", img)
            e = self.b.add_arrow(f"sur({f})", x, i_obj, dict(self.b.funs[f]))
            m = self.b.add_arrow(f"inc({i_obj})", i_obj, y,
                                 {v: v for v in self.b.sets[i_obj]})
            return (i_obj, e, m)

        return self._settle("image", (f,), search, create)

    def settle_equalizer(self, f: str, g: str) -> ClosureInstance:
        x = self.b.src[f]
        sub = [e for e in dict.fromkeys(self.b.sets[x])
               if self.b.funs[f][e] == self.b.funs[g][e]]

        def search(arrows: Set[str], objects: Set[str]):
            for e_obj in sorted(objects):
                for m in self._hom(arrows, e_obj, x):
                    fn = self.b.funs[m]
                    if len(set(fn.values())) != len(set(self.b.sets[e_obj])):
                        continue
                    if set(fn.values()) == set(sub):
                        return (e_obj, m)
            return None

        def create():
            e_obj = self._ensure_object(f"eq({f},{g})", sub)
            m = self.b.add_arrow(f"inc({e_obj})", e_obj, x,
                                 {v: v for v in self.b.sets[e_obj]})
            return (e_obj, m)

        return self._settle("equalizer", (f, g), search, create)

    def settle_pullback(self, f: str, g: str) -> ClosureInstance:
        x, y = self.b.src[f], self.b.src[g]
        ex = list(dict.fromkeys(self.b.sets[x]))
        ey = list(dict.fromkeys(self.b.sets[y]))
        want = {(a, c) for a in ex for c in ey
                if self.b.funs[f][a] == self.b.funs[g][c]}

        def search(arrows: Set[str], objects: Set[str]):
            for p in sorted(objects):
                if len(set(self.b.sets[p])) != len(want):
                    continue
                for p1 in self._hom(arrows, p, x):
                    for p2 in self._hom(arrows, p, y):
                        graph = [(self.b.funs[p1][e], self.b.funs[p2][e])
                                 for e in set(self.b.sets[p])]
                        if len(set(graph)) == len(want) and set(graph) == want:
                            return (p, p1, p2)
            return None

        def create():
            pairs = sorted(want, key=lambda pr: (ex.index(pr[0]), ey.index(pr[1])))
            names = [f"({a},{c})" for a, c in pairs]
            p = self._ensure_object(f"pb({f},{g})", names)
            order = list(self.b.sets[p])
            lookup = dict(zip(names, pairs))
            p1 = self.b.add_arrow(f"fst(pb({f},{g}))", p, x,
                                  {n: lookup[n][0] for n in order})
            p2 = self.b.add_arrow(f"snd(pb({f},{g}))", p, y,
                                  {n: lookup[n][1] for n in order})
            return (p, p1, p2)

        return self._settle("pullback", (f, g), search, create)

    def settle_union(self, m1: str, m2: str) -> ClosureInstance:
        x = self.b.tgt[m1]
        order = list(dict.fromkeys(self.b.sets[x]))
        uni = [v for v in order
               if v in set(self.b.funs[m1].values()) | set(self.b.funs[m2].values())]

        def search(arrows: Set[str], objects: Set[str]):
            for u_obj in sorted(objects):
                for u in self._hom(arrows, u_obj, x):
                    fn = self.b.funs[u]
                    if len(set(fn.values())) != len(set(self.b.sets[u_obj])):
                        continue
                    if set(fn.values()) == set(uni):
                        return (u_obj, u)
            return None

        def create():
            u_obj = self._ensure_object(f"un({m1},{m2})", uni)
            u = self.b.add_arrow(f"inc({u_obj})", u_obj, x,
                                 {v: v for v in self.b.sets[u_obj]})
            return (u_obj, u)

        return self._settle("union", (m1, m2), search, create)

    # -- mediating arrows ----------------------------------------------------

    def _ensure_mediator(self, hint: str, src: str, tgt: str,
                         fn: Mapping[str, str]) -> int:
        before = len(self.sub_a)
        a = self.b.add_arrow(hint, src, tgt, fn)
        if a not in self.sub_a:
            self._import_arrow(a)
        return len(self.sub_a) - before

    def complete_mediators(self, insts: List[ClosureInstance]) -> int:
        added = 0
        arrows = sorted(self.sub_a)
        for inst in insts:
            if inst.kind == "terminal":
                (t,) = inst.realization
                t0 = self.b.sets[t][0]
                for o in sorted(self.sub_o):
                    added += self._ensure_mediator(
                        f"bang({o})", o, t, {e: t0 for e in self.b.sets[o]})
            elif inst.kind in ("product", "pullback"):
                p, p1, p2 = inst.realization
                x, y = self.b.tgt[p1], self.b.tgt[p2]
                rev = {(self.b.funs[p1][e], self.b.funs[p2][e]): e
                       for e in self.b.sets[p]}
                for h1 in arrows:
                    if self.b.tgt[h1] != x:
                        continue
                    a = self.b.src[h1]
                    for h2 in self._hom(self.sub_a, a, y):
                        fn = {}
                        for e in self.b.sets[a]:
                            pair = (self.b.funs[h1][e], self.b.funs[h2][e])
                            if pair not in rev:
                                break
                            fn[e] = rev[pair]
                        else:
                            added += self._ensure_mediator(
                                f"tup({h1},{h2})", a, p, fn)
            elif inst.kind == "equalizer":
                e_obj, m = inst.realization
                f, g = inst.key
                x = self.b.src[f]
                rev = {self.b.funs[m][e]: e for e in self.b.sets[e_obj]}
                for h in self._sub_arrows_into(x):
                    a = self.b.src[h]
                    if all(self.b.funs[f][self.b.funs[h][e]]
                           == self.b.funs[g][self.b.funs[h][e]]
                           for e in self.b.sets[a]):
                        fn = {e: rev[self.b.funs[h][e]] for e in self.b.sets[a]}
                        added += self._ensure_mediator(f"br({h})", a, e_obj, fn)
            elif inst.kind == "union":
                u_obj, u = inst.realization
                m1, m2 = inst.key
                x = self.b.tgt[u]
                rev = {self.b.funs[u][e]: e for e in self.b.sets[u_obj]}
                for m in (m1, m2):
                    fn = {e: rev[self.b.funs[m][e]]
                          for e in self.b.sets[self.b.src[m]]}
                    added += self._ensure_mediator(
                        f"into({m},{u_obj})", self.b.src[m], u_obj, fn)
                covered = set(self.b.funs[u].values())
                for v in self._sub_arrows_into(x):
                    fn_v = self.b.funs[v]
                    if len(set(fn_v.values())) != len(set(self.b.sets[self.b.src[v]])):
                        continue
                    if covered <= set(fn_v.values()):
                        rv = {fn_v[e]: e for e in self.b.sets[self.b.src[v]]}
                        fn = {e: rv[self.b.funs[u][e]] for e in self.b.sets[u_obj]}
                        added += self._ensure_mediator(
                            f"lub({u_obj},{v})", u_obj, self.b.src[v], fn)
        return added

    def _sub_arrows_into(self, x: str) -> List[str]:
        return [a for a in sorted(self.sub_a) if self.b.tgt[a] == x]

    # -- the round -----------------------------------------------------------

    def run_round(self, index: int) -> ClosureRound:
        before_o, before_a = set(self.sub_o), set(self.sub_a)
        insts: List[ClosureInstance] = []
        insts.append(self.settle_terminal())
        for x, y in itertools.combinations_with_replacement(sorted(before_o), 2):
            insts.append(self.settle_product(x, y))
        for f in sorted(before_a):
            insts.append(self.settle_image(f))
        for f, g in itertools.combinations(sorted(before_a), 2):
            if self.b.src[f] == self.b.src[g] and self.b.tgt[f] == self.b.tgt[g]:
                insts.append(self.settle_equalizer(f, g))
        for f, g in itertools.combinations_with_replacement(sorted(before_a), 2):
            if self.b.tgt[f] == self.b.tgt[g]:
                insts.append(self.settle_pullback(f, g))
        monos = [a for a in sorted(before_a)
                 if len(set(self.b.funs[a].values()))
                 == len(set(self.b.sets[self.b.src[a]]))]
        for m1, m2 in itertools.combinations(monos, 2):
            if self.b.tgt[m1] == self.b.tgt[m2]:
                insts.append(self.settle_union(m1, m2))
        med = self.complete_mediators(insts)
        self._close_sub()
        if len(self.sub_o) > self.max_objects:
            raise ClosureBudgetError(
                f"closure grew past {self.max_objects} objects at round {index}")
        r = ClosureRound(index, insts, med, len(self.sub_o), len(self.sub_a))
        self.rounds.append(r)
        self._stable = (self.sub_o == before_o and self.sub_a == before_a)
        return r


def coherent_closure(
    ambient: SetFragment,
    objects: Sequence[str],
    arrows: Sequence[str],
    rounds: int = 4,
    require_fixed_point: bool = False,
    max_objects: int = 240,
) -> ClosureResult:
    """Close a subcategory under limits, images and unions of subobjects."""
    cl = _Closure(ambient, objects, arrows, max_objects)
    fixed = False
    for i in range(1, rounds + 1):
        cl.run_round(i)
        if cl._stable:
            fixed = True
            break
    if require_fixed_point and not fixed:
        raise ClosureBudgetError(
            f"no fixed point within the round budget ({rounds})")
    return ClosureResult(cl.rounds, fixed,
                         tuple(sorted(cl.sub_o)), tuple(sorted(cl.sub_a)),
                         cl.b)


def verify_closed(res: ClosureResult, objects: Optional[Sequence[str]] = None,
                  arrows: Optional[Sequence[str]] = None) -> List[str]:
    """Check every instance over the given slice is realized inside the closure."""
    frag = res.fragment()
    b = FragmentBuilder.from_fragment(frag)
    cl = _Closure(frag, list(frag.cat.objects), list(frag.cat.arrows),
                  max_objects=10 ** 9)
    objs = sorted(objects if objects is not None else res.sub_objects)
    arrs = sorted(arrows if arrows is not None else res.sub_arrows)
    out: List[str] = []

    def expect_closed(inst: ClosureInstance) -> None:
        if inst.status != "closed":
            out.append(f"{inst.kind}{inst.key}: {inst.status}")

    expect_closed(cl.settle_terminal())
    for x, y in itertools.combinations_with_replacement(objs, 2):
        expect_closed(cl.settle_product(x, y))
    for f in arrs:
        expect_closed(cl.settle_image(f))
    for f, g in itertools.combinations(arrs, 2):
        if b.src[f] == b.src[g] and b.tgt[f] == b.tgt[g]:
            expect_closed(cl.settle_equalizer(f, g))
    for f, g in itertools.combinations_with_replacement(arrs, 2):
        if b.tgt[f] == b.tgt[g]:
            expect_closed(cl.settle_pullback(f, g))
    monos = [a for a in arrs
             if len(set(frag.funs[a].values())) == len(set(frag.sets[frag.cat.src[a]]))]
    for m1, m2 in itertools.combinations(monos, 2):
        if frag.cat.tgt[m1] == frag.cat.tgt[m2]:
            expect_closed(cl.settle_union(m1, m2))
    return out


@dataclass
class CoconeFactorization:
    closure: ClosureResult
    inclusion: FinFunctor            # closed subcategory -> extended ambient
    ambient_inclusion: FinFunctor    # original fragment -> extended ambient
    factors: List[FinFunctor]        # one per input functor, into the closure


def factor_cocone_through_closure(
    frag: SetFragment,
    functors: Sequence[FinFunctor],
    rounds: int = 4,
    max_objects: int = 240,
) -> CoconeFactorization:
    """Factor a family of functors into a fragment through the coherent
    closure of their joint image."""
    for F in functors:
        if F.target != frag.cat:
            raise ValueError("every functor must land in the given fragment")
    seed_o = sorted({o for F in functors for o in F.obj.values()})
    seed_a = sorted({a for F in functors for a in F.arr.values()})
    res = coherent_closure(frag, seed_o, seed_a, rounds=rounds,
                           max_objects=max_objects)
    sub = res.fragment()
    amb = res.ambient()
    g = res.inclusion()
    iota = FinFunctor(frag.cat, amb.cat,
                      {x: x for x in frag.cat.objects},
                      {a: a for a in frag.cat.arrows})
    factors = []
    for F in functors:
        Ft = FinFunctor(F.source, sub.cat, dict(F.obj), dict(F.arr))
        factors.append(Ft)
        for x in F.source.objects:
            assert g.obj[Ft.obj[x]] == iota.obj[F.obj[x]]
        for a in F.source.arrows:
            assert g.arr[Ft.arr[a]] == iota.arr[F.arr[a]]
    return CoconeFactorization(res, g, iota, factors)
