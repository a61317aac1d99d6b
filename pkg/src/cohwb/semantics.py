"""Finite Set semantics.

Finite structures for a many-sorted signature, the subset-valued
interpretation of formulas-in-context (equality as equalizer, relation atoms
as preimages, conjunction as intersection, disjunction as union, existential
as projection image, and the negation/implication/universal clauses computed
as the evident biggest subsets), sequent validity, model and homomorphism
checking, and exact canonical enumeration of models and homomorphisms.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .logic import (
    And, App, Context, Eq, Exists, Forall, Formula, Implies, Morleyization,
    Not, Or, Rel, Sequent, Signature, Term, Theory, Var, free_vars,
)


class EnumerationBudgetError(RuntimeError):
    def __init__(self, estimated: int, budget: int):
        super().__init__(f"enumeration would visit ~{estimated} candidates, budget is {budget}")
        self.estimated = estimated
        self.budget = budget


@dataclass(frozen=True)
class FinStructure:
    """Finite structure: carriers per sort, relation tables, function tables."""

    sorts: Dict[str, Tuple[str, ...]]
    rels: Dict[str, FrozenSet[Tuple[str, ...]]] = field(default_factory=dict)
    funs: Dict[str, Dict[Tuple[str, ...], str]] = field(default_factory=dict)

    def carrier(self, s: str) -> Tuple[str, ...]:
        return self.sorts[s]


@dataclass(frozen=True)
class InterpretedSubset:
    """A subset of the product of the context's carriers."""

    context: Context
    tuples: FrozenSet[Tuple[str, ...]]


def validate_structure(M: FinStructure, sig: Signature) -> List[str]:
    out: List[str] = []
    for s in sig.sorts:
        if s not in M.sorts:
            out.append(f"structure: missing carrier for sort {s!r}")
    for r, arity in sig.relations.items():
        table = M.rels.get(r, frozenset())
        for row in table:
            if len(row) != len(arity):
                out.append(f"structure: {r!r} row {row} has wrong length")
                continue
            for v, s in zip(row, arity):
                if v not in M.sorts.get(s, ()):
                    out.append(f"structure: {r!r} row {row} not in carrier of {s!r}")
    for f, (args, res) in sig.functions.items():
        table = M.funs.get(f)
        if table is None:
            out.append(f"structure: missing table for function {f!r}")
            continue
        domain = list(itertools.product(*(M.sorts.get(s, ()) for s in args)))
        for key in domain:
            if key not in table:
                out.append(f"structure: function {f!r} undefined at {key}")
            elif table[key] not in M.sorts.get(res, ()):
                out.append(f"structure: function {f!r} value at {key} not in carrier of {res!r}")
        for key in table:
            if tuple(key) not in domain:
                out.append(f"structure: function {f!r} defined off its domain at {key}")
    return out


# ---------------------------------------------------------------------------
# interpretation (whole-subset route)


def context_tuples(M: FinStructure, context: Context) -> List[Tuple[str, ...]]:
    return list(itertools.product(*(M.carrier(s) for _, s in context)))


def interpret_term(M: FinStructure, context: Context, t: Term) -> Dict[Tuple[str, ...], str]:
    """The function |context| -> carrier induced by a term, as a table."""
    names = context.names()

    def ev(u: Term, row: Tuple[str, ...]) -> str:
        if isinstance(u, Var):
            return row[names.index(u.name)]
        key = tuple(ev(a, row) for a in u.args)
        return M.funs[u.fn][key]

    return {row: ev(t, row) for row in context_tuples(M, context)}


def interpret_formula(M: FinStructure, context: Context, f: Formula) -> InterpretedSubset:
    """Subset of the context product carved out by ``f``."""
    if isinstance(f, Eq):
        lt = interpret_term(M, context, f.lhs)
        rt = interpret_term(M, context, f.rhs)
        keep = frozenset(row for row in lt if lt[row] == rt[row])
        return InterpretedSubset(context, keep)
    if isinstance(f, Rel):
        tables = [interpret_term(M, context, a) for a in f.args]
        rel = M.rels.get(f.name, frozenset())
        keep = frozenset(
            row for row in context_tuples(M, context)
            if tuple(tb[row] for tb in tables) in rel
        )
        return InterpretedSubset(context, keep)
    if isinstance(f, And):
        keep = frozenset(context_tuples(M, context))
        for p in f.parts:
            keep &= interpret_formula(M, context, p).tuples
        return InterpretedSubset(context, keep)
    if isinstance(f, Or):
        keep: FrozenSet[Tuple[str, ...]] = frozenset()
        for p in f.parts:
            keep |= interpret_formula(M, context, p).tuples
        return InterpretedSubset(context, keep)
    if isinstance(f, (Exists, Forall)):
        var, sort, body = f.var, f.sort, f.body
        if context.sort_of(var) is not None:
            # the binder shadows a context variable; rename it out of the way
            from .logic import fresh_name, substitute
            var2 = fresh_name(var, set(context.names()) | set(free_vars(body)))
            body = substitute(body, {var: Var(var2)})
            var = var2
        inner_ctx = context.extend(var, sort)
        inner = interpret_formula(M, inner_ctx, body).tuples
        if isinstance(f, Exists):
            keep = frozenset(row[:-1] for row in inner)
            return InterpretedSubset(context, keep)
        carrier = M.carrier(sort)
        keep = frozenset(
            row for row in context_tuples(M, context)
            if all(row + (c,) in inner for c in carrier)
        )
        return InterpretedSubset(context, keep)
    if isinstance(f, Not):
        sub = interpret_formula(M, context, f.body).tuples
        keep = frozenset(row for row in context_tuples(M, context) if row not in sub)
        return InterpretedSubset(context, keep)
    if isinstance(f, Implies):
        a = interpret_formula(M, context, f.lhs).tuples
        b = interpret_formula(M, context, f.rhs).tuples
        keep = frozenset(row for row in context_tuples(M, context) if row not in a or row in b)
        return InterpretedSubset(context, keep)
    raise TypeError(f"not a formula: {f!r}")


def holds_sequent(M: FinStructure, seq: Sequent) -> bool:
    """Validity: the lhs subset is contained in the rhs subset."""
    lhs = interpret_formula(M, seq.context, seq.lhs).tuples
    rhs = interpret_formula(M, seq.context, seq.rhs).tuples
    return lhs <= rhs


def is_model(M: FinStructure, thy: Theory) -> bool:
    return all(holds_sequent(M, ax) for ax in thy.axioms)


# ---------------------------------------------------------------------------
# single-assignment satisfaction (independent oracle)


def eval_term(M: FinStructure, env: Mapping[str, str], t: Term) -> str:
    if isinstance(t, Var):
        return env[t.name]
    return M.funs[t.fn][tuple(eval_term(M, env, a) for a in t.args)]


def satisfies(M: FinStructure, env: Mapping[str, str], f: Formula) -> bool:
    """Tarski-style satisfaction under a single assignment."""
    if isinstance(f, Eq):
        return eval_term(M, env, f.lhs) == eval_term(M, env, f.rhs)
    if isinstance(f, Rel):
        return tuple(eval_term(M, env, a) for a in f.args) in M.rels.get(f.name, frozenset())
    if isinstance(f, And):
        return all(satisfies(M, env, p) for p in f.parts)
    if isinstance(f, Or):
        return any(satisfies(M, env, p) for p in f.parts)
    if isinstance(f, Exists):
        return any(satisfies(M, {**env, f.var: c}, f.body) for c in M.carrier(f.sort))
    if isinstance(f, Forall):
        return all(satisfies(M, {**env, f.var: c}, f.body) for c in M.carrier(f.sort))
    if isinstance(f, Not):
        return not satisfies(M, env, f.body)
    if isinstance(f, Implies):
        return (not satisfies(M, env, f.lhs)) or satisfies(M, env, f.rhs)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# homomorphisms


def is_homomorphism(
    alpha: Mapping[str, Mapping[str, str]], M: FinStructure, N: FinStructure, sig: Signature
) -> bool:
    """Sort-indexed map preserving functions and relation membership."""
    for s in sig.sorts:
        comp = alpha.get(s, {})
        for x in M.carrier(s):
            if comp.get(x) not in N.carrier(s):
                return False
    for f, (args, res) in sig.functions.items():
        for key in itertools.product(*(M.carrier(s) for s in args)):
            sent = tuple(alpha[s][x] for s, x in zip(args, key))
            if alpha[res][M.funs[f][key]] != N.funs[f][sent]:
                return False
    for r, arity in sig.relations.items():
        for row in M.rels.get(r, frozenset()):
            sent = tuple(alpha[s][x] for s, x in zip(arity, row))
            if sent not in N.rels.get(r, frozenset()):
                return False
    return True


def enumerate_homs(
    M: FinStructure, N: FinStructure, sig: Signature, budget: int = 1_000_000
) -> List[Dict[str, Dict[str, str]]]:
    """All homomorphisms M -> N in canonical order."""
    est = 1
    for s in sig.sorts:
        est *= max(1, len(N.carrier(s))) ** len(M.carrier(s))
        if est > budget:
            raise EnumerationBudgetError(est, budget)
    per_sort: List[List[Dict[str, str]]] = []
    for s in sig.sorts:
        dom, cod = M.carrier(s), N.carrier(s)
        if dom and not cod:
            return []
        choices = [dict(zip(dom, pick)) for pick in itertools.product(cod, repeat=len(dom))]
        per_sort.append(choices if dom else [dict()])
    out: List[Dict[str, Dict[str, str]]] = []
    for combo in itertools.product(*per_sort):
        alpha = {s: comp for s, comp in zip(sig.sorts, combo)}
        if is_homomorphism(alpha, M, N, sig):
            out.append(alpha)
    return out


def is_isomorphism(
    alpha: Mapping[str, Mapping[str, str]], M: FinStructure, N: FinStructure, sig: Signature
) -> bool:
    if not is_homomorphism(alpha, M, N, sig):
        return False
    inverse: Dict[str, Dict[str, str]] = {}
    for s in sig.sorts:
        comp = alpha[s] if s in alpha else {}
        if len(set(comp.values())) != len(M.carrier(s)) or set(comp.values()) != set(N.carrier(s)):
            return False
        inverse[s] = {v: k for k, v in comp.items()}
    return is_homomorphism(inverse, N, M, sig)


# ---------------------------------------------------------------------------
# exact enumeration of models


def _carrier(n: int) -> Tuple[str, ...]:
    return tuple(str(i) for i in range(n))


def enumerate_structures(
    sig: Signature,
    max_size: int,
    exact_sizes: Optional[Mapping[str, int]] = None,
    budget: int = 2_000_000,
) -> Iterator[FinStructure]:
    """All structures with canonical carriers ``"0".."k-1"`` per sort, k <= max_size.

    Enumeration order is canonical: carrier sizes in product order, relation
    tables in bitmask-lexicographic order, function tables in product order.
    ``exact_sizes`` pins the carrier of each listed sort to an exact size.
    """
    sorts = list(sig.sorts)
    if exact_sizes is not None:
        size_space: Iterable[Tuple[int, ...]] = [tuple(exact_sizes.get(s, 0) for s in sorts)]
    else:
        size_space = itertools.product(range(max_size + 1), repeat=len(sorts))

    for sizes in size_space:
        carriers = {s: _carrier(n) for s, n in zip(sorts, sizes)}
        est = 1
        rel_spaces: List[Tuple[str, List[Tuple[str, ...]]]] = []
        for r, arity in sig.relations.items():
            space = list(itertools.product(*(carriers[s] for s in arity)))
            rel_spaces.append((r, space))
            est *= 2 ** len(space)
        fun_spaces: List[Tuple[str, List[Tuple[str, ...]], Tuple[str, ...]]] = []
        possible = True
        for f, (args, res) in sig.functions.items():
            dom = list(itertools.product(*(carriers[s] for s in args)))
            cod = carriers[res]
            if dom and not cod:
                possible = False
                break
            fun_spaces.append((f, dom, cod))
            est *= max(1, len(cod)) ** len(dom)
        if not possible:
            continue
        if est > budget:
            raise EnumerationBudgetError(est, budget)

        def rel_tables() -> Iterator[Dict[str, FrozenSet[Tuple[str, ...]]]]:
            spaces = [space for _, space in rel_spaces]
            for masks in itertools.product(*(itertools.product((False, True), repeat=len(sp)) for sp in spaces)):
                yield {
                    r: frozenset(row for row, keep in zip(space, mask) if keep)
                    for (r, space), mask in zip(rel_spaces, masks)
                }

        def fun_tables() -> Iterator[Dict[str, Dict[Tuple[str, ...], str]]]:
            for picks in itertools.product(*(itertools.product(cod, repeat=len(dom)) for _, dom, cod in fun_spaces)):
                yield {
                    f: dict(zip(dom, pick))
                    for (f, dom, _), pick in zip(fun_spaces, picks)
                }

        for rels in rel_tables():
            for funs in fun_tables():
                yield FinStructure(dict(carriers), rels, funs)


def enumerate_models(
    thy: Theory,
    max_size: int,
    exact_sizes: Optional[Mapping[str, int]] = None,
    budget: int = 2_000_000,
) -> List[FinStructure]:
    """All models of ``thy`` over canonical carriers of size <= max_size."""
    return [
        M for M in enumerate_structures(thy.signature, max_size, exact_sizes, budget)
        if is_model(M, thy)
    ]


# ---------------------------------------------------------------------------
# Morleyization expansion


def expand_structure(M: FinStructure, mor: Morleyization) -> FinStructure:
    """The unique P/N-expansion of ``M``: P is the truth set, N its complement."""
    rels = dict(M.rels)
    for d in mor.defs:
        sub = interpret_formula(M, d.context, d.formula)
        full = frozenset(context_tuples(M, d.context))
        rels[d.pos_name] = sub.tuples
        rels[d.neg_name] = full - sub.tuples
    return FinStructure(dict(M.sorts), rels, dict(M.funs))


def restrict_signature(M: FinStructure, sig: Signature) -> FinStructure:
    """Forget interpretation outside ``sig`` (carriers kept for sig's sorts)."""
    return FinStructure(
        {s: M.sorts[s] for s in sig.sorts},
        {r: M.rels.get(r, frozenset()) for r in sig.relations},
        {f: M.funs[f] for f in sig.functions},
    )


# ---------------------------------------------------------------------------
# JSON round-trip


def structure_to_json(M: FinStructure) -> str:
    def funkey(key: Tuple[str, ...]) -> str:
        for part in key:
            if "," in part:
                raise ValueError("carrier elements containing ',' cannot be serialized")
        return ",".join(key)

    doc = {
        "sorts": {s: list(M.sorts[s]) for s in sorted(M.sorts)},
        "rels": {r: sorted(list(row) for row in M.rels[r]) for r in sorted(M.rels)},
        "funs": {
            f: {funkey(k): v for k, v in sorted(M.funs[f].items())}
            for f in sorted(M.funs)
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def structure_from_json(text: str) -> FinStructure:
    doc = json.loads(text)
    sorts = {s: tuple(v) for s, v in doc.get("sorts", {}).items()}
    rels = {r: frozenset(tuple(row) for row in v) for r, v in doc.get("rels", {}).items()}
    funs: Dict[str, Dict[Tuple[str, ...], str]] = {}
    for f, table in doc.get("funs", {}).items():
        funs[f] = {}
        for k, v in table.items():
            key = tuple(k.split(",")) if k else ()
            funs[f][key] = v
    return FinStructure(sorts, rels, funs)
