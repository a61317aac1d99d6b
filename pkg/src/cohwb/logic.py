"""Many-sorted coherent / first-order syntax.

Terms, formulas, sequents and theories over a many-sorted signature, with
well-formedness checking, capture-avoiding substitution, alpha-equivalence by
positional normalization, and the Morleyization compiler that turns a
first-order theory into a coherent one with the same finite models.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union


class WellFormednessError(ValueError):
    """Raised when an operation requires a well-formed input and got diagnostics."""


# ---------------------------------------------------------------------------
# signatures and contexts


@dataclass(frozen=True)
class Signature:
    """Sorts, typed relation symbols and typed function symbols.

    ``relations`` maps a relation name to its argument sorts; ``functions``
    maps a function name to ``(argument sorts, result sort)``.  Names live in
    one namespace: a name may be used for at most one of sort/relation/function.
    """

    sorts: Tuple[str, ...]
    relations: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    functions: Dict[str, Tuple[Tuple[str, ...], str]] = field(default_factory=dict)

    def has_sort(self, s: str) -> bool:
        return s in self.sorts

    def all_names(self) -> Set[str]:
        return set(self.sorts) | set(self.relations) | set(self.functions)

    def diagnostics(self) -> List[str]:
        out: List[str] = []
        seen: Set[str] = set()
        for s in self.sorts:
            if s in seen:
                out.append(f"signature: duplicate sort {s!r}")
            seen.add(s)
        for r, arity in self.relations.items():
            if r in seen:
                out.append(f"signature: name {r!r} reused by relation")
            seen.add(r)
            for s in arity:
                if s not in self.sorts:
                    out.append(f"signature: relation {r!r} uses unknown sort {s!r}")
        for f, (args, res) in self.functions.items():
            if f in seen:
                out.append(f"signature: name {f!r} reused by function")
            seen.add(f)
            for s in tuple(args) + (res,):
                if s not in self.sorts:
                    out.append(f"signature: function {f!r} uses unknown sort {s!r}")
        return out


@dataclass(frozen=True)
class Context:
    """Ordered list of distinct typed variables ``(name, sort)``."""

    pairs: Tuple[Tuple[str, str], ...] = ()

    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.pairs)

    def sorts(self) -> Tuple[str, ...]:
        return tuple(s for _, s in self.pairs)

    def sort_of(self, name: str) -> Optional[str]:
        for n, s in self.pairs:
            if n == name:
                return s
        return None

    def extend(self, name: str, sort: str) -> "Context":
        return Context(self.pairs + ((name, sort),))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def ctx(*pairs: Tuple[str, str]) -> Context:
    return Context(tuple(pairs))


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: Tuple["Term", ...] = ()

    def __str__(self) -> str:
        return f"{self.fn}({', '.join(map(str, self.args))})"


Term = Union[Var, App]


def term_vars(t: Term) -> List[str]:
    """Variables of a term in first-occurrence order."""
    out: List[str] = []

    def walk(u: Term) -> None:
        if isinstance(u, Var):
            if u.name not in out:
                out.append(u.name)
        else:
            for a in u.args:
                walk(a)

    walk(t)
    return out


def term_sort(sig: Signature, scope: Mapping[str, str], t: Term) -> Optional[str]:
    """Sort of ``t`` under ``scope`` (var name -> sort); None if ill-formed."""
    if isinstance(t, Var):
        return scope.get(t.name)
    info = sig.functions.get(t.fn)
    if info is None:
        return None
    args, res = info
    if len(args) != len(t.args):
        return None
    for want, sub in zip(args, t.args):
        if term_sort(sig, scope, sub) != want:
            return None
    return res


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class Rel:
    name: str
    args: Tuple[Term, ...] = ()

    def __str__(self) -> str:
        return f"{self.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class And:
    parts: Tuple["Formula", ...] = ()

    def __str__(self) -> str:
        if not self.parts:
            return "true"
        return " & ".join(_wrap(p, for_and=True) for p in self.parts)


@dataclass(frozen=True)
class Or:
    parts: Tuple["Formula", ...] = ()

    def __str__(self) -> str:
        if not self.parts:
            return "false"
        return " | ".join(_wrap(p, for_and=False) for p in self.parts)


@dataclass(frozen=True)
class Exists:
    var: str
    sort: str
    body: "Formula"

    def __str__(self) -> str:
        return f"exists {self.var}:{self.sort}. {_wrap(self.body, quant=True)}"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self) -> str:
        return f"~{_wrap(self.body, quant=True)}"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"

    def __str__(self) -> str:
        return f"({self.lhs} -> {self.rhs})"


@dataclass(frozen=True)
class Forall:
    var: str
    sort: str
    body: "Formula"

    def __str__(self) -> str:
        return f"forall {self.var}:{self.sort}. {_wrap(self.body, quant=True)}"


Formula = Union[Eq, Rel, And, Or, Exists, Not, Implies, Forall]

TRUE = And(())
FALSE = Or(())


def _wrap(f: Formula, for_and: bool = False, quant: bool = False) -> str:
    # parenthesize only where the text grammar requires it
    s = str(f)
    if quant:
        if isinstance(f, (And, Or)) and len(f.parts) > 1:
            return f"({s})"
        return s
    if isinstance(f, Or) and f.parts and for_and:
        return f"({s})"
    return s


def conj(*parts: Formula) -> Formula:
    """n-ary conjunction, flattened; a single conjunct collapses to itself."""
    flat: List[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    """n-ary disjunction, flattened; a single disjunct collapses to itself."""
    flat: List[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def is_coherent(f: Formula) -> bool:
    """True when the formula uses only atoms, finite and/or and exists."""
    if isinstance(f, (Eq, Rel)):
        return True
    if isinstance(f, (And, Or)):
        return all(is_coherent(p) for p in f.parts)
    if isinstance(f, Exists):
        return is_coherent(f.body)
    return False


def subformulas(f: Formula) -> Iterable[Formula]:
    """All subformula occurrences of ``f``, including ``f``, preorder."""
    yield f
    if isinstance(f, (And, Or)):
        for p in f.parts:
            yield from subformulas(p)
    elif isinstance(f, (Exists, Forall, Not)):
        yield from subformulas(f.body)
    elif isinstance(f, Implies):
        yield from subformulas(f.lhs)
        yield from subformulas(f.rhs)


def free_vars(f: Formula) -> List[str]:
    """Free variables in first-occurrence order."""
    out: List[str] = []

    def note(name: str, bound: Tuple[str, ...]) -> None:
        if name not in bound and name not in out:
            out.append(name)

    def walk_term(t: Term, bound: Tuple[str, ...]) -> None:
        if isinstance(t, Var):
            note(t.name, bound)
        else:
            for a in t.args:
                walk_term(a, bound)

    def walk(g: Formula, bound: Tuple[str, ...]) -> None:
        if isinstance(g, Eq):
            walk_term(g.lhs, bound)
            walk_term(g.rhs, bound)
        elif isinstance(g, Rel):
            for a in g.args:
                walk_term(a, bound)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p, bound)
        elif isinstance(g, (Exists, Forall)):
            walk(g.body, bound + (g.var,))
        elif isinstance(g, Not):
            walk(g.body, bound)
        elif isinstance(g, Implies):
            walk(g.lhs, bound)
            walk(g.rhs, bound)

    walk(f, ())
    return out


def wf_formula(
    sig: Signature,
    scope: Mapping[str, str],
    f: Formula,
    where: str = "formula",
    require_coherent: bool = False,
) -> List[str]:
    """Well-formedness diagnostics for ``f`` under ``scope``."""
    out: List[str] = []

    def check_term(t: Term, local: Mapping[str, str]) -> None:
        if isinstance(t, Var):
            if t.name not in local:
                out.append(f"{where}: variable {t.name!r} not in scope")
        else:
            info = sig.functions.get(t.fn)
            if info is None:
                out.append(f"{where}: unknown function symbol {t.fn!r}")
                return
            args, _res = info
            if len(args) != len(t.args):
                out.append(f"{where}: function {t.fn!r} expects {len(args)} arguments")
                return
            for want, sub in zip(args, t.args):
                check_term(sub, local)
                got = term_sort(sig, local, sub)
                if got is not None and got != want:
                    out.append(f"{where}: argument of {t.fn!r} has sort {got!r}, wants {want!r}")

    def walk(g: Formula, local: Dict[str, str]) -> None:
        if isinstance(g, Eq):
            check_term(g.lhs, local)
            check_term(g.rhs, local)
            ls, rs = term_sort(sig, local, g.lhs), term_sort(sig, local, g.rhs)
            if ls is not None and rs is not None and ls != rs:
                out.append(f"{where}: equality between sorts {ls!r} and {rs!r}")
        elif isinstance(g, Rel):
            arity = sig.relations.get(g.name)
            if arity is None:
                out.append(f"{where}: unknown relation symbol {g.name!r}")
                return
            if len(arity) != len(g.args):
                out.append(f"{where}: relation {g.name!r} expects {len(arity)} arguments")
                return
            for want, sub in zip(arity, g.args):
                check_term(sub, local)
                got = term_sort(sig, local, sub)
                if got is not None and got != want:
                    out.append(f"{where}: argument of {g.name!r} has sort {got!r}, wants {want!r}")
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p, local)
        elif isinstance(g, (Exists, Forall)):
            if isinstance(g, Forall) and require_coherent:
                out.append(f"{where}: universal quantifier in a coherent position")
            if not sig.has_sort(g.sort):
                out.append(f"{where}: quantifier over unknown sort {g.sort!r}")
            walk(g.body, {**local, g.var: g.sort})
        elif isinstance(g, Not):
            if require_coherent:
                out.append(f"{where}: negation in a coherent position")
            walk(g.body, local)
        elif isinstance(g, Implies):
            if require_coherent:
                out.append(f"{where}: implication in a coherent position")
            walk(g.lhs, local)
            walk(g.rhs, local)
        else:
            out.append(f"{where}: unrecognized formula node {g!r}")

    if require_coherent and not is_coherent(f):
        pass  # the walk reports the offending nodes with positions
    walk(f, dict(scope))
    return out


# ---------------------------------------------------------------------------
# sequents and theories


@dataclass(frozen=True)
class Sequent:
    """``lhs => rhs`` universally closed over ``context``."""

    context: Context
    lhs: Formula
    rhs: Formula

    def __str__(self) -> str:
        block = ""
        if self.context.pairs:
            block = "[" + ", ".join(f"{n}:{s}" for n, s in self.context) + "] "
        return f"{block}{self.lhs} => {self.rhs}"


@dataclass(frozen=True)
class Theory:
    signature: Signature
    axioms: Tuple[Sequent, ...] = ()

    def is_coherent(self) -> bool:
        return all(is_coherent(a.lhs) and is_coherent(a.rhs) for a in self.axioms)


def wf_sequent(sig: Signature, seq: Sequent, where: str = "sequent",
               require_coherent: bool = False) -> List[str]:
    out: List[str] = []
    seen: Set[str] = set()
    scope: Dict[str, str] = {}
    for n, s in seq.context:
        if n in seen:
            out.append(f"{where}: duplicate context variable {n!r}")
        seen.add(n)
        if not sig.has_sort(s):
            out.append(f"{where}: context variable {n!r} has unknown sort {s!r}")
        scope[n] = s
    out.extend(wf_formula(sig, scope, seq.lhs, f"{where}, lhs", require_coherent))
    out.extend(wf_formula(sig, scope, seq.rhs, f"{where}, rhs", require_coherent))
    for side, name in ((seq.lhs, "lhs"), (seq.rhs, "rhs")):
        for v in free_vars(side):
            if v not in scope:
                out.append(f"{where}, {name}: free variable {v!r} not in context")
    return out


def wf_check(thy: Theory, locations: Optional[Mapping[int, str]] = None,
             require_coherent: bool = False) -> List[str]:
    """Diagnostics for a theory; empty list means well-formed.

    ``locations`` optionally maps axiom index to a source location string
    (the text-format parser supplies line numbers).
    """
    out = list(thy.signature.diagnostics())
    for i, ax in enumerate(thy.axioms):
        loc = locations.get(i) if locations else None
        where = f"axiom {i}" + (f" ({loc})" if loc else "")
        out.extend(wf_sequent(thy.signature, ax, where, require_coherent))
    return out


# ---------------------------------------------------------------------------
# substitution


def fresh_name(base: str, avoid: Set[str]) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def substitute_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    return App(t.fn, tuple(substitute_term(a, mapping) for a in t.args))


def substitute(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Simultaneous capture-avoiding substitution of terms for free variables."""

    def walk(g: Formula, m: Dict[str, Term]) -> Formula:
        if isinstance(g, Eq):
            return Eq(substitute_term(g.lhs, m), substitute_term(g.rhs, m))
        if isinstance(g, Rel):
            return Rel(g.name, tuple(substitute_term(a, m) for a in g.args))
        if isinstance(g, And):
            return And(tuple(walk(p, m) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p, m) for p in g.parts))
        if isinstance(g, Not):
            return Not(walk(g.body, m))
        if isinstance(g, Implies):
            return Implies(walk(g.lhs, m), walk(g.rhs, m))
        if isinstance(g, (Exists, Forall)):
            cls = type(g)
            m2 = {k: v for k, v in m.items() if k != g.var}
            body_free = free_vars(g.body)
            live = {k: v for k, v in m2.items() if k in body_free}
            captured = any(g.var in term_vars(v) for v in live.values())
            var, body = g.var, g.body
            if captured:
                avoid = set(body_free) | set(live)
                for v in live.values():
                    avoid.update(term_vars(v))
                var = fresh_name(g.var, avoid)
                body = walk(body, {g.var: Var(var)})
            return cls(var, g.sort, walk(body, live))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f, dict(mapping))


# ---------------------------------------------------------------------------
# alpha-equivalence via positional normalization


def normalize(context: Context, f: Formula) -> Tuple[Context, Formula]:
    """Rename context variables to ``v0..vn-1`` and bound variables onward.

    Bound variables are numbered in preorder, so two alpha-equivalent
    formulas-in-context normalize to identical values.
    """
    counter = len(context)
    env = {name: f"v{i}" for i, (name, _) in enumerate(context)}
    new_ctx = Context(tuple((f"v{i}", s) for i, (_, s) in enumerate(context)))

    def walk_term(t: Term, e: Mapping[str, str]) -> Term:
        if isinstance(t, Var):
            if t.name not in e:
                raise WellFormednessError(f"free variable {t.name!r} not in context")
            return Var(e[t.name])
        return App(t.fn, tuple(walk_term(a, e) for a in t.args))

    def walk(g: Formula, e: Dict[str, str]) -> Formula:
        nonlocal counter
        if isinstance(g, Eq):
            return Eq(walk_term(g.lhs, e), walk_term(g.rhs, e))
        if isinstance(g, Rel):
            return Rel(g.name, tuple(walk_term(a, e) for a in g.args))
        if isinstance(g, And):
            return And(tuple(walk(p, e) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p, e) for p in g.parts))
        if isinstance(g, Not):
            return Not(walk(g.body, e))
        if isinstance(g, Implies):
            return Implies(walk(g.lhs, e), walk(g.rhs, e))
        if isinstance(g, (Exists, Forall)):
            name = f"v{counter}"
            counter += 1
            return type(g)(name, g.sort, walk(g.body, {**e, g.var: name}))
        raise TypeError(f"not a formula: {g!r}")

    return new_ctx, walk(f, env)


def alpha_eq(a: Tuple[Context, Formula], b: Tuple[Context, Formula]) -> bool:
    """Alpha-equivalence of formulas-in-context.

    Contexts of different lengths or sorts are never equivalent.
    """
    ctx_a, fa = a
    ctx_b, fb = b
    if ctx_a.sorts() != ctx_b.sorts():
        return False
    return normalize(ctx_a, fa) == normalize(ctx_b, fb)


def normalize_sequent(seq: Sequent) -> Sequent:
    """Positional normalization of a whole sequent (shared renaming)."""
    counter = len(seq.context)
    env = {name: f"v{i}" for i, (name, _) in enumerate(seq.context)}
    new_ctx = Context(tuple((f"v{i}", s) for i, (_, s) in enumerate(seq.context)))

    def walk_term(t: Term, e: Mapping[str, str]) -> Term:
        if isinstance(t, Var):
            if t.name not in e:
                raise WellFormednessError(f"free variable {t.name!r} not in context")
            return Var(e[t.name])
        return App(t.fn, tuple(walk_term(x, e) for x in t.args))

    def walk(g: Formula, e: Dict[str, str]) -> Formula:
        nonlocal counter
        if isinstance(g, Eq):
            return Eq(walk_term(g.lhs, e), walk_term(g.rhs, e))
        if isinstance(g, Rel):
            return Rel(g.name, tuple(walk_term(x, e) for x in g.args))
        if isinstance(g, And):
            return And(tuple(walk(p, e) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p, e) for p in g.parts))
        if isinstance(g, Not):
            return Not(walk(g.body, e))
        if isinstance(g, Implies):
            return Implies(walk(g.lhs, e), walk(g.rhs, e))
        if isinstance(g, (Exists, Forall)):
            name = f"v{counter}"
            counter += 1
            return type(g)(name, g.sort, walk(g.body, {**e, g.var: name}))
        raise TypeError(f"not a formula: {g!r}")

    lhs = walk(seq.lhs, env)
    rhs = walk(seq.rhs, env)
    return Sequent(new_ctx, lhs, rhs)


def rename_positional(context: Context, f: Formula, new_names: Sequence[str]) -> Tuple[Context, Formula]:
    """Rename the i-th context variable to ``new_names[i]`` (capture-avoiding)."""
    if len(new_names) != len(context):
        raise ValueError("name list must match context length")
    mapping = {old: Var(new) for (old, _), new in zip(context.pairs, new_names)}
    new_ctx = Context(tuple((new, s) for (_, s), new in zip(context.pairs, new_names)))
    return new_ctx, substitute(f, mapping)


# ---------------------------------------------------------------------------
# Morleyization


@dataclass(frozen=True)
class PredicateDef:
    """One ``P``/``N`` pair standing for a subformula-in-context."""

    pos_name: str
    neg_name: str
    context: Context            # canonical (normalized) context of the subformula
    formula: Formula            # normalized subformula


@dataclass
class Morleyization:
    source: Theory
    theory: Theory
    defs: Tuple[PredicateDef, ...]


def _sub_context(f: Formula, scope: Mapping[str, str]) -> Context:
    return Context(tuple((v, scope[v]) for v in free_vars(f)))


def morleyization(thy: Theory) -> Morleyization:
    """Compile a first-order theory to a coherent one, keeping the bookkeeping.

    Each subformula occurrence phi (free variables in first-occurrence order)
    gets relation symbols ``P``/``N`` with excluded middle, contradiction, and
    a definitional layer that pins ``P`` to phi in every model; axioms are
    replaced by their ``P``-translations.  Occurrences sharing an alpha-normal
    form share symbols.
    """
    diags = wf_check(thy)
    if diags:
        raise WellFormednessError("; ".join(diags))

    taken = set(thy.signature.all_names())
    defs: Dict[Tuple[Context, Formula], PredicateDef] = {}
    order: List[PredicateDef] = []
    layer: List[Sequent] = []

    def allocate(nctx: Context, nf: Formula) -> PredicateDef:
        i = len(order)
        pos = fresh_name(f"P{i}", taken)
        taken.add(pos)
        neg = fresh_name(f"N{i}", taken)
        taken.add(neg)
        d = PredicateDef(pos, neg, nctx, nf)
        defs[(nctx, nf)] = d
        order.append(d)
        return d

    def atom(d: PredicateDef, occurrence: Formula, positive: bool) -> Formula:
        args = tuple(Var(v) for v in free_vars(occurrence))
        return Rel(d.pos_name if positive else d.neg_name, args)

    def register(f: Formula, scope: Mapping[str, str]) -> PredicateDef:
        occ_ctx = _sub_context(f, scope)
        nctx, nf = normalize(occ_ctx, f)
        hit = defs.get((nctx, nf))
        if hit is not None:
            # still have to register children of *this* occurrence shape; the
            # clause layer was already emitted for the shared normal form.
            return hit
        d = allocate(nctx, nf)
        emit_clauses(d)
        return d

    def emit_clauses(d: PredicateDef) -> None:
        f = d.formula
        cx = d.context
        scope = dict(cx.pairs)
        p_atom = atom(d, f, True)
        n_atom = atom(d, f, False)
        layer.append(Sequent(cx, TRUE, disj(p_atom, n_atom)))
        layer.append(Sequent(cx, conj(p_atom, n_atom), FALSE))
        if isinstance(f, (Eq, Rel)):
            layer.append(Sequent(cx, p_atom, f))
            layer.append(Sequent(cx, f, p_atom))
        elif isinstance(f, And):
            kids = [register(p, scope) for p in f.parts]
            body = conj(*(atom(k, p, True) for k, p in zip(kids, f.parts))) if f.parts else TRUE
            layer.append(Sequent(cx, p_atom, body))
            layer.append(Sequent(cx, body, p_atom))
        elif isinstance(f, Or):
            kids = [register(p, scope) for p in f.parts]
            body = disj(*(atom(k, p, True) for k, p in zip(kids, f.parts))) if f.parts else FALSE
            layer.append(Sequent(cx, p_atom, body))
            layer.append(Sequent(cx, body, p_atom))
        elif isinstance(f, Exists):
            kid = register(f.body, {**scope, f.var: f.sort})
            inner = Exists(f.var, f.sort, atom(kid, f.body, True))
            layer.append(Sequent(cx, p_atom, inner))
            layer.append(Sequent(cx, inner, p_atom))
        elif isinstance(f, Not):
            kid = register(f.body, scope)
            k_neg = atom(kid, f.body, False)
            layer.append(Sequent(cx, p_atom, k_neg))
            layer.append(Sequent(cx, k_neg, p_atom))
        elif isinstance(f, Implies):
            kl = register(f.lhs, scope)
            kr = register(f.rhs, scope)
            body = disj(atom(kl, f.lhs, False), atom(kr, f.rhs, True))
            layer.append(Sequent(cx, p_atom, body))
            layer.append(Sequent(cx, body, p_atom))
        elif isinstance(f, Forall):
            kid = register(f.body, {**scope, f.var: f.sort})
            inner = Exists(f.var, f.sort, atom(kid, f.body, False))
            layer.append(Sequent(cx, n_atom, inner))
            layer.append(Sequent(cx, inner, n_atom))
        else:
            raise TypeError(f"not a formula: {f!r}")

    translated: List[Sequent] = []
    for ax in thy.axioms:
        nax = normalize_sequent(ax)
        scope = dict(nax.context.pairs)
        dl = register(nax.lhs, scope)
        dr = register(nax.rhs, scope)
        translated.append(Sequent(nax.context, atom(dl, nax.lhs, True), atom(dr, nax.rhs, True)))

    relations = dict(thy.signature.relations)
    for d in order:
        relations[d.pos_name] = d.context.sorts()
        relations[d.neg_name] = d.context.sorts()
    sig = Signature(thy.signature.sorts, relations, dict(thy.signature.functions))
    out = Theory(sig, tuple(translated) + tuple(layer))
    return Morleyization(thy, out, tuple(order))


def morleyize(thy: Theory) -> Theory:
    """Coherent theory whose models are exactly the P/N-expansions of models of ``thy``."""
    return morleyization(thy).theory
