"""Bounded coherent prover: the chase.

Saturation works on a fact base of ground terms with a union-find plus
congruence closure for equality.  Each round fires every axiom instance whose
left side matches and whose right side is not yet satisfied; existentials
introduce fresh witnesses and disjunctions split the branch.  ``Proved`` means
every branch satisfied the goal's right side within the round bound, and comes
with a replayable certificate; ``NotProvedWithinBound`` carries the frontier
of open branches and is not a refutation.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

from .logic import (
    And, App, Context, Eq, Exists, Formula, Or, Rel, Sequent, Signature,
    Term, Theory, Var, WellFormednessError, conj, fresh_name, is_coherent,
    wf_check, wf_sequent,
)
from . import semantics
from .semantics import FinStructure


class TriState(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class ReplayError(ValueError):
    pass


# ---------------------------------------------------------------------------
# fact base


class FactBase:
    """Ground atoms and equations over named constants and function terms.

    Nodes are ground terms (constants or function applications); equality is a
    union-find with congruence closure, and relation facts are stored on
    canonical representatives.
    """

    def __init__(self, signature: Signature):
        self.signature = signature
        self._parent: List[int] = []
        self._rank: List[int] = []
        self._sort: List[str] = []
        self._key: List[Tuple] = []             # ("c", name) or (fn, child ids)
        self._const_name: List[Optional[str]] = []
        self._consts: Dict[str, int] = {}
        self._apps: Dict[Tuple[str, Tuple[int, ...]], int] = {}
        self.facts: Set[Tuple[str, Tuple[int, ...]]] = set()
        self._fresh_counter: int = 0

    # -- union-find ---------------------------------------------------------

    def find(self, x: int) -> int:
        p = self._parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def _union_raw(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._rank[ra] < self._rank[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        if self._rank[ra] == self._rank[rb]:
            self._rank[ra] += 1

    def merge(self, a: int, b: int) -> None:
        if self.find(a) == self.find(b):
            return
        self._union_raw(a, b)
        self._rebuild()

    def _rebuild(self) -> None:
        # re-canonicalize application nodes, merging congruent ones to a fixpoint
        while True:
            apps: Dict[Tuple[str, Tuple[int, ...]], int] = {}
            pending: List[Tuple[int, int]] = []
            for nid, key in enumerate(self._key):
                if key[0] == "c":
                    continue
                fn, kids = key
                ck = (fn, tuple(self.find(k) for k in kids))
                other = apps.get(ck)
                if other is None:
                    apps[ck] = nid
                elif self.find(other) != self.find(nid):
                    pending.append((other, nid))
            self._apps = {k: self.find(v) for k, v in apps.items()}
            if not pending:
                break
            for a, b in pending:
                self._union_raw(a, b)
        self.facts = {(r, tuple(self.find(c) for c in args)) for r, args in self.facts}

    # -- nodes ----------------------------------------------------------------

    def _new_node(self, key: Tuple, sort: str, const_name: Optional[str] = None) -> int:
        nid = len(self._parent)
        self._parent.append(nid)
        self._rank.append(0)
        self._sort.append(sort)
        self._key.append(key)
        self._const_name.append(const_name)
        return nid

    def add_const(self, name: str, sort: str) -> int:
        if name in self._consts:
            raise ValueError(f"constant {name!r} already present")
        nid = self._new_node(("c", name), sort, name)
        self._consts[name] = nid
        return nid

    def fresh_const(self, sort: str) -> int:
        while True:
            self._fresh_counter += 1
            name = f"w{self._fresh_counter}"
            if name not in self._consts:
                return self.add_const(name, sort)

    def app(self, fn: str, child_ids: Sequence[int]) -> int:
        args, res = self.signature.functions[fn]
        ck = (fn, tuple(self.find(c) for c in child_ids))
        hit = self._apps.get(ck)
        if hit is not None:
            return self.find(hit)
        nid = self._new_node(ck, res)
        self._apps[ck] = nid
        return nid

    def term_node(self, t: Term, assign: Mapping[str, int]) -> int:
        if isinstance(t, Var):
            return self.find(assign[t.name])
        return self.app(t.fn, [self.term_node(a, assign) for a in t.args])

    def app_opt(self, fn: str, child_ids: Sequence[int]) -> Optional[int]:
        ck = (fn, tuple(self.find(c) for c in child_ids))
        hit = self._apps.get(ck)
        return None if hit is None else self.find(hit)

    def term_node_opt(self, t: Term, assign: Mapping[str, int]) -> Optional[int]:
        """Like term_node but never creates nodes; None if a term is absent."""
        if isinstance(t, Var):
            return self.find(assign[t.name])
        kids = []
        for a in t.args:
            k = self.term_node_opt(a, assign)
            if k is None:
                return None
            kids.append(k)
        return self.app_opt(t.fn, kids)

    def materialize_apps(self) -> int:
        """Create one level of function applications over the current classes.

        Sound because functions are total in every model; each chase round
        deepens the known term algebra by one application.
        """
        created = 0
        reps = {s: self.reps_of_sort(s) for s in self.signature.sorts}
        for fn in sorted(self.signature.functions):
            arg_sorts, _ = self.signature.functions[fn]
            for combo in itertools.product(*[reps[s] for s in arg_sorts]):
                if self.app_opt(fn, list(combo)) is None:
                    self.app(fn, list(combo))
                    created += 1
        return created

    def reps_of_sort(self, sort: str) -> List[int]:
        return [i for i in range(len(self._parent))
                if self.find(i) == i and self._sort[i] == sort]

    # -- facts ----------------------------------------------------------------

    def add_fact(self, rel: str, ids: Sequence[int]) -> None:
        self.facts.add((rel, tuple(self.find(i) for i in ids)))

    def has_fact(self, rel: str, ids: Sequence[int]) -> bool:
        return (rel, tuple(self.find(i) for i in ids)) in self.facts

    # -- satisfaction of coherent formulas -------------------------------------

    def satisfies(self, f: Formula, assign: Mapping[str, int]) -> bool:
        if isinstance(f, Eq):
            a = self.term_node_opt(f.lhs, assign)
            b = self.term_node_opt(f.rhs, assign)
            return a is not None and a == b
        if isinstance(f, Rel):
            ids = [self.term_node_opt(a, assign) for a in f.args]
            return all(i is not None for i in ids) and self.has_fact(f.name, ids)
        if isinstance(f, And):
            return all(self.satisfies(p, assign) for p in f.parts)
        if isinstance(f, Or):
            return any(self.satisfies(p, assign) for p in f.parts)
        if isinstance(f, Exists):
            for c in self.reps_of_sort(f.sort):
                if self.satisfies(f.body, {**assign, f.var: c}):
                    return True
            return False
        raise WellFormednessError(f"chase formulas must be coherent, got {type(f).__name__}")

    def matches(self, context: Context, f: Formula) -> List[Dict[str, int]]:
        """All context assignments satisfying ``f``, in canonical order."""
        spaces = [self.reps_of_sort(s) for _, s in context]
        out: List[Dict[str, int]] = []
        for combo in itertools.product(*spaces):
            assign = {n: c for (n, _), c in zip(context.pairs, combo)}
            if self.satisfies(f, assign):
                out.append(assign)
        return out

    # -- cloning / rendering ----------------------------------------------------

    def clone(self) -> "FactBase":
        fb = FactBase.__new__(FactBase)
        fb.signature = self.signature
        fb._parent = list(self._parent)
        fb._rank = list(self._rank)
        fb._sort = list(self._sort)
        fb._key = list(self._key)
        fb._const_name = list(self._const_name)
        fb._consts = dict(self._consts)
        fb._apps = dict(self._apps)
        fb.facts = set(self.facts)
        fb._fresh_counter = self._fresh_counter
        return fb

    def render(self, nid: int) -> str:
        """Readable ground term for a class: a constant if one exists."""
        rep = self.find(nid)
        names = [self._const_name[i] for i in range(len(self._parent))
                 if self.find(i) == rep and self._const_name[i] is not None]
        if names:
            return min(names)
        key = self._key[rep]
        if key[0] == "c":
            return key[1]
        fn, kids = key
        return f"{fn}({', '.join(self.render(k) for k in kids)})"

    def snapshot(self) -> Dict:
        """Canonical JSON-able view: constants, equal classes and facts."""
        classes: Dict[int, List[str]] = {}
        for name, nid in self._consts.items():
            classes.setdefault(self.find(nid), []).append(name)
        return {
            "constants": sorted(self._consts),
            "classes": sorted(sorted(v) for v in classes.values() if len(v) > 1),
            "facts": sorted(
                f"{rel}({', '.join(self.render(a) for a in args)})"
                for rel, args in self.facts
            ),
        }


# ---------------------------------------------------------------------------
# asserting coherent formulas (the chase step)


def _assert_formula(
    fb: FactBase, f: Formula, assign: Mapping[str, int]
) -> Tuple[List[Tuple[FactBase, Tuple[int, ...]]], List[Tuple[int, ...]]]:
    """Make ``f`` true, splitting on disjunctions.

    Returns (alive branches with their disjunct-choice paths, closed paths).
    """
    if isinstance(f, Eq):
        fb.merge(fb.term_node(f.lhs, assign), fb.term_node(f.rhs, assign))
        return [(fb, ())], []
    if isinstance(f, Rel):
        fb.add_fact(f.name, [fb.term_node(a, assign) for a in f.args])
        return [(fb, ())], []
    if isinstance(f, And):
        state: List[Tuple[FactBase, Tuple[int, ...]]] = [(fb, ())]
        closed: List[Tuple[int, ...]] = []
        for part in f.parts:
            nxt: List[Tuple[FactBase, Tuple[int, ...]]] = []
            for b, path in state:
                alive, dead = _assert_formula(b, part, assign)
                nxt.extend((b2, path + p2) for b2, p2 in alive)
                closed.extend(path + p2 for p2 in dead)
            state = nxt
        return state, closed
    if isinstance(f, Or):
        if not f.parts:
            return [], [()]
        alive: List[Tuple[FactBase, Tuple[int, ...]]] = []
        closed = []
        for i, part in enumerate(f.parts):
            b = fb.clone()
            a, dead = _assert_formula(b, part, assign)
            alive.extend((b2, (i,) + p) for b2, p in a)
            closed.extend((i,) + p for p in dead)
        return alive, closed
    if isinstance(f, Exists):
        w = fb.fresh_const(f.sort)
        return _assert_formula(fb, f.body, {**assign, f.var: w})
    raise WellFormednessError(f"chase formulas must be coherent, got {type(f).__name__}")


def _assert_with_choice(
    fb: FactBase, f: Formula, assign: Mapping[str, int], path: List[int]
) -> Optional[FactBase]:
    """Replay ``_assert_formula`` along a recorded disjunct-choice path."""
    if isinstance(f, Eq):
        fb.merge(fb.term_node(f.lhs, assign), fb.term_node(f.rhs, assign))
        return fb
    if isinstance(f, Rel):
        fb.add_fact(f.name, [fb.term_node(a, assign) for a in f.args])
        return fb
    if isinstance(f, And):
        cur: Optional[FactBase] = fb
        for part in f.parts:
            if cur is None:
                raise ReplayError("steps after a closed branch")
            cur = _assert_with_choice(cur, part, assign, path)
        return cur
    if isinstance(f, Or):
        if not f.parts:
            return None
        if not path:
            raise ReplayError("certificate path exhausted at a disjunction")
        i = path.pop(0)
        if not 0 <= i < len(f.parts):
            raise ReplayError(f"disjunct index {i} out of range")
        return _assert_with_choice(fb, f.parts[i], assign, path)
    if isinstance(f, Exists):
        w = fb.fresh_const(f.sort)
        return _assert_with_choice(fb, f.body, {**assign, f.var: w}, path)
    raise WellFormednessError(f"chase formulas must be coherent, got {type(f).__name__}")


# ---------------------------------------------------------------------------
# certificates


def _cert_leaf(status: str = "open") -> Dict:
    return {"steps": [], "status": status}


@dataclass
class _Branch:
    fb: FactBase
    assign: Dict[str, int]
    cert: Dict


def _record_firing(
    branch: _Branch, label, subst_terms: Dict[str, str], rhs: Formula,
    match: Mapping[str, int],
) -> List[_Branch]:
    """Assert ``rhs`` under the match assignment; on splits, grow the tree."""
    alive, closed = _assert_formula(branch.fb, rhs, match)
    step = {"axiom": label, "subst": subst_terms}
    if len(alive) == 1 and not closed and alive[0][1] == ():
        branch.cert["steps"].append(step)
        branch.fb = alive[0][0]
        return [branch]
    branch.cert["split"] = step
    branch.cert["branches"] = []
    out: List[_Branch] = []
    for fb2, path in alive:
        child = _cert_leaf()
        branch.cert["branches"].append({"choice": list(path), "node": child})
        out.append(_Branch(fb2, dict(branch.assign), child))
    for path in closed:
        branch.cert["branches"].append({"choice": list(path), "node": _cert_leaf("closed")})
    if not alive and not closed:
        raise AssertionError("assertion produced no branches")
    return out


class OutcomeTag(enum.Enum):
    PROVED = "Proved"
    NOT_PROVED_WITHIN_BOUND = "NotProvedWithinBound"


@dataclass
class ProofOutcome:
    tag: OutcomeTag
    sequent: Sequent
    bound: int
    rounds_used: int
    certificate: Optional[Dict] = None        # derivation tree when Proved
    frontier: Optional[List[Dict]] = None     # open branch snapshots otherwise

    @property
    def proved(self) -> bool:
        return self.tag is OutcomeTag.PROVED


# ---------------------------------------------------------------------------
# saturation and proving


def _validate_goal(thy: Theory, seq: Sequent) -> None:
    diags = wf_check(thy, require_coherent=True)
    diags += wf_sequent(thy.signature, seq, "goal", require_coherent=True)
    if diags:
        raise WellFormednessError("; ".join(diags))


def _applicable(thy: Theory, fb: FactBase) -> List[Tuple[int, Dict[str, int]]]:
    out: List[Tuple[int, Dict[str, int]]] = []
    for i, ax in enumerate(thy.axioms):
        for assign in fb.matches(ax.context, ax.lhs):
            if not fb.satisfies(ax.rhs, assign):
                out.append((i, assign))
    return out


def _subst_terms(fb: FactBase, assign: Mapping[str, int]) -> Dict[str, str]:
    return {v: fb.render(n) for v, n in sorted(assign.items())}


def saturate(thy: Theory, base: FactBase, bound: int) -> List[FactBase]:
    """Run ≤ ``bound`` breadth-first rounds; returns all branches still alive."""
    branches = [_Branch(base.clone(), {}, _cert_leaf())]
    for _ in range(bound):
        progressed = False
        for br in branches:
            if br.fb.materialize_apps():
                progressed = True
        nxt: List[_Branch] = []
        for br in branches:
            firings = _applicable(thy, br.fb)
            if not firings:
                nxt.append(br)
                continue
            progressed = True
            work = [br]
            for ax_i, assign in firings:
                ax = thy.axioms[ax_i]
                grown: List[_Branch] = []
                for b in work:
                    if b.fb.satisfies(ax.rhs, assign):
                        grown.append(b)  # an earlier firing already handled it
                        continue
                    grown.extend(_record_firing(b, ax_i, _subst_terms(b.fb, assign), ax.rhs, assign))
                work = grown
            nxt.extend(work)
        branches = nxt
        if not progressed:
            break
    return [b.fb for b in branches]


def prove_sequent(thy: Theory, seq: Sequent, bound: int) -> ProofOutcome:
    """Chase for ``seq`` under ``thy``; sound for Set models, no refutations."""
    _validate_goal(thy, seq)
    fb = FactBase(thy.signature)
    assign = {n: fb.add_const(n, s) for n, s in seq.context}
    root = _cert_leaf()
    seed = _Branch(fb, assign, root)
    open_branches = _record_firing(seed, "seed", _subst_terms(fb, assign), seq.lhs, assign)

    rounds = 0
    while True:
        still_open: List[_Branch] = []
        for br in open_branches:
            if br.fb.satisfies(seq.rhs, br.assign):
                br.cert["status"] = "proved"
            else:
                still_open.append(br)
        open_branches = still_open
        if not open_branches:
            return ProofOutcome(OutcomeTag.PROVED, seq, bound, rounds, certificate=root)
        if rounds >= bound:
            break
        rounds += 1
        stable = True
        for br in open_branches:
            if br.fb.materialize_apps():
                stable = False
        nxt: List[_Branch] = []
        for br in open_branches:
            firings = _applicable(thy, br.fb)
            if not firings:
                nxt.append(br)
                continue
            stable = False
            work = [br]
            for ax_i, a in firings:
                ax = thy.axioms[ax_i]
                grown: List[_Branch] = []
                for b in work:
                    if b.fb.satisfies(ax.rhs, a):
                        grown.append(b)
                        continue
                    grown.extend(_record_firing(b, ax_i, _subst_terms(b.fb, a), ax.rhs, a))
                work = grown
            nxt.extend(work)
        open_branches = nxt
        if stable:
            break  # saturated; more rounds cannot help
    frontier = [b.fb.snapshot() for b in open_branches]
    return ProofOutcome(
        OutcomeTag.NOT_PROVED_WITHIN_BOUND, seq, bound, rounds, frontier=frontier
    )


# ---------------------------------------------------------------------------
# certificate replay


def replay(thy: Theory, seq: Sequent, outcome: ProofOutcome) -> bool:
    """Re-run a Proved certificate; True iff every leaf checks out."""
    if not outcome.proved or outcome.certificate is None:
        return False
    from .parser import parse_term

    def check(fb: FactBase, f: Formula, assign: Mapping[str, int]) -> bool:
        """Satisfaction with the materialization the original rounds had."""
        for _ in range(outcome.rounds_used + 1):
            if fb.satisfies(f, assign):
                return True
            if fb.materialize_apps() == 0:
                return False
        return fb.satisfies(f, assign)

    def resolve(fb: FactBase, text: str) -> int:
        t = parse_term(text)

        def to_node(u: Term) -> int:
            if isinstance(u, Var):
                if u.name not in fb._consts:
                    raise ReplayError(f"unknown constant {u.name!r} in certificate")
                return fb.find(fb._consts[u.name])
            return fb.app(u.fn, [to_node(a) for a in u.args])

        return to_node(t)

    def run_node(fb: FactBase, assign: Dict[str, int], node: Dict) -> bool:
        for step in node.get("steps", []):
            fb2 = apply_step(fb, step)
            if fb2 is None:
                raise ReplayError("recorded step closed the branch unexpectedly")
            fb = fb2
        if "split" in node:
            step = node["split"]
            label, a, rhs = step_parts(fb, step)
            for entry in node.get("branches", []):
                path = list(entry["choice"])
                sub = _assert_with_choice(fb.clone(), rhs, a, path)
                if path:
                    raise ReplayError("unused disjunct choices")
                child = entry["node"]
                if sub is None:
                    if child.get("status") != "closed":
                        raise ReplayError("branch closed but certificate says open")
                    continue
                if child.get("status") == "closed":
                    raise ReplayError("certificate claims closure on an open branch")
                if not run_node(sub, dict(assign_on(sub)), child):
                    return False
            return True
        if node.get("status") == "closed":
            return True
        if node.get("status") != "proved":
            return False
        return check(fb, seq.rhs, {n: fb.find(fb._consts[n]) for n, _ in seq.context})

    def assign_on(fb: FactBase) -> Dict[str, int]:
        return {n: fb.find(fb._consts[n]) for n, _ in seq.context}

    def step_parts(fb: FactBase, step: Dict):
        label = step["axiom"]
        subst = {v: resolve(fb, t) for v, t in step["subst"].items()}
        if label == "seed":
            return label, subst, seq.lhs
        ax = thy.axioms[label]
        if not check(fb, ax.lhs, subst):
            raise ReplayError(f"axiom {label} premise not satisfied at recorded match")
        return label, subst, ax.rhs

    def apply_step(fb: FactBase, step: Dict) -> Optional[FactBase]:
        label, subst, rhs = step_parts(fb, step)
        return _assert_with_choice(fb, rhs, subst, [])

    fb0 = FactBase(thy.signature)
    for n, s in seq.context:
        fb0.add_const(n, s)
    try:
        return run_node(fb0, {n: fb0._consts[n] for n, _ in seq.context}, outcome.certificate)
    except ReplayError:
        return False


# ---------------------------------------------------------------------------
# provable functionality


class ContextOverlapError(ValueError):
    pass


@dataclass
class FunctionalityReport:
    verdict: TriState
    sequents: Tuple[Sequent, Sequent, Sequent]
    proofs: Optional[Tuple[ProofOutcome, ProofOutcome, ProofOutcome]] = None
    countermodel: Optional[FinStructure] = None
    failing_sequent: Optional[int] = None
    note: str = ""


def functionality_sequents(
    theta: Formula,
    src: Tuple[Context, Formula],
    tgt: Tuple[Context, Formula],
) -> Tuple[Sequent, Sequent, Sequent]:
    """The three sequents making theta a provably functional relation."""
    (sctx, phi), (tctx, psi) = src, tgt
    overlap = set(sctx.names()) & set(tctx.names())
    if overlap:
        raise ContextOverlapError(f"contexts share variables {sorted(overlap)}")
    joint = Context(sctx.pairs + tctx.pairs)
    s1 = Sequent(joint, theta, conj(phi, psi))
    ex = theta
    for name, sort in reversed(tctx.pairs):
        ex = Exists(name, sort, ex)
    s2 = Sequent(sctx, phi, ex)
    taken = set(joint.names())
    copies = []
    for i, (_, s) in enumerate(tctx.pairs):
        c = fresh_name(f"q{i}", taken)
        taken.add(c)
        copies.append(c)
    theta2 = theta
    from .logic import substitute
    theta2 = substitute(theta, {n: Var(c) for (n, _), c in zip(tctx.pairs, copies)})
    ctx3 = Context(joint.pairs + tuple((c, s) for c, (_, s) in zip(copies, tctx.pairs)))
    eqs = conj(*(Eq(Var(n), Var(c)) for (n, _), c in zip(tctx.pairs, copies))) \
        if tctx.pairs else And(())
    s3 = Sequent(ctx3, conj(theta, theta2), eqs)
    return s1, s2, s3


def provably_functional(
    thy: Theory,
    theta: Formula,
    src: Tuple[Context, Formula],
    tgt: Tuple[Context, Formula],
    bound: int,
    countermodel_size: int = 3,
    enumeration_budget: int = 500_000,
) -> FunctionalityReport:
    """Yes with certificates / No with a finite countermodel / Unknown."""
    seqs = functionality_sequents(theta, src, tgt)
    proofs = tuple(prove_sequent(thy, s, bound) for s in seqs)
    if all(p.proved for p in proofs):
        return FunctionalityReport(TriState.YES, seqs, proofs=proofs)  # type: ignore[arg-type]
    note = ""
    try:
        models = semantics.enumerate_models(thy, countermodel_size, budget=enumeration_budget)
    except semantics.EnumerationBudgetError as e:
        models = []
        note = str(e)
    for M in models:
        for i, s in enumerate(seqs):
            if not semantics.holds_sequent(M, s):
                return FunctionalityReport(
                    TriState.NO, seqs, countermodel=M, failing_sequent=i
                )
    return FunctionalityReport(TriState.UNKNOWN, seqs, proofs=proofs, note=note)  # type: ignore[arg-type]
