"""The syntactic category of a coherent theory, built lazily.

Objects are alpha-normalized formulas-in-context; arrows are formulas over
the disjoint concatenation of the two contexts, accepted when the prover
certifies functionality (total, single-valued, landing in the target) within
the session's proof bound.  Arrow equality is itself a proof obligation, so it
comes back as a tri-state.  A finite model induces an evaluation into sets:
objects go to definable subsets and arrows to the functions their graphs carve
out, with the certificate's promises re-checked concretely.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .logic import (
    And, Context, Eq, Exists, Formula, Or, Sequent, Theory, Var,
    conj, free_vars, is_coherent, normalize, rename_positional, substitute,
    wf_formula, WellFormednessError,
)
from .chase import (
    FunctionalityReport, ProofOutcome, TriState, prove_sequent,
    provably_functional,
)
from . import semantics
from .semantics import FinStructure


class ArrowRejected(ValueError):
    """The formula is provably not functional; carries the countermodel."""

    def __init__(self, msg: str, report: FunctionalityReport) -> None:
        super().__init__(msg)
        self.report = report


class CertifiedArrowViolation(RuntimeError):
    """A certified arrow failed a concrete check; the prover is unsound."""


@dataclass(frozen=True)
class SynObject:
    context: Context
    formula: Formula

    def __repr__(self) -> str:
        pairs = ", ".join(f"{n}:{s}" for n, s in self.context.pairs)
        return f"SynObject([{pairs}], {self.formula})"


@dataclass(frozen=True)
class SynArrow:
    source: SynObject
    target: SynObject
    theta: Formula              # over source context a0.. then target context b0..
    verdict: TriState
    report: FunctionalityReport

    @property
    def certified(self) -> bool:
        return self.verdict is TriState.YES

    def joint_context(self) -> Context:
        return Context(self.source.context.pairs
                       + _tgt_context(self.target).pairs)


def _src_names(n: int) -> List[str]:
    return [f"v{i}" for i in range(n)]


def _tgt_names(n: int) -> List[str]:
    return [f"w{i}" for i in range(n)]


def _tgt_context(o: SynObject) -> Context:
    return Context(tuple((f"w{i}", s) for i, (_, s) in enumerate(o.context.pairs)))


class SyntacticCategory:
    """A session over one theory with a shared proof bound and caches."""

    def __init__(self, thy: Theory, bound: int = 6,
                 countermodel_size: int = 3) -> None:
        self.thy = thy
        self.bound = bound
        self.countermodel_size = countermodel_size
        self._objects: Dict[Tuple, SynObject] = {}
        self._eq_cache: Dict[Tuple[Formula, Formula], TriState] = {}

    # -- objects -----------------------------------------------------------

    def object(self, context: Context, formula: Formula) -> SynObject:
        if not is_coherent(formula):
            raise WellFormednessError(f"not a coherent formula: {formula}")
        wf_formula(self.thy.signature, context, formula)
        nctx, nf = normalize(context, formula)
        key = (nctx.sorts(), nf)
        if key not in self._objects:
            self._objects[key] = SynObject(nctx, nf)
        return self._objects[key]

    # -- arrows ------------------------------------------------------------

    def arrow(self, context: Context, theta: Formula,
              src: SynObject, tgt: SynObject) -> SynArrow:
        """Certify ``theta`` (over src's variables then tgt's) as an arrow."""
        if not is_coherent(theta):
            raise WellFormednessError(f"not a coherent formula: {theta}")
        n, m = len(src.context), len(tgt.context)
        if len(context) != n + m:
            raise WellFormednessError(
                f"arrow context has {len(context)} variables, need {n}+{m}")
        if context.sorts() != src.context.sorts() + tgt.context.sorts():
            raise WellFormednessError("arrow context sorts do not match endpoints")
        wf_formula(self.thy.signature, context, theta)
        names = _src_names(n) + _tgt_names(m)
        _, t_norm = rename_positional(context, theta, names)
        return self._certify(t_norm, src, tgt)

    def _certify(self, theta: Formula, src: SynObject, tgt: SynObject) -> SynArrow:
        tctx = _tgt_context(tgt)
        _, psi = rename_positional(tgt.context, tgt.formula, [n for n, _ in tctx.pairs])
        report = provably_functional(
            self.thy, theta, (src.context, src.formula), (tctx, psi),
            self.bound, countermodel_size=self.countermodel_size)
        if report.verdict is TriState.NO:
            raise ArrowRejected(
                f"formula is not functional: sequent {report.failing_sequent} "
                "fails in a finite countermodel", report)
        return SynArrow(src, tgt, theta, report.verdict, report)

    def identity(self, o: SynObject) -> SynArrow:
        tctx = _tgt_context(o)
        eqs = [Eq(Var(w), Var(v)) for (v, _), (w, _) in
               zip(o.context.pairs, tctx.pairs)]
        theta = conj(o.formula, *eqs)
        return self._certify(theta, o, o)

    def compose(self, a: SynArrow, b: SynArrow) -> SynArrow:
        """Diagrammatic composite a;b — first a, then b."""
        if a.target != b.source:
            raise WellFormednessError("composite endpoints do not match")
        n = len(a.source.context)
        k = len(a.target.context)
        m = len(b.target.context)
        mids = [f"m{i}" for i in range(k)]
        theta_a = substitute(
            a.theta, {f"w{i}": Var(mids[i]) for i in range(k)})
        theta_b = substitute(
            b.theta, {f"v{i}": Var(mids[i]) for i in range(k)})
        body = conj(theta_a, theta_b)
        mid_sorts = a.target.context.sorts()
        for i in reversed(range(k)):
            body = Exists(mids[i], mid_sorts[i], body)
        got = self._certify(body, a.source, b.target)
        if got.verdict is TriState.NO:      # unreachable: _certify raises
            raise CertifiedArrowViolation("composite of certified arrows rejected")
        return got

    def eq(self, a: SynArrow, b: SynArrow) -> TriState:
        """Provable equality of parallel arrows: both implications, tri-state."""
        if a.source != b.source or a.target != b.target:
            raise WellFormednessError("arrows are not parallel")
        key = (a.theta, b.theta)
        if key in self._eq_cache:
            return self._eq_cache[key]
        joint = a.joint_context()
        s1 = Sequent(joint, a.theta, b.theta)
        s2 = Sequent(joint, b.theta, a.theta)
        p1 = prove_sequent(self.thy, s1, self.bound)
        p2 = prove_sequent(self.thy, s2, self.bound)
        if p1.proved and p2.proved:
            out = TriState.YES
        else:
            out = TriState.UNKNOWN
            for M in semantics.enumerate_models(self.thy, self.countermodel_size):
                if not (semantics.holds_sequent(M, s1)
                        and semantics.holds_sequent(M, s2)):
                    out = TriState.NO
                    break
        self._eq_cache[key] = out
        self._eq_cache[(b.theta, a.theta)] = out
        return out

    # -- coherent structure at the level of formulas ------------------------

    def product(self, o1: SynObject, o2: SynObject
                ) -> Tuple[SynObject, SynArrow, SynArrow]:
        """The conjunction object on concatenated contexts, with projections."""
        n1, n2 = len(o1.context), len(o2.context)
        names = [f"x{i}" for i in range(n1 + n2)]
        c1, f1 = rename_positional(o1.context, o1.formula, names[:n1])
        c2, f2 = rename_positional(o2.context, o2.formula, names[n1:])
        prod = self.object(Context(c1.pairs + c2.pairs), conj(f1, f2))
        p1 = self._projection(prod, o1, range(0, n1))
        p2 = self._projection(prod, o2, range(n1, n1 + n2))
        return prod, p1, p2

    def _projection(self, prod: SynObject, tgt: SynObject, take) -> SynArrow:
        eqs = [Eq(Var(f"w{j}"), Var(f"v{i}")) for j, i in enumerate(take)]
        return self._certify(conj(prod.formula, *eqs), prod, tgt)

    def image(self, a: SynArrow) -> Tuple[SynObject, SynArrow, SynArrow]:
        """∃-image of an arrow: the target formula strengthened to the range."""
        n = len(a.source.context)
        body = a.theta
        src_sorts = a.source.context.sorts()
        for i in reversed(range(n)):
            body = Exists(f"v{i}", src_sorts[i], body)
        img_ctx = Context(tuple((f"v{i}", s) for i, (_, s) in
                                enumerate(a.target.context.pairs)))
        img_f = substitute(body, {f"w{i}": Var(f"v{i}")
                                  for i in range(len(a.target.context))})
        img = self.object(img_ctx, img_f)
        e = self._certify(a.theta, a.source, img)
        m_eqs = [Eq(Var(f"w{i}"), Var(f"v{i}"))
                 for i in range(len(img.context))]
        m = self._certify(conj(img.formula, *m_eqs), img, a.target)
        return img, e, m

    def union(self, o1: SynObject, o2: SynObject
              ) -> Tuple[SynObject, SynArrow, SynArrow]:
        """The disjunction object of two objects in the same context."""
        if o1.context.sorts() != o2.context.sorts():
            raise WellFormednessError("union needs objects in the same context")
        u = self.object(o1.context, Or((o1.formula, o2.formula)))
        i1 = self._inclusion(o1, u)
        i2 = self._inclusion(o2, u)
        return u, i1, i2

    def _inclusion(self, src: SynObject, tgt: SynObject) -> SynArrow:
        eqs = [Eq(Var(f"w{i}"), Var(f"v{i}")) for i in range(len(src.context))]
        return self._certify(conj(src.formula, *eqs), src, tgt)

    # -- evaluation at a model ----------------------------------------------

    def eval_functor(self, M: FinStructure) -> "EvalFunctor":
        if not semantics.is_model(M, self.thy):
            raise ValueError("structure is not a model of the theory")
        return EvalFunctor(self, M)


class EvalFunctor:
    """Evaluation of the syntactic category at one finite model."""

    def __init__(self, cat: SyntacticCategory, M: FinStructure) -> None:
        self.cat = cat
        self.M = M

    def obj_set(self, o: SynObject) -> Tuple[Tuple[str, ...], ...]:
        sub = semantics.interpret_formula(self.M, o.context, o.formula)
        return tuple(sorted(sub.tuples))

    def arr_fun(self, a: SynArrow
                ) -> Dict[Tuple[str, ...], Tuple[str, ...]]:
        if not a.certified:
            raise ValueError("only certified arrows evaluate to functions")
        joint = a.joint_context()
        graph = semantics.interpret_formula(self.M, joint, a.theta).tuples
        n = len(a.source.context)
        dom = self.obj_set(a.source)
        cod = set(self.obj_set(a.target))
        fn: Dict[Tuple[str, ...], Tuple[str, ...]] = {}
        for row in sorted(graph):
            x, y = row[:n], row[n:]
            if x in fn and fn[x] != y:
                raise CertifiedArrowViolation(
                    f"graph of a certified arrow is not single-valued at {x}")
            fn[x] = y
            if y not in cod:
                raise CertifiedArrowViolation(
                    f"certified arrow leaves the target at {x} -> {y}")
        for x in dom:
            if x not in fn:
                raise CertifiedArrowViolation(
                    f"graph of a certified arrow is not total at {x}")
        for x in list(fn):
            if x not in set(dom):
                raise CertifiedArrowViolation(
                    f"graph of a certified arrow overshoots its source at {x}")
        return fn
