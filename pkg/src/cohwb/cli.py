"""Command-line front end for the workbench.

One executable, ``wb``, with a subcommand per operation.  Exit codes follow a
single contract everywhere:

* 0 — the command succeeded and the checked property (if any) holds;
* 1 — the property fails: a countermodel exists, an arrow is rejected, a
  lift or stage cannot be found, verification diagnostics are non-empty;
* 2 — a decision procedure exhausted its bound or budget without an answer;
* 3 — malformed input (unreadable file, parse error, ill-typed data), with
  diagnostics on standard error.

File formats: theories are the text grammar of :mod:`cohwb.parser`;
structures, categories, functors, 2-cells and theory morphisms are the JSON
documents of :mod:`cohwb.semantics`, :mod:`cohwb.fincat` and
:mod:`cohwb.soa`.  Every JSON document the tool writes is accepted
bit-identically by the matching reader.  All enumeration here is exhaustive
and canonically ordered — no subcommand samples randomly, so there are no
seed flags to set.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

from . import __version__
from . import canon, chase, colimits, fincat
from .chase import TriState, prove_sequent, replay
from .closure import ClosureBudgetError, coherent_closure, verify_closed
from .colimits import StageBoundError, chain_colimit, factor_through_stage, omega_chain
from .fincat import (FinCat, FinFunctor, IsofibrationRequired, SetFragment,
                     cat_from_json, cat_to_dot, cat_to_json, cell_from_json,
                     cell_to_json, functor_from_json, functor_to_json,
                     image_factorization, pullback_category)
from .logic import Context, Theory, WellFormednessError, morleyize, wf_check
from .parser import (ParseError, formula_to_text, parse_formula, parse_sequent,
                     parse_theory, sequent_to_text, theory_to_text)
from .semantics import (EnumerationBudgetError, enumerate_homs,
                        enumerate_models, interpret_formula,
                        structure_from_json, structure_to_json,
                        validate_structure)
from .soa import (MorphismError, StageBudgetError, morphism_from_json,
                  soa_factorize, stage_log_to_json, verify_stage_log)
from .syncat import ArrowRejected, CertifiedArrowViolation, SyntacticCategory
from .twocat import (EqualizerCone, equalizer_split, homotopy_product,
                     homotopy_pullback, mediate_into_hopullback)

OK, FAIL, UNKNOWN, INPUT = 0, 1, 2, 3


class _InputError(ValueError):
    """Raised by handlers for anything that should exit 3."""


# ---------------------------------------------------------------------------
# small IO helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise _InputError(f"cannot read {path}: {e}") from e


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise _InputError(f"cannot write {path}: {e}") from e


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        _write(out, text if text.endswith("\n") else text + "\n")
        print(f"wrote {out}")
    else:
        print(text)


def _theory(path: str) -> Theory:
    thy, locs = parse_theory(_read(path))
    diags = wf_check(thy, locs)
    if diags:
        raise _InputError(f"{path}: " + "; ".join(diags))
    return thy


def _structure(path: str, thy: Theory):
    M = structure_from_json(_read(path))
    diags = validate_structure(M, thy.signature)
    if diags:
        raise _InputError(f"{path}: " + "; ".join(diags))
    return M


def _cat(path: str) -> Tuple[FinCat, Optional[SetFragment]]:
    return cat_from_json(_read(path))


def _fragment(path: str) -> SetFragment:
    _, frag = _cat(path)
    if frag is None:
        raise _InputError(f"{path}: no set realization in the category file")
    return frag


def _functor(path: str) -> FinFunctor:
    return functor_from_json(_read(path))


def _cell(path: str) -> fincat.TwoCell:
    return cell_from_json(_read(path))


def _context(text: str) -> Context:
    text = text.strip()
    if not text:
        return Context(())
    return parse_sequent(f"[{text}] true => true").context


def _csv(text: Optional[str]) -> Tuple[str, ...]:
    if not text:
        return ()
    return tuple(t for t in (s.strip() for s in text.split(",")) if t)


def _dot(cat: FinCat, path: Optional[str], name: str) -> None:
    if path:
        _write(path, cat_to_dot(cat, name))
        print(f"wrote {path}")


# ---------------------------------------------------------------------------
# logic / semantics subcommands


def _cmd_check(args) -> int:
    thy, locs = parse_theory(_read(args.theory))
    diags = wf_check(thy, locs, require_coherent=args.coherent)
    if diags:
        for d in diags:
            print(d)
        return FAIL
    sig = thy.signature
    print(f"ok: {len(sig.sorts)} sorts, {len(sig.functions)} functions, "
          f"{len(sig.relations)} relations, {len(thy.axioms)} axioms")
    return OK


def _cmd_morleyize(args) -> int:
    thy = _theory(args.theory)
    out = morleyize(thy)
    _emit(theory_to_text(out), args.out)
    return OK


def _cmd_prove(args) -> int:
    thy = _theory(args.theory)
    seq = parse_sequent(args.sequent)
    outcome = prove_sequent(thy, seq, args.bound)
    if outcome.tag is chase.OutcomeTag.PROVED:
        if not args.no_replay and not replay(thy, seq, outcome):
            print("certificate replay failed", file=sys.stderr)
            return FAIL
        print(f"Proved (bound {args.bound}, rounds {outcome.rounds_used})")
        if args.emit_cert:
            doc = {
                "sequent": sequent_to_text(seq),
                "bound": outcome.bound,
                "rounds_used": outcome.rounds_used,
                "certificate": outcome.certificate,
            }
            _write(args.emit_cert, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return OK
    print(f"NotProvedWithinBound (bound {args.bound}, "
          f"{len(outcome.frontier)} open branch(es))")
    return UNKNOWN


def _cmd_models(args) -> int:
    thy = _theory(args.theory)
    exact = None
    if args.exact_size is not None:
        exact = {s: args.exact_size for s in thy.signature.sorts}
    models = enumerate_models(thy, args.max_size, exact, args.budget)
    if args.count:
        print(len(models))
        return OK
    if args.out_dir:
        d = Path(args.out_dir)
        try:
            d.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise _InputError(f"cannot create {args.out_dir}: {e}") from e
        for i, M in enumerate(models):
            _write(str(d / f"model_{i:03d}.json"), structure_to_json(M))
        print(f"wrote {len(models)} model(s) to {args.out_dir}")
        return OK
    docs = [json.loads(structure_to_json(M)) for M in models]
    print(json.dumps(docs, indent=2, sort_keys=True))
    return OK


def _cmd_homs(args) -> int:
    thy = _theory(args.theory)
    M = _structure(args.source, thy)
    N = _structure(args.target, thy)
    homs = enumerate_homs(M, N, thy.signature, args.budget)
    if args.count:
        print(len(homs))
    else:
        print(json.dumps(homs, indent=2, sort_keys=True))
    return OK


def _cmd_interp(args) -> int:
    thy = _theory(args.theory)
    M = _structure(args.model, thy)
    ctx = _context(args.context)
    phi = parse_formula(args.formula)
    sub = interpret_formula(M, ctx, phi)
    print(json.dumps(sorted(list(t) for t in sub.tuples)))
    return OK


# ---------------------------------------------------------------------------
# syntactic category subcommands


def _syncat(args) -> SyntacticCategory:
    return SyntacticCategory(_theory(args.theory), bound=args.bound)


def _syn_object(sc: SyntacticCategory, ctx_text: str, formula_text: str):
    return sc.object(_context(ctx_text), parse_formula(formula_text))


def _syn_arrow(sc, ctx_text, theta_text, src, tgt):
    return sc.arrow(_context(ctx_text), parse_formula(theta_text), src, tgt)


def _cmd_syncat_object(args) -> int:
    sc = _syncat(args)
    print(repr(_syn_object(sc, args.context, args.formula)))
    return OK


def _cmd_syncat_arrow(args) -> int:
    sc = _syncat(args)
    src = _syn_object(sc, args.src_context, args.src_formula)
    tgt = _syn_object(sc, args.tgt_context, args.tgt_formula)
    try:
        a = _syn_arrow(sc, args.context, args.theta, src, tgt)
    except ArrowRejected as e:
        print(f"rejected: {e}")
        return FAIL
    print(f"functionality: {a.verdict.value}")
    return OK if a.certified else UNKNOWN


def _cmd_syncat_compose(args) -> int:
    sc = _syncat(args)
    src = _syn_object(sc, args.src_context, args.src_formula)
    mid = _syn_object(sc, args.mid_context, args.mid_formula)
    tgt = _syn_object(sc, args.tgt_context, args.tgt_formula)
    try:
        a = _syn_arrow(sc, args.context1, args.theta1, src, mid)
        b = _syn_arrow(sc, args.context2, args.theta2, mid, tgt)
        c = sc.compose(a, b)
    except ArrowRejected as e:
        print(f"rejected: {e}")
        return FAIL
    print(formula_to_text(c.theta))
    print(f"functionality: {c.verdict.value}")
    return OK if c.certified else UNKNOWN


def _cmd_syncat_eq(args) -> int:
    sc = _syncat(args)
    src = _syn_object(sc, args.src_context, args.src_formula)
    tgt = _syn_object(sc, args.tgt_context, args.tgt_formula)
    try:
        a = _syn_arrow(sc, args.context1, args.theta1, src, tgt)
        b = _syn_arrow(sc, args.context2, args.theta2, src, tgt)
    except ArrowRejected as e:
        print(f"rejected: {e}")
        return FAIL
    verdict = sc.eq(a, b)
    print({TriState.YES: "Yes", TriState.NO: "No",
           TriState.UNKNOWN: "Unknown"}[verdict])
    return {TriState.YES: OK, TriState.NO: FAIL,
            TriState.UNKNOWN: UNKNOWN}[verdict]


def _cmd_syncat_eval(args) -> int:
    sc = _syncat(args)
    M = _structure(args.model, sc.thy)
    ev = sc.eval_functor(M)
    src = _syn_object(sc, args.context, args.formula)
    if args.theta is None:
        print(json.dumps([list(t) for t in ev.obj_set(src)]))
        return OK
    if args.tgt_context is None or args.tgt_formula is None or args.arrow_context is None:
        raise _InputError("--theta needs --tgt-context, --tgt-formula and --arrow-context")
    tgt = _syn_object(sc, args.tgt_context, args.tgt_formula)
    try:
        a = _syn_arrow(sc, args.arrow_context, args.theta, src, tgt)
        fn = ev.arr_fun(a)
    except ArrowRejected as e:
        print(f"rejected: {e}")
        return FAIL
    except CertifiedArrowViolation as e:
        print(f"soundness violation: {e}", file=sys.stderr)
        return FAIL
    doc = [{"from": list(x), "to": list(y)} for x, y in sorted(fn.items())]
    print(json.dumps(doc, indent=2, sort_keys=True))
    return OK


# ---------------------------------------------------------------------------
# finite categories: internal theories, diagrams, closure, (co)limits


def _cmd_internal(args) -> int:
    cat, _ = _cat(args.category)
    _emit(theory_to_text(canon.internal_theory(cat)), args.out)
    return OK


def _cmd_verify_diagram(args) -> int:
    frag = _fragment(args.fragment)
    d = canon.MarkedDiagram(tag=args.tag, arrows=_csv(args.arrows),
                            objects=_csv(args.objects))
    shape = canon.shape_diagnostics(frag.cat, d)
    if shape:
        raise _InputError("; ".join(shape))
    v = canon.verify_diagram_property(frag, d)
    print(f"semantic: {v.semantic}")
    print(f"internal: {v.sequent}")
    print(f"agree: {v.agree}")
    if not v.agree:
        print("soundness warning: semantic and internal verdicts disagree",
              file=sys.stderr)
        return FAIL
    return OK if v.semantic else FAIL


def _cmd_closure(args) -> int:
    frag = _fragment(args.fragment)
    objs = _csv(args.objects) or tuple(frag.cat.objects)
    arrs = _csv(args.arrows) or tuple(frag.cat.arrows)
    res = coherent_closure(frag, objs, arrs, rounds=args.rounds,
                           require_fixed_point=args.require_fixed_point,
                           max_objects=args.max_objects)
    for r in res.rounds:
        by = {}
        for inst in r.instances:
            by[inst.status] = by.get(inst.status, 0) + 1
        parts = ", ".join(f"{k} {v}" for k, v in sorted(by.items())) or "nothing to do"
        print(f"round {r.index}: {len(r.instances)} instance(s) ({parts}), "
              f"{r.mediators_added} mediator(s); "
              f"{r.object_count} objects / {r.arrow_count} arrows")
    print(f"fixed point: {'yes' if res.fixed_point else 'no'}")
    print(f"closure: {len(res.sub_objects)} objects, {len(res.sub_arrows)} arrows")
    out_frag = res.fragment()
    if args.out:
        _write(args.out, cat_to_json(out_frag.cat, out_frag) + "\n")
        print(f"wrote {args.out}")
    _dot(out_frag.cat, args.dot, "closure")
    if args.verify:
        diags = verify_closed(res)
        for d in diags:
            print(d, file=sys.stderr)
        if diags:
            return FAIL
    return OK


def _cmd_pullback(args) -> int:
    F, G = _functor(args.left), _functor(args.right)
    try:
        cat, p1, p2 = pullback_category(F, G, force=args.force)
    except IsofibrationRequired as e:
        print(f"no isofibration leg: {e}", file=sys.stderr)
        return FAIL
    print(f"{len(cat.objects)} objects, {len(cat.arrows)} arrows")
    if args.out:
        _write(args.out, cat_to_json(cat) + "\n")
        print(f"wrote {args.out}")
    _dot(cat, args.dot, "pullback")
    return OK


def _chain(args):
    cats, frags = [], []
    for p in args.stages:
        c, f = _cat(p)
        cats.append(c)
        frags.append(f)
    steps = [_functor(p) for p in args.steps or []]
    if len(steps) != max(0, len(cats) - 1):
        raise _InputError("need exactly one step functor between consecutive stages")
    for i, s in enumerate(steps):
        if s.source != cats[i] or s.target != cats[i + 1]:
            raise _InputError(f"step {i} does not connect stage {i} to stage {i + 1}")
    use_frags = frags if all(f is not None for f in frags) and frags else None
    return omega_chain(cats, steps, use_frags)


def _cmd_colimit(args) -> int:
    res = chain_colimit(_chain(args))
    print(f"colimit: {len(res.colimit.objects)} objects, "
          f"{len(res.colimit.arrows)} arrows")
    diags = colimits.verify_colimit_coherent(res)
    for d in diags:
        print(d, file=sys.stderr)
    if args.out:
        _write(args.out, cat_to_json(res.colimit) + "\n")
        print(f"wrote {args.out}")
    _dot(res.colimit, args.dot, "colimit")
    return FAIL if diags else OK


def _cmd_factor_stage(args) -> int:
    res = chain_colimit(_chain(args))
    F = _functor(args.functor)
    if F.target != res.colimit:
        raise _InputError("functor target is not the colimit of the given chain")
    respect = []
    if args.respect_json:
        for d in json.loads(_read(args.respect_json)):
            respect.append(canon.MarkedDiagram(
                tag=d["tag"], arrows=tuple(d["arrows"]),
                objects=tuple(d.get("objects", ()))))
    try:
        sf = factor_through_stage(res, F, respect)
    except StageBoundError as e:
        print(f"no stage admits the factorization: {e}", file=sys.stderr)
        return FAIL
    print(f"stage: {sf.stage}")
    print(f"respected diagrams: {len(sf.respected)}")
    if args.out:
        _write(args.out, functor_to_json(sf.functor) + "\n")
        print(f"wrote {args.out}")
    return OK


def _cmd_factorize(args) -> int:
    frag = _fragment(args.fragment)
    if args.arrow not in frag.funs:
        raise _InputError(f"unknown arrow: {args.arrow}")
    out, e, m, obj = image_factorization(frag, args.arrow, args.image_name)
    print(f"e: {e}  ({frag.cat.src[args.arrow]} -> {obj}, surjective)")
    print(f"m: {m}  ({obj} -> {frag.cat.tgt[args.arrow]}, injective)")
    print(f"image object: {obj} (size {len(out.sets[obj])})")
    if args.out:
        _write(args.out, cat_to_json(out.cat, out) + "\n")
        print(f"wrote {args.out}")
    return OK


# ---------------------------------------------------------------------------
# bicategorical subcommands


def _cmd_hoproduct(args) -> int:
    cats = [_cat(p)[0] for p in args.categories]
    prod = homotopy_product(cats)
    print(f"product: {len(prod.category.objects)} objects, "
          f"{len(prod.category.arrows)} arrows, "
          f"{len(prod.projections)} projection(s)")
    if args.out:
        _write(args.out, cat_to_json(prod.category) + "\n")
        print(f"wrote {args.out}")
    _dot(prod.category, args.dot, "hoproduct")
    return OK


def _cmd_hopullback(args) -> int:
    res = homotopy_pullback(_functor(args.left), _functor(args.right))
    print(f"apex: {len(res.apex.objects)} objects, {len(res.apex.arrows)} arrows")
    print(f"filler components: {json.dumps(res.filler.component, sort_keys=True)}")
    if args.out:
        _write(args.out, cat_to_json(res.apex) + "\n")
        print(f"wrote {args.out}")
    if args.out_left:
        _write(args.out_left, functor_to_json(res.to_left) + "\n")
        print(f"wrote {args.out_left}")
    if args.out_right:
        _write(args.out_right, functor_to_json(res.to_right) + "\n")
        print(f"wrote {args.out_right}")
    if args.out_filler:
        _write(args.out_filler, cell_to_json(res.filler) + "\n")
        print(f"wrote {args.out_filler}")
    _dot(res.apex, args.dot, "hopullback")
    return OK


def _cmd_mediate(args) -> int:
    res = homotopy_pullback(_functor(args.left), _functor(args.right))
    h1, h2 = _functor(args.h1), _functor(args.h2)
    nu = _cell(args.nu)
    try:
        sol = mediate_into_hopullback(res, h1, h2, nu)
    except ValueError as e:
        print(f"cone does not mediate: {e}", file=sys.stderr)
        return FAIL
    except RuntimeError as e:
        print(f"no lift: {e}", file=sys.stderr)
        return FAIL
    print(f"mediator objects: {json.dumps(sol.mediator.obj, sort_keys=True)}")
    if args.out:
        _write(args.out, functor_to_json(sol.mediator) + "\n")
        print(f"wrote {args.out}")
    return OK


def _cmd_eqsplit(args) -> int:
    e = _functor(args.cone)
    g, h = _functor(args.g), _functor(args.h)
    alpha = _cell(args.alpha)
    family = tuple(_cell(p) for p in args.family or [])
    cone = EqualizerCone(e, family)
    rep = equalizer_split(cone, g, h, alpha)
    if rep.gamma is not None and rep.unique:
        print(f"split: {json.dumps(rep.gamma.component, sort_keys=True)}")
        if rep.betas:
            print(f"family cells transported: {len(rep.betas)}")
        if args.out:
            _write(args.out, cell_to_json(rep.gamma) + "\n")
            print(f"wrote {args.out}")
        return OK
    print(f"no split: {rep.reason}")
    return FAIL


# ---------------------------------------------------------------------------
# stage-bounded small object argument


def _cmd_soa(args) -> int:
    f = morphism_from_json(_read(args.morphism))
    cells = [morphism_from_json(_read(p)) for p in args.cells]
    res = soa_factorize(f, cells, stages=args.stages,
                        probe_size=args.probe_size, budget=args.budget)
    log = res.log
    for j, thy in enumerate(log.stages):
        sig = thy.signature
        attached = (f", {len(log.data[j - 1].squares)} square(s) attached"
                    if j >= 1 else "")
        print(f"stage {j}: {len(sig.sorts)} sorts, {len(sig.relations)} relations, "
              f"{len(thy.axioms)} axioms{attached}")
    print(f"stabilized: {'yes' if log.stabilized else 'no'}")
    print(f"composite strict: {'yes' if res.strict_composite else 'no'} "
          f"({res.composite_probes_checked} probe(s) checked)")
    print(f"right map fills squares: {res.inj.status} "
          f"({res.inj.squares_checked} checked)")
    if res.inj.caveat:
        print(f"caveat: {res.inj.caveat}")
    if args.verify_log:
        diags = verify_stage_log(log, cells)
        for d in diags:
            print(d, file=sys.stderr)
        if diags:
            return FAIL
    if args.log:
        _write(args.log, stage_log_to_json(log) + "\n")
        print(f"wrote {args.log}")
    if not res.strict_composite or res.inj.status == "failed":
        return FAIL
    if res.inj.status == "unknown":
        return UNKNOWN
    return OK


# ---------------------------------------------------------------------------
# parser wiring


def _build() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="wb",
        description="Coherent-logic workbench: theories, finite models, "
                    "syntactic categories, finite 2-categorical constructions.")
    p.add_argument("--version", action="version", version=f"wb {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def cmd(name, fn, help_):
        q = sub.add_parser(name, help=help_)
        q.set_defaults(fn=fn)
        return q

    q = cmd("check", _cmd_check, "validate a theory file")
    q.add_argument("theory")
    q.add_argument("--coherent", action="store_true",
                   help="additionally require every axiom to be coherent")

    q = cmd("morleyize", _cmd_morleyize,
            "compile a first-order theory to a coherent one")
    q.add_argument("theory")
    q.add_argument("--out")

    q = cmd("prove", _cmd_prove, "bounded proof search for a coherent sequent")
    q.add_argument("theory")
    q.add_argument("--sequent", required=True)
    q.add_argument("--bound", type=int, required=True)
    q.add_argument("--emit-cert", help="write the certificate JSON here")
    q.add_argument("--no-replay", action="store_true",
                   help="skip the independent certificate replay")

    q = cmd("models", _cmd_models, "enumerate finite models")
    q.add_argument("theory")
    q.add_argument("--max-size", type=int, required=True)
    q.add_argument("--exact-size", type=int,
                   help="restrict every sort carrier to exactly this size")
    q.add_argument("--count", action="store_true")
    q.add_argument("--out-dir", help="write one JSON file per model here")
    q.add_argument("--budget", type=int, default=2_000_000)

    q = cmd("homs", _cmd_homs, "enumerate homomorphisms between two structures")
    q.add_argument("theory")
    q.add_argument("source")
    q.add_argument("target")
    q.add_argument("--count", action="store_true")
    q.add_argument("--budget", type=int, default=1_000_000)

    q = cmd("interp", _cmd_interp, "interpret a formula in a finite structure")
    q.add_argument("theory")
    q.add_argument("model")
    q.add_argument("--context", default="")
    q.add_argument("--formula", required=True)

    syn = sub.add_parser("syncat", help="syntactic category of a coherent theory")
    ssub = syn.add_subparsers(dest="syncat_command", required=True,
                              metavar="operation")

    def scmd(name, fn, help_):
        q = ssub.add_parser(name, help=help_)
        q.set_defaults(fn=fn)
        q.add_argument("theory")
        q.add_argument("--bound", type=int, default=6,
                       help="proof-search bound for certification")
        return q

    q = scmd("object", _cmd_syncat_object, "normalize a formula-in-context")
    q.add_argument("--context", default="")
    q.add_argument("--formula", required=True)

    q = scmd("arrow", _cmd_syncat_arrow, "certify a formula as an arrow")
    for flag in ("--src-context", "--src-formula", "--tgt-context",
                 "--tgt-formula", "--context", "--theta"):
        q.add_argument(flag, required="context" not in flag,
                       default="" if "context" in flag else None)

    q = scmd("compose", _cmd_syncat_compose, "compose two certified arrows")
    for flag in ("--src-context", "--src-formula", "--mid-context", "--mid-formula",
                 "--tgt-context", "--tgt-formula", "--context1", "--theta1",
                 "--context2", "--theta2"):
        q.add_argument(flag, required="context" not in flag,
                       default="" if "context" in flag else None)

    q = scmd("eq", _cmd_syncat_eq, "provable equality of two parallel arrows")
    for flag in ("--src-context", "--src-formula", "--tgt-context", "--tgt-formula",
                 "--context1", "--theta1", "--context2", "--theta2"):
        q.add_argument(flag, required="context" not in flag,
                       default="" if "context" in flag else None)

    q = scmd("eval", _cmd_syncat_eval,
             "evaluate an object or certified arrow in a model")
    q.add_argument("model")
    q.add_argument("--context", default="")
    q.add_argument("--formula", required=True)
    q.add_argument("--tgt-context", default=None)
    q.add_argument("--tgt-formula", default=None)
    q.add_argument("--arrow-context", default=None)
    q.add_argument("--theta", default=None)

    q = cmd("internal", _cmd_internal,
            "internal coherent theory of a finite category")
    q.add_argument("category")
    q.add_argument("--out")

    q = cmd("verify-diagram", _cmd_verify_diagram,
            "check a marked diagram property semantically and internally")
    q.add_argument("fragment", help="category JSON with a set realization")
    q.add_argument("--tag", required=True, choices=canon.TAGS)
    q.add_argument("--arrows", default="", help="comma-separated arrow names")
    q.add_argument("--objects", default="", help="comma-separated object names")

    q = cmd("closure", _cmd_closure,
            "close a subcategory under finite limits, images and unions")
    q.add_argument("fragment", help="category JSON with a set realization")
    q.add_argument("--objects", default="", help="seed objects (default: all)")
    q.add_argument("--arrows", default="", help="seed arrows (default: all)")
    q.add_argument("--rounds", type=int, default=4)
    q.add_argument("--max-objects", type=int, default=240)
    q.add_argument("--require-fixed-point", action="store_true")
    q.add_argument("--verify", action="store_true",
                   help="re-check every instance against the result")
    q.add_argument("--out")
    q.add_argument("--dot")

    q = cmd("pullback", _cmd_pullback,
            "strict pullback of two functors (right leg an isofibration)")
    q.add_argument("left")
    q.add_argument("right")
    q.add_argument("--force", action="store_true",
                   help="compute even if neither leg is an isofibration")
    q.add_argument("--out")
    q.add_argument("--dot")

    def chain_args(q):
        q.add_argument("--stages", nargs="+", required=True,
                       help="stage category JSON files, in order")
        q.add_argument("--steps", nargs="*", default=[],
                       help="step functor JSON files between consecutive stages")

    q = cmd("colimit", _cmd_colimit, "colimit of a finite chain of categories")
    chain_args(q)
    q.add_argument("--out")
    q.add_argument("--dot")

    q = cmd("factor-stage", _cmd_factor_stage,
            "factor a functor into a chain colimit through a finite stage")
    chain_args(q)
    q.add_argument("--functor", required=True)
    q.add_argument("--respect-json",
                   help="JSON list of marked diagrams the stage must verify")
    q.add_argument("--out")

    q = cmd("factorize", _cmd_factorize,
            "surjection-injection factorization of a fragment arrow")
    q.add_argument("fragment", help="category JSON with a set realization")
    q.add_argument("arrow")
    q.add_argument("--image-name")
    q.add_argument("--out")

    q = cmd("hoproduct", _cmd_hoproduct, "finite product of categories, with "
            "projections (empty input gives the terminal category)")
    q.add_argument("categories", nargs="*")
    q.add_argument("--out")
    q.add_argument("--dot")

    q = cmd("hopullback", _cmd_hopullback,
            "homotopy pullback of two functors (no isofibration needed)")
    q.add_argument("left")
    q.add_argument("right")
    q.add_argument("--out", help="apex category JSON")
    q.add_argument("--out-left", help="projection functor JSON")
    q.add_argument("--out-right", help="projection functor JSON")
    q.add_argument("--out-filler", help="filler 2-cell JSON")
    q.add_argument("--dot")

    q = cmd("mediate", _cmd_mediate,
            "mediate an iso-square cone into a homotopy pullback")
    q.add_argument("left")
    q.add_argument("right")
    q.add_argument("h1", help="cone leg functor JSON (into the left source)")
    q.add_argument("h2", help="cone leg functor JSON (into the right source)")
    q.add_argument("nu", help="2-cell JSON: left∘h1 => right∘h2")
    q.add_argument("--out", help="mediator functor JSON")

    q = cmd("eqsplit", _cmd_eqsplit,
            "split a 2-categorical equalizer cone, if a unique split exists")
    q.add_argument("cone", help="cone functor JSON: e with g∘e iso h∘e")
    q.add_argument("g")
    q.add_argument("h")
    q.add_argument("alpha", help="2-cell JSON: g∘e => h∘e")
    q.add_argument("--family", nargs="*", help="further cone 2-cells to transport")
    q.add_argument("--out", help="split 2-cell JSON")

    q = cmd("soa", _cmd_soa,
            "stage-bounded cell/fill factorization of a theory morphism")
    q.add_argument("morphism", help="theory morphism JSON: the map to factor")
    q.add_argument("--cells", nargs="+", required=True,
                   help="generating cell morphism JSON files")
    q.add_argument("--stages", type=int, default=3)
    q.add_argument("--probe-size", type=int, default=2)
    q.add_argument("--budget", type=int, default=4096)
    q.add_argument("--verify-log", action="store_true",
                   help="independently re-check every stage of the log")
    q.add_argument("--log", help="write the stage log JSON here")

    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage; that's an input error in our contract
        return INPUT if e.code else OK
    try:
        return args.fn(args)
    except (EnumerationBudgetError, ClosureBudgetError, StageBudgetError) as e:
        print(f"budget exhausted: {e}", file=sys.stderr)
        return UNKNOWN
    except _InputError as e:
        print(str(e), file=sys.stderr)
        return INPUT
    except (ParseError, WellFormednessError, MorphismError,
            canon.MalformedDiagram) as e:
        print(str(e), file=sys.stderr)
        return INPUT
    except json.JSONDecodeError as e:
        print(f"bad JSON: {e}", file=sys.stderr)
        return INPUT
    except OSError as e:
        print(str(e), file=sys.stderr)
        return INPUT
    except (KeyError, ValueError) as e:
        print(f"bad input: {e!r}", file=sys.stderr)
        return INPUT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
