"""Batch command-line front end: `bimodal VERB [options]`.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 budget exhausted.
"""

from __future__ import annotations

import argparse
import random
import re
import sys
from pathlib import Path

from . import __version__
from .fmp import FmpError, shrink
from .foltl import FoltlError, foltl_depth, foltl_text, parse_foltl, star
from .formula import ParseError, modal_depth, parse, size, subformulas, to_text, variables
from .frames import FrameError
from .machines import (Configuration, MachineError, Op, Run, bounded_oracle, bounded_runs, lossy_successors,
                       parse_machine, successors, validate_run)
from .reductions import TARGETS, EncodingError, compile_machine, dump_encoding, load_encoding
from .semantics import (CLASSES, ModelFormatError, SearchSpec, bounded_sat, check, dump_model,
                        load_model, truth_set, valid_in_frame)
from .witnesses import (DecodeError, WitnessError, build, canonical_run, decode_run, spec_for,
                        verify, verify_backward_claims)

OK, FAIL, USAGE, BUDGET = 0, 1, 2, 3

KIND_OF = {
    "fw_recurrence": "fw_rec", "fw_finite_reach": "fw_fin",
    "bw_nontermination": "bw_inf", "bw_recurrence": "bw_rec",
    "dense_nontermination": "dense", "lossy_omega_reach": "lossy_exp",
    "lossy_finite_reach": "lossy_fin",
}
PROBLEMS = ("nontermination", "reachability", "recurrence", "lossy-reachability",
            "lossy-omega-reachability")


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _formula(args):
    if args.formula is not None:
        return parse(args.formula)
    if getattr(args, "formula_file", None):
        return parse(_read(args.formula_file))
    raise UsageError("give --formula or --formula-file")


def _machine(path: str):
    return parse_machine(_read(path), Path(path).stem)


def _model(path: str):
    return load_model(_read(path))


def _world(model, token: str | None):
    if token is None:
        if model.root is None:
            raise UsageError("model has no root; pass --world")
        return model.root
    for w in model.frame.worlds:
        text = f"{w[0]}_{w[1]}" if isinstance(w, tuple) else str(w)
        if text == token:
            return w
    raise UsageError(f"unknown world {token!r}")


def _name(w) -> str:
    return f"{w[0]}_{w[1]}" if isinstance(w, tuple) else str(w)


# ---------------------------------------------------------------- verbs

def cmd_parse(args):
    if args.foltl:
        phi = parse_foltl(args.formula if args.formula is not None else _read(args.formula_file))
        print(foltl_text(phi))
        print(f"star: {to_text(star(phi))}")
        print(f"depth: {foltl_depth(phi)}")
        return OK
    phi = _formula(args)
    print(to_text(phi, sugar=not args.desugar))
    print(f"variables: {' '.join(variables(phi)) or '-'}")
    print(f"modal depth: {modal_depth(phi)}")
    print(f"size: {size(phi)}  subformulas: {len(subformulas(phi))}")
    return OK


def cmd_check(args):
    model, _ = _model(args.model)
    phi = _formula(args)
    if args.all:
        ts = truth_set(model, phi)
        print("true at: " + " ".join(_name(w) for w in model.frame.worlds if w in ts))
        return OK
    w = _world(model, args.world)
    res = check(model, w, phi)
    print(f"{_name(w)}: {'true' if res else 'false'}")
    return OK if res else FAIL


def cmd_valid(args):
    model, _ = _model(args.frame)
    phi = _formula(args)
    res = valid_in_frame(model.frame, phi)
    print("valid" if res else "not valid")
    return OK if res else FAIL


def cmd_search(args):
    spec = SearchSpec(_formula(args), args.frame_class, hmax=args.hmax, vmax=args.vmax,
                      max_worlds=args.max_worlds, max_candidates=args.max_candidates,
                      max_seconds=args.max_seconds, max_conflicts=args.max_conflicts,
                      jobs=args.jobs)
    res = bounded_sat(spec)
    print(res.report(timestamps=not args.no_timestamps))
    if res.found and args.out:
        model = res.model
        model.root = res.world
        _write(args.out, dump_model(model))
    return BUDGET if res.status == "budget" else OK


def cmd_compile(args):
    m = _machine(args.machine)
    enc = compile_machine(m, args.target, q0=args.q0, q_r=args.qr)
    _write(args.out, dump_encoding(enc))
    if args.out:
        print(f"{args.target}: {len(enc.conjuncts)} conjuncts, "
              f"{len(variables(enc.formula))} variables -> {args.out}")
    return OK


def cmd_simulate(args):
    m = _machine(args.machine)
    rng = random.Random(args.seed)
    cfg = m.initial()
    print(cfg)
    for _ in range(args.steps):
        if args.lossy:
            nxt = lossy_successors(m, cfg, cap=args.cap)
        else:
            nxt = successors(m, cfg)
        if not nxt:
            print("halted" if cfg.state in m.halt else "stuck")
            return OK
        op, cfg = nxt[rng.randrange(len(nxt))]
        print(f"-{op}-> {cfg}")
    return OK


def cmd_oracle(args):
    m = _machine(args.machine)
    if args.target is not None:
        m.check_state(args.target)
    v = bounded_oracle(m, args.problem, args.depth, target=args.target, k=args.k, cap=args.cap)
    print(v)
    if v.witness is not None:
        print(f"witness: {v.witness}")
    return OK


def _runs_for(enc, kind, args):
    q_r = enc.params.get("q_r")
    if kind == "lossy_exp":
        return [canonical_run(enc.machine, kind, args.length, q_r=q_r, visits=n)
                for n in range(1, args.segments + 1)]
    length = args.length
    if kind in ("bw_inf", "bw_rec", "dense") and length is None:
        length = args.K + 1
    if kind == "bw_rec":
        m = enc.machine
        for run in bounded_runs(m, m.initial(), length):
            if len(run) == length and any(c.state == q_r for c in run.configs[:args.K]):
                return [run]
        raise WitnessError(f"no run of length {length} visits {q_r} within the bound")
    return [canonical_run(enc.machine, kind, length, q_r=q_r)]


def _encoding_for(args):
    m = _machine(args.machine)
    if args.encoding:
        enc = load_encoding(_read(args.encoding), m)
    else:
        if not args.target:
            raise UsageError("give --encoding or --target")
        enc = compile_machine(m, args.target, q_r=args.qr)
    return enc


def _spec(enc, meta, args):
    kind = args.kind or meta.get("kind") or KIND_OF[enc.target]
    K = args.K if args.K is not None else int(meta.get("K", 4))
    return kind, K


def cmd_build_witness(args):
    enc = _encoding_for(args)
    kind = args.kind or KIND_OF[enc.target]
    runs = _runs_for(enc, kind, args)
    spec = spec_for(enc, kind, runs, K=args.K, width=args.width)
    model = build(spec)
    meta = {"kind": kind, "K": args.K, "width": args.width, "target": enc.target}
    for n, r in enumerate(runs):
        meta[f"run{n}"] = str(r)
    _write(args.out, dump_model(model, meta))
    if args.out:
        print(f"{kind} witness: {len(model.frame.worlds)} worlds -> {args.out}")
    return OK


def _runs_from_meta(meta):
    runs = []
    n = 0
    while f"run{n}" in meta:
        runs.append(_parse_run(meta[f"run{n}"]))
        n += 1
    return runs


def _parse_run(text: str):
    """Inverse of Run.__str__: `<q,(0,0)> -inc0-> <q1,(1,0)> ...`."""
    cfgs = [Configuration(q, tuple(int(c) for c in cs.split(",") if c != ""))
            for q, cs in re.findall(r"<([^,>]+),\(([^)]*)\)>", text)]
    ops = [Op(k, int(i)) for k, i in re.findall(r"-(inc|dec|zero)(\d+)->", text)]
    return Run(tuple(cfgs), tuple(ops))


def cmd_verify_witness(args):
    enc = _encoding_for(args)
    model, meta = _model(args.model)
    kind, K = _spec(enc, meta, args)
    runs = _runs_from_meta(meta) or _runs_for(enc, kind, args)
    spec = spec_for(enc, kind, runs, K=K, width=int(meta.get("width", args.width)))
    rep = verify(spec, enc, model, jobs=args.jobs)
    sys.stdout.write(rep.text())
    ok = rep.ok
    if kind == "bw_inf" and args.claims:
        claims = verify_backward_claims(model, enc, K)
        sys.stdout.write(claims.text())
        ok = ok and claims.ok
    print("verdict: " + ("OK" if ok else "FAILED"))
    return OK if ok else FAIL


def cmd_decode(args):
    enc = _encoding_for(args)
    model, meta = _model(args.model)
    kind, K = _spec(enc, meta, args)
    out = decode_run(model, enc, kind, args.length)
    for dr in (out if isinstance(out, list) else [out]):
        print(dr.run)
    return OK


def cmd_shrink(args):
    model, _ = _model(args.model)
    phi = _formula(args)
    root = _world(model, args.world)
    small, trace = shrink(model, phi, root)
    print(f"vertical carrier: {len(model.frame.worlds)} -> {len(small.frame.worlds)} worlds; "
          f"truth preserved on {len(subformulas(phi))} subformulas")
    if args.trace:
        _write(args.trace, trace.dump())
    if args.out:
        _write(args.out, dump_model(small))
    return OK


def cmd_roundtrip(args):
    m = _machine(args.machine)
    enc = compile_machine(m, args.target, q_r=args.qr)
    kind = KIND_OF[args.target]
    runs = _runs_for(enc, kind, args)
    spec = spec_for(enc, kind, runs, K=args.K, width=args.width)
    model = build(spec)
    rep = verify(spec, enc, model, jobs=args.jobs)
    if args.verbose:
        sys.stdout.write(rep.text())
    if not rep.ok:
        bad = [r.label for r in rep.results if not r.holds and (kind in ("fw_fin", "lossy_fin")
                                                                 or not r.on_boundary)]
        print(f"verification failed: {', '.join(bad)}")
        return FAIL
    if kind == "dense":
        print(f"dense witness verified ({len(rep.failing())} boundary failures); no decoder")
        return OK
    decoded = decode_run(model, enc, kind, len(runs[0]) if kind in ("fw_rec", "bw_inf", "bw_rec") else None)
    got = decoded if isinstance(decoded, list) else [decoded]
    if len(got) != len(runs):
        print(f"decoded {len(got)} segments, built {len(runs)}")
        return FAIL
    exact = kind in ("fw_fin", "lossy_fin", "lossy_exp")
    for want, dr in zip(runs, got):
        n = len(dr.run)
        if kind == "fw_fin":
            # the witness ends at the first q_r visit
            n_want = next(i for i, c in enumerate(want.configs) if c.state == args.qr) + 1
        else:
            n_want = len(want) if exact else n
        if n != n_want or dr.run.configs != want.configs[:n] or dr.run.ops != want.ops[:n - 1]:
            print(f"decoded run differs:\n  built   {want}\n  decoded {dr.run}")
            return FAIL
        try:
            validate_run(enc.machine, dr.run)
        except MachineError as e:
            print(f"decoded run invalid: {e}")
            return FAIL
    for dr in got:
        what = "run" if exact else "prefix"
        print(f"{what} of length {len(dr.run)} recovered")
    return OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bimodal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized choices (default 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for search/verify")
    common.add_argument("--no-timestamps", action="store_true",
                        help="omit elapsed times so reports are byte-identical")
    sub = p.add_subparsers(dest="verb", required=True, metavar="VERB")

    def verb(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_, description=help_)
        sp.set_defaults(fn=fn)
        return sp

    def formula_opts(sp, required=True):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--formula", "-f")
        g.add_argument("--formula-file")

    def machine_opts(sp, encoding=False):
        sp.add_argument("--machine", "-m", required=True, help="machine file (.cm)")
        if encoding:
            sp.add_argument("--encoding", help="compiled encoding file")
            sp.add_argument("--target", choices=TARGETS)
            sp.add_argument("--qr", help="target state q_r")

    def witness_opts(sp):
        sp.add_argument("--kind", choices=sorted(set(KIND_OF.values())))
        sp.add_argument("--K", type=int, default=4, help="truncation for the omega kinds")
        sp.add_argument("--width", type=int, default=2, help="interval width for dense")
        sp.add_argument("--length", type=int, help="run length in configurations")
        sp.add_argument("--segments", type=int, default=3, help="lossy_exp segment count")

    sp = verb("parse", cmd_parse, "parse a formula and print it back")
    formula_opts(sp)
    sp.add_argument("--desugar", action="store_true")
    sp.add_argument("--foltl", action="store_true", help="read a FOLTL formula")

    sp = verb("check", cmd_check, "evaluate a formula in a model file")
    sp.add_argument("--model", required=True)
    formula_opts(sp)
    sp.add_argument("--world", help="world id (default: the model's root)")
    sp.add_argument("--all", action="store_true", help="print the truth set")

    sp = verb("valid", cmd_valid, "frame validity under all valuations")
    sp.add_argument("--frame", required=True, help="model file; its valuation is ignored")
    formula_opts(sp)

    sp = verb("search", cmd_search, "bounded satisfiability search")
    formula_opts(sp)
    sp.add_argument("--class", dest="frame_class", default="product", choices=CLASSES)
    sp.add_argument("--hmax", type=int, default=2)
    sp.add_argument("--vmax", type=int, default=2)
    sp.add_argument("--max-worlds", type=int, default=2)
    sp.add_argument("--max-candidates", type=int)
    sp.add_argument("--max-seconds", type=float)
    sp.add_argument("--max-conflicts", type=int)
    sp.add_argument("--out", help="write the model found")

    sp = verb("compile", cmd_compile, "compile a machine into a formula")
    machine_opts(sp)
    sp.add_argument("--target", required=True, choices=TARGETS)
    sp.add_argument("--q0")
    sp.add_argument("--qr")
    sp.add_argument("--out")

    sp = verb("simulate", cmd_simulate, "print one (seeded) run")
    machine_opts(sp)
    sp.add_argument("--steps", type=int, default=10)
    sp.add_argument("--lossy", action="store_true")
    sp.add_argument("--cap", type=int, default=8, help="counter cap for lossy successors")

    sp = verb("oracle", cmd_oracle, "bounded decision oracle")
    machine_opts(sp)
    sp.add_argument("--problem", required=True, choices=PROBLEMS)
    sp.add_argument("--depth", type=int, required=True, help="bound in steps")
    sp.add_argument("--target")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--cap", type=int)

    sp = verb("build-witness", cmd_build_witness, "build a witness model for a run")
    machine_opts(sp, encoding=True)
    witness_opts(sp)
    sp.add_argument("--out")

    sp = verb("verify-witness", cmd_verify_witness, "per-conjunct report on a witness")
    machine_opts(sp, encoding=True)
    witness_opts(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--claims", action="store_true", help="also check the backward claims (bw_inf)")

    sp = verb("decode", cmd_decode, "extract the run a model encodes")
    machine_opts(sp, encoding=True)
    witness_opts(sp)
    sp.add_argument("--model", required=True)

    sp = verb("shrink", cmd_shrink, "finite-model closure of a grid model")
    sp.add_argument("--model", required=True)
    formula_opts(sp)
    sp.add_argument("--world", help="root world (default: the model's root)")
    sp.add_argument("--out")
    sp.add_argument("--trace", help="write the closure trace")

    sp = verb("roundtrip", cmd_roundtrip, "compile, build, verify, decode and compare")
    machine_opts(sp)
    sp.add_argument("--target", required=True, choices=TARGETS)
    sp.add_argument("--qr")
    witness_opts(sp)
    sp.add_argument("--verbose", "-v", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return args.fn(args)
    except (UsageError, ParseError, MachineError, EncodingError, ModelFormatError,
            FrameError, FoltlError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except (WitnessError, DecodeError, FmpError) as e:
        print(f"error: {e}", file=sys.stderr)
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
