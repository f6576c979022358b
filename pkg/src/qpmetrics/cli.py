"""Command-line surface.

Every subcommand prints one JSON object on standard output.  Exit
codes: 0 on success, 2 when a semantic check fails (invalid instance,
non-equivalent pair, violated bracket, dual-path disagreement), 1 on
usage, parse, or computation errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .channels import (
    Channel,
    ChannelSequence,
    channel_opnorm_gap,
    extract_convergent_subsequence,
    rho_tilde,
    validate_channel,
)
from .dilation import bures_distance, dilation_residual, is_spectral, naimark_dilate
from .errors import InvalidArgumentError, QpmError
from .io import InstanceFile, _emit, read_instance, write_instance
from .modmu import (
    InputMeasure,
    ModMuChannel,
    bw_gap_mod_mu,
    canonicalize_mod_mu,
    equiv_mod_mu,
)
from .qpm import QPM, delta_distance, rho_distance, validate_qpm
from .rng import random_channel, random_qpm, random_sequence

_DUAL_PATH_TOL = 1e-9
_BRACKET_SLACK = 1e-6


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit 1 (2 is reserved for
    semantic check failures)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _emit_doc(doc: dict) -> None:
    print(_emit(doc, 0))


def _load(path: str) -> InstanceFile:
    return read_instance(path)


def _expect_qpm(inst: InstanceFile, path: str) -> QPM:
    if inst.kind == "qpm":
        return inst.payload
    raise InvalidArgumentError(f"{path}: expected a measure instance, got {inst.kind!r}")


def _expect_channel(inst: InstanceFile, path: str) -> Channel:
    if inst.kind == "channel":
        return inst.payload
    if inst.kind == "channel+measure":
        return inst.payload.rep
    raise InvalidArgumentError(f"{path}: expected a channel instance, got {inst.kind!r}")


def _expect_measure(inst: InstanceFile, path: str) -> InputMeasure:
    if inst.kind == "measure":
        return inst.payload
    if inst.kind == "channel+measure":
        return inst.payload.mu
    raise InvalidArgumentError(
        f"{path}: expected an input-measure instance, got {inst.kind!r}"
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_gen(args) -> int:
    params = {"dim": args.dim, "atoms": args.atoms}
    if args.kind == "qpm":
        obj = random_qpm(args.dim, args.atoms, args.seed)
        generator = "random_qpm"
    elif args.kind == "channel":
        obj = random_channel(args.dim, args.atoms, args.inputs, args.seed)
        generator = "random_channel"
        params["inputs"] = args.inputs
    else:
        obj = random_sequence(
            args.dim, args.atoms, args.inputs, args.len, args.seed, drift=args.drift
        )
        generator = "random_sequence"
        params.update({"inputs": args.inputs, "len": args.len, "drift": args.drift})
    provenance = {"generator": generator, "seed": args.seed, "params": params}
    write_instance(args.output, obj, provenance)
    _emit_doc({"written": args.output, "kind": args.kind, "seed": args.seed})
    return 0


def _cmd_validate(args) -> int:
    inst = _load(args.file)
    if inst.kind == "qpm":
        rep = validate_qpm(inst.payload)
        doc = {
            "kind": inst.kind,
            "ok": rep.ok,
            "sum_residual": rep.sum_residual,
            "violations": list(rep.violations),
        }
        ok = rep.ok
    elif inst.kind in ("channel", "channel+measure"):
        chan = inst.payload.rep if inst.kind == "channel+measure" else inst.payload
        rep = validate_channel(chan)
        doc = {
            "kind": inst.kind,
            "ok": rep.ok,
            "failing_inputs": list(rep.failing_inputs),
        }
        ok = rep.ok
    elif inst.kind == "sequence":
        reports = [validate_channel(t) for t in inst.payload.terms]
        bad = [i for i, r in enumerate(reports) if not r.ok]
        doc = {"kind": inst.kind, "ok": not bad, "failing_terms": bad}
        ok = not bad
    else:  # measure: constructor already enforced the invariants
        doc = {"kind": inst.kind, "ok": True}
        ok = True
    _emit_doc(doc)
    return 0 if ok else 2


def _cmd_dist(args) -> int:
    E = _expect_qpm(_load(args.file1), args.file1)
    F = _expect_qpm(_load(args.file2), args.file2)
    fn = delta_distance if args.metric == "delta" else rho_distance
    res = fn(E, F, exact_cap=args.exact_cap)
    _emit_doc(
        {
            "metric": args.metric,
            "value": res.value,
            "certificate": list(res.certificate),
            "exact": res.exact,
            "upper": res.upper,
        }
    )
    return 0


def _cmd_bures(args) -> int:
    E = _expect_qpm(_load(args.file1), args.file1)
    F = _expect_qpm(_load(args.file2), args.file2)
    res = bures_distance(
        E, F, restarts=args.restarts, env_multiplicity=args.env_mult, seed=args.seed
    )
    rho = rho_distance(E, F)
    bracket_ok = (
        rho.value / 2.0 - 1e-7 <= res.upper <= np.sqrt(rho.value) + _BRACKET_SLACK
    )
    _emit_doc(
        {
            "lower": res.lower,
            "upper": res.upper,
            "converged": res.converged,
            "restarts_used": res.restarts_used,
            "rho": rho.value,
            "bracket_ok": bool(bracket_ok),
        }
    )
    return 0 if bracket_ok else 2


def _cmd_dilate(args) -> int:
    E = _expect_qpm(_load(args.file), args.file)
    triple = naimark_dilate(E, minimal=args.minimal)
    residual = dilation_residual(E, triple.spectral, triple.isometry)
    spectral_report = is_spectral(triple.spectral.underlying)
    if args.output:
        write_instance(args.output, triple.spectral)
    doc = {
        "env_dim": triple.env_dim,
        "minimal": bool(args.minimal),
        "residual": residual,
        "idempotency_residual": spectral_report.idempotency_residual,
        "orthogonality_residual": spectral_report.orthogonality_residual,
    }
    if args.output:
        doc["written"] = args.output
    _emit_doc(doc)
    return 0


def _cmd_channel_dist(args) -> int:
    E = _expect_channel(_load(args.file1), args.file1)
    F = _expect_channel(_load(args.file2), args.file2)
    res = rho_tilde(E, F)
    doc = {"rho_tilde": res.value, "argmax_point": res.argmax_point, "exact": res.exact}
    agree = True
    if res.exact:
        dual = channel_opnorm_gap(E, F)
        agree = abs(dual - res.value) <= _DUAL_PATH_TOL
        doc["dual_path_value"] = dual
        doc["dual_path_agree"] = bool(agree)
    _emit_doc(doc)
    return 0 if agree else 2


def _cmd_converge(args) -> int:
    inst = _load(args.file)
    if inst.kind != "sequence":
        raise InvalidArgumentError(
            f"{args.file}: expected a sequence instance, got {inst.kind!r}"
        )
    seq: ChannelSequence = inst.payload
    mu = None
    if args.mu:
        mu = _expect_measure(_load(args.mu), args.mu)
        canon = tuple(canonicalize_mod_mu(t, mu).rep for t in seq.terms)
        seq = ChannelSequence(canon)
    res = extract_convergent_subsequence(seq, args.tol)
    doc = {
        "indices": list(res.indices),
        "gap_trace": list(res.gap_trace),
        "limit_gaps": list(res.limit_gaps),
        "pairwise_max": res.pairwise_max,
    }
    if mu is not None:
        limit_dot = ModMuChannel(res.limit, mu)
        bw_trace = [
            bw_gap_mod_mu(ModMuChannel(seq.terms[i], mu), limit_dot)
            for i in res.indices
        ]
        doc["bw_gap_trace"] = bw_trace
    if args.output:
        write_instance(args.output, res.limit)
        doc["written"] = args.output
    _emit_doc(doc)
    return 0


def _cmd_equiv(args) -> int:
    E = _expect_channel(_load(args.file1), args.file1)
    F = _expect_channel(_load(args.file2), args.file2)
    mu = _expect_measure(_load(args.mu), args.mu)
    ok, witness = equiv_mod_mu(E, F, mu, tol=args.tol)
    doc = {"equivalent": bool(ok)}
    if witness is not None:
        doc["witness"] = {"atom": witness[0], "input": witness[1]}
    _emit_doc(doc)
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="qpmetrics", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a seeded random instance")
    gen.add_argument("--kind", required=True, choices=("qpm", "channel", "sequence"))
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--atoms", type=int, required=True)
    gen.add_argument("--inputs", type=int, default=1)
    gen.add_argument("--len", type=int, default=8)
    gen.add_argument("--drift", choices=("none", "shrink"), default="none")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("-o", "--output", required=True)
    gen.set_defaults(func=_cmd_gen)

    val = sub.add_parser("validate", help="validate an instance file")
    val.add_argument("file")
    val.set_defaults(func=_cmd_validate)

    dist = sub.add_parser("dist", help="distance between two measures")
    dist.add_argument("--metric", choices=("rho", "delta", "tv"), default="rho")
    dist.add_argument("--exact-cap", type=int, default=16, dest="exact_cap")
    dist.add_argument("file1")
    dist.add_argument("file2")
    dist.set_defaults(func=_cmd_dist)

    bures = sub.add_parser("bures", help="dilation-distance bracket")
    bures.add_argument("--restarts", type=int, default=64)
    bures.add_argument("--env-mult", type=int, default=1, dest="env_mult")
    bures.add_argument("--seed", type=int, default=0)
    bures.add_argument("file1")
    bures.add_argument("file2")
    bures.set_defaults(func=_cmd_bures)

    dil = sub.add_parser("dilate", help="projection-valued dilation")
    dil.add_argument("--minimal", action="store_true")
    dil.add_argument("-o", "--output", default=None)
    dil.add_argument("file")
    dil.set_defaults(func=_cmd_dilate)

    cdist = sub.add_parser("channel-dist", help="sup-over-inputs distance")
    cdist.add_argument("file1")
    cdist.add_argument("file2")
    cdist.set_defaults(func=_cmd_channel_dist)

    conv = sub.add_parser("converge", help="extract a convergent subsequence")
    conv.add_argument("--tol", type=float, required=True)
    conv.add_argument("--mu", default=None)
    conv.add_argument("-o", "--output", default=None)
    conv.add_argument("file")
    conv.set_defaults(func=_cmd_converge)

    eq = sub.add_parser("equiv", help="almost-everywhere equivalence")
    eq.add_argument("--mu", required=True)
    eq.add_argument("--tol", type=float, default=1e-9)
    eq.add_argument("file1")
    eq.add_argument("file2")
    eq.set_defaults(func=_cmd_equiv)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    except QpmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
