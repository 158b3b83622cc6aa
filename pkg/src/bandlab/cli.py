"""Command-line driver: scenario runners emitting JSON, CSV and figures.

Exit codes form a stable contract: 0 when every verdict passes, 2 when a
verdict fails (or a run halts early), 3 for configuration and precondition
errors. Given the same flags and seed the JSON and CSV outputs are
byte-identical across runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import figures
from .commutant import disjointness_preservation_test
from .compactcheck import disjoint_decay, dyadic_indicator_family
from .errors import BandlabError, SingleBandOnly
from .levelsets import detect_flats, enumerate_hyperinvariant_bands, leaves_invariant, level_set
from .lpspace import constant
from .measure import product_grid, uniform_interval
from .multipliers import make_multiplier
from .operators import (
    commutator_norm,
    gaussian_kernel,
    identity_operator,
    kernel_operator,
    multiplication,
    rank_one_flat,
    row_averaging,
)
from .witness import WitnessConfig, run_witness, verify_trace

EXIT_OK = 0
EXIT_VERDICT = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def _parse_grid(text):
    if "x" in text:
        nx, ny = text.lower().split("x", 1)
        return int(nx), int(ny)
    n = int(text)
    return n, n


def _parse_p(text):
    return math.inf if text in ("inf", "oo") else float(text)


def _build_space(args):
    if getattr(args, "grid", None):
        nx, ny = _parse_grid(args.grid)
        return product_grid(nx, ny)
    return uniform_interval(args.space)


def _build_operator(spec, space, phi, p):
    if spec == "identity":
        return identity_operator(space, p)
    if spec == "averaging":
        return row_averaging(space, p)
    if spec.startswith("mult:"):
        return multiplication(make_multiplier(space, spec[5:]), p)
    raise BandlabError(f"unknown operator spec {spec!r} "
                       "(use identity, averaging or mult:<multiplier>)")


def _emit(outdir, report):
    outdir.mkdir(parents=True, exist_ok=True)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    (outdir / "report.json").write_text(text)
    sys.stdout.write(text)


def _cmd_analyze(args):
    space = _build_space(args)
    phi = make_multiplier(space, args.multiplier)
    p = _parse_p(args.p)
    flats = detect_flats(phi, args.theta, args.tau)

    bands = []
    single_band = False
    try:
        bands = enumerate_hyperinvariant_bands(phi, args.bands)
    except SingleBandOnly:
        single_band = True

    flat_route = None
    ok = True
    if flats.has_flat:
        widest = max(flats.flats, key=lambda f: f.measure)
        projector = rank_one_flat(phi, widest.set, p, tol=flats.tau)
        comm = commutator_norm(multiplication(phi, p), projector)
        flat_route = {
            "flat_value": widest.value,
            "flat_measure": widest.measure,
            "commutator_norm": comm,
            "positive": projector.is_positive,
            "commutes": comm <= 1e-12,
        }
        ok = flat_route["commutes"] and flat_route["positive"]

    report = {
        "schema": 1,
        "command": "analyze",
        "config": {"space": space.descriptor(), "multiplier": args.multiplier,
                   "p": args.p, "theta": args.theta, "tau": args.tau,
                   "bands": args.bands},
        "flats": flats.to_json_dict(),
        "single_band_only": single_band,
        "bands": [b.to_json_dict() for b in bands],
        "flat_route": flat_route,
        "all_pass": ok,
    }
    outdir = Path(args.out)
    _emit(outdir, report)
    with open(outdir / "bands.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "alpha", "beta", "measure", "atoms"])
        for b in bands:
            writer.writerow([b.kind, repr(b.alpha), repr(b.beta),
                             repr(b.measure), b.set.size])
    figures.save_multiplier_figure(phi, outdir / "multiplier.png",
                                   flats=flats, bands=bands)
    return EXIT_OK if ok else EXIT_VERDICT


def _cmd_witness(args):
    space = _build_space(args)
    phi = make_multiplier(space, args.multiplier)
    p = _parse_p(args.p)
    A = _build_operator(args.operator, space, phi, p)
    x = constant(space, 1.0, p)
    config = WitnessConfig(steps=args.steps, split_dev_cap=args.split_cap)
    trace = run_witness(A, phi, x, config)
    verdicts = verify_trace(trace)

    report = {
        "schema": 1,
        "command": "witness",
        "config": {"space": space.descriptor(), "multiplier": args.multiplier,
                   "operator": args.operator, "p": args.p, "steps": args.steps,
                   "split_cap": args.split_cap},
        "trace": trace.to_json_dict(),
        "verdicts": verdicts.to_json_dict(),
        "all_pass": verdicts.all_pass and trace.halted is None,
    }
    outdir = Path(args.out)
    _emit(outdir, report)
    trace.write_csv(outdir / "trace.csv", verdicts)
    figures.save_witness_figure(trace, outdir / "witness.png")
    return EXIT_OK if report["all_pass"] else EXIT_VERDICT


def _cmd_commutant_check(args):
    if args.scenario != "counterexample":
        raise BandlabError(f"unknown scenario {args.scenario!r}")
    nx, ny = _parse_grid(args.grid)
    space = product_grid(nx, ny)
    phi = make_multiplier(space, "coord-y")
    p = _parse_p(args.p)
    R = row_averaging(space, p)

    comm = commutator_norm(R, multiplication(phi, p))
    commutes = comm <= 1e-12

    search = disjointness_preservation_test(R, trials=args.trials, seed=args.seed)
    breaks_disjointness = not search.preserving

    alphas = [(i + 0.5) / args.levels for i in range(args.levels)]
    violations = []
    level_ok = True
    for alpha in alphas:
        check = leaves_invariant(R, level_set(phi, "le", alpha).set, tol=1e-12)
        violations.append(check.violation)
        level_ok = level_ok and check.invariant

    vertical = space.set_from_mask(space.centers[:, 0] < 0.5)
    band_check = leaves_invariant(R, vertical, tol=1e-12)
    band_fails = (not band_check.invariant) and band_check.violation >= 0.1

    ok = commutes and breaks_disjointness and level_ok and band_fails
    report = {
        "schema": 1,
        "command": "commutant-check",
        "config": {"scenario": args.scenario, "grid": args.grid, "p": args.p,
                   "levels": args.levels, "trials": args.trials, "seed": args.seed},
        "commutes": {"commutator_norm": comm, "pass": commutes},
        "disjointness": {
            "preserving": search.preserving,
            "pairs_tested": search.pairs_tested,
            "max_overlap": (float(np.max(search.overlap.values))
                            if search.overlap is not None else 0.0),
            "pass": breaks_disjointness,
        },
        "level_invariance": {"levels": alphas, "violations": violations,
                             "pass": level_ok},
        "band_violation": {"violation": band_check.violation, "pass": band_fails},
        "all_pass": ok,
    }
    outdir = Path(args.out)
    _emit(outdir, report)
    figures.save_invariance_figure(alphas, violations, band_check.violation,
                                   outdir / "invariance.png")
    return EXIT_OK if ok else EXIT_VERDICT


def _cmd_compact_decay(args):
    space = uniform_interval(args.n)
    p = _parse_p(args.p)
    if args.kernel != "gaussian":
        raise BandlabError(f"unknown kernel {args.kernel!r}")
    K = kernel_operator(space, gaussian_kernel(args.kernel_width), p)
    family = dyadic_indicator_family(space, args.terms, p)
    report_obj = disjoint_decay(K, K, family, decay_factor=args.decay_factor)

    report = {
        "schema": 1,
        "command": "compact-decay",
        "config": {"kernel": args.kernel, "kernel_width": args.kernel_width,
                   "n": args.n, "terms": args.terms, "p": args.p,
                   "decay_factor": args.decay_factor},
        "decay": report_obj.to_json_dict(),
        "all_pass": report_obj.verdict,
    }
    outdir = Path(args.out)
    _emit(outdir, report)
    with open(outdir / "decay.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "image_norm"])
        for i, v in enumerate(report_obj.norms, start=1):
            writer.writerow([i, repr(v)])
    figures.save_decay_figure(report_obj, outdir / "decay.png")
    return EXIT_OK if report_obj.verdict else EXIT_VERDICT


def build_parser():
    parser = _Parser(prog="bandlab",
                     description="multiplication-operator laboratory on "
                                 "discretized function spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--p", default="2", help="exponent of the ambient space "
                                                 "(a float or 'inf')")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized probes")
        sp.add_argument("--out", default="bandlab-out", help="output directory")

    sp = sub.add_parser("analyze", help="flat detection, bands and the rank-one route")
    sp.add_argument("--space", type=int, default=1024, help="interval atom count")
    sp.add_argument("--grid", default=None, help="grid size, e.g. 32 or 16x8")
    sp.add_argument("--multiplier", default="identity")
    sp.add_argument("--theta", type=float, default=0.01, help="minimum flat measure")
    sp.add_argument("--tau", type=float, default=0.0, help="value-equality slack")
    sp.add_argument("--bands", type=int, default=4, help="hyperinvariant bands to list")
    common(sp)
    sp.set_defaults(func=_cmd_analyze)

    sp = sub.add_parser("witness", help="run and verify the disjoint-unit recursion")
    sp.add_argument("--space", type=int, default=4096)
    sp.add_argument("--grid", default=None)
    sp.add_argument("--multiplier", default="identity")
    sp.add_argument("--operator", default="identity",
                    help="identity, averaging or mult:<multiplier>")
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--split-cap", type=float, default=0.01,
                    help="max deviation of the achieved split ratio")
    common(sp)
    sp.set_defaults(func=_cmd_witness)

    sp = sub.add_parser("commutant-check",
                        help="the averaging-operator scenario end to end")
    sp.add_argument("--scenario", default="counterexample")
    sp.add_argument("--grid", default="32")
    sp.add_argument("--levels", type=int, default=20, help="sampled band levels")
    sp.add_argument("--trials", type=int, default=64, help="disjointness search pairs")
    common(sp)
    sp.set_defaults(func=_cmd_commutant_check)

    sp = sub.add_parser("compact-decay",
                        help="image-norm decay of a disjoint family under a kernel")
    sp.add_argument("--kernel", default="gaussian")
    sp.add_argument("--kernel-width", type=float, default=0.02)
    sp.add_argument("--n", type=int, default=4096, help="interval atom count")
    sp.add_argument("--terms", type=int, default=64)
    sp.add_argument("--decay-factor", type=float, default=0.25)
    common(sp)
    sp.set_defaults(func=_cmd_compact_decay)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BandlabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
