"""Command-line interface.

Subcommands:
    ground-state  solve one point from a config; dump the IMPS and the log CSV
    ggm           GGM of one point (solving first) or of a saved IMPS dump
    ed            finite-N exact diagonalization point
    sweep         full parameter sweep to CSV + plot script
    validate      reference-state / oracle checks; nonzero exit on failure

The exact-diagonalization cache directory is taken from the ENTANGLE_CACHE_DIR
environment variable when set.
"""
from __future__ import annotations

import argparse
import os
import sys

from .ggm import ggm_finite, ggm_infinite
from .imps import load_imps, save_imps
from .itebd import find_ground_state
from .rdm import SitePattern
from .sweep import CSV_HEADER, load_config, run_sweep, _fmt, _row
from .validate import validate_references
from . import ed as ed_mod


def _add_common(p, config_required=True):
    p.add_argument("--config", required=config_required, help="path to a sweep/point config file")
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--seed", type=int, default=None, help="override itebd.seed")
    p.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        from dataclasses import replace
        cfg = replace(cfg, itebd=replace(cfg.itebd, seed=args.seed))
    return cfg


def cmd_ground_state(args) -> int:
    cfg = _load(args)
    spec = cfg.template
    state, log = find_ground_state(spec, cfg.itebd, gap_tol=cfg.gap_tol)
    os.makedirs(args.out, exist_ok=True)
    imps_path = os.path.join(args.out, "state.imps")
    save_imps(state, imps_path)
    log_path = os.path.join(args.out, "convergence.csv")
    with open(log_path, "w") as fh:
        fh.write(log.to_csv())
    print(f"status={log.status} energy_per_site={log.final_energy:.12g} "
          f"sweeps={log.sweeps} transfer_gap={log.transfer_gap:.3g} "
          f"sublattice_asym={log.sublattice_asym:.3g}")
    print(f"wrote {imps_path} and {log_path}")
    return 0 if log.status == "converged" else 1


def cmd_ggm(args) -> int:
    cfg = _load(args)
    if args.state:
        state = load_imps(args.state)
        energy = ""
        status = "ok"
    else:
        state, log = find_ground_state(cfg.template, cfg.itebd, gap_tol=cfg.gap_tol)
        energy = log.final_energy
        status = log.status
    result = ggm_infinite(state, m_cap=cfg.m_cap,
                          patterns=[SitePattern(p) for p in cfg.patterns],
                          include_half_cut=cfg.include_half_cut,
                          gap_tol=cfg.gap_tol, on_degenerate=cfg.on_degenerate)
    print(CSV_HEADER)
    if result.ok:
        row = _row("", "imps", "inf", result.value, result.argmax.label(),
                   result.argmax.lambda_max_sq, energy,
                   status if status != "converged" else "ok", cfg.itebd.D, "")
    else:
        row = _row("", "imps", "inf", energy=energy, status="unavailable",
                   d_bond=cfg.itebd.D)
    print(",".join(_fmt(row[k]) for k in CSV_HEADER.split(",")))
    return 0 if result.ok else 1


def cmd_ed(args) -> int:
    cfg = _load(args)
    sizes = [args.n_sites] if args.n_sites else list(cfg.ed_sizes)
    if not sizes:
        print("error: no ring sizes (pass -N or set ed_sizes)", file=sys.stderr)
        return 2
    print(CSV_HEADER)
    worst = 0
    for n in sizes:
        gs = ed_mod.ground_state(cfg.template, n)
        if gs.degenerate:
            row = _row("", "ed", n, energy=gs.energy / n, status="unavailable")
            worst = 1
        else:
            res = ggm_finite(gs.psi, n, cfg.template.d)
            row = _row("", "ed", n, res.value, res.argmax.label(),
                       res.argmax.lambda_max_sq, gs.energy / n, "ok")
        print(",".join(_fmt(row[k]) for k in CSV_HEADER.split(",")))
    return worst


def cmd_sweep(args) -> int:
    cfg = _load(args)
    path = run_sweep(cfg, out_dir=args.out, workers=max(1, args.workers))
    print(f"wrote {path}")
    return 0


def cmd_validate(args) -> int:
    report = validate_references()
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entchain",
        description="Genuine multipartite entanglement of infinite spin chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ground-state", help="solve one point and dump the IMPS + log")
    _add_common(p)
    p.set_defaults(func=cmd_ground_state)

    p = sub.add_parser("ggm", help="GGM of one point or a saved IMPS state")
    _add_common(p)
    p.add_argument("--state", default=None, help="path to a saved IMPS dump")
    p.set_defaults(func=cmd_ggm)

    p = sub.add_parser("ed", help="finite-N exact-diagonalization point")
    _add_common(p)
    p.add_argument("-N", dest="n_sites", type=int, default=None, help="ring size")
    p.set_defaults(func=cmd_ed)

    p = sub.add_parser("sweep", help="run a parameter sweep to CSV")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the reference/oracle validation suite")
    _add_common(p, config_required=False)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
