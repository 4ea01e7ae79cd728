"""Batch front-end: parameter sweeps, reference validation, CSV + plot output.

Sweep rows follow one fixed schema for all figures:
    axis_value,method,n_sites,ggm,argmax_source,lambda_max_sq,energy_per_site,
    status,d_bond,tau_final
Rows are computed by a bounded worker pool but written sorted by (axis_value,
method, n_sites), so parallelism never changes the output bytes. Grid points
inside configured excluded ranges (non-unique ground state regions) are
emitted as status=unavailable without running.

Config files are flat key = value text; see CONFIG_KEYS for the schema.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EntchainError
from .ggm import ggm_finite, ggm_infinite
from .itebd import ItebdConfig, find_ground_state
from .operators import MODELS, ModelSpec
from .rdm import SitePattern
from . import ed as ed_mod

CSV_HEADER = ("axis_value,method,n_sites,ggm,argmax_source,lambda_max_sq,"
              "energy_per_site,status,d_bond,tau_final")

AXIS_FIELDS = {"h": "h", "delta": "delta", "k": "k"}

CONFIG_KEYS = """\
model                 one of: transverse_ising, xyz, xxz, spin1_ising
jx jy delta h gamma j jz k   template couplings (floats; swept axis overridden)
axis                  swept coupling: h, delta, or k
grid.start grid.stop grid.step   sweep grid (step > 0)
methods               comma list from {imps, ed}
ed_sizes              comma list of ring sizes for the ed method
itebd.D itebd.tau_schedule itebd.energy_tol itebd.max_iters_per_tau
itebd.seed itebd.noise           solver settings (tau_schedule comma list)
ggm.m_cap             consecutive blocks 1..m_cap as candidates (default 4)
ggm.patterns          semicolon list of dash-joined offsets, e.g. 0-2;0-1-3
ggm.include_half_cut  true/false (default false)
ggm.on_degenerate     raise | mixture (default raise)
ggm.gap_tol           transfer degeneracy tolerance (default 1e-6)
exclude               semicolon list of lo:hi axis ranges marked unavailable
output                CSV filename (default ggm_sweep.csv)
"""


@dataclass(frozen=True)
class SweepConfig:
    template: ModelSpec
    axis: str
    start: float
    stop: float
    step: float
    methods: tuple = ("imps",)
    ed_sizes: tuple = ()
    itebd: ItebdConfig = field(default_factory=ItebdConfig)
    m_cap: int = 4
    patterns: tuple = ()
    include_half_cut: bool = False
    on_degenerate: str = "raise"
    gap_tol: float = 1e-6
    excluded: tuple = ()
    output: str = "ggm_sweep.csv"

    def __post_init__(self):
        if self.axis not in AXIS_FIELDS:
            raise ValueError(f"axis must be one of {sorted(AXIS_FIELDS)}, got {self.axis!r}")
        if self.step <= 0:
            raise ValueError("grid step must be > 0")
        if self.stop < self.start:
            raise ValueError("grid stop must be >= start")
        bad = [m for m in self.methods if m not in ("imps", "ed")]
        if bad:
            raise ValueError(f"unknown methods {bad}")
        if "ed" in self.methods and not self.ed_sizes:
            raise ValueError("ed method requires ed_sizes")

    def grid(self):
        n = int(np.floor((self.stop - self.start) / self.step + 0.5)) + 1
        return [round(self.start + i * self.step, 10) for i in range(n)]

    def point_spec(self, value: float) -> ModelSpec:
        kwargs = {"model": self.template.model}
        for name in ("jx", "jy", "delta", "h", "gamma", "j", "jz", "k"):
            kwargs[name] = getattr(self.template, name)
        kwargs[AXIS_FIELDS[self.axis]] = value
        return ModelSpec(**kwargs)  # xyz/xxz re-derive jx, jy from j, gamma

    def is_excluded(self, value: float) -> bool:
        return any(lo - 1e-12 <= value <= hi + 1e-12 for lo, hi in self.excluded)


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str) -> SweepConfig:
    """Parse the flat key = value sweep config format."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"line {lineno}: expected key = value, got {line!r}")
        key, val = body.split("=", 1)
        raw[key.strip()] = val.strip()
    if "model" not in raw:
        raise ValueError("config must set model")
    if raw["model"] not in MODELS:
        raise ValueError(f"unknown model {raw['model']!r}")
    couplings = {}
    for name in ("jx", "jy", "delta", "h", "gamma", "j", "jz", "k"):
        if name in raw:
            couplings[name] = float(raw[name])
    template = ModelSpec(model=raw["model"], **couplings)
    itebd_kwargs = {}
    if "itebd.D" in raw:
        itebd_kwargs["D"] = int(raw["itebd.D"])
    if "itebd.tau_schedule" in raw:
        itebd_kwargs["tau_schedule"] = tuple(
            float(x) for x in raw["itebd.tau_schedule"].split(","))
    for name, cast in (("energy_tol", float), ("max_iters_per_tau", int),
                       ("seed", int), ("noise", float)):
        key = f"itebd.{name}"
        if key in raw:
            itebd_kwargs[name] = cast(raw[key])
    patterns = ()
    if raw.get("ggm.patterns"):
        patterns = tuple(tuple(int(x) for x in chunk.split("-"))
                         for chunk in raw["ggm.patterns"].split(";") if chunk)
    excluded = ()
    if raw.get("exclude"):
        parts = []
        for chunk in raw["exclude"].split(";"):
            if not chunk:
                continue
            lo, hi = chunk.split(":")
            parts.append((float(lo), float(hi)))
        excluded = tuple(parts)
    return SweepConfig(
        template=template,
        axis=raw.get("axis", "h"),
        start=float(raw.get("grid.start", 0.0)),
        stop=float(raw.get("grid.stop", 0.0)),
        step=float(raw.get("grid.step", 1.0)),
        methods=tuple(m.strip() for m in raw.get("methods", "imps").split(",") if m.strip()),
        ed_sizes=tuple(int(x) for x in raw.get("ed_sizes", "").split(",") if x.strip()),
        itebd=ItebdConfig(**itebd_kwargs),
        m_cap=int(raw.get("ggm.m_cap", 4)),
        patterns=patterns,
        include_half_cut=parse_bool(raw.get("ggm.include_half_cut", "false")),
        on_degenerate=raw.get("ggm.on_degenerate", "raise"),
        gap_tol=float(raw.get("ggm.gap_tol", "1e-6")),
        excluded=excluded,
        output=raw.get("output", "ggm_sweep.csv"),
    )


def load_config(path) -> SweepConfig:
    with open(path, "r") as fh:
        return parse_config(fh.read())


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _row(axis_value, method, n_sites, ggm=None, argmax="", lam="", energy="",
         status="ok", d_bond="", tau_final=""):
    return {
        "axis_value": axis_value, "method": method, "n_sites": n_sites,
        "ggm": ggm, "argmax_source": argmax, "lambda_max_sq": lam,
        "energy_per_site": energy, "status": status, "d_bond": d_bond,
        "tau_final": tau_final,
    }


def _imps_job(args):
    cfg, value = args
    spec = cfg.point_spec(value)
    try:
        state, log = find_ground_state(spec, cfg.itebd, gap_tol=cfg.gap_tol)
        result = ggm_infinite(state, m_cap=cfg.m_cap,
                              patterns=[SitePattern(p) for p in cfg.patterns],
                              include_half_cut=cfg.include_half_cut,
                              gap_tol=cfg.gap_tol, on_degenerate=cfg.on_degenerate)
        status = log.status if log.status != "converged" else result.status
        if result.ok:
            return _row(value, "imps", "inf", result.value, result.argmax.label(),
                        result.argmax.lambda_max_sq, log.final_energy, status,
                        cfg.itebd.D, log.final_tau)
        return _row(value, "imps", "inf", energy=log.final_energy,
                    status="unavailable", d_bond=cfg.itebd.D, tau_final=log.final_tau)
    except EntchainError as exc:
        return _row(value, "imps", "inf", status=f"error:{type(exc).__name__}",
                    d_bond=cfg.itebd.D)


def _ed_job(args):
    cfg, value, n = args
    spec = cfg.point_spec(value)
    try:
        gs = ed_mod.ground_state(spec, n)
        if gs.degenerate:
            return _row(value, "ed", n, energy=gs.energy / n, status="unavailable")
        result = ggm_finite(gs.psi, n, spec.d)
        return _row(value, "ed", n, result.value, result.argmax.label(),
                    result.argmax.lambda_max_sq, gs.energy / n, "ok")
    except EntchainError as exc:
        return _row(value, "ed", n, status=f"error:{type(exc).__name__}")


def run_sweep(cfg: SweepConfig, out_dir: str = ".", workers: int = 1) -> str:
    """Execute the sweep and write the CSV (plus a plot script); returns CSV path."""
    jobs = []
    rows = []
    for value in cfg.grid():
        if cfg.is_excluded(value):
            for method in cfg.methods:
                if method == "imps":
                    rows.append(_row(value, "imps", "inf", status="unavailable",
                                     d_bond=cfg.itebd.D))
                else:
                    for n in cfg.ed_sizes:
                        rows.append(_row(value, "ed", n, status="unavailable"))
            continue
        for method in cfg.methods:
            if method == "imps":
                jobs.append(("imps", (cfg, value)))
            else:
                for n in cfg.ed_sizes:
                    jobs.append(("ed", (cfg, value, n)))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_imps_job if kind == "imps" else _ed_job, args)
                       for kind, args in jobs]
            rows.extend(f.result() for f in futures)
    else:
        for kind, args in jobs:
            rows.append((_imps_job if kind == "imps" else _ed_job)(args))
    rows.sort(key=lambda r: (r["axis_value"], r["method"],
                             -1 if r["n_sites"] == "inf" else int(r["n_sites"])))
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, cfg.output)
    with open(csv_path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r[k]) for k in CSV_HEADER.split(",")) + "\n")
    _emit_plot_script(csv_path, cfg)
    return csv_path


def _emit_plot_script(csv_path: str, cfg: SweepConfig) -> None:
    """Write a standalone plotting script next to the CSV (not executed here)."""
    base = os.path.splitext(csv_path)[0]
    axis = cfg.axis
    script = f'''"""Render GGM vs {axis} per method from {os.path.basename(csv_path)}."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(list)
with open({os.path.basename(csv_path)!r}) as fh:
    for row in csv.DictReader(fh):
        if row["status"] != "ok" or not row["ggm"]:
            continue
        key = row["method"] if row["n_sites"] == "inf" else f'N={{row["n_sites"]}}'
        series[key].append((float(row["axis_value"]), float(row["ggm"])))

for key in sorted(series):
    pts = sorted(series[key])
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=key)
plt.xlabel({axis!r})
plt.ylabel("GGM")
plt.legend()
plt.tight_layout()
plt.savefig({os.path.basename(base) + ".png"!r}, dpi=160)
print("wrote", {os.path.basename(base) + ".png"!r})
'''
    with open(base + "_plot.py", "w") as fh:
        fh.write(script)
