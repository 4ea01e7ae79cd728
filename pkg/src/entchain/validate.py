"""Reference validation suite: fast analytic checks runnable at any time.

Each check recomputes a quantity with known exact value (reference states,
operator algebra, the product-fidelity oracle) and reports the measured error.
Failures are report content, not exceptions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateTransfer
from .ggm import closest_product_fidelity, ggm_finite
from .imps import dominant_fixed_points, half_cut_spectrum, transfer_matrix
from .operators import ModelSpec, build_bond_hamiltonian, build_gate, build_spin_operators
from .rdm import single_site_rdm
from .references import (
    aklt_imps,
    aklt_mps_tensors,
    ghz_mps_tensors,
    ghz_vector,
    w_mps_vector,
    w_vector,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    error: float
    tolerance: float
    note: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self):
        out = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            note = f"  ({c.note})" if c.note else ""
            out.append(f"[{mark}] {c.name}: err={c.error:.3e} tol={c.tolerance:.1e}{note}")
        out.append(f"{'OK' if self.ok else 'FAILED'}: "
                   f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed")
        return out


def _check(name, err, tol, note=""):
    return CheckResult(name=name, passed=bool(err <= tol), error=float(err),
                       tolerance=tol, note=note)


def validate_references() -> ValidationReport:
    checks = []

    ops2 = build_spin_operators(2)
    comm = ops2.sx @ ops2.sy - ops2.sy @ ops2.sx - 2j * ops2.sz
    checks.append(_check("pauli_commutator", np.abs(comm).max(), 1e-14))

    ops3 = build_spin_operators(3)
    casimir = ops3.sx @ ops3.sx + ops3.sy @ ops3.sy + ops3.sz @ ops3.sz - 2 * np.eye(3)
    checks.append(_check("spin1_casimir", np.abs(casimir).max(), 1e-14))

    hb = build_bond_hamiltonian(ModelSpec.transverse_ising(jx=1.0, h=0.7))
    g = build_gate(hb, 0.013)
    checks.append(_check("gate_vs_expm", np.abs(g - sla.expm(-0.013 * hb.hbond)).max(),
                         1e-13))
    g1, g2, g12 = build_gate(hb, 0.2), build_gate(hb, 0.3), build_gate(hb, 0.5)
    checks.append(_check("gate_semigroup", np.abs(g1 @ g2 - g12).max(), 1e-10))

    try:
        dominant_fixed_points(transfer_matrix(ghz_mps_tensors()))
        checks.append(_check("ghz_imps_degenerate_transfer", 1.0, 0.0,
                             "expected DegenerateTransfer not raised"))
    except DegenerateTransfer:
        checks.append(_check("ghz_imps_degenerate_transfer", 0.0, 0.5,
                             "DegenerateTransfer raised as expected"))

    eigs = np.sort(np.linalg.eigvals(transfer_matrix(aklt_mps_tensors()).e).real)
    checks.append(_check("aklt_transfer_eigs",
                         np.abs(eigs - np.array([-1.0, -1.0, -1.0, 3.0])).max(), 1e-12))

    aklt = aklt_imps()
    rho1 = single_site_rdm(aklt).rho
    checks.append(_check("aklt_single_site_rdm", np.abs(rho1 - np.eye(3) / 3).max(), 1e-8))
    lam = half_cut_spectrum(aklt, "AB")
    checks.append(_check("aklt_half_cut",
                         np.abs(np.sort(lam)[::-1][:2] - 1 / np.sqrt(2)).max(), 1e-8))

    err = max(abs(ggm_finite(ghz_vector(n), n, 2).value - 0.5) for n in range(3, 7))
    checks.append(_check("ghz_ggm", err, 1e-10))
    err = max(abs(ggm_finite(w_vector(n), n, 2).value - 1.0 / n) for n in range(3, 7))
    checks.append(_check("w_ggm", err, 1e-10))

    err = max(np.abs(w_mps_vector(n) - w_vector(n)).max() for n in range(2, 9))
    checks.append(_check("w_mps_contraction", err, 1e-12))

    checks.append(_check("product_fidelity_oracle", _fidelity_batch_error(), 1e-6,
                         "200 random 3/4-qubit states, all bipartitions"))

    return ValidationReport(checks=tuple(checks))


def _fidelity_batch_error(n_states: int = 200, seed: int = 11) -> float:
    """Max |closest_product_fidelity - top Schmidt coefficient| over a batch."""
    rng = np.random.default_rng(seed)
    import itertools
    worst = 0.0
    for idx in range(n_states):
        n = 3 if idx % 2 == 0 else 4
        psi = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
        psi /= np.linalg.norm(psi)
        tensor = psi.reshape([2] * n)
        for m in range(1, n // 2 + 1):
            for subset in itertools.combinations(range(n), m):
                if 2 * m == n and 0 not in subset:
                    continue
                rest = [i for i in range(n) if i not in subset]
                mat = tensor.transpose(list(subset) + rest).reshape(2**m, -1)
                lam_max = sla.svdvals(mat)[0]
                fid = closest_product_fidelity(psi, subset, N=n).fidelity
                worst = max(worst, abs(fid - lam_max))
    return worst
