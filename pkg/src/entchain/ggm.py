"""Generalized geometric measure of genuine multipartite entanglement.

For a pure state the measure is 1 minus the largest squared Schmidt
coefficient over a set of bipartitions; the squared Schmidt maximum across a
cut equals the largest eigenvalue of either reduced density matrix.

Infinite chains: candidates are the consecutive blocks m = 1..m_cap plus any
supplied non-consecutive patterns. These are the bipartitions that arise as
N -> infinity limits of finite-ring cuts (every finite-ring subset has two
boundaries); the single-boundary half-infinite cut is evaluated on request via
include_half_cut=True but is excluded by default because it has no finite-ring
counterpart and systematically dominates gapped product-like states.

Finite chains: every site subset up to max_subset is enumerated (complements
are redundant by Schmidt symmetry; balanced subsets are deduplicated by
pinning site 0).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateTransfer, ShapeError
from .imps import IMPS, half_cut_spectrum
from .rdm import SPAN_CAP_DEFAULT, SitePattern, consecutive_block_rdm, pattern_rdm

TIE_TOL = 1e-12


@dataclass(frozen=True)
class BipartitionCandidate:
    """One evaluated bipartition: kind in {half_cut, block, pattern, subset}."""

    kind: str
    detail: tuple
    lambda_max_sq: float

    def label(self) -> str:
        if self.kind == "half_cut":
            return f"half_cut_{self.detail[0].lower()}"
        if self.kind == "block":
            return f"block_{self.detail[0]}"
        body = "-".join(str(x) for x in self.detail)
        return f"{self.kind}_{body}"


@dataclass(frozen=True)
class GgmResult:
    """GGM value with the argmax bipartition and the full candidate list."""

    value: float | None
    argmax: BipartitionCandidate | None
    candidates: tuple
    status: str = "ok"  # "ok" | "unavailable"
    ties: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def max_schmidt_sq(rho) -> float:
    """Largest eigenvalue of a reduced density matrix (= lambda_max^2)."""
    mat = rho.rho if hasattr(rho, "rho") else np.asarray(rho)
    return float(np.linalg.eigvalsh(mat)[-1])


def _finish(cands) -> GgmResult:
    best = max(c.lambda_max_sq for c in cands)
    ties = tuple(c for c in cands if best - c.lambda_max_sq <= TIE_TOL)
    value = max(0.0, 1.0 - best)
    return GgmResult(value=value, argmax=ties[0], candidates=tuple(cands), ties=ties)


def ggm_infinite(s: IMPS, m_cap: int = 4, patterns=(), include_half_cut: bool = False,
                 gap_tol: float = 1e-6, on_degenerate: str = "raise",
                 span_cap: int = SPAN_CAP_DEFAULT) -> GgmResult:
    """GGM of the infinite chain from block and pattern RDM candidates.

    With on_degenerate="raise" (default) a degenerate transfer matrix yields
    status="unavailable" (non-unique / cat-like state); "mixture" evaluates the
    ring-closure mixture RDMs instead.
    """
    cands = []
    try:
        for m in range(1, m_cap + 1):
            rho = consecutive_block_rdm(s, m, span_cap=span_cap, gap_tol=gap_tol,
                                        on_degenerate=on_degenerate)
            cands.append(BipartitionCandidate("block", (m,), max_schmidt_sq(rho)))
        for p in patterns:
            pat = p if isinstance(p, SitePattern) else SitePattern(tuple(p))
            rho = pattern_rdm(s, pat, span_cap=span_cap, gap_tol=gap_tol,
                              on_degenerate=on_degenerate)
            cands.append(BipartitionCandidate("pattern", pat.offsets,
                                              max_schmidt_sq(rho)))
        if include_half_cut:
            for bond in ("AB", "BA"):
                lam = half_cut_spectrum(s, bond)
                cands.append(BipartitionCandidate("half_cut", (bond,),
                                                  float((lam**2).max())))
    except DegenerateTransfer:
        return GgmResult(value=None, argmax=None, candidates=(),
                         status="unavailable")
    return _finish(cands)


def _subset_rdm(psi_tensor: np.ndarray, subset, N: int, d: int) -> np.ndarray:
    rest = [i for i in range(N) if i not in subset]
    t = psi_tensor.transpose(list(subset) + rest).reshape(d ** len(subset), -1)
    return t @ t.conj().T


def ggm_finite(psi: np.ndarray, N: int, d: int, max_subset: int | None = None) -> GgmResult:
    """GGM of an explicit state vector over all site subsets up to max_subset.

    Subsets of size exactly N/2 are deduplicated by requiring site 0 in the
    subset (the complement gives the same Schmidt spectrum).
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (d**N,):
        raise ShapeError(f"psi must have length d^N = {d**N}, got {psi.shape}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-10:
        raise ShapeError(f"psi must be normalized, |psi| = {nrm}")
    if max_subset is None:
        max_subset = N // 2
    if max_subset > N // 2:
        raise ShapeError(f"max_subset must be <= N/2 = {N // 2}, got {max_subset}")
    tensor = psi.reshape([d] * N)
    cands = []
    for m in range(1, max_subset + 1):
        for subset in itertools.combinations(range(N), m):
            if 2 * m == N and 0 not in subset:
                continue
            rho = _subset_rdm(tensor, list(subset), N, d)
            lam = float(np.linalg.eigvalsh(rho)[-1])
            cands.append(BipartitionCandidate("subset", subset, lam))
    return _finish(cands)


class ProductFidelity(NamedTuple):
    fidelity: float
    converged: bool


def closest_product_fidelity(psi: np.ndarray, bipartition, N: int = None,
                             d: int = 2, iters: int = 1000,
                             tol: float = 1e-14) -> ProductFidelity:
    """max_{|a>|b>} |<a,b|psi>| across the given bipartition, by alternating
    optimization.

    Fixing one factor, the optimal other factor is the normalized partial
    contraction; iterating is power iteration on M M+ for the bipartition's
    coefficient matrix M, so the fixed point is the top singular value of M
    (equal to the largest Schmidt coefficient).
    """
    psi = np.asarray(psi, dtype=complex)
    if N is None:
        N = int(round(np.log(psi.size) / np.log(d)))
    if psi.shape != (d**N,):
        raise ShapeError(f"psi must have length d^N = {d**N}, got {psi.shape}")
    subset = sorted(int(i) for i in bipartition)
    if not subset or subset[0] < 0 or subset[-1] >= N or len(subset) >= N:
        raise ShapeError(f"bipartition {subset} must be a proper nonempty subset")
    rest = [i for i in range(N) if i not in subset]
    m = psi.reshape([d] * N).transpose(subset + rest).reshape(d ** len(subset), -1)
    seed = 1.0 / np.arange(1, m.shape[1] + 1)
    a = m @ seed
    if np.linalg.norm(a) < 1e-14:
        a = np.ones(m.shape[0], dtype=complex)
    a /= np.linalg.norm(a)
    fid = 0.0
    converged = False
    for _ in range(iters):
        b_bar = m.conj().T @ a          # optimal conj(b) given a, unnormalized
        nb = np.linalg.norm(b_bar)
        if nb < 1e-300:
            break
        b_bar /= nb
        a = m @ b_bar                   # optimal a given b, unnormalized
        na = np.linalg.norm(a)
        a /= na
        fid_new = float(na)             # = |<a,b|psi>| for the updated pair
        if abs(fid_new - fid) < tol:
            fid = fid_new
            converged = True
            break
        fid = fid_new
    return ProductFidelity(fidelity=fid, converged=converged)
