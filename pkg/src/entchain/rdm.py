"""Reduced density matrices of the infinite chain from transfer fixed points.

The m-site RDM for a pattern of sites is contracted as
rho_ij = <L| Atil^1 E^{r1-1} Atil^2 ... Atil^m |R> / <L|R>, with
Atil^k = A^{i_k} (x) conj(A^{j_k}), walking left to right so the cost stays
polynomial in the bond dimension and linear in the pattern span; the d^m-sized
object only appears as the final output.

Boundaries <L|, |R> are the dominant left/right fixed points of the unit-cell
transfer matrix. For (near-)degenerate dominant eigenvalues the `on_degenerate`
policy selects between raising DegenerateTransfer ("raise", default) and the
ring-closure mixture over the dominant eigenspace ("mixture"), which is what a
periodic trace produces in the thermodynamic limit.

Patterns are evaluated rooted at both sublattices of the two-site unit cell and
averaged, restoring one-site translational invariance; for a symmetry-broken
Neel state this average equals the symmetric (cat) mixture.

All functions are pure; inputs immutable; trivially parallel across patterns.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTransfer, PatternTooLarge
from .imps import CTYPE, IMPS, TransferMatrix, dominant_subspace, site_matrices

SPAN_CAP_DEFAULT = 12

RDM_HERM_TOL = 1e-10
RDM_TRACE_TOL = 1e-10
RDM_PSD_TOL = -1e-9


@dataclass(frozen=True)
class SitePattern:
    """Strictly increasing site offsets starting at 0, e.g. (0,), (0, 2, 5)."""

    offsets: tuple

    def __post_init__(self):
        offs = tuple(int(o) for o in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if len(offs) == 0:
            raise ValueError("pattern must contain at least one site")
        if offs[0] != 0:
            raise ValueError(f"pattern must start at offset 0, got {offs}")
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise ValueError(f"offsets must be strictly increasing, got {offs}")

    @property
    def m(self) -> int:
        return len(self.offsets)

    @property
    def span(self) -> int:
        return self.offsets[-1] + 1

    def label(self) -> str:
        return "-".join(str(o) for o in self.offsets)


@dataclass(frozen=True, eq=False)
class ReducedDensityMatrix:
    """Hermitian, unit-trace, PSD d^m x d^m matrix for a site pattern."""

    pattern: SitePattern
    rho: np.ndarray

    def validate(self) -> None:
        herm = np.abs(self.rho - self.rho.conj().T).max()
        if herm > RDM_HERM_TOL:
            raise ValueError(f"RDM not Hermitian: deviation {herm:.3e}")
        tr = np.trace(self.rho)
        if abs(tr - 1.0) > RDM_TRACE_TOL:
            raise ValueError(f"RDM trace {tr} != 1")
        wmin = np.linalg.eigvalsh(self.rho).min()
        if wmin < RDM_PSD_TOL:
            raise ValueError(f"RDM not PSD: min eigenvalue {wmin:.3e}")


def _cell_transfer(s: IMPS, root: str) -> TransferMatrix:
    first, second = site_matrices(s, root)
    chi = s.D
    e1 = np.zeros((chi * chi, chi * chi), dtype=CTYPE)
    e2 = np.zeros_like(e1)
    for m in first:
        e1 += np.kron(m, m.conj())
    for m in second:
        e2 += np.kron(m, m.conj())
    return TransferMatrix(e=e1 @ e2)


def _boundary_pairs(s: IMPS, root: str, gap_tol: float, on_degenerate: str):
    e = _cell_transfer(s, root)
    mu, pairs, gap, k = dominant_subspace(e, window=gap_tol)
    if k > 1 and on_degenerate == "raise":
        raise DegenerateTransfer(
            f"transfer matrix dominant eigenvalue is {k}-fold degenerate within "
            f"{gap_tol:g}; pass on_degenerate='mixture' for the ring-closure mixture")
    return pairs


def pattern_rdm(s: IMPS, p: SitePattern, span_cap: int = SPAN_CAP_DEFAULT,
                gap_tol: float = 1e-6, on_degenerate: str = "raise",
                average_sublattices: bool = True) -> ReducedDensityMatrix:
    """RDM for an arbitrary pattern of (possibly non-consecutive) sites."""
    if on_degenerate not in ("raise", "mixture"):
        raise ValueError(f"on_degenerate must be 'raise' or 'mixture', got {on_degenerate!r}")
    if p.span > span_cap:
        raise PatternTooLarge(f"pattern span {p.span} exceeds cap {span_cap}")
    dim = s.d ** p.m
    if dim > 3 ** SPAN_CAP_DEFAULT:
        raise PatternTooLarge(f"RDM dimension {dim} too large")
    roots = ("A", "B") if average_sublattices else ("A",)
    rhos = []
    for root in roots:
        mats = site_matrices(s, root)
        pairs = _boundary_pairs(s, root, gap_tol, on_degenerate)
        rho = np.zeros((dim, dim), dtype=CTYPE)
        for left, right in pairs:
            rho += _walk_pattern(mats, p, left, right, s.d, s.D)
        rho /= np.trace(rho)
        rhos.append(rho)
    rho = sum(rhos) / len(rhos)
    rho = 0.5 * (rho + rho.conj().T)
    return ReducedDensityMatrix(pattern=p, rho=rho)


def _walk_pattern(mats, p: SitePattern, left: np.ndarray, right: np.ndarray,
                  d: int, chi: int) -> np.ndarray:
    """<L| Atil E^{gap-1} Atil ... |R> by left-to-right contraction.

    Carries T[ket-string, bra-string, a, b]; open physical pairs grow the
    string indices, gap sites are traced out in place.
    """
    t = left.conj()[None, None, :, :]
    site = 0
    for which, off in enumerate(p.offsets):
        while site < off:  # traced (gap) sites: apply the one-site transfer map
            m = mats[site % 2]
            tk = np.tensordot(t, m, axes=(2, 1))          # (I,J,b,i,a')
            t = np.tensordot(tk, m.conj(), axes=([2, 3], [1, 0]))  # (I,J,a',b')
            site += 1
        m = mats[site % 2]
        t = np.tensordot(t, m, axes=(2, 1))               # (I,J,b,i,a')
        t = np.tensordot(t, m.conj(), axes=(2, 1))        # (I,J,i,a',j,b')
        t = t.transpose(0, 2, 1, 4, 3, 5)                 # (I,i,J,j,a',b')
        t = t.reshape(t.shape[0] * d, t.shape[2] * d, chi, chi)
        site += 1
    vals = np.tensordot(t, right, axes=([2, 3], [0, 1]))  # (I, J)
    return vals


def consecutive_block_rdm(s: IMPS, m: int, span_cap: int = SPAN_CAP_DEFAULT,
                          gap_tol: float = 1e-6, on_degenerate: str = "raise",
                          average_sublattices: bool = True) -> ReducedDensityMatrix:
    """RDM of m consecutive sites (m >= 1)."""
    if m < 1:
        raise ValueError(f"block length must be >= 1, got {m}")
    return pattern_rdm(s, SitePattern(tuple(range(m))), span_cap=span_cap,
                       gap_tol=gap_tol, on_degenerate=on_degenerate,
                       average_sublattices=average_sublattices)


def single_site_rdm(s: IMPS, gap_tol: float = 1e-6, on_degenerate: str = "raise",
                    average_sublattices: bool = True) -> ReducedDensityMatrix:
    """Single-site RDM, averaged over the two unit-cell sublattices."""
    return consecutive_block_rdm(s, 1, gap_tol=gap_tol, on_degenerate=on_degenerate,
                                 average_sublattices=average_sublattices)


def sublattice_asymmetry(s: IMPS, gap_tol: float = 1e-6) -> float:
    """Max-norm difference between the A- and B-rooted single-site RDMs.

    A large value signals one-site translational symmetry breaking (Neel
    order); the averaged RDMs then represent the symmetric mixture.
    """
    p = SitePattern((0,))
    rho_a = pattern_rdm(s, p, gap_tol=gap_tol, on_degenerate="mixture",
                        average_sublattices=False).rho
    mats = site_matrices(s, "B")
    pairs = _boundary_pairs(s, "B", gap_tol, "mixture")
    rho_b = np.zeros_like(rho_a)
    for left, right in pairs:
        rho_b += _walk_pattern(mats, p, left, right, s.d, s.D)
    rho_b /= np.trace(rho_b)
    return float(np.abs(rho_a - rho_b).max())


def rdm_to_csv(rdm: ReducedDensityMatrix) -> str:
    """Row-major CSV with "re,im" pairs per entry; one matrix row per line."""
    lines = []
    for row in rdm.rho:
        cells = []
        for z in row:
            cells.append(f"{z.real:.17g},{z.imag:.17g}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def rdm_filename(p: SitePattern) -> str:
    return f"rdm_p{p.label()}.csv"
