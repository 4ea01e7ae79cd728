"""Dense finite-chain reference: Hamiltonians, ground states, partial traces.

Hamiltonians are assembled by Kronecker embedding of the model's two-site
couplings and single-site terms (full weight on every site, bonds per the
boundary condition). Periodic boundary conditions are the default for all
infinite-chain comparisons since translational invariance is the working
assumption; open chains are available behind the flag.

Pure functions; independent (spec, N) jobs can run concurrently.
"""
from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spsla

from .errors import NumericalBreakdown, ShapeError, TooLarge
from .operators import ModelSpec, coupling_terms
from .rdm import ReducedDensityMatrix, SitePattern

DIM_CAP = 20000
DENSE_SOLVE_MAX = 2048  # full eigh below, Lanczos + Rayleigh-Ritz refinement above

CACHE_ENV = "ENTANGLE_CACHE_DIR"
CACHE_MAGIC = b"IMPS0001"
_CACHE_KIND_VECTOR = 1


@dataclass(frozen=True, eq=False)
class FiniteGroundState:
    """Lowest eigenpair of the finite chain with the gap to the next level."""

    N: int
    d: int
    energy: float
    gap: float
    psi: np.ndarray
    degenerate: bool


def _check_size(d: int, N: int) -> int:
    dim = d**N
    if dim > DIM_CAP:
        raise TooLarge(f"Hilbert dimension {dim} exceeds cap {DIM_CAP}")
    return dim


def build_dense_hamiltonian(spec: ModelSpec, N: int, bc: str = "periodic") -> np.ndarray:
    """H = sum_<ij> bond couplings + sum_i site terms, Kronecker-embedded."""
    if bc not in ("periodic", "open"):
        raise ValueError(f"bc must be 'periodic' or 'open', got {bc!r}")
    d = spec.d
    dim = _check_size(d, N)
    pair, site = coupling_terms(spec)
    h = np.zeros((dim, dim), dtype=complex)
    bonds = [(i, (i + 1) % N) for i in range(N if bc == "periodic" else N - 1)]
    for i, j in bonds:
        for c, op in pair:
            if c != 0.0:
                h += c * _embed_two(op, i, j, N, d)
    for i in range(N):
        for c, op in site:
            if c != 0.0:
                h += c * _embed_one(op, i, N, d)
    return h


def _embed_one(op: np.ndarray, i: int, N: int, d: int) -> np.ndarray:
    left = np.eye(d**i)
    right = np.eye(d ** (N - i - 1))
    return np.kron(np.kron(left, op), right)


def _embed_two(op: np.ndarray, i: int, j: int, N: int, d: int) -> np.ndarray:
    if i == j or not (0 <= i < N and 0 <= j < N):
        raise ShapeError(f"bad bond sites ({i}, {j}) for N={N}")
    a, b = (i, j) if i < j else (j, i)
    out = np.eye(1)
    for site in range(N):
        if site == a or site == b:
            out = np.kron(out, op)
        else:
            out = np.kron(out, np.eye(d))
    return out


def _sparse_hamiltonian(spec: ModelSpec, N: int, bc: str) -> sp.csr_matrix:
    d = spec.d
    pair, site = coupling_terms(spec)
    dim = d**N
    h = sp.csr_matrix((dim, dim), dtype=complex)
    bonds = [(i, (i + 1) % N) for i in range(N if bc == "periodic" else N - 1)]

    def embed(ops_by_site):
        out = sp.identity(1, format="csr", dtype=complex)
        for site_i in range(N):
            op = ops_by_site.get(site_i)
            block = sp.csr_matrix(op) if op is not None else sp.identity(d, format="csr")
            out = sp.kron(out, block, format="csr")
        return out

    for i, j in bonds:
        for c, op in pair:
            if c != 0.0:
                h = h + c * embed({i: op, j: op})
    for i in range(N):
        for c, op in site:
            if c != 0.0:
                h = h + c * embed({i: op})
    return h


def ground_state(spec: ModelSpec, N: int, bc: str = "periodic",
                 degeneracy_tol: float | None = None,
                 cache_dir: str | None = None) -> FiniteGroundState:
    """Lowest eigenpair and gap; dense below dim 2048, Lanczos above.

    The Lanczos pair is refined by a Rayleigh-Ritz step in its 2-dimensional
    subspace so near-degenerate splittings are resolved to rounding. The
    degenerate flag is gap < degeneracy_tol (default 1e-8 * max(1, |E0|)).
    Results are cached to disk when a cache directory is configured.
    """
    dim = _check_size(spec.d, N)
    cache_path = _cache_path(spec, N, bc, cache_dir)
    if cache_path is not None and os.path.exists(cache_path):
        cached = _read_cache(cache_path, spec.d, N)
        if cached is not None:
            return _flag_degeneracy(cached, degeneracy_tol)
    try:
        if dim <= DENSE_SOLVE_MAX:
            h = build_dense_hamiltonian(spec, N, bc)
            herm = 0.5 * (h + h.conj().T)
            w, v = np.linalg.eigh(herm)
            e0, e1 = float(w[0]), float(w[1])
            psi = v[:, 0]
        else:
            h = _sparse_hamiltonian(spec, N, bc)
            if np.abs(h.imag).max() < 1e-14:
                h = h.real
            w, v = spsla.eigsh(h, k=2, which="SA", maxiter=20000)
            order = np.argsort(w)
            v = v[:, order]
            hv = h @ v
            gram = v.conj().T @ hv
            gram = 0.5 * (gram + gram.conj().T)
            wg, vg = np.linalg.eigh(gram)
            e0, e1 = float(wg[0]), float(wg[1])
            psi = v @ vg[:, 0]
    except (np.linalg.LinAlgError, spsla.ArpackNoConvergence) as exc:
        raise NumericalBreakdown(f"eigensolver failed for N={N}") from exc
    psi = np.asarray(psi, dtype=complex)
    psi /= np.linalg.norm(psi)
    # fix the global phase for reproducibility
    k = int(np.argmax(np.abs(psi)))
    psi *= np.abs(psi[k]) / psi[k]
    state = FiniteGroundState(N=N, d=spec.d, energy=e0, gap=e1 - e0, psi=psi,
                              degenerate=False)
    if cache_path is not None:
        _write_cache(cache_path, state)
    return _flag_degeneracy(state, degeneracy_tol)


def _flag_degeneracy(state: FiniteGroundState,
                     degeneracy_tol: float | None) -> FiniteGroundState:
    tol = degeneracy_tol
    if tol is None:
        tol = 1e-8 * max(1.0, abs(state.energy))
    return FiniteGroundState(N=state.N, d=state.d, energy=state.energy,
                             gap=state.gap, psi=state.psi,
                             degenerate=bool(state.gap < tol))


def partial_trace(psi: np.ndarray, keep, N: int, d: int) -> ReducedDensityMatrix:
    """rho_keep = Tr_complement |psi><psi| for an arbitrary site subset."""
    keep = sorted(int(i) for i in keep)
    if len(keep) == 0:
        raise ShapeError("keep must be nonempty")
    if len(set(keep)) != len(keep) or keep[0] < 0 or keep[-1] >= N:
        raise ShapeError(f"bad site subset {keep} for N={N}")
    psi = np.asarray(psi)
    if psi.shape != (d**N,):
        raise ShapeError(f"psi must have length d^N = {d**N}, got {psi.shape}")
    rest = [i for i in range(N) if i not in keep]
    t = psi.reshape([d] * N).transpose(keep + rest).reshape(d ** len(keep), -1)
    rho = t @ t.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    offsets = tuple(i - keep[0] for i in keep)
    return ReducedDensityMatrix(pattern=SitePattern(offsets), rho=rho)


def energy_of_product_state(h: np.ndarray, local_states) -> float:
    """<p|H|p> for |p> = tensor product of the given local vectors (test oracle)."""
    vec = np.array([1.0], dtype=complex)
    for v in local_states:
        v = np.asarray(v, dtype=complex)
        vec = np.kron(vec, v / np.linalg.norm(v))
    return float(np.real(vec.conj() @ (h @ vec)))


# --- disk cache -------------------------------------------------------------

def _cache_path(spec: ModelSpec, N: int, bc: str, cache_dir: str | None):
    root = cache_dir if cache_dir is not None else os.environ.get(CACHE_ENV)
    if not root:
        return None
    key = hashlib.sha256(f"{spec.key()}|N={N}|bc={bc}|v1".encode()).hexdigest()[:24]
    return os.path.join(root, f"ed_{key}.bin")


def _write_cache(path: str, state: FiniteGroundState) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<qqq", _CACHE_KIND_VECTOR, state.N, state.d))
        fh.write(struct.pack("<dd", state.energy, state.gap))
        fh.write(np.ascontiguousarray(state.psi, dtype=np.complex128)
                 .view(np.float64).astype("<f8").tobytes())
    os.replace(tmp, path)


def _read_cache(path: str, d: int, N: int):
    with open(path, "rb") as fh:
        if fh.read(8) != CACHE_MAGIC:
            return None
        kind, n_sites, dloc = struct.unpack("<qqq", fh.read(24))
        if kind != _CACHE_KIND_VECTOR or n_sites != N or dloc != d:
            return None
        energy, gap = struct.unpack("<dd", fh.read(16))
        raw = np.frombuffer(fh.read(16 * d**N), dtype="<f8").astype(np.float64)
        psi = raw.view(np.complex128).copy()
    if psi.shape != (d**N,):
        return None
    return FiniteGroundState(N=N, d=d, energy=energy, gap=gap, psi=psi,
                             degenerate=False)
