"""Infinite translationally invariant MPS with a two-site unit cell (Vidal form).

State data: Gamma_A, Gamma_B (d x D x D) and Schmidt vectors lambda_a (A-B
bond), lambda_b (B-A bond). Bond dimension is fixed at D; unused directions
carry exact zeros in lambda. All operations are pure functions returning new
values, so states are safe to share read-only across workers.

Transfer-matrix conventions: for site matrices {A^i} the transfer matrix is
E = sum_i A^i (x) conj(A^i) with the elementwise complex conjugate, acting on
row-major-vectorized D x D matrices: E vec(r) = vec(sum_i A^i r A^i+).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spsla

from .errors import DegenerateTransfer, GaugeSingular, ShapeError

CTYPE = np.complex128

MAGIC = b"IMPS0001"

DENSE_EIG_MAX = 400  # dense eigendecomposition up to this transfer dimension

_PINV_FLOOR = 1e-12
_RANK_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class IMPS:
    """Two-site unit-cell Vidal-form iMPS."""

    d: int
    D: int
    gamma_a: np.ndarray
    gamma_b: np.ndarray
    lambda_a: np.ndarray
    lambda_b: np.ndarray

    def __post_init__(self):
        shape = (self.d, self.D, self.D)
        for name in ("gamma_a", "gamma_b"):
            if getattr(self, name).shape != shape:
                raise ShapeError(f"{name} must have shape {shape}")
        for name in ("lambda_a", "lambda_b"):
            lam = getattr(self, name)
            if lam.shape != (self.D,):
                raise ShapeError(f"{name} must have shape ({self.D},)")


def init_imps(d: int, D: int, seed: int = 0, noise: float = 0.0) -> IMPS:
    """Uniform-superposition product state embedded at bond dimension D.

    The state (1/sqrt(d)) sum_i |i> on every site, with lambda = (1, 0, ...).
    Seeded pseudo-random noise of the given amplitude is added to the Gamma
    tensors; it seeds symmetry breaking in ordered phases. Deterministic in
    the seed.
    """
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    if noise < 0:
        raise ValueError(f"noise must be >= 0, got {noise}")
    gamma_a = np.zeros((d, D, D), dtype=CTYPE)
    gamma_a[:, 0, 0] = 1.0 / np.sqrt(d)
    gamma_b = gamma_a.copy()
    if noise > 0:
        rng = np.random.default_rng(seed)
        gamma_a = gamma_a + noise * rng.standard_normal((d, D, D))
        gamma_b = gamma_b + noise * rng.standard_normal((d, D, D))
    lam = np.zeros(D)
    lam[0] = 1.0
    return IMPS(d=d, D=D, gamma_a=gamma_a, gamma_b=gamma_b,
                lambda_a=lam, lambda_b=lam.copy())


def site_matrices(s: IMPS, root: str = "A"):
    """Right-form per-site tensors (Gamma.lambda) in pattern order from `root`.

    Returns [first, second] where first sits on the `root` sublattice. Walking
    a pattern alternates between the two.
    """
    a_site = np.tensordot(s.gamma_a, np.diag(s.lambda_a), axes=(2, 0))  # (i,l,r)
    b_site = np.tensordot(s.gamma_b, np.diag(s.lambda_b), axes=(2, 0))
    if root == "A":
        return [a_site, b_site]
    if root == "B":
        return [b_site, a_site]
    raise ValueError(f"root must be 'A' or 'B', got {root!r}")


def cell_tensor(s: IMPS, root: str = "A") -> np.ndarray:
    """Blocked unit-cell tensor (d^2, D, D): product of the two site tensors."""
    first, second = site_matrices(s, root)
    cell = np.tensordot(first, second, axes=(2, 1))  # (i, l, j, r)
    return cell.transpose(0, 2, 1, 3).reshape(s.d * s.d, s.D, s.D)


def site_tensors(s: IMPS) -> np.ndarray:
    """Blocked unit-cell site matrices {A^i} with dominant transfer eigenvalue 1.

    Contracting N copies of the returned tensor on a ring reproduces the
    state's amplitudes (up to overall normalization fixed by the transfer
    spectrum).
    """
    cell = cell_tensor(s, "A")
    e = transfer_matrix(cell)
    mu = np.abs(np.linalg.eigvals(e.e)).max() if e.e.shape[0] <= DENSE_EIG_MAX else np.abs(
        spsla.eigs(e.e, k=1, which="LM", return_eigenvectors=False)[0])
    return cell / np.sqrt(mu)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Dense D^2 x D^2 transfer matrix E = sum_i A^i (x) conj(A^i)."""

    e: np.ndarray


def transfer_matrix(tensors) -> TransferMatrix:
    """Build E = sum_i A^i (x) conj(A^i) from per-index square matrices."""
    mats = np.asarray(tensors, dtype=CTYPE)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ShapeError(f"expected stack of square matrices, got shape {mats.shape}")
    chi = mats.shape[1]
    e = np.zeros((chi * chi, chi * chi), dtype=CTYPE)
    for m in mats:
        e += np.kron(m, m.conj())
    return TransferMatrix(e=e)


def ring_amplitudes(tensors, n_sites: int) -> np.ndarray:
    """Amplitudes of the N-site ring state: psi[i1..iN] = tr(A^{i1}...A^{iN}).

    `tensors` is either one stack of matrices (translationally invariant) or a
    list of per-site stacks. Brute-force oracle; cost d^N.
    """
    if isinstance(tensors, (list, tuple)) and np.asarray(tensors[0]).ndim == 3:
        stacks = [np.asarray(t, dtype=CTYPE) for t in tensors]
        if len(stacks) != n_sites:
            raise ShapeError(f"need {n_sites} per-site stacks, got {len(stacks)}")
    else:
        stacks = [np.asarray(tensors, dtype=CTYPE)] * n_sites
    d = stacks[0].shape[0]
    out = np.zeros((d,) * n_sites, dtype=CTYPE)
    for idx in np.ndindex(*([d] * n_sites)):
        m = stacks[0][idx[0]]
        for site in range(1, n_sites):
            m = m @ stacks[site][idx[site]]
        out[idx] = np.trace(m)
    return out


@dataclass(frozen=True, eq=False)
class FixedPoints:
    """Dominant transfer eigenvalue with left/right eigenvectors and gap."""

    mu: float
    l0: np.ndarray
    r0: np.ndarray
    gap: float


def _sorted_eig(mat: np.ndarray):
    """Eigenvalues/right eigenvectors sorted by descending modulus."""
    dim = mat.shape[0]
    if dim <= DENSE_EIG_MAX:
        w, v = np.linalg.eig(mat)
    else:
        k = min(6, dim - 2)
        w, v = spsla.eigs(mat, k=k, which="LM")
    order = np.argsort(-np.abs(w))
    return w[order], v[:, order]


def dominant_subspace(e: TransferMatrix, window: float = 1e-6):
    """Dominant eigenspace of the transfer matrix as biorthonormal (l, r) pairs.

    Returns (mu, pairs, gap, k) where k counts all eigenvalues with modulus
    within mu*(1-window) and gap = mu - |mu_{k+1}|. The returned pairs cover
    only the positive-phase members of that eigenspace, reshaped to D x D with
    <l_a|r_b> = delta_ab: on a large ring, E^N weights each dominant eigenvalue
    by mu_a^N, so oscillating (negative or complex phase) members average away
    and the ring-closure mixture keeps the mu_a ~ +mu ones.
    """
    mat = e.e
    dim = mat.shape[0]
    chi = int(round(np.sqrt(dim)))
    w, vr = _sorted_eig(mat)
    wl, vl = _sorted_eig(mat.conj().T)
    mu = np.abs(w[0])
    if mu == 0:
        raise DegenerateTransfer("transfer matrix has zero spectral radius")
    k = int(np.sum(np.abs(w) >= mu * (1.0 - window)))
    kl = int(np.sum(np.abs(wl) >= mu * (1.0 - window)))
    k = max(k, kl)
    gap = mu - (np.abs(w[k]) if k < len(w) else 0.0)
    keep_r = [a for a in range(k) if w[a].real >= mu * (1.0 - 10 * window)]
    keep_l = [a for a in range(k) if wl[a].conj().real >= mu * (1.0 - 10 * window)]
    if not keep_r or len(keep_r) != len(keep_l):
        raise DegenerateTransfer(
            "dominant transfer eigenvalues have no positive-phase member")
    r_vecs = vr[:, keep_r]
    l_vecs = vl[:, keep_l]
    overlap = l_vecs.conj().T @ r_vecs
    if np.abs(np.linalg.det(overlap)) < 1e-14:
        raise DegenerateTransfer("left/right dominant subspaces do not pair up")
    l_vecs = l_vecs @ np.linalg.inv(overlap).conj().T  # now <l_a|r_b> = delta_ab
    pairs = [(l_vecs[:, a].reshape(chi, chi), r_vecs[:, a].reshape(chi, chi))
             for a in range(len(keep_r))]
    return mu, pairs, gap, k


def _fix_phase(vec_mat: np.ndarray) -> np.ndarray:
    """Rotate global phase so the matrix is (near-)Hermitian with positive trace."""
    tr = np.trace(vec_mat)
    if np.abs(tr) > 1e-14:
        vec_mat = vec_mat * (np.abs(tr) / tr)
    return vec_mat


def dominant_fixed_points(e: TransferMatrix, gap_tol: float = 1e-6) -> FixedPoints:
    """Dominant eigenvalue and left/right eigenvectors; <l0|r0> = 1.

    Raises DegenerateTransfer when |mu| - |mu_2| < gap_tol, signalling
    symmetry-broken / cat states for which E^N does not converge to a rank-1
    projector and fixed-point reduced density matrices are not defined.
    """
    if gap_tol <= 0:
        raise ValueError(f"gap_tol must be > 0, got {gap_tol}")
    mat = e.e
    w, vr = _sorted_eig(mat)
    mu = np.abs(w[0])
    gap = mu - np.abs(w[1]) if len(w) > 1 else mu
    if gap < gap_tol:
        raise DegenerateTransfer(
            f"dominant transfer eigenvalue is degenerate within {gap_tol:g} "
            f"(|mu1|={mu:.8g}, |mu2|={np.abs(w[1]):.8g})")
    _, pairs, _, _ = dominant_subspace(e, window=max(gap_tol / max(mu, 1e-300), 1e-12))
    l0, r0 = pairs[0]
    return FixedPoints(mu=float(np.real(w[0])), l0=_fix_phase(l0), r0=_fix_phase(r0),
                       gap=float(gap))


def _pinv_vec(lam: np.ndarray, floor: float = _PINV_FLOOR) -> np.ndarray:
    out = np.zeros_like(lam)
    top = lam.max()
    if top <= 0:
        raise GaugeSingular("all Schmidt values vanish")
    nz = lam > floor * top
    out[nz] = 1.0 / lam[nz]
    return out


def _power_fixed_point(mats, side: str, tol: float = 1e-12, max_iter: int = 1000):
    """Dominant PSD fixed point of sum_i M x M+ (right) or M+ x M (left).

    Damped power iteration x <- (E(x) + x)/2 seeded with the identity: the
    damping kills oscillating (negative-phase) dominant modes, and the identity
    seed lands on the symmetric PSD element for degenerate (cat) spectra.
    Stalls caused by eigenspace drift are detected and accepted.
    """
    chi = mats[0].shape[1]
    x = np.eye(chi, dtype=CTYPE) / chi
    prev_delta = None
    mu = 1.0
    for _ in range(max_iter):
        xn = np.zeros_like(x)
        if side == "right":
            for m in mats:
                xn += m @ x @ m.conj().T
        else:
            for m in mats:
                xn += m.conj().T @ x @ m
        xn = 0.5 * (xn + xn.conj().T)
        mu = np.trace(xn).real
        if mu <= 0:
            raise GaugeSingular("transfer fixed-point iteration collapsed")
        xn = 0.5 * (xn / mu + x)
        xn /= np.trace(xn).real
        delta = np.abs(xn - x).max()
        x = xn
        if delta < tol:
            break
        if prev_delta is not None and delta > 0.97 * prev_delta and delta < 1e-7:
            break  # near-degenerate dominant eigenspace; any element is a valid gauge
        prev_delta = delta
    return mu, x


def _psd_factor(mat: np.ndarray, floor: float = _RANK_FLOOR) -> np.ndarray:
    """F with mat = F F+ from the eigendecomposition, dropping null directions."""
    w, u = np.linalg.eigh(mat)
    wmax = w.max()
    if wmax <= 0:
        raise GaugeSingular("fixed point is not positive semidefinite")
    keep = w > floor * wmax
    return u[:, keep] * np.sqrt(w[keep])


def canonicalize(s: IMPS) -> IMPS:
    """Return a gauge-equivalent IMPS in canonical form.

    Restores the Vidal-gauge orthonormality conditions: with cell tensor
    A = Gamma_cell . lambda_b, sum A A+ = 1 and sum (lambda_b Gamma_cell)+
    (lambda_b Gamma_cell) = 1, then re-splits the internal bond so lambda_a
    holds genuine Schmidt values. Physical data (all pattern RDMs) unchanged.
    """
    d, D = s.d, s.D
    # bare cell Gamma_cell = Gamma_A . lambda_a . Gamma_B (no trailing lambda_b)
    ga_la = np.tensordot(s.gamma_a, np.diag(s.lambda_a), axes=(2, 0))
    cell = np.tensordot(ga_la, s.gamma_b, axes=(2, 1))
    cell = cell.transpose(0, 2, 1, 3).reshape(d * d, D, D)
    a_mats = list(np.tensordot(cell, np.diag(s.lambda_b), axes=(2, 0)))
    b_mats = list(np.tensordot(np.diag(s.lambda_b), cell, axes=(1, 1)).transpose(1, 0, 2))
    _, r = _power_fixed_point(a_mats, "right")
    _, l = _power_fixed_point(b_mats, "left")
    x = _psd_factor(r)                 # r = X X+
    y = _psd_factor(l).conj().T        # l = Y+ Y
    theta = y @ np.diag(s.lambda_b) @ x
    u, sv, vh = sla.svd(theta, full_matrices=False)
    keep = min(D, int((sv > _RANK_FLOOR * sv.max()).sum()))
    if keep == 0:
        raise GaugeSingular("canonicalization produced an empty bond")
    u, sv, vh = u[:, :keep], sv[:keep], vh[:keep]
    norm_b = np.linalg.norm(sv)
    lam_b = np.zeros(D)
    lam_b[:keep] = sv / norm_b
    g_left = vh @ np.linalg.pinv(x, rcond=_PINV_FLOOR)
    g_right = np.linalg.pinv(y, rcond=_PINV_FLOOR) @ u
    cell_new = np.einsum("kl,slm,mq->skq", g_left, cell, g_right) * norm_b
    # normalize so the dominant transfer eigenvalue is exactly 1
    a_new = np.tensordot(cell_new, np.diag(lam_b[:keep]), axes=(2, 0))
    mu, _ = _power_fixed_point(list(a_new), "right")
    cell_new = cell_new / np.sqrt(mu)
    # re-split the internal A-B bond: SVD of lambda_b . cell . lambda_b
    t = np.einsum("l,slr,r->slr", lam_b[:keep], cell_new, lam_b[:keep])
    t = t.reshape(d, d, keep, keep).transpose(2, 0, 1, 3).reshape(keep * d, d * keep)
    u2, sv2, vh2 = sla.svd(t, full_matrices=False)
    keep_a = min(D, int((sv2 > _RANK_FLOOR * sv2.max()).sum()))
    u2, sv2, vh2 = u2[:, :keep_a], sv2[:keep_a], vh2[:keep_a]
    lam_a = np.zeros(D)
    lam_a[:keep_a] = sv2 / np.linalg.norm(sv2)
    inv_b = _pinv_vec(lam_b)
    gamma_a = np.zeros((d, D, D), dtype=CTYPE)
    gamma_a[:, :keep, :keep_a] = np.einsum(
        "l,lik->ilk", inv_b[:keep], u2.reshape(keep, d, keep_a))
    gamma_b = np.zeros((d, D, D), dtype=CTYPE)
    gamma_b[:, :keep_a, :keep] = np.einsum(
        "kjr,r->jkr", vh2.reshape(keep_a, d, keep), inv_b[:keep])
    return IMPS(d=d, D=D, gamma_a=gamma_a, gamma_b=gamma_b,
                lambda_a=lam_a, lambda_b=lam_b)


def half_cut_spectrum(s: IMPS, bond: str = "AB") -> np.ndarray:
    """Schmidt values across the half-infinite cut on the requested bond."""
    if bond == "AB":
        return s.lambda_a.copy()
    if bond == "BA":
        return s.lambda_b.copy()
    raise ValueError(f"bond must be 'AB' or 'BA', got {bond!r}")


def save_imps(s: IMPS, path) -> None:
    """Binary dump: magic "IMPS0001", int64 LE (d, D), then float64 LE payload.

    Payload order: Gamma_A as interleaved (re, im) row-major, Gamma_B likewise,
    lambda_a, lambda_b.
    """
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<qq", s.d, s.D))
        for g in (s.gamma_a, s.gamma_b):
            flat = np.ascontiguousarray(g).astype(CTYPE).view(np.float64)
            fh.write(flat.astype("<f8").tobytes())
        for lam in (s.lambda_a, s.lambda_b):
            fh.write(np.ascontiguousarray(lam).astype("<f8").tobytes())


def load_imps(path) -> IMPS:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ShapeError(f"bad magic {magic!r}; expected {MAGIC!r}")
        d, D = struct.unpack("<qq", fh.read(16))
        n = d * D * D
        gammas = []
        for _ in range(2):
            raw = np.frombuffer(fh.read(16 * n), dtype="<f8").astype(np.float64)
            gammas.append(raw.view(CTYPE).reshape(d, D, D).copy())
        lams = []
        for _ in range(2):
            lams.append(np.frombuffer(fh.read(8 * D), dtype="<f8").astype(np.float64))
    return IMPS(d=int(d), D=int(D), gamma_a=gammas[0], gamma_b=gammas[1],
                lambda_a=lams[0], lambda_b=lams[1])
