"""Reference states with known entanglement structure (GHZ, W, AKLT).

Explicit vectors for finite N plus exact (i)MPS tensor payloads:
GHZ-iMPS {s+ sx, s- sx} (transfer matrix diag(1,0,0,1), degenerate), AKLT-iMPS
{sz, sqrt2 s+, -sqrt2 s-} (transfer eigenvalues {3,-1,-1,-1}), and the W state
as a site-dependent MPS ({1, s+} in the bulk, {sx, s+ sx} on the last site)
whose ring contraction reproduces the explicit vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, TooLarge
from .imps import CTYPE, IMPS, ring_amplitudes

W_MPS_N_CAP = 16
EXPLICIT_N_CAP = 14

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SP = np.array([[0, 1], [0, 0]], dtype=complex)   # |0><1|
_SM = np.array([[0, 0], [1, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class ReferenceState:
    """Named reference payload: explicit vector and/or MPS tensors."""

    name: str
    n_sites: int | None
    d: int
    vector: np.ndarray | None = None
    tensors: np.ndarray | None = None        # translationally invariant stack
    site_tensors: list | None = None         # site-dependent stacks (W MPS)


def ghz_vector(n: int) -> np.ndarray:
    if n < 2:
        raise ShapeError("GHZ needs N >= 2")
    if 2**n > 2**EXPLICIT_N_CAP:
        raise TooLarge(f"N={n} exceeds explicit-vector cap")
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1.0 / np.sqrt(2.0)
    return psi


def w_vector(n: int) -> np.ndarray:
    if n < 2:
        raise ShapeError("W needs N >= 2")
    if 2**n > 2**EXPLICIT_N_CAP:
        raise TooLarge(f"N={n} exceeds explicit-vector cap")
    psi = np.zeros(2**n, dtype=complex)
    for i in range(n):
        psi[1 << (n - 1 - i)] = 1.0 / np.sqrt(n)
    return psi


def ghz_mps_tensors() -> np.ndarray:
    """{A^0, A^1} = {s+ sx, s- sx}; ring contraction gives unnormalized GHZ."""
    return np.stack([_SP @ _SX, _SM @ _SX]).astype(CTYPE)


def aklt_mps_tensors() -> np.ndarray:
    """{A^0, A^1, A^2} = {sz, sqrt2 s+, -sqrt2 s-} for the spin-1 AKLT state."""
    s2 = np.sqrt(2.0)
    return np.stack([_SZ, s2 * _SP, -s2 * _SM]).astype(CTYPE)


def w_mps_site_tensors(n: int) -> list:
    """Site-dependent W-state MPS; tr(prod A^{i_k}) = 1/sqrt(N) per one-excitation
    string and 0 otherwise."""
    if n < 2:
        raise ShapeError("W needs N >= 2")
    if n > W_MPS_N_CAP:
        raise TooLarge(f"N={n} exceeds W-MPS cap")
    bulk = np.stack([np.eye(2, dtype=complex), _SP]) / n ** (0.5 / n)
    last = np.stack([_SX, _SP @ _SX]) / n ** (0.5 / n)
    return [bulk.astype(CTYPE)] * (n - 1) + [last.astype(CTYPE)]


def aklt_imps(D: int = 2) -> IMPS:
    """AKLT ground state as a canonical two-site-cell IMPS at bond dimension D>=2."""
    if D < 2:
        raise ShapeError("AKLT needs D >= 2")
    tensors = aklt_mps_tensors() / np.sqrt(3.0)  # dominant transfer eigenvalue 1
    lam = np.zeros(D)
    lam[:2] = 1.0 / np.sqrt(2.0)
    gamma = np.zeros((3, D, D), dtype=CTYPE)
    gamma[:, :2, :2] = tensors * np.sqrt(2.0)  # Gamma = A / lambda in Vidal form
    return IMPS(d=3, D=D, gamma_a=gamma, gamma_b=gamma.copy(),
                lambda_a=lam, lambda_b=lam.copy())


def make_reference(name: str, n: int | None = None) -> ReferenceState:
    """Build a reference by name: ghz, w, ghz-imps, aklt-imps, w-mps."""
    key = name.lower()
    if key == "ghz":
        return ReferenceState(name="ghz", n_sites=n, d=2, vector=ghz_vector(n))
    if key == "w":
        return ReferenceState(name="w", n_sites=n, d=2, vector=w_vector(n),
                              site_tensors=w_mps_site_tensors(n) if n <= W_MPS_N_CAP else None)
    if key == "ghz-imps":
        return ReferenceState(name="ghz-imps", n_sites=None, d=2,
                              tensors=ghz_mps_tensors())
    if key == "aklt-imps":
        return ReferenceState(name="aklt-imps", n_sites=None, d=3,
                              tensors=aklt_mps_tensors())
    raise ShapeError(f"unknown reference {name!r}")


def w_mps_vector(n: int) -> np.ndarray:
    """Ring-contract the W MPS to an explicit vector (normalized)."""
    amps = ring_amplitudes(w_mps_site_tensors(n), n)
    return amps.reshape(-1)
