"""Spin operators, model Hamiltonians, per-bond terms, and imaginary-time gates.

Models covered (couplings are dimensionless; the energy unit is the coupling
written with value 1 in the sweep conventions):

    transverse_ising : H = jx * sum sx.sx           + h * sum sz
    xyz              : H = sum (jx sx.sx + jy sy.sy + delta sz.sz),  jx/jy = j +/- gamma
    xxz              : xyz with gamma = 0
    spin1_ising      : H = jz * sum Sz.Sz           + k * sum (Sx)^2

Single-site terms are split half-and-half onto the two adjacent bonds so that
a uniform two-site gate set reproduces the infinite chain exactly.

All values are immutable after construction and safe to share across workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotHermitian, UnsupportedDimension

HERMITICITY_TOL = 1e-12

MODELS = ("transverse_ising", "xyz", "xxz", "spin1_ising")


@dataclass(frozen=True, eq=False)
class SpinOperators:
    """Hermitian spin matrices for local dimension d (2: Pauli, 3: spin-1)."""

    d: int
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray


def build_spin_operators(d: int) -> SpinOperators:
    """Return the spin matrices for local dimension d in {2, 3}.

    d=2 gives the Pauli matrices (eigenvalues +/-1); d=3 the standard spin-1
    angular-momentum matrices with sz = diag(1, 0, -1).
    """
    if d == 2:
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
        sz = np.array([[1, 0], [0, -1]], dtype=complex)
    elif d == 3:
        s = 1.0 / np.sqrt(2.0)
        sx = s * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
        sy = s * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
        sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    else:
        raise UnsupportedDimension(f"local dimension must be 2 or 3, got {d}")
    return SpinOperators(d=d, sx=sx, sy=sy, sz=sz)


@dataclass(frozen=True)
class ModelSpec:
    """Hamiltonian family plus couplings. Field names match the config keys."""

    model: str
    jx: float = 0.0
    jy: float = 0.0
    delta: float = 0.0
    h: float = 0.0
    gamma: float = 0.0
    j: float = 0.0
    jz: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.model == "transverse_ising" and (self.jy != 0.0 or self.delta != 0.0):
            raise ValueError("transverse_ising requires jy = delta = 0")
        if self.model in ("xyz", "xxz"):
            if self.h != 0.0:
                raise ValueError(f"{self.model} requires h = 0")
            if self.model == "xxz" and self.gamma != 0.0:
                raise ValueError("xxz requires gamma = 0")
            object.__setattr__(self, "jx", self.j + self.gamma)
            object.__setattr__(self, "jy", self.j - self.gamma)

    @property
    def d(self) -> int:
        return 3 if self.model == "spin1_ising" else 2

    @classmethod
    def transverse_ising(cls, jx: float = 1.0, h: float = 0.0) -> "ModelSpec":
        return cls(model="transverse_ising", jx=jx, h=h)

    @classmethod
    def xyz(cls, j: float = 1.0, gamma: float = 0.0, delta: float = 0.0) -> "ModelSpec":
        return cls(model="xyz", j=j, gamma=gamma, delta=delta)

    @classmethod
    def xxz(cls, j: float = 1.0, delta: float = 0.0) -> "ModelSpec":
        return cls(model="xxz", j=j, delta=delta)

    @classmethod
    def spin1_ising(cls, jz: float = 1.0, k: float = 0.0) -> "ModelSpec":
        return cls(model="spin1_ising", jz=jz, k=k)

    def key(self) -> str:
        """Stable string key for caching."""
        vals = ",".join(
            f"{name}={getattr(self, name)!r}"
            for name in ("model", "jx", "jy", "delta", "h", "gamma", "j", "jz", "k")
        )
        return vals


@dataclass(frozen=True, eq=False)
class BondHamiltonian:
    """Two-site bond term (d^2 x d^2) with single-site fields absorbed symmetrically."""

    d: int
    hbond: np.ndarray

    def __post_init__(self):
        err = np.abs(self.hbond - self.hbond.conj().T).max()
        if err > HERMITICITY_TOL:
            raise NotHermitian(f"bond Hamiltonian deviates from Hermitian by {err:.3e}")


def coupling_terms(spec: ModelSpec):
    """Two-site couplings [(strength, op)] and single-site terms [(strength, op)].

    The N-site Hamiltonian is sum_<ij> sum_c c*op_i.op_j + sum_i sum_s s*op_i.
    """
    ops = build_spin_operators(spec.d)
    if spec.model == "transverse_ising":
        return [(spec.jx, ops.sx)], [(spec.h, ops.sz)]
    if spec.model in ("xyz", "xxz"):
        return (
            [(spec.jx, ops.sx), (spec.jy, ops.sy), (spec.delta, ops.sz)],
            [],
        )
    # spin1_ising: K (Sx)^2 read as a per-site crystal-field sum
    return [(spec.jz, ops.sz)], [(spec.k, ops.sx @ ops.sx)]


def build_bond_hamiltonian(spec: ModelSpec) -> BondHamiltonian:
    """Assemble the translationally invariant bond term for the model.

    hbond = sum_c c * op (x) op + 1/2 sum_s s * (op (x) 1 + 1 (x) op), so that
    summing hbond over all bonds of a ring reproduces the full Hamiltonian.
    """
    d = spec.d
    eye = np.eye(d)
    pair, site = coupling_terms(spec)
    hb = np.zeros((d * d, d * d), dtype=complex)
    for c, op in pair:
        hb += c * np.kron(op, op)
    for s, op in site:
        hb += 0.5 * s * (np.kron(op, eye) + np.kron(eye, op))
    return BondHamiltonian(d=d, hbond=hb)


def build_gate(hb: BondHamiltonian, tau: float) -> np.ndarray:
    """exp(-tau * hbond) by eigendecomposition; Hermitian positive definite."""
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    err = np.abs(hb.hbond - hb.hbond.conj().T).max()
    if err > HERMITICITY_TOL:
        raise NotHermitian(f"gate input deviates from Hermitian by {err:.3e}")
    w, v = np.linalg.eigh(hb.hbond)
    gate = (v * np.exp(-tau * w)) @ v.conj().T
    return 0.5 * (gate + gate.conj().T)
