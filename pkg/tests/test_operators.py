import numpy as np
import pytest
import scipy.linalg as sla

from entchain import (
    ModelSpec,
    NotHermitian,
    UnsupportedDimension,
    build_bond_hamiltonian,
    build_gate,
    build_spin_operators,
)
from entchain.operators import BondHamiltonian


def test_pauli_matrices_explicit():
    ops = build_spin_operators(2)
    assert np.array_equal(ops.sz, np.diag([1.0, -1.0]))
    assert np.array_equal(ops.sx, np.array([[0, 1], [1, 0]]))
    assert np.array_equal(ops.sy, np.array([[0, -1j], [1j, 0]]))


def test_pauli_commutator():
    ops = build_spin_operators(2)
    comm = ops.sx @ ops.sy - ops.sy @ ops.sx
    assert np.abs(comm - 2j * ops.sz).max() == 0.0


def test_spin1_casimir():
    # sx^2 + sy^2 + sz^2 = S(S+1) I = 2 I for the standard spin-1 matrices
    ops = build_spin_operators(3)
    total = ops.sx @ ops.sx + ops.sy @ ops.sy + ops.sz @ ops.sz
    assert np.abs(total - 2.0 * np.eye(3)).max() < 1e-14
    assert np.array_equal(ops.sz, np.diag([1.0, 0.0, -1.0]))


@pytest.mark.parametrize("d", [1, 4, 5])
def test_unsupported_dimension(d):
    with pytest.raises(UnsupportedDimension):
        build_spin_operators(d)


@pytest.mark.parametrize("d", [2, 3])
def test_operators_hermitian(d):
    ops = build_spin_operators(d)
    for mat in (ops.sx, ops.sy, ops.sz):
        assert np.abs(mat - mat.conj().T).max() == 0.0


class TestModelSpec:
    def test_ising_invariant(self):
        spec = ModelSpec.transverse_ising(jx=1.0, h=2.0)
        assert spec.jy == 0.0 and spec.delta == 0.0 and spec.d == 2
        with pytest.raises(ValueError):
            ModelSpec(model="transverse_ising", jx=1.0, jy=0.5)

    def test_xyz_derives_couplings(self):
        spec = ModelSpec.xyz(j=1.0, gamma=0.5, delta=0.3)
        assert spec.jx == 1.5 and spec.jy == 0.5
        with pytest.raises(ValueError):
            ModelSpec(model="xyz", j=1.0, h=0.2)

    def test_xxz_is_gamma_zero(self):
        spec = ModelSpec.xxz(j=1.0, delta=0.7)
        assert spec.jx == spec.jy == 1.0
        with pytest.raises(ValueError):
            ModelSpec(model="xxz", j=1.0, gamma=0.1)

    def test_spin1_dimension(self):
        assert ModelSpec.spin1_ising(jz=1.0, k=2.0).d == 3

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            ModelSpec(model="heisenberg3d")


class TestBondHamiltonian:
    def test_ising_no_field(self):
        hb = build_bond_hamiltonian(ModelSpec.transverse_ising(jx=1.0, h=0.0))
        ops = build_spin_operators(2)
        assert np.abs(hb.hbond - np.kron(ops.sx, ops.sx)).max() == 0.0

    def test_ising_field_split_half_half(self):
        hb = build_bond_hamiltonian(ModelSpec.transverse_ising(jx=1.0, h=2.0))
        ops = build_spin_operators(2)
        expected = np.kron(ops.sx, ops.sx) + 1.0 * (
            np.kron(ops.sz, np.eye(2)) + np.kron(np.eye(2), ops.sz))
        assert np.abs(hb.hbond - expected).max() < 1e-15

    def test_spin1_spectrum_vs_dense_oracle(self):
        # independent construction path: explicit 9x9 from scratch
        hb = build_bond_hamiltonian(ModelSpec.spin1_ising(jz=1.0, k=2.0))
        s = 1 / np.sqrt(2)
        sx = s * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
        sz = np.diag([1.0, 0.0, -1.0])
        sx2 = sx @ sx
        oracle = np.kron(sz, sz) + 1.0 * (np.kron(sx2, np.eye(3)) +
                                          np.kron(np.eye(3), sx2))
        assert np.abs(np.linalg.eigvalsh(hb.hbond) -
                      np.linalg.eigvalsh(oracle)).max() < 1e-12

    @pytest.mark.parametrize("spec", [
        ModelSpec.transverse_ising(jx=1.0, h=1.3),
        ModelSpec.xyz(j=1.0, gamma=0.5, delta=0.6),
        ModelSpec.xxz(j=1.0, delta=0.4),
        ModelSpec.spin1_ising(jz=1.0, k=2.0),
    ])
    def test_hermitian_across_models(self, spec):
        hb = build_bond_hamiltonian(spec)
        assert np.abs(hb.hbond - hb.hbond.conj().T).max() < 1e-12


class TestGate:
    def test_tau_zero_is_identity(self):
        hb = build_bond_hamiltonian(ModelSpec.transverse_ising(jx=1.0, h=1.5))
        assert np.abs(build_gate(hb, 0.0) - np.eye(4)).max() < 1e-15

    def test_ising_gate_eigenvalues(self):
        # h=0: hbond = sx x sx with eigenvalues +/-1; gate eigenvalues e^{-/+tau}
        hb = build_bond_hamiltonian(ModelSpec.transverse_ising(jx=1.0, h=0.0))
        gate = build_gate(hb, 0.5)
        w = np.sort(np.linalg.eigvalsh(gate))
        expected = np.sort([np.exp(-0.5)] * 2 + [np.exp(0.5)] * 2)
        assert np.abs(w - expected).max() < 1e-12

    def test_gate_inverse_identity(self):
        hb = build_bond_hamiltonian(ModelSpec.xyz(j=1.0, gamma=0.5, delta=0.6))
        gate = build_gate(hb, 0.01)
        assert np.abs(gate @ sla.expm(0.01 * hb.hbond) - np.eye(4)).max() < 1e-12

    @pytest.mark.parametrize("spec", [
        ModelSpec.transverse_ising(jx=1.0, h=1.5),
        ModelSpec.spin1_ising(jz=1.0, k=1.0),
    ])
    def test_semigroup(self, spec):
        hb = build_bond_hamiltonian(spec)
        lhs = build_gate(hb, 0.3) @ build_gate(hb, 0.2)
        assert np.abs(lhs - build_gate(hb, 0.5)).max() < 1e-10

    def test_positive_definite(self):
        hb = build_bond_hamiltonian(ModelSpec.spin1_ising(jz=1.0, k=2.0))
        gate = build_gate(hb, 0.37)
        assert np.linalg.eigvalsh(gate).min() > 0

    def test_non_hermitian_rejected(self):
        bad = np.eye(4, dtype=complex)
        bad[0, 1] = 1e-6
        with pytest.raises(NotHermitian):
            BondHamiltonian(d=2, hbond=bad)
        ok = BondHamiltonian(d=2, hbond=np.eye(4, dtype=complex))
        object.__setattr__(ok, "hbond", bad)
        with pytest.raises(NotHermitian):
            build_gate(ok, 0.1)

    def test_negative_tau_rejected(self):
        hb = build_bond_hamiltonian(ModelSpec.transverse_ising(jx=1.0, h=1.0))
        with pytest.raises(ValueError):
            build_gate(hb, -0.1)
