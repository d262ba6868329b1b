"""Spin operators, Clebsch-Gordan coefficients, and the tensor basis."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

import spintop as st

# Exact oracle: sympy evaluates the coupling coefficients symbolically.
from sympy import Rational
from sympy import N as sym_N
from sympy.physics.quantum.cg import CG as SymCG


def cg_oracle(j1, m1, j2, m2, J, M):
    r = lambda x: Rational(round(2 * x), 2)
    return float(sym_N(SymCG(r(j1), r(m1), r(j2), r(m2), r(J), r(M)).doit(), 30))


class TestSpinOperators:
    def test_spin_half_jz(self):
        ops = st.build_spin_operators(st.SpinRepresentation(0.5))
        assert np.allclose(ops.jz, np.diag([0.5, -0.5]))

    def test_spin_one_ladder(self):
        # ladder formula sqrt(j(j+1) - m(m+1)) puts sqrt(2) on both slots
        ops = st.build_spin_operators(st.SpinRepresentation(1.0))
        super_diag = np.diag(ops.jplus, k=1)
        assert np.allclose(super_diag, [np.sqrt(2), np.sqrt(2)])
        assert np.abs(np.tril(ops.jplus)).max() == 0.0

    @pytest.mark.parametrize("two_j", range(1, 11))
    def test_algebra_identities(self, two_j):
        j = two_j / 2
        rep = st.SpinRepresentation(j)
        ops = st.build_spin_operators(rep)
        comm = ops.jx @ ops.jy - ops.jy @ ops.jx - 1j * ops.jz
        assert np.abs(comm).max() < 1e-12
        casimir = (
            ops.jx @ ops.jx + ops.jy @ ops.jy + ops.jz @ ops.jz
            - j * (j + 1) * np.eye(rep.dim)
        )
        assert np.abs(casimir).max() < 1e-12
        assert np.allclose(ops.jplus, ops.jx + 1j * ops.jy, atol=1e-15)
        assert np.allclose(ops.jminus, ops.jx - 1j * ops.jy, atol=1e-15)

    def test_rejects_bad_j(self):
        with pytest.raises(ValueError):
            st.SpinRepresentation(0.3)
        with pytest.raises(ValueError):
            st.SpinRepresentation(-1.0)

    def test_from_n_spins(self):
        rep = st.SpinRepresentation.from_n_spins(5)
        assert rep.j == 2.5
        assert rep.dim == 6
        assert rep.n_spins == 5


class TestClebschGordan:
    def test_singlet_values(self):
        # antisymmetric combination fixes the relative sign
        assert st.clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == pytest.approx(
            1 / np.sqrt(2), abs=1e-14
        )
        assert st.clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0) == pytest.approx(
            -1 / np.sqrt(2), abs=1e-14
        )

    def test_stretch_to_singlet(self):
        assert st.clebsch_gordan(1, 1, 1, -1, 0, 0) == pytest.approx(
            1 / np.sqrt(3), abs=1e-14
        )

    def test_magnetic_selection_rule(self):
        assert st.clebsch_gordan(1, 1, 1, 1, 2, 0) == 0.0

    def test_triangle_violation_is_zero(self):
        assert st.clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0

    def test_invalid_arguments_raise(self):
        with pytest.raises(ValueError):
            st.clebsch_gordan(1, 2, 1, 0, 1, 2)  # |m1| > j1
        with pytest.raises(ValueError):
            st.clebsch_gordan(0.4, 0, 1, 0, 1, 0)  # not half-integral
        with pytest.raises(ValueError):
            st.clebsch_gordan(1, 0.5, 1, 0, 1, 0.5)  # j - m not integral

    def test_against_symbolic_oracle(self):
        rng = np.random.default_rng(42)
        spins = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 5.0, 7.5]
        checked = 0
        while checked < 150:
            j1, j2 = rng.choice(spins), rng.choice(spins[:6])
            J = rng.choice(np.arange(abs(j1 - j2), j1 + j2 + 0.5))
            m1 = rng.choice(np.arange(-j1, j1 + 0.5))
            m2 = rng.choice(np.arange(-j2, j2 + 0.5))
            M = m1 + m2
            if abs(M) > J:
                continue
            ours = st.clebsch_gordan(j1, m1, j2, m2, J, M)
            ref = cg_oracle(j1, m1, j2, m2, J, M)
            assert ours == pytest.approx(ref, abs=1e-12), (j1, m1, j2, m2, J, M)
            checked += 1

    def test_large_spin_no_overflow(self):
        # 2j = 60 exercises factorials far beyond double-precision range
        val = st.clebsch_gordan(30, 1, 30, -1, 0, 0)
        ref = cg_oracle(30, 1, 30, -1, 0, 0)
        assert val == pytest.approx(ref, rel=1e-11)


class TestTensorIndex:
    @pytest.mark.parametrize("k,q,expected", [(0, 0, 0), (1, -1, 1), (2, 2, 8)])
    def test_examples(self, k, q, expected):
        assert st.tensor_index(k, q) == expected

    @given(k=hst.integers(0, 40), offset=hst.integers(0, 80))
    @settings(max_examples=200, deadline=None)
    def test_bijection(self, k, offset):
        q = -k + min(offset, 2 * k)
        idx = st.tensor_index(k, q)
        assert st.tensor_index_inverse(idx) == (k, q)

    def test_full_range_is_contiguous(self):
        seen = sorted(
            st.tensor_index(k, q) for k in range(6) for q in range(-k, k + 1)
        )
        assert seen == list(range(36))

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            st.tensor_index(1, 2)
        with pytest.raises(ValueError):
            st.tensor_index(-1, 0)
        with pytest.raises(ValueError):
            st.tensor_index(3, 0, j=1.0)


class TestTensorBasis:
    @pytest.mark.parametrize("two_j", [1, 2, 4, 7, 10])
    def test_identity_tensor(self, two_j):
        rep = st.SpinRepresentation(two_j / 2)
        basis = st.build_tensor_basis(rep)
        expected = np.eye(rep.dim) / np.sqrt(rep.dim)
        assert np.abs(basis.tensor(0, 0) - expected).max() < 1e-14

    def test_spin_half_t10(self):
        basis = st.build_tensor_basis(st.SpinRepresentation(0.5))
        assert np.abs(basis.tensor(1, 0) - np.diag([1, -1]) / np.sqrt(2)).max() < 1e-14

    @pytest.mark.parametrize("two_j", [1, 2, 3, 5, 8, 10])
    def test_orthonormality(self, two_j):
        basis = st.build_tensor_basis(st.SpinRepresentation(two_j / 2))
        assert basis.size == (two_j + 1) ** 2
        assert basis.gram_residual() < 1e-12

    @pytest.mark.parametrize("two_j", [1, 2, 5, 8])
    def test_conjugation_phase(self, two_j):
        rep = st.SpinRepresentation(two_j / 2)
        basis = st.build_tensor_basis(rep)
        worst = 0.0
        for k in range(two_j + 1):
            for q in range(-k, k + 1):
                t = basis.tensor(k, q)
                worst = max(
                    worst,
                    np.abs(t.conj().T - (-1) ** q * basis.tensor(k, -q)).max(),
                )
        assert worst < 1e-12

    @pytest.mark.parametrize("two_j", [2, 4, 6])
    def test_ladder_commutators(self, two_j):
        # [Jz, T] = q T and [J+-, T] = sqrt(k(k+1) - q(q+-1)) T(q+-1)
        rep = st.SpinRepresentation(two_j / 2)
        ops = st.build_spin_operators(rep)
        basis = st.build_tensor_basis(rep)
        for k in range(two_j + 1):
            for q in range(-k, k + 1):
                t = basis.tensor(k, q)
                assert np.abs(ops.jz @ t - t @ ops.jz - q * t).max() < 1e-10
                up = ops.jplus @ t - t @ ops.jplus
                ref = (
                    np.sqrt(k * (k + 1) - q * (q + 1)) * basis.tensor(k, q + 1)
                    if q < k
                    else np.zeros_like(t)
                )
                assert np.abs(up - ref).max() < 1e-10
                down = ops.jminus @ t - t @ ops.jminus
                ref = (
                    np.sqrt(k * (k + 1) - q * (q - 1)) * basis.tensor(k, q - 1)
                    if q > -k
                    else np.zeros_like(t)
                )
                assert np.abs(down - ref).max() < 1e-10

    def test_rank_one_matches_spin_operators(self):
        # triplet is (+J-, +Jz, -J+) times positive normalization constants
        rep = st.SpinRepresentation(1.5)
        ops = st.build_spin_operators(rep)
        basis = st.build_tensor_basis(rep)
        j = rep.j
        c1 = np.sqrt(3 / (2 * j * (j + 1) * (2 * j + 1)))
        c0 = np.sqrt(3 / (j * (j + 1) * (2 * j + 1)))
        assert np.abs(basis.tensor(1, -1) - c1 * ops.jminus).max() < 1e-13
        assert np.abs(basis.tensor(1, 0) - c0 * ops.jz).max() < 1e-13
        assert np.abs(basis.tensor(1, 1) + c1 * ops.jplus).max() < 1e-13

    def test_j_zero_edge_case(self):
        basis = st.build_tensor_basis(st.SpinRepresentation(0.0))
        assert basis.size == 1
        assert np.allclose(basis.tensor(0, 0), [[1.0]])


class TestDecompose:
    def test_maximally_mixed(self, rep4, basis4):
        rho = np.eye(rep4.dim) / rep4.dim
        a = st.decompose(rho, basis4)
        assert a[0] == pytest.approx(1 / np.sqrt(rep4.dim), abs=1e-14)
        assert np.abs(a[1:]).max() < 1e-14

    def test_single_tensor(self, basis4):
        a = st.decompose(basis4.tensor(1, 0), basis4)
        expected = np.zeros(basis4.size)
        expected[st.tensor_index(1, 0)] = 1.0
        assert np.abs(a - expected).max() < 1e-13

    def test_round_trip_and_hermiticity_relation(self):
        rng = np.random.default_rng(7)
        rep = st.SpinRepresentation(2.0)
        basis = st.build_tensor_basis(rep)
        raw = rng.standard_normal((rep.dim, rep.dim)) + 1j * rng.standard_normal(
            (rep.dim, rep.dim)
        )
        rho = raw + raw.conj().T
        a = st.decompose(rho, basis)
        assert np.abs(st.reconstruct(a, basis) - rho).max() < 1e-12
        for k in range(rep.n_spins + 1):
            for q in range(-k, k + 1):
                left = np.conj(a[st.tensor_index(k, q)])
                right = (-1) ** q * a[st.tensor_index(k, -q)]
                assert abs(left - right) < 1e-12

    def test_round_trip_general_complex(self):
        rng = np.random.default_rng(8)
        rep = st.SpinRepresentation(1.5)
        basis = st.build_tensor_basis(rep)
        mat = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert np.abs(st.reconstruct(st.decompose(mat, basis), basis) - mat).max() < 1e-12

    def test_dimension_mismatch(self, basis4):
        with pytest.raises(ValueError):
            st.decompose(np.eye(3), basis4)
        with pytest.raises(ValueError):
            st.reconstruct(np.zeros(7), basis4)
