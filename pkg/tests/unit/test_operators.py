"""
Unit tests for the operator layer.
"""

import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from qetlab.exceptions import DimensionError, InvalidOperatorError, UnknownQubitError
from qetlab.hamiltonian import build_hamiltonian, ground_state
from qetlab.operators import (
    IDENTITY,
    PAIR,
    REGISTER,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    QubitLabel,
    commutator,
    dagger,
    density,
    embed,
    embed_pair,
    expectation,
    hermitian_eig,
    is_density_matrix,
    is_unitary,
    ket,
    kron,
    max_abs,
    orthogonal_complement,
    partial_trace,
    permute_operator,
    permute_state,
    require_density_matrix,
    require_unitary,
)

A, B, AN = QubitLabel.A, QubitLabel.B, QubitLabel.AN


def random_hermitian(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (m + m.conj().T) / 2


@pytest.mark.unit
class TestKron:
    """Test Kronecker products."""

    def test_first_factor_is_most_significant(self):
        """kron(X, 1)|00> = |10>."""
        assert np.allclose(kron(SIGMA_X, IDENTITY) @ ket("00"), ket("10"))

    def test_pauli_product_flips_both(self):
        """X (x) X maps |00> to |11>."""
        assert np.allclose(kron(SIGMA_X, SIGMA_X) @ ket("00"), ket("11"))

    def test_three_qubit_result_allowed(self):
        """A 4x4 times 2x2 product has dimension 8."""
        assert kron(kron(IDENTITY, SIGMA_Z), SIGMA_X).shape == (8, 8)

    def test_oversized_product_rejected(self):
        """Products beyond three qubits raise DimensionError."""
        with pytest.raises(DimensionError):
            kron(np.eye(4), np.eye(4))

    def test_non_square_factor_rejected(self):
        """Non-square factors raise DimensionError."""
        with pytest.raises(DimensionError):
            kron(np.ones((2, 3)), IDENTITY)


@pytest.mark.unit
class TestEmbedding:
    """Test placement of operators on labelled qubits."""

    def test_embed_on_pair(self):
        """sigma_z on B of A(x)B equals 1 (x) sigma_z."""
        assert np.allclose(embed(SIGMA_Z, B, PAIR), kron(IDENTITY, SIGMA_Z))

    def test_embed_on_register(self):
        """X on A of [B, An, A] flips the last bit."""
        assert np.allclose(embed(SIGMA_X, A, REGISTER) @ ket("000"), ket("001"))

    def test_distinct_qubits_commute(self):
        """Operators on different qubits commute."""
        x_an = embed(SIGMA_X, AN, REGISTER)
        z_b = embed(SIGMA_Z, B, REGISTER)
        assert max_abs(commutator(x_an, z_b)) == 0.0

    def test_unknown_label_rejected(self):
        """An is not part of A(x)B."""
        with pytest.raises(UnknownQubitError):
            embed(SIGMA_X, AN, PAIR)

    def test_embed_rejects_two_qubit_operator(self):
        """embed only accepts 2x2 operators."""
        with pytest.raises(DimensionError):
            embed(np.eye(4), A, PAIR)

    def test_embed_pair_follows_factor_order(self):
        """A two-qubit operator listed as (A, B) lands on A then B."""
        op = kron(SIGMA_X, SIGMA_Z)
        lifted = embed_pair(op, (A, B), REGISTER)
        expected = embed(SIGMA_X, A, REGISTER) @ embed(SIGMA_Z, B, REGISTER)
        assert np.allclose(lifted, expected)

    def test_permute_operator(self):
        """Reordering A(x)B to B(x)A swaps the factors."""
        assert np.allclose(permute_operator(embed(SIGMA_X, A, PAIR), PAIR, (B, A)), kron(IDENTITY, SIGMA_X))

    def test_permute_state(self):
        """|A=1, B=0> reads as |01> in B(x)A order."""
        assert np.allclose(permute_state(ket("10"), PAIR, (B, A)), ket("01"))

    def test_permute_rejects_different_qubits(self):
        """Both orderings must name the same qubits."""
        with pytest.raises(UnknownQubitError):
            permute_operator(np.eye(4), PAIR, (A, AN))


@pytest.mark.unit
class TestPartialTrace:
    """Test reduced states."""

    def test_product_state(self):
        """Tracing A out of |00> leaves |0><0|."""
        assert np.allclose(partial_trace(density(ket("00")), [B], PAIR), density(ket("0")))

    def test_bell_state_is_maximally_mixed(self):
        """Each half of a Bell state is 1/2."""
        bell = (ket("00") - ket("11")) / math.sqrt(2)
        assert np.allclose(partial_trace(density(bell), [A], PAIR), np.eye(2) / 2)

    def test_result_follows_keep_order(self):
        """Keeping (A, B) of the register yields an A(x)B state."""
        rho = density(ket("011"))  # B=0, An=1, A=1
        assert np.allclose(partial_trace(rho, PAIR, REGISTER), density(ket("10")))

    def test_ground_state_marginal(self, reference_params):
        """rho_B of |g> is diag(F+^2, F-^2) / 2."""
        d = reference_params.derived()
        rho_b = partial_trace(density(ground_state(reference_params)), [B], PAIR)
        assert np.allclose(rho_b, np.diag([d.f_plus**2, d.f_minus**2]) / 2)

    def test_empty_keep_gives_trace(self):
        """Tracing everything leaves the 1x1 trace."""
        assert np.allclose(partial_trace(density(ket("101")), [], REGISTER), [[1.0]])

    def test_unknown_keep_rejected(self):
        """Kept qubits must belong to the system."""
        with pytest.raises(UnknownQubitError):
            partial_trace(density(ket("00")), [AN], PAIR)

    def test_shape_mismatch_rejected(self):
        """A 4x4 state does not describe the register."""
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4) / 4, [B], REGISTER)


@pytest.mark.unit
class TestEigensolver:
    """Test the Jacobi Hermitian eigensolver."""

    def test_pauli_z(self):
        """sigma_z has eigenvalues -1, 1 in ascending order."""
        values, _ = hermitian_eig(SIGMA_Z)
        assert np.allclose(values, [-1.0, 1.0])

    def test_field_in_xz_plane(self):
        """a Z + b X has eigenvalues -/+ sqrt(a^2 + b^2)."""
        values, _ = hermitian_eig(0.3 * SIGMA_Z + 0.4 * SIGMA_X)
        assert np.allclose(values, [-0.5, 0.5])

    def test_complex_entries(self):
        """sigma_y needs the phase-removing rotation."""
        values, vectors = hermitian_eig(SIGMA_Y)
        assert np.allclose(values, [-1.0, 1.0])
        assert np.allclose(SIGMA_Y @ vectors[:, 0], -vectors[:, 0])

    @pytest.mark.parametrize("n,seed", [(2, 0), (4, 1), (8, 2), (8, 3)])
    def test_reconstructs_random_matrix(self, n, seed):
        """V diag(w) V^dagger reproduces the input with orthonormal V."""
        m = random_hermitian(n, seed)
        values, vectors = hermitian_eig(m)
        assert np.all(np.diff(values) >= 0)
        assert max_abs(dagger(vectors) @ vectors - np.eye(n)) < 1e-10
        assert max_abs(vectors @ np.diag(values) @ dagger(vectors) - m) < 1e-9

    def test_matches_numpy(self):
        """Eigenvalues agree with LAPACK."""
        m = random_hermitian(8, 7)
        assert np.allclose(hermitian_eig(m)[0], np.linalg.eigvalsh(m), atol=1e-10)

    def test_zero_matrix(self):
        """The zero matrix returns zeros and the identity basis."""
        values, vectors = hermitian_eig(np.zeros((4, 4)))
        assert np.allclose(values, 0.0)
        assert np.allclose(vectors, np.eye(4))

    def test_hamiltonian_lowest_eigenvalue_is_zero(self, reference_params):
        """The shifted H has ground energy 0."""
        values, _ = hermitian_eig(build_hamiltonian(reference_params).h)
        assert abs(values[0]) < 1e-10

    def test_non_hermitian_rejected(self):
        """Non-Hermitian input raises InvalidOperatorError."""
        with pytest.raises(InvalidOperatorError):
            hermitian_eig(np.array([[0, 1], [0, 0]]))


@pytest.mark.unit
class TestValidityChecks:
    """Test unitary and density-matrix checks and expectations."""

    def test_random_unitary(self):
        """Haar-random unitaries pass the check."""
        u = unitary_group.rvs(4, random_state=np.random.default_rng(3))
        assert is_unitary(u)
        assert require_unitary(u).shape == (4, 4)

    def test_non_unitary_rejected(self):
        """A projector is not unitary."""
        with pytest.raises(InvalidOperatorError):
            require_unitary(np.diag([1.0, 0.0]))

    def test_density_matrix_checks(self):
        """Trace and positivity are both enforced."""
        assert is_density_matrix(np.eye(4) / 4)
        assert not is_density_matrix(np.eye(4))
        assert not is_density_matrix(np.diag([1.5, -0.5]))
        with pytest.raises(InvalidOperatorError):
            require_density_matrix(np.diag([1.5, -0.5]))

    def test_odd_dimension_is_not_a_state(self):
        """A 3x3 matrix is not a qubit state."""
        assert not is_density_matrix(np.eye(3) / 3)
        with pytest.raises(DimensionError):
            require_density_matrix(np.eye(3) / 3)

    def test_expectation(self):
        """<0|Z|0> = 1 and <+|X|+> = 1."""
        plus = (ket("0") + ket("1")) / math.sqrt(2)
        assert expectation(density(ket("0")), SIGMA_Z) == pytest.approx(1.0)
        assert expectation(density(plus), SIGMA_X) == pytest.approx(1.0)

    def test_expectation_shape_mismatch(self):
        """State and observable must share a shape."""
        with pytest.raises(DimensionError):
            expectation(np.eye(2) / 2, np.eye(4))

    def test_expectation_imaginary_rejected(self):
        """A complex expectation value means a non-Hermitian observable."""
        plus = (ket("0") + ket("1")) / math.sqrt(2)
        with pytest.raises(InvalidOperatorError):
            expectation(density(plus), np.array([[0, 1j], [0, 0]]))

    def test_orthogonal_complement(self):
        """(a, b) -> (-b*, a*) is orthogonal to (a, b)."""
        v = np.array([0.6, 0.8j])
        assert abs(np.vdot(v, orthogonal_complement(v))) < 1e-15

    def test_ket_rejects_bad_label(self):
        """Only 0/1 strings name basis states."""
        with pytest.raises(DimensionError):
            ket("012")
