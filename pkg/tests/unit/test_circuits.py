"""
Unit tests for the gates of the fully unitary protocol.
"""

import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from qetlab import circuits
from qetlab.circuits import (
    PHI_MINUS,
    PSI_MINUS,
    GateOrdering,
    build_circuit,
    controlled_blocks,
    resolve_ordering,
    swap,
    u_ana,
    u_ban,
    u_prep,
    u_prep_pair,
    y_theta,
)
from qetlab.exceptions import OrderingResolutionError
from qetlab.hamiltonian import ground_state
from qetlab.operators import (
    IDENTITY,
    PAIR,
    REGISTER,
    QubitLabel,
    density,
    embed_pair,
    hermitian_eig,
    is_unitary,
    ket,
    kron,
    max_abs,
    partial_trace,
)
from qetlab.protocols import conditional_operator, conditional_state
from tests.factories import ModelParamsFactory

A, B, AN = QubitLabel.A, QubitLabel.B, QubitLabel.AN


@pytest.fixture
def fresh_ordering():
    """Run with an empty ordering cache and leave it empty."""
    circuits.resolve_ordering.cache_clear()
    yield
    circuits.resolve_ordering.cache_clear()


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    return abs(np.vdot(a, b))


@pytest.mark.unit
class TestPreparation:
    """Test the ground-state preparation."""

    def test_y_theta_is_unitary(self):
        """Y(theta) is a real rotation on random draws."""
        for p in ModelParamsFactory.build_batch(20):
            assert is_unitary(y_theta(p))

    def test_pair_preparation_gives_ground_state(self):
        """U_prep|00> = -|g> on A(x)B."""
        for p in ModelParamsFactory.build_batch(20):
            psi = u_prep_pair(p) @ ket("00")
            assert np.allclose(psi, -ground_state(p))

    def test_register_preparation(self):
        """The An-mediated preparation leaves |g> on A(x)B and An in |0>."""
        for p in ModelParamsFactory.build_batch(20):
            rho = density(u_prep(p) @ ket("000"))
            assert max_abs(partial_trace(rho, PAIR, REGISTER) - density(ground_state(p))) < 1e-12
            assert max_abs(partial_trace(rho, [AN], REGISTER) - density(ket("0"))) < 1e-12

    def test_swap_exchanges_qubits(self):
        """SWAP_{B,An}|1, 0, 0> = |0, 1, 0> on the register."""
        assert np.allclose(swap(B, AN, REGISTER) @ ket("100"), ket("010"))


@pytest.mark.unit
class TestAncillaCoupling:
    """Test U_AnA."""

    def test_maps_computational_basis_to_bell_states(self):
        """U_AnA|00> = Phi^- and U_AnA|01> = Psi^- in An(x)A order."""
        u = u_ana()
        assert is_unitary(u)
        assert np.allclose(u @ ket("00"), PHI_MINUS)
        assert np.allclose(u @ ket("01"), PSI_MINUS)

    def test_returns_copy(self):
        """Callers cannot corrupt the stored gate."""
        u = u_ana()
        u[0, 0] = 5.0
        assert u_ana()[0, 0] == pytest.approx(1 / math.sqrt(2))

    def test_state_after_ancilla_coupling(self, reference_params):
        """U_AnA U_prep|000> = -(F+|0>Phi^- - F-|1>Psi^-)/sqrt2 over [B, An, A]."""
        d = reference_params.derived()
        c = build_circuit(reference_params)
        stages = {s.name: s.unitary for s in c.stages()}
        psi = stages["U_AnA"] @ stages["U_prep"] @ ket("000")
        expected = (d.f_plus * np.kron(ket("0"), PHI_MINUS) - d.f_minus * np.kron(ket("1"), PSI_MINUS)) / math.sqrt(2)
        assert overlap(expected, psi) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.unit
class TestOrderingResolution:
    """Test the choice of factor order for the printed gates."""

    def test_resolved_ordering(self):
        """U_AnA acts on (An, A) and U_BAn on (B, An)."""
        assert resolve_ordering() == GateOrdering(ana=(AN, A), ban=(B, AN))

    def test_describe(self):
        """The description names both orderings."""
        text = resolve_ordering().describe()
        assert "U_AnA" in text and "U_BAn" in text

    def test_corrupted_gate_is_rejected(self, fresh_ordering, mocker):
        """A U_AnA that misses Phi^- leaves no admissible ordering."""
        bad = u_ana()
        bad[0, 0] += 0.1
        mocker.patch("qetlab.circuits.u_ana", return_value=bad)
        with pytest.raises(OrderingResolutionError):
            resolve_ordering()

    def test_result_is_cached(self, fresh_ordering, mocker):
        """The ordering is resolved once per process."""
        spy = mocker.spy(circuits, "u_ana")
        first = resolve_ordering()
        second = resolve_ordering()
        assert first is second
        assert spy.call_count == 1


@pytest.mark.unit
class TestExtractionGate:
    """Test U_BAn and its conditional structure."""

    def test_gates_are_unitary(self):
        """U_RotV, U_diag and U_BAn are unitary on random draws."""
        for p in ModelParamsFactory.build_batch(20):
            gate = u_ban(p)
            for u in (gate.rot_v, gate.diag, gate.matrix):
                assert is_unitary(u)

    def test_controlled_in_x_basis(self, reference_params):
        """U_BAn is conditioned on the An sigma_x eigenbasis."""
        decomposition = u_ban(reference_params).decomposition
        assert decomposition.basis == "X"
        assert set(decomposition.blocks) == {+1, -1}

    def test_blocks_reassemble(self):
        """sum_mu U_B(mu) (x) |w_mu><v_mu| reproduces U_BAn."""
        for p in ModelParamsFactory.build_batch(20):
            gate = u_ban(p)
            assert max_abs(gate.decomposition.reconstruct() - gate.matrix) < 1e-9
            for block in gate.decomposition.blocks.values():
                assert is_unitary(block, 1e-9)

    @pytest.mark.parametrize("mu", [+1, -1])
    def test_blocks_rotate_onto_conditional_ground_state(self, mu):
        """U_B(mu) sends the post-measurement B state to the ground of H_B + V given mu."""
        for p in ModelParamsFactory.build_batch(10):
            if p.kappa < 1e-3:
                continue
            block = u_ban(p).decomposition.blocks[mu]
            _, vectors = hermitian_eig(conditional_operator(p, mu))
            target = vectors[:, 0]
            assert overlap(target, block @ conditional_state(p, mu)) == pytest.approx(1.0, abs=1e-9)

    def test_product_gate_is_controlled_in_z_basis(self):
        """U (x) 1 factors in the first basis tried."""
        u = unitary_group.rvs(2, random_state=np.random.default_rng(5))
        decomposition = controlled_blocks(kron(u, IDENTITY))
        assert decomposition.basis == "Z"
        for block in decomposition.blocks.values():
            assert np.allclose(block, u)

    def test_swap_is_not_controlled(self):
        """SWAP moves B into the ancilla and has no conditional form."""
        with pytest.raises(OrderingResolutionError):
            controlled_blocks(swap(B, AN, (B, AN)))


@pytest.mark.unit
class TestCircuit:
    """Test the assembled circuit."""

    def test_stage_order(self, reference_params):
        """Gates run U_prep, U_AnA, U_BAn."""
        c = build_circuit(reference_params)
        assert [s.name for s in c.stages()] == ["U_prep", "U_AnA", "U_BAn"]
        assert [s.name for s in c.stages(include_prep=False)] == ["U_AnA", "U_BAn"]

    def test_stages_are_register_unitaries(self, reference_params):
        """Every stage is an 8x8 unitary."""
        for stage in build_circuit(reference_params).stages():
            assert stage.unitary.shape == (8, 8)
            assert is_unitary(stage.unitary)

    def test_ban_stage_uses_resolved_ordering(self, reference_params):
        """The U_BAn stage is the printed matrix placed on (B, An)."""
        c = build_circuit(reference_params)
        stages = {s.name: s.unitary for s in c.stages()}
        assert np.allclose(stages["U_BAn"], embed_pair(c.u_ban, (B, AN), REGISTER))
