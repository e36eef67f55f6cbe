import math

import numpy as np
import pytest

from qwork.spectral import (
    DensityMatrix,
    HermitianOperator,
    UnitaryMatrix,
    eigendecompose,
    random_hamiltonian,
)
from qwork.work_povm import (
    QuenchProtocol,
    WorkDistribution,
    exact_work_distribution,
    exponential_work_average,
    jarzynski_exact,
    kraus_operators,
    post_measurement_state,
)

from conftest import (
    degenerate_gap_protocol,
    gap_change_protocol,
    qubit_flip_protocol,
    random_density_matrix,
    random_protocol,
    thermal_input,
)


def qubit_flip_masses(beta):
    """Hand evaluation of the flip quench: all mass moves across the gap."""
    z = 2 * math.cosh(beta / 2)
    return {-1.0: math.exp(-beta / 2) / z, +1.0: math.exp(beta / 2) / z}


class TestProtocolValidation:
    def test_dim_mismatch(self):
        h2 = HermitianOperator(np.diag([-0.4, 0.4]))
        h3 = HermitianOperator(np.diag([-0.4, 0.0, 0.4]))
        with pytest.raises(ValueError, match="dimension"):
            QuenchProtocol(h2, h3, UnitaryMatrix.identity(2), 1.0)

    def test_out_of_band_spectrum_rejected(self):
        wide = HermitianOperator(np.diag([-0.8, 0.8]))
        ok = HermitianOperator(np.diag([-0.4, 0.4]))
        with pytest.raises(ValueError, match="h_initial"):
            QuenchProtocol(wide, ok, UnitaryMatrix.identity(2), 1.0)


class TestExactWorkDistribution:
    def test_trivial_quench_is_point_mass_at_zero(self):
        h = random_hamiltonian(6, 1.0, 2)
        protocol = QuenchProtocol(h, h, UnitaryMatrix.identity(6), 1.0)
        dist = exact_work_distribution(protocol, thermal_input(protocol, 1.3))
        assert dist.support_size() == 1
        assert abs(dist.ws[0]) < 1e-12
        assert dist.ps[0] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("beta", [0.0, 0.7, 2.5])
    def test_qubit_flip_masses(self, beta):
        protocol = qubit_flip_protocol()
        dist = exact_work_distribution(protocol, thermal_input(protocol, beta))
        expected = qubit_flip_masses(beta)
        assert np.allclose(dist.ws, sorted(expected), atol=1e-12)
        for w, p in dist.points:
            assert p == pytest.approx(expected[round(w)], abs=1e-12)

    def test_random_three_qubit_invariants(self):
        protocol = random_protocol(8, 1.0, 31)
        dist = exact_work_distribution(protocol, thermal_input(protocol, 1.0))
        assert abs(dist.ps.sum() - 1.0) < 1e-10
        assert dist.support_size() <= 8**2
        assert np.all(np.diff(dist.ws) > protocol.merge_tol)

    def test_dimension_mismatch_rejected(self):
        protocol = qubit_flip_protocol()
        with pytest.raises(ValueError, match="dim"):
            exact_work_distribution(protocol, DensityMatrix(np.eye(3) / 3))

    def test_gauge_independence_under_degeneracy(self):
        # identical physics, eigensolver gauge scrambled by a reshuffled basis
        protocol = degenerate_gap_protocol()
        rho = thermal_input(protocol, 0.9)
        base = exact_work_distribution(protocol, rho)
        rng = np.random.default_rng(12)
        g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        q, _ = np.linalg.qr(g)
        h_rot = HermitianOperator(q @ protocol.h_initial.entries @ q.conj().T)
        drive_rot = UnitaryMatrix(q @ protocol.drive.entries @ q.conj().T)
        rho_rot = DensityMatrix(q @ rho.entries @ q.conj().T)
        rotated = exact_work_distribution(
            QuenchProtocol(h_rot, h_rot, drive_rot, 2.0), rho_rot
        )
        assert np.allclose(base.ws, rotated.ws, atol=1e-9)
        assert np.allclose(base.ps, rotated.ps, atol=1e-9)


class TestWorkDistributionType:
    def test_rejects_unsorted_and_nonpositive(self):
        with pytest.raises(ValueError, match="ascending"):
            WorkDistribution([1.0, 0.0], [0.5, 0.5])
        with pytest.raises(ValueError, match="positive"):
            WorkDistribution([0.0, 1.0], [1.0, 0.0])
        with pytest.raises(ValueError, match="sum"):
            WorkDistribution([0.0, 1.0], [0.5, 0.6])

    def test_csv_round_trip(self):
        dist = WorkDistribution([-1.0, 1.0], [0.25, 0.75])
        again = WorkDistribution.from_csv(dist.to_csv())
        assert np.array_equal(again.ws, dist.ws)
        assert np.array_equal(again.ps, dist.ps)

    def test_json_round_trip(self):
        dist = WorkDistribution([-0.5, 0.25], [0.5, 0.5])
        again = WorkDistribution.from_json(dist.to_json())
        assert np.array_equal(again.ws, dist.ws)


class TestKrausOperators:
    def test_qubit_flip_structure(self):
        protocol = qubit_flip_protocol()
        kset = kraus_operators(protocol)
        assert np.allclose(kset.ws, [-1.0, 1.0], atol=1e-12)
        dec0 = eigendecompose(protocol.h_initial)
        ground, excited = dec0.eigenvectors[:, 0], dec0.eigenvectors[:, 1]
        a_plus = kset.operators[1]
        assert np.allclose(a_plus, np.outer(excited, ground.conj()), atol=1e-12)
        a_minus = kset.operators[0]
        assert np.allclose(a_minus, np.outer(ground, excited.conj()), atol=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_completeness(self, seed):
        dim = int(np.random.default_rng(seed).integers(2, 17))
        protocol = random_protocol(dim, 1.0, seed)
        kset = kraus_operators(protocol)
        total = sum(kset.povm_element(k) for k in range(kset.ws.size))
        assert np.abs(total - np.eye(dim)).max() < 1e-10

    def test_degenerate_gaps_give_higher_rank(self):
        kset = kraus_operators(degenerate_gap_protocol())
        ranks = {
            round(w): np.linalg.matrix_rank(a, tol=1e-10)
            for w, a in zip(kset.ws, kset.operators)
        }
        assert ranks[1] == 2  # two level pairs share the +1 gap
        assert ranks[0] == 3
        assert ranks[2] == 1

    def test_probabilities_match_distribution_for_any_state(self):
        for seed, protocol in [
            (0, random_protocol(5, 1.0, 40)),
            (1, degenerate_gap_protocol()),
            (2, qubit_flip_protocol()),
        ]:
            rho = random_density_matrix(protocol.dim, seed)
            dist = exact_work_distribution(protocol, rho)
            kset = kraus_operators(protocol)
            for w, p in dist.points:
                k = int(np.argmin(np.abs(kset.ws - w)))
                assert abs(kset.ws[k] - w) < protocol.merge_tol
                kraus_prob = float(np.trace(rho.entries @ kset.povm_element(k)).real)
                assert kraus_prob == pytest.approx(p, abs=1e-10)


class TestPostMeasurementState:
    def test_qubit_flip_projects_onto_excited_level(self):
        beta = 1.1
        protocol = qubit_flip_protocol()
        rho_w, prob = post_measurement_state(protocol, thermal_input(protocol, beta), 1.0)
        assert np.allclose(rho_w.entries, np.diag([0.0, 1.0]), atol=1e-12)
        assert prob == pytest.approx(math.exp(beta / 2) / (2 * math.cosh(beta / 2)), abs=1e-12)

    def test_degenerate_gap_keeps_coherence_in_final_basis(self):
        protocol = degenerate_gap_protocol()
        dec0 = eigendecompose(protocol.h_initial)
        psi = (dec0.eigenvectors[:, 0] + dec0.eigenvectors[:, 1]) / np.sqrt(2)
        rho_w, _ = post_measurement_state(protocol, DensityMatrix.pure(psi), 1.0)
        dec1 = eigendecompose(protocol.h_final)
        in_final = dec1.eigenvectors.conj().T @ rho_w.entries @ dec1.eigenvectors
        off = in_final - np.diag(np.diag(in_final))
        assert np.abs(off).max() > 1e-3  # genuinely not a final-energy eigenstate

    def test_trivial_quench_leaves_state_alone(self):
        h = random_hamiltonian(4, 1.0, 8)  # nondegenerate spectrum
        protocol = QuenchProtocol(h, h, UnitaryMatrix.identity(4), 1.0)
        rho = thermal_input(protocol, 0.8)
        rho_w, prob = post_measurement_state(protocol, rho, 0.0)
        assert prob == pytest.approx(1.0, abs=1e-12)
        assert np.abs(rho_w.entries - rho.entries).max() < 1e-10

    def test_unrealizable_gap_rejected(self):
        with pytest.raises(ValueError, match="not a realizable gap"):
            post_measurement_state(
                qubit_flip_protocol(), thermal_input(qubit_flip_protocol(), 1.0), 0.37
            )

    def test_zero_probability_outcome_rejected(self):
        protocol = qubit_flip_protocol()
        dec = eigendecompose(protocol.h_initial)
        ground = DensityMatrix.pure(dec.eigenvectors[:, 0])
        with pytest.raises(ValueError, match="zero-probability"):
            post_measurement_state(protocol, ground, -1.0)  # flip down never happens


class TestJarzynskiExact:
    def test_identity_quench(self):
        h = random_hamiltonian(4, 1.0, 21)
        protocol = QuenchProtocol(h, h, UnitaryMatrix.identity(4), 1.0)
        lhs, rhs, delta_f = jarzynski_exact(protocol, 2.0)
        assert lhs == pytest.approx(1.0, rel=1e-12)
        assert rhs == pytest.approx(1.0, rel=1e-12)
        assert abs(delta_f) < 1e-12

    @pytest.mark.parametrize("beta", [0.2, 1.0, 5.0])
    def test_qubit_flip_average_is_unity(self, beta):
        lhs, rhs, delta_f = jarzynski_exact(qubit_flip_protocol(), beta)
        assert lhs == pytest.approx(1.0, rel=1e-12)
        assert abs(delta_f) < 1e-12

    def test_gap_change_partition_ratio(self):
        lhs, rhs, delta_f = jarzynski_exact(gap_change_protocol(), 1.0)
        expected = math.cosh(1.0) / math.cosh(0.5)
        assert rhs == pytest.approx(expected, rel=1e-12)
        assert lhs == pytest.approx(expected, rel=1e-10)
        assert delta_f == pytest.approx(-math.log(expected), abs=1e-12)
        assert delta_f == pytest.approx(-0.3137, abs=5e-5)

    def test_invalid_beta(self):
        with pytest.raises(ValueError):
            jarzynski_exact(qubit_flip_protocol(), 0.0)


class TestDistributionProperties:
    @pytest.mark.parametrize("seed,beta_e", [(0, 0.1), (1, 1.0), (2, 10.0)])
    def test_jarzynski_identity_random_protocols(self, seed, beta_e):
        e_max = 1.0
        protocol = random_protocol(8, e_max, 100 + seed)
        lhs, rhs, _ = jarzynski_exact(protocol, beta_e / e_max)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    @pytest.mark.parametrize("seed", range(4))
    def test_first_moment_matches_trace_formula(self, seed):
        protocol = random_protocol(6, 1.0, 200 + seed)
        rho = thermal_input(protocol, 1.0)
        dist = exact_work_distribution(protocol, rho)
        mean = float(np.sum(dist.ws * dist.ps))
        u = protocol.drive.entries
        evolved = u @ rho.entries @ u.conj().T
        oracle = float(
            np.trace(evolved @ protocol.h_final.entries).real
            - np.trace(rho.entries @ protocol.h_initial.entries).real
        )
        assert mean == pytest.approx(oracle, abs=1e-9)

    def test_exponential_average_stable_at_large_beta(self):
        dist = WorkDistribution([-1.0, 1.0], [0.5, 0.5])
        val = exponential_work_average(dist, 500.0)
        assert np.isfinite(val)
        assert val == pytest.approx(0.5 * math.exp(500.0), rel=1e-12)
