"""Dense single-excitation oracle: dual-route unitaries and evolution."""

import math

import numpy as np
import pytest
import scipy.sparse

from bicsim import ModelParams, oracle
from bicsim.errors import NumericalFailure


def make(**kw):
    base = dict(
        dt=0.04,
        ell=10,
        phi=math.pi,
        Gamma_band=2.0,
        n_bins=100,
        steps=90,
        record_every=30,
    )
    base.update(kw)
    return ModelParams(**base)


class TestSectorUnitary:
    @pytest.mark.parametrize("detuned", [False, True])
    def test_extracted_is_unitary(self, detuned):
        p = make(delta_omega=4.0)
        u = oracle.sector_unitary(p, detuned)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(6), atol=1e-13)

    @pytest.mark.parametrize("detuned", [False, True])
    @pytest.mark.parametrize("phi", [math.pi, 1.3])
    def test_extracted_matches_direct(self, detuned, phi):
        # Two independent constructions: a restriction of the shared
        # 64x64 collision gate vs exp(-iM) of a hand-written 6x6
        # generator.  They must agree to near machine precision.
        p = make(phi=phi, delta_omega=4.0)
        a = oracle.sector_unitary(p, detuned)
        b = oracle.sector_unitary_direct(p, detuned)
        assert np.max(np.abs(a - b)) < 1e-13

    def test_coupling_scales_respected(self):
        p = make()
        u = oracle.sector_unitary(p, False, 1.0, 0.0)
        # Qubit 2 decoupled: column 1 is the bare basis vector.
        np.testing.assert_allclose(u[:, 1], np.eye(6)[:, 1], atol=1e-14)
        assert abs(u[2, 0]) > 1e-3  # qubit 1 still radiates

    def test_direct_generator_hermitian(self):
        m = oracle.sector_generator_direct(make(), False)
        np.testing.assert_allclose(m, m.conj().T, atol=1e-15)

    def test_direct_detuned_requires_delta(self):
        with pytest.raises(ValueError):
            oracle.sector_generator_direct(make(), True)


class TestSectorStepMatrix:
    def test_identity_outside_active_block(self):
        p = make(ell=4, n_bins=20, steps=16)
        n = 7
        mat = oracle.sector_step_matrix(p, n, detuned=False)
        assert scipy.sparse.issparse(mat)
        dense = mat.toarray()
        dim = dense.shape[0]
        np.testing.assert_allclose(
            dense.conj().T @ dense, np.eye(dim), atol=1e-13
        )
        probe = oracle.ExactState(
            np.zeros(dim, dtype=np.complex128), p.m_min, p.n_sites
        )
        active = set(oracle._active_indices(probe, n, p.ell).tolist())
        for i in range(dim):
            for j in range(dim):
                if i in active and j in active:
                    continue
                want = 1.0 if i == j else 0.0
                assert dense[i, j] == pytest.approx(want, abs=1e-15)

    def test_matches_sector_unitary_block(self):
        p = make(ell=4, n_bins=20, steps=16)
        n = 5
        mat = oracle.sector_step_matrix(p, n, detuned=False).toarray()
        probe = oracle.ExactState(
            np.zeros(mat.shape[0], dtype=np.complex128), p.m_min, p.n_sites
        )
        idx = oracle._active_indices(probe, n, p.ell)
        u6 = oracle.sector_unitary(p, False)
        np.testing.assert_allclose(mat[np.ix_(idx, idx)], u6, atol=1e-15)


class TestExactState:
    def test_index_bounds(self):
        p = make()
        state = oracle.exact_input_state(p)
        with pytest.raises(IndexError):
            state.idx_r(p.m_min - 1)
        with pytest.raises(IndexError):
            state.idx_r(p.m_max + 1)

    def test_input_state_is_normalized(self):
        state = oracle.exact_input_state(make())
        assert state.norm() == pytest.approx(1.0, abs=1e-12)

    def test_relaxation_variants(self):
        p = make(mode="relaxation")
        q = oracle.exact_relaxation_state(p, "qubit1")
        assert q.amplitudes[0] == 1.0 and q.amplitudes[1] == 0.0
        bp = oracle.exact_relaxation_state(p, "bell_plus")
        bm = oracle.exact_relaxation_state(p, "bell_minus")
        s = 1.0 / math.sqrt(2.0)
        assert bp.amplitudes[0] == pytest.approx(s)
        assert bp.amplitudes[1] == pytest.approx(s)
        assert bm.amplitudes[1] == pytest.approx(-s)
        with pytest.raises(ValueError):
            oracle.exact_relaxation_state(p, "qubit3")

    def test_build_initial_dispatches_on_mode(self):
        scatter = oracle.build_initial_exact(make())
        assert abs(scatter.amplitudes[0]) == 0.0  # emitter unexcited
        relax = oracle.build_initial_exact(make(mode="relaxation"))
        assert relax.amplitudes[0] == 1.0


class TestEvolveExact:
    def test_variants_agree(self):
        p = make()
        rec_a, fin_a = oracle.evolve_exact(p, variant="extracted")
        rec_b, fin_b = oracle.evolve_exact(p, variant="direct")
        np.testing.assert_allclose(
            fin_a.amplitudes, fin_b.amplitudes, atol=1e-12
        )
        assert len(rec_a) == len(rec_b)
        for ra, rb in zip(rec_a, rec_b):
            assert ra.step == rb.step
            assert ra.bell_plus == pytest.approx(rb.bell_plus, abs=1e-12)
            assert ra.p_e1 == pytest.approx(rb.p_e1, abs=1e-12)

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            oracle.evolve_exact(make(), variant="guess")

    def test_norm_conserved_without_detuning(self):
        _, final = oracle.evolve_exact(make())
        assert final.norm() == pytest.approx(1.0, abs=1e-12)

    def test_norm_conserved_with_detuning(self):
        p = make(delta_omega=4.0)
        _, final = oracle.evolve_exact(p)
        assert final.norm() == pytest.approx(1.0, abs=1e-12)

    def test_records_cover_final_step(self):
        p = make(record_every=7)
        records, _ = oracle.evolve_exact(p)
        assert records[-1].step == p.n_steps - 1
        steps = [r.step for r in records]
        assert steps == sorted(steps)

    def test_markov_single_qubit_decay(self):
        # With only qubit 1 coupled, each collision pairs the qubit with
        # two fresh vacuum modes, so the excited population after the
        # (n+1)-th step is cos^(2(n+1)) of the collision angle.
        p = make(
            ell=1,
            n_bins=60,
            steps=50,
            mode="relaxation",
            record_every=1,
        )
        records, _ = oracle.evolve_exact(p, coupling_scales=(1.0, 0.0))
        theta = math.sqrt(p.gamma * p.dt)
        worst = max(
            abs(r.p_e1 - math.cos(theta) ** (2 * (r.step + 1)))
            for r in records
        )
        assert worst < 1e-12

    def test_relaxation_reaches_trapped_plateau(self):
        # Two resonant qubits at gamma*tau = 2: the decay stalls at the
        # bound-state weight, giving inferred p_bic -> 1/4.
        p = make(
            ell=50,
            n_bins=600,
            steps=550,
            mode="relaxation",
            Gamma_band=1.0,
            record_every=50,
        )
        records, _ = oracle.evolve_exact(p)
        assert records[-1].p_bic_inferred == pytest.approx(0.25, abs=0.005)

    def test_norm_drift_raises(self):
        p = make(steps=5, n_bins=20, ell=3, mode="relaxation")
        bad = oracle.exact_relaxation_state(p, "qubit1")
        bad.amplitudes *= 1.01  # deliberately denormalized input
        with pytest.raises(NumericalFailure):
            oracle.evolve_exact(p, initial=bad)


class TestMpsBridge:
    def test_embedding_round_trip_fidelity(self):
        p = make()
        exact = oracle.exact_input_state(p)
        roles = p.initial_roles()
        embedded = oracle.exact_to_mps(exact, roles)
        assert oracle.fidelity_against_mps(exact, embedded) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_embedding_orthogonal_states(self):
        p = make()
        a = oracle.exact_relaxation_state(make(mode="relaxation"), "qubit1")
        roles = p.initial_roles()
        mps_b = oracle.exact_to_mps(
            oracle.exact_input_state(p), roles
        )
        # Emitter excitation vs pure photon packet: orthogonal sectors.
        assert oracle.fidelity_against_mps(a, mps_b) == pytest.approx(
            0.0, abs=1e-12
        )
