"""Collision schedule and full runs, validated against the dense oracle."""

import math

import numpy as np
import pytest

from bicsim import ModelParams, engine, mps, oracle
from bicsim.engine import ObservableRecord, SiteMap
from bicsim.errors import ConfigError
from bicsim.gates import build_step_gate

COMPARED_FIELDS = (
    "norm",
    "excitation",
    "p_e1",
    "p_e2",
    "bell_plus",
    "bell_minus",
    "trapped_n",
    "p_bic_inferred",
)


def make(**kw):
    base = dict(
        dt=0.04,
        ell=10,
        phi=math.pi,
        Gamma_band=2.0,
        n_bins=100,
        steps=90,
        trunc_eps=1e-12,
        record_every=30,
    )
    base.update(kw)
    return ModelParams(**base)


def max_record_deviation(mps_records, exact_records):
    assert [r.step for r in mps_records] == [r.step for r in exact_records]
    worst = 0.0
    for a, b in zip(mps_records, exact_records):
        for field in COMPARED_FIELDS:
            worst = max(worst, abs(getattr(a, field) - getattr(b, field)))
    return worst


def synthetic_record(step, p_bic):
    return ObservableRecord(
        step=step,
        time=step * 0.04,
        norm=1.0,
        excitation=1.0,
        p_e1=0.0,
        p_e2=0.0,
        bell_plus=0.0,
        bell_minus=0.0,
        trapped_n=0.0,
        p_bic_inferred=p_bic,
    )


class TestOracleAgreement:
    @pytest.mark.parametrize("mode", ["scatter-sym", "scatter-antisym"])
    def test_scattering_matches_exact(self, mode):
        p = make(mode=mode)
        result = engine.run_full(p)
        exact_records, exact_final = oracle.evolve_exact(p)
        fid = oracle.fidelity_against_mps(exact_final, result.final_state)
        assert fid >= 1.0 - 1e-12
        assert max_record_deviation(result.records, exact_records) < 1e-9
        assert result.max_bond <= 2

    def test_detuned_run_matches_exact(self):
        p = make(delta_omega=4.0)
        result = engine.run_full(p)
        exact_records, exact_final = oracle.evolve_exact(p)
        fid = oracle.fidelity_against_mps(exact_final, result.final_state)
        assert fid >= 1.0 - 1e-12
        assert max_record_deviation(result.records, exact_records) < 1e-9

    def test_relaxation_matches_exact(self):
        p = make(
            ell=25, n_bins=200, steps=175, mode="relaxation", record_every=50
        )
        result = engine.run_full(p)
        exact_records, exact_final = oracle.evolve_exact(p)
        fid = oracle.fidelity_against_mps(exact_final, result.final_state)
        assert fid >= 1.0 - 1e-12
        assert max_record_deviation(result.records, exact_records) < 1e-9


class TestFreePropagation:
    def test_zero_coupling_leaves_packet_untouched(self):
        p = make(record_every=45)
        gate0 = build_step_gate(p, detuned=False, coupling1_scale=0.0,
                                coupling2_scale=0.0)
        reference_bins, _ = mps.local_occupations(engine.build_initial_state(p))
        result = engine.run_full(p, gate_pair=(gate0, None))
        for rec in result.records:
            assert rec.p_e1 == pytest.approx(0.0, abs=1e-13)
            assert rec.p_e2 == pytest.approx(0.0, abs=1e-13)
        final_bins, (p_e1, p_e2) = mps.local_occupations(result.final_state)
        assert p_e1 == pytest.approx(0.0, abs=1e-13)
        assert sorted(final_bins) == sorted(reference_bins)
        for m, (n_r, n_l) in reference_bins.items():
            assert final_bins[m][0] == pytest.approx(n_r, abs=1e-12)
            assert final_bins[m][1] == pytest.approx(n_l, abs=1e-12)


class TestMarkovDecay:
    def test_single_qubit_exponential_law(self):
        p = make(
            ell=1,
            n_bins=50,
            steps=40,
            mode="relaxation",
            record_every=1,
        )
        gate0 = build_step_gate(p, detuned=False, coupling1_scale=1.0,
                                coupling2_scale=0.0)
        result = engine.run_full(p, gate_pair=(gate0, None))
        theta = math.sqrt(p.gamma * p.dt)
        worst = max(
            abs(r.p_e1 - math.cos(theta) ** (2 * (r.step + 1)))
            for r in result.records
        )
        assert worst < 1e-12


class TestConservation:
    def test_norm_and_excitation_within_discard_budget(self):
        p = make(trunc_eps=1e-4)
        result = engine.run_full(p)
        budget = 1e-9 + result.final_state.cumulative_discarded
        last = result.records[-1]
        assert abs(last.norm**2 - 1.0) <= budget
        assert abs(last.excitation - 1.0) <= budget

    def test_single_excitation_bond_is_two(self):
        result = engine.run_full(make())
        assert result.max_bond == 2


class TestRunResult:
    def test_record_steps_and_final(self):
        p = make(record_every=30)
        result = engine.run_full(p)
        steps = [r.step for r in result.records]
        assert steps == [29, 59, 89]
        assert result.records[-1].step == p.n_steps - 1

    def test_snapshots_at_requested_steps(self):
        p = make(record_every=45)
        result = engine.run_full(p, snapshot_steps=(10, 49))
        assert sorted(result.snapshots) == [10, 49]
        for bins in result.snapshots.values():
            total = sum(n_r + n_l for n_r, n_l in bins.values())
            assert total <= 1.0 + 1e-9
        # the packet is still entirely photonic right after step 10
        early = result.snapshots[10]
        assert sum(n_r + n_l for n_r, n_l in early.values()) > 0.5

    def test_layout_mismatch_rejected(self):
        p = make()
        other = engine.build_initial_state(make(ell=5, n_bins=50, steps=45, Gamma_band=5.0))
        with pytest.raises(ConfigError):
            engine.run_full(p, initial=other)

    def test_run_wrapper_returns_records(self):
        p = make(ell=4, n_bins=40, steps=36, record_every=12, Gamma_band=5.0)
        records = engine.run(p)
        assert [r.step for r in records] == [11, 23, 35]
        assert all(isinstance(r, ObservableRecord) for r in records)


class TestSiteMap:
    def test_position_of_bin_tracks_emitter(self):
        p = make()
        site_map = SiteMap.from_params(p)
        # delayed bins start left of the emitter, uncollided bins right
        assert site_map.position_of_bin(p.m_min) == 0
        assert site_map.position_of_bin(0) == p.ell + 1
        with pytest.raises(ValueError):
            site_map.position_of_bin(p.m_max + 1)
        result = engine.run_full(p)
        final = result.site_map
        # after the last step every bin has been passed
        assert final.next_step == p.n_steps
        for m in range(p.m_min, min(p.n_steps, p.m_max + 1)):
            assert final.position_of_bin(m) == m - p.m_min
        final.verify(result.final_state)

    def test_verify_detects_tampering(self):
        p = make(ell=4, n_bins=40, steps=36, Gamma_band=5.0)
        state = engine.build_initial_state(p)
        site_map = SiteMap.from_params(p)
        site_map.verify(state)
        state.roles[0], state.roles[1] = state.roles[1], state.roles[0]
        with pytest.raises(RuntimeError):
            site_map.verify(state)

    def test_schedule_step_checks_alignment(self):
        p = make(ell=4, n_bins=40, steps=36, Gamma_band=5.0)
        state = engine.build_initial_state(p)
        site_map = SiteMap.from_params(p)
        gate = build_step_gate(p, detuned=False)
        with pytest.raises(RuntimeError):
            engine.schedule_step(
                state, site_map, gate, p.n_start + 1, p.trunc_eps, p.chi_max
            )


class TestAsymptoteAndT90:
    def test_crossing_found(self):
        values = [0.0, 0.0, 0.5, 0.95, 0.96, 0.97, 0.98, 0.99, 1.0, 1.0]
        records = [synthetic_record(i, v) for i, v in enumerate(values)]
        asym, t90_step, t90_time = engine.asymptote_and_t90(records)
        assert asym == pytest.approx(1.0)
        assert t90_step == 3
        assert t90_time == pytest.approx(records[3].time)

    def test_tail_average(self):
        values = [0.0] * 18 + [0.3, 0.5]
        records = [synthetic_record(i, v) for i, v in enumerate(values)]
        asym, _, _ = engine.asymptote_and_t90(records)
        assert asym == pytest.approx(0.4)

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError):
            engine.asymptote_and_t90([])
