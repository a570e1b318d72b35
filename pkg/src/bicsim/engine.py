"""Collision-step scheduling and full time evolution with recording.

Chain layout during a run: photonic sites sit in ascending bin order with
the emitter between the last collided site and the next one.  Just
before step ``n`` the emitter is at chain position ``q = n - m_min``,
site ``n`` at ``q + 1`` and the delayed partner ``n - ell`` at
``q - ell``.  One step brings the partner next to the (emitter, site n)
pair with a SWAP chain, applies the three-site collision unitary,
advances the emitter past site ``n`` and restores the partner — the
restore chain and the advance swap act on disjoint pairs, so they are
performed in the cheaper order (advance first), which keeps the
orthogonality center O(1) sites from the next step's window.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass

import numpy as np

from . import mps, wavepacket
from .analytics import infer_p_bic_from_bell
from .errors import ConfigError, NumericalFailure
from .gates import StepGate, build_step_gate
from .mps import EMITTER, MpsState
from .params import ModelParams

#: Hard-failure tolerance on norm/excitation drift (exit code 3); the
#: acceptance-level bound 1e-9 + cumulative_discarded is asserted in tests.
DRIFT_FAIL_TOL = 1e-6


@dataclass
class SiteMap:
    """Tracks the emitter position and the bin/position correspondence.

    The relabelled layout stores the left-moving bin ``m + ell`` on
    composite site ``m`` (constant offset ``ell``), so lattice positions
    and bins stay in ascending one-to-one correspondence throughout.
    """

    ell: int
    m_min: int
    m_max: int
    emitter_pos: int
    next_step: int

    @classmethod
    def from_params(cls, p: ModelParams) -> "SiteMap":
        return cls(
            ell=p.ell,
            m_min=p.m_min,
            m_max=p.m_max,
            emitter_pos=p.emitter_position(p.n_start),
            next_step=p.n_start,
        )

    def position_of_bin(self, m: int) -> int:
        if not self.m_min <= m <= self.m_max:
            raise ValueError(f"bin {m} outside [{self.m_min}, {self.m_max}]")
        return m - self.m_min if m < self.next_step else m - self.m_min + 1

    def verify(self, state: MpsState) -> None:
        """Assert the positional invariants against the state's role list."""
        if state.roles[self.emitter_pos] != EMITTER:
            raise RuntimeError("site map emitter position out of sync")
        for pos, role in enumerate(state.roles):
            if role == EMITTER:
                continue
            if self.position_of_bin(int(role)) != pos:
                raise RuntimeError(f"site map out of sync at position {pos}")


@dataclass(frozen=True)
class ObservableRecord:
    """One sampled point of a run; fields match the time-series CSV."""

    step: int
    time: float
    norm: float
    excitation: float
    p_e1: float
    p_e2: float
    bell_plus: float
    bell_minus: float
    trapped_n: float
    p_bic_inferred: float


@dataclass
class RunResult:
    """Everything a run produces beyond the record list."""

    records: list[ObservableRecord]
    final_state: MpsState
    site_map: SiteMap
    max_bond: int
    wall_time: float
    snapshots: dict[int, dict[int, tuple[float, float]]]


def build_initial_state(p: ModelParams) -> MpsState:
    """Initial MPS for ``p.mode`` (packet input or relaxation start)."""
    if p.mode == "relaxation":
        return wavepacket.relaxation_initial_state(p, p.relax_start)
    amps = wavepacket.exponential_bin_amplitudes(p)
    return wavepacket.build_input_mps(p, amps)


def schedule_step(
    state: MpsState,
    site_map: SiteMap,
    gate: StepGate,
    n: int,
    trunc_eps: float,
    chi_max: int,
) -> None:
    """Execute collision step ``n`` in place (state and map both updated)."""
    q = site_map.emitter_pos
    if q != n - site_map.m_min:
        raise RuntimeError(f"emitter at {q}, expected {n - site_map.m_min}")
    if n > site_map.m_max:
        raise ConfigError("emitter at lattice boundary; no bins left")
    if n - site_map.ell < site_map.m_min:
        raise ConfigError(f"delayed bin {n - site_map.ell} outside lattice")
    roles = state.roles
    if (
        roles[q] != EMITTER
        or roles[q + 1] != n
        or roles[q - site_map.ell] != n - site_map.ell
    ):
        raise RuntimeError("chain roles out of sync with site map")

    # (i) bring site n - ell next to the pair
    for i in range(q - site_map.ell, q - 1):
        mps.swap_sites(state, i, trunc_eps, chi_max, center_after="right")
    # (ii) three-site unitary on (site n-ell, emitter, site n)
    mps.apply_gate(
        state, gate.app_matrix, q - 1, trunc_eps, chi_max, check_unitary=False
    )
    # (iv) advance the emitter past site n (commutes with the restore chain)
    mps.swap_sites(state, q, trunc_eps, chi_max, center_after="left")
    # (iii) restore site n - ell to its slot
    for i in range(q - 2, q - site_map.ell - 1, -1):
        mps.swap_sites(state, i, trunc_eps, chi_max, center_after="left")

    site_map.emitter_pos = q + 1
    site_map.next_step = n + 1


def _make_record(p: ModelParams, state: MpsState, n: int) -> ObservableRecord:
    probs, rho, norm_sq = mps.chain_measurements(state)
    if rho is None:
        raise RuntimeError("chain lost its emitter site")
    p_e1 = float(rho[2, 2].real + rho[3, 3].real)
    p_e2 = float(rho[1, 1].real + rho[3, 3].real)
    s12 = float(rho[1, 2].real)
    bell_plus = 0.5 * float(rho[2, 2].real + rho[1, 1].real) + s12
    bell_minus = 0.5 * float(rho[2, 2].real + rho[1, 1].real) - s12
    matched = bell_plus if p.bell_sign() > 0 else bell_minus
    matched = min(max(matched, 0.0), 1.0)
    lo, hi = max(n - p.ell, p.m_min), min(n, p.m_max)
    trapped = 0.0
    for i, role in enumerate(state.roles):
        if role != EMITTER and lo <= int(role) <= hi:
            trapped += probs[i, 1] + probs[i, 2] + 2.0 * probs[i, 3]
    excitation = float((probs @ np.array([0.0, 1.0, 1.0, 2.0])).sum())
    return ObservableRecord(
        step=n,
        time=n * p.dt,
        norm=float(np.sqrt(max(norm_sq, 0.0))),
        excitation=excitation,
        p_e1=p_e1,
        p_e2=p_e2,
        bell_plus=bell_plus,
        bell_minus=bell_minus,
        trapped_n=trapped,
        p_bic_inferred=infer_p_bic_from_bell(matched, p.gamma, p.tau),
    )


def _check_drift(state: MpsState, excitation: float) -> None:
    norm_sq = mps.inner_product(state, state).real
    budget = DRIFT_FAIL_TOL + state.cumulative_discarded
    if not 1.0 - budget <= norm_sq <= 1.0 + DRIFT_FAIL_TOL:
        raise NumericalFailure(
            f"norm drift beyond tolerance: |psi|^2 = {norm_sq:.12f}, "
            f"cumulative discarded = {state.cumulative_discarded:.3e}"
        )
    if abs(excitation - 1.0) > budget:
        raise NumericalFailure(
            f"excitation drift beyond tolerance: <N> = {excitation:.12f}"
        )


def run_full(
    p: ModelParams,
    initial: MpsState | None = None,
    snapshot_steps: tuple[int, ...] = (),
    gate_pair: tuple[StepGate, StepGate | None] | None = None,
) -> RunResult:
    """Run the full collision schedule and record observables.

    Args:
        p: Model parameters.
        initial: Starting MPS; built from ``p.mode`` when omitted.  Must
            use the chain layout of ``p.initial_roles()``.
        snapshot_steps: Steps after which a per-bin occupation snapshot
            is captured.
        gate_pair: Test hook ``(undetuned, detuned)`` overriding the
            model's collision gates.

    Returns:
        RunResult; records are taken every ``p.record_every`` steps and
        always after the final step.
    """
    t0 = _time.perf_counter()
    state = build_initial_state(p) if initial is None else initial
    if state.roles != p.initial_roles():
        raise ConfigError("initial state layout does not match parameters")
    if gate_pair is None:
        gate0 = build_step_gate(p, detuned=False)
        gate_det = build_step_gate(p, detuned=True) if not p.ideal_switch else None
    else:
        gate0, gate_det = gate_pair
    site_map = SiteMap.from_params(p)
    site_map.verify(state)

    wanted = set(snapshot_steps)
    records: list[ObservableRecord] = []
    snapshots: dict[int, dict[int, tuple[float, float]]] = {}
    max_bond = 1
    last = p.n_steps - 1
    count = 0
    excitation = 1.0
    for n in range(p.n_start, p.n_steps):
        gate = gate_det if n < 0 else gate0
        if gate is None:
            raise RuntimeError("missing detuned gate for negative steps")
        schedule_step(state, site_map, gate, n, p.trunc_eps, p.chi_max)
        max_bond = max(max_bond, state.max_bond())
        count += 1
        if count % p.record_every == 0 or n == last:
            rec = _make_record(p, state, n)
            records.append(rec)
            excitation = rec.excitation
        if n in wanted:
            bins, _ = mps.local_occupations(state)
            snapshots[n] = bins
    site_map.verify(state)
    _check_drift(state, excitation)
    return RunResult(
        records=records,
        final_state=state,
        site_map=site_map,
        max_bond=max_bond,
        wall_time=_time.perf_counter() - t0,
        snapshots=snapshots,
    )


def run(p: ModelParams, initial: MpsState | None = None) -> list[ObservableRecord]:
    """Record list of a full run (see ``run_full`` for the rich result)."""
    return run_full(p, initial).records


def asymptote_and_t90(
    records: list[ObservableRecord],
) -> tuple[float, int | None, float | None]:
    """Asymptotic trapping estimate and the 90% crossing.

    The asymptote is the mean of the final 10% of recorded
    ``p_bic_inferred`` values; t90 is the first recorded step (and time)
    at which the record reaches 90% of it.

    Returns:
        ``(asymptote, t90_step, t90_time)``; the crossing entries are
        None when the trajectory never reaches the threshold.
    """
    if not records:
        raise ValueError("no records")
    values = [r.p_bic_inferred for r in records]
    n_tail = max(1, len(values) // 10)
    asym = float(np.mean(values[-n_tail:]))
    threshold = 0.9 * asym
    for r in records:
        if r.p_bic_inferred >= threshold:
            return asym, r.step, r.time
    return asym, None, None
