"""Matrix-product-state engine on a chain of local dimension-4 sites.

Site tensors are C-contiguous ``complex128`` arrays of shape
``(left bond, physical, right bond)``.  Photonic composite sites use the
basis index ``2*n_R + n_L`` (vacuum, L-occupied, R-occupied, both); the
emitter site uses ``2*n_e1 + n_e2`` over ``{gg, ge, eg, ee}``.  States are
not renormalized after truncation, so ``1 - |psi|^2`` stays bounded by
``cumulative_discarded``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

#: Role tag of the emitter site; photonic sites carry their integer bin index.
EMITTER = "emitter"

#: Max unitarity deviation accepted by apply_gate.
UNITARITY_TOL = 1e-12


@dataclass
class MpsState:
    """Mixed-canonical MPS with tracked orthogonality center and roles.

    Sites left of ``center`` are left-canonical, sites right of it
    right-canonical; the center tensor carries the state's norm.
    """

    tensors: list[np.ndarray]
    roles: list[int | str]
    center: int = 0
    cumulative_discarded: float = 0.0

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    def bond_dims(self) -> list[int]:
        """Interior bond dimensions, left to right."""
        return [t.shape[2] for t in self.tensors[:-1]]

    def max_bond(self) -> int:
        dims = self.bond_dims()
        return max(dims) if dims else 1

    def position_of(self, role: int | str) -> int:
        """Chain index currently holding ``role`` (linear scan)."""
        return self.roles.index(role)

    def emitter_position(self) -> int:
        if EMITTER not in self.roles:
            raise ValueError("state has no emitter site")
        return self.roles.index(EMITTER)

    def copy(self) -> "MpsState":
        return MpsState(
            [t.copy() for t in self.tensors],
            list(self.roles),
            self.center,
            self.cumulative_discarded,
        )


def check_mps(state: MpsState) -> None:
    """Validate structural invariants (shapes, bonds, roles)."""
    if state.n_sites == 0:
        raise ValueError("empty MPS")
    if len(state.roles) != state.n_sites:
        raise ValueError("roles/tensors length mismatch")
    if state.tensors[0].shape[0] != 1 or state.tensors[-1].shape[2] != 1:
        raise ValueError("boundary bonds must have dimension 1")
    for i in range(state.n_sites - 1):
        if state.tensors[i].shape[2] != state.tensors[i + 1].shape[0]:
            raise ValueError(f"bond mismatch between sites {i} and {i + 1}")
    if sum(1 for r in state.roles if r == EMITTER) > 1:
        raise ValueError("more than one emitter site")
    if not 0 <= state.center < state.n_sites:
        raise ValueError("orthogonality center out of range")


def new_product_state(
    local_vectors: list[np.ndarray], roles: list[int | str]
) -> MpsState:
    """Build a bond-dimension-1 product MPS from normalized local vectors."""
    if not local_vectors:
        raise ValueError("empty list of local vectors")
    if len(local_vectors) != len(roles):
        raise ValueError("local_vectors/roles length mismatch")
    tensors = []
    for v in local_vectors:
        v = np.asarray(v, dtype=np.complex128)
        if v.ndim != 1:
            raise ValueError("local vectors must be one-dimensional")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("local vector not normalized")
        tensors.append(np.ascontiguousarray(v.reshape(1, v.shape[0], 1)))
    state = MpsState(tensors, list(roles), center=0)
    check_mps(state)
    return state


def single_excitation_mps(
    excitation_vectors: list[np.ndarray],
    roles: list[int | str],
    vacuum_vectors: list[np.ndarray] | None = None,
) -> MpsState:
    """Build the bond-2 MPS ``sum_s |vac..> x |x_s> x |vac..>``.

    Args:
        excitation_vectors: Per-site local component ``x_s`` (may be the
            zero vector on sites that carry no amplitude).
        roles: Site roles, aligned with the chain.
        vacuum_vectors: Per-site reference (ground/vacuum) vectors;
            defaults to the first basis vector of each site.

    Returns:
        Normalized MPS; raises if all excitation vectors vanish.
    """
    n = len(excitation_vectors)
    if n == 0:
        raise ValueError("empty chain")
    xs = [np.asarray(v, dtype=np.complex128) for v in excitation_vectors]
    if vacuum_vectors is None:
        vacs = []
        for v in xs:
            e0 = np.zeros(v.shape[0], dtype=np.complex128)
            e0[0] = 1.0
            vacs.append(e0)
    else:
        vacs = [np.asarray(v, dtype=np.complex128) for v in vacuum_vectors]
    total = np.sqrt(sum(float(np.vdot(x, x).real) for x in xs))
    if total < 1e-300:
        raise ValueError("all excitation vectors vanish")
    xs = [x / total for x in xs]

    tensors = []
    if n == 1:
        d = xs[0].shape[0]
        tensors.append(np.ascontiguousarray(xs[0].reshape(1, d, 1)))
    else:
        d = xs[0].shape[0]
        first = np.zeros((1, d, 2), dtype=np.complex128)
        first[0, :, 0] = vacs[0]
        first[0, :, 1] = xs[0]
        tensors.append(first)
        for s in range(1, n - 1):
            d = xs[s].shape[0]
            mid = np.zeros((2, d, 2), dtype=np.complex128)
            mid[0, :, 0] = vacs[s]
            mid[0, :, 1] = xs[s]
            mid[1, :, 1] = vacs[s]
            tensors.append(mid)
        d = xs[-1].shape[0]
        last = np.zeros((2, d, 1), dtype=np.complex128)
        last[0, :, 0] = xs[-1]
        last[1, :, 0] = vacs[-1]
        tensors.append(last)
    state = MpsState(tensors, list(roles), center=0)
    check_mps(state)
    move_center(state, n - 1)
    move_center(state, 0)
    return state


# -- gauge management -------------------------------------------------------


def move_center(state: MpsState, pos: int) -> None:
    """Move the orthogonality center to ``pos`` by QR sweeps (no truncation)."""
    if not 0 <= pos < state.n_sites:
        raise ValueError("center position out of range")
    t = state.tensors
    while state.center < pos:
        c = state.center
        t[c], t[c + 1] = kernels.shift_center_right(t[c], t[c + 1])
        state.center = c + 1
    while state.center > pos:
        c = state.center
        t[c - 1], t[c] = kernels.shift_center_left(t[c - 1], t[c])
        state.center = c - 1


def _center_into(state: MpsState, first: int, last: int) -> None:
    if state.center < first:
        move_center(state, first)
    elif state.center > last:
        move_center(state, last)


# -- gates ------------------------------------------------------------------


def apply_gate(
    state: MpsState,
    gate: np.ndarray,
    first_site: int,
    trunc_eps: float,
    chi_max: int,
    check_unitary: bool = True,
) -> float:
    """Apply a unitary on 2 or 3 contiguous sites starting at ``first_site``.

    MPS form is restored by SVD splits truncated per bond to ``trunc_eps``
    discarded squared weight and ``chi_max``; the center is left on the
    last split bond's right site (the window's last site).

    Returns:
        The discarded squared-singular-value weight of this application
        (also added to ``state.cumulative_discarded``).
    """
    dim = gate.shape[0]
    if gate.shape != (dim, dim) or dim not in (16, 64):
        raise ValueError("gate must be 16x16 (2 sites) or 64x64 (3 sites)")
    k = 2 if dim == 16 else 3
    if not 0 <= first_site <= state.n_sites - k:
        raise IndexError("gate window out of range")
    if check_unitary:
        dev = np.max(np.abs(gate.conj().T @ gate - np.eye(dim)))
        if dev > UNITARITY_TOL:
            raise ValueError(f"gate not unitary (deviation {dev:.2e})")
    gate = np.ascontiguousarray(gate, dtype=np.complex128)
    _center_into(state, first_site, first_site + k - 1)
    t = state.tensors
    i = first_site
    if k == 2:
        t[i], t[i + 1], disc = kernels.apply_gate2(
            t[i], t[i + 1], gate, trunc_eps, chi_max, True
        )
        state.center = i + 1
    else:
        t[i], t[i + 1], t[i + 2], disc = kernels.apply_gate3(
            t[i], t[i + 1], t[i + 2], gate, trunc_eps, chi_max
        )
        state.center = i + 2
    state.cumulative_discarded += disc
    return disc


def swap_sites(
    state: MpsState,
    i: int,
    trunc_eps: float = 0.0,
    chi_max: int | None = None,
    center_after: str = "right",
) -> float:
    """Exchange sites ``i`` and ``i+1`` (contents and roles).

    ``center_after`` ("left" or "right") picks which of the two sites
    keeps the orthogonality center, so chains of swaps stay O(1) in
    center movement.

    Returns:
        Discarded squared weight (zero up to the noise floor for
        ``trunc_eps = 0``).
    """
    if not 0 <= i < state.n_sites - 1:
        raise IndexError("swap index out of range")
    if center_after not in ("left", "right"):
        raise ValueError("center_after must be 'left' or 'right'")
    if chi_max is None:
        chi_max = max(16, state.max_bond() * 4)
    absorb_right = center_after == "right"
    _center_into(state, i, i + 1)
    t = state.tensors
    t[i], t[i + 1], disc = kernels.apply_swap(
        t[i], t[i + 1], trunc_eps, chi_max, absorb_right
    )
    state.roles[i], state.roles[i + 1] = state.roles[i + 1], state.roles[i]
    state.center = i + 1 if absorb_right else i
    state.cumulative_discarded += disc
    return disc


def compress(state: MpsState, trunc_eps: float, chi_max: int) -> float:
    """Re-truncate every bond with a left-to-right SVD sweep.

    Returns the discarded squared weight of the sweep.
    """
    move_center(state, 0)
    t = state.tensors
    total = 0.0
    for i in range(state.n_sites - 1):
        theta = kernels.contract_pair(t[i], t[i + 1])
        t[i], t[i + 1], disc = kernels.split_theta(
            np.ascontiguousarray(theta), trunc_eps, chi_max, True
        )
        total += disc
        state.center = i + 1
    state.cumulative_discarded += total
    return total


# -- contractions and observables -------------------------------------------


def _step_left(env: np.ndarray, bra_t: np.ndarray, ket_t: np.ndarray):
    """Extend a left environment (bra index first) by one site pair."""
    x = np.tensordot(env, ket_t, axes=(1, 0))  # (a, p, d)
    return np.tensordot(bra_t.conj(), x, axes=([0, 1], [0, 1])), x


def inner_product(a: MpsState, b: MpsState) -> complex:
    """Return ``<a|b>`` (conjugate-linear in ``a``)."""
    if a.n_sites != b.n_sites:
        raise ValueError("length mismatch")
    env = np.ones((1, 1), dtype=np.complex128)
    for ta, tb in zip(a.tensors, b.tensors):
        if ta.shape[1] != tb.shape[1]:
            raise ValueError("physical dimension mismatch")
        env, _ = _step_left(env, ta, tb)
    return complex(env[0, 0])


def norm(state: MpsState) -> float:
    """Euclidean norm of the encoded state."""
    return float(np.sqrt(max(inner_product(state, state).real, 0.0)))


def _right_environments(state: MpsState) -> list[np.ndarray]:
    """``right[i]`` covers sites > i, bra index first."""
    n = state.n_sites
    right: list[np.ndarray] = [np.ones((1, 1), dtype=np.complex128)] * n
    acc = np.ones((1, 1), dtype=np.complex128)
    for i in range(n - 1, -1, -1):
        right[i] = acc
        t = state.tensors[i]
        x = np.tensordot(t, acc, axes=(2, 1))  # (b, p, c)
        acc = np.tensordot(t.conj(), x, axes=([1, 2], [1, 2]))
    return right


def _environments(state: MpsState):
    """Left/right transfer environments; ``left[i]`` covers sites < i."""
    left = [np.ones((1, 1), dtype=np.complex128)]
    for i in range(state.n_sites - 1):
        t = state.tensors[i]
        env, _ = _step_left(left[i], t, t)
        left.append(env)
    return left, _right_environments(state)


def chain_measurements(
    state: MpsState,
) -> tuple[np.ndarray, np.ndarray | None, float]:
    """One sweep: per-site probabilities, emitter RDM, squared norm.

    Returns ``(probs, rho, norm_sq)`` where ``probs[i, p]`` is the
    population of local basis state ``p`` at site ``i`` and ``rho`` is the
    4x4 emitter reduced density matrix (None when no emitter site).
    """
    right = _right_environments(state)
    n = state.n_sites
    probs = np.empty((n, 4), dtype=np.float64)
    rho: np.ndarray | None = None
    epos = state.roles.index(EMITTER) if EMITTER in state.roles else None
    left = np.ones((1, 1), dtype=np.complex128)
    for i, t in enumerate(state.tensors):
        left, y = _step_left(left, t, t)
        z = np.tensordot(y, right[i], axes=(2, 1))  # (a, p, c)
        probs[i] = (z * t.conj()).sum(axis=(0, 2)).real
        if i == epos:
            raw = np.tensordot(z, t.conj(), axes=([0, 2], [0, 2]))
            rho = 0.5 * (raw + raw.conj().T)
    return probs, rho, float(left[0, 0].real)


def _local_probabilities(state: MpsState) -> np.ndarray:
    """Per-site diagonal of the one-site reduced density matrix."""
    return chain_measurements(state)[0]


def local_occupations(
    state: MpsState,
) -> tuple[dict[int, tuple[float, float]], tuple[float, float]]:
    """Mode occupations per photonic bin and emitter excited populations.

    Returns:
        ``(bins, (p_e1, p_e2))`` where ``bins[m] = (n_R, n_L)`` for each
        photonic site, keyed by bin index.
    """
    probs = _local_probabilities(state)
    bins: dict[int, tuple[float, float]] = {}
    p_e = (0.0, 0.0)
    for i, role in enumerate(state.roles):
        hi = float(probs[i, 2] + probs[i, 3])
        lo = float(probs[i, 1] + probs[i, 3])
        if role == EMITTER:
            p_e = (hi, lo)
        else:
            bins[int(role)] = (hi, lo)
    return bins, p_e


def total_excitation(state: MpsState) -> float:
    """Expectation of the total excitation number (bins + qubits)."""
    probs = _local_probabilities(state)
    # local basis index 2a+b carries a+b excitations, whatever the role
    weights = np.array([0.0, 1.0, 1.0, 2.0])
    return float(np.sum(probs * weights[None, :]))


def qubit_rdm(state: MpsState) -> np.ndarray:
    """Reduced density matrix of the emitter pair in basis {gg, ge, eg, ee}."""
    state.emitter_position()  # raises when the chain has no emitter site
    rho = chain_measurements(state)[1]
    assert rho is not None
    return rho


def to_dense(state: MpsState, max_sites: int = 10) -> np.ndarray:
    """Contract to a dense state vector (small chains only; test oracle)."""
    if state.n_sites > max_sites:
        raise ValueError("chain too long for dense contraction")
    v = state.tensors[0]
    for t in state.tensors[1:]:
        v = np.tensordot(v, t, axes=([v.ndim - 1], [0]))
    return np.ascontiguousarray(v).reshape(-1)


def is_left_canonical(t: np.ndarray, tol: float = 1e-10) -> bool:
    chi = t.shape[2]
    g = np.einsum("apc,apd->cd", t.conj(), t)
    return bool(np.max(np.abs(g - np.eye(chi))) <= tol)


def is_right_canonical(t: np.ndarray, tol: float = 1e-10) -> bool:
    chi = t.shape[0]
    g = np.einsum("apc,bpc->ab", t.conj(), t)
    return bool(np.max(np.abs(g - np.eye(chi))) <= tol)
