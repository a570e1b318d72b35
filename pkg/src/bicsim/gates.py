"""Local operators and the coarse-grained collision step unitary.

One collision step ``n`` couples the emitter pair to the R mode of
composite site ``n`` and the L mode of composite site ``n - ell`` (qubit
1), and to the R mode of site ``n - ell`` / L mode of site ``n`` with
carrier phases ``exp(-+i phi)`` (qubit 2).  The step generator and gate
are built on the ordered product space

    emitter (x) site-A (x) site-B,      A = site n,  B = site n - ell,

each factor of dimension 4.  ``gate_for_application`` permutes the gate
to the chain order ``site-B (x) emitter (x) site-A`` in which the three
sites are brought adjacent during a step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .params import ModelParams

I2 = np.eye(2, dtype=np.complex128)
I4 = np.eye(4, dtype=np.complex128)
LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)

#: Annihilators of the two modes of one composite site (R = first factor,
#: L = second), and the matching qubit lowering operators (qubit 1 first).
A_R = np.kron(LOWER, I2)
A_L = np.kron(I2, LOWER)
SIGMA1 = A_R
SIGMA2 = A_L

#: Local excitation number (counts both factors of a composite site).
NUM4 = np.diag(np.array([0.0, 1.0, 1.0, 2.0])).astype(np.complex128)

#: SWAP unitary on two composite sites.
SWAP16 = np.zeros((16, 16), dtype=np.complex128)
for _p in range(4):
    for _q in range(4):
        SWAP16[_q * 4 + _p, _p * 4 + _q] = 1.0
del _p, _q


def _kron3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.kron(a, np.kron(b, c))


#: Total excitation number on the (emitter, site, site) product space.
NUM3 = _kron3(NUM4, I4, I4) + _kron3(I4, NUM4, I4) + _kron3(I4, I4, NUM4)


def build_step_generator(
    p: ModelParams,
    detuned: bool,
    coupling1_scale: float = 1.0,
    coupling2_scale: float = 1.0,
) -> np.ndarray:
    """Hermitian 64x64 generator of one collision step.

    The coupling scales are test hooks that multiply the qubit-1 and
    qubit-2 interaction terms (1.0 reproduces the model).
    """
    g = np.sqrt(p.gamma * p.dt / 2.0)
    ar_dag = A_R.conj().T
    al_dag = A_L.conj().T
    terms = coupling1_scale * (
        _kron3(SIGMA1, ar_dag, I4) + _kron3(SIGMA1, I4, al_dag)
    )
    terms = terms + coupling2_scale * (
        np.exp(-1j * p.phi) * _kron3(SIGMA2, I4, ar_dag)
        + np.exp(1j * p.phi) * _kron3(SIGMA2, al_dag, I4)
    )
    m = g * terms
    m = m + m.conj().T
    if detuned:
        if p.delta_omega is None:
            raise ValueError("detuned generator requested under ideal-switch")
        n_qubits = np.kron(NUM4, np.eye(16, dtype=np.complex128))
        m = m + (p.delta_omega * p.dt) * n_qubits
    return m


@dataclass
class StepGate:
    """Precomputed collision unitary ``exp(-i M)`` for one step variant.

    ``matrix`` lives on (emitter, site-A, site-B); ``app_matrix`` is the
    same unitary permuted to the chain order (site-B, emitter, site-A)
    used during application.
    """

    matrix: np.ndarray
    detuned: bool
    app_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        u = self.matrix
        dev = np.max(np.abs(u.conj().T @ u - np.eye(64)))
        if dev > 1e-12:
            raise ValueError(f"step gate not unitary (deviation {dev:.2e})")
        comm = u @ NUM3 - NUM3 @ u
        if np.max(np.abs(comm)) > 1e-12:
            raise ValueError("step gate does not conserve excitation number")
        self.app_matrix = permute_gate_order(u, (2, 0, 1))


def permute_gate_order(u: np.ndarray, perm: tuple[int, int, int]) -> np.ndarray:
    """Reorder the three tensor factors of a 64x64 operator.

    ``perm[j]`` names which old factor lands at new position ``j``.
    """
    t = u.reshape(4, 4, 4, 4, 4, 4)
    axes = tuple(perm) + tuple(3 + j for j in perm)
    return np.ascontiguousarray(t.transpose(axes).reshape(64, 64))


def build_step_gate(
    p: ModelParams,
    detuned: bool,
    coupling1_scale: float = 1.0,
    coupling2_scale: float = 1.0,
) -> StepGate:
    """Exponentiate the step generator into a StepGate."""
    m = build_step_generator(p, detuned, coupling1_scale, coupling2_scale)
    return StepGate(matrix=expm(-1j * m), detuned=detuned)
