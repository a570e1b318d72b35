"""Closed-form trapping probabilities, optimal bandwidth, and reference states.

Conventions: ``gamma`` is the per-qubit emission rate, ``tau`` the photon
delay between the qubits, ``Gamma`` the bandwidth of the exponential
input packet.  The trapped ("bound-state") component holds a fraction
``gamma*tau/2 / (1 + gamma*tau/2)`` of its weight in the field and the
rest in a Bell state of the qubit pair whose sign is ``(-1)^(p+1)`` at
the resonance ``phi = p*pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import mps
from .mps import EMITTER, MpsState
from .params import ModelParams


@dataclass(frozen=True)
class BicWeights:
    """Weight split of the trapped state between qubits and field."""

    qubit_share: float
    photon_share: float
    parity: int

    def __post_init__(self) -> None:
        if abs(self.qubit_share + self.photon_share - 1.0) > 1e-14:
            raise ValueError("shares must sum to 1")
        if self.parity not in (-1, 1):
            raise ValueError("parity must be +-1")


def bic_weights(gamma: float, tau: float, phi: float) -> BicWeights:
    """Qubit/photon shares of the trapped state and its Bell parity."""
    if tau < 0 or gamma <= 0:
        raise ValueError("need gamma > 0 and tau >= 0")
    half = 0.5 * gamma * tau
    p = round(phi / math.pi)
    parity = 1 if p % 2 == 1 else -1
    return BicWeights(
        qubit_share=1.0 / (1.0 + half),
        photon_share=half / (1.0 + half),
        parity=parity,
    )


def p_bic_analytic(Gamma: float, gamma: float, tau: float) -> float:
    """Asymptotic trapping probability for a resonant matched-parity packet."""
    if Gamma <= 0:
        raise ValueError("Gamma must be positive")
    if gamma <= 0 or tau < 0:
        raise ValueError("need gamma > 0 and tau >= 0")
    half_u = 0.5 * Gamma * tau
    return 2.0 * gamma * (1.0 - math.exp(-half_u)) ** 2 / (
        Gamma * (1.0 + 0.5 * gamma * tau)
    )


def p_bell_analytic(Gamma: float, gamma: float, tau: float) -> float:
    """Asymptotic Bell population: trapping probability times qubit share."""
    return p_bic_analytic(Gamma, gamma, tau) / (1.0 + 0.5 * gamma * tau)


def bandwidth_fixed_point(tol: float = 1e-10) -> float:
    """Solve ``u = e^{u/2} - 1`` by bisection on [1, 5].

    The root is the bandwidth-delay product ``Gamma* tau`` maximizing the
    trapping probability.
    """
    lo, hi = 1.0, 5.0

    def f(u: float) -> float:
        return math.exp(0.5 * u) - 1.0 - u

    if not f(lo) < 0 < f(hi):
        raise RuntimeError("bisection bracket lost")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_bandwidth(tau: float) -> float:
    """Bandwidth maximizing the trapping probability at delay ``tau``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return bandwidth_fixed_point() / tau


def peak_coefficient() -> float:
    """Coefficient c in ``P_BIC(Gamma*) = c * gamma*tau / (1 + gamma*tau/2)``."""
    u = bandwidth_fixed_point()
    return 2.0 * (1.0 - math.exp(-0.5 * u)) ** 2 / u


def peak_probabilities(gamma: float, tau: float) -> tuple[float, float]:
    """(P_BIC, P_Bell) at the optimal bandwidth for given delay."""
    c = peak_coefficient()
    half = 0.5 * gamma * tau
    p_bic = c * gamma * tau / (1.0 + half)
    return p_bic, p_bic / (1.0 + half)


def relaxation_baselines(gamma: float, tau: float) -> tuple[float, float]:
    """(P_BIC, P_Bell) reached by relaxation from one excited qubit."""
    if tau < 0 or gamma <= 0:
        raise ValueError("need gamma > 0 and tau >= 0")
    half = 0.5 * gamma * tau
    return 0.5 / (1.0 + half), 0.5 / (1.0 + half) ** 2


def overlap_amplitude(
    Gamma: float, gamma: float, tau: float, k0d: float, parity_n: int
) -> complex:
    """Amplitude of the trapped component for an input of parity ``(-1)^n``.

    Normalized so that its squared modulus at a matched resonance equals
    ``p_bic_analytic``; it vanishes for the opposite parity at resonance.
    """
    if Gamma <= 0:
        raise ValueError("Gamma must be positive")
    pref = -1j * math.sqrt(gamma / (2.0 * Gamma * (1.0 + 0.5 * gamma * tau)))
    return (
        pref
        * (1.0 - math.exp(-0.5 * Gamma * tau))
        * (np.exp(1j * k0d) + (-1.0) ** parity_n)
    )


def one_side_probability(Gamma: float, gamma: float, tau: float) -> float:
    """Trapping probability for a packet incident from one side only."""
    return 0.5 * p_bic_analytic(Gamma, gamma, tau)


def continuum_bic_density(x: float, k0: float) -> float:
    """Trapped-field energy density between the qubits, ``2 sin^2(k0 x)``."""
    return 2.0 * math.sin(k0 * x) ** 2


def infer_p_bic_from_bell(
    bell_population: float, gamma: float, tau: float
) -> float:
    """Invert the Bell population into a trapping probability estimate."""
    if not -1e-12 <= bell_population <= 1.0 + 1e-12:
        raise ValueError("bell_population must lie in [0, 1]")
    val = bell_population * (1.0 + 0.5 * gamma * tau)
    return min(max(val, 0.0), 1.0)


def discretized_bic_state(
    p: ModelParams, n: int, exact_discrete: bool = False
) -> MpsState:
    """Trapped state co-moving with the step index, as an MPS at step ``n``.

    The window sites ``[n - ell, n - 1]`` carry uniform amplitudes
    ``-i b`` (R mode) and ``+i b`` (L mode); the emitter carries the Bell
    combination of the resonance parity.  With ``exact_discrete`` the
    qubit/field ratio uses the exact fixed point of the discrete step map
    (``cot(theta/2)``, theta = sqrt(gamma dt)) instead of the continuum
    weights; both agree to O(gamma dt).

    Raises:
        ValueError: off-resonance ``phi``, or window outside the lattice.
    """
    if not p.is_resonant():
        raise ValueError("discretized trapped state requires phi = p*pi")
    if n - p.ell < p.m_min or n > p.m_max + 1:
        raise ValueError(
            f"window [{n - p.ell}, {n - 1}] outside lattice "
            f"[{p.m_min}, {p.m_max}]"
        )
    weights = bic_weights(p.gamma, p.tau, p.phi)
    s = weights.parity
    beta = math.sqrt(p.gamma * p.dt / (4.0 * (1.0 + 0.5 * p.gamma * p.tau)))
    if exact_discrete:
        theta = math.sqrt(p.gamma * p.dt)
        alpha1 = beta * (1.0 + math.cos(theta)) / (math.sqrt(2.0) * math.sin(theta))
    else:
        alpha1 = math.sqrt(weights.qubit_share / 2.0)

    roles: list[int | str] = list(range(p.m_min, n))
    roles.append(EMITTER)
    roles.extend(range(n, p.m_max + 1))

    vectors = []
    for role in roles:
        v = np.zeros(4, dtype=np.complex128)
        if role == EMITTER:
            v[2] = alpha1
            v[1] = s * alpha1
        elif n - p.ell <= int(role) <= n - 1:
            v[2] = -1j * beta
            v[1] = 1j * beta
        vectors.append(v)
    state = mps.single_excitation_mps(vectors, roles)
    return state
