"""Model parameters and the static bin/emitter layout derived from them.

All rates are expressed in units of the single-qubit emission rate ``gamma``
(fixed to 1) and all times in units of ``1/gamma``.  A simulation acts on a
chain of composite time-bin sites indexed by an integer ``m``: site ``m``
carries the right-moving bin ``m`` and the left-moving bin ``m + ell``
(relabelled so that one collision step touches sites ``n`` and ``n - ell``
only).  The emitter pair occupies one extra chain site that migrates to the
right as steps proceed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace as _dc_replace

from .errors import ConfigError

MODES = (
    "scatter-sym",
    "scatter-antisym",
    "scatter-oneside-R",
    "scatter-oneside-L",
    "relaxation",
)

RELAX_STARTS = ("qubit1", "bell_plus", "bell_minus")

#: Distinguished ``delta_omega`` value: qubit 2 is decoupled during the delay
#: window instead of being detuned (the infinite-detuning idealization).
IDEAL_SWITCH = "ideal-switch"


@dataclass(frozen=True)
class ModelParams:
    """Static parameters of one collision-model run.

    Attributes:
        gamma: Emission rate of each qubit; the internal unit, fixed to 1.
        dt: Coarse-graining step ``gamma * dt`` (dimensionless, > 0).
        ell: Delay in steps, ``tau = ell * dt``; integer >= 1.
        phi: Carrier phase across the delay, ``omega_0 * tau``, in radians.
        Gamma_band: Bandwidth of the incident exponential packet, in units
            of gamma.  Unused in relaxation mode.
        delta_omega: Quench detuning applied to both qubits before step 0,
            in units of gamma; ``None`` selects the ideal-switch protocol
            (no pre-steps, coupling simply starts at step 0).
        mode: One of ``MODES``; selects the initial state.
        n_bins: Number of physical composite sites; bins are indexed
            ``m = -ell .. n_bins - ell - 1``.
        steps: Number of collision steps at zero detuning; ``None`` means
            the maximum the lattice supports, ``n_bins - ell``.
        trunc_eps: Per-bond truncation budget on discarded squared
            singular values.
        chi_max: Hard bond-dimension cap.
        record_every: Observable sampling period in steps.
        relax_start: Initial emitter state for relaxation mode.
    """

    dt: float
    ell: int
    phi: float
    Gamma_band: float = 1.0
    delta_omega: float | None = None
    mode: str = "scatter-sym"
    n_bins: int = 200
    steps: int | None = None
    trunc_eps: float = 1e-4
    chi_max: int = 64
    record_every: int = 10
    gamma: float = 1.0
    relax_start: str = "qubit1"

    def __post_init__(self) -> None:
        if self.gamma != 1.0:
            raise ConfigError("gamma is the internal unit and must equal 1")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if int(self.ell) != self.ell or self.ell < 1:
            raise ConfigError(f"ell must be an integer >= 1, got {self.ell}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.n_bins <= self.ell:
            raise ConfigError(
                f"n_bins must exceed ell (got n_bins={self.n_bins}, ell={self.ell})"
            )
        if self.steps is not None and not 1 <= self.steps <= self.n_bins - self.ell:
            raise ConfigError(
                f"steps must lie in [1, n_bins - ell] = [1, {self.n_bins - self.ell}], "
                f"got {self.steps}"
            )
        if self.trunc_eps < 0:
            raise ConfigError("trunc_eps must be >= 0")
        if self.chi_max < 2:
            raise ConfigError("chi_max must be >= 2")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if self.mode.startswith("scatter") and not self.Gamma_band > 0:
            raise ConfigError("Gamma_band must be positive in scattering modes")
        if self.delta_omega is not None:
            if isinstance(self.delta_omega, str):
                raise ConfigError(
                    f"delta_omega must be a float or None/{IDEAL_SWITCH!r}"
                )
            if self.mode == "relaxation":
                raise ConfigError(
                    "relaxation mode has no switch-on protocol; "
                    f"delta_omega must be {IDEAL_SWITCH!r}"
                )
        if self.relax_start not in RELAX_STARTS:
            raise ConfigError(
                f"relax_start must be one of {RELAX_STARTS}, got {self.relax_start!r}"
            )

    # -- derived quantities -------------------------------------------------

    @property
    def tau(self) -> float:
        """Delay time ``ell * dt`` in units of 1/gamma."""
        return self.ell * self.dt

    @property
    def gamma_tau(self) -> float:
        return self.gamma * self.tau

    @property
    def ideal_switch(self) -> bool:
        return self.delta_omega is None

    @property
    def n_start(self) -> int:
        """First collision step (negative during a detuned prologue)."""
        return 0 if self.ideal_switch else -self.ell

    @property
    def n_steps(self) -> int:
        """Number of zero-detuning steps actually run."""
        return self.steps if self.steps is not None else self.n_bins - self.ell

    @property
    def m_min(self) -> int:
        """Lowest composite-site index (extension sites included)."""
        return -self.ell + self.n_start

    @property
    def m_max(self) -> int:
        """Highest composite-site index."""
        return self.n_bins - self.ell - 1

    @property
    def n_sites(self) -> int:
        """Total number of composite photon sites on the chain."""
        return self.m_max - self.m_min + 1

    def emitter_position(self, n: int) -> int:
        """Chain position of the emitter site just before step ``n``."""
        return n - self.m_min

    def bin_position(self, m: int, n: int) -> int:
        """Chain position of composite site ``m`` just before step ``n``.

        Sites already collided (``m < n``) sit left of the emitter.
        """
        if not self.m_min <= m <= self.m_max:
            raise ValueError(f"bin {m} outside lattice [{self.m_min}, {self.m_max}]")
        return m - self.m_min if m < n else m - self.m_min + 1

    def initial_roles(self) -> list[int | str]:
        """Site roles (bin index or ``"emitter"``) in initial chain order."""
        roles: list[int | str] = list(range(self.m_min, self.n_start))
        roles.append("emitter")
        roles.extend(range(self.n_start, self.m_max + 1))
        return roles

    def resonance_parity(self) -> int:
        """Nearest integer ``p`` with ``phi ~ p * pi``."""
        return round(self.phi / math.pi)

    def is_resonant(self, tol: float = 1e-9) -> bool:
        p = self.resonance_parity()
        return abs(self.phi - p * math.pi) <= tol

    def bell_sign(self) -> int:
        """Sign of the Bell state trapped at the nearest resonance.

        ``+1`` selects ``(|eg> + |ge>)/sqrt(2)`` (odd ``p``), ``-1`` the
        antisymmetric combination (even ``p``).
        """
        return 1 if self.resonance_parity() % 2 == 1 else -1

    def replace(self, **changes) -> "ModelParams":
        return _dc_replace(self, **changes)


def params_field_names() -> tuple[str, ...]:
    """Configuration keys accepted for ModelParams, in declaration order."""
    return tuple(f.name for f in fields(ModelParams))
