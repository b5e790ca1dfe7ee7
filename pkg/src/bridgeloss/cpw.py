"""Coplanar waveguide line parameters and quarter-wave resonator quantities.

The line model is the zero-thickness conformal-mapping CPW on an infinitely
thick substrate: no kinetic inductance, no thickness or backside corrections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from scipy.constants import c as SPEED_OF_LIGHT

from .errors import DomainError

if TYPE_CHECKING:
    from .loss import BridgeGeometry

AGM_TOL = 1e-12


def complete_elliptic_k(modulus: float) -> float:
    """Complete elliptic integral of the first kind K(k).

    Takes the modulus ``k`` (not the parameter ``m = k**2``) and evaluates
    ``pi / (2 * AGM(1, sqrt(1 - k**2)))``.
    """
    k = float(modulus)
    if not 0.0 <= k < 1.0 or math.isnan(k):
        raise DomainError(f"elliptic modulus must lie in [0, 1), got {modulus!r}")
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(64):
        if abs(a - b) <= AGM_TOL * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


@dataclass(frozen=True)
class CpwGeometry:
    """CPW cross-section. Lengths in meters."""

    center_width: float
    gap: float
    substrate_rel_permittivity: float = 11.45
    film: str = "Al"

    def __post_init__(self):
        if not self.center_width > 0 or not self.gap > 0:
            raise DomainError("center_width and gap must be positive")
        if not self.substrate_rel_permittivity >= 1:
            raise DomainError("substrate_rel_permittivity must be >= 1")


@dataclass(frozen=True)
class LineParams:
    char_impedance: float
    eff_permittivity: float
    cap_per_length: float
    ind_per_length: float

    @property
    def phase_velocity(self) -> float:
        return 1.0 / math.sqrt(self.cap_per_length * self.ind_per_length)


def line_params(geometry: CpwGeometry) -> LineParams:
    """Quasi-static impedance and effective permittivity of a CPW."""
    eps_eff = 0.5 * (geometry.substrate_rel_permittivity + 1.0)
    k = geometry.center_width / (geometry.center_width + 2.0 * geometry.gap)
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    ratio = complete_elliptic_k(kp) / complete_elliptic_k(k)
    z0 = 30.0 * math.pi / math.sqrt(eps_eff) * ratio
    v = SPEED_OF_LIGHT / math.sqrt(eps_eff)
    return LineParams(
        char_impedance=z0,
        eff_permittivity=eps_eff,
        cap_per_length=1.0 / (z0 * v),
        ind_per_length=z0 / v,
    )


def quarter_wave_capacitance(f0: float, z0: float) -> float:
    """Lumped-equivalent capacitance 1/(8 f0 Z0) of a quarter-wave resonator."""
    if not f0 > 0 or not z0 > 0:
        raise DomainError("f0 and z0 must be positive")
    return 1.0 / (8.0 * f0 * z0)


def quarter_wave_length(f0: float, eff_permittivity: float) -> float:
    """Physical length of a quarter-wave line resonating at ``f0``."""
    if not f0 > 0:
        raise DomainError("f0 must be positive")
    if not eff_permittivity >= 1:
        raise DomainError("eff_permittivity must be >= 1")
    return SPEED_OF_LIGHT / math.sqrt(eff_permittivity) / (4.0 * f0)


@dataclass(frozen=True)
class ResonatorDesign:
    """A feedline-coupled quarter-wave CPW resonator with ground-plane bridges."""

    geometry: CpwGeometry
    resonance_freq: float
    coupling_q: float
    bridge_count: int = 0
    bridge: BridgeGeometry | None = field(default=None)

    def __post_init__(self):
        if not self.resonance_freq > 0:
            raise DomainError("resonance_freq must be positive")
        if not self.coupling_q > 0:
            raise DomainError("coupling_q must be positive")
        if self.bridge_count < 0:
            raise DomainError("bridge_count must be >= 0")

    @property
    def line(self) -> LineParams:
        return line_params(self.geometry)

    @property
    def capacitance(self) -> float:
        return quarter_wave_capacitance(self.resonance_freq, self.line.char_impedance)

    @property
    def length(self) -> float:
        return quarter_wave_length(self.resonance_freq, self.line.eff_permittivity)
