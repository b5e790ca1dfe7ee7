"""Participation-ratio loss budget for airbridges and dielectric scaffolds.

A bridge is treated as a vacuum parallel-plate capacitor between the bridge
underside and the center trace. A thin lossy layer of thickness ``t`` and
permittivity ``eps_r`` on a plate surface stores a fraction ``(t / h) / eps_r``
of that capacitor's field energy, and the capacitor itself holds a fraction
``C_bridge / C_res`` of the resonator energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.constants import epsilon_0

from .cpw import ResonatorDesign
from .errors import DomainError

UM = 1e-6
NM = 1e-9
FF = 1e-15

# Geometry and resonator capacitance the per-nm coefficient is quoted against.
REFERENCE_RESONATOR_CAP = 470 * FF
REFERENCE_LOSS_TANGENT = 1e-3
DEFAULT_TUNNEL_PITCH = 3 * UM


@dataclass(frozen=True)
class BridgeGeometry:
    """Parallel-plate view of a ground-plane bridge over the center trace.

    ``span_width`` is the width of trace under the bridge, ``bridge_width``
    the bridge extent along the line and ``height`` the plate separation.
    Practical spans reach at least 70 um; that bound is not enforced.
    """

    span_width: float = 10 * UM
    bridge_width: float = 3 * UM
    height: float = 1 * UM

    def __post_init__(self):
        if not (self.span_width > 0 and self.bridge_width > 0 and self.height > 0):
            raise DomainError("bridge dimensions must be positive")


@dataclass(frozen=True)
class DielectricSpec:
    thickness: float
    rel_permittivity: float
    loss_tangent: float

    def __post_init__(self):
        if self.thickness < 0:
            raise DomainError("thickness must be >= 0")
        if not self.rel_permittivity >= 1:
            raise DomainError("rel_permittivity must be >= 1")
        if self.loss_tangent < 0:
            raise DomainError("loss_tangent must be >= 0")


@dataclass(frozen=True)
class LossBudget:
    participation: float
    loss_tangent: float

    @property
    def loss(self) -> float:
        return self.loss_tangent * self.participation

    @property
    def q_limit(self) -> float:
        return 1.0 / self.loss if self.loss > 0 else math.inf


def bridge_capacitance(bridge: BridgeGeometry) -> float:
    """Vacuum parallel-plate capacitance eps0 * w * l / h, in farads."""
    return epsilon_0 * bridge.span_width * bridge.bridge_width / bridge.height


def _surface_factor(both_surfaces: bool) -> float:
    # Lossy film on the trace top and the bridge underside equally.
    return 2.0 if both_surfaces else 1.0


def bridge_participation(layer: DielectricSpec, bridge: BridgeGeometry,
                         resonator_cap: float, both_surfaces: bool = True) -> float:
    """Fraction of resonator field energy stored in ``layer`` under one bridge."""
    if not resonator_cap > 0:
        raise DomainError("resonator_cap must be positive")
    return (_surface_factor(both_surfaces) * layer.thickness / bridge.height
            / layer.rel_permittivity
            * bridge_capacitance(bridge) / resonator_cap)


def per_bridge_loss(layer: DielectricSpec, bridge: BridgeGeometry,
                    resonator_cap: float, both_surfaces: bool = True) -> float:
    """Added internal loss 1/Q_i from a single bridge."""
    return layer.loss_tangent * bridge_participation(layer, bridge, resonator_cap,
                                                     both_surfaces)


def loss_per_nm_coefficient(bridge: BridgeGeometry, resonator_cap: float,
                            loss_tangent: float = REFERENCE_LOSS_TANGENT,
                            both_surfaces: bool = True) -> float:
    """Per-bridge loss per nm of ``t / eps_r``."""
    unit = DielectricSpec(thickness=NM, rel_permittivity=1.0, loss_tangent=loss_tangent)
    return per_bridge_loss(unit, bridge, resonator_cap, both_surfaces)


def residue_thickness_for_loss(target_loss: float, rel_permittivity: float,
                               loss_tangent: float, bridge: BridgeGeometry,
                               resonator_cap: float, both_surfaces: bool = True) -> float:
    """Lossy-layer thickness (m) that would produce ``target_loss`` per bridge."""
    if not target_loss > 0:
        raise DomainError("target_loss must be positive")
    if not loss_tangent > 0:
        raise DomainError("a zero loss tangent cannot explain any loss")
    if not rel_permittivity >= 1:
        raise DomainError("rel_permittivity must be >= 1")
    if not resonator_cap > 0:
        raise DomainError("resonator_cap must be positive")
    return (target_loss * resonator_cap * bridge.height * rel_permittivity
            / (loss_tangent * _surface_factor(both_surfaces) * bridge_capacitance(bridge)))


def position_weight(position_fraction):
    """Squared voltage cos^2(pi x / 2L) relative to the open end.

    ``position_fraction`` is x/L measured from the open end (voltage
    antinode); 1 is the shorted end. Accepts scalars or arrays.
    """
    x = np.asarray(position_fraction, dtype=float)
    if np.any(~((x >= 0) & (x <= 1))):
        raise DomainError("position fraction must lie in [0, 1]")
    w = np.cos(0.5 * np.pi * x) ** 2
    return float(w) if w.ndim == 0 else w


def uniform_positions(count: int, start: float = 0.0) -> np.ndarray:
    """Midpoints of ``count`` equal segments of [start, 1]."""
    if count < 1:
        raise DomainError("count must be >= 1")
    if not 0 <= start < 1:
        raise DomainError("start must lie in [0, 1)")
    return start + (1.0 - start) * (np.arange(count) + 0.5) / count


def distributed_bridge_loss(per_bridge: float, positions: Sequence[float]) -> float:
    """Total loss of bridges placed along the resonator.

    ``per_bridge`` is the position-averaged value; a bridge at the open end
    carries twice that.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.size == 0:
        raise DomainError("positions must not be empty")
    weights = position_weight(positions)
    return float(2.0 * per_bridge * np.sum(np.sort(np.atleast_1d(weights))))


def scaffold_q_limit(participation: float, loss_tangent: float) -> float:
    """Q_i limit 1/(p tan_delta) set by a dielectric left in place."""
    if not 0 < participation <= 1:
        raise DomainError("participation must lie in (0, 1]")
    if not loss_tangent > 0:
        raise DomainError("loss_tangent must be positive")
    return 1.0 / (participation * loss_tangent)


def tunnel_bridge_count(design: ResonatorDesign, pitch: float = DEFAULT_TUNNEL_PITCH) -> int:
    if not pitch > 0:
        raise DomainError("pitch must be positive")
    length = design.length
    if pitch > length:
        raise DomainError(f"pitch {pitch:g} m exceeds resonator length {length:g} m")
    return int(math.floor(length / pitch))


def tunnel_extrapolation(design: ResonatorDesign, per_bridge_loss_low: float,
                         per_bridge_loss_high: float, pitch: float,
                         bare_loss_low: float, bare_loss_high: float) -> tuple[float, float]:
    """Low/high power Q_i of a resonator fully covered by bridges at ``pitch``."""
    n_full = tunnel_bridge_count(design, pitch)
    q_low = 1.0 / (bare_loss_low + n_full * per_bridge_loss_low)
    q_high = 1.0 / (bare_loss_high + n_full * per_bridge_loss_high)
    return q_low, q_high


def loss_budget(layers: Mapping[str, DielectricSpec], bridge: BridgeGeometry,
                resonator_cap: float, bridge_count: int = 1,
                both_surfaces: bool = True) -> dict[str, LossBudget]:
    """Per-layer budget for ``bridge_count`` bridges, plus a ``"total"`` entry.

    Bridges are taken at their position-averaged weight, so the count enters
    linearly. The total participation is the sum over layers; its loss tangent
    is the participation-weighted mean, which keeps the total loss additive.
    """
    if bridge_count < 0:
        raise DomainError("bridge_count must be >= 0")
    out = {}
    for name in sorted(layers):
        p = bridge_count * bridge_participation(layers[name], bridge, resonator_cap,
                                                both_surfaces)
        out[name] = LossBudget(participation=p, loss_tangent=layers[name].loss_tangent)
    p_total = sum(b.participation for b in out.values())
    loss_total = sum(b.loss for b in out.values())
    out["total"] = LossBudget(participation=p_total,
                              loss_tangent=loss_total / p_total if p_total > 0 else 0.0)
    return out
