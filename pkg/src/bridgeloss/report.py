"""Flat report records for every result type, plus the bridge loss budget."""

from __future__ import annotations

from functools import singledispatch
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import reference as ref
from .cpw import CpwGeometry, ResonatorDesign, line_params, quarter_wave_capacitance
from .fileio import write_report
from .loss import (
    DEFAULT_TUNNEL_PITCH,
    BridgeGeometry,
    DielectricSpec,
    LossBudget,
    bridge_capacitance,
    distributed_bridge_loss,
    loss_budget,
    loss_per_nm_coefficient,
    per_bridge_loss,
    residue_thickness_for_loss,
    scaffold_q_limit,
    tunnel_bridge_count,
    tunnel_extrapolation,
    uniform_positions,
)
from .qubit import T1Spectrum
from .regression import SlopeResult, loss_per_capacitance
from .resonator import FitResult, PowerSweepResult, TlsFit

FF = 1e-15
PHOTON_CONVENTION = "n = 2 Ql^2 P_in / (hbar w0^2 Qc)"


@singledispatch
def to_record(result) -> dict:
    raise TypeError(f"no report schema for {type(result).__name__}")


@to_record.register
def _(result: FitResult) -> dict:
    rec = {
        "f0_hz": result.f0,
        "qi": result.qi,
        "qc": result.qc,
        "ql": result.ql,
        "asymmetry_angle_rad": result.asymmetry_angle,
        "residual_rms": result.residual_rms,
        "noise_floor": result.noise_floor,
    }
    for k, v in sorted(result.uncertainties.items()):
        unit = {"f0": "_hz", "asymmetry_angle": "_rad"}.get(k, "")
        rec[f"{k}{unit}_stderr"] = v
    return rec


@to_record.register
def _(result: SlopeResult) -> dict:
    return {
        "slope_per_bridge": result.slope,
        "slope_stderr": result.slope_stderr,
        "intercept": result.intercept,
        "intercept_stderr": result.intercept_stderr,
        "r_squared": result.r_squared,
        "n_points": result.n_points,
    }


@to_record.register
def _(result: TlsFit) -> dict:
    rec = {
        "f_tan_delta": result.f_tan_delta,
        "critical_photon_number": result.critical_photon_number,
        "saturation_exponent": result.saturation_exponent,
        "power_independent_loss": result.power_independent_loss,
        "photon_number_convention": PHOTON_CONVENTION,
    }
    for k, v in sorted(result.uncertainties.items()):
        rec[f"{k}_stderr"] = v
    return rec


@to_record.register
def _(result: LossBudget) -> dict:
    return {"participation": result.participation, "loss_tangent": result.loss_tangent,
            "loss": result.loss, "q_limit": result.q_limit}


@to_record.register
def _(result: PowerSweepResult) -> dict:
    n = result.photon_numbers
    return {
        "n_points": int(n.size),
        "photon_number_min": float(n[0]),
        "photon_number_max": float(n[-1]),
        "qi_min": float(result.qi.min()),
        "qi_max": float(result.qi.max()),
        "photon_number_convention": PHOTON_CONVENTION,
    }


@to_record.register
def _(result: T1Spectrum) -> dict:
    return {
        "n_points": int(result.frequencies.size),
        "frequency_min_hz": float(result.frequencies.min()),
        "frequency_max_hz": float(result.frequencies.max()),
        "t1_min_s": float(result.t1.min()),
        "t1_max_s": float(result.t1.max()),
    }


def prefixed(record: Mapping, prefix: str) -> dict:
    return {f"{prefix}{k}": v for k, v in record.items()}


def emit_report(result, out_dir, stem: str,
                figure: Callable[[Path], object] | None = None,
                extra: Mapping | None = None) -> dict[str, Path]:
    """Write ``<stem>.json`` (and ``<stem>.svg`` when ``figure`` is given).

    ``result`` may be any module result or an already-flat mapping.
    """
    out_dir = Path(out_dir)
    record = dict(result) if isinstance(result, Mapping) else to_record(result)
    if extra:
        record.update(extra)
    paths = {"report": write_report(record, out_dir / f"{stem}.json")}
    if figure is not None:
        paths["figure"] = Path(figure(out_dir / f"{stem}.svg"))
    return paths


def regression_record(result: SlopeResult, bridge_cap: float) -> dict:
    """Slope record plus per-fF conversion next to the quoted per-fF figure."""
    rec = to_record(result)
    per_ff = loss_per_capacitance(result.slope, bridge_cap) * FF
    rec.update({
        "bridge_capacitance_fF": bridge_cap / FF,
        "loss_per_fF": per_ff,
        "loss_per_fF_stderr": result.slope_stderr / bridge_cap * FF,
        "quoted_loss_per_fF": ref.QUOTED_LOSS_PER_FF,
        "loss_per_fF_over_quoted": per_ff / ref.QUOTED_LOSS_PER_FF,
        "photoresist_scaffold_loss_per_fF": ref.PHOTORESIST_LOSS_PER_FF,
        "loss_per_fF_over_photoresist": per_ff / ref.PHOTORESIST_LOSS_PER_FF,
    })
    return rec


def budget_record(geometry: CpwGeometry, bridge: BridgeGeometry,
                  layers: Mapping[str, DielectricSpec], resonance_freq: float = ref.RESONANCE_FREQ,
                  bridge_count: int = 12, resonator_cap: float | None = None,
                  both_surfaces: bool = True,
                  measured_loss_low: float = ref.LOSS_PER_BRIDGE_LOW_POWER,
                  measured_loss_high: float = ref.LOSS_PER_BRIDGE_HIGH_POWER,
                  bare_qi_low: float = ref.BARE_QI_LOW_POWER,
                  bare_qi_high: float = ref.BARE_QI_HIGH_POWER,
                  scaffold_participation: float = ref.SCAFFOLD_PARTICIPATION,
                  loss_tangent: float = ref.AMORPHOUS_LOSS_TANGENT,
                  tunnel_pitch: float = DEFAULT_TUNNEL_PITCH,
                  coupling_q: float = 7e5) -> dict:
    """Bridge loss budget for one resonator design.

    ``resonator_cap`` defaults to 1/(8 f0 Z0) with Z0 from the CPW model.
    Per-layer entries cover ``bridge_count`` bridges at their position-averaged
    weight; ``layer_total_*`` sums them.
    """
    lp = line_params(geometry)
    design = ResonatorDesign(geometry, resonance_freq, coupling_q, bridge_count, bridge)
    c_line = quarter_wave_capacitance(resonance_freq, lp.char_impedance)
    c_res = c_line if resonator_cap is None else resonator_cap
    c_b = bridge_capacitance(bridge)
    coeff = loss_per_nm_coefficient(bridge, c_res, loss_tangent, both_surfaces)

    rec = {
        "center_width_um": geometry.center_width * 1e6,
        "gap_um": geometry.gap * 1e6,
        "substrate_rel_permittivity": geometry.substrate_rel_permittivity,
        "resonance_freq_hz": resonance_freq,
        "char_impedance_ohm": lp.char_impedance,
        "eff_permittivity": lp.eff_permittivity,
        "phase_velocity_m_per_s": lp.phase_velocity,
        "quarter_wave_length_mm": design.length * 1e3,
        "quarter_wave_capacitance_fF": c_line / FF,
        "resonator_capacitance_used_fF": c_res / FF,
        "bridge_span_width_um": bridge.span_width * 1e6,
        "bridge_width_um": bridge.bridge_width * 1e6,
        "bridge_height_um": bridge.height * 1e6,
        "bridge_capacitance_fF": c_b / FF,
        "both_surfaces": both_surfaces,
        "loss_tangent": loss_tangent,
        "loss_per_nm_of_t_over_eps": coeff,
        "bridge_count": bridge_count,
    }

    budget = loss_budget(layers, bridge, c_res, bridge_count, both_surfaces)
    for name, b in budget.items():
        key = "layer_total" if name == "total" else f"layer_{name}"
        rec.update(prefixed(to_record(b), key + "_"))
        if name != "total":
            rec[f"{key}_thickness_nm"] = layers[name].thickness * 1e9
            rec[f"{key}_rel_permittivity"] = layers[name].rel_permittivity
            rec[f"{key}_loss_per_bridge"] = per_bridge_loss(layers[name], bridge, c_res,
                                                            both_surfaces)

    # Thickness of SiO2-like residue needed to explain the measured slope.
    rec["measured_loss_per_bridge_low"] = measured_loss_low
    rec["measured_loss_per_bridge_high"] = measured_loss_high
    rec["residue_thickness_for_measured_loss_nm_eps4"] = residue_thickness_for_loss(
        measured_loss_low, ref.SIO2_PERMITTIVITY, loss_tangent, bridge, c_res, both_surfaces) * 1e9

    if bridge_count > 0:
        positions = uniform_positions(bridge_count)
        rec["distributed_loss_measured_slope"] = distributed_bridge_loss(measured_loss_low, positions)
        rec["lumped_loss_measured_slope"] = 2.0 * bridge_count * measured_loss_low

    rec["scaffold_participation"] = scaffold_participation
    rec["scaffold_q_limit"] = scaffold_q_limit(scaffold_participation, loss_tangent)
    rec["scaffold_geometric_participation"] = bridge_count * c_b / c_res

    q_low, q_high = tunnel_extrapolation(design, measured_loss_low, measured_loss_high,
                                         tunnel_pitch, 1 / bare_qi_low, 1 / bare_qi_high)
    rec["tunnel_pitch_um"] = tunnel_pitch * 1e6
    rec["tunnel_bridge_count"] = tunnel_bridge_count(design, tunnel_pitch)
    rec["tunnel_qi_low"] = q_low
    rec["tunnel_qi_high"] = q_high
    rec["bare_qi_low"] = bare_qi_low
    rec["bare_qi_high"] = bare_qi_high
    return rec


def budget_figure(bridge_count: int):
    from .loss import position_weight
    from .plotting import plot_position_weights

    def draw(path):
        pos = uniform_positions(max(bridge_count, 1))
        return plot_position_weights(pos, np.atleast_1d(position_weight(pos)), path)

    return draw
