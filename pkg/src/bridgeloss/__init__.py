"""Dielectric loss of airbridge crossovers in superconducting CPW circuits.

Line parameters, participation-ratio budgets, notch-resonator fitting,
loss-vs-bridge-count regression and gmon T1 models.
"""

__version__ = "0.1.0"

from .cpw import (
    CpwGeometry,
    LineParams,
    ResonatorDesign,
    complete_elliptic_k,
    line_params,
    quarter_wave_capacitance,
    quarter_wave_length,
)
from .errors import BridgeLossError, DomainError, FitError, ParseError
from .loss import (
    BridgeGeometry,
    DielectricSpec,
    LossBudget,
    bridge_capacitance,
    distributed_bridge_loss,
    loss_budget,
    per_bridge_loss,
    position_weight,
    residue_thickness_for_loss,
    scaffold_q_limit,
    tunnel_extrapolation,
)
from .qubit import (
    GmonCircuit,
    T1Spectrum,
    constant_q_t1,
    divider_voltage_ratio,
    qubit_frequency,
    squid_inductance,
    tail_limited_t1,
    tail_loss_q,
)
from .regression import LossDataset, SlopeResult, fit_loss_per_bridge, loss_per_capacitance
from .resonator import (
    FitResult,
    PowerSweepResult,
    S21Trace,
    fit_s21,
    fit_tls_power_dependence,
    photon_number,
    simulate_s21,
)
