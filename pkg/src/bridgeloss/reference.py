"""Measured and assumed reference values for SiO2-scaffolded aluminum airbridges.

These are the numbers the CLI defaults and the acceptance checks are built on.
Measured quantities are physical results and are kept here only as anchors
for comparison.
"""

# Resonators: 10 um trace, 5 um gaps on silicon, ~6 GHz, 1 um tall, 3 um wide bridges.
CENTER_WIDTH = 10e-6
GAP = 5e-6
SUBSTRATE_PERMITTIVITY = 11.45
RESONANCE_FREQ = 6e9
BRIDGE_SPAN = 10e-6
BRIDGE_WIDTH = 3e-6
BRIDGE_HEIGHT = 1e-6
COUPLING_Q_RANGE = (5e5, 1e6)

# Capacitances the per-bridge estimate is quoted against.
BRIDGE_CAPACITANCE = 0.266e-15
RESONATOR_CAPACITANCE = 470e-15
AMORPHOUS_LOSS_TANGENT = 1e-3
LOSS_PER_NM = 1e-9
ALOX_LOSS_PER_BRIDGE = 3e-10

# Dielectric presets: (relative permittivity, thickness in m).
SIO2_PERMITTIVITY = 4.0
ALOX_PERMITTIVITY = 10.0
ALOX_THICKNESS = 3e-9

# Measured resonator losses.
BARE_QI_LOW_POWER = 1.5e6
BARE_QI_HIGH_POWER = 2.5e6
SCAFFOLDED_QI = 1e4
SCAFFOLD_PARTICIPATION = 0.10
LOSS_PER_BRIDGE_LOW_POWER = 3.9e-8
LOSS_PER_BRIDGE_HIGH_POWER = 1.2e-8
QUOTED_LOSS_PER_FF = 1.2e-7
PHOTORESIST_LOSS_PER_FF = 5.08e-8
TUNNEL_QI_LOW_POWER = 2e4
TUNNEL_QI_HIGH_POWER = 5e4
BRIDGE_COUNTS = (0, 12, 24, 49, 98)

# Gmon qubit.
SQUID_INDUCTANCE = 6.3e-9
GEOMETRIC_INDUCTANCE = 1.0e-9
# Not a measured value; a typical transmon capacitance.
QUBIT_CAPACITANCE = 100e-15
EFFECTIVE_QUBIT_Q = 6.5e5
TAIL_SELF_RESONANCE = 12e9
