"""Gmon T1 limits from a lossy inductor tail and a constant effective Q.

The qubit is a SQUID inductance L_J in series with a geometric tail L_g,
shunted by C_q. Loss in the tail is modeled as a resistance R_g that sees
only the divided-down voltage V_g = V_q L_g / (L_J + L_g).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .reference import GEOMETRIC_INDUCTANCE, QUBIT_CAPACITANCE, SQUID_INDUCTANCE

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GmonCircuit:
    squid_inductance_zero_flux: float = SQUID_INDUCTANCE
    geometric_inductance: float = GEOMETRIC_INDUCTANCE
    qubit_capacitance: float = QUBIT_CAPACITANCE
    tail_loss_resistance: float = 1.0

    def __post_init__(self):
        vals = (self.squid_inductance_zero_flux, self.geometric_inductance,
                self.qubit_capacitance, self.tail_loss_resistance)
        if not all(v > 0 for v in vals):
            raise DomainError("all circuit values must be positive")
        if not self.geometric_inductance < self.squid_inductance_zero_flux:
            raise DomainError("tail inductance must be below the SQUID inductance")

    def squid_inductance_for(self, frequency: float) -> float:
        """SQUID inductance that puts the qubit at ``frequency`` (Hz)."""
        w = TWO_PI * frequency
        return 1.0 / (w * w * self.qubit_capacitance)


@dataclass(frozen=True, eq=False)
class T1Spectrum:
    frequencies: np.ndarray
    t1: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        t1 = np.asarray(self.t1, dtype=float)
        if f.shape != t1.shape or np.any(f <= 0) or np.any(~(t1 > 0)):
            raise DomainError("frequencies and T1 must be positive and of equal length")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "t1", t1)

    @property
    def points(self):
        return list(zip(self.frequencies.tolist(), self.t1.tolist()))


def squid_inductance(l_j0: float, flux_fraction: float) -> float:
    """Symmetric DC-SQUID inductance L_J0 / |cos(pi Phi/Phi0)|."""
    c = abs(math.cos(math.pi * flux_fraction))
    if c < 1e-12:
        raise DomainError("SQUID inductance diverges at half a flux quantum")
    return l_j0 / c


def qubit_frequency(circuit: GmonCircuit, l_j: float) -> float:
    """omega_q / 2 pi with omega_q = 1/sqrt(L_J C_q)."""
    if not l_j > 0:
        raise DomainError("l_j must be positive")
    return 1.0 / (TWO_PI * math.sqrt(l_j * circuit.qubit_capacitance))


def divider_voltage_ratio(circuit: GmonCircuit, l_j: float, exact: bool = True) -> float:
    """V_g / V_q; the approximate form drops L_g from the denominator."""
    if not l_j > 0:
        raise DomainError("l_j must be positive")
    lg = circuit.geometric_inductance
    return lg / (l_j + lg) if exact else lg / l_j


def tail_loss_q(circuit: GmonCircuit, omega_q, exact: bool = False):
    """Effective Q_i of the tail-loss channel at angular frequency ``omega_q``.

    The default is the closed form R_g / (C_q L_g^2) / omega^3. With
    ``exact=True`` the full divider ratio is used in R_g / Z_q (V_q/V_g)^2.
    """
    w = np.asarray(omega_q, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("omega_q must be positive")
    cq, lg, rg = circuit.qubit_capacitance, circuit.geometric_inductance, circuit.tail_loss_resistance
    if not exact:
        q = rg / (cq * lg * lg) / w ** 3
    else:
        lj = 1.0 / (w * w * cq)
        zq = np.sqrt(lj / cq)
        q = rg / zq * ((lj + lg) / lg) ** 2
    return float(q) if q.ndim == 0 else q


def tail_loss_q_from_divider(circuit: GmonCircuit, l_j: float, exact: bool = True) -> float:
    """R_g / Z_q * (V_q / V_g)^2 evaluated directly from the divider ratio."""
    zq = math.sqrt(l_j / circuit.qubit_capacitance)
    ratio = divider_voltage_ratio(circuit, l_j, exact)
    return circuit.tail_loss_resistance / zq / ratio ** 2


def tail_limited_t1(circuit: GmonCircuit, omega_q, exact: bool = False):
    """T1 = Q_i / omega_q for the tail channel, in seconds."""
    w = np.asarray(omega_q, dtype=float)
    t1 = tail_loss_q(circuit, w, exact) / w
    return float(t1) if np.ndim(t1) == 0 else t1


def constant_q_t1(q_eff: float, frequency):
    """T1 = Q / (2 pi f) for a frequency-independent effective Q."""
    f = np.asarray(frequency, dtype=float)
    if not q_eff > 0 or np.any(~(f > 0)):
        raise DomainError("q_eff and frequency must be positive")
    t1 = q_eff / (TWO_PI * f)
    return float(t1) if t1.ndim == 0 else t1


def frequency_for_t1(q_eff: float, t1: float) -> float:
    """Frequency at which a constant-Q channel gives ``t1``."""
    if not (q_eff > 0 and t1 > 0):
        raise DomainError("q_eff and t1 must be positive")
    return q_eff / (TWO_PI * t1)


def crossover_frequency(circuit: GmonCircuit, q_eff: float) -> float:
    """Frequency (Hz) where the tail T1 equals the constant-Q T1.

    Below it the omega^-4 tail channel gives the longer T1; above it the
    tail channel dominates. Uses the closed-form tail model, for which the
    crossing is analytic.
    """
    if not q_eff > 0:
        raise DomainError("q_eff must be positive")
    k = circuit.tail_loss_resistance / (circuit.qubit_capacitance * circuit.geometric_inductance ** 2)
    # k / w^4 = q / w  ->  w^3 = k / q
    return (k / q_eff) ** (1.0 / 3.0) / TWO_PI


def crossover_frequency_numeric(circuit: GmonCircuit, q_eff: float,
                                exact: bool = False) -> float:
    """Root of T1_tail(f) - T1_const(f) bracketed on a wide log grid."""

    def gap(logf):
        f = 10.0 ** logf
        w = TWO_PI * f
        return math.log(tail_limited_t1(circuit, w, exact)) - math.log(constant_q_t1(q_eff, f))

    return 10.0 ** brentq(gap, 0.0, 30.0, xtol=1e-14)


def min_tail_resistance(circuit: GmonCircuit, spectrum: T1Spectrum) -> float:
    """Smallest R_g for which the tail channel alone would not limit ``spectrum``.

    Each measured point requires T1_tail(R_g) >= T1_measured; T1_tail is
    linear in R_g, so the bound is the max over points of the per-point ratio.
    """
    unit = GmonCircuit(circuit.squid_inductance_zero_flux, circuit.geometric_inductance,
                       circuit.qubit_capacitance, 1.0)
    w = TWO_PI * spectrum.frequencies
    return float(np.max(spectrum.t1 / np.atleast_1d(tail_limited_t1(unit, w))))


def tail_t1_spectrum(circuit: GmonCircuit, frequencies, exact: bool = False) -> T1Spectrum:
    f = np.asarray(frequencies, dtype=float)
    return T1Spectrum(f, np.atleast_1d(tail_limited_t1(circuit, TWO_PI * f, exact)))


def constant_q_spectrum(q_eff: float, frequencies) -> T1Spectrum:
    f = np.asarray(frequencies, dtype=float)
    return T1Spectrum(f, np.atleast_1d(constant_q_t1(q_eff, f)))
