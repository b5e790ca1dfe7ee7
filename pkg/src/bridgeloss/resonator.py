"""Notch-type resonator S21 synthesis, fitting and power-dependent loss.

The resonance model is the diameter-corrected notch form with a complex
coupling quality factor |Qc| e^{-i phi}::

    S21(f) = 1 - (Ql / |Qc|) e^{i phi} / (1 + 2i Ql (f - f0) / f0)
    1/Ql   = 1/Qi + cos(phi) / |Qc|
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.constants import hbar
from scipy.optimize import least_squares

from .errors import DomainError, FitError

log = logging.getLogger(__name__)

MIN_FIT_POINTS = 16
MAX_ITERATIONS = 200
STEP_TOL = 1e-10
BASELINE_FRACTION = 0.2
# Absolute residual floor so noiseless traces are not rejected on round-off.
RESIDUAL_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class S21Trace:
    """Complex transmission vs frequency (Hz); ``input_power`` in dBm."""

    frequencies: np.ndarray
    s21: np.ndarray
    input_power: float | None = None

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        z = np.asarray(self.s21, dtype=complex)
        if f.ndim != 1 or f.shape != z.shape:
            raise DomainError("frequencies and s21 must be 1-D arrays of equal length")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise DomainError("frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "s21", z)

    def __len__(self):
        return self.frequencies.size


def loaded_q(qi: float, qc: float, asymmetry_angle: float = 0.0) -> float:
    inv = 1.0 / qi + math.cos(asymmetry_angle) / qc
    if not inv > 0:
        raise DomainError("parameters give a non-positive loaded Q")
    return 1.0 / inv


def notch_s21(frequencies, f0, ql, qc, asymmetry_angle=0.0):
    """Ideal notch response; ``qc`` is the magnitude |Qc|."""
    f = np.asarray(frequencies, dtype=float)
    x = ql * (f - f0) / f0
    return 1.0 - (ql / qc) * np.exp(1j * asymmetry_angle) / (1.0 + 2j * x)


def simulate_s21(f0: float, qi: float, qc: float, asymmetry_angle: float,
                 frequencies: Sequence[float], noise_rms: float = 0.0,
                 seed: int | None = None, input_power: float | None = None) -> S21Trace:
    """Synthesize a notch trace with additive complex Gaussian noise.

    ``noise_rms`` is the rms of the complex noise magnitude, so each
    quadrature carries ``noise_rms / sqrt(2)``.
    """
    if not (f0 > 0 and qi > 0 and qc > 0):
        raise DomainError("f0, qi and qc must be positive")
    if noise_rms < 0:
        raise DomainError("noise_rms must be >= 0")
    ql = loaded_q(qi, qc, asymmetry_angle)
    f = np.asarray(frequencies, dtype=float)
    z = notch_s21(f, f0, ql, qc, asymmetry_angle)
    if noise_rms > 0:
        rng = np.random.default_rng(seed)
        sigma = noise_rms / math.sqrt(2.0)
        z = z + sigma * (rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size))
    return S21Trace(f, z, input_power)


def linewidth_grid(f0: float, ql: float, half_span_linewidths: float = 6.0,
                   points: int = 801) -> np.ndarray:
    """Uniform frequency grid covering +-``half_span_linewidths`` of f0/Ql."""
    half = half_span_linewidths * f0 / ql
    return np.linspace(f0 - half, f0 + half, points)


@dataclass(frozen=True, eq=False)
class FitResult:
    f0: float
    qi: float
    qc: float
    ql: float
    asymmetry_angle: float
    residual_rms: float = 0.0
    uncertainties: dict = field(default_factory=dict)
    noise_floor: float = 0.0
    # Linear background b0 + b1 t with t = (f - freq_ref) / freq_scale.
    background: tuple = (1.0 + 0j,)
    freq_ref: float = 0.0
    freq_scale: float = 1.0

    def model(self, frequencies) -> np.ndarray:
        """Fitted S21 including the background, on the raw data's scale."""
        f = np.asarray(frequencies, dtype=float)
        t = (f - self.freq_ref) / self.freq_scale
        bg = np.polynomial.polynomial.polyval(t, np.asarray(self.background))
        return bg * notch_s21(f, self.f0, self.ql, self.qc, self.asymmetry_angle)

    def resonance(self, frequencies) -> np.ndarray:
        """Fitted S21 with the background divided out."""
        return notch_s21(frequencies, self.f0, self.ql, self.qc, self.asymmetry_angle)

    def normalize(self, frequencies, s21) -> np.ndarray:
        f = np.asarray(frequencies, dtype=float)
        t = (f - self.freq_ref) / self.freq_scale
        return np.asarray(s21) / np.polynomial.polynomial.polyval(t, np.asarray(self.background))


def _outer_mask(f: np.ndarray, fraction: float = BASELINE_FRACTION) -> np.ndarray:
    lo, hi = f[0], f[-1]
    edge = 0.5 * fraction * (hi - lo)
    mask = (f <= lo + edge) | (f >= hi - edge)
    if mask.sum() < 4:
        k = max(2, f.size // 10)
        mask = np.zeros(f.size, dtype=bool)
        mask[:k] = True
        mask[-k:] = True
    return mask


def _noise_floor(z: np.ndarray, mask: np.ndarray) -> float:
    # Second differences cancel a smooth background; var(d2) = 6 var(noise).
    pieces = []
    idx = np.flatnonzero(mask)
    for run in np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1):
        if run.size >= 3:
            pieces.append(np.diff(z[run], 2))
    if not pieces:
        return 0.0
    d2 = np.concatenate(pieces)
    return float(np.sqrt(np.mean(np.abs(d2) ** 2) / 6.0))


def _initial_guess(f: np.ndarray, zn: np.ndarray, noise: float):
    dev = np.abs(1.0 - zn)
    i = int(np.argmax(dev))
    depth = float(dev[i])
    if depth < 3.0 * noise:
        raise FitError(f"no resonance dip found: depth {depth:.3g} below 3x noise {noise:.3g}")
    f0 = float(f[i])
    above = dev ** 2 >= 0.5 * depth ** 2
    lo = i
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i
    while hi < f.size - 1 and above[hi + 1]:
        hi += 1
    step = float(np.min(np.diff(f)))
    width = max(float(f[hi] - f[lo]), step)
    ql = f0 / width
    qc = ql / depth
    phi = float(np.angle(1.0 - zn[i]))
    return f0, ql, qc, phi, depth


def fit_s21(trace: S21Trace, initial_guess: FitResult | None = None,
            max_iterations: int = MAX_ITERATIONS, step_tol: float = STEP_TOL) -> FitResult:
    """Fit a notch resonance to ``trace`` by damped least squares.

    A linear complex baseline fitted over the outer 20% of the span
    normalizes the trace for the initial guess and seeds a complex linear
    background that is then fitted jointly with the resonance, so tails
    leaking into the baseline region do not bias the result.
    """
    f = trace.frequencies
    z = trace.s21
    if f.size < MIN_FIT_POINTS:
        raise FitError(f"need at least {MIN_FIT_POINTS} points, got {f.size}")

    f_ref = 0.5 * (f[0] + f[-1])
    f_scale = 0.5 * (f[-1] - f[0])
    t = (f - f_ref) / f_scale
    mask = _outer_mask(f)
    A = np.column_stack([np.ones(mask.sum()), t[mask]])
    coef, *_ = np.linalg.lstsq(A, z[mask], rcond=None)
    base = coef[0] + coef[1] * t
    if np.any(np.abs(base) == 0):
        raise FitError("degenerate baseline")
    zn = z / base
    noise = _noise_floor(z, mask)

    if initial_guess is None:
        f0_g, ql_g, qc_g, phi_g, _ = _initial_guess(f, zn, noise / abs(coef[0]))
    else:
        _initial_guess(f, zn, noise / abs(coef[0]))
        f0_g, ql_g = initial_guess.f0, initial_guess.ql
        qc_g, phi_g = initial_guess.qc, initial_guess.asymmetry_angle

    half_lw = 0.5 * f0_g / ql_g
    if f[0] > f0_g - 6 * half_lw or f[-1] < f0_g + 6 * half_lw:
        warnings.warn("trace spans less than +-3 linewidths around the dip", stacklevel=2)

    # p = [f0 offset in half-linewidths, ln Ql, ln |Qc|, phi, Re/Im b0, Re/Im b1]
    def unpack(p):
        f0 = f0_g + p[0] * half_lw
        return f0, math.exp(p[1]), math.exp(p[2]), p[3], complex(p[4], p[5]), complex(p[6], p[7])

    def residuals(p):
        f0, ql, qc, phi, b0, b1 = unpack(p)
        r = (b0 + b1 * t) * notch_s21(f, f0, ql, qc, phi) - z
        return np.concatenate([r.real, r.imag])

    def jacobian(p):
        f0, ql, qc, phi, b0, b1 = unpack(p)
        D = 1.0 + 2j * ql * (f - f0) / f0
        g = (ql / qc) * np.exp(1j * phi)
        N = 1.0 - g / D
        B = b0 + b1 * t
        cols = [
            B * 2j * g / D ** 2 * (-ql * f / f0 ** 2) * half_lw,
            -B * g / D ** 2,
            B * g / D,
            -1j * B * g / D,
            N, 1j * N, t * N, 1j * t * N,
        ]
        J = np.column_stack(cols)
        return np.vstack([J.real, J.imag])

    p0 = np.array([0.0, math.log(ql_g), math.log(qc_g), phi_g,
                   coef[0].real, coef[0].imag, coef[1].real, coef[1].imag])
    sol = least_squares(residuals, p0, jac=jacobian, method="lm", xtol=step_tol, ftol=1e-15,
                        gtol=1e-15, max_nfev=max_iterations)
    f0, ql, qc, phi, b0, b1 = unpack(sol.x)
    phi = math.remainder(phi, 2 * math.pi)
    r = sol.fun[: f.size] + 1j * sol.fun[f.size:]
    rms = float(np.sqrt(np.mean(np.abs(r) ** 2)))
    best = dict(f0=f0, ql=ql, qc=qc, asymmetry_angle=phi, residual_rms=rms)

    if sol.status == 0:
        raise FitError(f"no convergence after {max_iterations} iterations", best)
    inv_qi = 1.0 / ql - math.cos(phi) / qc
    if not inv_qi > 0:
        raise FitError("fit implies a non-positive internal Q", best)
    qi = 1.0 / inv_qi
    if rms > 3.0 * noise + RESIDUAL_FLOOR * abs(b0):
        raise FitError(f"residual rms {rms:.3g} exceeds 3x noise floor {noise:.3g}", best)

    uncertainties = _uncertainties(sol, unpack, f.size)
    log.debug("fit f0=%.9g Qi=%.4g Qc=%.4g phi=%.3g rms=%.2g", f0, qi, qc, phi, rms)

    return FitResult(f0=f0, qi=qi, qc=qc, ql=ql, asymmetry_angle=phi,
                     residual_rms=rms, uncertainties=uncertainties, noise_floor=noise,
                     background=(complex(b0), complex(b1)),
                     freq_ref=float(f_ref), freq_scale=float(f_scale))


def _uncertainties(sol, unpack, n) -> dict:
    J = sol.jac
    dof = max(2 * n - J.shape[1], 1)
    s2 = float(np.sum(sol.fun ** 2)) / dof
    cov = np.linalg.pinv(J.T @ J) * s2

    def derived(p):
        f0, ql, qc, phi, _, _ = unpack(p)
        qi = 1.0 / (1.0 / ql - math.cos(phi) / qc)
        return np.array([f0, qi, qc, ql, phi])

    x = sol.x
    y0 = derived(x)
    G = np.empty((y0.size, x.size))
    for j in range(x.size):
        h = 1e-7 * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += h
        G[:, j] = (derived(xp) - y0) / h
    var = np.einsum("ij,jk,ik->i", G, cov, G)
    names = ("f0", "qi", "qc", "ql", "asymmetry_angle")
    return {k: float(math.sqrt(max(v, 0.0))) for k, v in zip(names, var)}


def dbm_to_watts(power_dbm: float) -> float:
    return 1e-3 * 10.0 ** (power_dbm / 10.0)


def photon_number(fit: FitResult, input_power: float) -> float:
    """Mean intra-resonator photon number for feedline power ``input_power`` (dBm).

    Uses <n> = 2 Ql^2 P_in / (hbar w0^2 Qc); the absolute value depends on the
    attenuation between the source and the feedline reference plane.
    """
    w0 = 2.0 * math.pi * fit.f0
    return 2.0 * fit.ql ** 2 * dbm_to_watts(input_power) / (hbar * w0 ** 2 * fit.qc)


@dataclass(frozen=True, eq=False)
class PowerSweepResult:
    photon_numbers: np.ndarray
    qi: np.ndarray
    qi_err: np.ndarray | None = None

    def __post_init__(self):
        n = np.asarray(self.photon_numbers, dtype=float)
        qi = np.asarray(self.qi, dtype=float)
        if n.shape != qi.shape or n.ndim != 1:
            raise DomainError("photon_numbers and qi must be 1-D of equal length")
        if np.any(n <= 0):
            raise DomainError("photon numbers must be positive")
        order = np.argsort(n, kind="stable")
        object.__setattr__(self, "photon_numbers", n[order])
        object.__setattr__(self, "qi", qi[order])
        if self.qi_err is not None:
            err = np.asarray(self.qi_err, dtype=float)
            if err.shape != n.shape:
                raise DomainError("qi_err must match qi")
            object.__setattr__(self, "qi_err", err[order])

    @property
    def points(self):
        err = self.qi_err if self.qi_err is not None else [None] * len(self.qi)
        return list(zip(self.photon_numbers.tolist(), self.qi.tolist(), list(err)))


def power_sweep(traces: Sequence[S21Trace], **fit_options) -> tuple[PowerSweepResult, list[FitResult]]:
    """Fit each trace and place it on the photon-number axis."""
    fits, n, qi, err = [], [], [], []
    for tr in traces:
        if tr.input_power is None:
            raise DomainError("every trace in a power sweep needs an input power")
        fr = fit_s21(tr, **fit_options)
        fits.append(fr)
        n.append(photon_number(fr, tr.input_power))
        qi.append(fr.qi)
        err.append(fr.uncertainties.get("qi", 0.0))
    return PowerSweepResult(np.array(n), np.array(qi), np.array(err)), fits


@dataclass(frozen=True)
class TlsFit:
    f_tan_delta: float
    critical_photon_number: float
    saturation_exponent: float
    power_independent_loss: float
    uncertainties: dict = field(default_factory=dict)

    def loss(self, photon_number):
        return tls_loss(photon_number, self.f_tan_delta, self.critical_photon_number,
                        self.saturation_exponent, self.power_independent_loss)


def tls_loss(photon_number, f_tan_delta, critical_photon_number, saturation_exponent,
             power_independent_loss):
    """1/Qi = F tan_delta / (1 + n/n_c)^alpha + 1/Q_HP."""
    n = np.asarray(photon_number, dtype=float)
    return (f_tan_delta / (1.0 + n / critical_photon_number) ** saturation_exponent
            + power_independent_loss)


def fit_tls_power_dependence(sweep: PowerSweepResult) -> TlsFit:
    """Weighted fit of the two-level-system saturation model to a power sweep."""
    n = sweep.photon_numbers
    if n.size < 5:
        raise FitError(f"need at least 5 sweep points, got {n.size}")
    if math.log10(n[-1] / n[0]) < 3.0:
        raise FitError("sweep spans fewer than 3 decades in photon number")
    loss = 1.0 / sweep.qi
    if sweep.qi_err is not None and np.all(sweep.qi_err > 0):
        sigma = sweep.qi_err / sweep.qi ** 2
    else:
        sigma = loss

    hp = float(loss[-1])
    lp = float(loss[0])
    ftd = max(lp - hp, 1e-3 * lp)
    mid = hp + 0.5 * ftd
    nc = float(n[int(np.argmin(np.abs(loss - mid)))])
    p0 = np.log([ftd, nc, 0.5, max(0.5 * hp, 1e-3 * lp)])

    def residuals(p):
        a, b, c, d = np.exp(p)
        return (tls_loss(n, a, b, c, d) - loss) / sigma

    sol = least_squares(residuals, p0, method="trf", xtol=1e-14, ftol=1e-14,
                        gtol=1e-14, max_nfev=2000)
    if not sol.success:
        raise FitError("TLS fit did not converge", dict(zip(
            ("f_tan_delta", "critical_photon_number", "saturation_exponent",
             "power_independent_loss"), np.exp(sol.x).tolist())))
    vals = np.exp(sol.x)
    dof = max(n.size - 4, 1)
    cov = np.linalg.pinv(sol.jac.T @ sol.jac) * float(np.sum(sol.fun ** 2)) / dof
    errs = vals * np.sqrt(np.clip(np.diag(cov), 0, None))
    names = ("f_tan_delta", "critical_photon_number", "saturation_exponent",
             "power_independent_loss")
    return TlsFit(*map(float, vals), uncertainties=dict(zip(names, map(float, errs))))
