"""Time-domain integration of the driven chain.

Integrates the mean-field equations of motion in the frame rotating at
the common cavity frequency,

    dx/dt = H x - sqrt(kappa) * a_in(t),

with H the open-boundary dynamic matrix at zero detuning and a
single-site monochromatic drive a_in(t) = A * exp(-i*dw*t) at the drive
site (dw taken from the drive, not from the lattice parameters).  The
output field is read off through the boundary condition
a_out = a_in + sqrt(kappa) * x.  After transients die out the ratio
a_out,probe / a_in,drive settles to the corresponding scattering-matrix
element, which makes the integrator an end-to-end oracle for the
frequency-domain solver.

The integrator is the classical fixed-step fourth-order Runge-Kutta
scheme; the state update uses compensated summation so that long runs
stay truncation-limited rather than rounding-limited.  Integration
starts from the empty chain, x(0) = 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ParameterDomainError, StepSizeError, UnstableSystemError
from .model import NetworkParams, build_dynamic_matrix, stability


@dataclass(frozen=True)
class DriveSpec:
    """Single-site monochromatic input drive (site index is 1-based)."""

    drive_site: int
    amplitude: complex
    detuning: float = 0.0


@dataclass(frozen=True)
class TimeSeries:
    """Stored trajectory: intracavity amplitudes and output fields."""

    times: np.ndarray        # shape (T,)
    amplitudes: np.ndarray   # shape (N, T)
    outputs: np.ndarray      # shape (N, T), a_out = a_in + sqrt(kappa) x
    params: NetworkParams
    drive: DriveSpec

    def to_csv(self, stride: int = 1) -> str:
        """Columns t, re_a1, im_a1, ..., re_aN, im_aN; every stride-th step."""
        if stride < 1:
            raise ParameterDomainError(f"stride must be >= 1, got {stride}")
        n = self.amplitudes.shape[0]
        header = "t," + ",".join(f"re_a{j+1},im_a{j+1}" for j in range(n))
        lines = [header]
        for i in range(0, len(self.times), stride):
            cells = [format(self.times[i], ".17g")]
            for j in range(n):
                z = self.amplitudes[j, i]
                cells.append(format(z.real, ".17g"))
                cells.append(format(z.imag, ".17g"))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def _check_drive(params: NetworkParams, drive: DriveSpec) -> None:
    if not 1 <= drive.drive_site <= params.n_cavities:
        raise ParameterDomainError(
            f"drive_site must be in 1..{params.n_cavities}, got "
            f"{drive.drive_site}")


def max_stable_dt(params: NetworkParams, drive: DriveSpec) -> float:
    """Largest step the integrator accepts for these inputs.

    0.1 / (|mu_0| + Gamma * min(zeta, N)), with the drive detuning in
    mu_0; a conservative bound keeping every mode deep inside the
    stability region of the scheme.
    """
    mu0 = (params.pump_rate - params.io_rate - params.coupling_rate) / 2 \
        + 1j * drive.detuning
    reach = params.coupling_rate * min(params.coherence_length,
                                       float(params.n_cavities))
    return 0.1 / (abs(mu0) + reach)


def integrate(params: NetworkParams, drive: DriveSpec, t_max: float,
              dt: float) -> TimeSeries:
    """Fixed-step trajectory from the empty chain under a single drive.

    Refuses unstable parameter sets (the attached report says why) and
    steps larger than the stability bound.  The trajectory is stored at
    every step, t = 0 included; t_max is rounded to a whole number of
    steps.
    """
    _check_drive(params, drive)
    report = stability(params)
    if not report.stable:
        raise UnstableSystemError(
            f"refusing to integrate an unstable chain (pump rate "
            f"{params.pump_rate} >= kappa + Gamma = "
            f"{params.io_rate + params.coupling_rate})", report=report)
    if not (dt > 0 and t_max > 0):
        raise ParameterDomainError("t_max and dt must be positive")
    dt_max = max_stable_dt(params, drive)
    if dt > dt_max:
        raise StepSizeError(
            f"dt = {dt} exceeds the integration bound {dt_max:.6g} for "
            "these parameters")
    steps = int(round(t_max / dt))
    if steps < 1:
        raise ParameterDomainError("t_max shorter than a single step")

    n = params.n_cavities
    H = build_dynamic_matrix(params.replace(detuning=0.0)).entries
    site = drive.drive_site - 1
    sqk = math.sqrt(params.io_rate)
    amp = complex(drive.amplitude)
    dw = drive.detuning

    drive_vec = np.zeros(n, dtype=complex)

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        drive_vec[site] = amp * cmath.exp(-1j * dw * t)
        return H @ x - sqk * drive_vec

    times = dt * np.arange(steps + 1)
    xs = np.zeros((n, steps + 1), dtype=complex)
    x = np.zeros(n, dtype=complex)
    comp = np.zeros(n, dtype=complex)
    for i in range(steps):
        t = i * dt
        k1 = rhs(t, x)
        k2 = rhs(t + dt / 2, x + (dt / 2) * k1)
        k3 = rhs(t + dt / 2, x + (dt / 2) * k2)
        k4 = rhs(t + dt, x + dt * k3)
        incr = (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        # compensated update keeps long runs truncation-limited
        y = incr - comp
        snew = x + y
        comp = (snew - x) - y
        x = snew
        xs[:, i + 1] = x

    a_in = np.zeros((n, steps + 1), dtype=complex)
    a_in[site] = amp * np.exp(-1j * dw * times)
    outputs = a_in + sqk * xs
    return TimeSeries(times=times, amplitudes=xs, outputs=outputs,
                      params=params, drive=drive)


def steady_state_gain(series: TimeSeries, drive: DriveSpec,
                      probe_site: int) -> complex:
    """Late-time a_out,probe / a_in,drive once the trajectory has settled.

    The ratio is averaged over a trailing window and accepted when two
    consecutive windows agree to a relative 1e-8; otherwise the residual
    change is reported in a convergence error.  The result equals the
    scattering-matrix element S(probe, drive) at the drive detuning.
    """
    n = series.amplitudes.shape[0]
    if not 1 <= probe_site <= n:
        raise ParameterDomainError(
            f"probe_site must be in 1..{n}, got {probe_site}")
    amp = complex(drive.amplitude)
    if amp == 0:
        raise ParameterDomainError("drive amplitude is zero; gain undefined")
    a_in = amp * np.exp(-1j * drive.detuning * series.times)
    ratio = series.outputs[probe_site - 1] / a_in

    steps = len(series.times) - 1
    dt = series.times[1] - series.times[0]
    span = series.times[-1]
    w = max(8, int(round(max(2.0, 0.05 * span) / dt)))
    if 2 * w > steps:
        raise ConvergenceError(
            "trajectory too short for two averaging windows; increase t_max")
    m1 = np.mean(ratio[-2 * w:-w])
    m2 = np.mean(ratio[-w:])
    residual = abs(m2 - m1) / max(abs(m2), np.finfo(float).tiny)
    if residual > 1e-8:
        raise ConvergenceError(
            f"steady state not reached: window-to-window change {residual:.3e}"
            " exceeds 1e-8; increase t_max", residual=residual)
    return complex(m2)
