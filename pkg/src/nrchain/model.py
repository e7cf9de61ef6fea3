"""Cavity-chain lattice model and its non-Hermitian dynamic matrix.

A chain of N identical bosonic cavities sits on integer positions
x_j = j (unit spacing) and couples to a bus whose modes travel only from
site 1 toward site N.  After eliminating the bus, the mean-field
amplitude of cavity j obeys a linear equation of motion whose matrix has

* diagonal mu_0 = (gamma - kappa - Gamma)/2 + i*delta_omega, and
* strictly lower-triangular hopping  -Gamma * exp(-m/zeta) * exp(i*phi*m)
  at offset m = j - l > 0,

in a frame rotating at the common cavity frequency.  Here Gamma is the
cavity-bus coupling rate, kappa the input/output rate, gamma the net
pumping rate, zeta the coherence length of the bus (in units of the
spacing), delta_omega the signal detuning and phi the propagation phase
accumulated per site.  Under open boundary conditions (OBC) the matrix
is lower-triangular Toeplitz; under periodic boundary conditions (PBC)
the couplings wrap around and the matrix is circulant.

Because the OBC matrix is triangular, its spectrum is the N-fold
degenerate diagonal, so stability is a purely local statement:
amplitudes relax if and only if gamma < kappa + Gamma.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError

OBC = "obc"
PBC = "pbc"

#: JSON field name -> constructor argument of NetworkParams
_JSON_FIELDS = {
    "n": "n_cavities",
    "Gamma": "coupling_rate",
    "kappa": "io_rate",
    "gamma_pump": "pump_rate",
    "zeta": "coherence_length",
    "delta_omega": "detuning",
    "phi": "phase_per_site",
}


@dataclass(frozen=True)
class NetworkParams:
    """Full physical parameter set of the driven-dissipative chain.

    Rates are in units of an arbitrary common rate scale; lengths are in
    units of the lattice spacing.  ``coherence_length`` may be
    ``math.inf`` (or simply much larger than ``n_cavities``) to model an
    infinitely long-ranged bus.
    """

    n_cavities: int
    coupling_rate: float      # Gamma, cavity-bus coupling
    io_rate: float            # kappa, input/output coupling
    pump_rate: float          # gamma, net pumping (may be negative)
    coherence_length: float   # zeta > 0
    detuning: float = 0.0     # delta_omega
    phase_per_site: float = 0.0

    def __post_init__(self):
        if int(self.n_cavities) != self.n_cavities or self.n_cavities < 2:
            raise ParameterDomainError(
                f"n_cavities must be an integer >= 2, got {self.n_cavities}")
        if not self.coupling_rate >= 0:
            raise ParameterDomainError(
                f"coupling_rate must be >= 0, got {self.coupling_rate}")
        if not self.io_rate > 0:
            raise ParameterDomainError(
                f"io_rate must be > 0, got {self.io_rate}")
        if not self.coherence_length > 0:
            raise ParameterDomainError(
                f"coherence_length must be > 0, got {self.coherence_length}")
        for name in ("pump_rate", "detuning", "phase_per_site"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterDomainError(f"{name} must be finite")

    @property
    def mu0(self) -> complex:
        """Diagonal entry of the dynamic matrix in the rotating frame."""
        return (self.pump_rate - self.io_rate - self.coupling_rate) / 2 \
            + 1j * self.detuning

    def replace(self, **changes) -> "NetworkParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "n": self.n_cavities,
            "gamma_pump": self.pump_rate,
            "kappa": self.io_rate,
            "Gamma": self.coupling_rate,
            "zeta": self.coherence_length,
            "delta_omega": self.detuning,
            "phi": self.phase_per_site,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkParams":
        unknown = set(d) - set(_JSON_FIELDS)
        if unknown:
            raise ParameterDomainError(
                f"unknown parameter keys: {sorted(unknown)}")
        missing = {"n", "Gamma", "kappa", "gamma_pump", "zeta"} - set(d)
        if missing:
            raise ParameterDomainError(
                f"missing parameter keys: {sorted(missing)}")
        kwargs = {_JSON_FIELDS[k]: v for k, v in d.items()}
        kwargs["n_cavities"] = int(kwargs["n_cavities"])
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "NetworkParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DynamicMatrix:
    """Dense complex matrix governing the mean-field amplitude dynamics."""

    entries: np.ndarray
    boundary: str
    params: NetworkParams

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the local stability criterion gamma < kappa + Gamma."""

    eigen_real_part: float
    stable: bool
    margin: float


def coupling_coefficients(params: NetworkParams, n: int | None = None) -> np.ndarray:
    """Toeplitz coefficients mu_m of the dynamic matrix, m = 0 .. n-1.

    mu_0 is the diagonal, mu_m (m > 0) the hopping at offset m.
    """
    n = params.n_cavities if n is None else n
    mu = np.empty(n, dtype=complex)
    mu[0] = params.mu0
    m = np.arange(1, n)
    mu[1:] = -params.coupling_rate * np.exp(-m / params.coherence_length) \
        * np.exp(1j * params.phase_per_site * m)
    return mu


def build_dynamic_matrix(params: NetworkParams, boundary: str = OBC) -> DynamicMatrix:
    """Assemble the dense dynamic matrix under the given boundary condition.

    OBC yields a lower-triangular Toeplitz matrix (the bus is one-way, so
    a cavity only feels the ones upstream of it).  PBC wraps the chain
    into a circulant with entry (j, l) = mu_{(j-l) mod N}.
    """
    if boundary not in (OBC, PBC):
        raise ParameterDomainError(f"boundary must be '{OBC}' or '{PBC}'")
    n = params.n_cavities
    mu = coupling_coefficients(params)
    M = np.zeros((n, n), dtype=complex)
    for m in range(n):
        idx = np.arange(n - m)
        M[idx + m, idx] = mu[m]
        if boundary == PBC and m > 0:
            idx = np.arange(m)
            M[idx, idx + n - m] = mu[m]
    return DynamicMatrix(entries=M, boundary=boundary, params=params)


def stability(params: NetworkParams) -> StabilityReport:
    """Classify the chain as stable (strictly) or unstable.

    All OBC eigenvalues share the real part (gamma - kappa - Gamma)/2, so
    the chain is stable precisely when gamma < kappa + Gamma; the margin
    kappa + Gamma - gamma is reported (zero or negative means unstable).
    """
    re = (params.pump_rate - params.io_rate - params.coupling_rate) / 2
    margin = params.io_rate + params.coupling_rate - params.pump_rate
    return StabilityReport(eigen_real_part=re, stable=margin > 0, margin=margin)
