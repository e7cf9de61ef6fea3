"""Momentum-space symbol of the periodic chain and its winding number.

Under periodic boundary conditions the dynamic matrix is circulant and
diagonalizes in plane waves; its spectrum is the closed complex curve

    h(k) = sum_{m=0}^{N-1} mu_m exp(-i k m),   k in [0, 2*pi),

built from the same Toeplitz coefficients as the real-space matrix.
The number of times this curve wraps the origin is an integer invariant
of the periodic chain.  Two evaluation routes are provided:

* phase summation over a uniformly sampled curve, with automatic sample
  doubling until every adjacent phase increment is below pi/2; and
* exact root counting: h(k) is a polynomial in w = exp(-i k), and the
  wrap count equals minus the number of polynomial zeros inside the
  unit disk.  Sampling cannot resolve curves that pass very close to
  the origin (near a transition the required sample count diverges), so
  the root route backs the sampled one and drives the transition search.

Note the finite sum matters: for a bus whose coherence length exceeds
the chain, the periodic spectrum never approaches its infinite-chain
limit, and the invariant changes at a pumping rate far below the
amplification threshold of the open chain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import AtTransitionError, ParameterDomainError, TransitionNotFoundError, UnsupportedRegimeError
from .model import NetworkParams, coupling_coefficients

#: sampled-curve refinement stops here and falls back to root counting
_MAX_SAMPLES = 1 << 20
#: relative gap-closing threshold for min_k |h(k)|
_TRANSITION_RTOL = 1e-8


@dataclass(frozen=True)
class SymbolCurve:
    """Sampled momentum-space symbol h(k) of the periodic chain."""

    k: np.ndarray
    h: np.ndarray
    params: NetworkParams
    n_cavities: int

    def to_csv(self) -> str:
        lines = ["k,re_h,im_h"]
        lines += [f"{format(k, '.17g')},{format(z.real, '.17g')},"
                  f"{format(z.imag, '.17g')}"
                  for k, z in zip(self.k, self.h)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class WindingResult:
    """Integer wrap count of the symbol curve plus gap diagnostics."""

    nu: int
    min_abs_h: float
    k_at_min: float
    samples_used: int
    method: str = "phase"

    def to_json(self) -> str:
        return json.dumps({
            "nu": self.nu,
            "min_abs_h": self.min_abs_h,
            "k_at_min": self.k_at_min,
            "samples_used": self.samples_used,
            "method": self.method,
        })


def symbol_values(params: NetworkParams, k: np.ndarray) -> np.ndarray:
    """Evaluate the finite-sum symbol at momenta k (reduced mod 2*pi)."""
    mu = coupling_coefficients(params)
    w = np.exp(-1j * (np.asarray(k, dtype=float) % (2 * np.pi)))
    return np.polynomial.polynomial.polyval(w, mu)


def symbol_limit(params: NetworkParams, k: np.ndarray) -> np.ndarray:
    """Infinite-chain limit of the symbol (geometric tail summed).

    Valid as an approximation when the coherence length is much shorter
    than the chain; used as an independent cross-check of the finite sum.
    """
    u = np.exp(-1.0 / params.coherence_length
               + 1j * params.phase_per_site) * np.exp(-1j * np.asarray(k, dtype=float))
    return params.mu0 - params.coupling_rate * u / (1.0 - u)


def symbol_curve(params: NetworkParams, n_samples: int = 4096) -> SymbolCurve:
    """Uniformly sampled symbol over one period, k in [0, 2*pi)."""
    if n_samples < 16:
        raise ParameterDomainError(f"n_samples must be >= 16, got {n_samples}")
    k = 2 * np.pi * np.arange(n_samples) / n_samples
    return SymbolCurve(k=k, h=symbol_values(params, k), params=params,
                       n_cavities=params.n_cavities)


def _gap_scale(params: NetworkParams) -> float:
    return max(params.coupling_rate, abs(params.mu0), np.finfo(float).tiny)


def _trim_degree(mu: np.ndarray) -> np.ndarray:
    """Drop trailing coefficients that cannot move the curve visibly."""
    tol = 1e-14 * np.max(np.abs(mu))
    d = len(mu) - 1
    while d > 0 and abs(mu[d]) <= tol:
        d -= 1
    return mu[:d + 1]


def winding_by_roots(params: NetworkParams) -> WindingResult:
    """Wrap count via polynomial zeros of the symbol inside the unit disk.

    Exact in exact arithmetic for any gap size; raises at a transition,
    where a zero sits on the circle and the count is undefined.
    """
    mu = _trim_degree(coupling_coefficients(params))
    curve = symbol_curve(params, 4096)
    absh = np.abs(curve.h)
    imin = int(np.argmin(absh))
    if len(mu) == 1:
        if abs(mu[0]) == 0.0:
            raise AtTransitionError("symbol is identically zero")
        return WindingResult(nu=0, min_abs_h=float(absh[imin]),
                             k_at_min=float(curve.k[imin]),
                             samples_used=len(curve.k), method="roots")
    roots = np.roots(mu[::-1])
    dist = np.abs(np.abs(roots) - 1.0)
    if np.min(dist) < 1e-12 or absh[imin] < _TRANSITION_RTOL * _gap_scale(params):
        raise AtTransitionError(
            "winding number undefined: a symbol zero lies on (or within "
            "1e-12 of) the unit circle")
    nu = -int(np.sum(np.abs(roots) < 1.0))
    return WindingResult(nu=nu, min_abs_h=float(absh[imin]),
                         k_at_min=float(curve.k[imin]),
                         samples_used=len(curve.k), method="roots")


def winding_number(params: NetworkParams, n_samples: int = 4096) -> WindingResult:
    """Wrap count by summing phase increments around the sampled curve.

    Samples are doubled until every adjacent increment is below pi/2;
    if the curve passes too close to the origin for sampling to resolve
    (more than 2^20 points needed), the exact root count is returned
    with the finest sampled gap diagnostic.
    """
    if n_samples < 16:
        raise ParameterDomainError(f"n_samples must be >= 16, got {n_samples}")
    scale = _gap_scale(params)
    n = n_samples
    while True:
        curve = symbol_curve(params, n)
        absh = np.abs(curve.h)
        imin = int(np.argmin(absh))
        if absh[imin] < _TRANSITION_RTOL * scale:
            raise AtTransitionError(
                f"winding number undefined at a gap closing: min |h| = "
                f"{absh[imin]:.3e} near k = {curve.k[imin]:.6f}")
        closed = np.concatenate([curve.h, curve.h[:1]])
        dphi = np.angle(closed[1:] / closed[:-1])
        if np.max(np.abs(dphi)) < np.pi / 2:
            total = float(np.sum(dphi))
            nu = int(round(total / (2 * np.pi)))
            return WindingResult(nu=nu, min_abs_h=float(absh[imin]),
                                 k_at_min=float(curve.k[imin]),
                                 samples_used=n, method="phase")
        if 2 * n > _MAX_SAMPLES:
            exact = winding_by_roots(params)
            return WindingResult(nu=exact.nu, min_abs_h=float(absh[imin]),
                                 k_at_min=float(curve.k[imin]),
                                 samples_used=n, method="roots")
        n *= 2


def _nu_for_search(params: NetworkParams, gamma: float) -> int:
    return winding_by_roots(params.replace(pump_rate=gamma)).nu


def tpt_locator(params: NetworkParams, scan: tuple[float, float]) -> float:
    """Pumping rate where the winding number jumps, by bisection.

    The scan bracket must straddle exactly one invariant change; the
    endpoints are classified first and the jump is then narrowed to an
    absolute tolerance of 1e-6 times the coupling rate.  Evaluations use
    the exact root count, which stays well conditioned arbitrarily close
    to the jump.  Requires zero detuning (the invariant is compared
    against resonance thresholds).
    """
    if params.detuning != 0.0:
        raise UnsupportedRegimeError(
            "transition search is defined at zero detuning")
    lo, hi = float(scan[0]), float(scan[1])
    if not lo < hi:
        raise ParameterDomainError(f"need scan[0] < scan[1], got {scan}")
    tol = 1e-6 * max(params.coupling_rate, 1e-6)

    def nu_at(g, fallback_step):
        # nudge off an exact gap closing; the bracket stays valid because
        # the shift is well below the current interval width
        try:
            return _nu_for_search(params, g), g
        except AtTransitionError:
            shifted = g + fallback_step
            return _nu_for_search(params, shifted), shifted

    nu_lo, lo = nu_at(lo, 1e-9)
    nu_hi, hi = nu_at(hi, -1e-9)
    if nu_lo == nu_hi:
        raise TransitionNotFoundError(
            f"winding number is {nu_lo} at both ends of the scan bracket "
            f"({lo}, {hi})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        try:
            nu_mid = _nu_for_search(params, mid)
        except AtTransitionError:
            # mid sits on the closing itself; shrink from the side whose
            # shifted probe still resolves
            probe = mid + 0.25 * (hi - lo)
            nu_probe = _nu_for_search(params, probe)
            if nu_probe == nu_hi:
                hi = probe
            else:
                lo = probe
            continue
        if nu_mid == nu_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
