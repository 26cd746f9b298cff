"""Smooth high-energy cutoff functions and their operator versions.

The ramp is the canonical C-infinity step sigma(t) = e^{-1/t} /
(e^{-1/t} + e^{-1/(1-t)}), which is strictly increasing on (0, 1); the
'mourre' cutoff ramps from R to 2R, the 'tilde' cutoff from 4R to 5R, both
even in s."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .spectral_core import (
    EnsembleSpec,
    GridSpace,
    HermitianOperator,
    apply_function,
    ensemble_norm,
)


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing
    between."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    lo = t <= 0
    hi = t >= 1
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class CutoffSpec:
    """R and ramp placement: 'mourre' ramps on [R, 2R], 'tilde' on [4R, 5R]."""

    R: float
    kind: str = "mourre"

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if self.kind not in ("mourre", "tilde"):
            raise ValueError(f"unknown cutoff kind {self.kind!r}")

    @property
    def ramp_start(self) -> float:
        return self.R if self.kind == "mourre" else 4 * self.R

    @property
    def ramp_end(self) -> float:
        return 2 * self.R if self.kind == "mourre" else 5 * self.R


def cutoff_function(spec: CutoffSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Even cutoff phi with phi = 0 on |s| <= ramp_start, phi = 1 on
    |s| >= ramp_end, smooth and strictly increasing on the ramp."""
    lo, hi = spec.ramp_start, spec.ramp_end
    width = hi - lo

    def phi(s):
        s = np.asarray(s, dtype=float)
        out = smooth_step((np.abs(s) - lo) / width)
        return out if np.ndim(out) else float(out)

    return phi


def cutoff_operator(H: HermitianOperator, spec: CutoffSpec) -> HermitianOperator:
    """phi(H) via exact functional calculus; commutes with H exactly in the
    shared eigenbasis."""
    return apply_function(H, cutoff_function(spec))


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares exponent of y ~ C x^alpha on log-log axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit requires positive data")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def cutoff_commutator_scan(H: HermitianOperator, A: HermitianOperator,
                           R_list: Sequence[float], e: EnsembleSpec,
                           g: GridSpace, kind: str = "mourre") -> dict:
    """Measure ensemble norms of [phi_R(H), A] over a list of R values.

    Returns the (R, norm) table sorted by R and the fitted power-law
    exponent (the commutator-expansion prediction is exponent -1)."""
    lam_max = float(np.max(np.abs(H.eigenvalues)))
    rows = []
    for R in sorted(float(R) for R in R_list):
        spec = CutoffSpec(R=R, kind=kind)
        if spec.ramp_end > lam_max:
            raise ValueError(
                f"cutoff ramp end {spec.ramp_end:.4g} exceeds the spectral "
                f"reach {lam_max:.4g} of H on this grid"
            )
        phiH = cutoff_operator(H, spec)
        comm = phiH.matrix @ A.matrix - A.matrix @ phiH.matrix
        rows.append((R, ensemble_norm(comm, e, g)))
    Rs = [r for r, _ in rows]
    norms = [n for _, n in rows]
    exponent = fit_power_law(Rs, norms) if all(n > 0 for n in norms) else float("-inf")
    return {"table": rows, "exponent": exponent}


def ramp_derivative_bounds(spec: CutoffSpec, samples: int = 20001) -> dict:
    """Measured sups of |phi'| and |phi''| on a fine scan of the ramp.

    Both scale like 1/R and 1/R^2 of the unit-step constants."""
    phi = cutoff_function(spec)
    lo, hi = spec.ramp_start, spec.ramp_end
    s = np.linspace(lo, hi, samples)
    h = s[1] - s[0]
    vals = phi(s)
    d1 = np.gradient(vals, h, edge_order=2)
    d2 = np.gradient(d1, h, edge_order=2)
    return {"max_phi_prime": float(np.max(np.abs(d1))),
            "max_phi_second": float(np.max(np.abs(d2)))}
