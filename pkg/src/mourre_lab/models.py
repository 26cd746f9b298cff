"""Concrete operator builders: the dispersive Hamiltonian
H = a (p^2 + b^2)^gamma + V, its regularized-dilation conjugate operator A,
the weighted generator P, applied x/p weights, and the translation model
used by the covariance counterexample."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spectral_core import (
    GridSpace,
    HermitianOperator,
    apply_function,
    bracket_weight,
    momentum_operator,
    position_operator,
)


@dataclass(frozen=True)
class PotentialSpec:
    """Multiplication potential sampled at grid points.

    kind 'bracket_decay' realizes V(x) = C (1 + x^2)^{-rho/2}; 'custom'
    takes explicit grid values; 'zero' is the free case.
    """

    kind: str = "zero"
    C: float = 0.0
    rho: float = 2.0
    custom_values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "bracket_decay", "custom"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "bracket_decay" and not self.rho > 0:
            raise ValueError("bracket_decay requires rho > 0")
        if self.kind == "custom" and self.custom_values is None:
            raise ValueError("custom potential requires custom_values")

    def values(self, g: GridSpace) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(g.N)
        if self.kind == "bracket_decay":
            x = g.coordinates
            return self.C * (1.0 + x**2) ** (-self.rho / 2)
        v = np.asarray(self.custom_values, dtype=float)
        if v.shape != (g.N,):
            raise ValueError(f"custom_values must have shape ({g.N},)")
        return v


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of H = a (p^2 + b^2)^gamma + V and its conjugate operator.

    conjugate_normalization 'full' is G x + x G; 'half' multiplies by 1/2
    (the classical dilation-generator convention).
    """

    a: float = 1.0
    b: float = 0.0
    gamma: float = 1.0
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    conjugate_normalization: str = "full"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if self.gamma < 0.5:
            raise ValueError(f"gamma must be >= 1/2, got {self.gamma}")
        if self.conjugate_normalization not in ("full", "half"):
            raise ValueError("conjugate_normalization must be 'full' or 'half'")

    @property
    def norm_factor(self) -> float:
        return 1.0 if self.conjugate_normalization == "full" else 0.5

    def dispersion(self) -> Callable[[np.ndarray], np.ndarray]:
        """h(k) = a (k^2 + b^2)^gamma."""
        a, b, gamma = self.a, self.b, self.gamma
        return lambda k: a * (k**2 + b**2) ** gamma

    def group_speed(self) -> Callable[[np.ndarray], np.ndarray]:
        """h'(k) = 2 a gamma k (k^2 + b^2)^{gamma - 1}."""
        a, b, gamma = self.a, self.b, self.gamma

        def hp(k):
            k = np.asarray(k, dtype=float)
            base = k**2 + b**2
            with np.errstate(divide="ignore", invalid="ignore"):
                out = 2 * a * gamma * k * base ** (gamma - 1)
            return np.where(base == 0, 0.0, out)

        return hp

    def conjugate_multiplier(self) -> Callable[[np.ndarray], np.ndarray]:
        """g(k) = k (1 + k^2 + b^2)^{-gamma}, the regularizing factor of A."""
        b, gamma = self.b, self.gamma
        return lambda k: k * (1.0 + k**2 + b**2) ** (-gamma)

    def invert_dispersion(self, lam: np.ndarray) -> np.ndarray:
        """k >= 0 with h(k) = lam; values below the dispersion minimum clamp
        to k = 0."""
        lam = np.asarray(lam, dtype=float)
        k2 = np.maximum((np.maximum(lam, 0.0) / self.a) ** (1.0 / self.gamma) - self.b**2, 0.0)
        return np.sqrt(k2)


def hamiltonian(g: GridSpace, m: ModelSpec) -> HermitianOperator:
    """H = a (p^2 + b^2)^gamma + V as a dense Hermitian matrix."""
    p = momentum_operator(g)
    H0 = apply_function(p, m.dispersion())
    V = m.potential.values(g)
    if np.any(V != 0):
        return HermitianOperator(H0.matrix + np.diag(V.astype(complex)))
    return H0


def conjugate_operator(g: GridSpace, m: ModelSpec,
                       return_defect: bool = False):
    """Regularized dilation generator A = G X + X G (symmetrized), with
    G = g(p) = p (1 + p^2 + b^2)^{-gamma}.

    Half normalization multiplies by 1/2.  The pre-symmetrization defect is
    available via ``return_defect`` for diagnostics; it is round-off only.
    """
    p = momentum_operator(g)
    G = apply_function(p, m.conjugate_multiplier())
    X = position_operator(g)
    raw = G.matrix @ X.matrix + X.matrix @ G.matrix
    raw *= m.norm_factor
    defect = float(np.linalg.norm(raw - raw.conj().T))
    A = HermitianOperator((raw + raw.conj().T) / 2)
    if return_defect:
        return A, defect
    return A


def commutator_symbol(m: ModelSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Leading commutator multiplier 2 g(k) h'(k); equals
    4 gamma a k^2 (k^2+b^2)^{gamma-1} (1+k^2+b^2)^{-gamma} for full
    normalization (half normalization halves it).  Continuous limit 0 at
    k = 0 even when gamma < 1 and b = 0."""
    g = m.conjugate_multiplier()
    hp = m.group_speed()
    factor = m.norm_factor

    def symbol(k):
        k = np.asarray(k, dtype=float)
        out = 2.0 * factor * g(k) * hp(k)
        return out if out.ndim else float(out)

    return symbol


def build_P(H: HermitianOperator, A: HermitianOperator, beta: float) -> HermitianOperator:
    """Smoothing generator P = <H>^{2 beta} A + A <H>^{2 beta}."""
    if not 0.0 <= beta <= 0.5:
        raise ValueError(f"beta must lie in [0, 1/2], got {beta}")
    if H.n != A.n:
        raise ValueError("dimension mismatch between H and A")
    Z2 = bracket_weight(H, -2.0 * beta)  # <H>^{2 beta}
    raw = Z2.matrix @ A.matrix + A.matrix @ Z2.matrix
    return HermitianOperator(raw)


def applied_weight(g: GridSpace, s: float, theta: float) -> np.ndarray:
    """Mixed weight <x>^{-s} <p>^{theta}; generally non-Hermitian."""
    X = position_operator(g)
    Wx = bracket_weight(X, s)
    p = momentum_operator(g)
    Wp = apply_function(p, lambda k: (1.0 + k**2) ** (theta / 2))
    return Wx.matrix @ Wp.matrix


def translation_model(g: GridSpace) -> HermitianOperator:
    """H = p, the counterexample model with no high-energy resolvent decay."""
    return momentum_operator(g)


def potential_symbol_bound_check(g: GridSpace, pot: PotentialSpec,
                                 max_order: int = 4,
                                 bulk_fraction: float = 0.75) -> dict:
    """Measure sup over the bulk of |<x>^{rho+alpha} d^alpha V| for
    alpha <= max_order, with centered finite differences on the grid.

    Returns per-order sups; finiteness of these is the decay condition on V.
    """
    V = pot.values(g)
    x = g.coordinates
    h = g.spacing
    mask = np.abs(x) <= bulk_fraction * (g.L / 2)
    rho = pot.rho if pot.kind == "bracket_decay" else 0.0
    sups = {}
    deriv = V.astype(float)
    for alpha in range(max_order + 1):
        if alpha > 0:
            deriv = np.gradient(deriv, h, edge_order=2)
        w = (1.0 + x**2) ** ((rho + alpha) / 2)
        sups[alpha] = float(np.max(np.abs(w * deriv)[mask]))
    return sups
