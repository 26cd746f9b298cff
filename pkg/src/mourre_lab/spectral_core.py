"""Discretization substrate: periodic Fourier grid, states, dense Hermitian
operators with cached eigendecomposition, exact functional calculus, bracket
weights, and norm estimation.

All operators live on an N-point periodic grid over a box of length L.  The
momentum operator is exactly diagonal in the plane-wave basis; the position
operator is the sawtooth coordinate, whose canonical-commutator defect is
concentrated at the box seam.  Continuum identities are therefore asserted
only on bulk, band-limited wave packets (see ``ensemble_norm``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Switchover between dense SVD and power iteration in operator_norm.
DENSE_NORM_LIMIT = 512

HERMITICITY_RTOL = 1e-8


class GridError(ValueError):
    pass


class HermiticityError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpace:
    """N-point periodic Fourier grid on [-L/2, L/2)."""

    N: int
    L: float
    spacing: float = field(init=False)
    coordinates: np.ndarray = field(init=False, repr=False)
    wavenumbers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        N, L = self.N, self.L
        if N < 8 or (N & (N - 1)) != 0:
            raise GridError(f"N must be a power of two >= 8, got {N}")
        if not L > 0:
            raise GridError(f"L must be positive, got {L}")
        object.__setattr__(self, "spacing", L / N)
        x = -L / 2 + np.arange(N) * (L / N)
        m = np.arange(-N // 2, N // 2)
        k = 2 * np.pi * m / L
        object.__setattr__(self, "coordinates", x)
        object.__setattr__(self, "wavenumbers", k)
        self.coordinates.setflags(write=False)
        self.wavenumbers.setflags(write=False)

    @property
    def k_max(self) -> float:
        return float(-self.wavenumbers[0])


def make_grid(N: int, L: float) -> GridSpace:
    """Build a GridSpace; rejects non-power-of-two N and non-positive L."""
    return GridSpace(int(N), float(L))


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over a GridSpace; norms are plain Euclidean."""

    grid: GridSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.grid.N,):
            raise ValueError(f"amplitudes must have shape ({self.grid.N},)")
        if not np.all(np.isfinite(amp)):
            raise ValueError("non-finite amplitudes")
        object.__setattr__(self, "amplitudes", amp)
        amp.setflags(write=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


class HermitianOperator:
    """Dense self-adjoint matrix with a lazily cached eigendecomposition.

    The constructor records the hermiticity defect ``||M - M*||_F`` and
    stores the symmetrized matrix (M + M*)/2.  A defect exceeding
    ``HERMITICITY_RTOL * (1 + ||M||_F)`` raises, since it signals an
    algebra bug rather than round-off.
    """

    def __init__(self, matrix: np.ndarray, check_tol: float = HERMITICITY_RTOL):
        M = np.asarray(matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("non-finite matrix entries")
        defect = float(np.linalg.norm(M - M.conj().T))
        scale = 1.0 + float(np.linalg.norm(M))
        if defect > check_tol * scale:
            raise HermiticityError(
                f"hermiticity defect {defect:.3e} exceeds {check_tol:.1e} * {scale:.3e}"
            )
        self.matrix = (M + M.conj().T) / 2
        self.matrix.setflags(write=False)
        self.hermiticity_defect = defect
        self._eig: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and unitary eigenvector matrix, cached."""
        if self._eig is None:
            w, U = np.linalg.eigh(self.matrix)
            w.setflags(write=False)
            U.setflags(write=False)
            self._eig = (w, U)
        return self._eig

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig()[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.eig()[1]

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(psi, dtype=complex)

    def expectation(self, psi: np.ndarray) -> float:
        psi = np.asarray(psi, dtype=complex)
        val = np.vdot(psi, self.matrix @ psi) / np.vdot(psi, psi)
        return float(val.real)

    def __add__(self, other):
        if isinstance(other, HermitianOperator):
            return HermitianOperator(self.matrix + other.matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, HermitianOperator):
            return HermitianOperator(self.matrix - other.matrix)
        return NotImplemented

    def __rmul__(self, scalar):
        if np.isscalar(scalar) and np.isrealobj(np.asarray(scalar)):
            return HermitianOperator(float(scalar) * self.matrix)
        return NotImplemented


def position_operator(g: GridSpace) -> HermitianOperator:
    """Sawtooth coordinate: diag(x_j) over the periodic box."""
    return HermitianOperator(np.diag(g.coordinates.astype(complex)))


def plane_wave_basis(g: GridSpace) -> np.ndarray:
    """Unitary matrix whose columns are the normalized plane waves
    e^{i k_m x_j} / sqrt(N), ordered by ascending wavenumber."""
    phase = np.outer(g.coordinates, g.wavenumbers)
    return np.exp(1j * phase) / np.sqrt(g.N)


def momentum_operator(g: GridSpace) -> HermitianOperator:
    """p = -i d/dx realized as conjugation of diag(k_m) by the DFT."""
    U = plane_wave_basis(g)
    P = (U * g.wavenumbers) @ U.conj().T
    op = HermitianOperator(P)
    # plane waves are exact eigenvectors; install the known decomposition
    op._eig = (g.wavenumbers.copy(), U)
    op._eig[0].setflags(write=False)
    op._eig[1].setflags(write=False)
    return op


def apply_function(M: HermitianOperator, f: Callable[[np.ndarray], np.ndarray]) -> HermitianOperator:
    """Exact functional calculus U f(Lambda) U*.

    ``f`` is applied to the eigenvalue array; it must return finite values
    on the whole spectrum.
    """
    w, U = M.eig()
    fw = np.asarray(f(w), dtype=float)
    if fw.shape != w.shape:
        fw = np.broadcast_to(fw, w.shape).astype(float)
    bad = ~np.isfinite(fw)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise ValueError(
            f"f returned non-finite value {fw[idx]} at eigenvalue {w[idx]}"
        )
    out = HermitianOperator((U * fw) @ U.conj().T)
    order = np.argsort(fw)
    out._eig = (fw[order].copy(), np.ascontiguousarray(U[:, order]))
    out._eig[0].setflags(write=False)
    out._eig[1].setflags(write=False)
    return out


def bracket_weight(M: HermitianOperator, s: float) -> HermitianOperator:
    """Japanese-bracket weight <M>^{-s} = (1 + M^2)^{-s/2}.

    Negative s produces growing weights (useful to build <M>^{+|s|}).
    """
    return apply_function(M, lambda lam: (1.0 + lam**2) ** (-s / 2))


def resolvent(M: HermitianOperator, z: complex) -> np.ndarray:
    """(M - z)^{-1} from the eigendecomposition; requires Im z != 0 or z
    off the spectrum."""
    w, U = M.eig()
    d = w - z
    if np.any(d == 0):
        raise ZeroDivisionError(f"z = {z} is an eigenvalue of M")
    return (U * (1.0 / d)) @ U.conj().T


def operator_norm(M: np.ndarray, method: str = "auto", tol: float = 1e-10,
                  max_iter: int = 10000) -> float:
    """Largest singular value.

    Dense SVD for n <= DENSE_NORM_LIMIT, power iteration on M*M above
    (or force either with ``method``).
    """
    M = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise ValueError("non-finite matrix entries")
    n = max(M.shape)
    if method == "auto":
        method = "svd" if n <= DENSE_NORM_LIMIT else "power"
    if method == "svd":
        return float(np.linalg.norm(M, 2))
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    # power iteration on the PSD matrix M*M
    rng = np.random.default_rng(0)
    v = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    Mh = M.conj().T
    sigma2 = 0.0
    for _ in range(max_iter):
        w = Mh @ (M @ v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - sigma2) <= tol * max(new, 1.0):
            sigma2 = new
            break
        sigma2 = new
    return float(np.sqrt(sigma2))


@dataclass(frozen=True)
class EnsembleSpec:
    """Bulk, band-limited Gaussian packets used as continuum proxies.

    packets: sequence of (x0, k0, sigma).  bulk_margin / band_margin are the
    fractions of the box and the Nyquist band excluded at the edges; packet
    tails at the excluded margins must be below TAIL_TOL.
    """

    packets: tuple
    bulk_margin: float = 0.125
    band_margin: float = 0.125

    TAIL_TOL = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "packets", tuple(tuple(map(float, p)) for p in self.packets))
        if not (0 < self.bulk_margin < 0.5):
            raise ValueError("bulk_margin must lie in (0, 0.5)")
        if not (0 < self.band_margin < 1):
            raise ValueError("band_margin must lie in (0, 1)")

    def validate(self, g: GridSpace) -> None:
        for (x0, k0, sigma) in self.packets:
            _check_packet(g, x0, k0, sigma, self.bulk_margin, self.band_margin)


class PacketMarginError(ValueError):
    pass


def _check_packet(g: GridSpace, x0: float, k0: float, sigma: float,
                  bulk_margin: float, band_margin: float) -> None:
    if sigma <= 0:
        raise PacketMarginError(f"sigma must be positive, got {sigma}")
    x_lim = g.L / 2 * (1 - 2 * bulk_margin)
    k_lim = g.k_max * (1 - band_margin)
    if abs(x0) > x_lim:
        raise PacketMarginError(f"|x0| = {abs(x0):.4g} exceeds bulk limit {x_lim:.4g}")
    if abs(k0) > k_lim:
        raise PacketMarginError(f"|k0| = {abs(k0):.4g} exceeds band limit {k_lim:.4g}")
    tol = EnsembleSpec.TAIL_TOL
    # spatial tail exp(-d^2 / (4 sigma^2)) at the box seam
    d_x = g.L / 2 - abs(x0)
    if np.exp(-d_x**2 / (4 * sigma**2)) > tol:
        raise PacketMarginError(
            f"spatial tail {np.exp(-d_x**2 / (4 * sigma**2)):.2e} at the seam exceeds {tol:.0e}"
        )
    # spectral envelope exp(-sigma^2 dk^2) at the Nyquist edge
    d_k = g.k_max - abs(k0)
    if np.exp(-(sigma * d_k) ** 2) > tol:
        raise PacketMarginError(
            f"spectral tail {np.exp(-(sigma * d_k)**2):.2e} at the band edge exceeds {tol:.0e}"
        )


def wave_packet(g: GridSpace, x0: float, k0: float, sigma: float,
                bulk_margin: float = 0.125, band_margin: float = 0.125) -> StateVector:
    """Normalized Gaussian exp(-(x-x0)^2/(4 sigma^2)) exp(i k0 x).

    Rejects packets whose tails reach the box seam or band edge.
    """
    _check_packet(g, x0, k0, sigma, bulk_margin, band_margin)
    x = g.coordinates
    amp = np.exp(-((x - x0) ** 2) / (4 * sigma**2)) * np.exp(1j * k0 * x)
    amp = amp / np.linalg.norm(amp)
    return StateVector(g, amp)


def ensemble_states(g: GridSpace, e: EnsembleSpec) -> list[StateVector]:
    e.validate(g)
    return [wave_packet(g, x0, k0, sigma, e.bulk_margin, e.band_margin)
            for (x0, k0, sigma) in e.packets]


def ensemble_norm(M, e: EnsembleSpec, g: GridSpace | None = None) -> float:
    """max over ensemble packets psi of ||M psi|| / ||psi||.

    Seam-insensitive proxy for the continuum operator norm.  ``M`` may be a
    HermitianOperator or a plain matrix.
    """
    if isinstance(M, HermitianOperator):
        mat = M.matrix
    else:
        mat = np.asarray(M, dtype=complex)
    if not e.packets:
        raise ValueError("empty ensemble")
    if g is None:
        raise ValueError("grid required to realize ensemble packets")
    states = ensemble_states(g, e)
    best = 0.0
    for psi in states:
        v = psi.amplitudes
        best = max(best, float(np.linalg.norm(mat @ v) / np.linalg.norm(v)))
    return best


def default_ensemble(g: GridSpace, k_values: Sequence[float] | None = None,
                     sigma: float | None = None) -> EnsembleSpec:
    """Ensemble of centered packets at a spread of bulk momenta."""
    if sigma is None:
        sigma = g.L / 24
    if k_values is None:
        k_hi = g.k_max * 0.8
        k_values = np.linspace(-k_hi, k_hi, 9)
    packets = tuple((0.0, float(k), float(sigma)) for k in k_values)
    return EnsembleSpec(packets=packets)
