"""Grid, operator substrate, functional calculus, and ensemble tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mourre_lab.spectral_core import (
    DENSE_NORM_LIMIT,
    EnsembleSpec,
    GridError,
    HermitianOperator,
    HermiticityError,
    PacketMarginError,
    apply_function,
    bracket_weight,
    default_ensemble,
    ensemble_norm,
    ensemble_states,
    make_grid,
    momentum_operator,
    operator_norm,
    plane_wave_basis,
    position_operator,
    resolvent,
    wave_packet,
)


def _random_hermitian(n, rng):
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (M + M.conj().T) / 2


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------

def test_grid_example_n8():
    g = make_grid(8, 2 * np.pi)
    expected = -np.pi + np.arange(8) * np.pi / 4
    np.testing.assert_allclose(g.coordinates, expected, atol=1e-15)
    assert g.spacing == pytest.approx(np.pi / 4)
    np.testing.assert_allclose(
        g.wavenumbers, np.arange(-4, 4) / 1.0, atol=1e-15)


def test_grid_rejects_bad_sizes():
    with pytest.raises(GridError):
        make_grid(1000, 10.0)
    with pytest.raises(GridError):
        make_grid(4, 10.0)
    with pytest.raises(GridError):
        make_grid(64, -1.0)


@given(exp=st.integers(min_value=3, max_value=10),
       L=st.floats(min_value=0.1, max_value=1e4,
                   allow_nan=False, allow_infinity=False))
@settings(max_examples=40, deadline=None)
def test_grid_invariants(exp, L):
    g = make_grid(2**exp, L)
    assert g.spacing * g.N == pytest.approx(g.L, rel=1e-12)
    assert np.all(np.diff(g.coordinates) > 0)
    # symmetric band: one more negative mode than positive (half-open)
    assert g.wavenumbers[0] == -g.k_max
    assert np.max(g.wavenumbers) < g.k_max


# ---------------------------------------------------------------------------
# hermitian operators and functional calculus
# ---------------------------------------------------------------------------

def test_hermiticity_defect_recorded_and_gated():
    rng = np.random.default_rng(0)
    M = _random_hermitian(16, rng)
    op = HermitianOperator(M + 1e-12 * 1j * np.eye(16))
    assert op.hermiticity_defect < 1e-10
    with pytest.raises(HermiticityError):
        HermitianOperator(M + np.triu(np.ones((16, 16)), 1))


def test_momentum_diagonal_in_plane_waves():
    g = make_grid(64, 2 * np.pi)
    p = momentum_operator(g)
    U = plane_wave_basis(g)
    # unitarity of the basis
    np.testing.assert_allclose(U.conj().T @ U, np.eye(64), atol=1e-12)
    # exact eigenpairs
    for col in (0, 17, 63):
        psi = U[:, col]
        np.testing.assert_allclose(
            p.matrix @ psi, g.wavenumbers[col] * psi, atol=1e-10)


def test_apply_function_polynomial_identity():
    rng = np.random.default_rng(1)
    M = HermitianOperator(_random_hermitian(24, rng))
    sq = apply_function(M, lambda w: w**2)
    np.testing.assert_allclose(sq.matrix, M.matrix @ M.matrix, atol=1e-10)


def test_apply_function_reports_offending_eigenvalue():
    M = HermitianOperator(np.diag([1.0, 4.0]))
    with pytest.raises(ValueError, match="4"):
        apply_function(M, lambda w: np.where(w > 2, np.inf, w))


def test_bracket_weight_oracle_2x2():
    M = HermitianOperator(np.diag([0.0, np.sqrt(3.0)]))
    W = bracket_weight(M, 1.0)
    np.testing.assert_allclose(W.matrix, np.diag([1.0, 0.5]), atol=1e-14)
    # s = 0 gives the identity
    np.testing.assert_allclose(
        bracket_weight(M, 0.0).matrix, np.eye(2), atol=1e-14)


def test_resolvent_matches_dense_inverse():
    rng = np.random.default_rng(2)
    M = HermitianOperator(_random_hermitian(32, rng))
    z = 0.3 + 0.7j
    expected = np.linalg.inv(M.matrix - z * np.eye(32))
    np.testing.assert_allclose(resolvent(M, z), expected, atol=1e-10)
    lam = float(M.eigenvalues[5])
    with pytest.raises(ZeroDivisionError):
        resolvent(M, lam)


def test_operator_norm_dual_route():
    rng = np.random.default_rng(3)
    M = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    dense = operator_norm(M, method="svd")
    power = operator_norm(M, method="power")
    assert abs(dense - power) <= 1e-6 * dense
    assert DENSE_NORM_LIMIT == 512


# ---------------------------------------------------------------------------
# packets and ensembles
# ---------------------------------------------------------------------------

def test_wave_packet_margins():
    g = make_grid(256, 16 * np.pi)
    psi = wave_packet(g, 0.0, 5.0, g.L / 24)
    assert psi.norm() == pytest.approx(1.0)
    with pytest.raises(PacketMarginError):
        wave_packet(g, 0.9 * g.L / 2, 5.0, g.L / 24)   # too close to the seam
    with pytest.raises(PacketMarginError):
        wave_packet(g, 0.0, 0.95 * g.k_max, g.L / 24)  # too close to Nyquist
    with pytest.raises(PacketMarginError):
        wave_packet(g, 0.0, 5.0, g.L)                  # tails reach the seam


def test_canonical_commutator_on_bulk_packets():
    # <i[p, X]> = 1 on bulk packets despite the seam
    g = make_grid(256, 16 * np.pi)
    p = momentum_operator(g)
    X = position_operator(g)
    comm = 1j * (p.matrix @ X.matrix - X.matrix @ p.matrix)
    for k0 in (-8.0, 0.0, 5.0):
        psi = wave_packet(g, 0.0, k0, g.L / 24).amplitudes
        val = np.vdot(psi, comm @ psi).real
        assert val == pytest.approx(1.0, abs=1e-8)
    # the full-matrix norm is seam-dominated, far from 1
    assert operator_norm(comm) > 10.0


def test_ensemble_norm_is_seam_insensitive():
    g = make_grid(256, 16 * np.pi)
    p = momentum_operator(g)
    X = position_operator(g)
    comm = 1j * (p.matrix @ X.matrix - X.matrix @ p.matrix)
    e = default_ensemble(g)
    # ||(i[p,X] - I) psi|| is tiny on every bulk packet
    assert ensemble_norm(comm - np.eye(g.N), e, g) < 1e-7


def test_ensemble_validation():
    g = make_grid(256, 16 * np.pi)
    e = default_ensemble(g)
    assert len(ensemble_states(g, e)) == len(e.packets)
    with pytest.raises(ValueError):
        EnsembleSpec(packets=((0.0, 1.0, 1.0),), bulk_margin=0.7)
    with pytest.raises(ValueError):
        ensemble_norm(np.eye(g.N), EnsembleSpec(packets=()), g)
