"""Commutator algebra, the c~I + J + K split, measured constants, Virial."""

import numpy as np
import pytest

from mourre_lab.commutators import (
    SpectralFilterError,
    check_assumptions,
    commutator_i,
    iterated_ad,
    split_JK,
    virial_check,
)
from mourre_lab.cutoffs import CutoffSpec
from mourre_lab.models import ModelSpec, PotentialSpec, conjugate_operator, hamiltonian
from mourre_lab.spectral_core import (
    EnsembleSpec,
    HermitianOperator,
    default_ensemble,
    ensemble_norm,
    make_grid,
)


def _setup(N=256, L=16 * np.pi, m=None):
    g = make_grid(N, L)
    m = m or ModelSpec()
    return g, m, hamiltonian(g, m), conjugate_operator(g, m)


def test_commutator_is_hermitian_and_antisymmetric():
    rng = np.random.default_rng(0)
    raw = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    H = HermitianOperator((raw + raw.conj().T) / 2)
    raw2 = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    A = HermitianOperator((raw2 + raw2.conj().T) / 2)
    B = commutator_i(H, A)
    assert B.hermiticity_defect < 1e-10
    np.testing.assert_allclose(
        commutator_i(A, H).matrix, -B.matrix, atol=1e-10)
    with pytest.raises(ValueError):
        iterated_ad(H, A, 5)
    np.testing.assert_allclose(
        iterated_ad(H, A, 2).matrix, commutator_i(B, A).matrix, atol=1e-10)


def test_split_JK_reconstructs_exactly():
    g, m, H, A = _setup()
    jk = split_JK(H, A, m)
    assert jk.c_tilde == pytest.approx(4.0)
    B = commutator_i(H, A)
    recon = jk.c_tilde * np.eye(g.N) + jk.J.matrix + jk.K.matrix
    np.testing.assert_allclose(recon, B.matrix, atol=1e-12)


def test_residual_K_vanishes_on_bulk_packets_for_free_model():
    g, m, H, A = _setup()
    jk = split_JK(H, A, m)
    e = default_ensemble(g)
    assert ensemble_norm(jk.K, e, g) < 1e-5 * jk.c_tilde


def test_half_normalization_halves_c_tilde():
    g, m, H, A = _setup(m=ModelSpec(conjugate_normalization="half"))
    assert split_JK(H, A, m).c_tilde == pytest.approx(2.0)


def test_check_assumptions_free_model():
    g, m, H, A = _setup()
    rep = check_assumptions(H, A, CutoffSpec(R=16.0), beta=0.25,
                            e=default_ensemble(g), g=g, m=m)
    assert rep.passed(), rep.verdicts
    assert 0.0 < rep.c0 <= rep.c1 <= 4.05
    assert rep.delta_K < 0.1 * rep.c0
    assert rep.c2 < rep.c2_full_matrix          # seam inflates the full norm
    assert rep.n_filtered_packets >= 2
    assert np.isfinite(rep.norm_ad4)


def test_check_assumptions_with_potential():
    pot = PotentialSpec(kind="bracket_decay", C=0.5, rho=2.0)
    g, m, H, A = _setup(m=ModelSpec(potential=pot))
    rep = check_assumptions(H, A, CutoffSpec(R=16.0), beta=0.25,
                            e=default_ensemble(g), g=g, m=m)
    assert rep.passed(), rep.verdicts


def test_spectral_filter_error_when_no_packet_survives():
    g, m, H, A = _setup()
    # all packets well below the cutoff plateau
    low = EnsembleSpec(packets=((0.0, 0.5, g.L / 24), (0.0, 1.0, g.L / 24)))
    with pytest.raises(SpectralFilterError):
        check_assumptions(H, A, CutoffSpec(R=16.0), beta=0.25, e=low, g=g,
                          m=m)


def test_virial_identity_and_negative_control():
    g, m, H, A = _setup()
    assert virial_check(H, A) < 1e-8
    # the diagnostic is specific to eigenvectors: a travelling packet sees
    # the full commutator symbol, not zero
    from mourre_lab.spectral_core import wave_packet

    B = commutator_i(H, A)
    psi = wave_packet(g, 0.0, 7.0, g.L / 24).amplitudes
    assert np.vdot(psi, B.matrix @ psi).real > 1.0
