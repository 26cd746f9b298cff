"""End-to-end acceptance checks at working scale.

Each test prints one PASS/FAIL line per checked property; run with
``pytest -v tests/test_acceptance.py`` for the full report.  These run the
default desk-scale configuration (N = 1024, L = 64 pi, with one doubling),
so the module takes several minutes.
"""

from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from mourre_lab.commutators import check_assumptions, commutator_i, virial_check
from mourre_lab.cutoffs import CutoffSpec
from mourre_lab.lap import (
    RhsParams,
    c_of_s,
    default_delta,
    lap_sweep,
    make_sweep_grid,
    mourre_weight,
    regularized_diagnostics,
    rhs_eval,
    translation_covariance_check,
    weighted_resolvent_norm,
)
from mourre_lab.models import (
    ModelSpec,
    PotentialSpec,
    applied_weight,
    commutator_symbol,
    conjugate_operator,
    hamiltonian,
)
from mourre_lab.smoothing import (
    kato_integral,
    kato_integral_quadrature,
    kato_vs_lap,
    theta_max_scan,
    travel_time_horizon,
)
from mourre_lab.spectral_core import (
    HermitianOperator,
    bracket_weight,
    default_ensemble,
    make_grid,
    operator_norm,
    wave_packet,
)

N_DEFAULT = 1024
L_DEFAULT = 64 * np.pi


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else ""))


@lru_cache(maxsize=None)
def _grid(N=N_DEFAULT, L=L_DEFAULT):
    return make_grid(N, L)


@lru_cache(maxsize=None)
def _operators(gamma=1.0, b=0.0, N=N_DEFAULT, L=L_DEFAULT, pot_C=0.0):
    g = _grid(N, L)
    pot = (PotentialSpec() if pot_C == 0.0
           else PotentialSpec(kind="bracket_decay", C=pot_C, rho=2.0))
    m = ModelSpec(a=1.0, b=b, gamma=gamma, potential=pot)
    return g, m, hamiltonian(g, m), conjugate_operator(g, m)


# ---------------------------------------------------------------------------
# 1. leading-commutator symbol oracle
# ---------------------------------------------------------------------------

def test_criterion_1_symbol_oracle():
    cases = {(1.0, 0.0): 16.0, (1.0, 1.0): 16.0, (0.5, 0.0): 4.0,
             (2.0, 0.0): 16.0}
    for (gamma, b), R in cases.items():
        g, m, H, A = _operators(gamma=gamma, b=b)
        B = commutator_i(H, A)
        sym = commutator_symbol(m)
        # 8 momenta spanning the plateau of the energy cutoff at this R
        k_lo = m.invert_dispersion(2 * R) + 0.5
        momenta = np.linspace(float(k_lo), 13.5, 8)
        worst = 0.0
        for k0 in momenta:
            psi = wave_packet(g, 0.0, float(k0), g.L / 24).amplitudes
            val = float(np.vdot(psi, B.matrix @ psi).real)
            target = float(sym(float(k0)))
            err = abs(val - target) / max(1.0, abs(target))
            worst = max(worst, err)
        ok = worst <= 0.05
        _report(f"symbol oracle gamma={gamma} b={b}", ok, f"worst {worst:.2e}")
        assert ok


# ---------------------------------------------------------------------------
# 2. closed-form arithmetic of the s = 4 bound
# ---------------------------------------------------------------------------

def test_criterion_2_remark_arithmetic():
    p = RhsParams(s=4.0, R_tilde=4.0, delta=1.0, c0=2.0, c2=0.0)
    got = rhs_eval(p, "eq2")
    # independent exact evaluation: ((1/2 + 2*(27/256)*2)^2) / 2
    inner = Fraction(1, 2) + 2 * Fraction(27, 256) * 2
    exact = Fraction(inner**2, 2)
    assert exact == Fraction(3481, 8192)
    ok = abs(got - float(exact)) < 1e-12 and got < 1.0
    _report("s=4 closed-form arithmetic", ok, f"{got!r} vs {float(exact)!r}")
    assert ok


# ---------------------------------------------------------------------------
# 3. constant identities and weight bounds
# ---------------------------------------------------------------------------

def test_criterion_3_constant_identities():
    s_grid = np.linspace(0.5 + 1e-3, 1.0, 1000)
    c_vals = np.array([c_of_s(float(s)) for s in s_grid])
    ok_c = bool(np.all(c_vals <= 1.0 + 1e-12))
    _report("c(s) <= 1 on 10^3 samples", ok_c)
    assert ok_c
    coeff = (2.0 - s_grid) * c_vals / (2.0 * s_grid - 1.0)
    ok_coeff = bool(np.all(coeff >= 1.0 - 1e-12))
    worst_i = int(np.argmin(coeff))
    _report("(2-s)c(s)/(2s-1) >= 1 on 10^3 samples", ok_coeff,
            f"min {coeff[worst_i]:.6f} at s = {s_grid[worst_i]:.4f}")
    # NOTE: known-false as stated; the quantity dips below 1 on roughly
    # s in (0.865, 1) with equality at s = 1.  Kept faithful, expected red.
    assert ok_coeff


def test_criterion_3_weight_bounds():
    g, m, H, A = _operators(N=512, L=32 * np.pi)
    worst = -np.inf
    for s in (0.6, 0.75, 1.0):
        for eps in (0.1, 0.01):
            out = mourre_weight(A, s, eps)
            worst = max(worst,
                        out["measured_W_prime"] - out["bound_W_prime"],
                        out["measured_AW"] - out["bound_AW"])
    ok = worst <= 1e-8
    _report("weight derivative/product bounds", ok, f"worst slack {worst:.2e}")
    assert ok


# ---------------------------------------------------------------------------
# 4. resolvent sweep against the closed-form bound, with grid doubling
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("pot_C", [0.0, 0.5])
def test_criterion_4_lap_sweep_and_stability(pot_C):
    R, s = 16.0, 1.0
    g, m, H, A = _operators(pot_C=pot_C)
    rep = check_assumptions(H, A, CutoffSpec(R=R), beta=0.25,
                            e=default_ensemble(g), g=g, m=m)
    delta = default_delta(R)                    # (1 - R^{-1/2})^{-1}
    params = RhsParams(s=s, R_tilde=4.0, delta=delta, c0=rep.c0, c2=rep.c2,
                       R=R)
    rhs = rhs_eval(params, "eq1")

    sups = []
    for lev in range(2):
        gl, ml, Hl, Al = _operators(pot_C=pot_C, N=N_DEFAULT * 2**lev,
                                    L=L_DEFAULT * 2**lev)
        grid = make_sweep_grid(Hl, R, n_lambda=33, n_mu=8,
                               mu_min_policy="box_scaling", box_length=gl.L)
        res = lap_sweep(Hl, Al, s, grid, refine=False)
        sups.append(res.sup_measured)
    ok_bound = sups[0] <= rhs
    rel = abs(sups[1] - sups[0]) / sups[0]
    ok_stable = rel <= 0.10
    _report(f"sweep bounded (V C={pot_C})", ok_bound,
            f"sup {sups[0]:.4f} <= rhs {rhs:.4f}")
    _report(f"sweep stable under doubling (V C={pot_C})", ok_stable,
            f"rel change {rel:.2%}")
    assert ok_bound and ok_stable


# ---------------------------------------------------------------------------
# 5. exact operator inequalities of the regularized resolvent
# ---------------------------------------------------------------------------

def test_criterion_5_exact_operator_inequalities():
    g, m, H, A = _operators(N=512, L=32 * np.pi)
    triples = [(50.0, 0.5, 0.5), (60.0, 0.3, 0.2), (72.0, 0.8, 1.0),
               (90.0, 0.5, 0.1), (55.0, 1.0, 0.35), (80.0, 0.2, 0.6)]
    worst_b2 = worst_c2 = -np.inf
    for lam, mu, eps in triples:
        out = regularized_diagnostics(
            H, A, CutoffSpec(R=16.0), s=0.75, lam=lam, mu=mu,
            eps_grid=[eps], beta=0.25, n_contractions=8, seed=0)
        rec = out["records"][0]
        worst_b2 = max(worst_b2, rec["b2_worst_slack"])
        worst_c2 = max(worst_c2, rec["c2_worst_slack"])
    ok_ineq = worst_b2 <= 1e-8 and worst_c2 <= 1e-8
    _report("contraction inequalities", ok_ineq,
            f"worst slacks {worst_b2:.2e} / {worst_c2:.2e}")
    assert ok_ineq

    worst_b4 = 0.0
    for R in (16.0, 32.0, 64.0):
        out = regularized_diagnostics(
            H, A, CutoffSpec(R=R), s=0.75, lam=4 * R, mu=0.5,
            eps_grid=[0.5], n_contractions=2, seed=0)
        worst_b4 = max(worst_b4, out["records"][0]["b4_product"])
    ok_b4 = worst_b4 <= 5.0
    _report("cutoff-complement resolvent product", ok_b4,
            f"worst {worst_b4:.3f}")
    assert ok_b4


# ---------------------------------------------------------------------------
# 6. Virial identity on every test model
# ---------------------------------------------------------------------------

def test_criterion_6_virial_identity():
    specs = [ModelSpec(), ModelSpec(b=1.0), ModelSpec(gamma=0.5),
             ModelSpec(gamma=2.0),
             ModelSpec(potential=PotentialSpec(kind="bracket_decay", C=0.5,
                                               rho=2.0)),
             ModelSpec(conjugate_normalization="half")]
    g = _grid(512, 32 * np.pi)
    for m in specs:
        H = hamiltonian(g, m)
        A = conjugate_operator(g, m)
        resid = virial_check(H, A)
        B = commutator_i(H, A)
        gate = 1e-9 * operator_norm(B.matrix) * max(
            1.0, float(np.max(np.abs(H.eigenvalues))))
        ok = resid <= gate
        _report(f"virial gamma={m.gamma} b={m.b} "
                f"norm={m.conjugate_normalization}", ok,
                f"{resid:.2e} <= {gate:.2e}")
        assert ok


# ---------------------------------------------------------------------------
# 7. smoothing integral vs resolvent sup
# ---------------------------------------------------------------------------

def test_criterion_7_kato_consistency():
    g, m, H, A = _operators()
    spec = CutoffSpec(R=16.0, kind="tilde")
    weights = {
        "bracket_A": bracket_weight(A, 1.0).matrix,
        "position_momentum": applied_weight(g, 1.0, m.gamma - 0.5),
    }
    speed = m.group_speed()
    mu_min = 8 * np.pi / g.L
    for name, W in weights.items():
        for k0 in (9.5, 10.5, 11.5, 12.5):
            phi0 = wave_packet(g, 0.0, k0, g.L / 24)
            out = kato_vs_lap(H, W, spec, phi0, g, speed, mu_min=mu_min,
                              n_lambda=24, n_mu=6)
            ok = out["normalized_I"] <= out["lap_bound"] * 1.2
            _report(f"smoothing <= resolvent sup [{name}] k0={k0}", ok,
                    f"{out['normalized_I']:.4f} vs {out['lap_bound']:.4f}")
            assert ok
    # closed form vs quadrature oracle
    phi0 = wave_packet(g, 0.0, 9.5, g.L / 24)
    T = travel_time_horizon(g, speed, g.wavenumbers)
    closed = kato_integral(H, weights["bracket_A"], spec, phi0, T).I_T
    quad = kato_integral_quadrature(H, weights["bracket_A"], spec, phi0, T)
    rel = abs(closed - quad) / abs(quad)
    ok = rel <= 1e-6
    _report("closed form vs quadrature", ok, f"rel {rel:.2e}")
    assert ok


# ---------------------------------------------------------------------------
# 8. translation-covariance counterexample
# ---------------------------------------------------------------------------

def test_criterion_8_translation_covariance():
    g = _grid(512, 32 * np.pi)
    for mm in (1, 4, 8):
        n0, n1 = translation_covariance_check(g, s=1.0, lam0=2.0, m=mm,
                                              mu=0.5)
        rel = abs(n1 - n0) / n0
        ok = rel <= 1e-10
        _report(f"translation covariance m={mm}", ok, f"rel {rel:.2e}")
        assert ok


# ---------------------------------------------------------------------------
# 9. theta-exponent maximization
# ---------------------------------------------------------------------------

def test_criterion_9_theta_maximum():
    for gamma in (0.5, 1.0, 2.0):
        beta_star = (2 * gamma - 1) / (4 * gamma)
        b, th = theta_max_scan(gamma, 0.75)
        ok = (abs(b - beta_star) <= 1e-10
              and abs(th - (gamma - 0.5)) <= 1e-10)
        _report(f"theta max gamma={gamma}", ok,
                f"beta* {b:.6f}, theta {th:.6f}")
        assert ok


# ---------------------------------------------------------------------------
# 10. brute-force oracle equivalence
# ---------------------------------------------------------------------------

def test_criterion_10_oracle_equivalence():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(20):
        raw = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        H = HermitianOperator((raw + raw.conj().T) / 2)
        W_L = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        W_R = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        lam = float(rng.uniform(-3, 3))
        mu = float(rng.uniform(0.05, 2.0))
        got = weighted_resolvent_norm(H, W_L, W_R, lam, mu)
        dense = operator_norm(
            W_L @ np.linalg.inv(H.matrix - (lam + 1j * mu) * np.eye(64))
            @ W_R)
        worst = max(worst, abs(got - dense) / dense)
    ok = worst <= 1e-10
    _report("eigendecomposition vs dense inverse", ok, f"worst rel {worst:.2e}")
    assert ok
