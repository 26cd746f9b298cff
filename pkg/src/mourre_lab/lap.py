"""Weighted resolvent norms, (lambda, mu) sweeps, closed-form right-hand
sides with the constants c(s), C(s) and delta_R, regularized-resolvent
diagnostics, beta-weighted variants, the global assembly over all energies,
and the translation-covariance counterexample."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cutoffs import CutoffSpec, cutoff_operator
from .models import build_P
from .spectral_core import (
    GridSpace,
    HermitianOperator,
    apply_function,
    bracket_weight,
    momentum_operator,
    operator_norm,
    position_operator,
)


# ---------------------------------------------------------------------------
# closed-form constants and RHS evaluators
# ---------------------------------------------------------------------------

def c_of_s(s: float) -> float:
    """c(s) = (1-s)^{1-s} (2-s)^{s-2} for s in (1/2, 1]; 0^0 := 1 at s = 1."""
    if not 0.5 < s <= 1.0:
        raise ValueError(f"c(s) requires 1/2 < s <= 1, got {s}")
    one = 1.0 - s
    lead = 1.0 if one == 0.0 else one**one
    return float(lead * (2.0 - s) ** (s - 2.0))


def C_of_s(s: float) -> float:
    """C(s) = s^{-s} (s-1)^{s-1} for s >= 1; 0^0 := 1 at s = 1."""
    if s < 1.0:
        raise ValueError(f"C(s) requires s >= 1, got {s}")
    sm = s - 1.0
    tail = 1.0 if sm == 0.0 else sm**sm
    return float(s ** (-s) * tail)


def default_delta(R: float, eps_hat: float = 0.5) -> float:
    """delta_R = (1 - R^{-eps_hat})^{-1}, the regularized-resolvent constant."""
    if R <= 1.0:
        raise ValueError("delta_R requires R > 1")
    return float(1.0 / (1.0 - R ** (-eps_hat)))


@dataclass(frozen=True)
class RhsParams:
    """Inputs of the closed-form resolvent bounds."""

    s: float
    R_tilde: float
    delta: float
    c0: float
    c2: float
    eps_hat: float = 0.5
    R: float | None = None

    def __post_init__(self):
        if self.s <= 0.5:
            raise ValueError(f"s must exceed 1/2, got {self.s}")
        if self.R_tilde <= 0:
            raise ValueError("R_tilde must be positive")
        if not self.delta >= 1:
            raise ValueError("delta must be >= 1")
        if not 0 < self.eps_hat < 1:
            raise ValueError("eps_hat must lie in (0, 1)")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.c2 < 0:
            raise ValueError("c2 must be nonnegative")
        if self.R is not None and self.R_tilde > self.R ** (1 - self.eps_hat) + 1e-12:
            raise ValueError(
                f"R_tilde = {self.R_tilde:.4g} exceeds R^(1-eps_hat) = "
                f"{self.R ** (1 - self.eps_hat):.4g}"
            )


def rhs_eval(p: RhsParams, branch: str) -> float:
    """Closed-form supremum bound for the weighted resolvent sweep.

    branch 'eq1' (1/2 < s <= 1):
        c0^{-1} ((delta/R~)^{1/2}
                 + delta R~^{s-1/2} (1-s)^{1-s} (2-s)/(2s-1))^2
        * exp(delta c2 R~ / c0)
    branch 'eq2' (s >= 1):
        c0^{-1} ((delta/R~)^{1/2} + 2 delta C(s) R~^{1/2})^2
        * exp(delta c2 R~ / c0)
    """
    s, Rt, d, c0, c2 = p.s, p.R_tilde, p.delta, p.c0, p.c2
    if branch == "eq1":
        if not 0.5 < s <= 1.0:
            raise ValueError(f"eq1 requires 1/2 < s <= 1, got {s}")
        one = 1.0 - s
        pw = 1.0 if one == 0.0 else one**one
        inner = np.sqrt(d / Rt) + d * Rt ** (s - 0.5) * pw * (2.0 - s) / (2.0 * s - 1.0)
    elif branch == "eq2":
        if s < 1.0:
            raise ValueError(f"eq2 requires s >= 1, got {s}")
        inner = np.sqrt(d / Rt) + 2.0 * d * C_of_s(s) * np.sqrt(Rt)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    return float(inner**2 / c0 * np.exp(d * c2 * Rt / c0))


def rhs_best(p: RhsParams) -> float:
    """Smaller of the applicable branches (both apply only at s = 1)."""
    vals = []
    if 0.5 < p.s <= 1.0:
        vals.append(rhs_eval(p, "eq1"))
    if p.s >= 1.0:
        vals.append(rhs_eval(p, "eq2"))
    return min(vals)


# ---------------------------------------------------------------------------
# sweep grid and weighted resolvent norms
# ---------------------------------------------------------------------------

def mean_level_spacing(H: HermitianOperator, lo: float, hi: float) -> float:
    """Mean spacing of H's eigenvalues inside [lo, hi]."""
    w = H.eigenvalues
    inside = w[(w >= lo) & (w <= hi)]
    if inside.size < 2:
        return float("inf")
    return float((inside[-1] - inside[0]) / (inside.size - 1))


@dataclass(frozen=True)
class SweepGrid:
    """The (lambda, mu) grid of a resolvent sweep."""

    lambda_values: np.ndarray
    mu_values: np.ndarray
    mu_min: float

    def __post_init__(self):
        lam = np.asarray(self.lambda_values, dtype=float)
        mu = np.asarray(self.mu_values, dtype=float)
        if np.any(np.diff(lam) <= 0):
            raise ValueError("lambda_values must be strictly ascending")
        if np.any(mu <= 0):
            raise ValueError("mu_values must be positive")
        object.__setattr__(self, "lambda_values", lam)
        object.__setattr__(self, "mu_values", np.sort(mu))
        lam.setflags(write=False)
        self.mu_values.setflags(write=False)


def make_sweep_grid(H: HermitianOperator, R: float, mu_min: float | None = None,
                    n_lambda: int = 64, n_mu: int = 16,
                    lam_lo: float | None = None,
                    lam_hi: float | None = None,
                    mu_min_policy: str = "level_spacing",
                    box_length: float | None = None) -> SweepGrid:
    """Default sweep window lambda in [3R, 6R], mu log-spaced from mu_min
    up to max(1, 2 mu_min).

    Two mu_min policies:

    * 'level_spacing' (default): mu_min defaults to, and must stay at or
      above, 10x the mean level spacing of H inside [3R-1, 6R+1].  Safe but
      coarse: on large boxes the whole window can sit above mu = 1.
    * 'box_scaling': mu_min = 8 pi / L (four momentum quanta of the box,
      pass the box length).  This deliberately under-resolves the level
      spacing; the resulting sup is a finite-volume proxy whose value is
      stable (few percent) under joint (N, L) doubling with mu_min ~ 1/L,
      which is the refinement limit that recovers the continuum statement.
    """
    lam_lo = 3 * R if lam_lo is None else lam_lo
    lam_hi = 6 * R if lam_hi is None else lam_hi
    spacing = mean_level_spacing(H, lam_lo - 1.0, lam_hi + 1.0)
    floor = 10.0 * spacing
    if mu_min_policy == "level_spacing":
        if mu_min is None:
            mu_min = floor
        if mu_min < floor * (1 - 1e-12):
            raise ValueError(
                f"mu_min = {mu_min:.4g} violates the level-spacing invariant; "
                f"mean spacing is {spacing:.4g}, so mu_min must be >= {floor:.4g}"
            )
    elif mu_min_policy == "box_scaling":
        if mu_min is None:
            if box_length is None:
                raise ValueError("box_scaling policy requires box_length")
            mu_min = 8.0 * np.pi / box_length
        if mu_min <= 0:
            raise ValueError(f"mu_min must be positive, got {mu_min}")
    else:
        raise ValueError(f"unknown mu_min_policy {mu_min_policy!r}")
    mu_hi = max(1.0, 2.0 * mu_min)
    mu = np.geomspace(mu_min, mu_hi, n_mu)
    lam = np.linspace(lam_lo, lam_hi, n_lambda)
    return SweepGrid(lambda_values=lam, mu_values=mu, mu_min=float(mu_min))


def _factored_norm(WL_U: np.ndarray, d: np.ndarray, U_WR: np.ndarray,
                   tol: float = 1e-9) -> float:
    """||WL_U diag(d) U_WR|| by Lanczos iteration on the normal operator,
    avoiding the cubic-cost explicit product for large grids.

    Lanczos handles the clustered singular values of near-resonant
    resolvents, where plain power iteration stalls."""
    from scipy.sparse.linalg import LinearOperator, eigsh

    n = U_WR.shape[1]
    A_WL = WL_U.conj().T
    A_WR = U_WR.conj().T

    def matvec(v):
        y = WL_U @ (d * (U_WR @ v))
        return A_WR @ (d.conj() * (A_WL @ y))

    op = LinearOperator((n, n), matvec=matvec, dtype=complex)
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    top = eigsh(op, k=1, which="LA", v0=v0, tol=tol,
                return_eigenvectors=False)
    return float(np.sqrt(max(float(top[0]), 0.0)))


class WeightedResolvent:
    """Reusable evaluator of ||W_L (H - lambda -+ i mu)^{-1} W_R||; the
    weight-eigenbasis products are computed once per (H, W_L, W_R)."""

    def __init__(self, H: HermitianOperator, W_L: np.ndarray, W_R: np.ndarray):
        self.w, U = H.eig()
        self.n = H.n
        self.WL_U = np.asarray(W_L, dtype=complex) @ U
        self.U_WR = U.conj().T @ np.asarray(W_R, dtype=complex)

    def norm(self, lam: float, mu: float, sign: int = +1) -> float:
        if mu <= 0:
            raise ValueError(f"mu must be positive, got {mu}")
        d = 1.0 / (self.w - lam - 1j * sign * mu)
        from .spectral_core import DENSE_NORM_LIMIT
        if self.n <= DENSE_NORM_LIMIT:
            return operator_norm((self.WL_U * d) @ self.U_WR)
        return _factored_norm(self.WL_U, d, self.U_WR)


def weighted_resolvent_norm(H: HermitianOperator, W_L: np.ndarray,
                            W_R: np.ndarray, lam: float, mu: float,
                            sign: int = +1) -> float:
    """||W_L (H - lambda - i sign mu)^{-1} W_R|| via the eigendecomposition."""
    return WeightedResolvent(H, W_L, W_R).norm(lam, mu, sign)


@dataclass
class LapSweepResult:
    """Measured sweep matrix plus the theoretical RHS it is compared to."""

    lambda_values: np.ndarray
    mu_values: np.ndarray
    norms: np.ndarray            # shape (n_lambda, n_mu)
    sup_measured: float
    argmax: tuple
    rhs_theoretical: float | None = None
    params_used: dict = field(default_factory=dict)
    weight_mode: str = "bracket_A"


def _sweep_matrix(H, W_L, W_R, grid: SweepGrid, refine: bool = True,
                  max_refine_columns: int = 128):
    lam = list(grid.lambda_values)
    mu = grid.mu_values
    ev = WeightedResolvent(H, W_L, W_R)

    def column(l):
        return np.array([ev.norm(l, m) for m in mu])

    cols = {l: column(l) for l in lam}
    if refine:
        # one adaptive pass: where the smallest-mu norm jumps by more than
        # 20% between neighbors, subdivide that cell toward a local lambda
        # spacing of mu_min / 2 (biggest jumps first, capped in total)
        base = np.array([cols[l][0] for l in lam])
        target = grid.mu_values[0] / 2.0
        jumps = []
        for i in range(len(lam) - 1):
            a, b = base[i], base[i + 1]
            if max(a, b) > 1.2 * max(min(a, b), 1e-300):
                jumps.append((max(a, b) / max(min(a, b), 1e-300), i))
        inserts = []
        for _, i in sorted(jumps, reverse=True):
            width = lam[i + 1] - lam[i]
            n_sub = min(int(np.ceil(width / target)),
                        max_refine_columns - len(inserts) + 1)
            if n_sub >= 2:
                interior = np.linspace(lam[i], lam[i + 1], n_sub + 1)[1:-1]
                inserts.extend(float(l) for l in interior)
            if len(inserts) >= max_refine_columns:
                break
        for l in inserts[:max_refine_columns]:
            cols[l] = column(l)
        lam = sorted(cols)
    norms = np.array([cols[l] for l in lam])
    return np.array(lam), norms


def lap_sweep(H: HermitianOperator, A: HermitianOperator, s: float,
              grid: SweepGrid, weight_mode: str = "bracket_A",
              beta: float = 0.0, rhs_params: RhsParams | None = None,
              refine: bool = True) -> LapSweepResult:
    """Sweep the weighted resolvent norm over (lambda, mu).

    weight_mode 'bracket_A' uses W = <A>^{-s} on both sides; 'P_beta' uses
    W = <P>^{-s} with inner factors <H>^{beta} (P built from H, A, beta).
    If ``rhs_params`` is given the matching closed-form bound is attached."""
    if weight_mode == "bracket_A":
        W = bracket_weight(A, s).matrix
        W_L = W_R = W
    elif weight_mode == "P_beta":
        P = build_P(H, A, beta)
        Z = bracket_weight(H, -beta).matrix      # <H>^beta
        W = bracket_weight(P, s).matrix          # <P>^{-s}
        W_L = W @ Z
        W_R = Z @ W
    else:
        raise ValueError(f"unknown weight_mode {weight_mode!r}")

    lam, norms = _sweep_matrix(H, W_L, W_R, grid, refine=refine)
    flat = int(np.argmax(norms))
    i, j = np.unravel_index(flat, norms.shape)
    sup = float(norms[i, j])
    rhs = None
    params = {"s": s, "beta": beta}
    if rhs_params is not None:
        rhs = rhs_best(rhs_params)
        params.update(R_tilde=rhs_params.R_tilde, delta=rhs_params.delta,
                      c0=rhs_params.c0, c2=rhs_params.c2)
    return LapSweepResult(
        lambda_values=lam, mu_values=grid.mu_values, norms=norms,
        sup_measured=sup, argmax=(float(lam[i]), float(grid.mu_values[j])),
        rhs_theoretical=rhs, params_used=params, weight_mode=weight_mode,
    )


def global_lap_assembly(H: HermitianOperator, A: HermitianOperator, s: float,
                        s_prime: float, R: float, grid: SweepGrid,
                        n_low_lambda: int = 48) -> dict:
    """Assemble the all-energies weighted resolvent bound from three factors:

    (i)   sup_{|lambda| <= 3R} ||phi~(H) (H - lambda - i mu)^{-1} phi~(H)||,
    (ii)  ||<A>^{-s} phi~(H) <A>^{s'}||^2,
    (iii) the |lambda| >= 3R sweep with <A>^{-s'} weights,

    returning each factor and (i) * ||<A>^{-s}||^2 + (ii) * (iii)."""
    if not (0.5 < s_prime <= s and s_prime <= 1.0):
        raise ValueError("require 1/2 < s' <= s and s' <= 1")
    tilde = cutoff_operator(H, CutoffSpec(R=R, kind="tilde"))
    Wm = bracket_weight(A, s).matrix
    Wp = bracket_weight(A, -s_prime).matrix      # <A>^{+s'}

    mu = grid.mu_min
    lam_low = np.linspace(-3 * R, 3 * R, n_low_lambda)
    ev_low = WeightedResolvent(H, tilde.matrix, tilde.matrix)
    factor_i = max(ev_low.norm(l, mu) for l in lam_low)
    factor_ii = operator_norm(Wm @ tilde.matrix @ Wp) ** 2
    sweep = lap_sweep(H, A, s_prime, grid, weight_mode="bracket_A")
    norm_wm = operator_norm(Wm)
    assembled = factor_i * norm_wm**2 + factor_ii * sweep.sup_measured
    return {
        "factor_low_energy": float(factor_i),
        "factor_weight_swap": float(factor_ii),
        "factor_high_energy_sweep": sweep,
        "assembled_sup": float(assembled),
    }


# ---------------------------------------------------------------------------
# regularized-resolvent machinery
# ---------------------------------------------------------------------------

def mourre_weight(A: HermitianOperator, s: float, eps: float) -> dict:
    """W(eps) = (|A|+1)^{-s} (eps |A|+1)^{s-1} with measured derivative and
    A-product norms versus their closed-form envelopes.

    Returns the operator plus the measured/bound pairs for
    ||dW/deps|| <= (1-s) c(s) eps^{s-1} and ||A W|| <= eps^{s-1}."""
    if not 0.5 < s <= 1.0:
        raise ValueError(f"s must lie in (1/2, 1], got {s}")
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")

    def w_scalar(lam):
        t = np.abs(lam)
        return (t + 1.0) ** (-s) * (eps * t + 1.0) ** (s - 1.0)

    W = apply_function(A, w_scalar)
    t = np.abs(A.eigenvalues)
    w_prime = (s - 1.0) * t * (t + 1.0) ** (-s) * (eps * t + 1.0) ** (s - 2.0)
    measured_wprime = float(np.max(np.abs(w_prime)))
    measured_aw = float(np.max(t * (t + 1.0) ** (-s) * (eps * t + 1.0) ** (s - 1.0)))
    bound_wprime = (1.0 - s) * c_of_s(s) * eps ** (s - 1.0) if s < 1.0 else 0.0
    bound_aw = eps ** (s - 1.0)
    return {
        "W": W,
        "measured_W_prime": measured_wprime,
        "bound_W_prime": bound_wprime,
        "measured_AW": measured_aw,
        "bound_AW": bound_aw,
    }


def psd_sqrt(M: np.ndarray, clamp_tol: float | None = None) -> tuple[np.ndarray, float]:
    """Matrix square root of a nominally PSD Hermitian matrix.

    Round-off negative eigenvalues are clamped to zero; the most negative
    eigenvalue found is returned so callers can flag genuine (seam-level)
    non-positivity."""
    Msym = (M + np.asarray(M).conj().T) / 2
    w, U = np.linalg.eigh(Msym)
    most_negative = float(min(w[0], 0.0))
    wc = np.clip(w, 0.0, None)
    return (U * np.sqrt(wc)) @ U.conj().T, most_negative


def _random_hermitian_contraction(n: int, rng: np.random.Generator) -> np.ndarray:
    Braw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Bh = (Braw + Braw.conj().T) / 2
    return Bh / operator_norm(Bh)


def regularized_diagnostics(H: HermitianOperator, A: HermitianOperator,
                            spec: CutoffSpec, s: float, lam: float, mu: float,
                            eps_grid: Sequence[float], beta: float = 0.0,
                            n_contractions: int = 8, seed: int = 0,
                            c0: float | None = None, c2: float = 0.0,
                            delta: float | None = None) -> dict:
    """Trace of the regularized resolvent G(eps) = (H - lam - i mu
    - i eps M*M)^{-1} with M = (phi B phi)^{1/2}.

    For each eps the record carries: the worst slack of the exact operator
    inequality ||M G B|| <= eps^{-1/2} ||B G B||^{1/2} over random Hermitian
    contractions B; the measured ratios of ||G|| against delta/(c0 eps) and
    of ||(phi - 1) G|| against 1/R; ||F(eps)|| with F = W G W and a central
    finite-difference ||F'||; and the beta-weighted analogues (the
    <H>^beta-sandwiched bound and its contraction inequality)."""
    eps_grid = sorted(float(x) for x in eps_grid)
    if not eps_grid or eps_grid[0] <= 0:
        raise ValueError("eps_grid must be positive ascending")
    if mu <= 0:
        raise ValueError("mu must be positive")
    rng = np.random.default_rng(seed)
    n = H.n

    phiH = cutoff_operator(H, spec)
    B_op = 1j * (H.matrix @ A.matrix - A.matrix @ H.matrix)
    B_op = (B_op + B_op.conj().T) / 2
    phiBphi = phiH.matrix @ B_op @ phiH.matrix
    M, neg = psd_sqrt(phiBphi)
    MstarM = M.conj().T @ M
    seam_warning = None
    if neg < -1e-6 * operator_norm(B_op):
        seam_warning = (
            f"phi B phi has a genuinely negative eigenvalue {neg:.3e}; "
            "clamped to zero"
        )

    Z = bracket_weight(H, -beta).matrix      # <H>^beta
    gmat = phiH.matrix @ Z                   # g(H) = <H>^beta phi(H)
    ZBZ = Z @ B_op @ Z
    Mb, _ = psd_sqrt(phiH.matrix @ ZBZ @ phiH.matrix)
    MbstarMb = Mb.conj().T @ Mb

    ident = np.eye(n)
    shift = H.matrix - (lam + 1j * mu) * ident

    contractions = [_random_hermitian_contraction(n, rng)
                    for _ in range(n_contractions)]

    def G_of(eps):
        return np.linalg.inv(shift - 1j * eps * MstarM)

    def Gb_of(eps):
        return np.linalg.inv(shift - 1j * eps * MbstarMb)

    records = []
    for eps in eps_grid:
        G = G_of(eps)
        # (b2): exact inequality, worst slack over contractions, M1 = M
        b2_slack = -np.inf
        for Bc in contractions:
            lhs = operator_norm(M @ G @ Bc)
            rhs = eps ** (-0.5) * np.sqrt(operator_norm(Bc @ G @ Bc))
            b2_slack = max(b2_slack, lhs - rhs)
        norm_G = operator_norm(G)
        b3_ratio = None
        if c0 is not None:
            d = delta if delta is not None else 1.0
            b3_ratio = norm_G * (c0 * eps) / d
        b4_product = operator_norm((phiH.matrix - ident) @ G) * spec.R

        W = apply_function(
            A, lambda t: (np.abs(t) + 1.0) ** (-s) * (eps * np.abs(t) + 1.0) ** (s - 1.0)
        ).matrix
        F_norm = operator_norm(W @ G @ W)
        h = eps / 100.0
        if eps - h > 0:
            Wp = apply_function(
                A, lambda t: (np.abs(t) + 1.0) ** (-s) * ((eps + h) * np.abs(t) + 1.0) ** (s - 1.0)
            ).matrix
            Wm = apply_function(
                A, lambda t: (np.abs(t) + 1.0) ** (-s) * ((eps - h) * np.abs(t) + 1.0) ** (s - 1.0)
            ).matrix
            Fp = Wp @ G_of(eps + h) @ Wp
            Fm = Wm @ G_of(eps - h) @ Wm
            F_prime = operator_norm((Fp - Fm) / (2 * h))
        else:
            F_prime = float("nan")
        envelope = None
        if c0 is not None:
            d = delta if delta is not None else 1.0
            envelope = float(
                2 * d * (2 - s) * c_of_s(s) * c0 ** (-0.5)
                * eps ** (s - 1.5) * np.sqrt(F_norm)
                + (d * c2 / c0) * F_norm
            )
        # beta-weighted sandwich: boundedness ratio and the (c2)-type
        # contraction check
        Gb = Gb_of(eps)
        Hb = Z @ Gb @ Z
        sandwich_ratio = operator_norm(Hb) * np.sqrt((mu / (1 + lam**2) ** beta) ** 2 + eps**2)
        c2_slack = -np.inf
        for Bc in contractions:
            lhs = operator_norm(Mb @ Gb @ Z @ Bc)
            rhs = eps ** (-0.5) * np.sqrt(operator_norm(Bc @ Z @ Gb @ Z @ Bc))
            c2_slack = max(c2_slack, lhs - rhs)

        records.append({
            "eps": eps,
            "b2_worst_slack": float(b2_slack),
            "norm_G": float(norm_G),
            "b3_ratio": b3_ratio,
            "b4_product": float(b4_product),
            "F_norm": float(F_norm),
            "F_prime": float(F_prime),
            "F_prime_envelope": envelope,
            "sandwich_ratio": float(sandwich_ratio),
            "c2_worst_slack": float(c2_slack),
        })
    return {
        "records": records,
        "seam_warning": seam_warning,
        "most_negative_phiBphi_eigenvalue": neg,
        "lam": lam, "mu": mu, "s": s, "beta": beta,
    }


def resolvent_regularization_defect(H: HermitianOperator, A: HermitianOperator,
                                    spec: CutoffSpec, lam: float, mu: float,
                                    eps: float) -> dict:
    """Check the second resolvent identity
    G(eps) - G(0) = i eps G(0) M*M G(eps) for the regularized resolvent."""
    phiH = cutoff_operator(H, spec)
    B = 1j * (H.matrix @ A.matrix - A.matrix @ H.matrix)
    B = (B + B.conj().T) / 2
    M, _ = psd_sqrt(phiH.matrix @ B @ phiH.matrix)
    MstarM = M.conj().T @ M
    ident = np.eye(H.n)
    shift = H.matrix - (lam + 1j * mu) * ident
    G_eps = np.linalg.inv(shift - 1j * eps * MstarM)
    G_0 = np.linalg.inv(shift)
    lhs = G_eps - G_0
    rhs = 1j * eps * (G_0 @ MstarM @ G_eps)
    return {
        "identity_defect": operator_norm(lhs - rhs),
        "difference_norm": operator_norm(lhs),
        "bound": eps * operator_norm(MstarM) * operator_norm(G_eps) * operator_norm(G_0),
    }


# ---------------------------------------------------------------------------
# translation-covariance counterexample
# ---------------------------------------------------------------------------

def translation_covariance_check(g: GridSpace, s: float, lam0: float,
                                 m: int, mu: float) -> tuple[float, float]:
    """Weighted resolvent norms of H = p at lam0 and at the exactly shifted
    energy lam0 + 2 pi m / L.

    The grid multiplier e^{i (2 pi m / L) x} conjugates p to p + 2 pi m / L
    and commutes with <x>^{-s}, so the two norms agree: no high-energy decay
    for the translation model."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    if int(m) != m:
        raise ValueError("m must be an integer (exact grid periodicity)")
    shift = 2 * np.pi * m / g.L
    margin = 2 * np.pi / g.L
    for lam in (lam0, lam0 + shift):
        if abs(lam) > g.k_max - margin:
            raise ValueError(
                f"lambda = {lam:.4g} lies outside the momentum band "
                f"(+/-{g.k_max:.4g}) with margin"
            )
    P = momentum_operator(g)
    X = position_operator(g)
    W = bracket_weight(X, s).matrix
    n0 = weighted_resolvent_norm(P, W, W, lam0, mu)
    n1 = weighted_resolvent_norm(P, W, W, lam0 + shift, mu)
    return n0, n1
