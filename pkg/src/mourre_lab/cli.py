"""Configuration ingestion, scenario dispatch, and report emission.

Scenarios: 'assumptions' (measured Mourre constants and verdicts), 'lap'
(weighted resolvent sweeps against the closed-form bounds), 'smoothing'
(finite-horizon smoothing integrals vs the resolvent sup), 'counterexample'
(translation covariance of H = p), 'convergence' (grid-doubling stability),
and 'all'.

Summary JSON carries {schema_version, config_echo, constants, verdicts,
results}; per-sweep tables go to CSV (columns documented in
csv_schema.json, shipped with the package and copied to the output
directory).  Exit codes: 0 all verdicts pass, 1 verdict failure, 2
usage/config error.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from dataclasses import asdict, is_dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .commutators import check_assumptions, virial_check
from .cutoffs import CutoffSpec
from .lap import (
    RhsParams,
    default_delta,
    lap_sweep,
    make_sweep_grid,
    rhs_eval,
    translation_covariance_check,
)
from .models import (
    ModelSpec,
    PotentialSpec,
    applied_weight,
    conjugate_operator,
    hamiltonian,
)
from .smoothing import (
    kato_integral,
    kato_integral_quadrature,
    kato_vs_lap,
    theta_max_scan,
    travel_time_horizon,
)
from .spectral_core import (
    EnsembleSpec,
    bracket_weight,
    default_ensemble,
    make_grid,
    wave_packet,
)

SCHEMA_VERSION = "1.0"
MAX_N_WITHOUT_OVERRIDE = 4096
MAX_LEVELS_WITHOUT_OVERRIDE = 3

SCENARIOS = ("assumptions", "lap", "smoothing", "counterexample",
             "convergence", "all")


class ConfigError(ValueError):
    """Invalid or unparseable scenario configuration."""


def _defaults() -> dict:
    return {
        "grid": {"N": 1024, "L": 64 * np.pi},
        "model": {
            "a": 1.0,
            "b": 0.0,
            "gamma": 1.0,
            "conjugate_normalization": "full",
            "potential": {"kind": "zero", "C": 0.0, "rho": 2.0},
        },
        "cutoff": {"R": 16.0, "eps_hat": 0.5},
        "lap": {
            "s_values": [1.0, 4.0],
            "beta": 0.0,
            "R_tilde": None,           # defaults to R^(1 - eps_hat)
            "weight_mode": "bracket_A",
            "n_lambda": 33,
            "n_mu": 8,
            "mu_min": None,            # defaults per policy
            "mu_min_policy": "box_scaling",
            "refine": False,
        },
        "smoothing": {
            "s": 1.0,
            "packet_momenta": [9.5, 10.5, 11.5, 12.5],
            "packet_sigma": None,      # defaults to L / 24
            "T_multiple": 1.0,         # horizon as a multiple of T*
        },
        "ensemble": {
            "k_values": None,          # defaults to 9 momenta across the band
            "sigma": None,             # defaults to L / 24
            "bulk_margin": 0.125,
            "band_margin": 0.125,
        },
        "outputs": {"directory": "out", "formats": ["json", "csv"]},
        "seed": 0,
    }


def _merge(defaults, given, path=""):
    """Fill defaults recursively; unknown keys are fatal with field paths."""
    if not isinstance(given, dict):
        raise ConfigError(f"{path or 'config'}: expected an object, got "
                          f"{type(given).__name__}")
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key {here!r}")
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], value, here)
        else:
            out[key] = value
    return out


def parse_config(path: str | Path) -> dict:
    """Load, validate, and default-fill a JSON scenario config."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    cfg = _merge(_defaults(), raw)
    _validate(cfg)
    return cfg


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _validate(cfg: dict) -> None:
    g = cfg["grid"]
    _require(isinstance(g["N"], int) and g["N"] >= 8
             and (g["N"] & (g["N"] - 1)) == 0,
             "grid.N", f"N must be a power of two >= 8, got {g['N']}")
    _require(g["L"] > 0, "grid.L", f"L must be positive, got {g['L']}")

    m = cfg["model"]
    _require(m["a"] > 0, "model.a", "a must be positive")
    _require(m["gamma"] >= 0.5, "model.gamma",
             f"gamma must be >= 1/2, got {m['gamma']}")
    _require(m["conjugate_normalization"] in ("full", "half"),
             "model.conjugate_normalization", "must be 'full' or 'half'")
    pot = m["potential"]
    _require(pot["kind"] in ("zero", "bracket_decay"),
             "model.potential.kind", "must be 'zero' or 'bracket_decay'")
    if pot["kind"] == "bracket_decay":
        _require(pot["rho"] > 0, "model.potential.rho", "rho must be positive")

    c = cfg["cutoff"]
    _require(c["R"] > 1, "cutoff.R", "R must exceed 1")
    _require(0 < c["eps_hat"] < 1, "cutoff.eps_hat",
             "eps_hat must lie in (0, 1)")

    lap = cfg["lap"]
    _require(all(s > 0.5 for s in lap["s_values"]), "lap.s_values",
             "every s must exceed 1/2")
    _require(lap["weight_mode"] in ("bracket_A", "P_beta"),
             "lap.weight_mode", "must be 'bracket_A' or 'P_beta'")
    _require(0.0 <= lap["beta"] <= 0.5, "lap.beta",
             "beta must lie in [0, 1/2]")
    _require(lap["mu_min_policy"] in ("level_spacing", "box_scaling"),
             "lap.mu_min_policy", "must be 'level_spacing' or 'box_scaling'")
    rt_cap = c["R"] ** (1 - c["eps_hat"])
    if lap["R_tilde"] is not None and lap["R_tilde"] > rt_cap + 1e-12:
        raise ConfigError(
            f"lap.R_tilde: R_tilde = {lap['R_tilde']:.4g} exceeds "
            f"R^(1-eps_hat) = {rt_cap:.4g}"
        )

    sm = cfg["smoothing"]
    _require(0.5 < sm["s"] <= 1.0, "smoothing.s", "s must lie in (1/2, 1]")
    _require(sm["T_multiple"] > 0, "smoothing.T_multiple", "must be positive")
    _require(len(sm["packet_momenta"]) > 0, "smoothing.packet_momenta",
             "at least one packet momentum required")

    _require(isinstance(cfg["seed"], int), "seed", "seed must be an integer")


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if callable(obj):
        return repr(obj)
    return obj


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            f"{v:.17g}" if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _emit_schema(out_dir: Path) -> None:
    schema = resources.files("mourre_lab").joinpath("csv_schema.json")
    (out_dir / "csv_schema.json").write_text(schema.read_text())


# ---------------------------------------------------------------------------
# scenario context and runners
# ---------------------------------------------------------------------------

class _Context:
    """Operators and specs shared across the scenarios of one run."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        gc, mc, cc = cfg["grid"], cfg["model"], cfg["cutoff"]
        self.grid = make_grid(gc["N"], gc["L"])
        pot = mc["potential"]
        self.model = ModelSpec(
            a=mc["a"], b=mc["b"], gamma=mc["gamma"],
            potential=PotentialSpec(kind=pot["kind"], C=pot["C"],
                                    rho=pot["rho"]),
            conjugate_normalization=mc["conjugate_normalization"],
        )
        self.H = hamiltonian(self.grid, self.model)
        self.A = conjugate_operator(self.grid, self.model)
        self.R = float(cc["R"])
        self.eps_hat = float(cc["eps_hat"])
        self.mourre = CutoffSpec(R=self.R, kind="mourre")
        self.tilde = CutoffSpec(R=self.R, kind="tilde")
        ec = cfg["ensemble"]
        if ec["k_values"] is None and ec["sigma"] is None:
            base = default_ensemble(self.grid)
            packets = base.packets
        else:
            sigma = ec["sigma"] if ec["sigma"] is not None else self.grid.L / 24
            k_values = ec["k_values"]
            if k_values is None:
                k_hi = self.grid.k_max * 0.8
                k_values = np.linspace(-k_hi, k_hi, 9)
            packets = tuple((0.0, float(k), float(sigma)) for k in k_values)
        self.ensemble = EnsembleSpec(packets=packets,
                                     bulk_margin=ec["bulk_margin"],
                                     band_margin=ec["band_margin"])
        self._report = None

    def assumption_report(self):
        if self._report is None:
            self._report = check_assumptions(
                self.H, self.A, self.mourre, beta=self.cfg["lap"]["beta"],
                e=self.ensemble, g=self.grid, m=self.model)
        return self._report


def _run_assumptions(ctx: _Context, out_dir: Path, constants, verdicts):
    rep = ctx.assumption_report()
    vir = virial_check(ctx.H, ctx.A)
    vir_gate = 1e-9 * rep.norm_B * max(1.0, float(np.max(np.abs(
        ctx.H.eigenvalues))))
    constants.update(c0=rep.c0, c1=rep.c1, c2=rep.c2, c_tilde=rep.c_tilde,
                     delta_K=rep.delta_K, virial_residual=vir)
    for key, ok in rep.verdicts.items():
        verdicts[f"assumptions.{key}"] = bool(ok)
    verdicts["assumptions.virial"] = bool(vir <= vir_gate)
    return {"report": _jsonable(rep), "virial_residual": vir,
            "virial_gate": vir_gate}


def _run_lap(ctx: _Context, out_dir: Path, constants, verdicts):
    cfg = ctx.cfg["lap"]
    rep = ctx.assumption_report()
    R, eps_hat = ctx.R, ctx.eps_hat
    R_tilde = cfg["R_tilde"]
    if R_tilde is None:
        R_tilde = R ** (1 - eps_hat)
    delta = default_delta(R, eps_hat)
    grid = make_sweep_grid(
        ctx.H, R, mu_min=cfg["mu_min"], n_lambda=cfg["n_lambda"],
        n_mu=cfg["n_mu"], mu_min_policy=cfg["mu_min_policy"],
        box_length=ctx.grid.L)
    constants.update(delta=delta, R_tilde=R_tilde, mu_min=grid.mu_min)
    results = {}
    for s in cfg["s_values"]:
        params = RhsParams(s=s, R_tilde=R_tilde, delta=delta, c0=rep.c0,
                           c2=rep.c2, eps_hat=eps_hat, R=R)
        branch = "eq1" if s <= 1.0 else "eq2"
        rhs = rhs_eval(params, branch)
        sweep = lap_sweep(ctx.H, ctx.A, s, grid,
                          weight_mode=cfg["weight_mode"],
                          beta=cfg["beta"], rhs_params=params,
                          refine=cfg["refine"])
        tag = f"s{s:g}".replace(".", "p")
        rows = [(float(l), float(mu), float(sweep.norms[i, j]))
                for i, l in enumerate(sweep.lambda_values)
                for j, mu in enumerate(sweep.mu_values)]
        _write_csv(out_dir / f"lap_sweep_{tag}.csv",
                   ["lambda", "mu", "norm"], rows)
        verdicts[f"lap.bounded_{tag}"] = bool(sweep.sup_measured <= rhs)
        results[tag] = {
            "s": s, "branch": branch, "sup_measured": sweep.sup_measured,
            "rhs_theoretical": rhs, "argmax": list(sweep.argmax),
            "weight_mode": sweep.weight_mode,
        }
    return results


def _run_smoothing(ctx: _Context, out_dir: Path, constants, verdicts):
    cfg = ctx.cfg["smoothing"]
    s = float(cfg["s"])
    g, m = ctx.grid, ctx.model
    sigma = cfg["packet_sigma"] if cfg["packet_sigma"] is not None else g.L / 24
    speed = m.group_speed()
    T_star = travel_time_horizon(g, speed, g.wavenumbers)
    constants["T_star"] = T_star
    mu_min = 8 * np.pi / g.L

    weights = {
        "bracket_A": bracket_weight(ctx.A, s).matrix,
        "applied": applied_weight(g, s, m.gamma - 0.5),
    }
    results = {"T_star": T_star, "packets": []}
    curve_rows = []
    all_ok = {name: True for name in weights}
    quad_ok = True
    for idx, k0 in enumerate(cfg["packet_momenta"]):
        phi0 = wave_packet(g, 0.0, float(k0), float(sigma))
        entry = {"k0": float(k0)}
        for name, W in weights.items():
            comp = kato_vs_lap(ctx.H, W, ctx.tilde, phi0, g, speed,
                               mu_min=mu_min, n_lambda=24, n_mu=6)
            entry[name] = {
                "normalized_I": comp["normalized_I"],
                "lap_bound": comp["lap_bound"],
                "projection_norm": comp["projection_norm"],
                "passed": comp["passed"],
            }
            all_ok[name] = all_ok[name] and comp["passed"]
            if name == "bracket_A":
                for (tt, val) in comp["result"].plateau_curve:
                    curve_rows.append((float(k0), float(tt), float(val)))
        if idx == 0:
            # closed form vs quadrature oracle on the first packet
            closed = kato_integral(ctx.H, weights["bracket_A"], ctx.tilde,
                                   phi0, T_star).I_T
            quad = kato_integral_quadrature(ctx.H, weights["bracket_A"],
                                            ctx.tilde, phi0, T_star)
            rel = abs(closed - quad) / max(abs(quad), 1e-300)
            quad_ok = rel <= 1e-6
            entry["quadrature_relative_error"] = rel
        results["packets"].append(entry)
    _write_csv(out_dir / "kato_plateau.csv", ["k0", "T", "I_T"], curve_rows)
    beta_argmax, theta_max = theta_max_scan(m.gamma, s)
    results["theta"] = {"beta_argmax": beta_argmax, "theta_max": theta_max}
    verdicts["smoothing.kato_le_lap_bracket_A"] = bool(all_ok["bracket_A"])
    verdicts["smoothing.kato_le_lap_applied"] = bool(all_ok["applied"])
    verdicts["smoothing.quadrature_agreement"] = bool(quad_ok)
    verdicts["smoothing.theta_max"] = bool(
        abs(theta_max - (m.gamma - 0.5)) <= 1e-10)
    return results


def _run_counterexample(ctx: _Context, out_dir: Path, constants, verdicts):
    g = ctx.grid
    s, lam0, mu = 1.0, 2.0, 0.5
    rows = []
    ok = True
    for mm in (1, 4, 8):
        n0, n1 = translation_covariance_check(g, s, lam0, mm, mu)
        rel = abs(n1 - n0) / max(n0, 1e-300)
        rows.append((mm, float(n0), float(n1), float(rel)))
        ok = ok and rel <= 1e-10
    _write_csv(out_dir / "counterexample.csv",
               ["m", "norm_at_lambda0", "norm_at_shifted", "relative_diff"],
               rows)
    verdicts["counterexample.translation_covariance"] = bool(ok)
    return {"table": [list(r) for r in rows], "lambda0": lam0, "mu": mu,
            "s": s}


def _run_convergence(cfg: dict, out_dir: Path, constants, verdicts,
                     levels: int = 2):
    levels_out = []
    for lev in range(levels):
        scaled = copy.deepcopy(cfg)
        scaled["grid"]["N"] = cfg["grid"]["N"] * 2**lev
        scaled["grid"]["L"] = cfg["grid"]["L"] * 2**lev
        ctx = _Context(scaled)
        rep = ctx.assumption_report()
        grid = make_sweep_grid(ctx.H, ctx.R, n_lambda=cfg["lap"]["n_lambda"],
                               n_mu=cfg["lap"]["n_mu"],
                               mu_min_policy="box_scaling",
                               box_length=ctx.grid.L)
        sweep = lap_sweep(ctx.H, ctx.A, 1.0, grid, refine=False)
        sigma = ctx.grid.L / 24
        k0 = cfg["smoothing"]["packet_momenta"][0]
        phi0 = wave_packet(ctx.grid, 0.0, float(k0), float(sigma))
        W = bracket_weight(ctx.A, 1.0).matrix
        comp = kato_vs_lap(ctx.H, W, ctx.tilde, phi0, ctx.grid,
                           ctx.model.group_speed(), mu_min=grid.mu_min,
                           n_lambda=24, n_mu=6)
        levels_out.append({
            "N": scaled["grid"]["N"], "L": scaled["grid"]["L"],
            "mu_min": grid.mu_min, "c0": rep.c0,
            "lap_sup": sweep.sup_measured,
            "normalized_I": comp["normalized_I"],
            "T_star": comp["T_star"],
        })
    rows = [(d["N"], float(d["L"]), float(d["mu_min"]), float(d["lap_sup"]),
             float(d["normalized_I"])) for d in levels_out]
    _write_csv(out_dir / "convergence.csv",
               ["N", "L", "mu_min", "lap_sup", "normalized_I"], rows)
    rel_lap = [abs(b["lap_sup"] - a["lap_sup"]) / a["lap_sup"]
               for a, b in zip(levels_out, levels_out[1:])]
    rel_I = [abs(b["normalized_I"] - a["normalized_I"])
             / max(a["normalized_I"], 1e-300)
             for a, b in zip(levels_out, levels_out[1:])]
    verdicts["convergence.lap_sup_stable"] = bool(
        all(r <= 0.10 for r in rel_lap))
    verdicts["convergence.smoothing_stable"] = bool(
        all(r <= 0.15 for r in rel_I))
    return {"levels": levels_out, "lap_sup_relative_changes": rel_lap,
            "normalized_I_relative_changes": rel_I}


def run_scenario(cfg: dict, which: str, out_dir: str | Path | None = None,
                 seed: int | None = None, allow_large: bool = False,
                 levels: int = 2) -> tuple[int, dict]:
    """Run one scenario (or 'all'); returns (exit_code, summary dict).

    Deterministic given (config, seed).  Partial results are still emitted
    when a verdict fails.
    """
    if which not in SCENARIOS:
        raise ConfigError(f"unknown scenario {which!r}; choose from "
                          f"{', '.join(SCENARIOS)}")
    if cfg["grid"]["N"] > MAX_N_WITHOUT_OVERRIDE and not allow_large:
        raise ConfigError(
            f"grid.N = {cfg['grid']['N']} exceeds {MAX_N_WITHOUT_OVERRIDE} "
            "(dense eigendecomposition cost); pass --allow-large to override")
    cfg = copy.deepcopy(cfg)
    if seed is not None:
        cfg["seed"] = int(seed)
    out = Path(out_dir) if out_dir is not None else Path(
        cfg["outputs"]["directory"])
    out.mkdir(parents=True, exist_ok=True)
    _emit_schema(out)

    constants: dict = {}
    verdicts: dict = {}
    results: dict = {}
    steps = ([which] if which != "all"
             else ["assumptions", "lap", "smoothing", "counterexample"])
    ctx = _Context(cfg) if steps != ["convergence"] else None
    for step in steps:
        if step == "assumptions":
            results["assumptions"] = _run_assumptions(ctx, out, constants,
                                                      verdicts)
        elif step == "lap":
            results["lap"] = _run_lap(ctx, out, constants, verdicts)
        elif step == "smoothing":
            results["smoothing"] = _run_smoothing(ctx, out, constants,
                                                  verdicts)
        elif step == "counterexample":
            results["counterexample"] = _run_counterexample(ctx, out,
                                                            constants,
                                                            verdicts)
        elif step == "convergence":
            results["convergence"] = _run_convergence(cfg, out, constants,
                                                      verdicts, levels=levels)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "config_echo": _jsonable(cfg),
        "constants": _jsonable(constants),
        "verdicts": _jsonable(verdicts),
        "results": _jsonable(results),
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    code = 0 if all(verdicts.values()) else 1
    return code, summary


def convergence_study(cfg: dict, levels: int, out_dir: str | Path | None = None,
                      allow_large: bool = False,
                      allow_deep: bool = False) -> tuple[int, dict]:
    """Grid-doubling stability study; wraps run_scenario('convergence')."""
    if levels < 2:
        raise ConfigError(f"levels must be >= 2, got {levels}")
    if levels > MAX_LEVELS_WITHOUT_OVERRIDE and not allow_deep:
        raise ConfigError(
            f"levels = {levels} exceeds {MAX_LEVELS_WITHOUT_OVERRIDE}; "
            "pass --allow-deep to override")
    top_N = cfg["grid"]["N"] * 2 ** (levels - 1)
    if top_N > MAX_N_WITHOUT_OVERRIDE and not allow_large:
        raise ConfigError(
            f"finest level needs N = {top_N} > {MAX_N_WITHOUT_OVERRIDE}; "
            "pass --allow-large to override")
    return run_scenario(cfg, "convergence", out_dir=out_dir,
                        allow_large=True, levels=levels)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mourre-lab",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Config defaults:\n"
               + json.dumps(_jsonable(_defaults()), indent=2, sort_keys=True),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario (or all)")
    run.add_argument("--config", required=True, help="JSON config path")
    run.add_argument("--which", required=True, choices=SCENARIOS)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--allow-large", action="store_true",
                     help="permit N > 4096")

    conv = sub.add_parser("converge", help="grid-doubling stability study")
    conv.add_argument("--config", required=True)
    conv.add_argument("--levels", type=int, required=True)
    conv.add_argument("--out", default=None)
    conv.add_argument("--allow-large", action="store_true")
    conv.add_argument("--allow-deep", action="store_true",
                      help="permit more than 3 levels")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.command == "run":
            code, summary = run_scenario(
                cfg, args.which, out_dir=args.out, seed=args.seed,
                allow_large=args.allow_large)
        else:
            code, summary = convergence_study(
                cfg, args.levels, out_dir=args.out,
                allow_large=args.allow_large, allow_deep=args.allow_deep)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    n_fail = sum(1 for ok in summary["verdicts"].values() if not ok)
    status = "PASS" if code == 0 else f"FAIL ({n_fail} verdicts)"
    print(f"{status}: {len(summary['verdicts'])} verdicts, summary at "
          f"{Path(args.out or cfg['outputs']['directory']) / 'summary.json'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
