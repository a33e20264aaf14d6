"""Command-line entry point.

Commands read a JSON config and write JSON reports, coefficient files and
grid CSVs into ``--out``, plus one ``manifest.json`` per run. Exit codes:
0 success, 1 error (machine-readable JSON on stderr), 2 the forcing fails
the solvability condition (``solve`` only).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .equivalence import commutation_check, constrained_field, dual_path_discrepancy
from .fd_oracle import FDConfig, compare, march_report
from .io import (
    coefficients_from_dict,
    coefficients_to_dict,
    read_coefficients,
    read_grid_csv,
    write_coefficients,
    write_grid_csv,
    write_json,
    write_pair,
)
from .perturbation import PerturbationData, assemble, fredholm_diagnostics, solve_perturbed
from .spectral import Basis, ProblemParams, SpectralError, analyze, random_field, synthesize
from .telegraph import kernel_basis, multiplier_lower_bound, resonant_modes, solve_LTE
from .walk import VWField, solve_walk, walk_kernel

PROBLEMS = ("telegraph", "walk", "perturbed")


class ConfigError(SpectralError):
    pass


def load_config(path: Path) -> dict:
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("problem", "omega", "mu", "K", "N"):
        if key not in cfg:
            raise ConfigError(f"config is missing {key!r}")
    if cfg["problem"] not in PROBLEMS:
        raise ConfigError(f"problem must be one of {PROBLEMS}, got {cfg['problem']!r}")
    cfg["_dir"] = path.parent
    return cfg


def params_from_config(cfg: dict) -> ProblemParams:
    extra = {k: float(cfg[k]) for k in ("svd_tol", "quad_tol") if k in cfg}
    return ProblemParams(omega=float(cfg["omega"]), mu=float(cfg["mu"]), K=int(cfg["K"]), N=int(cfg["N"]), **extra)


def _resolve(cfg: dict, key: str) -> Path:
    p = Path(cfg[key])
    return p if p.is_absolute() else cfg["_dir"] / p


def load_forcing(cfg: dict, params: ProblemParams):
    if "forcing" not in cfg:
        raise ConfigError("config is missing 'forcing'")
    path = _resolve(cfg, "forcing")
    if path.suffix.lower() == ".csv":
        return analyze(read_grid_csv(path, params), Basis.COSINE)
    return read_coefficients(path, params)


def load_perturbation(cfg: dict, params: ProblemParams) -> PerturbationData:
    if "perturbation" not in cfg:
        return PerturbationData.trivial(params)
    d = json.loads(_resolve(cfg, "perturbation").read_text())
    nu = coefficients_from_dict(d["nu"], params)
    alpha = coefficients_from_dict(d["alpha"], params)
    return PerturbationData(nu, alpha, float(d.get("base_mu", params.mu)))


def _output_grid(cfg: dict, params: ProblemParams) -> tuple[int, int]:
    return int(cfg.get("nx", max(2 * params.N + 2, 65))), int(cfg.get("nt", max(4 * params.K + 4, 64)))


def cmd_solve(cfg: dict, out: Path, args) -> tuple[int, list, dict]:
    params = params_from_config(cfg)
    gamma = float(cfg.get("gamma", 2.0))
    f = load_forcing(cfg, params)
    problem = cfg["problem"]
    written = []
    if problem == "telegraph":
        rep = solve_LTE(f, params, gamma)
        u = rep.solution
    elif problem == "walk":
        rep = solve_walk(f, params, gamma)
        u = rep.solution.u
        written.append(write_pair(out, "solution_pair", rep.solution.u, rep.solution.z))
    else:
        rep = solve_perturbed(f, load_perturbation(cfg, params), params, gamma)
        u = rep.solution
    report = {"problem": problem, **rep.summary(), "solution": coefficients_to_dict(u)}
    write_json(out / "report.json", report)
    write_coefficients(out / "solution.json", u)
    write_grid_csv(out / "solution.csv", synthesize(u, *_output_grid(cfg, params)))
    written += [out / "report.json", out / "solution.json", out / "solution.csv"]
    code = 0 if rep.solvable else 2
    if not args.quiet:
        state = "solvable" if rep.solvable else "NOT solvable"
        print(f"{problem}: {state}; defect={rep.solvability_defect:.3e} residual={rep.residual:.3e} index={rep.index}")
    return code, written, report


def cmd_diagnose(cfg: dict, out: Path, args) -> tuple[int, list, dict]:
    params = params_from_config(cfg)
    rng = np.random.default_rng(args.seed)
    report = {
        "problem": cfg["problem"],
        "kernel_dim": len(kernel_basis(params, "LTE")),
        "cokernel_dim": len(kernel_basis(params, "LTE_tilde")),
        "walk_kernel_dim": len(walk_kernel(params)),
        "walk_cokernel_dim": len(walk_kernel(params, tilde=True)),
        "resonance_table": [list(m) for m in resonant_modes(params)],
    }
    report["index"] = report["kernel_dim"] - report["cokernel_dim"]
    if params.mu != 0:
        report["smoothing_bound_constant"] = multiplier_lower_bound(params)
        fields = [random_field(params, Basis.COSINE, rng, decay=1.0) for _ in range(3)]
        checks = [commutation_check(constrained_field(u, params)) for u in fields]
        report["commutation_residual_max"] = max(c.max_residual for c in checks)
    if cfg["problem"] == "perturbed":
        diag = fredholm_diagnostics(assemble(load_perturbation(cfg, params), params))
        report["perturbed"] = diag.as_dict()
    write_json(out / "diagnostics.json", report)
    if not args.quiet:
        print(f"kernel_dim={report['kernel_dim']} cokernel_dim={report['cokernel_dim']} index={report['index']}")
    return 0, [out / "diagnostics.json"], report


def cmd_oracle(cfg: dict, out: Path, args) -> tuple[int, list, dict]:
    params = params_from_config(cfg)
    if cfg["problem"] != "telegraph":
        raise ConfigError("oracle runs only for the telegraph problem")
    fd = FDConfig(
        nx=int(cfg.get("nx", 201)),
        dt_steps=int(cfg.get("dt_steps", 800)),
        n_periods=int(cfg.get("n_periods", 60)),
    )
    f = load_forcing(cfg, params)
    u = solve_LTE(f, params, float(cfg.get("gamma", 2.0))).solution
    res = march_report(synthesize(f, fd.nx, fd.dt_steps), params.mu, fd)
    report = {"l2_error": compare(u, res.field), "convergence_factor": res.decay_factor, "periods": fd.n_periods}
    write_json(out / "oracle.json", report)
    write_grid_csv(out / "fd.csv", res.field)
    write_grid_csv(out / "spectral.csv", synthesize(u, fd.nx, fd.dt_steps))
    if not args.quiet:
        print(f"relative L2 error {report['l2_error']:.3e}; period-to-period decay {report['convergence_factor']:.3e}")
    return 0, [out / "oracle.json", out / "fd.csv", out / "spectral.csv"], report


def cmd_equiv(cfg: dict, out: Path, args) -> tuple[int, list, dict]:
    params = params_from_config(cfg)
    rng = np.random.default_rng(args.seed)

    vw = VWField.from_uz(random_field(params, Basis.COSINE, rng, 1.0), random_field(params, Basis.SINE, rng, 1.0))
    general = commutation_check(vw)
    constrained = commutation_check(constrained_field(random_field(params, Basis.COSINE, rng, 1.0), params))
    h = random_field(params, Basis.COSINE, rng, 1.0)
    report = {
        "general": general.as_dict(),
        "constrained": constrained.as_dict(),
        "dual_path_discrepancy": dual_path_discrepancy(h),
    }
    write_json(out / "equivalence.json", report)
    if not args.quiet:
        print(f"max residual {max(general.max_residual, constrained.max_residual):.3e}")
    return 0, [out / "equivalence.json"], report


COMMANDS = {"solve": cmd_solve, "diagnose": cmd_diagnose, "oracle": cmd_oracle, "equiv-check": cmd_equiv}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="telegraph", description="Periodic telegraph / random walk spectral toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", required=True, type=Path)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = load_config(args.config)
        args.out.mkdir(parents=True, exist_ok=True)
        code, written, _ = COMMANDS[args.command](cfg, args.out, args)
    except (SpectralError, OSError, KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    manifest = {
        "command": args.command,
        "params": {k: v for k, v in cfg.items() if not k.startswith("_")},
        "inputs": [str(args.config)],
        "outputs": [str(p) for p in written],
        "tool_version": __version__,
        "seed": args.seed,
        "wall_time_s": time.perf_counter() - start,
        "exit_code": code,
    }
    write_json(args.out / "manifest.json", manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
