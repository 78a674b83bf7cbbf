"""Command line: simulate datasets, learn profiles, evaluate, reproduce tables.

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .adaptive import refine, write_refinement_log
from .bspline import SplineModel, model_from_dict, model_to_dict, uniform_partition
from .config import (
    PRESETS,
    SCALES,
    ConfigError,
    load_config,
    preset_config,
    resolve_out_dir,
)
from .data import generate_dataset, load_dataset, save_dataset
from .kernels import Cutoff, CutoffProfile, EpsilonProfile, KernelSpec, NumericError, truth_profile
from .learner import assemble, learn, save_system, solve
from .metrics import error_report, pairwise_density, reconstruct

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def load_model(path):
    """A model file is a spline (canonical) or a named truth profile."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"model file not found: {p}")
    data = json.loads(p.read_text())
    if isinstance(data, dict) and "breakpoints" in data:
        return model_from_dict(data)
    if isinstance(data, dict) and "profile" in data:
        prof = data["profile"]
        kind = prof.get("kind")
        if kind == "cutoff":
            spec = KernelSpec(
                d=int(prof["d"]),
                chi=float(prof["chi"]),
                reg=Cutoff(float(prof["r_c"])),
                m=int(prof.get("m", 1)),
                h=float(prof.get("h", 0.01)),
            )
            return CutoffProfile(spec)
        if kind == "epsilon":
            return EpsilonProfile(float(prof["chi"]), float(prof["eps"]))
    raise ConfigError(f"unrecognized model file schema in {p}")


def save_model(model: SplineModel, path):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def _write_report_files(
    ds, model_or_profile, report: dict, out_dir: Path, bins: int, report_path=None,
    workers: int = 1, recon=None,
):
    """report.json plus the plotting CSV bundle for one evaluated model."""
    out_dir.mkdir(parents=True, exist_ok=True)
    if report_path is None:
        report_path = out_dir / "report.json"
    density = pairwise_density(ds, bins)
    truth = truth_profile(ds.kernel)
    grid = density.edges
    if isinstance(model_or_profile, SplineModel):
        learned_vals = np.asarray(model_or_profile(grid))
    else:
        learned_vals = np.asarray(model_or_profile.phi(grid))
    truth_vals = np.asarray(truth.phi(grid))
    lines = ["r,phi_true,phi_learned"]
    lines += [
        f"{r:.17g},{t:.17g},{v:.17g}"
        for r, t, v in zip(grid, truth_vals, learned_vals)
    ]
    (out_dir / "profile_curve.csv").write_text("\n".join(lines) + "\n")
    lines = ["r_left,r_right,mass"]
    lines += [
        f"{lo:.17g},{hi:.17g},{w:.17g}"
        for lo, hi, w in zip(density.edges[:-1], density.edges[1:], density.weights)
    ]
    (out_dir / "density.csv").write_text("\n".join(lines) + "\n")
    if recon is None:
        recon = reconstruct(ds, model_or_profile, workers=workers)
    cols = ",".join(f"x{q + 1}" for q in range(ds.d))
    lines = [f"l,t,i,{cols}"]
    for l, t in enumerate(recon.times):
        for i in range(recon.N):
            coords = ",".join(f"{v:.17g}" for v in recon.frames[0, l, i])
            lines.append(f"{l},{t:.17g},{i},{coords}")
    (out_dir / "recon_traj_0000.csv").write_text("\n".join(lines) + "\n")
    with open(report_path, "w") as f:
        json.dump(report, f, indent=2)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = resolve_out_dir(args.out)
    ds = generate_dataset(
        mode=cfg.mode,
        kernel=cfg.kernel(),
        N=cfg.N,
        M=cfg.M,
        T=cfg.T,
        tau=cfg.tau,
        dt_obs=cfg.dt_obs,
        eta=cfg.eta,
        seed=cfg.seed,
        workers=args.workers,
    )
    save_dataset(ds, out, config_echo=cfg.to_dict())
    print(f"wrote {ds.M} trajectories ({ds.L + 1} frames, {ds.N} particles) to {out}")
    return EXIT_OK


def cmd_learn(args) -> int:
    ds = load_dataset(args.data)
    out = resolve_out_dir(args.out)
    if args.knots == "adaptive":
        tol = float(args.tol)
        result = refine(
            ds,
            tol=tol,
            max_iter=args.max_iter,
            initial=None if args.initial_count is None else uniform_partition(
                *ds.distance_range(), args.initial_count, args.degree
            ),
            budget=args.budget,
            degree=args.degree,
        )
        model = result.model
        if args.log:
            write_refinement_log(result.records, resolve_out_dir(args.log))
        print(
            f"adaptive refinement: {result.iterations} iterations, "
            f"{model.partition.breakpoints.size} breakpoints"
        )
    else:
        try:
            count = int(args.knots)
        except ValueError:
            raise ConfigError(f"--knots must be an integer or 'adaptive', got {args.knots!r}")
        a, b = ds.distance_range()
        partition = uniform_partition(a, b, count, args.degree)
        if args.dump_system:
            system = assemble(ds, partition)
            save_system(system, resolve_out_dir(args.dump_system))
            model = SplineModel(partition, solve(system))
        else:
            model = learn(ds, partition)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    print(f"wrote model ({model.coefficients.size} coefficients) to {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ds = load_dataset(args.data)
    model = load_model(args.model)
    out = resolve_out_dir(args.out)
    if out.suffix == ".json":
        report_path, files_dir = out, out.parent
    else:
        report_path, files_dir = out / "report.json", out
    recon = reconstruct(ds, model, workers=args.workers)
    n_bp = model.partition.breakpoints.size if isinstance(model, SplineModel) else None
    report = error_report(ds, model, P=args.bins, n_breakpoints=n_bp, recon=recon)
    report["M"] = ds.M
    report["N"] = ds.N
    report["L"] = ds.L
    report["seed"] = ds.seed
    _write_report_files(ds, model, report, files_dir, args.bins, report_path,
                        recon=recon)
    print(
        f"traj_err_rel = {report['traj_err_rel']:.6g}  "
        f"profile_err_rel = {report['profile_err_rel']:.6g}"
    )
    return EXIT_OK


def cmd_reproduce(args) -> int:
    preset = PRESETS[args.table]
    chis = preset["chis"]
    if args.chi is not None:
        matches = [c for c in chis if abs(c - args.chi) < 1.0e-12]
        if not matches:
            raise ConfigError(f"chi {args.chi} is not part of preset {args.table}: {chis}")
        chis = matches
    out_root = resolve_out_dir(args.out)
    entries = []
    for chi in chis:
        cfg = preset_config(args.table, chi, args.scale, seed=args.seed)
        entry_dir = out_root / f"chi_{chi:g}"
        data_dir = entry_dir / "data"
        ds = generate_dataset(
            mode=cfg.mode,
            kernel=cfg.kernel(),
            N=cfg.N,
            M=cfg.M,
            T=cfg.T,
            tau=cfg.tau,
            dt_obs=cfg.dt_obs,
            eta=cfg.eta,
            seed=cfg.seed,
            workers=args.workers,
        )
        save_dataset(ds, data_dir, config_echo=cfg.to_dict())
        a, b = ds.distance_range()
        model = learn(ds, uniform_partition(a, b, preset["knots"]))
        save_model(model, entry_dir / "model.json")
        recon = reconstruct(ds, model, workers=args.workers)
        report = error_report(ds, model, P=cfg.P, n_breakpoints=preset["knots"],
                              recon=recon)
        report["table"] = args.table
        report["scale"] = args.scale
        _write_report_files(ds, model, report, entry_dir, cfg.P, recon=recon)
        entries.append(report)
        print(f"[{args.table} chi={chi:g}] traj={report['traj_err_rel']:.3e} "
              f"profile={report['profile_err_rel']:.3e}")
    with open(out_root / "summary.json", "w") as f:
        json.dump({"table": args.table, "scale": args.scale, "entries": entries}, f, indent=2)
    # table layout: one column per chi, one row per error measure
    print(f"\nPerformance measures ({args.table}, {args.scale} scale)")
    print("chi           " + "  ".join(f"{e['chi']:>10g}" for e in entries))
    print("Err_traj_rel  " + "  ".join(f"{e['traj_err_rel']:>10.3e}" for e in entries))
    print("Err_phi_rel   " + "  ".join(f"{e['profile_err_rel']:>10.3e}" for e in entries))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kslearn",
        description="Generate chemotaxis particle trajectories and learn the "
        "radial interaction profile from them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a trajectory dataset")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--workers", type=int, default=1, help="trajectory pool size")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("learn", help="learn a profile from a dataset")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--knots", required=True, help="breakpoint count or 'adaptive'")
    p.add_argument("--out", required=True, help="output model JSON path")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--tol", default="0.01", help="adaptive tolerance (accepts inf)")
    p.add_argument("--max-iter", type=int, default=6)
    p.add_argument("--initial-count", type=int, default=None)
    p.add_argument("--budget", type=int, default=None, help="breakpoint budget")
    p.add_argument("--log", default=None, help="refinement log path (JSON lines)")
    p.add_argument("--dump-system", default=None,
                   help="write the assembled normal system as diagnostic JSON")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("evaluate", help="reconstruct trajectories and report errors")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--model", required=True, help="model JSON path")
    p.add_argument("--out", required=True, help="report path (report.json) or directory")
    p.add_argument("--bins", type=int, default=400, help="density histogram bins")
    p.add_argument("--workers", type=int, default=1, help="reconstruction pool size")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("reproduce", help="run a preset table sweep")
    p.add_argument("--table", required=True, choices=sorted(PRESETS))
    p.add_argument("--scale", default="full", choices=sorted(SCALES))
    p.add_argument("--chi", type=float, default=None, help="run only this sweep entry")
    p.add_argument("--out", default="reproduce_out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="trajectory pool size")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
