"""Command-line entry point.

    nlmaxwell run            --config scenario.json --out DIR
    nlmaxwell sweep          --config scenario.json --out DIR [--strict]
    nlmaxwell mms            [--config scenario.json] --out DIR
    nlmaxwell validate-graph --config scenario.json --out DIR

Exit codes: 0 success, 2 configuration error, 3 solver error,
4 non-confirming sweep under --strict.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from .conductivity import Smoothed, Step, describe, graph_from_dict, validate_growth
from .config import ScenarioConfig, parse_config, serialize
from .errors import ConfigurationError, NlMaxwellError, SolverError
from .harness import mms_full, mms_qs, run_sweep
from .records import write_ledger_csv
from .solver_full import FullSolverConfig, run_full
from .solver_qs import QsSolverConfig, run_qs, write_interface_csv

log = logging.getLogger("nlmaxwell")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_NOT_CONFIRMING = 4

COMMANDS = ("run", "sweep", "mms", "validate-graph")
VOLATILE = {"timings.json"}  # wall-clock content, not hashed


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def _jump_threshold(graph) -> float | None:
    if isinstance(graph, Step):
        return graph.threshold
    if isinstance(graph, Smoothed) and isinstance(graph.base, Step):
        return graph.base.threshold
    return None


# -- commands -----------------------------------------------------------------------

def cmd_run(cfg: ScenarioConfig, out: Path, args) -> tuple[int, list[Path], str]:
    grid = cfg.build_grid()
    material = cfg.build_material(grid)
    forcing = cfg.build_forcing(grid)
    init = cfg.build_initial(grid, material, forcing)
    p = cfg.solver_params
    n_snap = cfg.output["n_snapshots"]
    outputs = []
    if cfg.solver_kind == "full":
        scfg = FullSolverConfig(eps=p["eps"], T=p["T"], dt=p["dt"], cfl=p["cfl"], n_snapshots=n_snap)
        traj, records = run_full(init, scfg, material, forcing)
    else:
        scfg = QsSolverConfig(
            T=p["T"], dt=p["dt"], delta=p["delta"], tau_gamma=p["tau_gamma"], c_d=p["c_d"],
            n_snapshots=n_snap,
        )
        traj, records = run_qs(init, scfg, material, forcing)
        s_star = _jump_threshold(graph_from_dict(cfg.graph))
        if s_star is not None and cfg.output["interface"]:
            path = out / "interface.csv"
            write_interface_csv(traj, path, s_star, p["tau_gamma"])
            outputs.append(path)
    ledger = out / "ledger.csv"
    write_ledger_csv(records, ledger)
    outputs.insert(0, ledger)
    if cfg.output["snapshots"]:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        outputs += traj.write_snapshots(snap_dir)
    last = records[-1]
    summary = {
        "solver": cfg.solver_kind,
        "graph": describe(graph_from_dict(cfg.graph)),
        "steps": len(records) - 1,
        "t_final": last.t,
        "e_electric": last.e_electric,
        "e_magnetic": last.e_magnetic,
        "dissipation": last.dissipation,
        "initial_energy": records[0].total,
    }
    outputs.append(_write_json(out / "summary.json", summary))
    line = (
        f"run {cfg.solver_kind}: {summary['steps']} steps to t={last.t:.6g}, "
        f"electric={last.e_electric:.6e} magnetic={last.e_magnetic:.6e} "
        f"dissipation={last.dissipation:.6e}"
    )
    return EXIT_OK, outputs, line


def cmd_sweep(cfg: ScenarioConfig, out: Path, args) -> tuple[int, list[Path], str]:
    if cfg.sweep is None:
        raise ConfigurationError("the sweep command needs a 'sweep' block with eps_list")
    scenario = cfg.build_scenario("config")
    report = run_sweep(scenario, cfg.sweep["eps_list"], workers=args.threads)
    report.write_json(out / "sweep.json")
    report.write_csv(out / "sweep.csv")
    # wall times change run to run, so they live apart from the report
    _write_json(out / "timings.json", report.timings())
    outputs = [out / "sweep.json", out / "sweep.csv", out / "timings.json"]
    status = "confirming" if report.confirming else "not confirming"
    if not report.complete:
        status = "incomplete: " + "; ".join(report.errors)
    gaps = ", ".join(f"{r.eps:g}:{r.h_gap:.3e}" for r in report.rows)
    line = f"sweep: {status}; H gaps [{gaps}]"
    if not report.complete:
        return EXIT_SOLVER, outputs, line
    if args.strict and not report.confirming:
        return EXIT_NOT_CONFIRMING, outputs, line
    return EXIT_OK, outputs, line


def cmd_mms(cfg: ScenarioConfig | None, out: Path, args) -> tuple[int, list[Path], str]:
    m = (cfg.mms if cfg is not None else None) or {}
    full = mms_full(
        cells=tuple(m.get("full_cells", (16, 32, 64))), sigma=m.get("sigma", 1.0),
        eps=m.get("eps", 1.0), T=m.get("full_T", 0.25), amplitude=m.get("amplitude", 1.0),
    )
    qs = mms_qs(
        n=m.get("qs_cells", 32), sigma=m.get("sigma", 1.0), T=m.get("qs_T", 0.1),
        refinements=m.get("qs_refinements", 3), amplitude=m.get("amplitude", 1.0),
    )
    report = {"full_spatial": full.to_dict(), "qs_temporal": qs.to_dict()}
    path = _write_json(out / "mms.json", report)
    line = (
        f"mms: full spatial order {full.observed_order:.3f}, "
        f"qs temporal order {qs.observed_order:.3f}"
    )
    return EXIT_OK, [path], line


def cmd_validate_graph(cfg: ScenarioConfig, out: Path, args) -> tuple[int, list[Path], str]:
    if cfg.growth is None:
        raise ConfigurationError("validate-graph needs a 'growth' block (p, a0, a1, b0, M0)")
    g = cfg.growth
    graph = graph_from_dict(cfg.graph)
    rep = validate_growth(
        graph, g["p"], g["a0"], g["a1"], g["b0"], g["M0"], s_max=g["s_max"], n_samples=g["n_samples"]
    )
    path = _write_json(out / "growth.json", {"graph": describe(graph), **rep.to_dict()})
    line = f"validate-graph {describe(graph)}: {'pass' if rep.passed else 'FAIL'}"
    return (EXIT_OK if rep.passed else EXIT_CONFIG), [path], line


HANDLERS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "mms": cmd_mms,
    "validate-graph": cmd_validate_graph,
}


# -- driver ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlmaxwell", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="scenario JSON file")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    ap.add_argument("--strict", action="store_true", help="non-confirming sweeps exit with 4")
    ap.add_argument("--threads", type=int, default=1, help="cap on concurrent solver runs")
    ap.add_argument("--seed", type=int, default=0, help="recorded only; solver math is deterministic")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": args.command,
        "config": None,
        "config_sha256": None,
        "seed": args.seed,
        "strict": args.strict,
        "outputs": [],
        "status": "failed",
        "exit_code": None,
        "error": None,
    }

    code, outputs, line = EXIT_CONFIG, [], ""
    try:
        cfg = None
        if args.config is not None:
            text = args.config.read_text()
            manifest["config"] = str(args.config)
            manifest["config_sha256"] = hashlib.sha256(text.encode()).hexdigest()
            cfg = parse_config(text)
            (out / "config.normalized.json").write_text(serialize(cfg))
            outputs.append(out / "config.normalized.json")
        elif args.command != "mms":
            raise ConfigurationError(f"the {args.command} command needs --config")
        log.info("running %s with output in %s", args.command, out)
        code, produced, line = HANDLERS[args.command](cfg, out, args)
        outputs += produced
        manifest["status"] = "ok" if code == EXIT_OK else "partial"
    except (ConfigurationError, ValueError) as exc:
        code, line = EXIT_CONFIG, f"configuration error: {exc}"
        manifest["error"] = getattr(exc, "errors", [str(exc)])
    except SolverError as exc:
        code, line = EXIT_SOLVER, f"solver error ({type(exc).__name__}): {exc}"
        manifest["error"] = [f"{type(exc).__name__}: {exc}"]
    except (NlMaxwellError, OSError) as exc:
        code, line = EXIT_CONFIG, f"error: {exc}"
        manifest["error"] = [str(exc)]
    manifest["exit_code"] = code
    manifest["outputs"] = [
        {"path": str(p.relative_to(out)), "sha256": None if p.name in VOLATILE else _sha256(p)}
        for p in outputs if p.exists()
    ]
    _write_json(out / "manifest.json", manifest)
    for entry in manifest["outputs"]:
        log.info("wrote %s", entry["path"])
    print(line, file=sys.stdout if code == EXIT_OK else sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
