"""Command-line entry point: ``lagreul <subcommand> [manifest.json] [--out DIR]``.

Exit codes: 0 all audits pass, 2 an audit failed or was inconclusive,
3 the Picard iteration did not converge, 4 the manifest (or environment) is invalid.
"""
import argparse
import csv
import json
import sys
from pathlib import Path

from . import experiments
from .audit import PASS, BoundAudit
from .errors import ConfigError, ConvergenceError, ManifestError
from .fld import Field, write_fld
from .manifest import build_field, parse_manifest, suite_options
from .parallel import worker_count
from .plotting import ratio_chart, trace_chart
from .solver import ModelParams, SolverConfig, data_radius, picard_solve

EXIT_OK, EXIT_AUDIT, EXIT_CONVERGENCE, EXIT_MANIFEST = 0, 2, 3, 4

AUDIT_COMMANDS = tuple(experiments.SUITES) + ("counterexample",)
COMMANDS = ("solve",) + AUDIT_COMMANDS + ("report",)
# Suite keywords filled from the manifest's model block unless set in ``options``.
MODEL_KEYS = ("k", "rho_k", "steps", "T")


def setup_from(manifest):
    c = manifest.common
    return experiments.Setup(d=c.d, n=c.n, L=c.L, alpha=c.alpha, p=c.p, nu=c.nu, seed=c.seed)


def write_audits(audits, path):
    with open(path, "w") as fh:
        for a in audits:
            fh.write(a.to_json() + "\n")


def echo(audits):
    for a in audits:
        print(f"{a.verdict:<12} {a.audit_id:<40} ratio={a.ratio:.4g}")


def verdict_code(audits):
    return EXIT_OK if all(a.verdict == PASS for a in audits) else EXIT_AUDIT


def write_trace(trace, path):
    rows = trace.rows()
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["iteration", "dx", "dtau", "dv", "distance", "ratio"])
        writer.writeheader()
        writer.writerows(rows)
    return rows


def run_solve(manifest, out):
    setup = setup_from(manifest)
    grid = setup.grid
    base = getattr(manifest, "_base", None)
    u0 = build_field(manifest.data.u0, grid, base)
    sigma0 = build_field(manifest.data.sigma0, grid, base)
    m = manifest.model
    try:
        params = ModelParams(nu=setup.nu, k=m.k, rho_k=m.rho_k, model=m.model, alpha=setup.alpha, p=setup.p,
                             T=m.T, steps=m.steps)
        radius = manifest.solver.ball_radius or data_radius(grid, u0, sigma0, params)
        s = manifest.solver
        config = SolverConfig(ball_radius=radius, max_iterations=s.max_iterations, tolerance=s.tolerance,
                              dealias=s.dealias, scheme=s.scheme, norm_seed=setup.seed)
        state, trace = picard_solve(grid, u0, sigma0, params, config)
    except ConfigError as exc:
        raise ManifestError(str(exc)) from None
    except ConvergenceError as exc:
        if exc.trace is not None:
            write_trace(exc.trace, out / "trace.csv")
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    rows = write_trace(trace, out / "trace.csv")
    trace_chart(rows, out / "trace.png")
    symmetric = state.is_tensor
    write_fld(out / "displacement_final.fld", Field(grid, state.flow.displacement[-1], "displacement"))
    write_fld(out / "stress_final.fld", Field(grid, state.tau[-1], "stress", symmetric))
    write_fld(out / "velocity_final.fld", Field(grid, state.v[-1], "velocity"))
    ratios = trace.ratios
    audits = [
        BoundAudit("solve.picard_ratio", max(ratios) if ratios else 0.0, 0.5,
                   details={"iterations": trace.iterations, "distances": trace.distance}),
        BoundAudit("solve.volume_defect", state.flow.max_volume_defect(), 1e-3),
        BoundAudit("solve.velocity_consistency", state.velocity_mismatch(), 1e-8),
    ]
    if symmetric:
        audits.append(BoundAudit("solve.stress_symmetry", state.symmetry_defect(), 1e-12))
    write_audits(audits, out / "solve.jsonl")
    echo(audits)
    print(f"converged in {trace.iterations} iteration(s)")
    return verdict_code(audits)


def run_suite(command, manifest, out):
    setup = setup_from(manifest)
    options = dict(manifest.options)
    try:
        if command == "counterexample":
            func = experiments.counterexample_demo
            opts = suite_options(func, options, reserved=())
            opts.setdefault("alpha", setup.alpha)
            opts.setdefault("d", setup.d)
            audits = [func(**opts)]
        else:
            func = experiments.SUITES[command]
            opts = suite_options(func, options)
            accepted = func.__code__.co_varnames[: func.__code__.co_argcount]
            for key in MODEL_KEYS:
                if key in accepted and key not in opts and key in manifest.model.model_fields_set:
                    opts[key] = getattr(manifest.model, key)
            audits = func(setup, **opts)
    except ConfigError as exc:
        raise ManifestError(str(exc)) from None
    write_audits(audits, out / f"{command}.jsonl")
    echo(audits)
    return verdict_code(audits)


def run_report(directory, out):
    directory = Path(directory)
    if not directory.is_dir():
        raise ManifestError(f"report directory {directory} does not exist")
    rows = []
    for path in sorted(directory.glob("*.jsonl")):
        for line in path.read_text().splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            rows.append({"source": path.name, "audit_id": rec["audit_id"], "verdict": rec["verdict"],
                         "measured": rec["measured"], "bound": rec["bound"], "ratio": rec["ratio"]})
    fields = ["source", "audit_id", "verdict", "measured", "bound", "ratio"]
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    counts = {}
    for r in rows:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    (out / "summary.json").write_text(json.dumps({"audits": len(rows), "verdicts": counts}, sort_keys=True))
    ratio_chart(rows, out / "ratios.png")
    print(f"{len(rows)} audit(s): " + (", ".join(f"{k}={v}" for k, v in sorted(counts.items())) or "none"))
    return EXIT_OK if all(r["verdict"] == PASS for r in rows) else EXIT_AUDIT


def build_parser():
    parser = argparse.ArgumentParser(prog="lagreul", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("target", nargs="?", help="manifest JSON (or the directory to summarise for 'report')")
    parser.add_argument("--out", default=None, help="output directory (default: current directory)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = Path(args.out or ".")
    try:
        worker_count()
    except ValueError as exc:
        print(f"environment error: {exc}", file=sys.stderr)
        return EXIT_MANIFEST
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "report":
            return run_report(args.target or ".", out)
        manifest = parse_manifest(args.target)
        if args.command == "solve":
            return run_solve(manifest, out)
        return run_suite(args.command, manifest, out)
    except ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return EXIT_MANIFEST
    except ConvergenceError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
