"""Command-line front end.

    nh-stab evolve <config.json>        trajectory CSV
    nh-stab stability <config.json>     characteristic matrix report
    nh-stab figure <fig1|fig2> --out D  figure-data CSV bundle
    nh-stab sweep <config.json>         one stability/evolution row per grid value

Exit codes: 0 completed, 1 configuration or I/O error, 2 singularity
(or non-finite state) reached during an evolution.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import Scenario, build_scenario, load_json, load_scenario, sweep_values
from .dynamics import EvolutionConfig, Trajectory, TerminationStatus, evolve
from .errors import ConfigError, NHStabError, SingularDenominator
from .models import (
    PerturbationParams,
    TunnelingComplexElementModel,
    TunnelingDetuningModel,
    model1_analytic,
    model1_hamiltonian,
    model1_pure_state,
    model2_analytic,
    model2_hamiltonian,
    model2_pure_state,
    model2_singularity_time,
)
from .observables import linear_entropy
from .stability import PureReference, StabilityReport, analyze, tls_exponent

EXIT_OK, EXIT_CONFIG, EXIT_SINGULAR = 0, 1, 2

DELTAS = (-0.02, -0.01, 0.0, 0.01, 0.02)
FIGURES = {
    "fig1": {"model": "model1", "parameter": "lambda_tilde", "values": (0.5, 2.0, -0.5, -2.0),
             "swept": "delta2", "fixed": {"delta1": 0.01}, "tau_end": 10.0},
    "fig2": {"model": "model2", "parameter": "eta_tilde", "values": (-2.0, 2.0),
             "swept": "delta1", "fixed": {"delta2": 0.01}, "tau_end": 3.0},
}
FIG_DT, FIG_STRIDE = 1e-3, 10
SINGULARITY_MARGIN = 0.05


def fmt(x) -> str:
    """17 significant digits; empty for missing values."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".17g")


def _rho_columns(dim: int) -> list[str]:
    cols = []
    for i in range(dim):
        for j in range(i, dim):
            cols.append(f"rho_{i}{j}_re")
            if i != j:
                cols.append(f"rho_{i}{j}_im")
    return cols


def _rho_values(rho: np.ndarray) -> list[float]:
    vals = []
    n = rho.shape[0]
    for i in range(n):
        for j in range(i, n):
            vals.append(rho[i, j].real)
            if i != j:
                vals.append(rho[i, j].imag)
    return vals


def _footer(traj: Trajectory, omega: float) -> str | None:
    term = traj.termination
    if term.completed:
        return None
    tag = "singularity" if term.status is TerminationStatus.SINGULARITY else "nonfinite"
    return f"# {tag} tau={fmt(term.time * omega)}\n"


def trajectory_csv(traj: Trajectory, omega: float) -> str:
    dim = traj.rho.shape[1]
    out = io.StringIO()
    out.write(",".join(["tau", "S_L", "purity", "purity_rate"] + _rho_columns(dim)) + "\n")
    for k in range(len(traj)):
        row = [traj.times[k] * omega, traj.linear_entropy[k], traj.purity[k],
               traj.purity_rate[k] / omega] + _rho_values(traj.rho[k])
        out.write(",".join(fmt(v) for v in row) + "\n")
    footer = _footer(traj, omega)
    if footer:
        out.write(footer)
    return out.getvalue()


def _write(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _exit_code(traj: Trajectory) -> int:
    return EXIT_OK if traj.termination.completed else EXIT_SINGULAR


def run_scenario(sc: Scenario) -> Trajectory:
    if sc.initial is None:
        raise ConfigError("evolution needs a reference_state (and optional perturbation)")
    return evolve(sc.hamiltonian, sc.initial, sc.evolution)


def cmd_evolve(args) -> int:
    sc = load_scenario(args.config)
    traj = run_scenario(sc)
    text = trajectory_csv(traj, sc.omega)
    target = args.out or sc.outputs.get("trajectory_csv")
    if target:
        _write(target, text)
        _say(args, f"wrote {len(traj)} rows to {target}")
    else:
        sys.stdout.write(text)
    if not traj.termination.completed:
        print(_footer(traj, sc.omega).strip(), file=sys.stderr)
    return _exit_code(traj)


def report_dict(report: StabilityReport, lambda_tls: float | None) -> dict:
    ev = report.eigenvalues
    return {
        "char_matrix": np.asarray(report.char_matrix).tolist(),
        "eigenvalues": [[float(z.real), float(z.imag)] for z in ev],
        "classification": report.classification.value,
        "instability_type": None if report.instability_type is None else report.instability_type.value,
        "lambda_tls": lambda_tls,
        "lyapunov_certificate": "found" if report.lyapunov_P is not None else "none",
        "lyapunov_P": None if report.lyapunov_P is None else np.asarray(report.lyapunov_P).tolist(),
    }


def stability_of(sc: Scenario) -> tuple[StabilityReport, float | None]:
    if sc.reference is None:
        raise ConfigError("stability analysis needs a reference_state")
    ref = PureReference.for_hamiltonian(sc.reference, sc.hamiltonian)
    report = analyze(sc.hamiltonian, ref)
    lam = tls_exponent(ref, sc.hamiltonian.Gamma, sc.hamiltonian.hbar) if sc.dim == 2 else None
    return report, lam


def _report_text(d: dict) -> str:
    lines = ["characteristic matrix:"]
    lines += ["  " + "  ".join(f"{x: .10g}" for x in row) for row in d["char_matrix"]]
    lines.append("eigenvalues:")
    lines += [f"  {re: .10g} {im:+.10g}i" for re, im in d["eigenvalues"]]
    lines.append(f"classification: {d['classification']}")
    if d["instability_type"] is not None:
        lines.append(f"type: {d['instability_type']}")
    if d["lambda_tls"] is not None:
        lines.append(f"lambda_tls: {d['lambda_tls']:.17g}")
    lines.append(f"lyapunov certificate: {d['lyapunov_certificate']}")
    return "\n".join(lines)


def cmd_stability(args) -> int:
    sc = load_scenario(args.config)
    report, lam = stability_of(sc)
    d = report_dict(report, lam)
    _say(args, _report_text(d))
    target = args.out or sc.outputs.get("stability_report")
    if target:
        _write(target, json.dumps(d, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _analytic_entropy(model: str, param: float, p: PerturbationParams, tau: float) -> float:
    try:
        if model == "model1":
            rho = model1_analytic(TunnelingDetuningModel.from_ratio(param), p, tau)
        else:
            rho = model2_analytic(TunnelingComplexElementModel.from_ratio(param), p, tau)
    except SingularDenominator:
        return float("nan")
    return linear_entropy(rho)


def figure_curve(fig_id: str, param: float, delta: float) -> tuple[str, dict]:
    """CSV text and manifest entry for one curve."""
    fig = FIGURES[fig_id]
    pvals = {**fig["fixed"], fig["swept"]: delta}
    p = PerturbationParams(pvals["delta1"], pvals["delta2"])
    if fig["model"] == "model1":
        H = model1_hamiltonian(TunnelingDetuningModel.from_ratio(param))
        ref = model1_pure_state()
    else:
        H = model2_hamiltonian(TunnelingComplexElementModel.from_ratio(param))
        ref = model2_pure_state()
    cfg = EvolutionConfig(t_end=fig["tau_end"], dt=FIG_DT, record_stride=FIG_STRIDE)
    traj = evolve(H, ref.data + p.matrix, cfg)
    out = io.StringIO()
    out.write("tau,S_L,S_L_analytic,purity,purity_rate\n")
    t_sing = None
    if fig["model"] == "model2":
        t_sing = model2_singularity_time(TunnelingComplexElementModel.from_ratio(param), p)
    # compare only away from the pole, where both curves are well conditioned
    window = fig["tau_end"] if t_sing is None else min(fig["tau_end"], t_sing - SINGULARITY_MARGIN)
    max_dev = max_rel = 0.0
    for k, tau in enumerate(traj.times):
        s_an = _analytic_entropy(fig["model"], param, p, float(tau))
        if not math.isnan(s_an) and tau <= window:
            dev = abs(s_an - traj.linear_entropy[k])
            max_dev = max(max_dev, dev)
            max_rel = max(max_rel, dev / max(1.0, abs(s_an)))
        row = [tau, traj.linear_entropy[k], s_an, traj.purity[k], traj.purity_rate[k]]
        out.write(",".join(fmt(v) for v in row) + "\n")
    footer = _footer(traj, 1.0)
    if footer:
        out.write(footer)
    ref_p = PureReference.for_hamiltonian(ref, H)
    entry = {
        fig["parameter"]: param,
        "delta1": p.delta1,
        "delta2": p.delta2,
        "lambda_tls": tls_exponent(ref_p, H.Gamma, H.hbar),
        "termination": traj.termination.status.value,
        "termination_tau": traj.termination.time,
        "deviation_window_end": window,
        "max_abs_S_L_deviation": max_dev,
        "max_rel_S_L_deviation": max_rel,
    }
    if fig["model"] == "model2":
        entry["singularity_tau_analytic"] = t_sing
    return out.getvalue(), entry


def build_figure(fig_id: str, out_dir) -> dict:
    fig = FIGURES[fig_id]
    out_dir = Path(out_dir)
    panels = []
    for pi, param in enumerate(fig["values"]):
        label = "abcd"[pi]
        curves = []
        for ci, delta in enumerate(DELTAS):
            name = f"{fig_id}_{label}_{ci}.csv"
            text, entry = figure_curve(fig_id, param, delta)
            _write(out_dir / name, text)
            curves.append({"file": name, **entry})
        panels.append({"panel": label, fig["parameter"]: param, "curves": curves})
    manifest = {
        "figure": fig_id,
        "model": fig["model"],
        "tau_end": fig["tau_end"],
        "dt": FIG_DT,
        "record_stride": FIG_STRIDE,
        "columns": ["tau", "S_L", "S_L_analytic", "purity", "purity_rate"],
        "fixed": fig["fixed"],
        "swept": fig["swept"],
        "panels": panels,
    }
    _write(out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def cmd_figure(args) -> int:
    out = args.out or "."
    manifest = build_figure(args.figure, out)
    n = sum(len(p["curves"]) for p in manifest["panels"])
    _say(args, f"wrote {n} curves and manifest.json to {out}")
    return EXIT_OK


SWEEP_COLUMNS = ["parameter", "value", "lambda_tls", "classification", "S_L_end", "singularity_tau"]


def sweep_rows(doc: dict) -> list[list]:
    name, values = sweep_values(doc)
    rows = []
    for v in values:
        sc = build_scenario(doc, {name: v})
        report, lam = stability_of(sc)
        traj = run_scenario(sc)
        if traj.termination.completed:
            s_end, sing = traj.linear_entropy[-1], None
        else:
            s_end, sing = None, traj.termination.time * sc.omega
        rows.append([name, v, lam, report.classification.value, s_end, sing])
    return rows


def sweep_csv(rows: list[list]) -> str:
    out = io.StringIO()
    out.write(",".join(SWEEP_COLUMNS) + "\n")
    for name, v, lam, cls, s_end, sing in rows:
        out.write(",".join([name, fmt(v), fmt(lam), cls, fmt(s_end), fmt(sing)]) + "\n")
    return out.getvalue()


def cmd_sweep(args) -> int:
    doc = load_json(args.config)
    text = sweep_csv(sweep_rows(doc))
    target = args.out or doc.get("outputs", {}).get("trajectory_csv")
    if target:
        _write(target, text)
        _say(args, f"wrote sweep to {target}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="suppress informational output")
    common.add_argument("--out", help="output file (directory for 'figure')")
    parser = argparse.ArgumentParser(prog="nh-stab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, helptext in (
        ("evolve", cmd_evolve, "integrate a scenario and emit a trajectory CSV"),
        ("stability", cmd_stability, "characteristic matrix and stability report"),
        ("sweep", cmd_sweep, "stability and long-horizon entropy over a parameter grid"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("config")
        p.set_defaults(func=func)
    p = sub.add_parser("figure", parents=[common], help="regenerate figure data")
    p.add_argument("figure", choices=sorted(FIGURES))
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, NHStabError, ValueError) as exc:
        print(f"nh-stab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
