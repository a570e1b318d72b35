"""Command-line interface: runs, parameter sweeps, and self-checks.

All file and stdout output is byte-deterministic for a given backend and
argument set; wall-clock timings appear only behind ``--timings``.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import analytics, config, engine, kernels, oracle
from .engine import ObservableRecord
from .errors import ConfigError, NumericalFailure
from .params import ModelParams, params_field_names

RECORD_FIELDS = (
    "step",
    "time",
    "norm",
    "excitation",
    "p_e1",
    "p_e2",
    "bell_plus",
    "bell_minus",
    "trapped_n",
    "p_bic_inferred",
)

#: Largest lattice the dense oracle check will accept.
ORACLE_MAX_BINS = 2000


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _record_row(r: ObservableRecord) -> str:
    vals = [str(r.step)] + [_fmt(getattr(r, f)) for f in RECORD_FIELDS[1:]]
    return ",".join(vals)


def write_records_csv(path: Path, records: list[ObservableRecord]) -> None:
    lines = [",".join(RECORD_FIELDS)]
    lines.extend(_record_row(r) for r in records)
    path.write_text("\n".join(lines) + "\n")


def write_snapshot_csv(path: Path, bins: dict[int, tuple[float, float]]) -> None:
    lines = ["bin_index,n_R,n_L"]
    for m in sorted(bins):
        n_r, n_l = bins[m]
        lines.append(f"{m},{_fmt(n_r)},{_fmt(n_l)}")
    path.write_text("\n".join(lines) + "\n")


def _params_dict(p: ModelParams) -> dict[str, object]:
    return {name: getattr(p, name) for name in params_field_names()}


def _json_dump(path: Path, payload: dict[str, object]) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# argument plumbing


def _add_param_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="key = value config file")
    parser.add_argument("--dt", type=str, help="collision step duration (gamma dt)")
    parser.add_argument("--ell", type=str, help="delay in steps (tau = ell dt)")
    parser.add_argument("--phi", type=str, help="carrier phase, e.g. 'pi' or 3.14159")
    parser.add_argument(
        "--Gamma-band", dest="Gamma_band", type=str, help="input packet bandwidth"
    )
    parser.add_argument(
        "--delta-omega",
        dest="delta_omega",
        type=str,
        help="detuning before step 0, or 'ideal-switch'",
    )
    parser.add_argument("--mode", type=str, help="input mode")
    parser.add_argument("--n-bins", dest="n_bins", type=str, help="lattice size")
    parser.add_argument("--steps", type=str, help="number of collision steps")
    parser.add_argument(
        "--trunc-eps", dest="trunc_eps", type=str, help="truncation budget per bond"
    )
    parser.add_argument("--chi-max", dest="chi_max", type=str, help="hard bond cap")
    parser.add_argument(
        "--record-every", dest="record_every", type=str, help="recording stride"
    )
    parser.add_argument(
        "--relax-start", dest="relax_start", type=str, help="relaxation initial state"
    )


def _collect_values(args: argparse.Namespace) -> dict[str, object]:
    values: dict[str, object] = {}
    if getattr(args, "config", None):
        values.update(config.parse_config_file(args.config))
    for key in params_field_names():
        raw = getattr(args, key, None)
        if raw is not None:
            values[key] = config.coerce_value(key, raw)
    if getattr(args, "output_dir", None):
        values["output_dir"] = args.output_dir
    return values


def _float_list(text: str, label: str = "list") -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"invalid {label}: {text!r}") from exc


def _int_list(text: str, label: str = "list") -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"invalid {label}: {text!r}") from exc


def _out_dir(args: argparse.Namespace, values: dict[str, object]) -> Path:
    out = Path(str(values.get("output_dir", args.output_dir or "bicsim-out")))
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# run


def cmd_run(args: argparse.Namespace) -> int:
    values = _collect_values(args)
    p = config.build_params(values)
    out = _out_dir(args, values)

    snapshot_steps: tuple[int, ...] = ()
    if args.snapshot_steps:
        snapshot_steps = tuple(_int_list(args.snapshot_steps, "snapshot steps"))
    elif "snapshot_steps" in values:
        snapshot_steps = tuple(values["snapshot_steps"])  # type: ignore[arg-type]
    emit = bool(args.emit_snapshots or values.get("emit_snapshots", False))
    if emit and not snapshot_steps:
        snapshot_steps = (p.n_steps - 1,)

    result = engine.run_full(p, snapshot_steps=snapshot_steps if emit else ())
    records = result.records
    asym, t90_step, t90_time = engine.asymptote_and_t90(records)

    write_records_csv(out / "records.csv", records)
    for step, bins in sorted(result.snapshots.items()):
        write_snapshot_csv(out / f"snapshot_{step:05d}.csv", bins)

    summary: dict[str, object] = {
        "backend": kernels.BACKEND,
        "params": _params_dict(p),
        "n_records": len(records),
        "final": {f: getattr(records[-1], f) for f in RECORD_FIELDS},
        "asymptote_p_bic": asym,
        "t90_step": t90_step,
        "t90_time": t90_time,
        "max_bond": result.max_bond,
        "cumulative_discarded": result.final_state.cumulative_discarded,
    }
    if args.timings:
        summary["wall_time_s"] = result.wall_time
    _json_dump(out / "summary.json", summary)

    last = records[-1]
    print(f"backend {kernels.BACKEND}")
    print(f"steps {p.n_steps}  bins {p.n_bins}  max_bond {result.max_bond}")
    print(f"final bell_plus {_fmt(last.bell_plus)}  bell_minus {_fmt(last.bell_minus)}")
    print(f"final p_bic_inferred {_fmt(last.p_bic_inferred)}")
    if args.timings:
        print(f"wall_time_s {result.wall_time:.3f}")
    print(f"wrote {out / 'records.csv'}")
    return 0


# ---------------------------------------------------------------------------
# sweep-grid


def _grid_cell(spec: dict[str, float | bool]) -> tuple[float, float, float, float]:
    dt = float(spec["dt"])
    ell = int(spec["ell"])
    gamma_band = float(spec["Gamma_band"])
    tau = ell * dt
    mode = "scatter-antisym" if spec["wrong_parity"] else "scatter-sym"
    p = config.build_params(
        {
            "dt": dt,
            "ell": ell,
            "phi": math.pi,
            "Gamma_band": gamma_band,
            "mode": mode,
            "trunc_eps": float(spec["trunc_eps"]),
            "record_every": 10_000_000,
        }
    )
    sim = engine.run(p)[-1].p_bic_inferred
    ana = analytics.p_bic_analytic(gamma_band, p.gamma, tau)
    return gamma_band * tau, tau, sim, ana


def cmd_sweep_grid(args: argparse.Namespace) -> int:
    dt = float(args.dt)
    gamma_taus = _float_list(args.gamma_tau, "gamma-tau list")
    big_gamma_taus = _float_list(args.Gamma_tau, "Gamma-tau list")
    specs = []
    for big in big_gamma_taus:
        for gt in gamma_taus:
            ell = round(gt / dt)
            if ell < 1:
                raise ConfigError(f"gamma_tau={gt} too small for dt={dt}")
            tau = ell * dt
            specs.append(
                {
                    "dt": dt,
                    "ell": ell,
                    "Gamma_band": big / tau,
                    "trunc_eps": float(args.trunc_eps),
                    "wrong_parity": bool(args.wrong_parity),
                }
            )
    t0 = time.perf_counter()
    rows = _map_jobs(_grid_cell, specs, args.jobs)
    out = _out_dir(args, {})
    lines = ["Gamma_tau,gamma_tau,p_bic_sim,p_bic_analytic,abs_err"]
    worst = 0.0
    for big_tau, tau, sim, ana in rows:
        err = abs(sim - ana)
        worst = max(worst, err)
        lines.append(
            f"{_fmt(big_tau)},{_fmt(tau)},{_fmt(sim)},{_fmt(ana)},{_fmt(err)}"
        )
        print(
            f"Gamma_tau {_fmt(big_tau):>8}  gamma_tau {_fmt(tau):>4}  "
            f"sim {_fmt(sim):>9}  analytic {_fmt(ana):>9}  err {_fmt(err)}"
        )
    (out / "grid.csv").write_text("\n".join(lines) + "\n")
    print(f"max abs err {_fmt(worst)}")
    if args.timings:
        print(f"wall_time_s {time.perf_counter() - t0:.3f}")
    print(f"wrote {out / 'grid.csv'}")
    return 0


# ---------------------------------------------------------------------------
# sweep-detuning


def _detuning_cell(spec: dict[str, float | None]) -> float:
    p = config.build_params(
        {
            "dt": float(spec["dt"]),
            "ell": int(spec["ell"]),
            "phi": math.pi,
            "Gamma_band": float(spec["Gamma_band"]),
            "mode": "scatter-sym",
            "delta_omega": spec["delta_omega"],
            "record_every": 10_000_000,
        }
    )
    rec = engine.run(p)[-1]
    return rec.bell_plus if p.bell_sign() > 0 else rec.bell_minus


def cmd_sweep_detuning(args: argparse.Namespace) -> int:
    dt = float(args.dt)
    gt = float(args.gamma_tau)
    ell = round(gt / dt)
    if ell < 1:
        raise ConfigError(f"gamma_tau={gt} too small for dt={dt}")
    tau = ell * dt
    gamma_band = float(args.Gamma_tau) / tau
    deltas = _float_list(args.deltas, "detuning list")
    base = {"dt": dt, "ell": ell, "Gamma_band": gamma_band}
    specs = [dict(base, delta_omega=None)]
    specs.extend(dict(base, delta_omega=d) for d in deltas)
    t0 = time.perf_counter()
    rows = _map_jobs(_detuning_cell, specs, args.jobs)
    ideal, finite = rows[0], rows[1:]
    out = _out_dir(args, {})
    lines = ["delta_omega,p_bell_final", f"ideal-switch,{_fmt(ideal)}"]
    print(f"ideal-switch  p_bell {_fmt(ideal)}")
    best_delta, best = None, -1.0
    for d, val in zip(deltas, finite):
        lines.append(f"{_fmt(d)},{_fmt(val)}")
        marker = "  > ideal-switch" if val > ideal else ""
        print(f"delta_omega {_fmt(d):>6}  p_bell {_fmt(val)}{marker}")
        if val > best:
            best_delta, best = d, val
    (out / "detuning.csv").write_text("\n".join(lines) + "\n")
    print(f"best delta_omega {_fmt(best_delta)}  p_bell {_fmt(best)}")
    print(f"exceeds ideal-switch: {'yes' if best > ideal else 'no'}")
    if args.timings:
        print(f"wall_time_s {time.perf_counter() - t0:.3f}")
    print(f"wrote {out / 'detuning.csv'}")
    return 0


# ---------------------------------------------------------------------------
# t90


def _t90_cell(spec: dict[str, float]) -> tuple[float, float | None]:
    dt = float(spec["dt"])
    ell = int(spec["ell"])
    tau = ell * dt
    p = config.build_params(
        {
            "dt": dt,
            "ell": ell,
            "phi": math.pi,
            "Gamma_band": analytics.optimal_bandwidth(tau),
            "mode": "scatter-sym",
            "record_every": 5,
        }
    )
    records = engine.run(p)
    _, _, t90_time = engine.asymptote_and_t90(records)
    return tau, t90_time


def cmd_t90(args: argparse.Namespace) -> int:
    dt = float(args.dt)
    ells = _int_list(args.ells, "ell list")
    if len(ells) < 2:
        raise ConfigError("t90 needs at least two ell values to fit a line")
    specs = [{"dt": dt, "ell": ell} for ell in ells]
    t0 = time.perf_counter()
    rows = _map_jobs(_t90_cell, specs, args.jobs)
    if any(t is None for _, t in rows):
        raise NumericalFailure("t90 undefined for at least one delay")
    taus = np.array([tau for tau, _ in rows])
    t90s = np.array([t for _, t in rows])
    design = np.vstack([taus, np.ones_like(taus)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, t90s, rcond=None)
    pred = design @ np.array([slope, intercept])
    ss_res = float(np.sum((t90s - pred) ** 2))
    ss_tot = float(np.sum((t90s - t90s.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    out = _out_dir(args, {})
    lines = ["gamma_tau,t90"]
    for tau, t in rows:
        lines.append(f"{_fmt(tau)},{_fmt(t)}")
        print(f"gamma_tau {_fmt(tau):>4}  t90 {_fmt(t)}")
    (out / "t90.csv").write_text("\n".join(lines) + "\n")
    _json_dump(
        out / "t90_fit.json",
        {"slope": slope, "intercept": intercept, "r_squared": r_squared},
    )
    print(f"fit slope {_fmt(slope)}  intercept {_fmt(intercept)}  R2 {_fmt(r_squared)}")
    if args.timings:
        print(f"wall_time_s {time.perf_counter() - t0:.3f}")
    print(f"wrote {out / 't90.csv'}")
    return 0


# ---------------------------------------------------------------------------
# analytic


def cmd_analytic(args: argparse.Namespace) -> int:
    gt = float(args.gamma_tau)
    big = float(args.Gamma_tau)
    if gt <= 0 or big <= 0:
        raise ConfigError("gamma-tau and Gamma-tau must be positive")
    tau = gt  # gamma = 1 units
    gamma_band = big / tau
    weights = analytics.bic_weights(1.0, tau, math.pi)
    u_star = analytics.bandwidth_fixed_point()
    peak_bic, peak_bell = analytics.peak_probabilities(1.0, tau)
    relax_bic, relax_bell = analytics.relaxation_baselines(1.0, tau)
    payload = {
        "Gamma_tau": big,
        "gamma_tau": gt,
        "p_bic": analytics.p_bic_analytic(gamma_band, 1.0, tau),
        "p_bell": analytics.p_bell_analytic(gamma_band, 1.0, tau),
        "qubit_share": weights.qubit_share,
        "photon_share": weights.photon_share,
        "optimal_Gamma_tau": u_star,
        "peak_coefficient": analytics.peak_coefficient(),
        "peak_p_bic": peak_bic,
        "peak_p_bell": peak_bell,
        "relaxation_p_bic": relax_bic,
        "relaxation_p_bell": relax_bell,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# oracle-check


def cmd_oracle_check(args: argparse.Namespace) -> int:
    values = _collect_values(args)
    p = config.build_params(values)
    if p.n_bins > ORACLE_MAX_BINS:
        raise ConfigError(
            f"oracle-check limited to n_bins <= {ORACLE_MAX_BINS} (got {p.n_bins})"
        )
    result = engine.run_full(p)
    exact_records, exact = oracle.evolve_exact(p)
    fid = oracle.fidelity_against_mps(exact, result.final_state)
    worst_field, worst = "", 0.0
    for field in RECORD_FIELDS[2:]:
        for a, b in zip(result.records, exact_records):
            dev = abs(getattr(a, field) - getattr(b, field))
            if dev > worst:
                worst_field, worst = field, dev
    print(f"backend {kernels.BACKEND}")
    print(f"fidelity {fid:.12f}")
    print(f"max observable deviation {worst:.3e} ({worst_field})")
    tol = float(args.fid_tol)
    if 1.0 - fid > tol or worst > math.sqrt(tol):
        raise NumericalFailure(
            f"simulator disagrees with dense oracle (1-fid={1 - fid:.3e})"
        )
    print("agreement within tolerance")
    return 0


# ---------------------------------------------------------------------------
# shared helpers / entry point


def _map_jobs(fn, specs, jobs: int):
    if jobs <= 1 or len(specs) <= 1:
        return [fn(s) for s in specs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, specs))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bicsim",
        description="Collision-model simulator for two-qubit waveguide bound states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one simulation and write records")
    _add_param_args(run_p)
    run_p.add_argument("--output-dir", dest="output_dir")
    run_p.add_argument("--emit-snapshots", action="store_true")
    run_p.add_argument("--snapshot-steps", dest="snapshot_steps")
    run_p.add_argument("--timings", action="store_true")
    run_p.set_defaults(func=cmd_run)

    grid_p = sub.add_parser(
        "sweep-grid", help="scan bandwidth x delay against the closed form"
    )
    grid_p.add_argument("--Gamma-tau", dest="Gamma_tau", default="1.5,2.5,3.5")
    grid_p.add_argument("--gamma-tau", dest="gamma_tau", default="1,2,4")
    grid_p.add_argument("--dt", default="0.04")
    grid_p.add_argument("--trunc-eps", dest="trunc_eps", default="1e-4")
    grid_p.add_argument("--wrong-parity", action="store_true")
    grid_p.add_argument("--jobs", type=int, default=1)
    grid_p.add_argument("--output-dir", dest="output_dir")
    grid_p.add_argument("--timings", action="store_true")
    grid_p.set_defaults(func=cmd_sweep_grid)

    det_p = sub.add_parser(
        "sweep-detuning", help="scan quenched detuning against the ideal switch"
    )
    det_p.add_argument("--deltas", default="0.5,1,2,4,8,16")
    det_p.add_argument("--gamma-tau", dest="gamma_tau", default="1.0")
    det_p.add_argument("--Gamma-tau", dest="Gamma_tau", default="2.513")
    det_p.add_argument("--dt", default="0.04")
    det_p.add_argument("--jobs", type=int, default=1)
    det_p.add_argument("--output-dir", dest="output_dir")
    det_p.add_argument("--timings", action="store_true")
    det_p.set_defaults(func=cmd_sweep_detuning)

    t90_p = sub.add_parser("t90", help="formation time versus delay, linear fit")
    t90_p.add_argument("--ells", default="25,50,100,200")
    t90_p.add_argument("--dt", default="0.04")
    t90_p.add_argument("--jobs", type=int, default=1)
    t90_p.add_argument("--output-dir", dest="output_dir")
    t90_p.add_argument("--timings", action="store_true")
    t90_p.set_defaults(func=cmd_t90)

    ana_p = sub.add_parser("analytic", help="print closed-form targets as JSON")
    ana_p.add_argument("--Gamma-tau", dest="Gamma_tau", required=True)
    ana_p.add_argument("--gamma-tau", dest="gamma_tau", required=True)
    ana_p.set_defaults(func=cmd_analytic)

    chk_p = sub.add_parser(
        "oracle-check", help="compare the simulator against the dense oracle"
    )
    _add_param_args(chk_p)
    chk_p.add_argument("--output-dir", dest="output_dir")
    chk_p.add_argument("--fid-tol", dest="fid_tol", default="1e-9")
    chk_p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
