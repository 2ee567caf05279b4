"""Command-line interface: waveform design, metric queries, simulations,
trade-off sweeps, and experiment reproduction.

All dB-to-linear conversion happens here; the library modules below work in
linear units only. Report paths write figures (PNG) next to the CSV output.

Exit codes: 0 success, 2 configuration error, 3 infeasible security levels,
4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import report
from .acf import (
    PROFILE_CSV_HEADER,
    expected_sq_acf,
    metrics_from_allocation,
    monte_carlo_sq_acf,
    profile_to_rows,
)
from .constellation import draw_symbols, make_constellation
from .designer import DesignRequest, solve_p2, tradeoff_sweep
from .errors import (
    ConfigError,
    InfeasibleAcfError,
    InfeasibleSecurityError,
    SecsenseError,
    SolverError,
    UnknownConstellationError,
)
from .harness import EXPERIMENT_IDS, ExperimentConfig, run_experiment, write_csv
from .receivers import (
    PROFILE_ROWS_HEADER,
    alice_mf,
    alice_rf,
    eve_processing,
    integrate_profiles,
    profile_rows_csv,
    rd_map,
    snr_loss_closed_form,
)
from .scene import (
    SPEED_OF_LIGHT,
    OfdmGrid,
    RicianRef,
    comm_rate,
    flat_channel,
    rayleigh_channel,
    scene_from_json_dict,
    sensing_snapshot,
)
from .util import db, derive_seed, undb
from .waveform import (
    PowerAllocation,
    SecureAcfSpec,
    equal_allocation,
    structured_allocation,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": {"type": kind, "message": message}}), file=sys.stderr)
    return code


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}")


def _apply_overrides(doc: dict, overrides: list[str]) -> dict:
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set path {key!r} crosses a non-object value")
        node[parts[-1]] = value
    return doc


def _check_keys(doc: dict, allowed: set, where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _parse_grid(doc: dict) -> OfdmGrid:
    _check_keys(doc, {"n", "n_cp", "bandwidth_hz", "m_sym"}, "grid")
    return OfdmGrid(
        n=int(doc.get("n", 256)),
        n_cp=int(doc.get("n_cp", 64)),
        bandwidth_hz=float(doc.get("bandwidth_hz", 50e6)),
        m_sym=int(doc.get("m_sym", 32)),
    )


def _parse_channel(doc: dict, grid: OfdmGrid):
    _check_keys(doc, {"type", "avg_snr_db", "seed"}, "channel")
    kind = doc.get("type", "flat")
    snr = undb(float(doc.get("avg_snr_db", 10.0)))
    if kind == "flat":
        return flat_channel(grid.n, snr)
    if kind == "rayleigh":
        return rayleigh_channel(grid.n, snr, seed=int(doc.get("seed", 0)))
    raise ConfigError(f"channel type must be flat|rayleigh, got {kind!r}")


def _parse_waveform(doc: dict, grid: OfdmGrid, const, channel=None):
    _check_keys(
        doc,
        {"type", "alpha_frac", "num_peaks", "n0", "rho", "eps_psl_db", "eps_isl_db", "path"},
        "waveform",
    )
    kind = doc.get("type", "equal")
    if kind == "equal":
        return "equal", equal_allocation(grid.n)
    if kind == "structured":
        spec = SecureAcfSpec(
            alpha_frac=float(doc["alpha_frac"]), num_peaks=int(doc["num_peaks"])
        )
        alloc = structured_allocation(spec, grid.n, n0=int(doc.get("n0", 1)))
        return f"structured_a{spec.alpha_frac:g}_L{spec.num_peaks}", alloc
    if kind == "design":
        req = DesignRequest(
            rho=float(doc.get("rho", 0.0)),
            eps_psl=float(undb(doc["eps_psl_db"])),
            eps_isl=float(undb(doc["eps_isl_db"])),
            channel=channel if channel is not None else flat_channel(grid.n, undb(10.0)),
            constellation=const,
            grid=grid,
            n0=doc.get("n0", 1),
        )
        res = solve_p2(req)
        return f"design_kappa{res.kappa}", res.alloc
    if kind == "file":
        return Path(doc["path"]).stem, PowerAllocation.from_json(Path(doc["path"]).read_text())
    raise ConfigError(f"waveform type must be equal|structured|design|file, got {kind!r}")


def _metrics_payload(alloc: PowerAllocation, const, channel, grid) -> dict:
    m = metrics_from_allocation(alloc, const) if alloc.structure else None
    loss = snr_loss_closed_form(alloc, const)
    payload = {
        "psl_linear": m.psl_linear if m else None,
        "isl_linear": m.isl_linear if m else None,
        "psl_db": _db_or_none(m.psl_linear) if m else None,
        "isl_db": _db_or_none(m.isl_linear) if m else None,
        "snr_loss_linear": loss,
        "snr_loss_db": db(loss),
        "rate_bps": comm_rate(channel, alloc, grid) if channel is not None else None,
    }
    if alloc.structure is not None:
        s = alloc.structure
        nominal = np.full(alloc.n, s.q)
        nominal[s.n0 - 1 :: s.kappa] = s.p
        if np.max(np.abs(alloc.power - nominal)) > 1e-9:
            payload["note"] = (
                "allocation varies per subcarrier; PSL/ISL are the exact "
                "symbol-expectation for this realization"
            )
    return payload


def _db_or_none(linear: float):
    return None if linear <= 0 else db(linear)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_design(args) -> int:
    doc = _apply_overrides(_load_config(args.config), args.set)
    _check_keys(
        doc,
        {"schema_version", "rho", "eps_psl_db", "eps_isl_db", "grid", "constellation", "channel", "n0"},
        "design config",
    )
    grid = _parse_grid(doc.get("grid", {}))
    const = make_constellation(doc.get("constellation", "16QAM"))
    channel = _parse_channel(doc.get("channel", {}), grid)
    req = DesignRequest(
        rho=float(doc.get("rho", 0.5)),
        eps_psl=float(undb(doc["eps_psl_db"])),
        eps_isl=float(undb(doc["eps_isl_db"])),
        channel=channel,
        constellation=const,
        grid=grid,
        n0=doc.get("n0", 1),
    )
    res = solve_p2(req)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    design_doc = res.alloc.to_json_dict()
    design_doc["kappa"] = res.kappa
    design_doc["n0"] = res.n0
    design_doc["objective_value"] = res.objective_value
    design_doc["predicted"] = {
        "rate_bps": res.predicted["rate_bps"],
        "snr_loss_db": db(res.predicted["snr_loss"]),
        "psl_db": _db_or_none(res.predicted["psl"]),
        "isl_db": _db_or_none(res.predicted["isl"]),
    }
    (out / "design.json").write_text(json.dumps(design_doc, indent=2))
    write_csv(
        out / "predicted_metrics.csv",
        ["kappa", "n0", "rate_bps", "snr_loss_db", "psl_db", "isl_db", "objective"],
        [[
            res.kappa,
            res.n0,
            res.predicted["rate_bps"],
            db(res.predicted["snr_loss"]),
            db(res.predicted["psl"]),
            db(res.predicted["isl"]),
            res.objective_value,
        ]],
    )
    if not args.no_figures:
        profile = expected_sq_acf(res.alloc, const)
        report.render_allocation(res.alloc.power, profile.squared, out / "design.png")
    print(json.dumps({"out": str(out), "kappa": res.kappa, "objective": res.objective_value}))
    return EXIT_OK


def cmd_metrics(args) -> int:
    alloc = PowerAllocation.from_json(Path(args.alloc).read_text())
    const = make_constellation(args.constellation)
    grid = OfdmGrid(n=alloc.n, n_cp=alloc.n // 4, bandwidth_hz=args.bandwidth_hz, m_sym=1)
    channel = flat_channel(alloc.n, undb(args.channel_snr_db))
    payload = _metrics_payload(alloc, const, channel, grid)
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_acf(args) -> int:
    alloc = PowerAllocation.from_json(Path(args.alloc).read_text())
    const = make_constellation(args.constellation)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bin_m = SPEED_OF_LIGHT / (2.0 * args.bandwidth_hz) if args.bandwidth_hz else float("nan")
    expected = expected_sq_acf(alloc, const)
    write_csv(out / "expected.csv", PROFILE_CSV_HEADER, profile_to_rows(expected, bin_m))
    trials = args.trials if args.trials is not None else 1000
    mc = monte_carlo_sq_acf(alloc, const, trials=trials, seed=args.seed)
    write_csv(out / "monte_carlo.csv", PROFILE_CSV_HEADER, profile_to_rows(mc, bin_m))
    if not args.no_figures:
        report.render_allocation(alloc.power, expected.squared, out / "acf.png")
    print(json.dumps({"out": str(out), "tables": ["expected.csv", "monte_carlo.csv"]}))
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc = _apply_overrides(_load_config(args.config), args.set)
    _check_keys(
        doc,
        {
            "schema_version",
            "grid",
            "constellation",
            "waveform",
            "targets",
            "clutter",
            "noise_var",
            "receivers",
            "ref_sinr_db",
            "seed",
        },
        "simulate config",
    )
    grid = _parse_grid(doc.get("grid", {}))
    const = make_constellation(doc.get("constellation", "16QAM"))
    noise_var = float(doc.get("noise_var", 1.0))
    wid, alloc = _parse_waveform(doc.get("waveform", {}), grid, const)
    scene = scene_from_json_dict(
        {"grid": doc.get("grid", {}), "targets": doc.get("targets", []), "clutter": doc.get("clutter", [])},
        noise_var=noise_var,
    )
    seed = int(doc.get("seed", args.seed))
    receivers = doc.get("receivers", ["alice_mf", "alice_rf"])
    ref = RicianRef.from_sinr(undb(float(doc.get("ref_sinr_db", 0.0))))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    block = draw_symbols(const, grid.m_sym, grid.n, seed=derive_seed(seed, 0))
    snap = sensing_snapshot(scene, alloc, block, noise_var, seed=derive_seed(seed, 1))
    tables = []
    for receiver in receivers:
        if receiver == "alice_mf":
            rows = alice_mf(snap, alloc, block)
        elif receiver == "alice_rf":
            rows = alice_rf(snap, alloc, block)
        elif receiver in ("eve_mf", "eve_rf"):
            rows = eve_processing(
                scene, alloc, block, ref, noise_var,
                seed=derive_seed(seed, 2), filter_kind=receiver.split("_")[1].upper(),
            )
        else:
            raise ConfigError(f"unknown receiver {receiver!r}")
        prof = integrate_profiles(rows, grid, receiver=receiver.split("_")[1].upper(), who=receiver.split("_")[0])
        rdm = rd_map(rows, grid)
        prof_path = out / f"profile_{receiver}.csv"
        write_csv(prof_path, PROFILE_ROWS_HEADER, profile_rows_csv(prof))
        write_csv(out / f"rd_{receiver}.csv", PROFILE_ROWS_HEADER, profile_rows_csv(rdm))
        tables += [f"profile_{receiver}.csv", f"rd_{receiver}.csv"]
        if not args.no_figures:
            report.render_profiles_csv(prof_path, out / f"profile_{receiver}.png", title=f"{receiver} ({wid})")
    print(json.dumps({"out": str(out), "waveform": wid, "tables": tables}))
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = _apply_overrides(_load_config(args.config) if args.config else {}, args.set)
    _check_keys(
        doc,
        {"schema_version", "grid", "constellation", "channel", "kappas", "q_points"},
        "sweep config",
    )
    grid = _parse_grid(doc.get("grid", {}))
    const = make_constellation(doc.get("constellation", "16QAM"))
    channel = _parse_channel(doc.get("channel", {}), grid)
    kappas = [int(k) for k in doc.get("kappas", [2, 4, 8, 16, 32])]
    q_grid = np.linspace(0.02, 0.98, int(doc.get("q_points", 24)))
    rows = tradeoff_sweep(kappas, q_grid, const, channel, grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(
        out / "tradeoff.csv",
        ["kappa", "p", "q", "psl_db", "isl_db", "snr_loss_db", "rate_bps"],
        [
            [r["kappa"], r["p"], r["q"], db(r["psl"]), db(r["isl"]), db(r["snr_loss"]), r["rate_bps"]]
            for r in rows
        ],
    )
    if not args.no_figures:
        report.render_fig6(out)
    print(json.dumps({"out": str(out), "rows": len(rows)}))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.experiment not in EXPERIMENT_IDS:
        raise ConfigError(
            f"unknown experiment {args.experiment!r}; known: {', '.join(EXPERIMENT_IDS)}"
        )
    params = _apply_overrides({}, args.set)
    cfg = ExperimentConfig(
        experiment=args.experiment,
        seed=args.seed,
        trials=args.trials if args.trials is not None else 1000,
        threads=args.threads,
        params=params,
    )
    result = run_experiment(cfg, out_root=Path(args.out))
    figures = []
    if not args.no_figures:
        figures = [str(p) for p in report.render_experiment(args.experiment, result.out_dir)]
    print(
        json.dumps(
            {
                "out": str(result.out_dir),
                "tables": result.manifest["files"],
                "figures": figures,
                "config_hash": result.manifest["config_hash"],
                "content_hash": result.manifest.get("content_hash"),
            }
        )
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secsense",
        description="Sensing-secure OFDM ISAC waveform design and simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=False):
        if needs_config:
            p.add_argument("--config", required=needs_config == "required", help="JSON config path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=12345)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="config override")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p = sub.add_parser("design", help="solve the secure signaling design problem")
    common(p, needs_config="required")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("metrics", help="security/sensing metrics of an allocation")
    p.add_argument("--alloc", required=True, help="allocation JSON path")
    p.add_argument("--constellation", default="16QAM")
    p.add_argument("--channel-snr-db", type=float, default=10.0)
    p.add_argument("--bandwidth-hz", type=float, default=50e6)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("acf", help="expected and Monte-Carlo ACF of an allocation")
    p.add_argument("--alloc", required=True)
    p.add_argument("--constellation", default="16QAM")
    p.add_argument("--bandwidth-hz", type=float, default=50e6)
    common(p)
    p.set_defaults(func=cmd_acf)

    p = sub.add_parser("simulate", help="run a scene through the receiver chains")
    common(p, needs_config="required")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="trade-off sweep over comb parameters")
    common(p, needs_config=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce", help="rerun a packaged experiment")
    p.add_argument("experiment", help=f"one of: {', '.join(EXPERIMENT_IDS)}")
    common(p)
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", None) is not None and args.trials < 1:
        return _fail("ConfigError", "--trials must be >= 1", EXIT_CONFIG)
    try:
        return args.func(args)
    except (ConfigError, UnknownConstellationError, KeyError) as e:
        msg = f"missing config key: {e}" if isinstance(e, KeyError) else str(e)
        return _fail(type(e).__name__, msg, EXIT_CONFIG)
    except (InfeasibleSecurityError, InfeasibleAcfError) as e:
        return _fail(type(e).__name__, str(e), EXIT_INFEASIBLE)
    except SolverError as e:
        return _fail(type(e).__name__, str(e), EXIT_SOLVER)
    except SecsenseError as e:
        return _fail(type(e).__name__, str(e), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
