"""Command-line front end.

Subcommands: simulate, states, synth, loss-contour, validate-clocks.
Exit codes: 0 success, 1 validation failure, 2 input error, 3 internal
fault.  All outputs are plain JSON / CSV / Touchstone text and are
byte-identical across repeated runs with identical inputs.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .core import NS, ConfigError, NetworkSpec, reduce_network, spec_from_dict
from .clocks import default_schedule, schedule_from_dict, schedule_to_dict, validate_schedule
from .engine import Excitation, SimConfig, compile_network, write_traces_csv
from .extraction import (
    coherent_grid,
    group_delay,
    infer_circulation,
    metrics,
    sweep,
    write_csv,
    write_touchstone,
)
from .lossmodel import loss_contour, write_contour_csv
from .states import is_admissible, reduced_circulation, state_from_dict, synth_schedule
from .states import brute_force_count, count_states, enumerate_states

_SIM_KEYS = {
    "samples_per_delay", "settle_hyperperiods", "measure_hyperperiods", "source_amplitude_v",
}


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc


def load_config(path) -> tuple[NetworkSpec, SimConfig, int | None]:
    """Parse the CLI configuration document: network keys plus optional
    sim settings and an optional reduce_port."""
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    doc = dict(doc)
    reduce_port = doc.pop("reduce_port", None)
    sim_doc = {k: doc.pop(k) for k in list(doc) if k in _SIM_KEYS}
    spec = spec_from_dict(doc)
    try:
        cfg = SimConfig(
            samples_per_delay=int(sim_doc.get("samples_per_delay", 128)),
            settle_hyperperiods=int(sim_doc.get("settle_hyperperiods", 8)),
            measure_hyperperiods=int(sim_doc.get("measure_hyperperiods", 4)),
            source_amplitude=float(sim_doc.get("source_amplitude_v", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed sim settings: {exc}") from exc
    bad = cfg.violations()
    if bad:
        raise ConfigError(f"{path}: " + "; ".join(bad))
    if reduce_port is not None:
        spec = reduce_network(spec, int(reduce_port))
    return spec, cfg, reduce_port


def _metrics_doc(grid, circulation) -> dict:
    doc = {
        "generated_by": f"sdlsim {__version__}",
        "ports": list(grid.ports),
        "frequencies_hz": [float(f) for f in grid.frequencies],
        "circulation": {str(k): v for k, v in circulation.items()} if circulation else None,
        "return_loss_db": {},
        "il_db": {},
        "isolation_db": {},
        "group_delay_ns": {},
    }
    m = metrics(grid, circulation or {})
    for p, vals in m.return_loss_db.items():
        doc["return_loss_db"][str(p)] = [float(v) for v in vals]
    for (q, p), vals in m.il_db.items():
        doc["il_db"][f"{q}->{p}"] = [float(v) for v in vals]
    for (q, p), vals in m.isolation_db.items():
        doc["isolation_db"][f"{q}->{p}"] = [float(v) for v in vals]
    if circulation and grid.frequencies.size >= 2:
        for q, p in sorted(circulation.items()):
            gd = group_delay(grid, q, p)
            doc["group_delay_ns"][f"{q}->{p}"] = [float(v / NS) for v in gd]
    return doc


def cmd_simulate(args) -> int:
    spec, cfg, reduce_port = load_config(args.config)
    if args.schedule:
        schedule = schedule_from_dict(_load_json(args.schedule))
    else:
        schedule = default_schedule(spec)
    report = validate_schedule(schedule, spec)
    if not report.ok:
        raise ConfigError("schedule failed validation: " + "; ".join(report.failures))

    dt = spec.delay / cfg.samples_per_delay
    freqs = coherent_grid(
        schedule.hyperperiod, cfg.measure_hyperperiods,
        args.fmin, args.fmax, args.points, dt=dt,
    )
    grid = sweep(spec, schedule, cfg, freqs, jobs=args.jobs)

    if args.schedule is None and reduce_port is not None:
        circulation = reduced_circulation(spec)
    else:
        circulation = infer_circulation(schedule, spec)

    prefix = args.out
    touchstone = f"{prefix}.s{grid.n_ports}p"
    write_touchstone(grid, touchstone)
    write_csv(grid, f"{prefix}.csv")
    with open(f"{prefix}.metrics.json", "w", encoding="utf-8") as fh:
        json.dump(_metrics_doc(grid, circulation), fh, indent=2, sort_keys=True)
        fh.write("\n")

    if args.dump_traces:
        model = compile_network(spec, schedule, cfg)
        for q in grid.ports:
            res = model.run(Excitation(port=q, frequency=freqs[0], amplitude=cfg.source_amplitude))
            write_traces_csv(res, f"{prefix}.traces.p{q}.csv")

    print(f"wrote {touchstone}, {prefix}.csv, {prefix}.metrics.json "
          f"({grid.n_ports} ports, {len(freqs)} frequencies)")
    return 0


def cmd_states(args) -> int:
    if args.action == "count":
        omega = count_states(args.n)
        print(omega)
        if args.n <= 5:
            check = brute_force_count(args.n)
            print(f"brute_force={check} match={'yes' if check == omega else 'NO'}")
            if check != omega:
                return 1
        return 0
    count = 0
    for state in enumerate_states(args.n, limit=args.limit):
        print(json.dumps(state.to_dict(), sort_keys=True))
        count += 1
    print(f"# {count} states", file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    spec, _, reduce_port = load_config(args.config)
    if reduce_port is not None:
        raise ConfigError("state synthesis requires the full network; remove reduce_port")
    state = state_from_dict(_load_json(args.state))
    ok, violations = is_admissible(state, spec)
    if not ok:
        raise ConfigError("inadmissible circulation state: " + "; ".join(violations))
    schedule = synth_schedule(state, spec)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(schedule_to_dict(schedule), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out} (hyperperiod {schedule.hyperperiod_ns} ns, "
          f"{len(schedule.switches)} switches)")
    return 0


def cmd_loss_contour(args) -> int:
    ts = np.linspace(args.ts_start * NS, args.ts_stop * NS, args.ts_points)
    ds = np.linspace(args.delta_start * NS, args.delta_stop * NS, args.delta_points)
    grid = loss_contour(ts, ds, r_on=args.r_on, r_off=args.r_off, z0=args.z0)
    write_contour_csv(ts, ds, grid, args.out)
    print(f"wrote {args.out} ({args.ts_points} x {args.delta_points} grid)")
    return 0


def cmd_validate_clocks(args) -> int:
    spec, _, _ = load_config(args.config)
    schedule = schedule_from_dict(_load_json(args.schedule))
    report = validate_schedule(schedule, spec)
    for p, ok in sorted(report.one_hot_per_port.items()):
        print(f"one-hot port {p}: {'ok' if ok else 'FAIL'}")
    for (side, n), ok in sorted(report.no_line_contention_per_side.items()):
        print(f"no contention line {n} ({side}): {'ok' if ok else 'FAIL'}")
    for (p, n), duty in sorted(report.duty_cycles.items()):
        print(f"duty ({p},{n}): {duty:.6f}")
    pairs = sorted(report.offset_pair_set())
    print(f"delta-offset pairs: {pairs}")
    for msg in report.failures:
        print(f"FAIL: {msg}")
    print("result: " + ("PASS" if report.ok else "FAIL"))
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdlsim",
        description="Simulate and program switched-delay-line nonreciprocal networks.",
    )
    parser.add_argument("--version", action="version", version=f"sdlsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sweep S-parameters and write Touchstone/CSV/metrics")
    p.add_argument("--config", required=True, help="network + sim configuration JSON")
    p.add_argument("--schedule", default=None, help="schedule JSON (default: canonical clocks)")
    p.add_argument("--out", required=True, help="output file prefix")
    p.add_argument("--points", type=int, default=64, help="max sweep points (default 64)")
    p.add_argument("--fmin", type=float, default=10e6, help="sweep start, Hz (default 10 MHz)")
    p.add_argument("--fmax", type=float, default=900e6, help="sweep stop, Hz (default 900 MHz)")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    p.add_argument("--dump-traces", action="store_true",
                   help="also dump per-port transient traces at the lowest frequency")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("states", help="count or enumerate programmable circulation states")
    p.add_argument("action", choices=["count", "enumerate"])
    p.add_argument("n", type=int, help="number of delay lines N (network has 2N ports)")
    p.add_argument("--limit", type=int, default=None, help="stop enumeration after this many")
    p.set_defaults(func=cmd_states)

    p = sub.add_parser("synth", help="synthesize a clock schedule for a circulation state")
    p.add_argument("--state", required=True, help="state JSON mapping, e.g. {\"1\": 2, ...}")
    p.add_argument("--config", required=True, help="network configuration JSON")
    p.add_argument("--out", required=True, help="output schedule JSON path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("loss-contour", help="switching-loss grid over (t_s, delta)")
    p.add_argument("--ts-start", type=float, default=0.0, help="t_s start, ns (default 0)")
    p.add_argument("--ts-stop", type=float, default=5.0, help="t_s stop, ns (default 5)")
    p.add_argument("--ts-points", type=int, default=6, help="t_s point count (default 6)")
    p.add_argument("--delta-start", type=float, default=10.0, help="delta start, ns (default 10)")
    p.add_argument("--delta-stop", type=float, default=50.0, help="delta stop, ns (default 50)")
    p.add_argument("--delta-points", type=int, default=9, help="delta point count (default 9)")
    p.add_argument("--r-on", type=float, default=6.0, help="on resistance, ohm (default 6)")
    p.add_argument("--r-off", type=float, default=120e3, help="off resistance, ohm (default 120k)")
    p.add_argument("--z0", type=float, default=50.0, help="reference impedance, ohm (default 50)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_loss_contour)

    p = sub.add_parser("validate-clocks", help="check a schedule against a network config")
    p.add_argument("--schedule", required=True)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate_clocks)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"internal fault: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
