"""Command-line driver: run one simulation, sweep a parameter, or verify
received payloads against an expectations file.

Exit codes are a stable contract: 0 success, 1 configuration error,
2 deadlock suspected, 3 verification mismatch.
"""

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import config
from .drivers import build_workload
from .engine import DEADLOCK_SUSPECTED, StopCondition, build_simulation
from .errors import RadSimError
from .telemetry import aggregate_performance, export_csv
from .workload import parse_workload

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DEADLOCK = 2
EXIT_VERIFY = 3


def _load_inputs(args):
    with open(args.arch) as fh:
        arch = config.parse_architecture(fh.read())
    for override in args.set or []:
        if "=" not in override:
            raise config.MalformedValue(f"--set expects key=value, got {override!r}")
        key, _, value = override.partition("=")
        arch = config.apply_override(arch, key.strip(), value.strip())
    with open(args.place) as fh:
        placement = config.parse_placement(fh.read(), arch)
    with open(args.workload) as fh:
        spec = parse_workload(fh.read())
    return arch, placement, spec


def _simulate(arch, placement, spec, seed, stop):
    workload = build_workload(spec)
    sim = build_simulation(arch, placement, workload, seed=seed)
    result = sim.run_until(stop)
    return sim, workload, result


def _write_summary(out_dir, result, perf, spec):
    lines = [
        f"termination: {result.termination}",
        f"total_time_ps: {result.total_time}",
        f"transactions_sent: {result.sent}",
        f"transactions_received: {result.received}",
        f"workload_kind: {spec.kind}",
    ]
    for freq in sorted(result.cycles_per_domain):
        lines.append(f"cycles_at_{freq}MHz: {result.cycles_per_domain[freq]}")
    if perf is not None:
        lines.append(f"runtime_ps: {perf['runtime_ps']}")
        lines.append(f"total_ops: {perf['total_ops']}")
        lines.append(f"tops: {perf['tops']:.6f}")
    path = os.path.join(out_dir, "summary.txt")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _write_digests(out_dir, digests):
    path = os.path.join(out_dir, "digests.txt")
    with open(path, "w") as fh:
        for tx_id in sorted(digests):
            fh.write(f"{tx_id} {digests[tx_id]}\n")
    return path


def run_point(arch, placement, spec, seed, stop, out_dir):
    """One simulation plus its report files; shared by run and sweep."""
    workload = build_workload(spec)
    sim = build_simulation(arch, placement, workload, seed=seed)
    result = sim.run_until(stop)
    os.makedirs(out_dir, exist_ok=True)
    export_csv(result.telemetry, result.noc_states, out_dir)
    perf = None
    total_ops = workload.total_ops()
    if result.telemetry.first_initiation is not None:
        perf = aggregate_performance(result.telemetry, total_ops)
    _write_summary(out_dir, result, perf, spec)
    _write_digests(out_dir, result.digests)
    return result, perf


def cmd_run(args):
    try:
        arch, placement, spec = _load_inputs(args)
        stop = StopCondition.parse(args.stop)
        result, _perf = run_point(arch, placement, spec, args.seed, stop,
                                  args.out)
    except (RadSimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if result.termination == DEADLOCK_SUSPECTED:
        print("deadlock suspected: no progress within the quiescence window",
              file=sys.stderr)
        return EXIT_DEADLOCK
    return EXIT_OK


def _sweep_point(payload):
    """Executed in a worker process; returns a row for sweep.csv."""
    arch_text, place_text, wkld_text, key, value, seed, stop_text, out_dir = payload
    try:
        arch = config.parse_architecture(arch_text)
        arch = config.apply_override(arch, key, value)
        placement = config.parse_placement(place_text, arch)
        spec = parse_workload(wkld_text)
        stop = StopCondition.parse(stop_text)
        result, perf = run_point(arch, placement, spec, seed, stop, out_dir)
    except (RadSimError, OSError, ValueError) as exc:
        return {"value": value, "status": "error", "error": str(exc)}
    row = {"value": value, "status": result.termination,
           "runtime_ps": "", "tops": ""}
    if perf is not None:
        row["runtime_ps"] = perf["runtime_ps"]
        row["tops"] = f"{perf['tops']:.6f}"
    return row


def cmd_sweep(args):
    values = [v for v in (args.sweep_values or "").split(",") if v.strip()]
    if not args.sweep_key or not values:
        print("error: sweep needs --sweep-key and a non-empty --sweep-values",
              file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(args.arch) as fh:
            arch_text = fh.read()
        with open(args.place) as fh:
            place_text = fh.read()
        with open(args.workload) as fh:
            wkld_text = fh.read()
        # fail fast on an unsweepable key before spawning workers
        config.apply_override(config.parse_architecture(arch_text),
                              args.sweep_key, values[0])
    except (RadSimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(args.out, exist_ok=True)
    payloads = [
        (arch_text, place_text, wkld_text, args.sweep_key, value, args.seed,
         args.stop, os.path.join(args.out, f"{args.sweep_key}_{value}"))
        for value in values
    ]
    workers = int(os.environ.get("RADSIM_THREADS", "0")) or min(4, os.cpu_count())
    workers = min(workers, len(payloads))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]

    rows.sort(key=lambda r: values.index(r["value"]))
    path = os.path.join(args.out, "sweep.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["value", "status", "runtime_ps", "tops"])
        for row in rows:
            writer.writerow([row["value"], row["status"],
                             row.get("runtime_ps", ""), row.get("tops", "")])
    failures = [r for r in rows if r["status"] == "error"]
    for r in failures:
        print(f"sweep point {r['value']} failed: {r['error']}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args):
    try:
        arch, placement, spec = _load_inputs(args)
        stop = StopCondition.parse(args.stop)
        sim, workload, result = _simulate(arch, placement, spec, args.seed, stop)
        expected = {}
        with open(args.expected) as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise config.MalformedValue(
                        f"expected 'tx_id digest'", line_no, line)
                expected[int(parts[0])] = parts[1]
    except (RadSimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    unknown = sorted(set(expected) - set(result.digests))
    if unknown:
        print(f"error: expectations reference unknown transaction ids: "
              f"{unknown[:10]}", file=sys.stderr)
        return EXIT_CONFIG
    mismatched = sorted(tx for tx, digest in expected.items()
                        if result.digests[tx] != digest)
    if mismatched:
        print("verification failed for transaction ids: "
              + ", ".join(str(t) for t in mismatched), file=sys.stderr)
        return EXIT_VERIFY
    print(f"verified {len(expected)} transactions")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="radsim",
        description="cycle-level simulator for reconfigurable acceleration "
                    "devices (FPGA fabric + hard blocks over a NoC)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, expected=False):
        p.add_argument("--arch", required=True, help="architecture file (.radarch)")
        p.add_argument("--place", required=True, help="placement file (.place)")
        p.add_argument("--workload", required=True, help="workload file (.wkld)")
        p.add_argument("--out", default="radsim_out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override an architecture key after parsing")
        p.add_argument("--stop", default="all",
                       help="'all', 'time:<ps>', or 'cycles:<mhz>:<n>'")
        if expected:
            p.add_argument("--expected", required=True,
                           help="file of 'tx_id sha256' lines")

    p_run = sub.add_parser("run", help="simulate and write reports")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run once per value of one key")
    common(p_sweep)
    p_sweep.add_argument("--sweep-key", required=True)
    p_sweep.add_argument("--sweep-values", required=True,
                         help="comma-separated values")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="check received payload digests")
    common(p_verify, expected=True)
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
