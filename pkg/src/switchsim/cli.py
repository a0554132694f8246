"""Command-line front end.

Subcommands:
  run      one simulation -> one CSV row (plus optional event trace file)
  sweep    policies x threshold values x seeds -> CSV table with aggregates
  compare  rank policies by their best-over-sweep mean response time
  calc     closed-form FACH/DCH transfer times for a burst

Exit codes: 0 success, 1 invalid configuration/arguments, 2 runtime failure.
Output is deterministic for a fixed seed: rows are emitted in (policy, value,
seed) order no matter how the runs were scheduled, and floats are fixed to 6
significant digits.
"""

import argparse
import math
import multiprocessing
import os
import sys

from .config import (DEFAULT_SWEEP_VALUES, SWEEP_PARAM_FOR_KIND, ConfigError,
                     ScenarioConfig, SweepSpec, load_config)
from .engine import run_scenario
from .metrics import CSV_HEADER, estimate_transfer_time, fmt6, summary_row


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def _load(args) -> ScenarioConfig:
    overrides = _parse_overrides(getattr(args, "set", None))
    for key in ("seed", "duration", "policy", "scheduler"):
        val = getattr(args, key, None)
        if val is not None:
            overrides["duration_s" if key == "duration" else key] = str(val)
    return load_config(getattr(args, "config", None), overrides)


def _int_list(text: str, what: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip() != "")
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated integers, got {text!r}")
    return values


def _write_lines(path, lines) -> None:
    if path is None or path == "-":
        sys.stdout.write("\n".join(lines) + "\n")
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


# ------------------------------------------------------------------- workers

def _run_one(cfg: ScenarioConfig):
    # saturated cells that complete nothing post-warmup report inf, not error
    return run_scenario(cfg, allow_empty=True)


def _run_many(configs, jobs: int):
    """Run independent scenarios, preserving input order in the output."""
    if jobs <= 1 or len(configs) <= 1:
        return [_run_one(c) for c in configs]
    with multiprocessing.Pool(processes=jobs) as pool:
        return pool.map(_run_one, configs, chunksize=1)


def _mean(xs):
    return math.fsum(xs) / len(xs)


def _stderr(xs):
    if len(xs) < 2:
        return None
    if any(not math.isfinite(x) for x in xs):
        return float("inf")
    m = _mean(xs)
    var = math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1)
    return math.sqrt(var / len(xs))


# --------------------------------------------------------------- subcommands

def cmd_run(args) -> int:
    cfg = _load(args)
    trace_lines = [] if args.trace else None
    summary = run_scenario(cfg, trace=trace_lines.append if trace_lines is not None else None)
    _write_lines(args.out, [CSV_HEADER, summary_row(summary)])
    if args.trace:
        _write_lines(args.trace, trace_lines)
    return 0


def _sweep_rows(base: ScenarioConfig, spec: SweepSpec, jobs: int):
    """All (policy, value, seed) runs plus per-cell aggregate rows."""
    cells = [(policy, value) for policy in spec.policies for value in spec.values]
    configs = [spec.apply(base, policy, value, seed)
               for (policy, value) in cells for seed in spec.seeds]
    summaries = _run_many(configs, jobs)
    rows = []
    by_cell = {}
    idx = 0
    for policy, value in cells:
        cell = []
        for _seed in spec.seeds:
            summ = summaries[idx]
            idx += 1
            rows.append(summary_row(summ))
            cell.append(summ)
        by_cell[(policy, value)] = cell
    # aggregate rows: same schema, seed column carries the statistic name
    for policy, value in cells:
        cell = by_cell[(policy, value)]
        proto = cell[0]
        resp = [s.mean_response_s for s in cell]
        agg = [s.slowdown_aggregate for s in cell]
        pb = [s.slowdown_per_burst for s in cell]
        uf = [s.util_fach for s in cell]
        ud = [s.util_dch for s in cell]
        spf = [s.switches_per_flow for s in cell]
        nb = [s.n_bursts for s in cell]
        prefix = (f"{proto.policy},{proto.scheduler},{proto.n_tcp},{proto.n_dch},"
                  f"{proto.s},{proto.t_h},{proto.t_l},{fmt6(proto.t_out)}")
        rows.append(f"{prefix},mean,{fmt6(proto.duration_s)},{round(_mean(nb))},"
                    f"{fmt6(_mean(resp))},{fmt6(_mean(agg))},{fmt6(_mean(pb))},"
                    f"{fmt6(_mean(uf))},{fmt6(_mean(ud))},{fmt6(_mean(spf))}")
        err = _stderr(resp)
        if err is not None:
            rows.append(f"{prefix},stderr,{fmt6(proto.duration_s)},,"
                        f"{fmt6(err)},{fmt6(_stderr(agg))},{fmt6(_stderr(pb))},"
                        f"{fmt6(_stderr(uf))},{fmt6(_stderr(ud))},{fmt6(_stderr(spf))}")
    return rows, by_cell


def cmd_sweep(args) -> int:
    base = _load(args)
    spec = SweepSpec(
        param=args.param,
        values=_int_list(args.values, "values") if args.values else DEFAULT_SWEEP_VALUES,
        policies=tuple(args.policies.split(",")) if args.policies else (base.policy,),
        seeds=_int_list(args.seeds, "seeds") if args.seeds else (base.seed,),
    )
    spec.validate()
    rows, _ = _sweep_rows(base, spec, args.jobs)
    _write_lines(args.out, [CSV_HEADER] + rows)
    return 0


def best_over_sweep(base: ScenarioConfig, policies, values, seeds, jobs: int):
    """Sweep each policy over its own threshold; return per-policy bests.

    Result maps policy -> dict(value, mean_response_s, stderr, slowdown_aggregate,
    slowdown_per_burst, cells) where cells holds every (value -> seed summaries).
    """
    result = {}
    for policy in policies:
        spec = SweepSpec(param=SWEEP_PARAM_FOR_KIND[policy], values=tuple(values),
                         policies=(policy,), seeds=tuple(seeds))
        spec.validate()
        _, by_cell = _sweep_rows(base, spec, jobs)
        best = None
        for (pol, value), cell in by_cell.items():
            resp = [s.mean_response_s for s in cell]
            mean_resp = _mean(resp)
            if best is None or mean_resp < best["mean_response_s"]:
                best = {
                    "policy": pol,
                    "value": value,
                    "mean_response_s": mean_resp,
                    "stderr": _stderr(resp),
                    "slowdown_aggregate": _mean([s.slowdown_aggregate for s in cell]),
                    "slowdown_per_burst": _mean([s.slowdown_per_burst for s in cell]),
                }
        best["cells"] = by_cell
        result[policy] = best
    return result


def cmd_compare(args) -> int:
    base = _load(args)
    policies = tuple(args.policies.split(","))
    if len(policies) < 2:
        raise ConfigError("policies: compare needs at least 2 policies")
    seeds = _int_list(args.seeds, "seeds") if args.seeds else (base.seed,)
    if not seeds:
        raise ConfigError("seeds: empty seed list")
    if len(seeds) < 2:
        print("warning: single seed, standard errors unavailable", file=sys.stderr)
    values = _int_list(args.values, "values") if args.values else DEFAULT_SWEEP_VALUES
    bests = best_over_sweep(base, policies, values, seeds, args.jobs)
    champion = min(bests.values(), key=lambda b: (b["mean_response_s"], b["policy"]))
    lines = ["policy,param,best_value,mean_response_s,stderr_response_s,"
             "slowdown_aggregate,slowdown_per_burst,gain_of_best_pct"]
    for policy in policies:
        b = bests[policy]
        err = fmt6(b["stderr"]) if b["stderr"] is not None else ""
        if b["policy"] == champion["policy"]:
            gain = ""
        else:
            gain = fmt6(100.0 * (b["mean_response_s"] - champion["mean_response_s"])
                        / b["mean_response_s"])
        lines.append(f"{policy},{SWEEP_PARAM_FOR_KIND[policy]},{b['value']},"
                     f"{fmt6(b['mean_response_s'])},{err},"
                     f"{fmt6(b['slowdown_aggregate'])},{fmt6(b['slowdown_per_burst'])},"
                     f"{gain}")
    lines.append(f"# best: {champion['policy']} "
                 f"(mean response {fmt6(champion['mean_response_s'])} s)")
    _write_lines(args.out, lines)
    return 0


def cmd_calc(args) -> int:
    n, size = args.n_packets, args.packet_bytes
    fach_cbr = estimate_transfer_time(n, size, "FACH", cbr_active=True)
    fach = estimate_transfer_time(n, size, "FACH", cbr_active=False)
    dch_setup = estimate_transfer_time(n, size, "DCH", include_setup=True)
    dch = estimate_transfer_time(n, size, "DCH", include_setup=False)
    lines = [
        f"burst: {n} packets x {size} bytes = {n * size * 8 / 1000:.6g} kbit",
        f"fach_cbr_s      {fmt6(fach_cbr)}",
        f"fach_no_cbr_s   {fmt6(fach)}",
        f"dch_setup_s     {fmt6(dch_setup)}",
        f"dch_no_setup_s  {fmt6(dch)}",
        f"speedup_cbr     {fmt6(fach_cbr / dch_setup)}",
        f"speedup_no_cbr  {fmt6(fach / dch_setup)}",
    ]
    _write_lines(args.out, lines)
    return 0


# --------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="switchsim",
        description="Single-cell UMTS downlink channel-switching policy simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_trace=False):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int, help="master seed (64-bit unsigned)")
        p.add_argument("--duration", type=float, help="simulated seconds")
        p.add_argument("--policy", help="QS | FS | QSFS | FSDCH | MT")
        p.add_argument("--scheduler", help="FACH data discipline: ps | las")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config field (repeatable)")
        p.add_argument("--out", help="output path (default stdout)")
        if with_trace:
            p.add_argument("--trace", help="write a `time kind subject detail` event trace")

    p_run = sub.add_parser("run", help="run one scenario, emit one CSV row")
    common(p_run, with_trace=True)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="threshold sweep over policies and seeds")
    common(p_sweep)
    p_sweep.add_argument("--param", default="t_h", choices=("s", "t_h", "both"),
                         help="which threshold the value list drives")
    p_sweep.add_argument("--values", help="comma-separated threshold values")
    p_sweep.add_argument("--policies", help="comma-separated policy kinds")
    p_sweep.add_argument("--seeds", help="comma-separated seeds")
    p_sweep.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                         help="parallel worker processes")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="rank policies at their own best threshold")
    common(p_cmp)
    p_cmp.add_argument("--policies", default="QS,FS,QSFS,FSDCH,MT",
                       help="comma-separated policy kinds (>= 2)")
    p_cmp.add_argument("--values", help="comma-separated threshold values")
    p_cmp.add_argument("--seeds", help="comma-separated seeds")
    p_cmp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_cmp.set_defaults(func=cmd_compare)

    p_calc = sub.add_parser("calc", help="closed-form burst transfer times")
    p_calc.add_argument("n_packets", type=int)
    p_calc.add_argument("packet_bytes", type=int)
    p_calc.add_argument("--out", help="output path (default stdout)")
    p_calc.set_defaults(func=cmd_calc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
