"""``latsim`` command-line front end.

Every number printed here comes from a library call; this module only
parses arguments and renders records as text, CSV or JSON.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import economics, emission, security, simulator, tables
from .consensus import BlockRecord, Target256, compress_compact, load_params
from .difficulty import lwma_next_target
from .errors import LatsimError

CONFIG_ENV = "LATSIM_CONFIG"


def _prob(p: float) -> str:
    return tables.format_value(p, "prob")


def _emit(records: list[dict], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(records if len(records) != 1 else records[0], indent=2) + "\n")
    elif fmt == "csv":
        writer = csv.DictWriter(out, fieldnames=list(records[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)
    else:
        width = max(len(k) for r in records for k in r)
        for i, rec in enumerate(records):
            if i:
                out.write("\n")
            for key, value in rec.items():
                out.write(f"{key:<{width}}  {value}\n")


def _params(args):
    return load_params(args.config)


# -- handlers -----------------------------------------------------------------

def cmd_subsidy(args) -> int:
    shors = emission.block_subsidy(_params(args), args.height)
    if args.format == "text":
        print(f"{emission.format_lat(shors)} LAT")
    else:
        _emit([{"height": args.height, "subsidy_shors": shors,
                "subsidy_lat": emission.format_lat(shors)}], args.format)
    return 0


def cmd_supply(args) -> int:
    shors = emission.cumulative_supply(_params(args), args.height)
    if args.format == "text":
        print(f"{emission.format_lat(shors)} LAT")
    else:
        _emit([{"height": args.height, "supply_shors": shors,
                "supply_lat": emission.format_lat(shors)}], args.format)
    return 0


def cmd_schedule(args) -> int:
    rows = emission.emission_schedule(_params(args))
    if args.format == "csv":
        sys.stdout.write(emission.schedule_csv(rows))
    elif args.format == "json":
        _emit([{
            "phase": r.phase, "start_height": r.start_height, "end_height": r.end_height,
            "reward_shors": r.reward, "block_time_s": r.block_time, "approx_date": r.approx_date,
            "cumulative_supply_shors": r.cumulative_supply, "annual_emission_shors": r.annual_emission,
        } for r in rows], "json")
    else:
        sys.stdout.write(emission.schedule_markdown(rows))
    return 0


def _read_window(path: str) -> list[BlockRecord]:
    """CSV with columns height, timestamp and one of target_hex / bits."""
    from .consensus import expand_compact

    records = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            if rec.get("target_hex"):
                target = Target256.from_hex(rec["target_hex"])
            else:
                target = expand_compact(int(rec["bits"], 0))
            records.append(BlockRecord(int(rec["height"]), int(rec["timestamp"]), target))
    return records


def cmd_difficulty_next(args) -> int:
    params = _params(args)
    window = _read_window(args.window)
    if not window:
        raise LatsimError(f"window file {args.window} has no blocks")
    height = window[-1].height + 1
    target = lwma_next_target(params, window, height)
    _emit([{"next_height": height, "target_hex": target.hex(),
            "bits": f"{compress_compact(target):#010x}"}], args.format)
    return 0


def cmd_double_spend(args) -> int:
    a = security.AttackerProfile(args.q, args.k)
    rec = {"q": args.q, "k": args.k,
           "bound": security.double_spend_bound(a),
           "poisson": security.double_spend_poisson(a)}
    if args.monte_carlo:
        p = simulator.simulate_double_spend_race(args.q, args.k, args.monte_carlo, args.seed,
                                                 args.variant, args.workers)
        rec["monte_carlo"] = p
        rec["monte_carlo_sigma"] = simulator.binomial_sigma(p, args.monte_carlo)
    if args.format == "text":
        rec = {k: _prob(v) if k not in ("q", "k") else v for k, v in rec.items()}
    _emit([rec], args.format)
    return 0


def cmd_finality(args) -> int:
    k = security.finality_confirmations(args.q, args.p)
    _emit([{"q": args.q, "p_target": args.p, "confirmations": k}], args.format)
    return 0


def cmd_cost51(args) -> int:
    m = security.CostModel(args.honest_hashrate, args.core_hashrate, args.cpu_cost,
                           args.ram_cost, args.hours)
    _emit([{"honest_hashrate": args.honest_hashrate, "hours": args.hours,
            "cost_usd": security.attack_cost_51(m)}], args.format)
    return 0


def cmd_orphan(args) -> int:
    link = security.NetworkLink(args.size, args.bandwidth, args.diameter, args.block_time)
    p = security.orphan_probability(link)
    _emit([{"block_size": args.size, "block_time": args.block_time,
            "orphan_probability": _prob(p) if args.format == "text" else p}], args.format)
    return 0


def cmd_storage(args) -> int:
    params = _params(args)
    weight = args.max_weight or params.weight_stages[-1][1]
    spacing = args.block_time or params.spacing
    u = args.utilization
    if args.block_size is not None:
        u = security.utilization_for_block_size(args.block_size, weight)
    _emit([{"utilization": u, "bytes_per_year": security.storage_growth(u, weight, spacing)}],
          args.format)
    return 0


def cmd_tps(args) -> int:
    params = _params(args)
    weight = args.max_weight or params.weight_stages[-1][1]
    spacing = args.block_time or params.spacing
    _emit([{"tx_weight": args.tx_weight, "tps": security.tps_max(weight, args.tx_weight, spacing)}],
          args.format)
    return 0


def cmd_ibd(args) -> int:
    _emit([{"signatures": args.signatures, "cores": args.cores,
            "seconds": security.ibd_verify_time(args.signatures, args.rate, args.cores)}], args.format)
    return 0


def cmd_budget(args) -> int:
    usd = economics.security_budget(_params(args), args.height, args.price, args.fees)
    _emit([{"height": args.height, "price": args.price, "usd_per_year": usd}], args.format)
    return 0


def cmd_econ_solo(args) -> int:
    pm = economics.PowerModel(args.watts, args.kwh_price)
    rows = [economics.solo_mining_economics(n, pm, args.block_time, args.reward)
            for n in args.nodes]
    _emit([vars(r) for r in rows], args.format)
    return 0


def cmd_econ_equilibrium(args) -> int:
    miners = []
    with open(args.miners, newline="") as fh:
        for rec in csv.DictReader(fh):
            miners.append(economics.MinerSpec(rec["id"], float(rec["hashrate"]),
                                              float(rec["cost_per_block"])))
    market = economics.MarketState(args.price, args.fees, args.subsidy)
    survivors = economics.equilibrium_miners(miners, market)
    ids = {m.id for m in survivors}
    _emit([{"id": m.id, "survives": m.id in ids} for m in miners], args.format)
    return 0


def cmd_econ_sniping(args) -> int:
    p = economics.fee_sniping_probability_bound(args.variance, args.subsidy)
    _emit([{"fee_variance": args.variance, "subsidy": args.subsidy,
            "bound": _prob(p) if args.format == "text" else p}], args.format)
    return 0


def cmd_econ_botnet(args) -> int:
    total, nodes = economics.botnet_hashrate(args.bots, args.per_bot, args.node_rate)
    _emit([{"bots": args.bots, "hashrate": total, "dedicated_nodes": nodes}], args.format)
    return 0


def cmd_scenario_run(args) -> int:
    spec = simulator.load_scenario(args.file)
    if args.seed is not None:
        spec = simulator.ScenarioSpec(spec.h0, spec.horizon, spec.steps, spec.oscillation,
                                      spec.params, args.seed, spec.start_height)
    runs = simulator.simulate_runs(spec, args.runs, args.workers)
    text = simulator.runs_to_csv(runs)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _render_reports(reports, fmt) -> None:
    if fmt == "csv":
        sys.stdout.write(tables.reports_to_csv(reports))
    elif fmt == "json":
        sys.stdout.write(tables.reports_to_json(reports) + "\n")
    else:
        sys.stdout.write(tables.reports_to_text(reports))


def cmd_tables_reproduce(args) -> int:
    sections = [args.section] if args.section else list(tables.SECTIONS)
    reports = [tables.reproduce(s) for s in sections]
    _render_reports(reports, args.format)
    return 0 if all(r.ok for r in reports) else 1


def cmd_tables_deltas(args) -> int:
    _render_reports(tables.delta_report(), args.format)
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    common.add_argument("--config", default=os.environ.get(CONFIG_ENV),
                        help=f"chain parameter TOML (default: ${CONFIG_ENV})")

    parser = argparse.ArgumentParser(prog="latsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(subparsers, name, handler, help_text):
        p = subparsers.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add(sub, "subsidy", cmd_subsidy, "block subsidy at a height")
    p.add_argument("height", type=int)
    p = add(sub, "supply", cmd_supply, "cumulative supply through a height")
    p.add_argument("height", type=int)
    add(sub, "schedule", cmd_schedule, "emission timeline")

    diff = sub.add_parser("difficulty", help="LWMA-1 difficulty").add_subparsers(
        dest="action", required=True)
    p = add(diff, "next", cmd_difficulty_next, "next target from a window CSV")
    p.add_argument("--window", required=True,
                   help="CSV with height,timestamp,target_hex (or bits), oldest first")

    attack = sub.add_parser("attack", help="attack models").add_subparsers(
        dest="action", required=True)
    p = add(attack, "double-spend", cmd_double_spend, "double-spend success probability")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--monte-carlo", type=int, metavar="TRIALS", default=0)
    p.add_argument("--variant", choices=simulator.RACE_VARIANTS, default="catch-up")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p = add(attack, "finality", cmd_finality, "confirmations for a target probability")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--p", type=float, default=1e-6)
    p = add(attack, "cost51", cmd_cost51, "cost of a sustained 51%% attack")
    p.add_argument("--honest-hashrate", type=float, required=True)
    p.add_argument("--core-hashrate", type=float, default=5_000.0)
    p.add_argument("--cpu-cost", type=float, default=0.05, help="USD per core-hour")
    p.add_argument("--ram-cost", type=float, default=0.0, help="USD per 2 GB")
    p.add_argument("--hours", type=float, default=1.0)

    p = add(sub, "orphan", cmd_orphan, "orphan probability")
    p.add_argument("--size", type=float, required=True, help="block size, bytes")
    p.add_argument("--bandwidth", type=float, default=1e6, help="bytes/s")
    p.add_argument("--diameter", type=float, default=6)
    p.add_argument("--block-time", type=float, default=240)

    p = add(sub, "storage", cmd_storage, "chain growth per year")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--utilization", type=float)
    group.add_argument("--block-size", type=float, help="average block size, bytes")
    p.add_argument("--max-weight", type=int)
    p.add_argument("--block-time", type=int)

    p = add(sub, "tps", cmd_tps, "theoretical transactions per second")
    p.add_argument("--tx-weight", type=int, default=16_000)
    p.add_argument("--max-weight", type=int)
    p.add_argument("--block-time", type=int)

    p = add(sub, "ibd", cmd_ibd, "IBD signature verification time")
    p.add_argument("--signatures", type=float, default=32.9e6)
    p.add_argument("--rate", type=float, default=20_000, help="signatures/s per core")
    p.add_argument("--cores", type=int, default=1)

    p = add(sub, "budget", cmd_budget, "annual security budget")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--price", type=float, required=True, help="USD/LAT")
    p.add_argument("--fees", type=float, default=0.0, help="annual fees, USD")

    econ = sub.add_parser("econ", help="miner economics").add_subparsers(
        dest="action", required=True)
    p = add(econ, "solo", cmd_econ_solo, "solo-mining energy economics")
    p.add_argument("--nodes", type=int, nargs="+", default=[10, 100, 1_000, 10_000, 100_000])
    p.add_argument("--watts", type=float, default=100.0)
    p.add_argument("--kwh-price", type=float, default=0.12)
    p.add_argument("--block-time", type=float, default=240)
    p.add_argument("--reward", type=float, default=50.0, help="LAT per block")
    p = add(econ, "equilibrium", cmd_econ_equilibrium, "surviving miners after defection")
    p.add_argument("--miners", required=True, help="CSV with id,hashrate,cost_per_block")
    p.add_argument("--price", type=float, required=True)
    p.add_argument("--subsidy", type=float, default=0.15, help="LAT per block")
    p.add_argument("--fees", type=float, default=0.0, help="LAT per block")
    p = add(econ, "sniping", cmd_econ_sniping, "fee-sniping probability bound")
    p.add_argument("--variance", type=float, required=True, help="fee variance, LAT^2")
    p.add_argument("--subsidy", type=float, default=0.15)
    p = add(econ, "botnet", cmd_econ_botnet, "botnet hashrate equivalence")
    p.add_argument("--bots", type=int, required=True)
    p.add_argument("--per-bot", type=float, default=economics.BOT_RATE)
    p.add_argument("--node-rate", type=float, default=economics.DEDICATED_NODE_RATE)

    scen = sub.add_parser("scenario", help="chain simulation").add_subparsers(
        dest="action", required=True)
    p = add(scen, "run", cmd_scenario_run, "simulate a scenario file")
    p.add_argument("file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)

    tab = sub.add_parser("tables", help="reference tables").add_subparsers(
        dest="action", required=True)
    p = add(tab, "reproduce", cmd_tables_reproduce, "recompute published tables")
    p.add_argument("--section", choices=list(tables.SECTIONS))
    add(tab, "deltas", cmd_tables_deltas, "full delta report")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (LatsimError, OSError, KeyError) as exc:
        print(f"latsim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
