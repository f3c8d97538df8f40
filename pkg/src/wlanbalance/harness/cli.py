"""Command-line interface for the WLAN load-balancing simulator."""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..errors import ConfigurationError, ExperimentError, ScenarioError
from ..metrics import qos_report
from ..policies import PolicyKind
from ..radio import snr_db
from .csv_writer import emit_csv
from .experiments import Backend, Comparison, ExperimentSpec, run_exp1, run_exp2, simulate
from .loader import default_loader, load_scenario

EXIT_OK = 0
EXIT_SCENARIO = 1
EXIT_RUNTIME = 2

logger = logging.getLogger(__name__)


def setup_logging(debug: bool = False) -> None:
    """Setup logging configuration (stderr, so CSV on stdout stays clean)."""
    level = logging.DEBUG if debug else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got '{text}'")


def int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="Scenario JSON file")
    common.add_argument("--debug", action="store_true", help="Enable debug logging")

    overrides = argparse.ArgumentParser(add_help=False)
    overrides.add_argument(
        "--policy",
        choices=[kind.value for kind in PolicyKind],
        help="Override the scenario's association policy",
    )
    overrides.add_argument("--beta", type=float, help="Override the load-balancing criterion beta")
    overrides.add_argument("--duration", type=float, help="Override the simulated duration (s)")
    overrides.add_argument("--out", help="Output CSV file (default: stdout)")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--snr", type=float_list, required=True, help="SNR axis, e.g. 30,50")
    sweep.add_argument("--seeds", type=int_list, default=[1, 2, 3, 4, 5], help="Seeds (default: 1,2,3,4,5)")
    sweep.add_argument("--jobs", type=int, default=1, help="Number of parallel workers (default: 1)")
    sweep.add_argument(
        "--backend",
        choices=[backend.value for backend in Backend],
        default=Backend.AUTO.value,
        help="Parallel backend (default: ray when installed, else process pool)",
    )

    parser = argparse.ArgumentParser(
        description="Simulate overlapping 802.11 cells under strongest-SNR, LBA and SNR-guarded LBA association",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s run --scenario scenarios/minimal.json --seed 3
  %(prog)s exp1 --scenario scenarios/exp1.json --snr 30,50 --load 480,12237 --out exp1.csv
  %(prog)s exp2 --scenario scenarios/exp2.json --snr 80,40 --source-snr 80 --out exp2.csv
  %(prog)s validate --scenario scenarios/invalid_test.json
        """,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", parents=[common, overrides], help="Run one scenario")
    run_cmd.add_argument("--seed", type=int, help="Override the scenario seed")

    exp1 = commands.add_parser("exp1", parents=[common, overrides, sweep], help="SNR x load sweep")
    exp1.add_argument("--load", type=float_list, required=True, help="Background load axis in kbps")

    exp2 = commands.add_parser("exp2", parents=[common, overrides, sweep], help="Balanced vs unbalanced")
    exp2.add_argument("--source-snr", type=float, help="Pin the mover's SNR to its current AP (dB)")

    commands.add_parser("validate", parents=[common], help="Print a validation report")
    return parser


def apply_overrides(scenario, args):
    """Apply command-line overrides; a bad value is reported like a bad scenario field."""
    overrides = [
        ("--policy", args.policy, lambda s, v: s.with_policy(PolicyKind(v))),
        ("--beta", args.beta, lambda s, v: s.with_policy(beta=v)),
        ("--duration", args.duration, lambda s, v: s.with_sim(duration=v)),
    ]
    for flag, value, apply in overrides:
        if value is None:
            continue
        try:
            scenario = apply(scenario, value)
        except (ValueError, ConfigurationError) as e:
            raise ScenarioError(f"{flag} {value}: {e}", kind="invariant", location=flag)
    return scenario


def write_output(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, newline="")
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def command_run(args) -> str:
    scenario = apply_overrides(load_scenario(args.scenario), args)
    seed = scenario.sim.seed if args.seed is None else args.seed
    result = simulate(scenario, seed, scenario.policy_kind)

    rows = []
    for station in sorted(sta.id for sta in scenario.stations):
        if scenario.profile_for(station) is None:
            continue
        report = qos_report(result, scenario, station)
        ap = result.association[station]
        rows.append(
            {
                "scenario": scenario.name,
                "policy": scenario.policy_kind.value,
                "seed": seed,
                "snr_db": snr_db(ap, station, scenario),
                "offered_kbps": report.offered_kbps,
                "station": station,
                "throughput_kbps": report.throughput,
                "delay_mean_ms": report.delay_mean,
                "delay_p95_ms": report.delay_p95,
                "packet_jitter_ms": report.packet_jitter,
                "frame_jitter_ms": report.frame_jitter,
                "frame_rate_fps": report.frame_rate,
                "loss_ratio": report.loss_ratio,
                "psnr_db": report.psnr,
                "handoffs": sum(1 for h in result.handoffs if h.station == station),
            }
        )
    counters = result.counters
    logger.info(
        f"{scenario.name}: {counters.delivered}/{counters.generated} packets delivered, "
        f"{len(result.handoffs)} handoff(s)"
    )
    return emit_csv(rows)


def command_sweep(args) -> str:
    scenario = apply_overrides(load_scenario(args.scenario), args)
    fields = dict(
        scenario=scenario,
        snr_axis=args.snr,
        seeds=args.seeds,
        workers=args.jobs,
        backend=Backend(args.backend),
    )
    if args.command == "exp1":
        spec = ExperimentSpec.build(load_axis=args.load, **fields)
        return emit_csv(run_exp1(spec))
    spec = ExperimentSpec.build(
        comparison=Comparison.BALANCED_VS_UNBALANCED, source_snr_db=args.source_snr, **fields
    )
    return emit_csv(run_exp2(spec))


def command_validate(args) -> int:
    loader = default_loader()
    try:
        doc = loader.decode(Path(args.scenario).read_text())
    except OSError as e:
        logger.error(f"Cannot read {args.scenario}: {e.strerror}")
        return EXIT_SCENARIO
    except ScenarioError as e:
        print(f"❌ {e}")
        return EXIT_SCENARIO
    if not isinstance(doc, dict):
        print("❌ Scenario document must be a JSON object")
        return EXIT_SCENARIO
    print(loader.generate_validation_report(doc, source=args.scenario))
    is_valid, _errors = loader.validate_document(doc)
    return EXIT_OK if is_valid else EXIT_SCENARIO


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(args.debug)

    try:
        if args.command == "validate":
            return command_validate(args)
        if args.command == "run":
            text = command_run(args)
        else:
            text = command_sweep(args)
        write_output(text, args.out)
    except (ScenarioError, ExperimentError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_SCENARIO
    except Exception as e:
        logger.error(f"Runtime error: {type(e).__name__}: {e}")
        if args.debug:
            logger.exception("Traceback")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
