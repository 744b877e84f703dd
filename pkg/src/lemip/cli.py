"""Experiment runner: protocol runs, attacks, simulations, rate estimates.

Subcommands:
  run       one or more protocol executions, JSON report
  attack    the contamination demos
  simulate  simulator runs or a real-vs-simulated comparison
  estimate  acceptance-rate estimation with a Wilson interval

Exit codes: 0 success, 1 protocol rejected (for `run`), 2 usage errors.
Seeds come from --seed, the LEMIP_SEED environment variable, or 0; every
report embeds its full configuration, so re-running a report's config
reproduces its numbers exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from .attacks import demo_prbox_binding_break, demo_relay_verifier, demo_ridiculous
from .bfl import Oracle3SatInstance, run_bfl_classic, run_bfl_lemip
from .fields import FieldSpec, next_prime
from .runtime import DeadlockError, LocalityViolation, derive_seed
from .simulators import compare_real_vs_sim, simulate_zk
from .zk_protocol import ZkParams, run_zk_lemip

PROTOCOLS = ("zk-lemip", "bfl-lemip", "bfl-classic")
ATTACKS = {
    "ridiculous": demo_ridiculous,
    "prbox-binding": demo_prbox_binding_break,
    "relay-verifier": demo_relay_verifier,
}


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str
    instance_path: str
    trials: int = 1
    seed: int = 0
    k: int = 16
    sigma: int = 8
    reps: int = 1
    prover: str = "honest"
    output: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class RateEstimate:
    successes: int
    trials: int
    rate: float
    lower: float
    upper: float

    def to_dict(self) -> dict:
        return asdict(self)


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def rate_estimate(successes: int, trials: int) -> RateEstimate:
    lo, hi = wilson_interval(successes, trials)
    return RateEstimate(successes, trials, successes / trials, lo, hi)


def trial_seed(base: int, index: int) -> int:
    """Counter-based per-trial seed derivation."""
    return derive_seed(base, "trial", index)


def run_one(config: ExperimentConfig, inst: Oracle3SatInstance, seed: int) -> str:
    if config.protocol == "zk-lemip":
        params = ZkParams(k=config.k, sigma=config.sigma, reps=config.reps)
        verdict, _ = run_zk_lemip(inst, seed, params, prover_kind=config.prover)
        return verdict
    spec = FieldSpec.prime(next_prime(1 << config.k))
    runner = run_bfl_lemip if config.protocol == "bfl-lemip" else run_bfl_classic
    verdict, _ = runner(
        inst, spec, seed, prover_kind=config.prover, reps=config.reps
    )
    return verdict


def estimate_acceptance(config: ExperimentConfig) -> RateEstimate:
    """Run `trials` independent executions with derived per-trial seeds."""
    inst = load_instance(config.instance_path)
    accepted = 0
    for t in range(config.trials):
        try:
            verdict = run_one(config, inst, trial_seed(config.seed, t))
        except (DeadlockError, LocalityViolation):
            verdict = "reject"  # aborted trials count against acceptance
        accepted += verdict == "accept"
    return rate_estimate(accepted, config.trials)


def load_instance(path: str) -> Oracle3SatInstance:
    return Oracle3SatInstance.from_json(Path(path).read_text())


def _emit(report: dict, output: str | None) -> None:
    text = json.dumps(report, indent=2, default=str)
    if output:
        Path(output).write_text(text + "\n")
    print(text)


def _default_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("LEMIP_SEED")
    return int(env) if env else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lemip")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a protocol")
    run_p.add_argument("--protocol", choices=PROTOCOLS, required=True)
    run_p.add_argument("--instance", required=True)
    run_p.add_argument("--trials", type=int, default=1)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--k", type=int, default=16)
    run_p.add_argument("--sigma", type=int, default=8)
    run_p.add_argument("--reps", type=int, default=1)
    run_p.add_argument("--prover", default="honest",
                       choices=("honest", "cheat", "random-answers"))
    run_p.add_argument("--output", default=None)

    atk_p = sub.add_parser("attack", help="run a contamination demo")
    atk_p.add_argument("--name", choices=sorted(ATTACKS), required=True)
    atk_p.add_argument("--trials", type=int, default=1000)
    atk_p.add_argument("--seed", type=int, default=None)
    atk_p.add_argument("--output", default=None)

    sim_p = sub.add_parser("simulate", help="simulator runs / comparison")
    sim_p.add_argument("--instance", required=True)
    sim_p.add_argument("--trials", type=int, default=1)
    sim_p.add_argument("--seed", type=int, default=None)
    sim_p.add_argument("--k", type=int, default=16)
    sim_p.add_argument("--sigma", type=int, default=2)
    sim_p.add_argument("--verifier1", default="honest",
                       choices=("honest", "early-abort", "biased-challenge"))
    sim_p.add_argument("--verifier2", default="honest",
                       choices=("honest", "substitute-question"))
    sim_p.add_argument("--compare", type=int, default=None, metavar="N",
                       help="run a real-vs-simulated comparison with N samples per side")
    sim_p.add_argument("--broken", action="store_true",
                       help="use the deliberately broken simulator control")
    sim_p.add_argument("--output", default=None)

    est_p = sub.add_parser("estimate", help="acceptance-rate estimate")
    est_p.add_argument("--protocol", choices=PROTOCOLS, required=True)
    est_p.add_argument("--instance", required=True)
    est_p.add_argument("--trials", type=int, default=100)
    est_p.add_argument("--seed", type=int, default=None)
    est_p.add_argument("--k", type=int, default=16)
    est_p.add_argument("--sigma", type=int, default=8)
    est_p.add_argument("--reps", type=int, default=1)
    est_p.add_argument("--prover", default="honest",
                       choices=("honest", "cheat", "random-answers"))
    est_p.add_argument("--output", default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0

    try:
        if args.command == "run":
            config = ExperimentConfig(
                args.protocol, args.instance, args.trials, _default_seed(args.seed),
                args.k, args.sigma, args.reps, args.prover, args.output,
            )
            estimate = estimate_acceptance(config)
            report = {"config": asdict(config), "estimate": estimate.to_dict()}
            if config.protocol == "zk-lemip":
                from .zk_protocol import zk_report

                inst = load_instance(config.instance_path)
                params = ZkParams(k=config.k, sigma=config.sigma, reps=config.reps)
                _, transcript = run_zk_lemip(
                    inst, trial_seed(config.seed, 0), params, prover_kind=config.prover
                )
                report["first_trial"] = zk_report(transcript)
            _emit(report, args.output)
            return 0 if estimate.successes == estimate.trials else 1

        if args.command == "attack":
            seed = _default_seed(args.seed)
            result = ATTACKS[args.name](trials=args.trials, seed=seed)
            _emit({"attack": args.name, "seed": seed, "result": result}, args.output)
            return 0

        if args.command == "simulate":
            inst = load_instance(args.instance)
            seed = _default_seed(args.seed)
            params = ZkParams(k=args.k, sigma=args.sigma)
            if args.compare:
                report = compare_real_vs_sim(
                    inst, params, args.compare,
                    v1_behavior=args.verifier1, v2_behavior=args.verifier2,
                    broken=args.broken, seed_base=seed,
                )
                _emit({"comparison": report.to_dict(), "seed": seed}, args.output)
                return 0 if report.passed == (not args.broken) else 1
            verdicts = []
            for t in range(args.trials):
                verdict, _ = simulate_zk(
                    inst, trial_seed(seed, t), params,
                    v1_behavior=args.verifier1, v2_behavior=args.verifier2,
                    broken=args.broken,
                )
                verdicts.append(verdict)
            accepted = sum(v == "accept" for v in verdicts)
            _emit(
                {"trials": args.trials, "seed": seed,
                 "estimate": rate_estimate(accepted, args.trials).to_dict()},
                args.output,
            )
            return 0

        if args.command == "estimate":
            config = ExperimentConfig(
                args.protocol, args.instance, args.trials, _default_seed(args.seed),
                args.k, args.sigma, args.reps, args.prover, args.output,
            )
            estimate = estimate_acceptance(config)
            _emit({"config": asdict(config), "estimate": estimate.to_dict()}, args.output)
            return 0
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
