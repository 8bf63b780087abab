"""Command line interface, printing JSON records on standard output"""

import json
import logging
import sys
from argparse import ArgumentParser, Namespace
from typing import Callable, Optional, Sequence

from dotenv import load_dotenv

from .analytic import sop, top
from .capability import Constraints, capability, required_eps_t
from .channel import NetworkConfig, Scheme, rate_to_threshold
from .montecarlo import SimJob, estimate
from .specialfn import QuadratureError
from .sweep import Sweep, SweepSpec

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


DEFAULT_GAMMA: float = 10.0
DEFAULT_GAMMA_E: float = 0.5
DEFAULT_TRIALS: int = 100_000


def resolve_gamma(args: Namespace) -> float:
    """The legitimate SIR threshold, from `--gamma` or `--rate`"""
    if args.rate is not None:
        return rate_to_threshold(args.rate)
    return DEFAULT_GAMMA if args.gamma is None else args.gamma


def resolve_gamma_e(args: Namespace) -> float:
    """The eavesdropper SIR threshold, from `--gamma-e` or `--rate-e`"""
    if args.rate_e is not None:
        return rate_to_threshold(args.rate_e)
    return DEFAULT_GAMMA_E if args.gamma_e is None else args.gamma_e


def cmd_top(args: Namespace) -> dict:
    """Transmission outage probability of a single scenario"""
    gamma = resolve_gamma(args)
    value = top(args.scheme, args.n, gamma, args.tau, renormalize=args.renormalize)
    return dict(
        command="top",
        scheme=Scheme.parse(args.scheme).value,
        n=args.n,
        tau=args.tau,
        gamma=gamma,
        renormalize=args.renormalize,
        top=value,
    )


def cmd_sop(args: Namespace) -> dict:
    """Secrecy outage probability of a single scenario"""
    gamma_e = resolve_gamma_e(args)
    return dict(
        command="sop",
        n=args.n,
        m=args.m,
        tau=args.tau,
        gamma_e=gamma_e,
        sop=sop(args.n, args.m, args.tau, gamma_e),
    )


def cmd_simulate(args: Namespace) -> dict:
    """Monte-Carlo estimates of the TOP and SOP of a single scenario"""
    config = NetworkConfig(
        n=args.n,
        m=args.m,
        gamma=resolve_gamma(args),
        gamma_e=resolve_gamma_e(args),
        tau=args.tau,
    )
    job = SimJob(config, args.scheme, trials=args.trials, master_seed=args.seed)
    top_est, sop_est = estimate(
        job, n_jobs=args.n_jobs, chunksize=args.chunksize, verbose=not args.quiet
    )
    return dict(
        command="simulate",
        scheme=job.scheme.value,
        n=config.n,
        m=config.m,
        tau=config.tau,
        gamma=config.gamma,
        gamma_e=config.gamma_e,
        trials=job.trials,
        seed=job.master_seed,
        top=top_est.to_dict(),
        sop=sop_est.to_dict(),
    )


def cmd_capability(args: Namespace) -> dict:
    """Eavesdropper-tolerance capability of a single scenario"""
    gamma, gamma_e = resolve_gamma(args), resolve_gamma_e(args)
    result = capability(
        args.scheme,
        args.n,
        gamma,
        gamma_e,
        Constraints(eps_t=args.eps_t, eps_s=args.eps_s),
        tau_override=args.tau_override,
        renormalize=args.renormalize,
    )
    return dict(
        command="capability",
        n=args.n,
        gamma=gamma,
        gamma_e=gamma_e,
        eps_t=args.eps_t,
        eps_s=args.eps_s,
        tau_override=args.tau_override,
        **result.to_dict(),
    )


def cmd_tradeoff(args: Namespace) -> dict:
    """Smallest reliability constraint tolerating a given number of eavesdroppers"""
    gamma, gamma_e = resolve_gamma(args), resolve_gamma_e(args)
    result = required_eps_t(
        args.scheme, args.n, gamma, gamma_e, args.eps_s, args.target_m
    )
    return dict(
        command="tradeoff",
        scheme=Scheme.parse(args.scheme).value,
        n=args.n,
        gamma=gamma,
        gamma_e=gamma_e,
        eps_s=args.eps_s,
        target_m=args.target_m,
        **result.to_dict(),
    )


def cmd_sweep(args: Namespace) -> dict:
    """Evaluate a sweep spec and write its CSV table and manifest"""
    sweep = Sweep(
        SweepSpec.from_file(args.spec),
        n_jobs=args.n_jobs,
        chunksize=args.chunksize or 1,
        verbose=not args.quiet,
    )
    df, manifest_path = sweep.write(args.out)
    return dict(
        command="sweep",
        spec=str(args.spec),
        out=str(args.out),
        manifest=str(manifest_path),
        rows=len(df),
        failures=int((df.error != "").sum()),
    )


def build_parser() -> ArgumentParser:
    """The argument parser of the `jamtol` executable.

    Returns:
        ArgumentParser:
            The parser, with one subcommand per operation.
    """
    parser = ArgumentParser(
        prog="jamtol",
        description=(
            "Outage probabilities and eavesdropper-tolerance capability of two-hop "
            "relay networks with cooperative jamming."
        ),
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Flag groups shared between the subcommands
    scheme = ArgumentParser(add_help=False)
    scheme.add_argument(
        "--scheme",
        choices=[s.value for s in Scheme],
        default=Scheme.OPPORTUNISTIC.value,
        help="The relay selection scheme.",
    )

    relays = ArgumentParser(add_help=False)
    relays.add_argument("--n", type=int, required=True, help="The number of relays.")

    threshold = ArgumentParser(add_help=False)
    threshold.add_argument(
        "--tau", type=float, required=True, help="The noise-generating threshold."
    )

    legit = ArgumentParser(add_help=False)
    legit_group = legit.add_mutually_exclusive_group()
    legit_group.add_argument(
        "--gamma",
        type=float,
        default=None,
        help="The SIR threshold of the legitimate receivers. Defaults to "
        f"{DEFAULT_GAMMA}.",
    )
    legit_group.add_argument(
        "--rate",
        type=float,
        default=None,
        help="The codeword rate R_t in bits per channel use, instead of --gamma.",
    )

    eaves = ArgumentParser(add_help=False)
    eaves_group = eaves.add_mutually_exclusive_group()
    eaves_group.add_argument(
        "--gamma-e",
        type=float,
        default=None,
        help="The SIR threshold of the eavesdroppers. Defaults to "
        f"{DEFAULT_GAMMA_E}.",
    )
    eaves_group.add_argument(
        "--rate-e",
        type=float,
        default=None,
        help="The rate difference R_t - R_s in bits per channel use, instead of "
        "--gamma-e.",
    )

    renormalize = ArgumentParser(add_help=False)
    renormalize.add_argument(
        "--renormalize",
        action="store_true",
        help="Renormalise the truncated interference density of the opportunistic "
        "TOP.",
    )

    workers = ArgumentParser(add_help=False)
    workers.add_argument(
        "--n-jobs",
        type=int,
        default=None,
        help="The number of worker processes. Defaults to JAMTOL_N_JOBS or all but "
        "one CPU.",
    )
    workers.add_argument(
        "--chunksize",
        type=int,
        default=None,
        help="The number of trials (or grid points) per worker task.",
    )
    workers.add_argument(
        "--quiet", action="store_true", help="Only log warnings and errors."
    )

    sub = subparsers.add_parser(
        "top",
        parents=[scheme, relays, threshold, legit, renormalize],
        help="Transmission outage probability.",
    )
    sub.set_defaults(func=cmd_top)

    sub = subparsers.add_parser(
        "sop",
        parents=[relays, threshold, eaves],
        help="Secrecy outage probability.",
    )
    sub.add_argument(
        "--m", type=int, required=True, help="The number of eavesdroppers."
    )
    sub.set_defaults(func=cmd_sop)

    sub = subparsers.add_parser(
        "simulate",
        parents=[scheme, relays, threshold, legit, eaves, workers],
        help="Monte-Carlo estimates of the TOP and SOP.",
    )
    sub.add_argument("--m", type=int, default=0, help="The number of eavesdroppers.")
    sub.add_argument(
        "--trials",
        type=int,
        default=DEFAULT_TRIALS,
        help=f"The number of transmissions. Defaults to {DEFAULT_TRIALS}.",
    )
    sub.add_argument("--seed", type=int, default=0, help="The master seed.")
    sub.set_defaults(func=cmd_simulate)

    sub = subparsers.add_parser(
        "capability",
        parents=[scheme, relays, legit, eaves, renormalize],
        help="Eavesdropper-tolerance capability.",
    )
    sub.add_argument("--eps-t", type=float, required=True, help="The TOP constraint.")
    sub.add_argument("--eps-s", type=float, required=True, help="The SOP constraint.")
    sub.add_argument(
        "--tau-override",
        type=float,
        default=None,
        help="Use this threshold instead of the optimal one.",
    )
    sub.set_defaults(func=cmd_capability)

    sub = subparsers.add_parser(
        "tradeoff",
        parents=[scheme, relays, legit, eaves],
        help="The TOP constraint needed to tolerate a number of eavesdroppers.",
    )
    sub.add_argument("--eps-s", type=float, required=True, help="The SOP constraint.")
    sub.add_argument(
        "--target-m",
        type=int,
        required=True,
        help="The number of eavesdroppers to tolerate.",
    )
    sub.set_defaults(func=cmd_tradeoff)

    sub = subparsers.add_parser(
        "sweep", parents=[workers], help="Evaluate a grid of scenarios to CSV."
    )
    sub.add_argument("--spec", required=True, help="The JSON sweep spec.")
    sub.add_argument("--out", required=True, help="The CSV file to write.")
    sub.set_defaults(func=cmd_sweep)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the `jamtol` executable.

    Args:
        argv (sequence of str or None, optional):
            The arguments, without the program name. If None then `sys.argv` is used.
            Defaults to None.

    Returns:
        int:
            The exit status: 0 on success, 1 if the command failed. Usage errors exit
            with status 2 through argparse.
    """
    args = build_parser().parse_args(argv)
    if getattr(args, "quiet", False):
        logging.getLogger("jamtol").setLevel(logging.WARNING)

    func: Callable[[Namespace], dict] = args.func
    try:
        record = func(args)
    except QuadratureError as e:
        logger.error(f"The {args.command} command failed: {e}")
        record = dict(command=args.command, **e.to_dict())
        print(json.dumps(record, sort_keys=True))
        return 1
    except (ValueError, OSError) as e:
        logger.error(f"The {args.command} command failed: {e}")
        print(json.dumps(dict(command=args.command, error=str(e)), sort_keys=True))
        return 1

    print(json.dumps(record, sort_keys=True))
    if record.get("failures"):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
