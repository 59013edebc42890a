"""
Command-line front end.

Commands write JSON reports to stdout and log to stderr. Exit status is 0 on
success, 2 for invalid input (configuration, checkpoint, shapes, actions) and
3 when training or evaluation hits a non-finite number.

Installed as the ``platoon-intel`` console script::

    platoon-intel auction-train --config auction.yaml --out net.json --metrics train.csv
    platoon-intel auction-audit --mechanism spa --bidders 2
    platoon-intel marl-eval --policy policy.json --env coverage.json --render
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .auction import (
    Distribution,
    MonotonicNet,
    ValuationSampler,
    allocate_sequential,
    complexity_bound,
    estimate_inference_cost,
    run_auction,
    train_auction,
)
from .checkpoint import (
    artifact_meta,
    load_checkpoint,
    load_config,
    read_json,
    save_checkpoint,
    write_json,
    write_metrics,
)
from .commnet import CommNetPolicy, evaluate, rollout, train_marl
from .config.exceptions import (
    ConfigError,
    DimensionError,
    InvalidAction,
    NumericalError,
    StateSpaceTooLarge,
)
from .config.records import (
    AuctionTrainConfig,
    AuditConfig,
    CommNetConfig,
    MarlTrainConfig,
)
from .envs import CoverageEnv, brute_force_optimal, make_env
from .mechanisms import audit, compare, make_mechanism, monte_carlo_revenue
from .utils import make_rng

__author__ = "platoon_intel developers"
__license__ = "MIT"

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


# ---- argument helpers ----


def parse_bids(text: str) -> list[float]:
    try:
        return [float(b) for b in text.split(",")]
    except ValueError as e:
        raise ConfigError(f"Cannot parse bids {text!r}: expected comma-separated numbers") from e


def parse_distribution(text: str) -> Distribution:
    """``uniform``, ``uniform:LOW:HIGH``, ``exponential`` or ``exponential:RATE:CAP``."""
    kind, *params = text.split(":")
    try:
        values = [float(p) for p in params]
    except ValueError as e:
        raise ConfigError(f"Cannot parse distribution {text!r}") from e
    match kind, values:
        case "uniform", []:
            return Distribution.uniform()
        case "uniform", [low, high] if 0.0 <= low <= high:
            return Distribution.uniform(low, high)
        case "exponential", []:
            return Distribution.exponential()
        case "exponential", [rate, cap] if rate > 0 and cap > 0:
            return Distribution.exponential(rate, cap)
    raise ConfigError(
        f"Invalid distribution {text!r}: expected uniform[:LOW:HIGH] or exponential[:RATE:CAP]"
    )


def _load_net(path) -> MonotonicNet:
    model = load_checkpoint(path)
    if not isinstance(model, MonotonicNet):
        raise ConfigError(f"{path} is not an auction checkpoint")
    return model


def _sized(net: MonotonicNet, n: int) -> MonotonicNet:
    if n == net.n_bidders:
        return net
    return net.with_bidders(n)


# ---- commands ----


def cmd_auction_train(args) -> int:
    raw = load_config(args.config)
    config = AuctionTrainConfig.from_dict(raw).merged(
        seed=args.seed,
        iterations=args.iterations,
        bidders=args.bidders,
        lr=args.lr,
        batch_size=args.batch_size,
    )
    if args.threads and args.threads > 1:
        _logger.info("Auction training is sequential; ignoring --threads %d", args.threads)
    result = train_auction(config)
    resolved = config.to_dict()
    save_checkpoint(args.out, result.net, config=resolved, seed=config.seed)
    if args.metrics:
        write_metrics(args.metrics, result.metrics, artifact_meta(resolved, config.seed))
    write_json(
        None,
        {
            "revenue": result.revenue,
            "stderr": result.stderr,
            "iterations": config.iterations,
            "checkpoint": str(args.out),
            "meta": artifact_meta(resolved, config.seed),
        },
    )
    return EXIT_OK


def _eval_setup(args, seed: int):
    net = _load_net(args.model) if args.model else None
    bidders = args.bidders or (net.n_bidders if net is not None else 2)
    if net is not None:
        net = _sized(net, bidders)
    sampler = ValuationSampler.iid(parse_distribution(args.dist), bidders, seed=seed)
    return net, sampler


def _mechanism_names(args) -> list[str]:
    if args.mechanism:
        return args.mechanism.split(",")
    return ["neural" if args.model else "myerson"]


def cmd_auction_eval(args) -> int:
    settings = AuditConfig.from_dict(load_config(args.config)).merged(
        seed=args.seed, samples=args.samples, threads=args.threads
    )
    net, sampler = _eval_setup(args, settings.seed)
    names = _mechanism_names(args)
    mechs = {name: make_mechanism(name, sampler, net) for name in names}
    config = {
        "mechanism": names,
        "bidders": sampler.n_bidders,
        "dist": args.dist,
        "samples": settings.samples,
        "model": args.model,
    }
    meta = artifact_meta(config, sampler.seed)
    if len(mechs) == 1:
        est = monte_carlo_revenue(
            mechs[names[0]], sampler, settings.samples, threads=settings.threads
        )
        write_json(None, {**est.to_json(), "seed": sampler.seed, "meta": meta})
    else:
        frame = compare(mechs, sampler, settings.samples, threads=settings.threads)
        write_json(None, {"mechanisms": frame.to_dict(orient="records"), "meta": meta})
    return EXIT_OK


def cmd_auction_audit(args) -> int:
    config = AuditConfig.from_dict(load_config(args.config)).merged(
        seed=args.seed,
        samples=args.samples,
        grid=args.grid,
        opponents=args.opponents,
        threads=args.threads,
    )
    net, sampler = _eval_setup(args, config.seed)
    name = _mechanism_names(args)[0]
    report = audit(make_mechanism(name, sampler, net), sampler, config)
    resolved = {**config.to_dict(), "mechanism": name, "dist": args.dist, "model": args.model}
    write_json(None, {**report.to_json(), "meta": artifact_meta(resolved, config.seed)})
    return EXIT_OK


def cmd_auction_run(args) -> int:
    bids = parse_bids(args.bids)
    if args.model:
        doc = read_json(args.model)
        net = _sized(_load_net(args.model), len(bids))
        k = args.temperature or (doc.get("train_config") or {}).get("eval_temperature", 500.0)
    else:
        net = MonotonicNet.uniform_preset(len(bids))
        k = args.temperature or 500.0
    outcome = run_auction(net, bids, k, args.mode)
    report = outcome.to_json()
    if args.units:
        report["rounds"] = [
            {"winner": w, "payment": p} for w, p in allocate_sequential(net, bids, args.units)
        ]
    config = {"bids": bids, "mode": args.mode, "temperature": k, "model": args.model}
    write_json(None, {**report, "meta": artifact_meta(config, None)})
    return EXIT_OK


def _load_env(args, raw: dict):
    env_raw = load_config(args.env) if args.env else raw.get("env")
    if not env_raw:
        raise ConfigError("An environment config is required (--env or an 'env' section)")
    return make_env(env_raw)


def _marl_configs(args):
    raw = load_config(args.config)
    env = _load_env(args, raw)
    policy_config = CommNetConfig.from_dict(raw.get("policy")).merged(seed=args.seed)
    train_config = MarlTrainConfig.from_dict(raw.get("train")).merged(
        seed=args.seed,
        episodes=args.episodes,
        lr=args.lr,
        threads=args.threads,
    )
    return env, policy_config, train_config


def cmd_marl_train(args) -> int:
    env, policy_config, train_config = _marl_configs(args)
    result = train_marl(env, policy_config, train_config)
    resolved = {
        "env": env.to_json(),
        "policy": policy_config.to_dict(),
        "train": train_config.to_dict(),
    }
    save_checkpoint(args.out, result.policy, config=resolved, seed=train_config.seed)
    if args.metrics:
        write_metrics(args.metrics, result.metrics, artifact_meta(resolved, train_config.seed))
    last = result.metrics["return"].tail(train_config.batch_episodes)
    write_json(
        None,
        {
            "episodes": train_config.episodes,
            "final_mean_return": float(last.mean()) if len(last) else None,
            "checkpoint": str(args.out),
            "meta": artifact_meta(resolved, train_config.seed),
        },
    )
    return EXIT_OK


def cmd_marl_eval(args) -> int:
    policy = load_checkpoint(args.policy)
    if not isinstance(policy, CommNetPolicy):
        raise ConfigError(f"{args.policy} is not a CommNet checkpoint")
    raw = load_config(args.config)
    env = _load_env(args, raw)
    if env.n_agents != policy.n_agents:
        raise DimensionError("agent count", (env.n_agents,), (policy.n_agents,))
    train = MarlTrainConfig.from_dict(raw.get("train")).merged(
        seed=args.seed, threads=args.threads
    )
    seed = train.seed
    if args.render:
        traj = rollout(policy, env, [seed, 1, 0], args.mode, make_rng([seed, 2, 0]))
        sys.stdout.write("\n\n".join(env.render(s) for s in traj.states) + "\n\n")
    report = evaluate(policy, env, args.episodes, args.mode, seed, train.threads).to_json()
    if isinstance(env, CoverageEnv):
        try:
            optimum, placement = brute_force_optimal(env)
            report["optimal"] = optimum
            report["placement"] = [list(c) for c in placement]
            report["ratio"] = report["final_reward"] / optimum if optimum > 0 else 1.0
        except StateSpaceTooLarge as e:
            _logger.warning("Skipping the brute-force optimum: %s", e)
    config = {"env": env.to_json(), "policy": args.policy, "episodes": args.episodes,
              "mode": args.mode}
    write_json(None, {**report, "meta": artifact_meta(config, seed)})
    return EXIT_OK


def cmd_cost(args) -> int:
    model = load_checkpoint(args.model)
    cost = estimate_inference_cost(model)
    report = cost.to_json()
    if isinstance(model, CommNetPolicy):
        report["complexity_bound"] = complexity_bound(model.hidden, model.layers)
    write_json(None, {**report, "meta": artifact_meta({"model": args.model}, None)})
    return EXIT_OK


# ---- CLI ----


def _add_common(p):
    p.add_argument("--config", metavar="PATH", help="YAML or JSON configuration file")
    p.add_argument("--seed", type=int, help="root seed (overrides the config)")
    p.add_argument("--threads", type=int, help="worker threads (default 1)")


def _add_eval_args(p):
    p.add_argument("--model", metavar="PATH", help="auction checkpoint")
    p.add_argument(
        "--mechanism",
        help="fpa, spa, myerson or neural; comma-separated to compare (eval only)",
    )
    p.add_argument("--dist", default="uniform", help="valuation distribution (default uniform)")
    p.add_argument("--bidders", type=int, help="number of bidders")


def parse_args(args):
    """Parse command line parameters

    Args:
      args (List[str]): command line parameters as list of strings
          (for example  ``["--help"]``).

    Returns:
      :obj:`argparse.Namespace`: command line parameters namespace
    """
    parser = argparse.ArgumentParser(
        prog="platoon-intel",
        description="Neural Myerson auctions and CommNet MARL for platoon services",
    )
    parser.add_argument("--version", action="version", version=f"platoon_intel {__version__}")
    parser.add_argument(
        "-v",
        "--verbose",
        dest="loglevel",
        help="set loglevel to INFO",
        action="store_const",
        const=logging.INFO,
    )
    parser.add_argument(
        "-vv",
        "--very-verbose",
        dest="loglevel",
        help="set loglevel to DEBUG",
        action="store_const",
        const=logging.DEBUG,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("auction-train", help="train a neural Myerson auction")
    _add_common(p)
    p.add_argument("--out", required=True, metavar="PATH", help="checkpoint to write")
    p.add_argument("--metrics", metavar="PATH", help="CSV metrics to write")
    p.add_argument("--iterations", type=int)
    p.add_argument("--bidders", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.set_defaults(func=cmd_auction_train)

    p = sub.add_parser("auction-eval", help="Monte Carlo revenue of one or more mechanisms")
    _add_common(p)
    _add_eval_args(p)
    p.add_argument("--samples", type=int, help="Monte Carlo profiles (default 100000)")
    p.set_defaults(func=cmd_auction_eval)

    p = sub.add_parser("auction-audit", help="revenue, IC regret and IR violation audit")
    _add_common(p)
    _add_eval_args(p)
    p.add_argument("--samples", type=int)
    p.add_argument("--grid", type=int, help="misreport grid size (default 101)")
    p.add_argument("--opponents", type=int, help="opponent samples per grid point")
    p.set_defaults(func=cmd_auction_audit)

    p = sub.add_parser("auction-run", help="run one auction on explicit bids")
    p.add_argument("--model", metavar="PATH", help="checkpoint (default: uniform preset)")
    p.add_argument("--bids", required=True, help="comma-separated bids, e.g. 0.8,0.6")
    p.add_argument("--mode", choices=["hard", "soft"], default="hard")
    p.add_argument("--temperature", type=float, help="softmax temperature for soft mode")
    p.add_argument("--units", type=int, help="also sell this many units round by round")
    p.set_defaults(func=cmd_auction_run)

    p = sub.add_parser("marl-train", help="train a CommNet policy with REINFORCE")
    _add_common(p)
    p.add_argument("--env", metavar="PATH", help="environment config")
    p.add_argument("--out", required=True, metavar="PATH", help="checkpoint to write")
    p.add_argument("--metrics", metavar="PATH", help="CSV metrics to write")
    p.add_argument("--episodes", type=int)
    p.add_argument("--lr", type=float)
    p.set_defaults(func=cmd_marl_train)

    p = sub.add_parser("marl-eval", help="evaluate a CommNet policy")
    _add_common(p)
    p.add_argument("--policy", required=True, metavar="PATH", help="CommNet checkpoint")
    p.add_argument("--env", metavar="PATH", help="environment config")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--mode", choices=["greedy", "sample"], default="greedy")
    p.add_argument("--render", action="store_true", help="print the first episode as text")
    p.set_defaults(func=cmd_marl_eval)

    p = sub.add_parser("cost", help="operation count of one forward pass")
    p.add_argument("--model", required=True, metavar="PATH", help="checkpoint")
    p.set_defaults(func=cmd_cost)

    return parser.parse_args(args)


def setup_logging(loglevel):
    """Setup basic logging on stderr

    Args:
      loglevel (int): minimum loglevel for emitting messages
    """
    logformat = "[%(asctime)s] %(levelname)s:%(name)s:%(message)s"
    logging.basicConfig(
        level=loglevel or logging.WARNING,
        stream=sys.stderr,
        format=logformat,
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def main(args) -> int:
    """Run one command and return its exit status

    Args:
      args (List[str]): command line parameters as list of strings
          (for example  ``["auction-run", "--bids", "0.8,0.6"]``).
    """
    args = parse_args(args)
    setup_logging(args.loglevel)
    _logger.debug("Running %s", args.command)
    try:
        return args.func(args)
    except (ConfigError, DimensionError, InvalidAction, StateSpaceTooLarge) as e:
        _logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as e:
        _logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


def run():
    """Calls :func:`main` passing the CLI arguments extracted from :obj:`sys.argv`

    This function can be used as entry point to create console scripts with setuptools.
    """
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
