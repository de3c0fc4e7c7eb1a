"""Command-line experiment runner.

Subcommands::

    activeptree run --experiment asymmetric --strategies expected,random --restarts 100
    activeptree score-interventions data.csv --experiment asymmetric --oracle
    activeptree dump-tree --experiment context

A YAML config file (``--config``) may hold any of the flag keys (dashes or
underscores); flags given on the command line override it.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from . import gain
from .hypotheses import CausalOrder, ContextSwapSpec, HypothesisSet, from_specs
from .inference import Dataset, state_from_dataset
from .pairsdata import run_pairs_benchmark
from .ptree import VariableSpace
from .simharness import (
    EpisodeConfig,
    PatternTruth,
    Setup,
    asymmetric_setup,
    compare_strategies,
    context_setup,
    symmetric_setup,
    three_var_setup,
)
from .strategies import StrategyKind
from .svg import line_chart

log = logging.getLogger("activeptree")

OUT_ENV = "ACTIVEPTREE_OUT"
EXPERIMENTS = ("symmetric", "asymmetric", "three-var", "context", "pairs", "custom-tree")
DEFAULT_K = {"symmetric": 4, "asymmetric": 4, "three-var": 6, "context": 3, "pairs": 5, "custom-tree": 3}


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


@dataclass
class RunConfig:
    experiment: str = "asymmetric"
    strategies: list = field(default_factory=lambda: ["expected", "random"])
    n_obs: int = 300
    restarts: int = 20
    alpha: float = 1.0
    rho: float = 0.9
    k: int | None = None
    seed: int = 0
    out: str | None = None
    dataset_dir: str | None = None
    oracle: bool = False
    threshold: float = 0.95
    max_interventions: int = 40
    sampled_outcomes: int | None = None
    k_star: int = 0
    pattern_cells: int | None = None
    cardinalities: list | None = None
    hypotheses: list | None = None
    jobs: int = 1
    dump_tree: bool = False

    def validate(self) -> "RunConfig":
        def bad(key, allowed):
            raise UsageError(f"invalid value for {key}: {getattr(self, key)!r} (allowed: {allowed})")

        if self.experiment not in EXPERIMENTS:
            bad("experiment", ", ".join(EXPERIMENTS))
        if isinstance(self.strategies, str):
            self.strategies = [s.strip() for s in self.strategies.split(",") if s.strip()]
        allowed = [s.value for s in StrategyKind]
        if not self.strategies or any(s not in allowed for s in self.strategies):
            bad("strategies", ", ".join(allowed))
        if self.n_obs < 0:
            bad("n_obs", "integer >= 0")
        if self.restarts < 1:
            bad("restarts", "integer >= 1")
        if not self.alpha > 0:
            bad("alpha", "real > 0")
        if not 0 <= self.rho <= 1:
            bad("rho", "[0, 1]")
        if self.k is None:
            self.k = DEFAULT_K[self.experiment]
        if self.k < 2:
            bad("k", "integer >= 2")
        if self.experiment == "asymmetric" and self.k != 4:
            bad("k", "4 for the asymmetric experiment")
        if not 0.5 < self.threshold < 1:
            bad("threshold", "(0.5, 1)")
        if self.max_interventions < 0:
            bad("max_interventions", "integer >= 0")
        if self.sampled_outcomes is not None and self.sampled_outcomes < 1:
            bad("sampled_outcomes", "integer >= 1")
        if self.jobs < 1:
            bad("jobs", "integer >= 1")
        if self.experiment == "pairs" and not self.dataset_dir:
            raise UsageError("the pairs experiment needs --dataset-dir")
        if self.experiment == "custom-tree" and not self.hypotheses:
            raise UsageError("the custom-tree experiment needs a hypotheses block in the config file")
        if self.out is None:
            self.out = os.environ.get(OUT_ENV, "results")
        return self


def load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text()) or {}
    except (OSError, yaml.YAMLError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a key/value mapping")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return data


def parse_config(args: argparse.Namespace) -> RunConfig:
    """File values first, then any flag the user actually passed."""
    values = load_config_file(getattr(args, "config", None))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and v is not False:
            values[f.name] = v
    try:
        cfg = RunConfig(**values)
    except TypeError as e:
        raise UsageError(str(e)) from None
    return cfg.validate()


def parse_hypotheses(block: list, space: VariableSpace) -> HypothesisSet:
    """``chain: [1, 2, 3]`` or ``context_swap: {pivot: 1, swap_values: [0], base_order: [2, 3]}``.

    Variables are numbered from 1 as in the labels; values from 0.
    """
    specs = []
    for entry in block:
        if not isinstance(entry, dict) or len(entry) != 1:
            raise UsageError(f"hypothesis entry {entry!r} must have exactly one key")
        (kind, body), = entry.items()
        try:
            if kind == "chain":
                specs.append(CausalOrder(tuple(int(v) - 1 for v in body)))
            elif kind == "context_swap":
                specs.append(
                    ContextSwapSpec(
                        int(body["pivot"]) - 1,
                        frozenset(int(v) for v in body["swap_values"]),
                        tuple(int(v) - 1 for v in body["base_order"]),
                    )
                )
            else:
                raise UsageError(f"unknown hypothesis kind {kind!r}")
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"bad hypothesis entry {entry!r}: {e}") from None
    try:
        return from_specs(space, specs)
    except ValueError as e:
        raise UsageError(str(e)) from None


def build_setup(cfg: RunConfig) -> Setup:
    if cfg.experiment == "symmetric":
        return symmetric_setup(cfg.k, cfg.rho)
    if cfg.experiment == "asymmetric":
        return asymmetric_setup(cfg.rho)
    if cfg.experiment == "three-var":
        return three_var_setup(cfg.k, cfg.rho, cfg.pattern_cells)
    if cfg.experiment == "context":
        return context_setup(cfg.k, cfg.rho, cfg.k_star)
    if cfg.experiment == "custom-tree":
        cards = cfg.cardinalities or [cfg.k] * 3
        hset = parse_hypotheses(cfg.hypotheses, VariableSpace.from_cardinalities(cards))
        if not 0 <= cfg.k_star < hset.S:
            raise UsageError(f"k_star must lie in [0, {hset.S - 1}]")
        return Setup("custom-tree", hset, PatternTruth(hset, cfg.rho, cfg.pattern_cells, cfg.k_star))
    raise UsageError(f"experiment {cfg.experiment} has no single hypothesis set")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def episodes_csv(results) -> str:
    rows = []
    for name, res in results.items():
        for ep in res.episodes:
            for step, p in enumerate(ep.posterior_true):
                j = ep.interventions[step - 1] if step > 0 else None
                rows.append(
                    [
                        name,
                        ep.restart,
                        step,
                        float(p),
                        "" if j is None else j.variable + 1,
                        "" if j is None else j.value,
                        ep.steps_to_certainty,
                    ]
                )
    return _csv(["strategy", "restart", "step", "posterior_true", "chosen_var", "chosen_val", "steps_to_certainty"], rows)


def aggregate_csv(results) -> str:
    rows = []
    for name, res in results.items():
        for step, (m, s) in enumerate(zip(res.mean_curve, res.stderr_curve)):
            rows.append([name, step, float(m), float(s)])
    return _csv(["strategy", "step", "mean_posterior_true", "stderr"], rows)


def cmd_run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.experiment == "pairs":
        summary = run_pairs_benchmark(
            cfg.dataset_dir,
            cfg.n_obs,
            cfg.strategies,
            restarts=cfg.restarts,
            alpha=cfg.alpha,
            max_interventions=cfg.max_interventions,
            K=cfg.k,
            seed=cfg.seed,
            threshold=cfg.threshold,
            n_jobs=cfg.jobs,
        )
        rows = [[s.n_obs, s.strategy, s.weighted_mean_interventions, s.weighted_stderr] for s in summary]
        text = _csv(["N_obs", "strategy", "weighted_mean_interventions", "weighted_stderr"], rows)
        (out / "pairs_summary.csv").write_text(text)
        sys.stdout.write(text)
        return 0

    setup = build_setup(cfg)
    if cfg.dump_tree:
        (out / "tree.json").write_text(setup.hset.meta.dumps(indent=1) + "\n")
    results = compare_strategies(
        setup,
        cfg.strategies,
        cfg.restarts,
        n_jobs=cfg.jobs,
        n_obs=cfg.n_obs,
        max_interventions=cfg.max_interventions,
        alpha=cfg.alpha,
        threshold=cfg.threshold,
        seed=cfg.seed,
        n_samples=cfg.sampled_outcomes,
    )
    (out / "episodes.csv").write_text(episodes_csv(results))
    (out / "aggregate.csv").write_text(aggregate_csv(results))
    series = {name: (r.mean_curve, r.stderr_curve) for name, r in results.items()}
    (out / "curves.svg").write_text(line_chart(series, title=f"{cfg.experiment} (T={cfg.restarts})"))
    for name, r in results.items():
        print(f"{name}: mean steps to certainty {r.mean_steps:.2f} +- {r.stderr_steps:.2f}")
    return 0


def cmd_score(cfg: RunConfig, dataset_path: str) -> str:
    setup = build_setup(cfg)
    hset = setup.hset
    try:
        dataset = Dataset.from_csv(Path(dataset_path).read_text(), hset.space)
    except OSError as e:
        raise RuntimeError(f"cannot read dataset {dataset_path}: {e}") from None
    state = state_from_dataset(hset, dataset, cfg.alpha)
    truth = setup.draw_truth(np.random.default_rng(cfg.seed)) if cfg.oracle else None
    kwargs = {}
    if cfg.sampled_outcomes:
        kwargs = {"n_samples": cfg.sampled_outcomes, "rng": np.random.default_rng(cfg.seed)}
    header = ["intervention_var", "intervention_val", "expected_gain"] + (["actual_gain"] if cfg.oracle else [])
    rows = []
    for j in gain.candidate_interventions(hset.space):
        row = [j.variable + 1, j.value, gain.expected_gain(state, j, **kwargs).score]
        if cfg.oracle:
            row.append(gain.actual_gain(state, j, truth, **kwargs).score)
        rows.append(row)
    return _csv(header, rows)


def cmd_dump_tree(cfg: RunConfig) -> str:
    setup = build_setup(cfg)
    hset = setup.hset
    if cfg.oracle:
        hset = setup.draw_truth(np.random.default_rng(cfg.seed)).hset
    return hset.meta.dumps(indent=1) + "\n"


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML file with default values for any flag")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--strategies", "--strategy", dest="strategies", help="comma-separated: expected,actual,random,entropy")
    p.add_argument("--n-obs", dest="n_obs", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--k", type=int, help="cardinality of every variable")
    p.add_argument("--k-star", dest="k_star", type=int, help="index of the true hypothesis")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./results)")
    p.add_argument("--dataset-dir", dest="dataset_dir")
    p.add_argument("--oracle", action="store_true", default=None)
    p.add_argument("--threshold", type=float)
    p.add_argument("--max-interventions", dest="max_interventions", type=int)
    p.add_argument("--sampled-outcomes", dest="sampled_outcomes", type=int)
    p.add_argument("--pattern-cells", dest="pattern_cells", type=int)
    p.add_argument("--jobs", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="activeptree", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an active-learning experiment")
    _add_common(run)
    run.add_argument("--dump-tree", dest="dump_tree", action="store_true", default=None)
    score = sub.add_parser("score-interventions", help="score every intervention on a dataset CSV")
    score.add_argument("dataset")
    _add_common(score)
    dump = sub.add_parser("dump-tree", help="print the hypothesis meta tree as JSON")
    _add_common(dump)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "score-interventions":
            text = cmd_score(cfg, args.dataset)
        else:
            text = cmd_dump_tree(cfg)
        if getattr(args, "out", None):
            Path(cfg.out).mkdir(parents=True, exist_ok=True)
            name = "scores.csv" if args.command == "score-interventions" else "tree.json"
            (Path(cfg.out) / name).write_text(text)
        sys.stdout.write(text)
        return 0
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, RuntimeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
