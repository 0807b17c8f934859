"""Command-line interface.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines
(``#`` starts a comment); keys are long flag names (``max-iter`` or
``max_iter``) and explicit flags override file values. Machine-readable
results go to the files named by ``--out``; diagnostics go to stderr.

Exit codes: 0 success, 1 usage or input error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bernstein as bern
from ._seeding import derive_seed, make_rng
from .complexity import fixed_point_linear
from .dataset import read_csv, write_csv
from .datagen import corrupt_figure1, gen_logistic_student, gen_prop1, gen_prop2, plant_constant_outliers
from .diagnostics import default_burn_in, outlier_scores
from .exceptions import DomainError, MomError
from .experiments import DEFAULT_PARAMS, ExperimentName, ExperimentSpec, run_experiment
from .losses import parse_loss
from .model_select import LepskiConfig, lepski_select, robust_cv_scores
from .solver import SolverConfig, erm_fit, mom_fit


class UsageError(Exception):
    """Bad flag, flag value or input file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(v) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------- config files

def parse_value(text: str):
    """Interpret a config value: int, float, bool, comma list or string.

    >>> parse_value("3"), parse_value("0.5"), parse_value("true"), parse_value("0, 1, 50")
    (3, 0.5, True, [0, 1, 50])
    """
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null", ""):
        return None
    if "," in text:
        return [parse_value(part) for part in text.split(",") if part.strip()]
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_config(path) -> dict:
    """Flat ``key = value`` file to a dict (keys keep their dots)."""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise UsageError(f"{path}:{lineno}: empty key")
        out[key] = parse_value(value)
    return out


# ---------------------------------------------------------------- parser

def _add_solver_flags(p, k_default=1):
    p.add_argument("--k", type=int, default=k_default, help="number of blocks")
    p.add_argument("--blocks", choices=["fixed", "resample"], default="resample")
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--step-rule", choices=["median_block", "full_data", "constant"],
                   default="median_block")
    p.add_argument("--step-size", type=float, default=None)
    p.add_argument("--step-denominator", choices=["block", "total"], default="block")
    p.add_argument("--median-criterion", choices=["incremental", "plain"], default="incremental")
    p.add_argument("--curvature", type=float, default=None,
                   help="factor in the step denominator; default 1 for huber, 1/4 otherwise")


def _add_loss_flags(p, default=None):
    p.add_argument("--loss", required=default is None, default=default,
                   help="logistic, hinge, huber, quantile or l1")
    p.add_argument("--delta", type=float, default=None, help="Huber threshold")
    p.add_argument("--tau", type=float, default=None, help="quantile level")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minmax-mom", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="key = value defaults file")
        return p

    p = command("fit", "fit a minmax MOM (or ERM) linear model")
    p.add_argument("--data", required=True)
    _add_loss_flags(p)
    _add_solver_flags(p)
    p.add_argument("--erm", action="store_true", help="fit the empirical risk minimiser (k=1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = command("cv", "choose K by robust cross-validation")
    p.add_argument("--data", required=True)
    _add_loss_flags(p)
    _add_solver_flags(p)
    p.add_argument("--k-grid", required=True, help="comma separated block counts")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = command("lepski", "choose K by the Lepski rule over candidate vectors")
    p.add_argument("--data", required=True)
    _add_loss_flags(p)
    p.add_argument("--k-grid", required=True)
    p.add_argument("--threshold", type=float, default=None, help="same threshold for every K")
    p.add_argument("--thresholds", default=None, help="per-K thresholds 'K:value,K:value'")
    p.add_argument("--candidates", default=None, help="CSV of candidate vectors, one per row")
    p.add_argument("--grid", default=None, help="'lo:hi:num' candidate grid for d=1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = command("experiment", "run a reproduction experiment from a spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", default=None, help="output directory (overrides the spec)")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    p = command("bernstein", "check the local Bernstein condition on a synthetic model")
    _add_loss_flags(p)
    p.add_argument("--noise", choices=["gaussian", "uniform", "logistic", "margin"],
                   default="gaussian")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--a", type=float, default=-1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--eta-pos", type=float, default=0.8)
    p.add_argument("--design", choices=["constant", "gaussian", "rademacher"], default="constant")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--t-star", default="0", help="comma separated oracle parameter")
    p.add_argument("--r", type=float, default=0.1)
    p.add_argument("--n-dirs", type=int, default=16)
    p.add_argument("--n-x", type=int, default=2000)
    p.add_argument("--c-prime", type=float, default=None)
    p.add_argument("--moment-eps", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = command("complexity", "Monte Carlo fixed point of a linear class")
    p.add_argument("--data", default=None, help="dataset CSV whose x columns are the rows")
    p.add_argument("--cov", default=None, help="covariance matrix CSV (no header)")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--n-mc", type=int, default=2000)
    p.add_argument("--subset-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = command("detect-outliers", "score points by median-block membership")
    p.add_argument("--data", required=True)
    _add_loss_flags(p, default="logistic")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--iterations", type=int, default=5000)
    p.add_argument("--burn-in", type=int, default=None, help="default: 20%% of iterations")
    p.add_argument("--median-criterion", choices=["incremental", "plain"], default="plain")
    p.add_argument("--step-rule", choices=["median_block", "full_data", "constant"],
                   default="median_block")
    p.add_argument("--step-size", type=float, default=None)
    p.add_argument("--flag-fraction", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = command("generate", "write a synthetic dataset")
    p.add_argument("--model", choices=["logistic", "prop1", "prop2"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--t-norm", type=float, default=1.0)
    p.add_argument("--noise-sd", type=float, default=1.0)
    p.add_argument("--n-out", type=int, default=0, help="label-flipped Gaussian outliers")
    p.add_argument("--scale", choices=["sd", "var"], default="sd")
    p.add_argument("--plant", default=None, help="comma separated rows for constant outliers")
    p.add_argument("--level", type=float, default=10.0)
    p.add_argument("--v-scale", type=float, default=10.0)
    p.add_argument("--x", type=float, default=10.0)
    p.add_argument("--t-star", type=float, default=0.0)
    p.add_argument("--relax", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices.get(name)
    return None


def parse_args(argv):
    parser = build_parser()
    pre = _Parser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config and known.command:
        sp = _subparser(parser, known.command)
        if sp is not None:
            dests = {a.dest for a in sp._actions}
            defaults = {}
            for key, value in read_config(known.config).items():
                dest = key.replace("-", "_")
                if dest not in dests or dest in ("help", "config"):
                    raise UsageError(f"{known.config}: unknown key {key!r} for {known.command}")
                action = next(a for a in sp._actions if a.dest == dest)
                if isinstance(value, list):
                    value = ",".join(str(v) for v in value)
                if action.type is not None and value is not None:
                    try:
                        value = action.type(value)
                    except (TypeError, ValueError):
                        raise UsageError(f"{known.config}: bad value for {key!r}") from None
                if action.choices is not None and value not in action.choices:
                    raise UsageError(f"{known.config}: {key!r} must be one of {list(action.choices)}")
                defaults[dest] = value
                if action.required:
                    action.required = False
            sp.set_defaults(**defaults)
    return parser.parse_args(argv)


# ---------------------------------------------------------------- helpers

def _need(cond, flag, message):
    if not cond:
        raise UsageError(f"{flag}: {message}")


def _load(path, flag="--data"):
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{flag}: file not found: {p}")
    try:
        return read_csv(p)
    except DomainError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _int_list(text, flag):
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma separated integers, got {text!r}") from None
    _need(vals, flag, "must not be empty")
    return vals


def _float_list(text, flag):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma separated numbers, got {text!r}") from None


def _loss(args):
    try:
        return parse_loss(args.loss, delta=args.delta, tau=args.tau)
    except (DomainError, ValueError) as exc:
        raise UsageError(f"--loss: {exc}") from None


def _solver_config(args, n):
    _need(args.k >= 1, "--k", f"must be >= 1, got {args.k}")
    _need(args.k <= n, "--k", f"must not exceed the number of observations {n}")
    _need(args.eps > 0, "--eps", "must be > 0")
    _need(args.max_iter >= 1, "--max-iter", "must be >= 1")
    _need(args.step_rule != "constant" or (args.step_size or 0) > 0, "--step-size",
          "must be > 0 with --step-rule constant")
    curvature = args.curvature
    if curvature is None:
        curvature = 1.0 if str(args.loss).strip().lower() == "huber" else 0.25
    _need(curvature > 0, "--curvature", "must be > 0")
    return SolverConfig(
        k=args.k, block_strategy=args.blocks, eps=args.eps, max_iter=args.max_iter,
        step_rule=args.step_rule, step_size=args.step_size,
        step_denominator=args.step_denominator, median_criterion=args.median_criterion,
        seed=args.seed, curvature=curvature,
    )


def _write_table(path, header, rows):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n")


def _write_meta(path, meta):
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _loss_meta(loss):
    return {"family": loss.family.value, "delta": loss.delta, "tau": loss.tau}


# ---------------------------------------------------------------- commands

def cmd_fit(args):
    data = _load(args.data)
    loss = _loss(args)
    if args.erm:
        _need(args.k == 1, "--erm", "cannot be combined with --k other than 1")
    cfg = _solver_config(args, data.n)
    # k = 1 is the empirical risk minimiser whether or not --erm is given
    result = erm_fit(data, loss, cfg) if cfg.k == 1 else mom_fit(data, loss, cfg)
    rows = [(str(j), a, b) for j, (a, b) in enumerate(zip(result.t_hat, result.t_tilde))]
    _write_table(args.out, ["coordinate", "t_hat", "t_tilde"], rows)
    _write_meta(args.out, {
        "estimator": "erm" if cfg.k == 1 else "mom",
        "k": cfg.k, "loss": _loss_meta(loss), "iterations": result.iterations,
        "converged": result.converged, "seed": cfg.seed, "eps": cfg.eps,
        "max_iter": cfg.max_iter, "blocks": cfg.block_strategy.value,
        "step_rule": cfg.step_rule.value, "data": str(args.data),
    })
    status = "converged" if result.converged else "stopped at max-iter"
    print(f"fit: {status} after {result.iterations} iterations", file=sys.stderr)


def cmd_cv(args):
    data = _load(args.data)
    loss = _loss(args)
    grid = _int_list(args.k_grid, "--k-grid")
    _need(min(grid) >= 1, "--k-grid", "block counts must be >= 1")
    _need(args.folds >= 2, "--folds", "must be >= 2")
    args.k = 1
    cfg = _solver_config(args, data.n)
    try:
        scores = robust_cv_scores(data, loss, grid, args.folds, cfg)
    except DomainError as exc:
        raise UsageError(f"--k-grid: {exc}") from None
    best = min(scores.values())
    chosen = min(k for k, s in scores.items() if s == best)
    _write_table(args.out, ["k", "score", "selected"],
                 [(str(k), s, "1" if k == chosen else "0") for k, s in scores.items()])
    print(f"cv: selected K={chosen}", file=sys.stderr)


def cmd_lepski(args):
    data = _load(args.data)
    loss = _loss(args)
    grid = _int_list(args.k_grid, "--k-grid")
    if args.thresholds:
        thresholds = {}
        for item in str(args.thresholds).split(","):
            try:
                k, v = item.split(":")
                thresholds[int(k)] = float(v)
            except ValueError:
                raise UsageError(f"--thresholds: bad entry {item!r}, expected K:value") from None
    else:
        _need(args.threshold is not None, "--threshold", "give --threshold or --thresholds")
        thresholds = {k: args.threshold for k in grid}
    if args.candidates:
        path = Path(args.candidates)
        _need(path.exists(), "--candidates", f"file not found: {path}")
        try:
            cands = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except ValueError as exc:
            raise UsageError(f"--candidates: {exc}") from None
    else:
        _need(args.grid is not None, "--grid", "give --candidates or --grid")
        _need(data.d == 1, "--grid", "only available for one-dimensional data")
        try:
            lo, hi, num = str(args.grid).split(":")
            cands = np.linspace(float(lo), float(hi), int(num))[:, None]
        except ValueError:
            raise UsageError(f"--grid: expected lo:hi:num, got {args.grid!r}") from None
    try:
        cfg = LepskiConfig(grid, thresholds, cands, seed=args.seed)
        k_hat, vec = lepski_select(data, loss, cfg)
    except DomainError as exc:
        raise UsageError(f"--k-grid: {exc}") from None
    _write_table(args.out, ["k_hat"] + [f"t{j + 1}" for j in range(vec.size)],
                 [[str(k_hat)] + list(vec)])
    print(f"lepski: selected K={k_hat}", file=sys.stderr)


def spec_from_config(cfg: dict) -> ExperimentSpec:
    """Build an :class:`ExperimentSpec` from flat dotted keys.

    Recognised keys: ``name``, ``replications``, ``base_seed``, ``output``,
    ``k_policy``, ``params.<name>`` and ``solver.<field>``.
    """
    cfg = dict(cfg)
    if "name" not in cfg:
        raise UsageError("--spec: missing key 'name'")
    try:
        name = ExperimentName(cfg.pop("name"))
    except ValueError:
        raise UsageError(f"--spec: unknown experiment; choose from {[e.value for e in ExperimentName]}") from None
    params, solver, top = {}, {}, {}
    for key, value in cfg.items():
        if key.startswith("params."):
            params[key[7:]] = value
        elif key.startswith("solver."):
            solver[key[7:]] = value
        elif key in ("replications", "base_seed", "output", "k_policy"):
            top[key] = value
        else:
            raise UsageError(f"--spec: unknown key {key!r}")
    for key in ("levels", "ks", "positions", "k_grid"):
        if key in params and not isinstance(params[key], list):
            params[key] = [params[key]]
    if "cases" in params:
        flat = params["cases"] if isinstance(params["cases"], list) else [params["cases"]]
        if len(flat) % 3:
            raise UsageError("--spec: params.cases needs d,n,rank triples")
        params["cases"] = [flat[i:i + 3] for i in range(0, len(flat), 3)]
    unknown = set(params) - set(DEFAULT_PARAMS[name])
    if unknown:
        raise UsageError(f"--spec: unknown params for {name.value}: {sorted(unknown)}")
    try:
        solver_cfg = SolverConfig(**solver)
    except TypeError as exc:
        raise UsageError(f"--spec: bad solver key ({exc})") from None
    return ExperimentSpec(name=name, params=params, solver=solver_cfg, **top)


def cmd_experiment(args):
    spec = spec_from_config(read_config(args.spec))
    changes = {}
    if args.out is not None:
        changes["output"] = args.out
    if args.replications is not None:
        _need(args.replications >= 1, "--replications", "must be >= 1")
        changes["replications"] = args.replications
    if args.seed is not None:
        changes["base_seed"] = args.seed
    _need(args.jobs >= 1, "--jobs", "must be >= 1")
    if changes:
        spec = ExperimentSpec(**{**spec.__dict__, **changes})
    if spec.output is None:
        raise UsageError("--out: no output directory given (flag or 'output' key)")
    result = run_experiment(spec, jobs=args.jobs)
    print(f"experiment {spec.name.value}: {len(result.records)} records written to {spec.output}",
          file=sys.stderr)


def cmd_bernstein(args):
    loss = _loss(args)
    t_star = np.array(_float_list(args.t_star, "--t-star"))
    if t_star.size == 1 and args.d > 1:
        t_star = np.full(args.d, t_star[0])
    _need(t_star.size == args.d, "--t-star", f"needs {args.d} values")
    _need(args.r > 0, "--r", "must be > 0")
    _need(args.n_dirs >= 1, "--n-dirs", "must be >= 1")
    noise = {
        "gaussian": lambda: bern.GaussianNoise(args.sigma),
        "uniform": lambda: bern.UniformNoise(args.a, args.b),
        "logistic": bern.LogisticLabel,
        "margin": lambda: bern.MarginLabel(args.eta_pos),
    }
    design = {
        "constant": bern.constant_design,
        "gaussian": bern.gaussian_design,
        "rademacher": bern.rademacher_design,
    }[args.design](args.d)
    try:
        model = bern.ConditionalModel(design, t_star, noise[args.noise]())
    except DomainError as exc:
        raise UsageError(f"--noise: {exc}") from None
    try:
        report = bern.check_local_bernstein(model, loss, args.r, args.n_dirs, args.n_x, args.seed,
                                            c_prime=args.c_prime, eps=args.moment_eps)
    except DomainError as exc:
        raise UsageError(f"--loss: {exc}") from None
    _write_table(args.out, ["direction", "ratio"],
                 [(str(i), v) for i, v in enumerate(report.ratios)])
    _write_meta(args.out, {
        "loss": _loss_meta(loss), "r": report.r, "directions_tested": report.directions_tested,
        "min_ratio": report.min_ratio, "theorem_A": report.theorem_A, "passed": report.passed,
        "alpha": report.alpha, "c_prime": report.c_prime, "noise": args.noise,
        "design": args.design, "seed": args.seed,
    })
    verdict = "passed" if report.passed else "FAILED"
    print(f"bernstein: {verdict} (min ratio {report.min_ratio:.6g}, 1/A {1 / report.theorem_A:.6g})",
          file=sys.stderr)


def _read_matrix(path, flag):
    p = Path(path)
    _need(p.exists(), flag, f"file not found: {p}")
    try:
        return np.loadtxt(p, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def cmd_complexity(args):
    _need(args.gamma > 0, "--gamma", "must be > 0")
    _need(args.n_mc >= 2, "--n-mc", "must be >= 2")
    if args.data is not None:
        x = _load(args.data).x
        sigma = _read_matrix(args.cov, "--cov") if args.cov else x.T @ x / x.shape[0]
    else:
        _need(args.d is not None and args.n is not None, "--d",
              "give --data or both --d and --n for a Gaussian design")
        rank = args.d if args.rank is None else args.rank
        _need(1 <= rank <= args.d, "--rank", "must lie in [1, d]")
        rng = make_rng(args.seed, 1)
        basis, _ = np.linalg.qr(rng.standard_normal((args.d, rank)))
        x = rng.standard_normal((args.n, rank)) @ basis.T
        sigma = basis @ basis.T if rank < args.d else np.eye(args.d)
        if args.cov:
            sigma = _read_matrix(args.cov, "--cov")
    try:
        est = fixed_point_linear(x, sigma, args.gamma, args.n_mc, derive_seed(args.seed, 2),
                                 subset_size=args.subset_size)
    except DomainError as exc:
        raise UsageError(f"--cov: {exc}") from None
    _write_table(args.out,
                 ["r_fixed", "std_error", "lemma1_bound", "gamma", "n_monte_carlo", "subset_size"],
                 [(est.r_fixed, est.std_error, est.lemma1_bound, est.gamma,
                   str(est.n_monte_carlo), str(est.subset_size))])
    print(f"complexity: r_fixed={est.r_fixed:.6g} (bound {est.lemma1_bound:.6g})", file=sys.stderr)


def cmd_detect_outliers(args):
    data = _load(args.data)
    loss = _loss(args)
    _need(1 <= args.k <= data.n, "--k", f"must lie in [1, {data.n}]")
    _need(args.iterations >= 1, "--iterations", "must be >= 1")
    burn_in = default_burn_in(args.iterations) if args.burn_in is None else args.burn_in
    _need(0 <= burn_in < args.iterations, "--burn-in", "must lie in [0, iterations)")
    _need(0 < args.flag_fraction <= 1, "--flag-fraction", "must lie in (0, 1]")
    _need(args.step_rule != "constant" or (args.step_size or 0) > 0, "--step-size",
          "must be > 0 with --step-rule constant")
    cfg = SolverConfig(k=args.k, block_strategy="resample", max_iter=args.iterations,
                       stop_early=False, record_trace=True, seed=args.seed,
                       median_criterion=args.median_criterion, step_rule=args.step_rule,
                       step_size=args.step_size,
                       curvature=1.0 if loss.family.value == "huber" else 0.25)
    scores = outlier_scores(mom_fit(data, loss, cfg), burn_in)
    _write_table(args.out, ["index", "score"],
                 [(str(i), str(int(c))) for i, c in enumerate(scores.counts)])
    _write_meta(args.out, {
        "burn_in": scores.burn_in, "iterations_counted": scores.iterations_counted,
        "k": args.k, "seed": args.seed, "flag_fraction": args.flag_fraction,
        "flagged": scores.flagged(args.flag_fraction).tolist(),
    })
    print(f"detect-outliers: {scores.iterations_counted} iterations scored", file=sys.stderr)


def cmd_generate(args):
    _need(args.n >= 1, "--n", "must be >= 1")
    _need(args.d >= 1, "--d", "must be >= 1")
    seed = args.seed
    try:
        if args.model == "logistic":
            g = make_rng(seed, 0).standard_normal(args.d)
            t_star = args.t_norm * g / np.linalg.norm(g)
            data = gen_logistic_student(args.n, args.d, t_star, args.noise_sd, derive_seed(seed, 1))
            if args.n_out:
                _need(0 <= args.n_out <= args.n, "--n-out", f"must lie in [0, {args.n}]")
                data = corrupt_figure1(data, args.n_out, t_star, derive_seed(seed, 3), args.scale)
            if args.plant:
                rows = _int_list(args.plant, "--plant")
                _need(all(0 <= i < args.n for i in rows), "--plant", "row index out of range")
                data = plant_constant_outliers(data, rows, args.level, t_star)
        elif args.model == "prop1":
            t_star = make_rng(seed, 0).standard_normal(args.d)
            data = gen_prop1(args.n, args.d, t_star, args.v_scale, derive_seed(seed, 1))
        else:
            data = gen_prop2(args.n, args.x, args.t_star, seed, relax=args.relax)
    except DomainError as exc:
        flag = "--x" if args.model == "prop2" else "--model"
        raise UsageError(f"{flag}: {exc}") from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(data, out)
    print(f"generate: wrote {data.n} rows to {out}", file=sys.stderr)


COMMANDS = {
    "fit": cmd_fit,
    "cv": cmd_cv,
    "lepski": cmd_lepski,
    "experiment": cmd_experiment,
    "bernstein": cmd_bernstein,
    "complexity": cmd_complexity,
    "detect-outliers": cmd_detect_outliers,
    "generate": cmd_generate,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"minmax-mom: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (MomError, ArithmeticError, OSError) as exc:
        print(f"minmax-mom: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
