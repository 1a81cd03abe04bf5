"""Command-line front end.

    smkaf run        --config configs/paper.cfg --runs 50 --out results/
    smkaf sweep      --noise 0.01,0.02,0.04,0.08
    smkaf dict-trace --algos klms,sm-nklms
    smkaf list-algos

Configuration files hold flat ``section.key = value`` lines; command-line
flags override file values. Exit codes: 0 success, 1 usage error, 2 config
error, 3 runtime or I/O error.
"""

import argparse
import csv
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import __version__
from .exceptions import ConfigError, SmkafError
from .harness import (
    ALGORITHMS,
    KERNEL,
    ExperimentConfig,
    TUNED_PARAMS,
    make_filter,
    robustness_sweep,
    run_experiment,
)
from .timeseries import MackeyGlassParams, SeriesConfig

logger = logging.getLogger("smkaf")

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
OUT_DIR_ENV = "SMKAF_OUT_DIR"
VERBS = ("run", "sweep", "dict-trace", "list-algos")
DEFAULT_SWEEP = (0.01, 0.02, 0.04, 0.08)

SERIES_KEYS = {
    "series.source": str,
    "series.path": str,
    "series.noise_std": float,
    "series.seed": int,
    "series.window": int,
    "series.horizon": int,
    "series.normalize": str,
}
MG_KEYS = {f"mg.{f.name}": f.type for f in fields(MackeyGlassParams)}
EXPERIMENT_KEYS = {
    "experiment.train": int,
    "experiment.test": int,
    "experiment.runs": int,
    "experiment.algos": str,
    "experiment.final_window": int,
    "experiment.jobs": int,
}
FILTER_KEYS = {
    "filter.gamma": str,
    "filter.K": int,
    "filter.epsilon": float,
    "filter.bandwidth": float,
    "filter.convention": str,
}
OTHER_KEYS = {"sweep.noise": str, "output.dir": str}

# command-line flag -> config key
FLAG_KEYS = {
    "series": "series.source",
    "path": "series.path",
    "seed": "series.seed",
    "window": "series.window",
    "horizon": "series.horizon",
    "train": "experiment.train",
    "test": "experiment.test",
    "runs": "experiment.runs",
    "algos": "experiment.algos",
    "jobs": "experiment.jobs",
    "gamma": "filter.gamma",
    "K": "filter.K",
    "epsilon": "filter.epsilon",
    "bandwidth": "filter.bandwidth",
    "convention": "filter.convention",
    "out": "output.dir",
}


@dataclass
class CliCommand:
    verb: str
    config_path: str = None
    overrides: dict = field(default_factory=dict)
    out_dir: str = None
    dump_dictionary: bool = False


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _build_parser():
    parser = _Parser(prog="smkaf", description="Set-membership kernel adaptive filtering experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="verb", metavar="{" + ",".join(VERBS) + "}", parser_class=_Parser)

    def experiment_flags(p):
        p.add_argument("--config", help="flat 'section.key = value' configuration file")
        p.add_argument("--series", choices=("mackey-glass", "file"))
        p.add_argument("--path", help="series file (one value per line) for --series file")
        p.add_argument("--train", type=int, help="training pairs (learning-curve length)")
        p.add_argument("--test", type=int, help="held-out test pairs")
        p.add_argument("--runs", type=int, help="Monte-Carlo runs")
        p.add_argument("--algos", help="comma-separated algorithm names (see list-algos)")
        p.add_argument("--noise", help="noise standard deviation(s); a comma list for sweep")
        p.add_argument("--gamma", help="error bound, or 'auto' for sqrt(5) * noise_std")
        p.add_argument("--seed", type=int, help="base noise seed; run r uses seed + r")
        p.add_argument("--window", type=int, help="embedding window length")
        p.add_argument("--horizon", type=int, help="prediction horizon")
        p.add_argument("--K", type=int, help="affine-projection window")
        p.add_argument("--epsilon", type=float, help="shared regularizer")
        p.add_argument("--bandwidth", type=float, help="Gaussian kernel bandwidth")
        p.add_argument("--convention", choices=("sigma", "scale"), help="kernel exponent convention")
        p.add_argument("--jobs", type=int, help="parallel trial workers")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any configuration key, e.g. kapa2.step_size=0.1")
        p.add_argument("--out", help=f"output directory (default: ${OUT_DIR_ENV} or ./results)")

    run = sub.add_parser("run", help="Monte-Carlo experiment: tables and learning curves")
    experiment_flags(run)
    run.add_argument("--dump-dictionary", action="store_true",
                     help="also write the run-0 dictionary of every kernel filter")
    experiment_flags(sub.add_parser("sweep", help="final MSE across noise levels"))
    experiment_flags(sub.add_parser("dict-trace", help="dictionary size versus iteration"))
    sub.add_parser("list-algos", help="print the available algorithm names")
    return parser


def parse_args(argv):
    """Parse ``argv`` into a :class:`CliCommand`.

    Raises :class:`UsageError` for unknown verbs or flags and
    :class:`ConfigError` for malformed ``--set`` items.
    """
    args = _build_parser().parse_args(argv)
    if args.verb is None:
        raise UsageError("smkaf: error: a command is required: " + ", ".join(VERBS))
    cmd = CliCommand(verb=args.verb)
    if args.verb == "list-algos":
        return cmd
    cmd.config_path = args.config
    if args.algos is not None:
        names = [a.strip() for a in args.algos.split(",") if a.strip()]
        bad = [a for a in names if a not in ALGORITHMS]
        if bad or not names:
            raise UsageError(
                f"smkaf: error: unknown algorithm(s) {', '.join(bad) or '(none given)'}; "
                f"valid names: {', '.join(ALGORITHMS)}"
            )
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            cmd.overrides[key] = str(value)
    if args.noise is not None:
        cmd.overrides["sweep.noise" if args.verb == "sweep" else "series.noise_std"] = args.noise
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        cmd.overrides[key.strip()] = value.strip()
    if args.verb == "dict-trace" and "experiment.algos" not in cmd.overrides:
        cmd.overrides["experiment.algos"] = "klms,sm-nklms"
    cmd.out_dir = cmd.overrides.get("output.dir")
    cmd.dump_dictionary = getattr(args, "dump_dictionary", False)
    return cmd


def read_config_file(path):
    """Read ``section.key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected 'section.key = value'")
        values[key.strip()] = value.strip()
    return values


def _algorithm_param_type(key):
    name, _, param = key.partition(".")
    if name not in ALGORITHMS or not param:
        return None
    accepted = ALGORITHMS[name][1]().get_params()
    if param not in accepted:
        raise ConfigError(
            f"unknown configuration key {key!r}: {name} accepts {', '.join(sorted(accepted))}"
        )
    return int if param == "K" else float


def _convert(key, value, typ):
    try:
        return typ(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot interpret {value!r} as {typ.__name__}") from None


def _float_list(key, text):
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    if not items:
        raise ConfigError(f"{key}: empty list")
    return tuple(_convert(key, t, float) for t in items)


def build_config(values):
    """Turn flat string key/values into an :class:`ExperimentConfig`."""
    known = {**SERIES_KEYS, **MG_KEYS, **EXPERIMENT_KEYS, **FILTER_KEYS, **OTHER_KEYS}
    typed = {}
    filter_params = {k: dict(v) for k, v in TUNED_PARAMS.items()}
    for key, raw in values.items():
        if key in known:
            typ = known[key]
            typed[key] = raw if typ is str else _convert(key, raw, typ)
            continue
        typ = _algorithm_param_type(key)
        if typ is None:
            raise ConfigError(f"unknown configuration key {key!r}")
        name, _, param = key.partition(".")
        filter_params.setdefault(name, {})[param] = _convert(key, raw, typ)

    noise = typed.get("series.noise_std", 0.04)
    if isinstance(noise, str):
        noise = _convert("series.noise_std", noise, float)
    mg = MackeyGlassParams(**{k[3:]: v for k, v in typed.items() if k.startswith("mg.")})
    series = SeriesConfig(
        source=typed.get("series.source", "mackey-glass"),
        noise_std=noise,
        seed=typed.get("series.seed", 0),
        path=typed.get("series.path"),
        normalize=typed.get("series.normalize", "none"),
        mg_params=mg,
    )
    gamma_text = str(typed.get("filter.gamma", "auto")).strip().lower()
    gamma = None if gamma_text == "auto" else _convert("filter.gamma", gamma_text, float)
    algos = tuple(a.strip() for a in str(typed.get("experiment.algos", ",".join(ALGORITHMS))).split(",") if a.strip())
    sweep = _float_list("sweep.noise", typed["sweep.noise"]) if "sweep.noise" in typed else ()
    return ExperimentConfig(
        algorithms=algos,
        series=series,
        train_count=typed.get("experiment.train", 1500),
        test_count=typed.get("experiment.test", 100),
        runs=typed.get("experiment.runs", 50),
        window=typed.get("series.window", 7),
        horizon=typed.get("series.horizon", 1),
        gamma=gamma,
        K=typed.get("filter.K", 7),
        epsilon=typed.get("filter.epsilon", 1e-4),
        bandwidth=typed.get("filter.bandwidth", 1.0),
        convention=typed.get("filter.convention", "sigma"),
        filter_params=filter_params,
        final_window=typed.get("experiment.final_window", 100),
        sweep=sweep,
        n_jobs=typed.get("experiment.jobs", 1),
    )


def load_command_config(cmd):
    """Merge the config file with the command's overrides.

    Returns ``(config, output directory or None)``.
    """
    values = read_config_file(cmd.config_path) if cmd.config_path else {}
    values.update(cmd.overrides)
    if "," in str(values.get("series.noise_std", "")):
        raise ConfigError("--noise takes a single value for this command; use 'sweep' for a list")
    try:
        cfg = build_config(values)
        for name in cfg.algorithms:
            make_filter(name, cfg)._check_params()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, values.get("output.dir")


def _fmt(value):
    return format(value, ".8g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.info("wrote %s", path)


def write_final_table(path, report):
    rows = [(label, _fmt(mse), _fmt(std)) for label, mse, std in report.final_table()]
    _write_csv(path, ("algorithm", "test_mse", "std"), rows)


def write_learning_curves(path, report):
    results = list(report.results.values())
    header = ["iteration"]
    for r in results:
        header += [f"{r.name}_mse", f"{r.name}_std"]
    rows = []
    for i in range(report.config.train_count):
        row = [str(i + 1)]
        for r in results:
            row += [_fmt(r.mse_mean[i]), _fmt(r.mse_std[i])]
        rows.append(row)
    _write_csv(path, header, rows)


def write_dict_sizes(path, report):
    results = [r for r in report.results.values() if r.name in KERNEL]
    header = ["iteration"] + [f"{r.name}_size" for r in results]
    rows = [
        [str(i + 1)] + [_fmt(r.size_mean[i]) for r in results]
        for i in range(report.config.train_count)
    ]
    _write_csv(path, header, rows)


def write_robustness(path, rows):
    _write_csv(
        path,
        ("noise_std", "algorithm", "test_mse", "std"),
        [(_fmt(s), label, _fmt(m), _fmt(sd)) for s, label, m, sd in rows],
    )


def write_dictionary(path, model):
    records = model.dictionary_.to_records(model.kernel_)
    n = model.dictionary_.n_features
    header = ["index", "coefficient"] + [f"x_{j}" for j in range(1, n + 1)] + ["family", "bandwidth", "convention"]
    rows = [
        [str(r["index"]), _fmt(r["coefficient"])]
        + [_fmt(r[f"x_{j}"]) for j in range(1, n + 1)]
        + [r["family"], _fmt(r["bandwidth"]), r["convention"]]
        for r in records
    ]
    _write_csv(path, header, rows)


def format_table(rows):
    lines = [f"{'algorithm':<10} {'test_mse':>12} {'std':>12}"]
    lines += [f"{label:<10} {mse:>12.7f} {std:>12.8f}" for label, mse, std in rows]
    return "\n".join(lines)


def execute(cmd, stdout=None):
    """Run ``cmd``; returns the process exit status."""
    stdout = stdout or sys.stdout
    if cmd.verb == "list-algos":
        for name, (label, cls, family) in ALGORITHMS.items():
            print(f"{name:<10} {label:<10} {family}", file=stdout)
        return EXIT_OK

    cfg, configured_dir = load_command_config(cmd)
    out_dir = Path(cmd.out_dir or os.environ.get(OUT_DIR_ENV) or configured_dir or "results")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc

    if cmd.verb == "sweep":
        levels = cfg.sweep or DEFAULT_SWEEP
        rows = robustness_sweep(cfg, levels)
        write_robustness(out_dir / "robustness.csv", rows)
        for sigma in levels:
            print(f"noise_std = {sigma:g}", file=stdout)
            print(format_table([r[1:] for r in rows if r[0] == sigma]), file=stdout)
        return EXIT_OK

    report = run_experiment(cfg)
    if cmd.verb == "dict-trace":
        write_dict_sizes(out_dir / "dict_sizes.csv", report)
        for r in report.results.values():
            if r.name in KERNEL:
                print(f"{r.label:<10} final mean dictionary size {r.size_mean[-1]:.1f}", file=stdout)
        return EXIT_OK

    write_final_table(out_dir / "final_table.csv", report)
    write_learning_curves(out_dir / "learning_curves.csv", report)
    write_dict_sizes(out_dir / "dict_sizes.csv", report)
    if cmd.dump_dictionary:
        for r in report.results.values():
            if r.name in KERNEL:
                write_dictionary(out_dir / f"dictionary_{r.name}.csv", r.traces[0].model)
    print(format_table(report.final_table()), file=stdout)
    return EXIT_OK


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"smkaf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(
        level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING,
        format="%(asctime)s %(name)s %(message)s",
    )
    try:
        return execute(cmd)
    except ConfigError as exc:
        print(f"smkaf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, SmkafError, ArithmeticError) as exc:
        print(f"smkaf: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
