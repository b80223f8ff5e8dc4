"""Command-line front end: ``genrebayes {ingest,train,predict,evaluate,correlate}``."""
from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .correlation import CORRELATION_MODES, compute_correlation
from .dataset import (
    RATING_VALUES,
    Dataset,
    load_movielens,
    load_movielens_dir,
    read_dataset,
    write_dataset,
)
from .errors import ContractError, DatasetValidationError, GenreBayesError, ParseError, TrainingError
from .evaluation import (
    CORRELATION_SOURCES,
    DEFAULT_FRACTIONS,
    DEFAULT_REPETITIONS,
    EvalOptions,
    EvaluationReport,
    SplitSpec,
    cell_seed,
    learning_curve,
    split,
    summarize,
)
from .model import (
    PRIOR_MODES,
    SMOOTHING_MODES,
    load_model,
    posterior,
    save_model,
    train_preference_model,
    write_movie_likelihood_csv,
    write_user_prob_csv,
)

logger = logging.getLogger("genrebayes")

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_CONTRACT = 4
EXIT_USAGE = 64
EXIT_INTERRUPTED = 130

EXIT_CODES_HELP = """\
exit status:
  0    success
  2    I/O error (missing or unreadable file)
  3    parse error in an input file (message carries file:line)
  4    contract, validation or training error
  64   usage error (bad flag or config value)
  130  interrupted (evaluate flushes completed cells first)
"""


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    data: str = ""
    items: str = ""
    genres: str = ""
    dataset: str = ""
    ratings: tuple = RATING_VALUES
    fractions: tuple = DEFAULT_FRACTIONS
    repetitions: int = DEFAULT_REPETITIONS
    seed: int = 0
    threshold: float = 0.1
    prior: str = "empirical"
    smoothing: str = "paper"
    correlation_source: str = "training"
    correlation_mode: str = "membership"
    fixed_test: bool = False
    jobs: int = 1
    out: str = "."
    plot: str = "png"

    def validate(self) -> None:
        if not np.isfinite(self.threshold):
            raise UsageError("threshold must be finite")
        if self.repetitions < 1:
            raise UsageError("repetitions must be >= 1")
        for f in self.fractions:
            if not 0 < f <= 0.8 + 1e-9:
                raise UsageError(f"fraction {f} outside (0, 0.8]")
        for r in self.ratings:
            if r not in RATING_VALUES:
                raise UsageError(f"rating {r} not in 1..5")
        _choice("prior", self.prior, PRIOR_MODES)
        _choice("smoothing", self.smoothing, SMOOTHING_MODES)
        _choice("correlation_source", self.correlation_source, CORRELATION_SOURCES)
        _choice("correlation_mode", self.correlation_mode, CORRELATION_MODES)
        _choice("plot", self.plot, ("png", "svg", "none"))
        if self.jobs < 1:
            raise UsageError("jobs must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")

    def lines(self) -> list[str]:
        out = []
        for k, v in asdict(self).items():
            if isinstance(v, (tuple, list)):
                v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            out.append(f"{k}={v}")
        return out

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.lines()).encode()).hexdigest()[:16]

    def eval_options(self) -> EvalOptions:
        return EvalOptions(
            threshold=self.threshold,
            prior_mode=self.prior,
            smoothing=self.smoothing,
            correlation_source=self.correlation_source,
            correlation_mode=self.correlation_mode,
            fixed_test=self.fixed_test,
        )


def _choice(name, value, allowed):
    if value not in allowed:
        raise UsageError(f"{name} must be one of {', '.join(allowed)}; got {value!r}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


_CONVERTERS = {
    "ratings": _int_list,
    "fractions": _float_list,
    "repetitions": int,
    "seed": int,
    "threshold": float,
    "fixed_test": _bool,
    "jobs": int,
}


def _convert(key: str, value: str):
    try:
        return _CONVERTERS.get(key, str)(value)
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError("expected key = value", lineno, path)
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _convert(key, value)
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(dest_out: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    p.add_argument("--config", default=s, help="flat key=value config file")
    p.add_argument("--seed", type=int, default=s, help="master seed (u64)")
    p.add_argument("--jobs", type=int, default=s, help="max parallel evaluation cells")
    if dest_out:
        p.add_argument("--out", dest="out_dir", default=s, help="output directory")
    return p


def _model_flags(p):
    p.add_argument("--prior", choices=PRIOR_MODES, default=None)
    p.add_argument("--smoothing", choices=SMOOTHING_MODES, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="genrebayes",
        description="Predict movie genres from MovieLens ratings with a Bernoulli naive Bayes model.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[_common(dest_out=True)],
    )
    parser.add_argument("--version", action="version", version=f"genrebayes {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common(dest_out=False)

    p = sub.add_parser("ingest", parents=[common], help="parse and validate raw MovieLens files")
    p.add_argument("--data", help="u.data")
    p.add_argument("--items", help="u.item")
    p.add_argument("--genres", help="u.genre (optional)")
    p.add_argument("--movielens-dir", help="directory holding u.data/u.item/u.genre")
    p.add_argument("--out", dest="output", help="canonical dataset file to write")

    p = sub.add_parser("train", parents=[common], help="train per-rating preference models")
    p.add_argument("--dataset")
    p.add_argument("--rating", type=int, action="append", choices=RATING_VALUES)
    p.add_argument("--movies", help="comma-separated training movie ids (default: all)")
    p.add_argument("--train-fraction", type=float, help="train on a seeded random split instead")
    p.add_argument("--repetition", type=int, default=0)
    p.add_argument("--export-csv", action="store_true", help="also write P(u|g,r) and P(m|g,r) tables")
    p.add_argument("--out", dest="output", help="model file; use {rating} when training several")
    _model_flags(p)

    p = sub.add_parser("predict", parents=[common], help="predict genres for movies")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset")
    p.add_argument("--movies", help="comma-separated movie ids (default: every labeled movie)")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--threshold", type=float)
    p.add_argument("--correlation-mode", choices=CORRELATION_MODES)

    p = sub.add_parser("evaluate", parents=[common], help="run the learning-curve protocol")
    p.add_argument("--dataset")
    p.add_argument("--ratings")
    p.add_argument("--fractions")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--correlation-source", choices=CORRELATION_SOURCES)
    p.add_argument("--correlation-mode", choices=CORRELATION_MODES)
    p.add_argument("--fixed-test", action="store_true", default=None)
    p.add_argument("--raw", action="store_true", help="also write per-repetition rows")
    p.add_argument("--plot", choices=("png", "svg", "none"))
    p.add_argument("--out", dest="output", help="output directory")
    _model_flags(p)

    p = sub.add_parser("correlate", parents=[common], help="export the genre correlation matrix")
    p.add_argument("--dataset")
    p.add_argument("--source", choices=CORRELATION_SOURCES)
    p.add_argument("--mode", choices=CORRELATION_MODES)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--repetition", type=int, default=0)
    p.add_argument("--out", dest="output", help="CSV file to write")
    return parser


def resolve_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config(args.config))
    flag_map = {
        "seed": "seed",
        "jobs": "jobs",
        "out_dir": "out",
        "dataset": "dataset",
        "prior": "prior",
        "smoothing": "smoothing",
        "repetitions": "repetitions",
        "threshold": "threshold",
        "correlation_source": "correlation_source",
        "correlation_mode": "correlation_mode",
        "fixed_test": "fixed_test",
        "plot": "plot",
        "data": "data",
        "items": "items",
        "genres": "genres",
    }
    for attr, key in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            values[key] = v
    if getattr(args, "ratings", None):
        values["ratings"] = _int_list(args.ratings)
    if getattr(args, "fractions", None):
        values["fractions"] = _float_list(args.fractions)
    if args.command == "correlate":
        if args.source:
            values["correlation_source"] = args.source
        if args.mode:
            values["correlation_mode"] = args.mode
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def provenance(cfg: RunConfig, command: str) -> list[str]:
    return [
        f"genrebayes {__version__} {command}",
        f"config_sha256 {cfg.digest()} seed {cfg.seed}",
        *(f"config {line}" for line in cfg.lines()),
    ]


def _load_dataset(cfg: RunConfig) -> Dataset:
    if cfg.dataset:
        path = Path(cfg.dataset)
        if path.is_dir():
            return load_movielens_dir(path)
        return read_dataset(path)
    if cfg.data and cfg.items:
        return load_movielens(cfg.data, cfg.items, cfg.genres or None)
    raise UsageError("no dataset given (use --dataset or the data/items config keys)")


def _out_path(cfg: RunConfig, explicit: str | None, default: str) -> Path:
    if explicit:
        return Path(explicit)
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    return Path(cfg.out) / default


def cmd_ingest(args, cfg: RunConfig) -> int:
    if args.movielens_dir:
        ds = load_movielens_dir(args.movielens_dir)
    else:
        data = args.data or cfg.data
        items = args.items or cfg.items
        if not data or not items:
            raise UsageError("ingest needs --data and --items (or --movielens-dir)")
        ds = load_movielens(data, items, args.genres or cfg.genres or None)
    report = ds.validate()
    out = _out_path(cfg, args.output, "dataset.tsv")
    write_dataset(ds, out, provenance(cfg, "ingest"))
    print(report.summary())
    print(f"min ratings per user: {report.min_ratings_per_user}")
    if report.excluded_movies:
        print(
            f"excluded {len(report.excluded_movies)} movie(s) labeled only 'unknown': "
            + ",".join(map(str, report.excluded_movies))
        )
    for a in report.anomalies:
        print(f"warning: {a}")
    print(f"wrote {out}")
    return EXIT_OK


def _parse_movies(text: str | None) -> list[int] | None:
    if not text:
        return None
    return list(_int_list(text))


def cmd_train(args, cfg: RunConfig) -> int:
    ds = _load_dataset(cfg)
    ratings = args.rating or list(cfg.ratings)
    if args.output and len(ratings) > 1 and "{rating}" not in args.output:
        raise UsageError("--out needs a {rating} placeholder when training several ratings")
    movies = _parse_movies(args.movies)
    for r in ratings:
        if movies is not None:
            train = movies
        elif args.train_fraction is not None:
            spec = SplitSpec(args.train_fraction, cell_seed(cfg.seed, r, args.train_fraction), args.repetition)
            train, _ = split(ds.movies, spec)
        else:
            train = ds.movies
        model = train_preference_model(
            ds.indicator(r), ds.genres, train, prior_mode=cfg.prior, smoothing=cfg.smoothing
        )
        out = _out_path(cfg, args.output.format(rating=r) if args.output else None, f"model_r{r}.txt")
        header = provenance(cfg, "train")
        save_model(model, out, header)
        print(f"rating {r}: {model.num_training_movies} training movies -> {out}")
        if model.empty_genres:
            names = ", ".join(model.genre_names[g] for g in model.empty_genres)
            print(f"rating {r}: genres without training movies: {names}")
        if args.export_csv:
            stem = out.with_suffix("")
            write_user_prob_csv(model, f"{stem}_user_prob.csv", header)
            write_movie_likelihood_csv(
                model, ds.indicator(r), ds.movies, f"{stem}_movie_likelihood.csv", log=True, header=header
            )
    return EXIT_OK


def cmd_predict(args, cfg: RunConfig) -> int:
    model = load_model(args.model)
    ds = _load_dataset(cfg)
    if ds.num_users != model.num_users or ds.genre_names != model.genre_names:
        raise ContractError("model and dataset disagree on users or genres")
    indicator = ds.indicator(model.rating_value)
    corr = compute_correlation(ds.genres, None, cfg.correlation_mode)
    movies = _parse_movies(args.movies) or ds.movies.tolist()
    names = model.genre_names
    failures = 0
    if args.format == "csv":
        print("movie_id,predicted,probability,outcome," + ",".join(f"p_{n}" for n in names))
    for m in movies:
        if not 1 <= m <= ds.num_movies or not ds.genres.present[m - 1]:
            failures += 1
            print(f"error: movie {m}: unknown movie", file=sys.stderr)
            continue
        post = posterior(model, indicator.feature_vector(m))
        g = post.best
        if ds.genres.genre_counts[m - 1] == 0:
            outcome = "unlabeled"
        else:
            truth = ds.genres.membership(m)
            if g in truth:
                outcome = "exact"
            elif np.any(corr.values[g, sorted(truth)] > cfg.threshold):
                outcome = "similar"
            else:
                outcome = "wrong"
        probs = post.probabilities
        if args.format == "csv":
            print(f"{m},{names[g]},{float(probs[g])!r},{outcome}," + ",".join(repr(float(p)) for p in probs))
        else:
            top = np.argsort(-probs, kind="stable")[:3]
            dist = ", ".join(f"{names[i]}={probs[i]:.3f}" for i in top)
            print(f"movie {m}: {names[g]} (p={probs[g]:.3f}) [{outcome}] {dist}")
    if movies and failures == len(movies):
        return EXIT_CONTRACT
    return EXIT_OK


def _write_plots(report: EvaluationReport, out_dir: Path, fmt: str, header) -> list[Path]:
    written = []
    by_rating: dict[int, list] = {}
    for c in report.cells:
        by_rating.setdefault(c.rating, []).append(c)
    for r, cells in by_rating.items():
        cells.sort(key=lambda c: c.train_fraction)
        path = out_dir / f"learning_curve_r{r}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in header:
                fh.write(f"# {line}\n")
            fh.write("train_fraction,exact_mean,exact_std,similar_mean,similar_std\n")
            for c in cells:
                fh.write(f"{c.train_fraction!r},{c.exact_mean!r},{c.exact_std!r},{c.similar_mean!r},{c.similar_std!r}\n")
        written.append(path)
        if fmt != "none":
            written.extend(_render_plot(r, cells, out_dir, fmt))
    return written


def _render_plot(r, cells, out_dir: Path, fmt: str) -> list[Path]:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib not installed; skipping plot images")
        return []
    x = [100 * c.train_fraction for c in cells]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(x, [100 * c.exact_mean for c in cells], yerr=[100 * c.exact_std for c in cells],
                marker="o", capsize=3, label="exact")
    ax.errorbar(x, [100 * c.similar_mean for c in cells], yerr=[100 * c.similar_std for c in cells],
                marker="s", capsize=3, label="exact w/ similar")
    ax.set_xlabel("training set size (%)")
    ax.set_ylabel("prediction rate (%)")
    ax.set_title(f"rating r = {r}")
    ax.legend(loc="lower right")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = out_dir / f"learning_curve_r{r}.{fmt}"
    meta = {"Software": None} if fmt == "png" else {"Date": None}
    fig.savefig(path, metadata=meta)
    plt.close(fig)
    return [path]


def cmd_evaluate(args, cfg: RunConfig) -> int:
    ds = _load_dataset(cfg)
    out_dir = Path(args.output or cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = provenance(cfg, "evaluate")
    done = []

    def on_cell(summary, runs):
        done.append(runs)
        logger.info(
            "r=%d f=%.2f exact=%.3f±%.3f similar=%.3f±%.3f",
            summary.rating, summary.train_fraction, summary.exact_mean,
            summary.exact_std, summary.similar_mean, summary.similar_std,
        )

    try:
        report = learning_curve(
            ds,
            ratings=cfg.ratings,
            fractions=cfg.fractions,
            repetitions=cfg.repetitions,
            seed=cfg.seed,
            options=cfg.eval_options(),
            jobs=cfg.jobs,
            on_cell=on_cell,
        )
    except KeyboardInterrupt:
        partial = EvaluationReport(
            tuple(summarize(r) for r in done),
            tuple(x for r in done for x in r),
            cfg.seed,
            cfg.eval_options(),
        )
        total = len(cfg.ratings) * len(cfg.fractions)
        path = out_dir / "evaluation.csv"
        partial.to_csv(path, header + [f"partial: interrupted after {len(done)} of {total} cells"])
        print(f"interrupted; wrote {len(done)} completed cell(s) to {path}", file=sys.stderr)
        return EXIT_INTERRUPTED

    report.to_csv(out_dir / "evaluation.csv", header)
    if args.raw:
        report.raw_to_csv(out_dir / "evaluation_runs.csv", header)
    _write_plots(report, out_dir, cfg.plot, header)
    print("rating  train%   exact            exact w/ similar   zero-feature")
    for c in report.cells:
        print(
            f"{c.rating:>6}  {100 * c.train_fraction:5.1f}   "
            f"{100 * c.exact_mean:5.1f} ± {100 * c.exact_std:4.1f}     "
            f"{100 * c.similar_mean:5.1f} ± {100 * c.similar_std:4.1f}       {c.zero_feature_count}"
        )
    print(f"wrote {out_dir / 'evaluation.csv'}")
    return EXIT_OK


def cmd_correlate(args, cfg: RunConfig) -> int:
    ds = _load_dataset(cfg)
    if cfg.correlation_source == "full":
        movies = None
    else:
        spec = SplitSpec(args.train_fraction, cell_seed(cfg.seed, 0, args.train_fraction), args.repetition)
        movies, _ = split(ds.movies, spec)
    matrix = compute_correlation(ds.genres, movies, cfg.correlation_mode)
    out = _out_path(cfg, args.output, "genre_correlation.csv")
    matrix.to_csv(out, provenance(cfg, "correlate"))
    print(f"wrote {matrix.size}x{matrix.size} correlation matrix to {out}")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "correlate": cmd_correlate,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"genrebayes: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"genrebayes: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        name = exc.filename if exc.filename is not None else exc
        print(f"genrebayes: cannot read {name}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"genrebayes: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ContractError, DatasetValidationError, TrainingError, GenreBayesError) as exc:
        print(f"genrebayes: error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
