"""Random-split evaluation and learning curves.

Seeding
-------
A master seed fans out to one 64-bit seed per (rating, train fraction)
cell via :func:`cell_seed`; repetition ``k`` of that cell draws its split
from ``numpy.random.default_rng([cell_seed, k])``. Any single repetition
can therefore be re-run in isolation with
``split(movies, SplitSpec(f, cell_seed(master, r, f), k))``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .correlation import DEFAULT_THRESHOLD, GenreCorrelationMatrix, compute_correlation
from .dataset import RATING_VALUES, Dataset
from .errors import ContractError
from .model import argmax_lowest, batch_log_scores, train_preference_model

TEST_FRACTION = 0.2
DEFAULT_REPETITIONS = 20
DEFAULT_FRACTIONS = (0.01,) + tuple(round(0.05 * k, 2) for k in range(1, 17))
CORRELATION_SOURCES = ("training", "full")

_SIZE_EPS = 1e-9


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int
    repetition_index: int = 0
    test_fraction: float = TEST_FRACTION
    fixed_test: bool = False


def _subset_size(fraction: float, n: int) -> int:
    # tolerate binary representation error, e.g. 0.15 * 1680 = 251.99999999999997
    return int(math.floor(fraction * n + _SIZE_EPS))


def split(movies: Iterable[int], spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Draw disjoint (train, test) movie sets; both are returned sorted.

    The test set is ``floor(test_fraction * |M|)`` movies; the training set
    is ``floor(train_fraction * |M|)`` movies from what remains. With
    ``fixed_test`` the test set depends only on ``spec.seed``, so every
    repetition shares it.
    """
    f = spec.train_fraction
    if not (0 < f <= 1) or f + spec.test_fraction > 1 + _SIZE_EPS:
        raise ContractError(
            f"train fraction {f} must lie in (0, {1 - spec.test_fraction:g}]"
        )
    if not isinstance(movies, np.ndarray):
        movies = list(movies)
    pool = np.unique(np.asarray(movies, dtype=np.int64))
    n = len(pool)
    n_test = _subset_size(spec.test_fraction, n)
    n_train = min(_subset_size(f, n), n - n_test)
    if n_train == 0:
        raise ContractError(f"train fraction {f} selects no movies out of {n}")
    rng = np.random.default_rng([spec.seed, spec.repetition_index])
    if spec.fixed_test:
        test_perm = np.random.default_rng([spec.seed]).permutation(pool)
        test = test_perm[:n_test]
        rest = test_perm[n_test:]
        train = rng.permutation(rest)[:n_train]
    else:
        perm = rng.permutation(pool)
        test = perm[:n_test]
        train = perm[n_test : n_test + n_train]
    train.sort()
    test.sort()
    return train, test


def cell_seed(master_seed: int, rating: int, fraction: float) -> int:
    """64-bit seed for one (rating, fraction) cell; fraction is keyed in basis points."""
    state = np.random.SeedSequence([master_seed, rating, int(round(fraction * 10_000))])
    lo, hi = state.generate_state(2, np.uint32)
    return (int(hi) << 32) | int(lo)


@dataclass(frozen=True)
class EvalOptions:
    threshold: float = DEFAULT_THRESHOLD
    prior_mode: str = "empirical"
    smoothing: str = "paper"
    correlation_source: str = "training"
    correlation_mode: str = "membership"
    fixed_test: bool = False

    def __post_init__(self):
        if self.correlation_source not in CORRELATION_SOURCES:
            raise ValueError(f"correlation_source must be one of {CORRELATION_SOURCES}")
        if np.isnan(self.threshold):
            raise ContractError("threshold must be a number")


@dataclass(frozen=True)
class AccuracyPair:
    exact: float
    with_similar: float
    num_test: int
    num_exact: int
    num_similar: int
    num_wrong: int
    num_zero_feature: int


def evaluate_once(
    dataset: Dataset,
    r: int,
    spec: SplitSpec,
    threshold: float | None = None,
    options: EvalOptions | None = None,
    *,
    correlation: GenreCorrelationMatrix | None = None,
) -> AccuracyPair:
    """Draw the split described by ``spec`` and score it with :func:`score_split`."""
    train, test = split(dataset.movies, spec)
    return score_split(dataset, r, train, test, threshold, options, correlation=correlation)


def score_split(
    dataset: Dataset,
    r: int,
    train: np.ndarray,
    test: np.ndarray,
    threshold: float | None = None,
    options: EvalOptions | None = None,
    *,
    correlation: GenreCorrelationMatrix | None = None,
) -> AccuracyPair:
    """Train on ``train`` and score every movie of ``test`` for rating ``r``.

    A prediction is exact when it is one of the movie's genres; otherwise it
    is similar when it correlates above the threshold with one of them.
    ``correlation`` overrides the matrix normally derived from the options.
    """
    options = options or EvalOptions()
    if threshold is None:
        threshold = options.threshold
    if r not in RATING_VALUES:
        raise ContractError(f"rating must be one of {RATING_VALUES}")
    train = np.asarray(train, dtype=np.int64)
    test = np.asarray(test, dtype=np.int64)
    if len(test) == 0:
        raise ContractError("test set is empty")
    if np.intersect1d(train, test).size:
        raise ContractError("train and test sets overlap")
    indicator = dataset.indicator(r)
    model = train_preference_model(
        indicator,
        dataset.genres,
        train,
        prior_mode=options.prior_mode,
        smoothing=options.smoothing,
    )
    if correlation is None:
        source = train if options.correlation_source == "training" else None
        correlation = compute_correlation(dataset.genres, source, options.correlation_mode)

    rows = indicator.rows(test)
    pred = argmax_lowest(batch_log_scores(model, rows))
    truth = dataset.genres.flags[test - 1]
    exact = truth[np.arange(len(test)), pred]
    with np.errstate(invalid="ignore"):
        correlated = correlation.values[pred] > threshold
    similar = ~exact & np.any(correlated & truth, axis=1)
    n = len(test)
    n_exact = int(exact.sum())
    n_similar = int(similar.sum())
    return AccuracyPair(
        exact=n_exact / n,
        with_similar=(n_exact + n_similar) / n,
        num_test=n,
        num_exact=n_exact,
        num_similar=n_similar,
        num_wrong=n - n_exact - n_similar,
        num_zero_feature=int(np.count_nonzero(np.diff(rows.indptr) == 0)),
    )


@dataclass(frozen=True)
class RunRecord:
    rating: int
    train_fraction: float
    repetition: int
    seed: int
    result: AccuracyPair


@dataclass(frozen=True)
class CellSummary:
    rating: int
    train_fraction: float
    repetitions: int
    exact_mean: float
    exact_std: float
    similar_mean: float
    similar_std: float
    zero_feature_count: int  # summed over repetitions


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    a = np.asarray(values, dtype=np.float64)
    mean = float(a.mean())
    std = float(a.std(ddof=1)) if len(a) > 1 else 0.0
    return mean, std


def summarize(runs: Sequence[RunRecord]) -> CellSummary:
    first = runs[0]
    exact_mean, exact_std = _mean_std([x.result.exact for x in runs])
    sim_mean, sim_std = _mean_std([x.result.with_similar for x in runs])
    return CellSummary(
        rating=first.rating,
        train_fraction=first.train_fraction,
        repetitions=len(runs),
        exact_mean=exact_mean,
        exact_std=exact_std,
        similar_mean=sim_mean,
        similar_std=sim_std,
        zero_feature_count=sum(x.result.num_zero_feature for x in runs),
    )


REPORT_COLUMNS = (
    "rating",
    "train_fraction",
    "repetitions",
    "exact_mean",
    "exact_std",
    "similar_mean",
    "similar_std",
    "zero_feature_count",
)

RAW_COLUMNS = (
    "rating",
    "train_fraction",
    "repetition",
    "seed",
    "num_test",
    "num_exact",
    "num_similar",
    "num_wrong",
    "num_zero_feature",
    "exact",
    "with_similar",
)


def _write_header(fh, header: Sequence[str]) -> None:
    for line in header:
        fh.write(f"# {line}\n")


@dataclass(frozen=True)
class EvaluationReport:
    cells: tuple[CellSummary, ...]
    runs: tuple[RunRecord, ...]
    master_seed: int
    options: EvalOptions
    config: dict = field(default_factory=dict)

    def cell(self, rating: int, fraction: float) -> CellSummary:
        for c in self.cells:
            if c.rating == rating and math.isclose(c.train_fraction, fraction, abs_tol=1e-12):
                return c
        raise KeyError((rating, fraction))

    def to_csv(self, path, header: Sequence[str] = ()) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            _write_header(fh, header)
            fh.write(",".join(REPORT_COLUMNS) + "\n")
            for c in self.cells:
                fh.write(
                    f"{c.rating},{c.train_fraction!r},{c.repetitions},"
                    f"{c.exact_mean!r},{c.exact_std!r},{c.similar_mean!r},{c.similar_std!r},"
                    f"{c.zero_feature_count}\n"
                )

    def raw_to_csv(self, path, header: Sequence[str] = ()) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            _write_header(fh, header)
            fh.write(",".join(RAW_COLUMNS) + "\n")
            for x in self.runs:
                a = x.result
                fh.write(
                    f"{x.rating},{x.train_fraction!r},{x.repetition},{x.seed},"
                    f"{a.num_test},{a.num_exact},{a.num_similar},{a.num_wrong},"
                    f"{a.num_zero_feature},{a.exact!r},{a.with_similar!r}\n"
                )


def _run_cell(dataset, r, fraction, repetitions, master_seed, options, correlation):
    seed = cell_seed(master_seed, r, fraction)
    runs = []
    for k in range(repetitions):
        spec = SplitSpec(fraction, seed, k, fixed_test=options.fixed_test)
        result = evaluate_once(dataset, r, spec, options=options, correlation=correlation)
        runs.append(RunRecord(r, fraction, k, seed, result))
    return runs


def learning_curve(
    dataset: Dataset,
    ratings: Iterable[int] = RATING_VALUES,
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    repetitions: int = DEFAULT_REPETITIONS,
    seed: int = 0,
    threshold: float | None = None,
    options: EvalOptions | None = None,
    *,
    jobs: int = 1,
    on_cell: Callable[[CellSummary, list[RunRecord]], None] | None = None,
) -> EvaluationReport:
    """Accuracy (mean and sample std over repetitions) per (rating, training fraction)."""
    options = options or EvalOptions()
    if threshold is not None:
        options = EvalOptions(**{**options.__dict__, "threshold": threshold})
    ratings = list(ratings)
    fractions = list(fractions)
    if repetitions < 1:
        raise ContractError("repetitions must be at least 1")
    for r in ratings:
        if r not in RATING_VALUES:
            raise ContractError(f"rating must be one of {RATING_VALUES}")
    for f in fractions:
        if not (0 < f <= 1 - TEST_FRACTION + _SIZE_EPS):
            raise ContractError(f"train fraction {f} must lie in (0, 0.8]")

    correlation = None
    if options.correlation_source == "full":
        correlation = compute_correlation(dataset.genres, None, options.correlation_mode)
    for r in ratings:
        dataset.indicator(r)  # build shared matrices before any fan-out

    cells = [(r, f) for r in ratings for f in fractions]

    def work(cell):
        return _run_cell(dataset, cell[0], cell[1], repetitions, seed, options, correlation)

    summaries, all_runs = [], []

    def collect(runs):
        summary = summarize(runs)
        summaries.append(summary)
        all_runs.extend(runs)
        if on_cell is not None:
            on_cell(summary, runs)

    if jobs <= 1:
        for cell in cells:
            collect(work(cell))
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            # map preserves submission order, so output is independent of scheduling
            for runs in pool.map(work, cells):
                collect(runs)

    return EvaluationReport(tuple(summaries), tuple(all_runs), seed, options)
