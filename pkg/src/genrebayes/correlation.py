"""Genre co-occurrence correlation and the similar-genre acceptance rule."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dataset import GenreAssignment
from .errors import ContractError

DEFAULT_THRESHOLD = 0.1
CORRELATION_MODES = ("membership", "weights")


@dataclass(frozen=True, eq=False)
class GenreCorrelationMatrix:
    """Pearson correlations between genre columns.

    Entries involving a genre with zero variance over the movie subset are
    NaN and never count as correlated.
    """

    values: np.ndarray
    genre_names: tuple[str, ...]

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "genre_names", tuple(self.genre_names))

    def __getitem__(self, key):
        return self.values[key]

    @property
    def size(self) -> int:
        return len(self.genre_names)

    def to_csv(self, path, header: Sequence[str] = ()) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in header:
                fh.write(f"# {line}\n")
            fh.write("genre," + ",".join(_csv(n) for n in self.genre_names) + "\n")
            for name, row in zip(self.genre_names, self.values):
                fh.write(_csv(name) + "," + ",".join(_fmt(x) for x in row) + "\n")


def _fmt(x: float) -> str:
    return "nan" if np.isnan(x) else repr(float(x))


def _csv(value: str) -> str:
    if any(c in value for c in ',"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def compute_correlation(
    assignment: GenreAssignment,
    movie_subset: Iterable[int] | None = None,
    mode: str = "membership",
) -> GenreCorrelationMatrix:
    """Correlate genre indicator columns across ``movie_subset`` (default: every labeled movie).

    ``mode="weights"`` correlates the 1/N weight columns instead of 0/1 membership.
    """
    if mode not in CORRELATION_MODES:
        raise ValueError(f"mode must be one of {CORRELATION_MODES}")
    if movie_subset is None:
        movies = assignment.labeled_movies
    else:
        if not isinstance(movie_subset, np.ndarray):
            movie_subset = list(movie_subset)
        movies = np.unique(np.asarray(movie_subset, dtype=np.int64))
    if len(movies) == 0:
        raise ContractError("movie subset is empty")
    if movies[0] < 1 or movies[-1] > assignment.num_movies:
        raise KeyError("movie subset references unknown movie ids")
    if mode == "membership":
        # integer co-occurrence counts keep the result exact and order-free
        x = assignment.flags[movies - 1].astype(np.int64)
    else:
        x = assignment.weights[movies - 1]
    n = len(movies)
    sums = x.sum(axis=0)
    scaled_cov = n * (x.T @ x) - np.outer(sums, sums)
    ss = np.diag(scaled_cov).astype(np.float64)
    live = ss > (0 if mode == "membership" else 1e-12 * n * n)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = scaled_cov / np.sqrt(np.outer(ss, ss))
    c = np.clip(c, -1.0, 1.0)
    c[~live, :] = np.nan
    c[:, ~live] = np.nan
    idx = np.flatnonzero(live)
    c[idx, idx] = 1.0
    return GenreCorrelationMatrix(c, assignment.genre_names)


def is_similar(
    matrix: GenreCorrelationMatrix,
    predicted: int,
    true_set: Iterable[int],
    threshold: float = DEFAULT_THRESHOLD,
) -> bool:
    """True iff the prediction correlates with some true genre above ``threshold`` (strictly)."""
    if np.isnan(threshold) or threshold == -np.inf:
        raise ContractError("threshold must be a number or +inf")
    n = matrix.size
    genres = list(true_set)
    for g in [predicted, *genres]:
        if not 0 <= int(g) < n:
            raise KeyError(f"unknown genre index {g}")
    if not genres:
        return False
    row = matrix.values[int(predicted), genres]
    # NaN comparisons are False, so undefined correlations never accept
    return bool(np.any(row > threshold))
