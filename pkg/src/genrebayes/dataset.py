"""MovieLens 100k ingestion.

Parses ``u.data`` / ``u.item`` / ``u.genre``, validates them against the
published dataset statistics and builds the per-rating binary indicator
matrices the Bernoulli model is trained on.

Canonical dataset file
----------------------
``write_dataset`` emits a UTF-8, LF-terminated, tab-separated text file.
Lines starting with ``#`` are comments. Every other line starts with a
record tag::

    format   genrebayes-dataset   1
    counts   <num_users>  <num_movies>  <num_ratings>
    genre    <index>  <name>                                  (0-based, one per retained genre)
    movie    <id>  <unknown flag>  <flags, e.g. 010000...>  <title>  <release>  <video release>  <url>
    rating   <user>  <movie>  <rating>  <timestamp>

``read_dataset`` restores exactly the ``RatingEvents`` and
``GenreAssignment`` that were written.
"""
from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import BinaryIO, Iterator, Sequence, Union

import numpy as np
from scipy import sparse

from .errors import DatasetValidationError, ParseError

logger = logging.getLogger(__name__)

RATING_VALUES = (1, 2, 3, 4, 5)
NUM_RAW_GENRE_FLAGS = 19
NUM_ITEM_META_FIELDS = 4

CANONICAL_USERS = 943
CANONICAL_MOVIES = 1682
CANONICAL_RATINGS = 100_000
CANONICAL_GENRES = 18
MIN_RATINGS_PER_USER = 20

DATASET_FORMAT = "genrebayes-dataset"
DATASET_VERSION = 1

Source = Union[bytes, str, os.PathLike, BinaryIO]


def _open_lines(source: Source) -> tuple[Iterator[str], str | None]:
    """Yield decoded lines (without line terminators) from bytes, a path or a binary stream."""
    name = None
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif isinstance(source, (str, os.PathLike)):
        name = os.fspath(source)
        raw = Path(source).read_bytes()
    else:
        raw = source.read()
        name = getattr(source, "name", None)
        if isinstance(raw, str):
            raw = raw.encode("latin-1")
    # titles in u.item are not valid UTF-8; latin-1 never fails
    text = raw.decode("latin-1")
    return iter(text.splitlines()), name


def _to_int(value: str, what: str, line: int, name) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"non-integer {what} {value!r}", line, name) from None


# ---------------------------------------------------------------------------
# Ratings
# ---------------------------------------------------------------------------


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RatingEvents:
    """Raw ``(user, movie, rating, timestamp)`` records; ids are 1-based."""

    users: np.ndarray
    movies: np.ndarray
    ratings: np.ndarray
    timestamps: np.ndarray
    num_users: int
    num_movies: int

    def __post_init__(self):
        for name in ("users", "movies", "ratings", "timestamps"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            object.__setattr__(self, name, _readonly(arr))
        n = len(self.users)
        if not (len(self.movies) == len(self.ratings) == len(self.timestamps) == n):
            raise ValueError("record columns differ in length")

    def __len__(self) -> int:
        return len(self.users)

    @property
    def records(self) -> list[tuple[int, int, int, int]]:
        return list(
            zip(
                self.users.tolist(),
                self.movies.tolist(),
                self.ratings.tolist(),
                self.timestamps.tolist(),
            )
        )

    def __eq__(self, other):
        if not isinstance(other, RatingEvents):
            return NotImplemented
        return (
            self.num_users == other.num_users
            and self.num_movies == other.num_movies
            and np.array_equal(self.users, other.users)
            and np.array_equal(self.movies, other.movies)
            and np.array_equal(self.ratings, other.ratings)
            and np.array_equal(self.timestamps, other.timestamps)
        )

    def ratings_per_user(self) -> np.ndarray:
        """Counts indexed by user id - 1."""
        return np.bincount(self.users - 1, minlength=self.num_users)[: self.num_users]

    def with_counts(self, num_users: int, num_movies: int) -> "RatingEvents":
        return RatingEvents(
            self.users, self.movies, self.ratings, self.timestamps, num_users, num_movies
        )


def parse_ratings(
    source: Source, num_users: int | None = None, num_movies: int | None = None
) -> RatingEvents:
    """Parse a ``u.data`` style stream: ``user<TAB>item<TAB>rating<TAB>timestamp``.

    ``num_users`` / ``num_movies`` default to the largest id observed.
    Malformed lines raise :class:`ParseError`; a repeated (user, movie)
    pair raises :class:`DatasetValidationError`.
    """
    lines, name = _open_lines(source)
    users, movies, ratings, stamps = [], [], [], []
    seen: dict[tuple[int, int], int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", lineno, name)
        u = _to_int(fields[0], "user id", lineno, name)
        m = _to_int(fields[1], "movie id", lineno, name)
        r = _to_int(fields[2], "rating", lineno, name)
        t = _to_int(fields[3], "timestamp", lineno, name)
        if u < 1 or m < 1:
            raise ParseError("ids must be positive", lineno, name)
        if r not in RATING_VALUES:
            raise ParseError(f"rating out of range: {r}", lineno, name)
        key = (u, m)
        if key in seen:
            raise DatasetValidationError(
                f"duplicate rating for user {u}, movie {m} (lines {seen[key]} and {lineno})"
            )
        seen[key] = lineno
        users.append(u)
        movies.append(m)
        ratings.append(r)
        stamps.append(t)

    max_user = max(users, default=0)
    max_movie = max(movies, default=0)
    if num_users is None:
        num_users = max_user
    elif max_user > num_users:
        raise DatasetValidationError(f"user id {max_user} exceeds num_users={num_users}")
    if num_movies is None:
        num_movies = max_movie
    elif max_movie > num_movies:
        raise DatasetValidationError(f"movie id {max_movie} exceeds num_movies={num_movies}")
    return RatingEvents(
        np.array(users, dtype=np.int64),
        np.array(movies, dtype=np.int64),
        np.array(ratings, dtype=np.int64),
        np.array(stamps, dtype=np.int64),
        num_users,
        num_movies,
    )


def format_ratings(events: RatingEvents) -> bytes:
    """Serialize back to the ``u.data`` layout."""
    out = io.StringIO()
    for u, m, r, t in events.records:
        out.write(f"{u}\t{m}\t{r}\t{t}\n")
    return out.getvalue().encode("ascii")


# ---------------------------------------------------------------------------
# Genres
# ---------------------------------------------------------------------------


def parse_genre_names(source: Source) -> list[str]:
    """Read ``u.genre`` (``name|index``); returns names ordered by index, ``unknown`` included."""
    lines, name = _open_lines(source)
    by_index: dict[int, str] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("|")
        if len(parts) != 2:
            raise ParseError("expected name|index", lineno, name)
        idx = _to_int(parts[1], "genre index", lineno, name)
        if idx in by_index:
            raise ParseError(f"duplicate genre index {idx}", lineno, name)
        by_index[idx] = parts[0]
    if sorted(by_index) != list(range(len(by_index))):
        raise ParseError("genre indices are not contiguous from 0", None, name)
    return [by_index[i] for i in range(len(by_index))]


def positional_genre_names(n: int = NUM_RAW_GENRE_FLAGS - 1) -> tuple[str, ...]:
    return tuple(f"genre{i}" for i in range(1, n + 1))


@dataclass(frozen=True, eq=False)
class GenreAssignment:
    """Per-movie genre membership over the retained genres.

    Rows of ``flags`` are indexed by ``movie_id - 1``. Movies whose only
    raw flag is ``unknown`` stay in the table but are excluded from
    ``labeled_movies``; ids never listed in the item file are marked absent.
    """

    genre_names: tuple[str, ...]
    flags: np.ndarray  # (num_movies, num_genres) bool
    unknown: np.ndarray  # (num_movies,) bool, the dropped raw flag
    present: np.ndarray  # (num_movies,) bool
    metadata: tuple[tuple[str, ...], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "genre_names", tuple(self.genre_names))
        object.__setattr__(self, "flags", _readonly(np.array(self.flags, dtype=bool)))
        object.__setattr__(self, "unknown", _readonly(np.array(self.unknown, dtype=bool)))
        object.__setattr__(self, "present", _readonly(np.array(self.present, dtype=bool)))
        if self.flags.ndim != 2 or self.flags.shape[1] != len(self.genre_names):
            raise ValueError("flags must be (num_movies, num_genres)")
        if self.unknown.shape != (self.num_movies,) or self.present.shape != (self.num_movies,):
            raise ValueError("unknown/present must have one entry per movie")
        if not self.metadata:
            object.__setattr__(self, "metadata", tuple(() for _ in range(self.num_movies)))
        if len(self.metadata) != self.num_movies:
            raise ValueError("metadata must have one entry per movie")

    @property
    def num_movies(self) -> int:
        return self.flags.shape[0]

    @property
    def num_genres(self) -> int:
        return len(self.genre_names)

    @cached_property
    def genre_counts(self) -> np.ndarray:
        """N per movie (0 for unlabeled rows)."""
        return self.flags.sum(axis=1)

    @cached_property
    def weights(self) -> np.ndarray:
        """(num_movies, num_genres) matrix of 1/N membership weights."""
        n = self.genre_counts
        w = np.zeros(self.flags.shape, dtype=np.float64)
        labeled = n > 0
        w[labeled] = self.flags[labeled] / n[labeled, None]
        return _readonly(w)

    @cached_property
    def labeled_movies(self) -> np.ndarray:
        """Ids of movies carrying at least one retained genre."""
        return _readonly(np.flatnonzero(self.present & (self.genre_counts > 0)) + 1)

    @cached_property
    def excluded_movies(self) -> np.ndarray:
        """Ids of listed movies whose only flag is ``unknown``."""
        return _readonly(np.flatnonzero(self.present & (self.genre_counts == 0)) + 1)

    def _row(self, movie: int) -> int:
        movie = int(movie)
        if not (1 <= movie <= self.num_movies) or not self.present[movie - 1]:
            raise KeyError(f"unknown movie {movie}")
        if self.genre_counts[movie - 1] == 0:
            raise KeyError(f"movie {movie} has no retained genre")
        return movie - 1

    def membership(self, movie: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.flags[self._row(movie)]).tolist())

    def movie_weights(self, movie: int) -> dict[int, float]:
        row = self._row(movie)
        return {int(g): float(self.weights[row, g]) for g in np.flatnonzero(self.flags[row])}

    def title(self, movie: int) -> str:
        meta = self.metadata[int(movie) - 1]
        return meta[0] if meta else ""

    def __eq__(self, other):
        if not isinstance(other, GenreAssignment):
            return NotImplemented
        return (
            self.genre_names == other.genre_names
            and np.array_equal(self.flags, other.flags)
            and np.array_equal(self.unknown, other.unknown)
            and np.array_equal(self.present, other.present)
            and self.metadata == other.metadata
        )


def parse_items(source: Source, genre_names: Sequence[str] | None = None) -> GenreAssignment:
    """Parse a ``u.item`` style stream.

    Each line is ``id|title|release|video release|url|<19 genre flags>``;
    the first flag (``unknown``) is dropped. ``genre_names`` may hold either
    the 19 raw names from ``u.genre`` or the 18 retained ones.
    """
    lines, name = _open_lines(source)
    rows: dict[int, tuple[list[bool], bool, tuple[str, ...]]] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split("|")
        if len(fields) < 1 + NUM_ITEM_META_FIELDS + NUM_RAW_GENRE_FLAGS:
            raise ParseError(
                f"expected at least {1 + NUM_ITEM_META_FIELDS + NUM_RAW_GENRE_FLAGS} "
                f"pipe-separated fields, got {len(fields)}",
                lineno,
                name,
            )
        movie = _to_int(fields[0], "movie id", lineno, name)
        if movie < 1:
            raise ParseError("ids must be positive", lineno, name)
        raw_flags = fields[-NUM_RAW_GENRE_FLAGS:]
        for f in raw_flags:
            if f not in ("0", "1"):
                raise ParseError(f"non-binary genre flag {f!r}", lineno, name)
        bits = [f == "1" for f in raw_flags]
        if not any(bits):
            raise DatasetValidationError(f"movie {movie} has no genre (line {lineno})")
        if movie in rows:
            raise DatasetValidationError(f"duplicate movie id {movie} (line {lineno})")
        meta = tuple(fields[1:-NUM_RAW_GENRE_FLAGS])
        rows[movie] = (bits[1:], bits[0], meta)

    num_genres = NUM_RAW_GENRE_FLAGS - 1
    if genre_names is None:
        names = positional_genre_names(num_genres)
    else:
        names = tuple(genre_names)
        if len(names) == NUM_RAW_GENRE_FLAGS:
            names = names[1:]
        if len(names) != num_genres:
            raise ParseError(f"expected {num_genres} genre names, got {len(names)}")

    num_movies = max(rows, default=0)
    flags = np.zeros((num_movies, num_genres), dtype=bool)
    unknown = np.zeros(num_movies, dtype=bool)
    present = np.zeros(num_movies, dtype=bool)
    metadata: list[tuple[str, ...]] = [()] * num_movies
    for movie, (bits, unk, meta) in rows.items():
        flags[movie - 1] = bits
        unknown[movie - 1] = unk
        present[movie - 1] = True
        metadata[movie - 1] = meta
    assignment = GenreAssignment(names, flags, unknown, present, tuple(metadata))
    if len(assignment.excluded_movies):
        logger.warning(
            "excluding %d movie(s) labeled only 'unknown': %s",
            len(assignment.excluded_movies),
            assignment.excluded_movies.tolist(),
        )
    return assignment


# ---------------------------------------------------------------------------
# Indicator matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureVector:
    """One movie's binary rating column for a fixed rating value."""

    rating_value: int
    rated_users: tuple[int, ...]
    num_users: int

    def __post_init__(self):
        users = tuple(sorted(int(u) for u in self.rated_users))
        if users and (users[0] < 1 or users[-1] > self.num_users):
            raise ValueError("rated_users must lie in [1, num_users]")
        if len(set(users)) != len(users):
            raise ValueError("rated_users contains duplicates")
        object.__setattr__(self, "rated_users", users)

    def to_dense(self) -> np.ndarray:
        v = np.zeros(self.num_users, dtype=np.float64)
        v[np.asarray(self.rated_users, dtype=np.int64) - 1] = 1.0
        return v


@dataclass(frozen=True, eq=False)
class IndicatorMatrix:
    """Sparse movies x users 0/1 matrix; entry (m, u) is 1 iff u rated m exactly ``rating_value``."""

    rating_value: int
    matrix: sparse.csr_matrix
    num_users: int
    num_movies: int

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    @property
    def entries(self) -> frozenset[tuple[int, int]]:
        coo = self.matrix.tocoo()
        return frozenset(zip((coo.row + 1).tolist(), (coo.col + 1).tolist()))

    def rows(self, movies: np.ndarray) -> sparse.csr_matrix:
        """Sub-matrix for the given 1-based movie ids, in that order."""
        return self.matrix[np.asarray(movies, dtype=np.int64) - 1]

    def feature_vector(self, movie: int) -> FeatureVector:
        movie = int(movie)
        if not 1 <= movie <= self.num_movies:
            raise KeyError(f"unknown movie {movie}")
        row = self.matrix.indices[self.matrix.indptr[movie - 1] : self.matrix.indptr[movie]]
        return FeatureVector(self.rating_value, tuple((row + 1).tolist()), self.num_users)


def build_indicator_matrix(events: RatingEvents, r: int) -> IndicatorMatrix:
    if r not in RATING_VALUES:
        raise ValueError(f"rating value must be one of {RATING_VALUES}, got {r!r}")
    mask = events.ratings == r
    rows = events.movies[mask] - 1
    cols = events.users[mask] - 1
    m = sparse.csr_matrix(
        (np.ones(len(rows), dtype=np.float64), (rows, cols)),
        shape=(events.num_movies, events.num_users),
    )
    m.sort_indices()
    return IndicatorMatrix(r, m, events.num_users, events.num_movies)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    num_users: int
    num_movies: int
    num_ratings: int
    num_genres: int
    min_ratings_per_user: int
    anomalies: tuple[str, ...]
    excluded_movies: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.anomalies

    def summary(self) -> str:
        return (
            f"{self.num_users} users, {self.num_movies} movies, "
            f"{self.num_ratings} ratings, {self.num_genres} genres"
        )


def validate_dataset(events: RatingEvents, genres: GenreAssignment) -> ValidationReport:
    """Compare against the published MovieLens 100k statistics; never raises."""
    anomalies = []
    num_movies = max(events.num_movies, genres.num_movies)
    expected = (
        ("users", events.num_users, CANONICAL_USERS),
        ("movies", num_movies, CANONICAL_MOVIES),
        ("ratings", len(events), CANONICAL_RATINGS),
        ("genres", genres.num_genres, CANONICAL_GENRES),
    )
    for what, found, want in expected:
        if found != want:
            anomalies.append(f"expected {want} {what}, found {found}")

    per_user = events.ratings_per_user()
    min_per_user = int(per_user.min()) if len(per_user) else 0
    low = np.flatnonzero(per_user < MIN_RATINGS_PER_USER) + 1
    if len(low):
        anomalies.append(
            f"{len(low)} user(s) below {MIN_RATINGS_PER_USER}-rating minimum "
            f"(min {min_per_user}; e.g. user {int(low[0])})"
        )

    if len(events):
        listed = np.zeros(num_movies + 1, dtype=bool)
        listed[1 : genres.num_movies + 1] = genres.present
        missing = np.unique(events.movies[~listed[events.movies]])
        if len(missing):
            anomalies.append(
                f"{len(missing)} rated movie id(s) missing from the item file "
                f"(e.g. {int(missing[0])})"
            )

    return ValidationReport(
        num_users=events.num_users,
        num_movies=num_movies,
        num_ratings=len(events),
        num_genres=genres.num_genres,
        min_ratings_per_user=min_per_user,
        anomalies=tuple(anomalies),
        excluded_movies=tuple(genres.excluded_movies.tolist()),
    )


# ---------------------------------------------------------------------------
# Dataset bundle + canonical file
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ratings and genres sharing one movie id space."""

    events: RatingEvents
    genres: GenreAssignment

    def __post_init__(self):
        if self.events.num_movies > self.genres.num_movies:
            raise DatasetValidationError(
                f"ratings reference movie ids up to {self.events.num_movies} "
                f"but the item file lists only {self.genres.num_movies}"
            )
        if self.events.num_movies < self.genres.num_movies:
            object.__setattr__(
                self,
                "events",
                self.events.with_counts(self.events.num_users, self.genres.num_movies),
            )

    @property
    def num_users(self) -> int:
        return self.events.num_users

    @property
    def num_movies(self) -> int:
        return self.genres.num_movies

    @property
    def genre_names(self) -> tuple[str, ...]:
        return self.genres.genre_names

    @property
    def movies(self) -> np.ndarray:
        """Movies eligible for training and testing."""
        return self.genres.labeled_movies

    def indicator(self, r: int) -> IndicatorMatrix:
        cache = self.__dict__.setdefault("_indicators", {})
        if r not in cache:
            cache[r] = build_indicator_matrix(self.events, r)
        return cache[r]

    def validate(self) -> ValidationReport:
        return validate_dataset(self.events, self.genres)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.events == other.events and self.genres == other.genres


def load_movielens(
    data: Source, items: Source, genre_file: Source | None = None
) -> Dataset:
    """Load raw MovieLens 100k files into a :class:`Dataset`."""
    names = parse_genre_names(genre_file) if genre_file is not None else None
    genres = parse_items(items, names)
    events = parse_ratings(data)
    return Dataset(events, genres)


def load_movielens_dir(directory: str | os.PathLike) -> Dataset:
    directory = Path(directory)
    genre_file = directory / "u.genre"
    return load_movielens(
        directory / "u.data",
        directory / "u.item",
        genre_file if genre_file.exists() else None,
    )


def _check_field(value: str) -> str:
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"field contains a tab or newline: {value!r}")
    return value


def write_dataset(dataset: Dataset, path: str | os.PathLike, header: Sequence[str] = ()) -> None:
    g = dataset.genres
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"format\t{DATASET_FORMAT}\t{DATASET_VERSION}\n")
        fh.write(f"counts\t{dataset.num_users}\t{dataset.num_movies}\t{len(dataset.events)}\n")
        for i, name in enumerate(g.genre_names):
            fh.write(f"genre\t{i}\t{_check_field(name)}\n")
        for row in np.flatnonzero(g.present):
            bits = "".join("1" if b else "0" for b in g.flags[row])
            meta = "\t".join(_check_field(v) for v in g.metadata[row])
            fh.write(f"movie\t{row + 1}\t{int(g.unknown[row])}\t{bits}\t{len(g.metadata[row])}")
            fh.write(f"\t{meta}\n" if meta or g.metadata[row] else "\n")
        for u, m, r, t in dataset.events.records:
            fh.write(f"rating\t{u}\t{m}\t{r}\t{t}\n")


def read_dataset(path: str | os.PathLike) -> Dataset:
    """Inverse of :func:`write_dataset`."""
    name = os.fspath(path)
    counts = None
    version_seen = False
    names: dict[int, str] = {}
    movie_rows = []
    rating_lines = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            tag, *rest = line.split("\t")
            if tag == "format":
                if rest != [DATASET_FORMAT, str(DATASET_VERSION)]:
                    raise ParseError(f"unsupported dataset format {rest!r}", lineno, name)
                version_seen = True
            elif not version_seen:
                raise ParseError("missing format line", lineno, name)
            elif tag == "counts":
                if len(rest) != 3:
                    raise ParseError("bad counts record", lineno, name)
                counts = tuple(_to_int(v, "count", lineno, name) for v in rest)
            elif tag == "genre":
                if len(rest) != 2:
                    raise ParseError("bad genre record", lineno, name)
                names[_to_int(rest[0], "genre index", lineno, name)] = rest[1]
            elif tag == "movie":
                if len(rest) < 4:
                    raise ParseError("bad movie record", lineno, name)
                movie = _to_int(rest[0], "movie id", lineno, name)
                unk = rest[1] == "1"
                bits = rest[2]
                n_meta = _to_int(rest[3], "metadata count", lineno, name)
                meta = tuple(rest[4:]) if n_meta else ()
                if len(meta) != n_meta or set(bits) - {"0", "1"}:
                    raise ParseError("bad movie record", lineno, name)
                movie_rows.append((movie, unk, bits, meta))
            elif tag == "rating":
                rating_lines.append("\t".join(rest))
            else:
                raise ParseError(f"unknown record tag {tag!r}", lineno, name)
    if counts is None:
        raise ParseError("missing counts record", None, name)
    num_users, num_movies, num_ratings = counts
    genre_names = tuple(names[i] for i in range(len(names)))
    flags = np.zeros((num_movies, len(genre_names)), dtype=bool)
    unknown = np.zeros(num_movies, dtype=bool)
    present = np.zeros(num_movies, dtype=bool)
    metadata: list[tuple[str, ...]] = [()] * num_movies
    for movie, unk, bits, meta in movie_rows:
        if len(bits) != len(genre_names) or not 1 <= movie <= num_movies:
            raise ParseError(f"inconsistent movie record for {movie}", None, name)
        flags[movie - 1] = [b == "1" for b in bits]
        unknown[movie - 1] = unk
        present[movie - 1] = True
        metadata[movie - 1] = meta
    genres = GenreAssignment(genre_names, flags, unknown, present, tuple(metadata))
    events = parse_ratings(("\n".join(rating_lines)).encode("ascii"), num_users, num_movies)
    if len(events) != num_ratings:
        raise ParseError(f"expected {num_ratings} ratings, found {len(events)}", None, name)
    return Dataset(events, genres)
