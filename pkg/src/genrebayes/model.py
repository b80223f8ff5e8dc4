"""Multivariate Bernoulli naive Bayes over user-rating indicators.

One :class:`PreferenceModel` is trained per rating value r. For genre g and
user u it holds

    P(u | g, r) = (1 + sum_m v[m, u] * w(g|m)) / (|U| + sum_m w(g|m))

where v is the rating-r indicator matrix restricted to the training movies
and w(g|m) = 1/N for a movie labeled with N genres. A movie's likelihood
runs over all users, raters and non-raters alike; predictions are the
argmax of likelihood times prior.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .dataset import FeatureVector, GenreAssignment, IndicatorMatrix
from .errors import ContractError, ParseError, TrainingError

__all__ = [
    "FeatureVector",
    "PreferenceModel",
    "PosteriorDistribution",
    "genre_weights",
    "estimate_priors",
    "train_preference_model",
    "log_likelihood",
    "log_likelihoods",
    "posterior",
    "predict",
    "predict_batch",
    "save_model",
    "load_model",
    "dump_model",
    "parse_model",
    "write_user_prob_csv",
    "write_movie_likelihood_csv",
]

PRIOR_MODES = ("empirical", "uniform")
SMOOTHING_MODES = ("paper", "textbook")

MODEL_FORMAT = "genrebayes-model"
MODEL_VERSION = 1


def _readonly(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PreferenceModel:
    rating_value: int
    genre_names: tuple[str, ...]
    user_prob: np.ndarray  # (genres, users)
    priors: np.ndarray
    genre_mass: np.ndarray  # sum of training weights per genre
    num_training_movies: int
    smoothing: str = "paper"
    prior_mode: str = "empirical"

    def __post_init__(self):
        object.__setattr__(self, "genre_names", tuple(self.genre_names))
        object.__setattr__(self, "user_prob", _readonly(self.user_prob))
        object.__setattr__(self, "priors", _readonly(self.priors))
        object.__setattr__(self, "genre_mass", _readonly(self.genre_mass))
        p = self.user_prob
        if p.ndim != 2 or p.shape[0] != len(self.genre_names):
            raise ValueError("user_prob must be (num_genres, num_users)")
        if self.priors.shape != (p.shape[0],) or self.genre_mass.shape != (p.shape[0],):
            raise ValueError("priors and genre_mass need one entry per genre")
        if not np.all((p > 0) & (p < 1)):
            raise ValueError("every P(u|g,r) must lie strictly inside (0, 1)")
        log_p = np.log(p)
        log_q = np.log1p(-p)
        with np.errstate(divide="ignore"):
            log_prior = np.log(self.priors)
        object.__setattr__(self, "log_user_prob", _readonly(log_p))
        object.__setattr__(self, "log_complement", _readonly(log_q))
        object.__setattr__(self, "log_priors", _readonly(log_prior))
        # all-absent likelihood and per-user log odds, so a movie costs O(raters)
        object.__setattr__(self, "absent_log_likelihood", _readonly(log_q.sum(axis=1)))
        object.__setattr__(self, "log_odds", _readonly(log_p - log_q))

    @property
    def num_genres(self) -> int:
        return self.user_prob.shape[0]

    @property
    def num_users(self) -> int:
        return self.user_prob.shape[1]

    @property
    def empty_genres(self) -> tuple[int, ...]:
        """Genres with no training mass; their P(u|g,r) is the smoothing floor."""
        return tuple(np.flatnonzero(self.genre_mass == 0).tolist())

    def __eq__(self, other):
        if not isinstance(other, PreferenceModel):
            return NotImplemented
        return (
            self.rating_value == other.rating_value
            and self.genre_names == other.genre_names
            and self.smoothing == other.smoothing
            and self.prior_mode == other.prior_mode
            and self.num_training_movies == other.num_training_movies
            and np.array_equal(self.user_prob, other.user_prob)
            and np.array_equal(self.priors, other.priors)
            and np.array_equal(self.genre_mass, other.genre_mass)
        )


# log scores closer than this (relative) are treated as tied
TIE_TOLERANCE = 1e-12


def argmax_lowest(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax where near-equal scores resolve to the lowest index."""
    scores = np.asarray(scores, dtype=np.float64)
    top = np.max(scores, axis=-1, keepdims=True)
    tol = TIE_TOLERANCE * np.maximum(1.0, np.abs(top))
    return np.argmax(scores >= top - tol, axis=-1)


@dataclass(frozen=True)
class PosteriorDistribution:
    log_scores: np.ndarray
    probabilities: np.ndarray

    @property
    def best(self) -> int:
        return int(argmax_lowest(self.log_scores))


def genre_weights(assignment: GenreAssignment, movie: int) -> dict[int, float]:
    """Dense ``genre index -> 1/N`` map (0.0 for genres the movie lacks)."""
    w = assignment.movie_weights(movie)
    return {g: w.get(g, 0.0) for g in range(assignment.num_genres)}


def _training_rows(assignment: GenreAssignment, training_movies) -> np.ndarray:
    if not isinstance(training_movies, np.ndarray):
        training_movies = list(training_movies)
    movies = np.unique(np.asarray(training_movies, dtype=np.int64))
    if len(movies) == 0:
        raise TrainingError("training set is empty")
    if movies[0] < 1 or movies[-1] > assignment.num_movies:
        raise TrainingError("training set references unknown movie ids")
    rows = movies - 1
    if not np.all(assignment.present[rows] & (assignment.genre_counts[rows] > 0)):
        bad = movies[~(assignment.present[rows] & (assignment.genre_counts[rows] > 0))]
        raise TrainingError(f"training movies without genre weights: {bad[:5].tolist()}")
    return rows


def estimate_priors(
    assignment: GenreAssignment, training_movies: Iterable[int], mode: str = "empirical"
) -> np.ndarray:
    """Genre prior: mean 1/N weight over the training movies, or uniform."""
    if mode not in PRIOR_MODES:
        raise ValueError(f"prior mode must be one of {PRIOR_MODES}")
    rows = _training_rows(assignment, training_movies)
    if mode == "uniform":
        return np.full(assignment.num_genres, 1.0 / assignment.num_genres)
    return assignment.weights[rows].sum(axis=0) / len(rows)


def train_preference_model(
    matrix: IndicatorMatrix,
    assignment: GenreAssignment,
    training_movies: Iterable[int],
    *,
    prior_mode: str = "empirical",
    smoothing: str = "paper",
) -> PreferenceModel:
    """Fit P(u|g,r) on ``training_movies`` for ``matrix.rating_value``.

    ``smoothing="paper"`` adds 1 to the count and |U| to the normalizer;
    ``"textbook"`` uses the usual Bernoulli +1 / +2.
    """
    if smoothing not in SMOOTHING_MODES:
        raise ValueError(f"smoothing must be one of {SMOOTHING_MODES}")
    if matrix.num_movies != assignment.num_movies:
        raise ContractError("indicator matrix and genre assignment disagree on num_movies")
    rows = _training_rows(assignment, training_movies)
    num_users = matrix.num_users
    if smoothing == "paper" and num_users < 2:
        raise TrainingError("paper smoothing needs at least two users to keep P(u|g,r) < 1")

    w = assignment.weights[rows]  # (n, G)
    v = matrix.matrix[rows]  # (n, U) sparse
    counts = np.asarray(v.T @ w).T  # (G, U) weighted rating counts
    mass = w.sum(axis=0)
    denom_base = num_users if smoothing == "paper" else 2.0
    user_prob = (1.0 + counts) / (denom_base + mass)[:, None]
    priors = estimate_priors(assignment, rows + 1, prior_mode)
    return PreferenceModel(
        rating_value=matrix.rating_value,
        genre_names=assignment.genre_names,
        user_prob=user_prob,
        priors=priors,
        genre_mass=mass,
        num_training_movies=len(rows),
        smoothing=smoothing,
        prior_mode=prior_mode,
    )


def _check_features(model: PreferenceModel, features: FeatureVector) -> np.ndarray:
    if features.rating_value != model.rating_value:
        raise ContractError(
            f"feature vector is for rating {features.rating_value}, model for {model.rating_value}"
        )
    if features.num_users != model.num_users:
        raise ContractError(
            f"feature vector has {features.num_users} users, model {model.num_users}"
        )
    return np.asarray(features.rated_users, dtype=np.int64) - 1


def log_likelihoods(model: PreferenceModel, features: FeatureVector) -> np.ndarray:
    """log P(m | g, r) for every genre."""
    idx = _check_features(model, features)
    return model.absent_log_likelihood + model.log_odds[:, idx].sum(axis=1)


def log_likelihood(model: PreferenceModel, features: FeatureVector, genre: int) -> float:
    if not 0 <= genre < model.num_genres:
        raise KeyError(f"unknown genre index {genre}")
    idx = _check_features(model, features)
    return float(model.absent_log_likelihood[genre] + model.log_odds[genre, idx].sum())


def _normalize(log_scores: np.ndarray) -> np.ndarray:
    top = np.max(log_scores, axis=-1, keepdims=True)
    e = np.exp(log_scores - top)
    return e / e.sum(axis=-1, keepdims=True)


def posterior(model: PreferenceModel, features: FeatureVector) -> PosteriorDistribution:
    scores = log_likelihoods(model, features) + model.log_priors
    return PosteriorDistribution(scores, _normalize(scores))


def predict(model: PreferenceModel, features: FeatureVector) -> int:
    """Most probable genre; ties go to the lowest genre index."""
    return posterior(model, features).best


def batch_log_scores(model: PreferenceModel, rows: sparse.spmatrix) -> np.ndarray:
    """Unnormalized log posteriors for a (movies x users) indicator block."""
    if rows.shape[1] != model.num_users:
        raise ContractError("indicator block has the wrong number of users")
    return np.asarray(rows @ model.log_odds.T) + model.absent_log_likelihood + model.log_priors


def predict_batch(model: PreferenceModel, matrix: IndicatorMatrix, movies) -> np.ndarray:
    """Vectorized :func:`predict` for many movies of one indicator matrix."""
    if matrix.rating_value != model.rating_value:
        raise ContractError("indicator matrix rating differs from the model's")
    return argmax_lowest(batch_log_scores(model, matrix.rows(movies)))


# ---------------------------------------------------------------------------
# Model file
# ---------------------------------------------------------------------------


def dump_model(model: PreferenceModel, header: Sequence[str] = ()) -> str:
    """Line-oriented text form; floats are written with ``repr`` so they reload bit-exact.

    Layout (tab-separated)::

        format      genrebayes-model  1
        rating      <r>
        smoothing   paper|textbook
        prior_mode  empirical|uniform
        shape       <num_genres>  <num_users>  <num_training_movies>
        genre       <index>  <name>  <prior>  <training mass>
        prob        <index>  <P(u_1|g,r)> ... <P(u_|U||g,r)>
    """
    out = io.StringIO()
    for line in header:
        out.write(f"# {line}\n")
    out.write(f"format\t{MODEL_FORMAT}\t{MODEL_VERSION}\n")
    out.write(f"rating\t{model.rating_value}\n")
    out.write(f"smoothing\t{model.smoothing}\n")
    out.write(f"prior_mode\t{model.prior_mode}\n")
    out.write(f"shape\t{model.num_genres}\t{model.num_users}\t{model.num_training_movies}\n")
    for g, name in enumerate(model.genre_names):
        out.write(f"genre\t{g}\t{name}\t{float(model.priors[g])!r}\t{float(model.genre_mass[g])!r}\n")
    for g in range(model.num_genres):
        out.write(f"prob\t{g}\t" + "\t".join(repr(float(x)) for x in model.user_prob[g]) + "\n")
    return out.getvalue()


def parse_model(text: str, name: str | None = None) -> PreferenceModel:
    fields: dict[str, list[str]] = {}
    genres: dict[int, tuple[str, float, float]] = {}
    probs: dict[int, np.ndarray] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        tag, *rest = line.split("\t")
        try:
            if tag == "genre":
                genres[int(rest[0])] = (rest[1], float(rest[2]), float(rest[3]))
            elif tag == "prob":
                probs[int(rest[0])] = np.array([float(x) for x in rest[1:]])
            elif tag in ("format", "rating", "smoothing", "prior_mode", "shape"):
                fields[tag] = rest
            else:
                raise ParseError(f"unknown record tag {tag!r}", lineno, name)
        except (ValueError, IndexError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad {tag} record: {exc}", lineno, name) from None
    if fields.get("format") != [MODEL_FORMAT, str(MODEL_VERSION)]:
        raise ParseError("not a genrebayes model file", None, name)
    try:
        num_genres, num_users, num_train = (int(x) for x in fields["shape"])
        rating = int(fields["rating"][0])
        smoothing = fields["smoothing"][0]
        prior_mode = fields["prior_mode"][0]
    except (KeyError, ValueError, IndexError):
        raise ParseError("incomplete model header", None, name) from None
    if sorted(genres) != list(range(num_genres)) or sorted(probs) != list(range(num_genres)):
        raise ParseError("genre or prob records missing", None, name)
    table = np.vstack([probs[g] for g in range(num_genres)])
    if table.shape != (num_genres, num_users):
        raise ParseError("probability table has the wrong shape", None, name)
    return PreferenceModel(
        rating_value=rating,
        genre_names=tuple(genres[g][0] for g in range(num_genres)),
        user_prob=table,
        priors=np.array([genres[g][1] for g in range(num_genres)]),
        genre_mass=np.array([genres[g][2] for g in range(num_genres)]),
        num_training_movies=num_train,
        smoothing=smoothing,
        prior_mode=prior_mode,
    )


def save_model(model: PreferenceModel, path: str | os.PathLike, header: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_model(model, header))


def load_model(path: str | os.PathLike) -> PreferenceModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), os.fspath(path))


def write_user_prob_csv(model: PreferenceModel, path, header: Sequence[str] = ()) -> None:
    """Genres x users table of P(u|g,r)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("genre," + ",".join(f"u{u}" for u in range(1, model.num_users + 1)) + "\n")
        for g, name in enumerate(model.genre_names):
            fh.write(_csv_field(name) + "," + ",".join(repr(float(x)) for x in model.user_prob[g]) + "\n")


def write_movie_likelihood_csv(
    model: PreferenceModel,
    matrix: IndicatorMatrix,
    movies,
    path,
    *,
    log: bool = False,
    header: Sequence[str] = (),
) -> None:
    """Per-movie P(m|g,r) (or its log) for every genre."""
    movies = np.asarray(movies, dtype=np.int64)
    ll = np.asarray(matrix.rows(movies) @ model.log_odds.T) + model.absent_log_likelihood
    values = ll if log else np.exp(ll)
    prefix = "log_p_" if log else "p_"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("movie_id," + ",".join(_csv_field(prefix + n) for n in model.genre_names) + "\n")
        for m, row in zip(movies.tolist(), values):
            fh.write(f"{m}," + ",".join(repr(float(x)) for x in row) + "\n")


def _csv_field(value: str) -> str:
    if any(c in value for c in ',"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value

