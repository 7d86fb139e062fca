"""Geosocial weight matrix construction.

The combined similarity between two individuals blends a binary social
contact indicator with a Gaussian kernel of the planar distance between
their mean locations:

    W[i, j] = alpha * S[i, j] + (1 - alpha) * exp(-dist(i, j)**2 / sigma**2)

with the convention S[i, i] = 1, so W has a unit diagonal. The strength
vector d (d[i] = sum_j W[i, j], diagonal included) defines the
row-stochastic normalized adjacency D^-1 W used downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError


class InvalidAlpha(DataError):
    pass


class InvalidSigma(DataError):
    pass


class NoContacts(DataError):
    pass


class ZeroScale(DataError):
    pass


class ZeroStrength(DataError):
    pass


@dataclass(frozen=True)
class Individual:
    """A point-located person: opaque id, planar coordinates in meters,
    optional ground-truth group label."""

    id: str
    x: float
    y: float
    gang: str | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DataError(f"non-finite location for individual {self.id!r}")


@dataclass(frozen=True)
class SocialMatrix:
    """Sparse symmetric binary contact matrix.

    Stored as unordered index pairs (i < j); the diagonal is implicitly 1
    and never stored. Duplicate records collapse to a single pair.
    """

    n: int
    pairs: frozenset[tuple[int, int]]

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "SocialMatrix":
        if n < 0:
            raise DataError("negative matrix size")
        canon = set()
        for i, j in pairs:
            i, j = int(i), int(j)
            if i == j:
                raise DataError(f"self-contact for index {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise DataError(f"contact pair ({i}, {j}) out of range for n={n}")
            canon.add((i, j) if i < j else (j, i))
        return cls(n=n, pairs=frozenset(canon))

    @property
    def n_contacts(self) -> int:
        return len(self.pairs)

    def to_dense(self) -> np.ndarray:
        s = np.zeros((self.n, self.n))
        for i, j in self.pairs:
            s[i, j] = s[j, i] = 1.0
        np.fill_diagonal(s, 1.0)
        return s

    def degrees(self) -> np.ndarray:
        """Contact degree per individual, self-loops excluded."""
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.pairs:
            deg[i] += 1
            deg[j] += 1
        return deg


@dataclass(eq=False)
class GeoSocialGraph:
    """Dense symmetric geosocial weight matrix with its strength vector."""

    W: np.ndarray
    d: np.ndarray = field(repr=False)
    alpha: float
    sigma: float

    @property
    def n(self) -> int:
        return self.W.shape[0]


def locations(individuals: Sequence[Individual]) -> np.ndarray:
    """Stack mean locations into an (n, 2) float array."""
    return np.array([(p.x, p.y) for p in individuals], dtype=float)


def contact_distances(individuals: Sequence[Individual], social: SocialMatrix) -> np.ndarray:
    """Euclidean distance for every contact pair, in a fixed (sorted-pair) order."""
    xy = locations(individuals)
    pairs = sorted(social.pairs)
    if not pairs:
        return np.zeros(0)
    idx = np.array(pairs, dtype=int)
    diff = xy[idx[:, 0]] - xy[idx[:, 1]]
    return np.hypot(diff[:, 0], diff[:, 1])


def compute_sigma(individuals: Sequence[Individual], social: SocialMatrix) -> float:
    """Geographic length scale: mean contact-pair distance plus one standard
    deviation (population convention, divide by the pair count)."""
    dist = contact_distances(individuals, social)
    if dist.size == 0:
        raise NoContacts("cannot derive a length scale without contact pairs")
    sigma = float(dist.mean() + dist.std())
    if sigma == 0.0:
        raise ZeroScale("all contact pairs are co-located; length scale undefined")
    return sigma


def build_weight_matrix(
    individuals: Sequence[Individual],
    social: SocialMatrix,
    alpha: float,
    sigma: float,
) -> GeoSocialGraph:
    """Assemble W = alpha*S + (1-alpha)*K with K the Gaussian distance kernel.

    Computed as K + alpha*(S - K), which is algebraically identical and keeps
    the collapse cases exact in floating point: alpha=0 returns K bit-for-bit,
    alpha=1 zeroes non-contact entries exactly, and a co-located contact pair
    gets weight exactly 1 for any alpha.
    """
    if not (0.0 <= alpha <= 1.0):
        raise InvalidAlpha(f"alpha must lie in [0, 1], got {alpha}")
    if not (sigma > 0.0) or not math.isfinite(sigma):
        raise InvalidSigma(f"sigma must be a positive finite length, got {sigma}")
    n = len(individuals)
    xy = locations(individuals)
    dx = xy[:, 0:1] - xy[:, 0:1].T
    dy = xy[:, 1:2] - xy[:, 1:2].T
    kernel = np.exp(-(dx * dx + dy * dy) / (sigma * sigma))
    s = social.to_dense() if n else np.zeros((0, 0))
    w = kernel + alpha * (s - kernel)
    # Both terms are bounded by 1 in exact arithmetic; clamp the <=1ulp
    # float overshoot so the [0, 1] range holds exactly.
    np.minimum(w, 1.0, out=w)
    np.fill_diagonal(w, 1.0)
    return GeoSocialGraph(W=w, d=w.sum(axis=1), alpha=alpha, sigma=sigma)


def normalize(graph: GeoSocialGraph) -> np.ndarray:
    """Row-stochastic normalized adjacency D^-1 W."""
    zero = np.flatnonzero(graph.d == 0.0)
    if zero.size:
        # Unreachable under the unit-diagonal convention; kept as a guard.
        raise ZeroStrength(f"individual {int(zero[0])} has zero strength")
    return graph.W / graph.d[:, None]
