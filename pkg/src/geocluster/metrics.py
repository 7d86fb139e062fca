"""Partition scoring against ground-truth labels, plus contact-network
diagnostics.

Purity assigns every community its plurality label and reports the fraction
of individuals matching it. The z-Rand score standardizes w, the number of
pairs that share both a label and a community, by its mean and standard
deviation under a hypergeometric null with the observed pair counts.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .graph import SocialMatrix


class LengthMismatch(DataError):
    pass


class DegenerateCounts(DataError):
    pass


@dataclass(frozen=True)
class PairCounts:
    """Pair-level contingency totals: M pairs overall, M1 co-clustered,
    M2 co-labeled, w both."""

    M: int
    M1: int
    M2: int
    w: int


def _as_labels(partition) -> np.ndarray:
    return np.asarray(getattr(partition, "assignment", partition))


def _check_lengths(labels, assignment) -> tuple[np.ndarray, np.ndarray]:
    lab = np.asarray(labels)
    assign = _as_labels(assignment)
    if lab.size == 0:
        raise LengthMismatch("empty label vector")
    if lab.shape != assign.shape:
        raise LengthMismatch(
            f"labels have length {lab.size}, partition {assign.size}"
        )
    return lab, assign


def plurality_label(members) -> str:
    """Most frequent label in a community; ties break toward the
    lexicographically smallest label so repeated runs report identically."""
    tally = Counter(np.asarray(members).tolist())
    best = max(tally.values())
    return min(lab for lab, cnt in tally.items() if cnt == best)


def purity(labels, partition) -> float:
    """Fraction of individuals matching their community's plurality label."""
    lab, assign = _check_lengths(labels, partition)
    correct = 0
    for c in np.unique(assign):
        tally = Counter(lab[assign == c].tolist())
        correct += max(tally.values())
    return correct / lab.size


def _comb2(v: int) -> int:
    return int(v) * (int(v) - 1) // 2


def pair_counts(labels, partition) -> PairCounts:
    """Exact combinatorial pair counts from the contingency table."""
    lab, assign = _check_lengths(labels, partition)
    n = lab.size
    m1 = sum(_comb2(c) for c in Counter(assign.tolist()).values())
    m2 = sum(_comb2(c) for c in Counter(lab.tolist()).values())
    cells = Counter(zip(assign.tolist(), lab.tolist()))
    w = sum(_comb2(c) for c in cells.values())
    return PairCounts(M=_comb2(n), M1=m1, M2=m2, w=w)


def z_rand(labels, partition) -> float:
    """Standardized count of co-clustered co-labeled pairs.

    z = (w - M1*M2/M) / sigma_w with the hypergeometric variance
    sigma_w^2 = (M1*M2/M) * (1 - M1/M) * (M - M2) / (M - 1); the expression
    is symmetric in (M1, M2), so swapping labels and partition leaves z
    unchanged.
    """
    counts = pair_counts(labels, partition)
    m, m1, m2, w = counts.M, counts.M1, counts.M2, counts.w
    if m <= 1:
        raise DegenerateCounts("need more than one pair to standardize w")
    mean_w = m1 * m2 / m
    var_w = mean_w * (1.0 - m1 / m) * (m - m2) / (m - 1)
    if var_w <= 0.0:
        raise DegenerateCounts(
            f"w has zero variance under the null (M={m}, M1={m1}, M2={m2})"
        )
    return (w - mean_w) / math.sqrt(var_w)


@dataclass(frozen=True)
class SocialDiagnostics:
    """Contact-network summary.

    degree_std uses the sample convention (n-1 denominator). intra_fraction
    is None when there are no contacts at all.
    """

    n: int
    n_contacts: int
    degree_mean: float
    degree_std: float
    degree_max: int
    n_isolates: int
    isolate_fraction: float
    intra_fraction: float | None
    degrees: tuple[int, ...] = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "n_contacts": self.n_contacts,
            "degree_mean": self.degree_mean,
            "degree_std": self.degree_std,
            "degree_max": self.degree_max,
            "n_isolates": self.n_isolates,
            "isolate_fraction": self.isolate_fraction,
            "intra_fraction": self.intra_fraction,
        }


def diagnostics(social: SocialMatrix, labels) -> SocialDiagnostics:
    """Degree statistics, isolate counts, and the intra-group contact share."""
    lab = np.asarray(labels)
    if lab.size != social.n:
        raise LengthMismatch("labels do not match matrix size")
    deg = social.degrees()
    n = social.n
    intra: float | None = None
    if social.n_contacts:
        same = sum(1 for i, j in social.pairs if lab[i] == lab[j])
        intra = same / social.n_contacts
    return SocialDiagnostics(
        n=n,
        n_contacts=social.n_contacts,
        degree_mean=float(deg.mean()) if n else 0.0,
        degree_std=float(deg.std(ddof=1)) if n > 1 else 0.0,
        degree_max=int(deg.max()) if n else 0,
        n_isolates=int((deg == 0).sum()),
        isolate_fraction=float((deg == 0).mean()) if n else 0.0,
        intra_fraction=intra,
        degrees=tuple(int(v) for v in deg),
    )
