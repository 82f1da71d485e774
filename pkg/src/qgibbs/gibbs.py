"""Exact finite-n Gibbs distributions of the statistic.

For ``q = a/b`` the weight ``f[n][k] * q**k`` is stored scaled by ``b**K``
(``K`` the largest k in the row), so weights of integral tables stay
integers and all sums are big-integer sums.  Every probability, moment and
PGF value is an exact rational; floats are produced only on request from
an exact ratio, which Python rounds correctly.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from typing import Sequence

import numpy as np

from .errors import DomainError
from .series import BivariateTable, exact


def parse_q(q) -> Fraction:
    """Exact positive rational from an int, Fraction, "3/2" or decimal string "1.5"."""
    try:
        value = Fraction(q) if not isinstance(q, float) else Fraction(str(q))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot read q={q!r} as an exact rational") from exc
    if value <= 0:
        raise DomainError(f"q must be positive, got {q}")
    return value


@dataclass(frozen=True)
class GibbsDistribution:
    """Law of the statistic at size ``n``: ``P(X = k) = weight[k] / partition``.

    ``weights`` and ``partition`` share a common positive scale factor, so only
    their ratios are meaningful; ``partition_value`` is the unscaled f_n(q).
    """

    model: str
    n: int
    q: Fraction
    support: tuple
    weights: tuple
    partition: int | Fraction
    partition_value: int | Fraction

    def pmf(self, k: int) -> Fraction:
        try:
            i = self.support.index(k)
        except ValueError:
            return Fraction(0)
        return Fraction(self.weights[i]) / self.partition

    def as_dict(self) -> dict:
        return {k: exact(Fraction(w) / self.partition) for k, w in zip(self.support, self.weights)}

    def probabilities(self) -> list:
        """Floats ``P(X = k)`` over the support, each correctly rounded."""
        return [_ratio_float(w, self.partition) for w in self.weights]

    def cdf_values(self) -> list:
        """Correctly rounded ``P(X <= k)`` over the support."""
        out, acc = [], 0
        for w in self.weights:
            acc += w
            out.append(_ratio_float(acc, self.partition))
        return out

    def moment(self, r: int) -> Fraction:
        return gibbs_moment(self, r)

    def mean(self) -> Fraction:
        return gibbs_moment(self, 1)

    def central_moment(self, r: int) -> Fraction:
        # binomial expansion over integer power sums keeps the inner loop in ints
        mu = Fraction(self.mean())
        raw = [sum(w * k**j for k, w in zip(self.support, self.weights)) for j in range(r + 1)]
        total = sum(math.comb(r, j) * raw[j] * (-mu) ** (r - j) for j in range(r + 1))
        return exact(total / self.partition)


def _ratio_float(a, b) -> float:
    a, b = Fraction(a), Fraction(b)
    return (a.numerator * b.denominator) / (a.denominator * b.numerator)


def _row(table: BivariateTable, n: int) -> dict:
    if n < 0 or n > table.max_n:
        raise DomainError(f"{table.model}: n={n} outside 0..{table.max_n}")
    try:
        return table.row(n)
    except KeyError as exc:
        raise DomainError(str(exc)) from exc


def partition_function(table: BivariateTable, n: int, q) -> int | Fraction:
    """Exact ``f_n(q) = sum_k f[n][k] q**k``."""
    q = parse_q(q)
    row = _row(table, n)
    return exact(sum(v * q**k for k, v in row.items()))


def gibbs_pmf(table: BivariateTable, n: int, q) -> GibbsDistribution:
    q = parse_q(q)
    row = _row(table, n)
    if not row:
        raise DomainError(f"{table.model}: empty row at n={n}, f_n(q) = 0")
    a, b = q.numerator, q.denominator
    top = max(row)
    support = tuple(sorted(row))
    weights = []
    for k in support:
        w = row[k] * a**k * b ** (top - k)
        weights.append(exact(w))
    # clear denominators of rational tables so the weights are integers
    den = math.lcm(*(Fraction(w).denominator for w in weights))
    if den != 1:
        weights = [exact(w * den) for w in weights]
    partition = sum(weights)
    value = exact(Fraction(partition, den) / b**top)
    return GibbsDistribution(table.model, n, q, support, tuple(weights), partition, value)


def gibbs_moment(dist: GibbsDistribution, r: int) -> int | Fraction:
    """Exact ``E(X**r)``."""
    if r < 0:
        raise DomainError("moment order must be nonnegative")
    total = sum(w * k**r for k, w in zip(dist.support, dist.weights))
    return exact(Fraction(total, 1) / dist.partition)


def tilted_pgf(table: BivariateTable, n: int, q, v) -> int | Fraction:
    """Exact ``E(v**X_n(q)) = sum_k pmf(k) v**k``."""
    v = parse_q(v)
    dist = gibbs_pmf(table, n, q)
    total = sum(w * v**k for k, w in zip(dist.support, dist.weights))
    return exact(Fraction(total) / dist.partition)


def sample_statistic(dist: GibbsDistribution, seed: int, count: int) -> list:
    """``count`` i.i.d. draws from the exact pmf, deterministic in ``seed``.

    Uniform integers in ``[0, partition)`` are drawn by rejection from 64-bit
    words of a Philox counter-based generator and mapped through the exact
    cumulative weights, so there is no rounding anywhere.
    """
    if count < 0:
        raise DomainError("count must be nonnegative")
    if count == 0:
        return []
    if len(dist.support) == 1:
        return [dist.support[0]] * count
    weights = [Fraction(w) for w in dist.weights]
    den = math.lcm(*(w.denominator for w in weights))
    cumulative = list(accumulate(int(w * den) for w in weights))
    total = cumulative[-1]
    bits = total.bit_length()
    words = (bits + 63) // 64
    gen = np.random.Generator(np.random.Philox(seed & (2**64 - 1)))
    out = []
    while len(out) < count:
        raw = gen.integers(0, 2**64, size=words, dtype=np.uint64, endpoint=False)
        u = 0
        for w in raw.tolist():
            u = (u << 64) | w
        u >>= words * 64 - bits
        if u >= total:
            continue
        idx = bisect_right(cumulative, u)
        out.append(dist.support[idx])
    return out


def pmf_on_grid(dist: GibbsDistribution) -> tuple:
    """(support, probabilities) as plain lists, the shape limit-law comparisons use."""
    return list(dist.support), dist.probabilities()


def moments_table(dist: GibbsDistribution, orders: Sequence[int]) -> dict:
    return {r: gibbs_moment(dist, r) for r in orders}
