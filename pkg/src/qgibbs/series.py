"""Truncated power series with exact rational coefficients.

Coefficients are kept as Python ``int`` whenever they are integral and as
reduced :class:`fractions.Fraction` otherwise; both are exact rationals and
mix freely under arithmetic.  Every series carries its truncation order
``N`` (inclusive) and binary operations truncate to the smaller order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Mapping

from .errors import DomainError

__all__ = [
    "BivariateTable",
    "Series",
    "catalan_series",
    "exact",
    "series_hadamard",
    "series_mul",
    "series_pow_int",
    "series_recip",
    "series_sqrt",
]


def exact(x) -> Rational:
    """Coerce ``x`` to an exact rational, collapsing integral Fractions to int."""
    if isinstance(x, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, Rational):
        return exact(Fraction(x.numerator, x.denominator))
    if isinstance(x, str):
        return exact(Fraction(x))
    raise TypeError(f"cannot use {type(x).__name__} as an exact coefficient")


@dataclass(frozen=True)
class Series:
    """Power series ``sum c_i z^i`` known exactly for ``i <= order``."""

    coeffs: tuple
    order: int = field(default=-1)

    def __post_init__(self):
        cs = tuple(exact(c) for c in self.coeffs)
        order = self.order if self.order >= 0 else len(cs) - 1
        if order < 0:
            raise ValueError("a series needs at least one coefficient or an order")
        cs = cs[: order + 1] + (0,) * (order + 1 - len(cs))
        object.__setattr__(self, "coeffs", cs)
        object.__setattr__(self, "order", order)

    @classmethod
    def from_function(cls, f, order: int) -> "Series":
        return cls(tuple(f(i) for i in range(order + 1)), order)

    @classmethod
    def one(cls, order: int) -> "Series":
        return cls((1,), order)

    @classmethod
    def z(cls, order: int) -> "Series":
        return cls((0, 1), order)

    def __getitem__(self, i: int):
        if i < 0:
            return 0
        if i > self.order:
            raise IndexError(f"coefficient {i} is beyond truncation order {self.order}")
        return self.coeffs[i]

    def __len__(self) -> int:
        return self.order + 1

    def __iter__(self):
        return iter(self.coeffs)

    def truncate(self, order: int) -> "Series":
        if order > self.order:
            raise ValueError("cannot raise the truncation order of a series")
        return Series(self.coeffs[: order + 1], order)

    def shift(self, k: int) -> "Series":
        """Multiply by ``z**k`` keeping the same truncation order."""
        if k < 0:
            if any(self.coeffs[:-k]):
                raise ValueError("negative shift would drop nonzero coefficients")
            return Series(self.coeffs[-k:], self.order + k)
        return Series((0,) * k + self.coeffs, self.order)

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            return other
        return Series((exact(other),), self.order)

    def __add__(self, other):
        other = self._coerce(other)
        n = min(self.order, other.order)
        return Series(tuple(self.coeffs[i] + other.coeffs[i] for i in range(n + 1)), n)

    __radd__ = __add__

    def __neg__(self):
        return Series(tuple(-c for c in self.coeffs), self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Series):
            return series_mul(self, other)
        c = exact(other)
        return Series(tuple(c * a for a in self.coeffs), self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Series):
            return series_mul(self, series_recip(other))
        c = Fraction(exact(other))
        return Series(tuple(a / c for a in self.coeffs), self.order)

    def __pow__(self, e: int):
        return series_pow_int(self, e)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:8])
        tail = ", ..." if self.order >= 8 else ""
        return f"Series([{head}{tail}], order={self.order})"


def series_mul(a: Series, b: Series) -> Series:
    n = min(a.order, b.order)
    ac, bc = a.coeffs, b.coeffs
    # skip leading zeros: most factors here are z**k * (...)
    va = next((i for i in range(n + 1) if ac[i]), n + 1)
    vb = next((i for i in range(n + 1) if bc[i]), n + 1)
    out = [0] * (n + 1)
    for i in range(va, n + 1 - vb):
        ai = ac[i]
        if not ai:
            continue
        for j in range(vb, n + 1 - i):
            bj = bc[j]
            if bj:
                out[i + j] += ai * bj
    return Series(tuple(out), n)


def series_recip(a: Series) -> Series:
    a0 = a.coeffs[0]
    if a0 == 0:
        raise DomainError("series_recip: constant term is zero")
    inv0 = Fraction(1) / a0
    n = a.order
    ac = a.coeffs
    out = [exact(inv0)]
    for k in range(1, n + 1):
        s = 0
        for i in range(1, k + 1):
            if ac[i]:
                s += ac[i] * out[k - i]
        out.append(exact(-s * inv0))
    return Series(tuple(out), n)


def series_sqrt(a: Series) -> Series:
    """Square root of a series with constant term 1, by the recurrence from s*s = a."""
    if a.coeffs[0] != 1:
        raise DomainError("series_sqrt: constant term must be 1")
    n = a.order
    s = [1]
    for k in range(1, n + 1):
        acc = a.coeffs[k]
        for i in range(1, k):
            acc -= s[i] * s[k - i]
        s.append(exact(Fraction(acc) / 2))
    return Series(tuple(s), n)


def series_pow_int(a: Series, e: int) -> Series:
    if e < 0:
        if a.coeffs[0] == 0:
            raise DomainError("negative power of a series with zero constant term")
        return series_pow_int(series_recip(a), -e)
    result = Series.one(a.order)
    base = a
    while e:
        if e & 1:
            result = series_mul(result, base)
        e >>= 1
        if e:
            base = series_mul(base, base)
    return result


def series_hadamard(a: Series, b: Series) -> Series:
    n = min(a.order, b.order)
    return Series(tuple(a.coeffs[i] * b.coeffs[i] for i in range(n + 1)), n)


def catalan_series(N: int) -> Series:
    """Catalan numbers C_0..C_N via C_{n+1} = sum C_i C_{n-i}."""
    c = [1]
    for n in range(N):
        c.append(sum(c[i] * c[n - i] for i in range(n + 1)))
    return Series(tuple(c), N)


@dataclass(frozen=True)
class BivariateTable:
    """Exact counts ``f[n][k]`` of objects of size ``n`` with statistic ``k``.

    ``rows`` maps each stored size to a sparse ``{k: count}`` dictionary.  Tables
    built by :func:`qgibbs.models.coefficient_table` hold every ``n`` in
    ``0..max_n``; single-row tables used for large ``n`` hold only that row.
    """

    model: str
    max_n: int
    rows: Mapping[int, Mapping[int, Rational]]

    def __post_init__(self):
        clean = {}
        for n, row in self.rows.items():
            if n < 0 or n > self.max_n:
                raise ValueError(f"row index {n} outside 0..{self.max_n}")
            r = {}
            for k, v in sorted(row.items()):
                v = exact(v)
                if v < 0:
                    raise ValueError(f"negative entry f[{n}][{k}] = {v}")
                if v:
                    r[int(k)] = v
            clean[int(n)] = r
        object.__setattr__(self, "rows", dict(sorted(clean.items())))

    def row(self, n: int) -> dict:
        if n not in self.rows:
            raise KeyError(f"{self.model}: no row for n={n} (max_n={self.max_n})")
        return self.rows[n]

    def total(self, n: int) -> Rational:
        return exact(sum(self.row(n).values()))

    def row_sums(self) -> list:
        return [self.total(n) for n in self.rows]

    def as_lists(self) -> list:
        """Dense ``[[f[n][0], f[n][1], ...], ...]`` view, handy in tests."""
        out = []
        for n in self.rows:
            row = self.rows[n]
            width = max(row) + 1 if row else 0
            out.append([row.get(k, 0) for k in range(width)])
        return out

    def __eq__(self, other):
        if not isinstance(other, BivariateTable):
            return NotImplemented
        return (self.model, self.max_n, self.rows) == (other.model, other.max_n, other.rows)

    def __hash__(self):
        return hash((self.model, self.max_n))

