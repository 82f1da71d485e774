"""The model catalog: composition-scheme data and exact f[n][k] tables.

Every model is viewed as a (possibly extended, possibly shifted) sequence
scheme

    f_n(q) = prefactor(n) * q**offset * [z**N] M(z) * (1 - q*H(z))**(-outer_m),
    N = size_factor * n + index_shift,

so that the statistic equals the number of H-components plus ``offset``.
The plain schemes have ``M = 1``.  Index conventions:

* Dyck-type models (Dyck excursions/bridges, wall watermelons, the diagonal
  and diabolo quarter-plane walks) are indexed by semilength.
* Motzkin-type models, permutations, two-watermelons, coloured walks and
  king walks are indexed by length.

Rows for large ``n`` come from Lagrange inversion,
``[z^N] H^k = (k/N) [w^(N-k)] phi(w)^N`` with ``H = z*phi(H)``, or from
closed forms (watermelons, coloured walks).  The direct expansion of
``M * H**k`` with :mod:`qgibbs.series` is kept as a second route.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, sqrt
from typing import Callable

import flint

from .errors import DomainError, ResourceLimitError
from .series import BivariateTable, Series, catalan_series, exact, series_hadamard, series_recip, series_sqrt

MAX_TABLE_N = 2500
MAX_SERIES_N = 150
MAX_ROW_N = 20000


# ---------------------------------------------------------------------------
# model identifiers


class UnknownModelError(DomainError):
    """A model spelling that names no catalog family."""


@dataclass(frozen=True)
class Model:
    """Base class of the catalog variants; ``spec`` is the CLI spelling."""

    @property
    def spec(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.spec


@dataclass(frozen=True)
class DyckExcursion(Model):
    @property
    def spec(self):
        return "dyck-excursion"


@dataclass(frozen=True)
class DyckBridge(Model):
    @property
    def spec(self):
        return "dyck-bridge"


@dataclass(frozen=True)
class MotzkinExcursion(Model):
    @property
    def spec(self):
        return "motzkin-excursion"


@dataclass(frozen=True)
class MotzkinBridge(Model):
    @property
    def spec(self):
        return "motzkin-bridge"


@dataclass(frozen=True)
class WeightedMotzkinExcursion(Model):
    """Motzkin excursions with step weights for down, flat and up steps."""

    p_down: Fraction
    p_flat: Fraction
    p_up: Fraction

    def __post_init__(self):
        for name in ("p_down", "p_flat", "p_up"):
            v = Fraction(getattr(self, name))
            if v < 0:
                raise DomainError(f"{name} must be nonnegative")
            object.__setattr__(self, name, v)
        if self.p_down * self.p_up <= 0:
            raise DomainError("weighted Motzkin excursions need p_down * p_up > 0")

    @property
    def spec(self):
        return "weighted-motzkin:" + ",".join(str(p) for p in (self.p_down, self.p_flat, self.p_up))


@dataclass(frozen=True)
class PermFixedPoints(Model):
    pattern: int = 321

    def __post_init__(self):
        if self.pattern not in (132, 213, 321):
            raise DomainError(f"pattern must be one of 132, 213, 321, not {self.pattern}")

    @property
    def spec(self):
        return f"perm-fp-{self.pattern}"


@dataclass(frozen=True)
class TwoWatermelon(Model):
    @property
    def spec(self):
        return "two-watermelon"


@dataclass(frozen=True)
class WallWatermelon(Model):
    m: int = 1

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError("watermelons need m >= 1 walkers")

    @property
    def spec(self):
        return f"wall-watermelon:{self.m}"


@dataclass(frozen=True)
class ColouredWalk(Model):
    m: int = 1

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError("coloured walks need m >= 1 colours")

    @property
    def spec(self):
        return f"coloured-walk:{self.m}"


QUARTER_PLANE_STEPS = {
    "diagonal": ((-1, 1), (-1, 1)),
    "diabolo": ((-1, 1), (-1, 0, 1)),
    "king": ((-1, 0, 1), (-1, 0, 1)),
}


@dataclass(frozen=True)
class QuarterPlane(Model):
    """Quarter-plane walks with product step set ``xs x ys``; contacts with one axis.

    ``axis='x'`` counts returns of the y-coordinate to 0 (x-axis contacts).
    """

    kind: str = "diagonal"
    axis: str = "x"

    def __post_init__(self):
        if self.kind not in QUARTER_PLANE_STEPS:
            raise DomainError(f"unknown quarter-plane model {self.kind!r}")
        if self.axis not in ("x", "y"):
            raise DomainError("axis must be 'x' or 'y'")

    @property
    def spec(self):
        return f"quarter-plane:{self.kind}:{self.axis}"


CATALOG = (
    DyckExcursion(),
    DyckBridge(),
    MotzkinExcursion(),
    MotzkinBridge(),
    WeightedMotzkinExcursion(1, 2, 1),
    PermFixedPoints(132),
    PermFixedPoints(213),
    PermFixedPoints(321),
    TwoWatermelon(),
    WallWatermelon(1),
    WallWatermelon(2),
    WallWatermelon(3),
    ColouredWalk(1),
    ColouredWalk(2),
    ColouredWalk(3),
    QuarterPlane("diagonal", "x"),
    QuarterPlane("diagonal", "y"),
    QuarterPlane("diabolo", "x"),
    QuarterPlane("diabolo", "y"),
    QuarterPlane("king", "x"),
    QuarterPlane("king", "y"),
)

_SIMPLE = {
    "dyck-excursion": DyckExcursion,
    "dyck-bridge": DyckBridge,
    "motzkin-excursion": MotzkinExcursion,
    "motzkin-bridge": MotzkinBridge,
    "two-watermelon": TwoWatermelon,
}


def parse_model(text: str) -> Model:
    """Parse a model spelling such as ``perm-fp-321`` or ``wall-watermelon:2``."""
    s = text.strip().lower()
    if s in _SIMPLE:
        return _SIMPLE[s]()
    m = re.fullmatch(r"perm-fp-(\d+)", s)
    if m:
        return PermFixedPoints(int(m.group(1)))
    m = re.fullmatch(r"(wall-watermelon|watermelon|coloured-walk|colored-walk)(?::|=|-m)?(\d+)?", s)
    if m:
        k = int(m.group(2) or 1)
        return WallWatermelon(k) if "watermelon" in m.group(1) else ColouredWalk(k)
    m = re.fullmatch(r"weighted-motzkin(?::([^,]+),([^,]+),([^,]+))?", s)
    if m:
        ws = m.groups() if m.group(1) else ("1", "1", "1")
        return WeightedMotzkinExcursion(*(Fraction(w) for w in ws))
    m = re.fullmatch(r"quarter-plane:(\w+)(?::([xy]))?", s)
    if m:
        return QuarterPlane(m.group(1), m.group(2) or "x")
    raise UnknownModelError(f"unknown model {text!r}")


# ---------------------------------------------------------------------------
# exact quadratic surds for irrational critical values


def _rational_sqrt(x: Fraction) -> Fraction | None:
    x = Fraction(x)
    if x < 0:
        return None
    a, b = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


def _sign_surd(A: Fraction, B: Fraction, d: Fraction) -> int:
    """Exact sign of A + B*sqrt(d), d > 0."""
    sa = (A > 0) - (A < 0)
    sb = (B > 0) - (B < 0)
    if sa >= 0 and sb >= 0:
        return 1 if (sa or sb) else 0
    if sa <= 0 and sb <= 0:
        return -1
    lhs, rhs = A * A, B * B * d
    if sa > 0:
        return (lhs > rhs) - (lhs < rhs)
    return (rhs > lhs) - (rhs < lhs)


@dataclass(frozen=True)
class Surd:
    """The real number ``r + s*sqrt(d)`` with rational r, s, d (d not a square)."""

    r: Fraction
    s: Fraction
    d: Fraction

    def __float__(self):
        return float(self.r) + float(self.s) * sqrt(float(self.d))

    def compare(self, q) -> int:
        """Sign of ``q - self`` computed exactly."""
        return _sign_surd(Fraction(q) - self.r, -self.s, self.d)

    def __str__(self):
        return f"{self.r}+{self.s}*sqrt({self.d})"


def compare_to_critical(q, q_c) -> int:
    """Exact sign of ``q - q_c`` for rational q and rational or surd q_c."""
    if isinstance(q_c, Surd):
        return q_c.compare(q)
    diff = Fraction(q) - Fraction(q_c)
    return (diff > 0) - (diff < 0)


# ---------------------------------------------------------------------------
# scheme constants and model specs


@dataclass(frozen=True)
class SchemeConstants:
    rho_G: float
    lambda_G: float
    c_G: float
    rho_H: float
    lambda_H: float
    tau_H: float
    c_H: float
    q_c: Fraction | Surd
    outer_m: int
    has_prefactor_M: bool
    size_unit: int
    statistic_offset: int
    rho_H_exact: Fraction | None = None
    tau_H_exact: Fraction | None = None


@dataclass(frozen=True)
class ModelSpec:
    """Everything the rest of the package needs to know about one model.

    ``h(x, d)`` is the d-th derivative of the inner function in the scheme's own
    size variable; ``m_value``/``c_M``/``lambda_M`` describe the extra factor of
    extended schemes; ``prefactor(n)`` multiplies the scheme coefficient (the
    product-formula normalization for watermelons, the cofactor count for
    quarter-plane walks).  ``component`` is set for quarter-plane models, whose
    law is that of a directed model at scheme size ``size_factor * n``.
    """

    model: Model
    constants: SchemeConstants
    h: Callable[[float, int], float]
    row: Callable[[int], dict]
    size_factor: int = 1
    index_shift: int = 0
    m_value: Callable[[float], float] | None = None
    c_M: float = 1.0
    lambda_M: float = 0.0
    periodic: bool = False
    prefactor: Callable[[int], Fraction] = lambda n: 1
    component: Model | None = None

    def scheme_size(self, n: int) -> int:
        return self.size_factor * n + self.index_shift

    def h_closed_form(self, x: float, derivative_order: int = 0) -> float:
        return self.h(x, derivative_order)

    def table_builder(self, max_n: int) -> BivariateTable:
        return coefficient_table(self.model, max_n)


def _root(v: float) -> float:
    # tiny negative values appear when x is the float nearest to rho_H
    return sqrt(max(v, 0.0))


def _dyck_h(x, d):
    s = _root(1 - 4 * x)
    if d == 0:
        return (1 - s) / 2
    return 1 / s if d == 1 else 2 / s**3


def _dyck_bridge_h(x, d):
    return 2 * _dyck_h(x, d)


def _motzkin_r(a: float, b: float, x: float, d: int) -> float:
    """d-th derivative of r(x) = sqrt(1 - 2 b x + (b^2 - 4a) x^2)."""
    disc = b * b - 4 * a
    r2 = 1 - 2 * b * x + disc * x * x
    r = _root(r2)
    if d == 0:
        return r
    lin = -b + disc * x
    if d == 1:
        return lin / r
    return (disc * r2 - lin * lin) / r**3


def _weighted_motzkin_h(a: float, b: float):
    def h(x, d):
        r = _motzkin_r(a, b, x, d)
        if d == 0:
            return (1 + b * x - r) / 2
        return (b - r) / 2 if d == 1 else -r / 2

    return h


def _motzkin_bridge_h(x, d):
    r = _motzkin_r(1.0, 1.0, x, d)
    return 1 - r if d == 0 else -r


def _perm_h(x, d):
    s = _root(1 - 4 * x)
    if d == 0:
        return (1 - s) / (3 - s)
    if d == 1:
        return 4 / (s * (3 - s) ** 2)
    return 8 / (s**3 * (3 - s) ** 2) - 16 / (s**2 * (3 - s) ** 3)


def _two_watermelon_h(x, d):
    s = _root(1 - 4 * x)
    if d == 0:
        return (1 + 2 * x - s) / 2
    return 1 + 1 / s if d == 1 else 2 / s**3


def _coloured_h(x, d):
    r = _root(1 - 4 * x * x)
    if d == 0:
        return 1 - r
    return 4 * x / r if d == 1 else 4 / r**3


def _plain(model, rho, tau, c_H, size_unit, offset=0, rho_exact=None, tau_exact=None, q_c=None):
    if q_c is None:
        q_c = 1 / Fraction(tau_exact)
    return SchemeConstants(
        rho_G=1.0, lambda_G=-1.0, c_G=1.0, rho_H=float(rho), lambda_H=0.5, tau_H=float(tau),
        c_H=float(c_H), q_c=q_c, outer_m=1, has_prefactor_M=False, size_unit=size_unit,
        statistic_offset=offset, rho_H_exact=rho_exact, tau_H_exact=tau_exact,
    )


def watermelon_prefactor(m: int, n: int) -> Fraction:
    """Normalizing factor of the wall-watermelon product formula (n >= 1)."""
    num = factorial(n - 1)
    for i in range(m):
        num *= factorial(2 * i + 1)
    for i in range(m - 1):
        num *= factorial(2 * n + 2 * i)
    den = 1
    for i in range(2 * m - 1):
        den *= factorial(n + i)
    return Fraction(num, den)


@lru_cache(maxsize=None)
def model_spec(model: Model) -> ModelSpec:
    if isinstance(model, DyckExcursion):
        c = _plain(model, 0.25, 0.5, -0.5, 2, rho_exact=Fraction(1, 4), tau_exact=Fraction(1, 2))
        return ModelSpec(model, c, _dyck_h, _lagrange_rows(model, 0))
    if isinstance(model, DyckBridge):
        c = _plain(model, 0.25, 1.0, -1.0, 2, rho_exact=Fraction(1, 4), tau_exact=Fraction(1))
        return ModelSpec(model, c, _dyck_bridge_h, _lagrange_rows(model, 0))
    if isinstance(model, MotzkinExcursion):
        c = _plain(model, 1 / 3, 2 / 3, -1 / sqrt(3), 1, rho_exact=Fraction(1, 3), tau_exact=Fraction(2, 3))
        return ModelSpec(model, c, _weighted_motzkin_h(1.0, 1.0), _lagrange_rows(model, 0))
    if isinstance(model, MotzkinBridge):
        c = _plain(model, 1 / 3, 1.0, -2 / sqrt(3), 1, rho_exact=Fraction(1, 3), tau_exact=Fraction(1))
        return ModelSpec(model, c, _motzkin_bridge_h, _lagrange_rows(model, 0))
    if isinstance(model, WeightedMotzkinExcursion):
        return _weighted_spec(model)
    if isinstance(model, PermFixedPoints):
        c = _plain(model, 0.25, 1 / 3, -2 / 9, 1, offset=-1, rho_exact=Fraction(1, 4), tau_exact=Fraction(1, 3))
        return ModelSpec(model, c, _perm_h, _lagrange_rows(model, -1, index_shift=1), index_shift=1)
    if isinstance(model, TwoWatermelon):
        c = _plain(model, 0.25, 0.75, -0.5, 1, rho_exact=Fraction(1, 4), tau_exact=Fraction(3, 4))
        return ModelSpec(model, c, _two_watermelon_h, _lagrange_rows(model, 0))
    if isinstance(model, WallWatermelon):
        m = model.m
        c = SchemeConstants(
            rho_G=1.0, lambda_G=-2.0 * m, c_G=1.0, rho_H=0.25, lambda_H=0.5, tau_H=0.5, c_H=-0.5,
            q_c=Fraction(2), outer_m=2 * m, has_prefactor_M=True, size_unit=2, statistic_offset=2,
            rho_H_exact=Fraction(1, 4), tau_H_exact=Fraction(1, 2),
        )
        return ModelSpec(
            model, c, _dyck_h, lambda n: _wall_watermelon_row(m, n),
            m_value=lambda x: x / sqrt(1 - 4 * x), c_M=0.25, lambda_M=-0.5,
            prefactor=lambda n: watermelon_prefactor(m, n),
        )
    if isinstance(model, ColouredWalk):
        m = model.m
        c = SchemeConstants(
            rho_G=1.0, lambda_G=-1.0 * m, c_G=1.0, rho_H=0.5, lambda_H=0.5, tau_H=1.0, c_H=-sqrt(2),
            q_c=Fraction(1), outer_m=m, has_prefactor_M=True, size_unit=1, statistic_offset=0,
            rho_H_exact=Fraction(1, 2), tau_H_exact=Fraction(1),
        )
        return ModelSpec(
            model, c, _coloured_h, lambda n: _coloured_walk_row(m, n),
            m_value=lambda x: sqrt(1 - 4 * x * x) / (1 - 2 * x), c_M=sqrt(2), lambda_M=-0.5, periodic=True,
        )
    if isinstance(model, QuarterPlane):
        return _quarter_plane_spec(model)
    raise DomainError(f"unsupported model {model!r}")


def _weighted_spec(model: WeightedMotzkinExcursion) -> ModelSpec:
    a = model.p_down * model.p_up
    b = model.p_flat
    s = _rational_sqrt(a)
    sf = float(s) if s is not None else sqrt(float(a))
    rho = 1 / (float(b) + 2 * sf)
    tau = (float(b) + sf) / (float(b) + 2 * sf)
    c_H = -sqrt(sf * rho)
    if s is not None:
        rho_exact, tau_exact = 1 / (b + 2 * s), (b + s) / (b + 2 * s)
        q_c = 1 / tau_exact
    else:
        rho_exact = tau_exact = None
        q_c = Surd((b * b - 2 * a) / (b * b - a), b / (b * b - a), a)
    c = _plain(model, rho, tau, c_H, 1, rho_exact=rho_exact, tau_exact=tau_exact, q_c=q_c)
    if b == 0:
        row = lambda n: _weighted_no_flat_row(a, n)  # noqa: E731
    else:
        row = _lagrange_rows(model, 0)
    return ModelSpec(model, c, _weighted_motzkin_h(float(a), float(b)), row, periodic=(b == 0))


def quarter_plane_component(model: QuarterPlane) -> tuple[Model, int]:
    """Directed model carrying the contacts, and its size per unit of n."""
    if model.kind == "diagonal":
        return DyckExcursion(), 1
    if model.kind == "king":
        return MotzkinExcursion(), 1
    # diabolo: x-coordinate is a Dyck path of length 2n, y-coordinate a Motzkin path of length 2n
    return (MotzkinExcursion(), 2) if model.axis == "x" else (DyckExcursion(), 1)


def quarter_plane_cofactor(model: QuarterPlane, n: int) -> int:
    """Number of choices for the coordinate that does not carry the contacts."""
    if model.kind == "diagonal":
        return _catalan(n)
    if model.kind == "king":
        return _motzkin(n)
    return _catalan(n) if model.axis == "x" else _motzkin(2 * n)


def _quarter_plane_spec(model: QuarterPlane) -> ModelSpec:
    comp, factor = quarter_plane_component(model)
    inner = model_spec(comp)
    c = inner.constants
    size_unit = 2 if model.kind in ("diagonal", "diabolo") else 1

    def row(n):
        base = inner.row(factor * n)
        co = quarter_plane_cofactor(model, n)
        return {k: v * co for k, v in base.items()}

    consts = SchemeConstants(**{**c.__dict__, "size_unit": size_unit})
    return ModelSpec(
        model, consts, inner.h, row, size_factor=factor,
        prefactor=lambda n: quarter_plane_cofactor(model, n), component=comp,
    )


def scheme_constants(model: Model) -> SchemeConstants:
    return model_spec(model).constants


def h_eval(model: Model, x: float, derivative_order: int = 0) -> float:
    """Closed-form inner function H of the model's scheme and its first two derivatives."""
    if derivative_order not in (0, 1, 2):
        raise DomainError("derivative_order must be 0, 1 or 2")
    spec = model_spec(model)
    rho = spec.constants.rho_H
    upper_ok = x < rho or (derivative_order == 0 and x == rho)
    if not (x > 0 and upper_ok):
        raise DomainError(f"h_eval: x={x} outside (0, {rho}) for {model.spec}")
    return spec.h(float(x), derivative_order)


# ---------------------------------------------------------------------------
# classical sequences (used for cofactors)


@lru_cache(maxsize=None)
def _catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


_MOTZKIN = [1, 1]


def _motzkin(n: int) -> int:
    while len(_MOTZKIN) <= n:
        k = len(_MOTZKIN)
        _MOTZKIN.append(((2 * k + 1) * _MOTZKIN[k - 1] + (3 * k - 3) * _MOTZKIN[k - 2]) // (k + 2))
    return _MOTZKIN[n]


# ---------------------------------------------------------------------------
# fast rows: Lagrange inversion with exact flint series

_FLINT_LOCK = threading.Lock()


def _phi_series(model: Model, prec: int):
    """phi with H = z * phi(H), as an exact flint series to the given precision."""
    S = flint.fmpq_series
    y = S([0, 1])
    one = S([1])
    if isinstance(model, DyckExcursion):
        return (one - y).inv()
    if isinstance(model, DyckBridge):
        return 4 * (2 - y).inv()
    if isinstance(model, (MotzkinExcursion, WeightedMotzkinExcursion)):
        if isinstance(model, MotzkinExcursion):
            a, b = Fraction(1), Fraction(1)
        else:
            a, b = model.p_down * model.p_up, model.p_flat
        fa, fb = flint.fmpq(a.numerator, a.denominator), flint.fmpq(b.numerator, b.denominator)
        inner = one + (4 * fa / (fb * fb)) * y * (one - y).inv()
        return (fb / 2) * (one + inner.sqrt())
    if isinstance(model, MotzkinBridge):
        return (one + (one + 3 * y * (2 - y)).sqrt()) * (2 - y).inv()
    if isinstance(model, PermFixedPoints):
        return (one - y) * (one - y) * (one - 2 * y).inv()
    if isinstance(model, TwoWatermelon):
        return one + (one - y).rsqrt()
    raise DomainError(f"no Lagrangian form for {model.spec}")


@lru_cache(maxsize=64)
def _lagrange_row_cached(model: Model, N: int) -> tuple:
    if N == 0:
        return ((0, 1),)
    with _FLINT_LOCK:
        old = flint.ctx.cap
        flint.ctx.cap = N + 1
        try:
            phi = _phi_series(model, N + 1)
            power = phi**N
            cs = power.coeffs()
        finally:
            flint.ctx.cap = old
    out = []
    for k in range(1, N + 1):
        j = N - k
        if j >= len(cs):
            continue
        c = cs[j]
        if c == 0:
            continue
        val = Fraction(int(c.p), int(c.q)) * k / N
        out.append((k, exact(val)))
    return tuple(out)


def _lagrange_rows(model: Model, offset: int, index_shift: int = 0):
    def row(n: int) -> dict:
        N = n + index_shift
        return {k + offset: v for k, v in _lagrange_row_cached(model, N) if k + offset >= 0}

    return row


def _weighted_no_flat_row(a: Fraction, n: int) -> dict:
    # without flat steps the paths are Dyck paths of semilength n/2 with weight a**(n/2)
    if n % 2:
        return {}
    j = n // 2
    return {k: exact(v * a**j) for k, v in _lagrange_row_cached(DyckExcursion(), j)}


def _wall_watermelon_row(m: int, n: int) -> dict:
    if n == 0:
        return {1: 1}
    pf = watermelon_prefactor(m, n)
    row = {}
    # both binomials are updated by exact ratios in ell rather than recomputed
    a = comb(2 * n - 2, n - 1)
    b = 1
    for ell in range(2, n + 2):
        v = pf * (a * b)
        if v:
            row[ell] = exact(v)
        if ell <= n:
            a = a * (n - ell + 1) // (2 * n - ell)
            b = b * (ell + 2 * m - 2) // (ell - 1)
    return row


def _coloured_walk_row(m: int, n: int) -> dict:
    # walks of length 2h with k returns: 2^k binom(2h-k, h); an odd final step doubles the count
    h, odd = divmod(n, 2)
    row = {}
    for k in range(h + 1):
        v = (2**k) * comb(2 * h - k, h) * (2 if odd else 1) * comb(k + m - 1, m - 1)
        if v:
            row[k] = v
    return row


def model_row(model: Model, n: int) -> dict:
    """Exact row ``{k: f[n][k]}`` for a single size ``n``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n > MAX_ROW_N:
        raise ResourceLimitError(f"n={n} exceeds the row limit {MAX_ROW_N}")
    return dict(model_spec(model).row(n))


# ---------------------------------------------------------------------------
# direct series route


def _series_parts(model: Model, N: int):
    """(M, H) as truncated Series in the scheme variable, order N."""
    z = Series.z(N)
    one = Series.one(N)
    if isinstance(model, (DyckExcursion, WallWatermelon)):
        H = catalan_series(N).shift(1)
        if isinstance(model, WallWatermelon):
            return z * series_recip(series_sqrt(one - 4 * z)), H
        return one, H
    if isinstance(model, DyckBridge):
        return one, 2 * catalan_series(N).shift(1)
    if isinstance(model, (MotzkinExcursion, MotzkinBridge, WeightedMotzkinExcursion)):
        if isinstance(model, WeightedMotzkinExcursion):
            a, b = model.p_down * model.p_up, model.p_flat
        else:
            a, b = 1, 1
        r = series_sqrt(one - 2 * b * z + (b * b - 4 * a) * z * z)
        if isinstance(model, MotzkinBridge):
            return one, one - r
        return one, (one + b * z - r) / 2
    if isinstance(model, PermFixedPoints):
        s = series_sqrt(one - 4 * z)
        return one, 2 * z * series_recip(one + 2 * z + s)
    if isinstance(model, TwoWatermelon):
        s = series_sqrt(one - 4 * z)
        return one, (one + 2 * z - s) / 2
    if isinstance(model, ColouredWalk):
        r = series_sqrt(one - 4 * z * z)
        return r * series_recip(one - 2 * z), one - r
    raise DomainError(f"no direct series route for {model.spec}")


def _series_table(model: Model, max_n: int) -> dict:
    spec = model_spec(model)
    c = spec.constants
    N = spec.scheme_size(max_n)
    M, H = _series_parts(model, N)
    rows = {n: {} for n in range(max_n + 1)}
    power = M
    for K in range(N + 1):
        g = comb(K + c.outer_m - 1, K)
        for n in range(max_n + 1):
            idx = spec.scheme_size(n)
            v = power[idx]
            if v:
                k = K + c.statistic_offset
                rows[n][k] = rows[n].get(k, 0) + g * v * spec.prefactor(n)
        power = power * H
    if isinstance(model, WallWatermelon):
        rows[0] = {1: 1}
    return rows


def _hadamard_table(model: QuarterPlane, max_n: int) -> dict:
    """Quarter-plane rows as Hadamard products of directed tables in the length variable."""
    comp, factor = quarter_plane_component(model)
    L = 2 * max_n if model.kind in ("diagonal", "diabolo") else max_n
    # both coordinates as series in the length variable
    directed = {}
    for name in ("dyck", "motzkin"):
        inner = DyckExcursion() if name == "dyck" else MotzkinExcursion()
        half = L // 2 if name == "dyck" else L
        tab = _series_table(inner, half)
        directed[name] = {
            (2 * n if name == "dyck" else n): row for n, row in tab.items()
        }
    xs_name, ys_name = {
        "diagonal": ("dyck", "dyck"),
        "diabolo": ("dyck", "motzkin"),
        "king": ("motzkin", "motzkin"),
    }[model.kind]
    contact_name, other_name = (ys_name, xs_name) if model.axis == "x" else (xs_name, ys_name)
    other_total = Series.from_function(lambda i: sum(directed[other_name].get(i, {}).values()), L)
    ks = sorted({k for row in directed[contact_name].values() for k in row})
    by_length = {i: {} for i in range(L + 1)}
    for k in ks:
        contact_k = Series.from_function(lambda i: directed[contact_name].get(i, {}).get(k, 0), L)
        prod = series_hadamard(contact_k, other_total)
        for i in range(L + 1):
            if prod[i]:
                by_length[i][k] = prod[i]
    step = 2 if model.kind in ("diagonal", "diabolo") else 1
    return {n: by_length[step * n] for n in range(max_n + 1)}


def coefficient_table(model: Model, max_n: int, method: str = "fast") -> BivariateTable:
    """Exact ``f[n][k]`` for ``n = 0..max_n``.

    ``method='fast'`` uses Lagrange inversion or closed forms; ``'series'`` expands
    ``M * g_k * H**k`` (Hadamard products for quarter-plane walks) directly.
    """
    if max_n < 0:
        raise DomainError("max_n must be nonnegative")
    if method == "fast":
        if max_n > MAX_TABLE_N:
            raise ResourceLimitError(f"max_n={max_n} exceeds the table limit {MAX_TABLE_N}")
        rows = {n: model_row(model, n) for n in range(max_n + 1)}
    elif method == "series":
        if max_n > MAX_SERIES_N:
            raise ResourceLimitError(f"max_n={max_n} exceeds the series-route limit {MAX_SERIES_N}")
        if isinstance(model, QuarterPlane):
            rows = _hadamard_table(model, max_n)
        else:
            rows = _series_table(model, max_n)
    else:
        raise ValueError(f"unknown method {method!r}")
    return BivariateTable(model.spec, max_n, rows)


def single_row_table(model: Model, n: int) -> BivariateTable:
    return BivariateTable(model.spec, n, {n: model_row(model, n)})


def watermelon_partition_formula(m: int, n: int) -> list:
    """Coefficients (indexed by the power of q) of the wall-watermelon product formula."""
    if m < 1 or n < 1:
        raise DomainError("need m >= 1 and n >= 1")
    pf = watermelon_prefactor(m, n)
    out = [0, 0]
    for ell in range(2, n + 2):
        out.append(exact(pf * comb(2 * n - ell, n - 1) * comb(ell + 2 * m - 3, ell - 2)))
    return out


def watermelon_series_partition(m: int, n: int) -> list:
    """Same coefficients extracted from q^2 z (1-4z)^(-1/2) (1 - q z C(z))^(-2m).

    The extraction gives the numerator polynomial; it is scaled by the same
    n-dependent normalizing factor as the product formula.
    """
    if m < 1 or n < 1:
        raise DomainError("need m >= 1 and n >= 1")
    z = Series.z(n)
    M = z * series_recip(series_sqrt(Series.one(n) - 4 * z))
    H = catalan_series(n).shift(1)
    pf = watermelon_prefactor(m, n)
    out = [0, 0]
    power = M
    for j in range(n):
        out.append(exact(pf * comb(j + 2 * m - 1, j) * power[n]))
        power = power * H
    return out


def total_count(model: Model, n: int):
    return exact(sum(model_row(model, n).values()))
