"""Limit laws: negative binomial, Rayleigh, chi, Gaussian and Mittag-Leffler.

Laws are small frozen dataclasses; :func:`law_moment`, :func:`law_pdf` and
:func:`law_cdf` dispatch on them.  Closed forms are used wherever they exist.
The Mittag-Leffler density is evaluated from its power series, which is an
alternating series with heavy cancellation for large x, so it is only trusted
while the largest term stays within a fixed factor of the sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy import integrate, special

from .errors import DomainError


class MLRangeError(DomainError):
    """The Mittag-Leffler density series cannot be evaluated accurately at this x."""


# largest tolerated ratio max|term| / |sum| in the density series
ML_CANCELLATION_LIMIT = 1e7
ML_MAX_TERMS = 4000


def gamma_real(x: float, reciprocal: bool = False) -> float:
    """Gamma function; with ``reciprocal=True`` returns 1/Gamma(x), which is 0 at the poles."""
    x = float(x)
    pole = x <= 0 and x == math.floor(x)
    if reciprocal:
        if pole:
            return 0.0
        if x > 171.0:
            return math.exp(-math.lgamma(x))
        return 1.0 / math.gamma(x)
    if pole:
        raise DomainError(f"Gamma has a pole at {x}")
    return math.gamma(x)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NegBin:
    """P(X = k) = binom(k+r-1, k) p^r (1-p)^k on k = 0, 1, ..."""

    r: int
    p: Fraction | float

    def __post_init__(self):
        if self.r < 1 or not 0 < self.p < 1:
            raise DomainError(f"NegBin needs r >= 1 and 0 < p < 1, got r={self.r}, p={self.p}")

    name = "negbin"
    discrete = True


@dataclass(frozen=True)
class Rayleigh:
    """Density (x/s^2) exp(-x^2/(2 s^2)); ``sigma_sq`` is s^2, kept exact when rational."""

    sigma_sq: Fraction | float

    def __post_init__(self):
        if self.sigma_sq <= 0:
            raise DomainError("Rayleigh needs sigma > 0")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma_sq)

    name = "rayleigh"
    discrete = False


@dataclass(frozen=True)
class Chi:
    """``scale`` times the norm of a k-dimensional standard Gaussian vector."""

    k: int
    scale: float = 1.0

    def __post_init__(self):
        if self.k < 1 or self.scale <= 0:
            raise DomainError("Chi needs k >= 1 and scale > 0")

    name = "chi"
    discrete = False


@dataclass(frozen=True)
class Gaussian:
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError("Gaussian needs sigma > 0")

    name = "gaussian"
    discrete = False


@dataclass(frozen=True)
class MittagLeffler:
    """Law with moments scale^r Gamma(b) Gamma(r + b/a) / (Gamma(b/a) Gamma(a r + b))."""

    alpha: float
    beta: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1 or self.beta <= 0 or self.scale <= 0:
            raise DomainError("Mittag-Leffler needs 0 < alpha < 1, beta > 0, scale > 0")

    name = "mittag-leffler"
    discrete = False


Law = NegBin | Rayleigh | Chi | Gaussian | MittagLeffler


# ---------------------------------------------------------------------------
# moments


def _stirling2(r: int) -> list:
    """Row r of the Stirling numbers of the second kind."""
    row = [1]
    for i in range(1, r + 1):
        new = [0] * (i + 1)
        for j in range(1, i + 1):
            new[j] = j * (row[j] if j < len(row) else 0) + row[j - 1]
        row = new
    return row


def law_moment(law: Law, r: int) -> float:
    """``E(X**r)`` from the closed form of each law."""
    if r < 0:
        raise DomainError("moment order must be nonnegative")
    if r == 0:
        return 1.0
    if isinstance(law, NegBin):
        # factorial moments E[(X)_j] = (r)^(j) ((1-p)/p)^j, combined with Stirling numbers
        ratio = (1 - law.p) / law.p
        total = 0
        rising = 1
        for j, s in enumerate(_stirling2(r)):
            if j:
                rising *= law.r + j - 1
            if s:
                total += s * rising * ratio**j
        return float(total)
    if isinstance(law, Rayleigh):
        return float(law.sigma) ** r * 2 ** (r / 2) * math.gamma(1 + r / 2)
    if isinstance(law, Chi):
        return law.scale**r * 2 ** (r / 2) * math.exp(math.lgamma((law.k + r) / 2) - math.lgamma(law.k / 2))
    if isinstance(law, Gaussian):
        return sum(
            math.comb(r, 2 * j) * law.mu ** (r - 2 * j) * law.sigma ** (2 * j) * _double_factorial(2 * j - 1)
            for j in range(r // 2 + 1)
        )
    if isinstance(law, MittagLeffler):
        a, b = law.alpha, law.beta
        log_m = math.lgamma(b) + math.lgamma(r + b / a) - math.lgamma(b / a) - math.lgamma(a * r + b)
        return law.scale**r * math.exp(log_m)
    raise TypeError(f"unknown law {law!r}")


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def law_mean(law: Law) -> float:
    return law_moment(law, 1)


# ---------------------------------------------------------------------------
# densities


def _ml_series(law: MittagLeffler, x: float) -> float:
    a, b = law.alpha, law.beta
    y = x / law.scale
    if y == 0:
        lead = b / a - 1
        if lead != 0:
            return 0.0 if lead > 0 else math.inf
        sign, log_c = _ml_coeff(a, 1)
        return _ml_prefactor(a, b) * sign * math.exp(log_c) / law.scale
    terms = []
    log_y = math.log(y)
    peak = 0.0
    small = 0
    for n in range(1, ML_MAX_TERMS):
        sign, log_c = _ml_coeff(a, n)
        if sign == 0:
            continue
        log_t = log_c + (n + b / a - 1) * log_y - math.lgamma(n + 1)
        if log_t > 700:
            raise MLRangeError(f"Mittag-Leffler density series overflows at x={x}")
        t = sign * math.exp(log_t)
        terms.append(t)
        peak = max(peak, abs(t))
        partial = math.fsum(terms)
        past_peak = abs(t) < peak
        if past_peak and abs(t) < 1e-15 * abs(partial):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise MLRangeError(f"Mittag-Leffler density series did not converge at x={x}")
    total = math.fsum(terms)
    if total <= 0 or peak > ML_CANCELLATION_LIMIT * abs(total):
        raise MLRangeError(f"x={x} is beyond the validity domain of the Mittag-Leffler density series")
    return _ml_prefactor(a, b) * total / law.scale


def _ml_prefactor(a: float, b: float) -> float:
    return math.exp(math.lgamma(b + 1) - math.lgamma(b / a + 1)) / a


def _ml_coeff(a: float, n: int) -> tuple:
    """(-1)^n / Gamma(-n a) as (sign, log of magnitude); sign 0 at the poles."""
    na = n * a
    if abs(na - round(na)) < 1e-12:
        return 0, 0.0
    # reflection: 1/Gamma(-y) = -sin(pi y) Gamma(1+y) / pi
    sn = -math.sin(math.pi * na)
    if n % 2:
        sn = -sn
    sign = 1 if sn > 0 else -1
    return sign, math.log(abs(sn)) + math.lgamma(1 + na) - math.log(math.pi)


def ml_x_max(law: MittagLeffler, hi: float = 100.0) -> float:
    """Largest x (to about 1e-3) where the density series is accepted."""
    lo = 0.0
    if _ml_ok(law, hi):
        return hi
    for _ in range(40):
        mid = (lo + hi) / 2
        if _ml_ok(law, mid):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-3:
            break
    return lo


def _ml_ok(law, x) -> bool:
    try:
        _ml_series(law, x)
        return True
    except MLRangeError:
        return False


def law_pdf(law: Law, x: float) -> float:
    """Density at x (the pmf at integer x for NegBin)."""
    if isinstance(law, NegBin):
        if x < 0 or x != int(x):
            return 0.0
        k = int(x)
        p = law.p
        return float(math.comb(k + law.r - 1, k) * p**law.r * (1 - p) ** k)
    if x < 0 and not isinstance(law, Gaussian):
        return 0.0
    if isinstance(law, Rayleigh):
        s2 = float(law.sigma_sq)
        return x / s2 * math.exp(-x * x / (2 * s2))
    if isinstance(law, Chi):
        y = x / law.scale
        if y == 0:
            return 1 / (law.scale * math.sqrt(math.pi / 2)) if law.k == 1 else 0.0
        log_d = (law.k - 1) * math.log(y) - y * y / 2 - (law.k / 2 - 1) * math.log(2) - math.lgamma(law.k / 2)
        return math.exp(log_d) / law.scale
    if isinstance(law, Gaussian):
        z = (x - law.mu) / law.sigma
        return math.exp(-z * z / 2) / (law.sigma * math.sqrt(2 * math.pi))
    if isinstance(law, MittagLeffler):
        return _ml_series(law, x)
    raise TypeError(f"unknown law {law!r}")


def law_cdf(law: Law, x: float) -> float:
    if isinstance(law, NegBin):
        if x < 0:
            return 0.0
        return math.fsum(law_pdf(law, k) for k in range(int(math.floor(x)) + 1))
    if isinstance(law, Gaussian):
        return 0.5 * (1 + math.erf((x - law.mu) / (law.sigma * math.sqrt(2))))
    if x <= 0:
        return 0.0
    if isinstance(law, Rayleigh):
        return -math.expm1(-x * x / (2 * float(law.sigma_sq)))
    if isinstance(law, Chi):
        return float(special.gammainc(law.k / 2, (x / law.scale) ** 2 / 2))
    if isinstance(law, MittagLeffler):
        value, _ = integrate.quad(lambda t: _ml_series(law, t), 0, x, epsabs=1e-12, epsrel=1e-10, limit=200)
        return min(1.0, value)
    raise TypeError(f"unknown law {law!r}")


def law_params(law: Law) -> dict:
    """Parameters for reports; exact rationals are kept as strings."""
    if isinstance(law, NegBin):
        return {"r": law.r, "p": str(law.p) if isinstance(law.p, Fraction) else float(law.p)}
    if isinstance(law, Rayleigh):
        s2 = law.sigma_sq
        if isinstance(s2, Fraction) or (isinstance(s2, int)):
            s2 = Fraction(s2)
            root = _exact_sqrt(s2)
            sigma = str(root) if root is not None else f"sqrt({s2})"
        else:
            sigma = law.sigma
        return {"sigma": sigma, "sigma_sq": str(s2) if isinstance(s2, Fraction) else s2}
    if isinstance(law, Chi):
        return {"k": law.k, "scale": law.scale}
    if isinstance(law, Gaussian):
        return {"mu": law.mu, "sigma": law.sigma}
    if isinstance(law, MittagLeffler):
        return {"alpha": law.alpha, "beta": law.beta, "scale": law.scale}
    raise TypeError(f"unknown law {law!r}")


def _exact_sqrt(x: Fraction) -> Fraction | None:
    a, b = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


def law_from_params(name: str, params: dict) -> Law:
    """Inverse of (``law.name``, :func:`law_params`)."""
    if name == "negbin":
        p = params["p"]
        return NegBin(int(params["r"]), Fraction(p) if isinstance(p, str) else float(p))
    if name == "rayleigh":
        s2 = params["sigma_sq"]
        return Rayleigh(Fraction(s2) if isinstance(s2, str) else float(s2))
    if name == "chi":
        return Chi(int(params["k"]), float(params["scale"]))
    if name == "gaussian":
        return Gaussian(float(params["mu"]), float(params["sigma"]))
    if name == "mittag-leffler":
        return MittagLeffler(float(params["alpha"]), float(params["beta"]), float(params["scale"]))
    raise DomainError(f"unknown law name {name!r}")
