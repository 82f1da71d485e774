"""Regime classification, asymptotic predictions and distances to limit laws.

Sizes: a model's user index ``n`` maps to the scheme size
``N = size_factor * n + index_shift`` (see :class:`qgibbs.models.ModelSpec`).
All predictions below are made in N and reported per unit of n.

The outer function is always ``G(w) = (1 - w)^(-m)``; ``H`` has a square-root
singularity ``H ~ tau + c_H (1 - z/rho)^(1/2)`` and, for extended schemes, the
extra factor behaves like ``M ~ c_M (1 - z/rho)^(lambda_M)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

from scipy.optimize import brentq

from .errors import DomainError
from .gibbs import GibbsDistribution, parse_q
from .laws import Chi, Gaussian, Law, MittagLeffler, NegBin, Rayleigh, law_cdf, law_pdf
from .models import (
    Model,
    QuarterPlane,
    WallWatermelon,
    compare_to_critical,
    model_spec,
    quarter_plane_cofactor,
)

SUBCRITICAL, CRITICAL, SUPERCRITICAL = "subcritical", "critical", "supercritical"


@dataclass(frozen=True)
class ScalingSpec:
    """The map ``x -> (x - shift - shift_per_n * n) / (constant * n**exponent)``."""

    shift: float = 0.0
    shift_per_n: float = 0.0
    exponent: float = 0.0
    constant: float = 1.0

    def __post_init__(self):
        for name in ("shift", "shift_per_n", "exponent", "constant"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.constant > 0:
            raise DomainError("scaling constant must be positive")

    def apply(self, x: float, n: int) -> float:
        return (x - self.shift - self.shift_per_n * n) / (self.constant * n**self.exponent)


@dataclass(frozen=True)
class RegimeReport:
    model: str
    q: Fraction
    q_c: object
    regime: str
    law: Law
    scaling: ScalingSpec
    rho: float | None = None
    mean_constant: float | None = None
    variance_constant: float | None = None
    notes: tuple = field(default_factory=tuple)


# ---------------------------------------------------------------------------


def _scheme(model: Model):
    """(spec used for H and the scheme constants, size factor, index shift)."""
    spec = model_spec(model)
    if spec.component is not None:
        inner = model_spec(spec.component)
        return inner, spec.size_factor, inner.index_shift
    return spec, spec.size_factor, spec.index_shift


def classify(model: Model, q) -> str:
    q = parse_q(q)
    sign = compare_to_critical(q, model_spec(model).constants.q_c)
    return SUBCRITICAL if sign < 0 else (CRITICAL if sign == 0 else SUPERCRITICAL)


def solve_rho(model: Model, q) -> float:
    """The root of ``q H(rho) = 1`` in ``(0, rho_H)`` for supercritical q."""
    q = parse_q(q)
    if classify(model, q) != SUPERCRITICAL:
        raise DomainError(f"solve_rho needs q > q_c for {model.spec}")
    spec, _, _ = _scheme(model)
    rho_h = spec.constants.rho_H
    qf = float(q)
    f = lambda x: qf * spec.h(x, 0) - 1.0  # noqa: E731
    return brentq(f, 1e-300, rho_h, xtol=1e-300, rtol=1e-15, maxiter=500)


def supercritical_constants(model: Model, q) -> tuple:
    """(mean constant, variance constant) with E X ~ mu n and Var X ~ sigma^2 n."""
    q = parse_q(q)
    rho = solve_rho(model, q)
    spec, factor, _ = _scheme(model)
    qf = float(q)
    h1, h2 = spec.h(rho, 1), spec.h(rho, 2)
    mu = 1 / (qf * rho * h1)
    var = mu * mu - mu + h2 / (qf * qf * rho * h1**3)
    if not var > 0:
        raise ArithmeticError(f"nonpositive variance constant {var} for {model.spec} at q={q}")
    return mu * factor, var * factor


def _q_tau(spec, q: Fraction) -> Fraction | float:
    tau = spec.constants.tau_H_exact
    return q * tau if tau is not None else float(q) * spec.constants.tau_H


def limit_law_for(model: Model, q) -> tuple:
    """(limit law, scaling) for the statistic of ``model`` under weight q."""
    q = parse_q(q)
    regime = classify(model, q)
    spec, factor, _ = _scheme(model)
    c = spec.constants
    offset = model_spec(model).constants.statistic_offset
    m = c.outer_m
    if regime == SUBCRITICAL:
        p = 1 - _q_tau(spec, q)
        if c.has_prefactor_M:
            return NegBin(m, p), ScalingSpec(shift=offset)
        return NegBin(m + 1, p), ScalingSpec(shift=1 + offset)
    if regime == CRITICAL:
        if isinstance(model, WallWatermelon):
            return Chi(2 * model.m), ScalingSpec(shift=0, exponent=0.5)
        if c.has_prefactor_M:
            return Chi(m), ScalingSpec(shift=0, exponent=0.5)
        const = c.tau_H / (-c.c_H) * math.sqrt(factor)
        law = Rayleigh(Fraction(2)) if m == 1 else MittagLeffler(0.5, m / 2)
        return law, ScalingSpec(shift=offset, exponent=0.5, constant=const)
    mu, var = supercritical_constants(model, q)
    return Gaussian(0.0, 1.0), ScalingSpec(shift=offset, shift_per_n=mu, exponent=0.5, constant=math.sqrt(var))


WALL_WATERMELON_NOTE = (
    "critical law taken verbatim as chi(2m) for X_n/sqrt(n), n the semilength; "
    "exact moments at q=2 match sqrt(2)*chi(2m) instead"
)


def regime_report(model: Model, q) -> RegimeReport:
    q = parse_q(q)
    regime = classify(model, q)
    law, scaling = limit_law_for(model, q)
    rho = mean_c = var_c = None
    notes = ()
    if regime == SUPERCRITICAL:
        rho = solve_rho(model, q)
        mean_c, var_c = supercritical_constants(model, q)
    if regime == CRITICAL and isinstance(model, WallWatermelon):
        notes = (WALL_WATERMELON_NOTE,)
    return RegimeReport(model.spec, q, model_spec(model).constants.q_c, regime, law, scaling, rho, mean_c, var_c, notes)


# ---------------------------------------------------------------------------
# asymptotic predictions


def _log_gamma_ratio(a: float, b: float) -> float:
    return math.lgamma(a) - math.lgamma(b)


def _log_exact(x) -> float:
    x = Fraction(x)
    if x <= 0:
        raise DomainError("log of a nonpositive value")
    return math.log(x.numerator) - math.log(x.denominator)


def log_predicted_partition(model: Model, q, n: int) -> float:
    """Natural log of the first-order prediction of ``f_n(q)``."""
    q = parse_q(q)
    outer = model_spec(model)
    if isinstance(model, QuarterPlane):
        comp = outer.component
        return log_predicted_partition(comp, q, outer.size_factor * n) + math.log(quarter_plane_cofactor(model, n))
    c = outer.constants
    N = outer.scheme_size(n)
    if N <= 0:
        raise DomainError("prediction needs a positive size")
    qf = float(q)
    m = c.outer_m
    rho_h, tau, c_h = c.rho_H, c.tau_H, c.c_H
    lam_m = outer.lambda_M
    c_m = outer.c_M
    log_pre = _log_exact(outer.prefactor(n)) + c.statistic_offset * math.log(qf)
    regime = classify(model, q)
    if regime == SUBCRITICAL:
        w = float(_q_tau(outer, q))
        if c.has_prefactor_M:
            # c_M G(q tau) (1 - z/rho)^lambda_M
            core = math.log(c_m) - m * math.log1p(-w) - math.lgamma(-lam_m) + (-lam_m - 1) * math.log(N)
        else:
            # G'(q tau) q c_H (1 - z/rho)^(1/2); c_H and Gamma(-1/2) are both negative
            core = (
                math.log(m) - (m + 1) * math.log1p(-w) + math.log(qf) + math.log(-c_h)
                - math.log(2 * math.sqrt(math.pi)) - 1.5 * math.log(N)
            )
        core -= N * math.log(rho_h)
        periodic_factor = 2.0 if _periodic_plain(outer) else 1.0
    elif regime == CRITICAL:
        beta = -lam_m + m / 2
        core = math.log(c_m) - m * math.log(-c_h / tau) - math.lgamma(beta) + (beta - 1) * math.log(N)
        core -= N * math.log(rho_h)
        periodic_factor = 2.0 if _periodic_plain(outer) else 1.0
    else:
        rho = solve_rho(model, q)
        h1 = outer.h(rho, 1)
        m_rho = outer.m_value(rho) if outer.m_value else 1.0
        core = -m * math.log(qf * rho * h1) - math.lgamma(m) + (m - 1) * math.log(N) - N * math.log(rho)
        periodic_factor = 1.0
        if outer.periodic:
            m_neg = outer.m_value(-rho) if outer.m_value else 1.0
            periodic_factor = (m_rho + (-1) ** N * m_neg) / m_rho
        core += math.log(m_rho)
    if periodic_factor <= 0:
        raise DomainError(f"{model.spec} has no objects of size {n}")
    if _periodic_plain(outer) and N % 2:
        raise DomainError(f"{model.spec} has no objects of odd size")
    return log_pre + core + math.log(periodic_factor)


def _periodic_plain(spec) -> bool:
    return spec.periodic and not spec.constants.has_prefactor_M


def predicted_partition_asymptotics(model: Model, q, n: int) -> Decimal:
    """First-order prediction of ``f_n(q)``, as a Decimal since it overflows floats."""
    with localcontext() as ctx:
        ctx.prec = 17
        return Decimal(repr(log_predicted_partition(model, q, n))).exp()


def partition_ratio(model: Model, q, n: int, exact_value) -> float:
    """``f_n(q) / prediction`` computed in log space."""
    return math.exp(_log_exact(exact_value) - log_predicted_partition(model, q, n))


def predicted_mean(model: Model, q, n: int) -> float:
    q = parse_q(q)
    outer = model_spec(model)
    spec, factor, shift = _scheme(model)
    c = spec.constants
    offset = outer.constants.statistic_offset
    m = c.outer_m
    N = factor * n + shift
    regime = classify(model, q)
    if regime == SUBCRITICAL:
        w = float(_q_tau(spec, q))
        if c.has_prefactor_M:
            return offset + m * w / (1 - w)
        return offset + 1 + (m + 1) * w / (1 - w)
    if regime == CRITICAL:
        beta = -spec.lambda_M + m / 2
        return offset + m * (c.tau_H / -c.c_H) * math.exp(_log_gamma_ratio(beta, beta + 0.5)) * math.sqrt(N)
    rho = solve_rho(model, q)
    mu = 1 / (float(q) * rho * spec.h(rho, 1))
    return offset + mu * N


# ---------------------------------------------------------------------------
# distances


def tv_distance(p: dict, r: dict) -> float:
    """Total variation ``(1/2) sum |p_k - r_k|`` of two pmfs given as dicts."""
    keys = set(p) | set(r)
    return 0.5 * math.fsum(abs(float(p.get(k, 0)) - float(r.get(k, 0))) for k in keys)


def tv_to_law(dist: GibbsDistribution, scaling: ScalingSpec, law: NegBin) -> float:
    """TV between the shifted statistic and a discrete law, counting the law's mass off the support."""
    shift = scaling.shift + scaling.shift_per_n * dist.n
    if shift != int(shift):
        raise DomainError("TV needs an integer shift")
    shift = int(shift)
    probs = dist.probabilities()
    total, covered = [], []
    for k, pk in zip(dist.support, probs):
        j = k - shift
        rk = law_pdf(law, j) if j >= 0 else 0.0
        covered.append(rk)
        total.append(abs(pk - rk))
    tail = max(0.0, 1.0 - math.fsum(covered))
    return 0.5 * (math.fsum(total) + tail)


def ks_distance(dist: GibbsDistribution, scaling: ScalingSpec, law: Law) -> float:
    """Kolmogorov distance between the rescaled statistic and a continuous law."""
    cdf = dist.cdf_values()
    best = 0.0
    prev = 0.0
    for k, fk in zip(dist.support, cdf):
        x = scaling.apply(k, dist.n)
        F = law_cdf(law, x)
        best = max(best, abs(fk - F), abs(prev - F))
        prev = fk
    return best


def distance_to_limit(dist: GibbsDistribution, model: Model) -> tuple:
    """('tv' or 'ks', value, law) using the regime's limit law."""
    law, scaling = limit_law_for(model, dist.q)
    if isinstance(law, NegBin):
        return "tv", tv_to_law(dist, scaling, law), law
    return "ks", ks_distance(dist, scaling, law), law


def richardson(values: list, ns: list, rate: float = 0.5) -> float:
    """Richardson extrapolation of the last two values assuming an error ~ n^(-rate)."""
    (n1, v1), (n2, v2) = (ns[-2], values[-2]), (ns[-1], values[-1])
    t = (n2 / n1) ** rate
    return (t * v2 - v1) / (t - 1)
