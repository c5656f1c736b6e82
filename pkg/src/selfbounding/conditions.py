"""Numerical verification of the two conditions behind the improved bound.

For a family parameter gamma the candidate cumulant envelope is
``G_gamma(lam) = M lam^2 / (2 (1 - gamma lam M / 2))``. The improved upper
tail with coefficient gamma is justified on an interval (0, lam_hat) where

  * condition 1:  psi(-lam M) <= rho_gamma(lam) = 2 M^2 lam^2 / D_gamma(lam)
  * condition 2:  D_gamma(lam) > 0

and the Chernoff optimiser stays inside that interval.

``d_gamma`` is the expanded quadratic
``4 (1 + lam M (a - gamma) + (M gamma lam^2 / 4)(M gamma - a))``.  It is the
polynomial the case analysis for delta_plus and the reported numerical
endpoints are built on.  The factored expression
``(M gamma lam - 2)^2 (1 + a G'_gamma(lam))`` (``d_gamma_factored``) agrees
with it only at M = 1; expanded minus factored is exactly
``a gamma M (M - 1) lam^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import THIRD, DeltaValue, SelfBoundingParams, delta_plus
from .errors import DomainError, PoleError
from .special import psi

# below this lam*M the 0/0 comparison in condition 1 is decided by its
# leading-order behaviour instead of by evaluation
SMALL_LAMBDA = 1e-6
DEFAULT_GRID_N = 10_000
BISECT_ITERS = 60


@dataclass(frozen=True)
class GammaFamily:
    a: float
    M: float
    gamma: float

    def __post_init__(self):
        if self.a < 0 or self.M <= 0 or self.gamma < 0:
            raise DomainError("need a >= 0, M > 0, gamma >= 0")


def g_gamma(fam: GammaFamily, lam):
    """G_gamma(lam) = M lam^2 / (2 (1 - gamma lam M / 2))."""
    la = np.asarray(lam, dtype=float)
    den = 1.0 - fam.gamma * la * fam.M / 2.0
    if np.any(den == 0):
        raise PoleError(f"G_gamma has a pole at lambda = {2.0 / (fam.gamma * fam.M)}")
    out = fam.M * la * la / (2.0 * den)
    return float(out) if np.ndim(lam) == 0 else out


def g_gamma_prime(fam: GammaFamily, lam):
    k = fam.gamma * fam.M / 2.0
    la = np.asarray(lam, dtype=float)
    den = 1.0 - k * la
    if np.any(den == 0):
        raise PoleError("G_gamma' has a pole at lambda = 2/(gamma M)")
    out = fam.M * la * (2.0 - k * la) / (2.0 * den * den)
    return float(out) if np.ndim(lam) == 0 else out


def d_gamma(fam: GammaFamily, lam):
    a, M, g = fam.a, fam.M, fam.gamma
    la = np.asarray(lam, dtype=float)
    out = 4.0 * (1.0 + la * M * (a - g) + (M * g * la * la / 4.0) * (M * g - a))
    return float(out) if np.ndim(lam) == 0 else out


def d_gamma_factored(fam: GammaFamily, lam):
    """(M gamma lam - 2)^2 (1 + a G'_gamma(lam)), written pole-free."""
    a, M, g = fam.a, fam.M, fam.gamma
    k = g * M / 2.0
    la = np.asarray(lam, dtype=float)
    out = 4.0 * (1.0 - k * la) ** 2 + 2.0 * a * M * la * (2.0 - k * la)
    return float(out) if np.ndim(lam) == 0 else out


def rho_gamma(fam: GammaFamily, lam):
    la = np.asarray(lam, dtype=float)
    d = np.asarray(d_gamma(fam, la))
    if np.any(d == 0):
        raise PoleError("rho_gamma has a pole where D_gamma vanishes")
    if fam.gamma > 0 and np.any(fam.M * fam.gamma * la == 2.0):
        raise PoleError("rho_gamma is undefined at M gamma lambda = 2")
    out = 2.0 * fam.M**2 * la * la / d
    return float(out) if np.ndim(lam) == 0 else out


def lambda_star_root(a: float, M: float) -> float:
    """Positive root of D_{a - 1/3}; D is positive on [0, lambda_star)."""
    if M <= 0 or a <= THIRD:
        raise DomainError("lambda_star needs a > 1/3 and M > 0")
    g = a - THIRD
    c = M * g - a
    if c >= 0:
        raise DomainError("M (a - 1/3) - a must be negative for a positive root")
    surd = math.sqrt(M * M / 9.0 - M * g * c)
    return (-M / 3.0 - surd) / ((M / 2.0) * g * c)


def default_lambda_max(gamma: float, M: float) -> float:
    return min(4.0 / (max(gamma, 1e-3) * M), 1e3)


@dataclass(frozen=True)
class Condition1Result:
    """Outcome of scanning (0, lambda_max] for the first failure.

    ``end`` is the right endpoint of the maximal interval (0, end) on which
    both conditions hold; ``bounded`` is False when no failure was found
    inside the scanned range (then ``end == lambda_max``).  ``failed_on``
    names the condition that broke first: ``"psi"``, ``"d"`` or ``None``.
    """

    gamma: float
    lambda_max: float
    end: float
    bounded: bool
    failed_on: str | None

    @property
    def interval(self) -> tuple[float, float]:
        return (0.0, self.end)

    @property
    def empty(self) -> bool:
        return self.end == 0.0


def _limit_ok(fam: GammaFamily) -> bool:
    """Sign of rho_gamma - psi(-lam M) as lam -> 0+.

    With u = lam M, c1 = a - gamma and c2 = gamma (M gamma - a) / (4 M):
    margin = u^3 (1/3 - c1) / 2 + u^4 (1/72 - c2 / 2) + O(u^5).
    """
    c1 = fam.a - fam.gamma
    if abs(c1 - THIRD) > 1e-12:
        return c1 < THIRD
    c2 = fam.gamma * (fam.M * fam.gamma - fam.a) / (4.0 * fam.M)
    return c2 <= 1.0 / 36.0


def _margins(fam: GammaFamily, lam):
    d = np.asarray(d_gamma(fam, lam))
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = 2.0 * fam.M**2 * lam * lam / d
    return rho - np.asarray(psi(-lam * fam.M)), d


def check_condition1(fam: GammaFamily, lambda_max: float | None = None,
                     grid_n: int = DEFAULT_GRID_N) -> Condition1Result:
    """Find the maximal (0, lam_hat) on which conditions 1 and 2 hold.

    A uniform grid of ``grid_n`` points on (0, lambda_max] locates the first
    failing cell; the crossing inside it is refined by bisection on the
    combined pass/fail predicate.  Only sign information is used, so the
    two conditions need no common scale.
    """
    if lambda_max is None:
        lambda_max = default_lambda_max(fam.gamma, fam.M)
    if lambda_max <= 0:
        raise DomainError("lambda_max must be positive")
    if grid_n < 1000:
        raise DomainError("grid_n must be at least 1000")

    lambda_max = float(lambda_max)
    if not _limit_ok(fam):
        return Condition1Result(fam.gamma, lambda_max, 0.0, True, "psi")

    grid = np.linspace(lambda_max / grid_n, lambda_max, grid_n)
    margin, d = _margins(fam, grid)
    tiny = grid * fam.M <= SMALL_LAMBDA
    ok = (d > 0) & ((margin >= 0) | tiny)
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return Condition1Result(fam.gamma, lambda_max, lambda_max, False, None)

    i = bad[0]
    lo = grid[i - 1] if i > 0 else 0.0
    hi = grid[i]
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _holds(fam, mid):
            lo = mid
        else:
            hi = mid
    _, d_hi = _margins(fam, np.asarray(hi))
    why = "d" if d_hi <= 0 else "psi"
    if lo * fam.M <= SMALL_LAMBDA:
        lo = 0.0
    return Condition1Result(fam.gamma, lambda_max, float(lo), True, why)


def _holds(fam: GammaFamily, lam: float) -> bool:
    if lam * fam.M <= SMALL_LAMBDA:
        return True
    margin, d = _margins(fam, np.asarray(lam))
    return bool(d > 0 and margin >= 0)


def check_condition2_upper(fam: GammaFamily, p: SelfBoundingParams,
                           lambda_tilde: float) -> float:
    """Largest t whose upper-tail optimiser stays below ``lambda_tilde``.

    The optimiser for coefficient a - 1/3 is
    lam_2(t) = (2/((a - 1/3) M)) (1 - (1 + (a - 1/3) t / (aE + b))^{-1/2}),
    increasing in t with supremum 2/((a - 1/3) M).  Returns ``inf`` when that
    supremum does not exceed ``lambda_tilde``.
    """
    a, M = fam.a, fam.M
    if a <= THIRD:
        raise DomainError("condition 2 check needs a > 1/3")
    if lambda_tilde <= 0:
        raise DomainError("lambda_tilde must be positive")
    g = a - THIRD
    r = 1.0 - lambda_tilde / 2.0 * g * M
    if r <= 0:
        return math.inf
    return p.variance_proxy / g * (1.0 / (r * r) - 1.0)


@dataclass(frozen=True)
class ConditionReport:
    a: float
    M: float
    delta: DeltaValue
    condition1: dict[float, Condition1Result] = field(default_factory=dict)
    d_positive_end: float | None = None
    lambda_star: float | None = None
    lambda_tilde: float | None = None
    condition1_satisfied: bool = False
    condition2_satisfied: bool = False
    t_max: float | None = None
    numerical_extension: bool = False
    notes: tuple[str, ...] = ()

    @property
    def condition1_interval(self) -> tuple[float, float] | None:
        """Interval for the gamma the improved bound relies on."""
        res = self.condition1.get(max(self.a - THIRD, 0.0))
        return None if res is None else res.interval


def condition_report(a: float, M: float, p: SelfBoundingParams | None = None,
                     grid_n: int = DEFAULT_GRID_N) -> ConditionReport:
    """Run the full case analysis for (a, M).

    Sub-checks that are undefined for the given (a, M) leave their fields
    empty and add a note instead of raising.
    """
    if p is None:
        p = SelfBoundingParams(M=M, a=a, b=0.0, mean_z=1.0)
    delta = delta_plus(a, M)
    notes: list[str] = []
    lam_star = None
    try:
        lam_star = lambda_star_root(a, M)
    except DomainError as exc:
        notes.append(f"lambda_star: {exc}")

    results: dict[float, Condition1Result] = {}
    for gamma in sorted({0.0, max(a - THIRD, 0.0)}):
        lam_max = default_lambda_max(gamma, M)
        if gamma > 0 and lam_star is not None:
            # scan past the root of D so the whole of [0, lambda_star) is covered
            lam_max = max(lam_max, 1.01 * lam_star)
        try:
            results[gamma] = check_condition1(GammaFamily(a, M, gamma), lam_max, grid_n)
        except DomainError as exc:
            notes.append(f"condition 1 at gamma={gamma}: {exc}")

    if a <= THIRD:
        # delta_plus = 0: gamma = 0 envelope with the a <= mu(lam) argument
        res = results.get(0.0)
        return ConditionReport(
            a, M, delta, results,
            d_positive_end=math.inf,
            condition1_satisfied=res is not None and not res.empty,
            condition2_satisfied=True,
            t_max=math.inf,
            notes=tuple(notes),
        )

    gamma = a - THIRD
    res = results.get(gamma)
    d_end = lam_star if lam_star is not None else math.inf
    lam_tilde = None
    numerical = False
    if res is not None and res.bounded and not res.empty:
        lam_tilde = res.end
    if lam_star is None:
        # M (a - 1/3) - a >= 0: only the numerically found endpoint is available
        numerical = lam_tilde is not None
        if numerical and delta.case == "otherwise":
            notes.append("improved-bound branch inapplicable; interval from numerical extension")
    lam_for_t = lam_tilde
    if res is not None and not res.bounded:
        # validated up to the end of the scan; use that as a conservative endpoint
        notes.append("no condition-1 failure in scanned range")
        lam_for_t = res.end
    if lam_star is not None:
        lam_for_t = lam_star if lam_for_t is None else min(lam_star, lam_for_t)
    t_max = None
    if lam_for_t is not None:
        t_max = check_condition2_upper(GammaFamily(a, M, gamma), p, lam_for_t)
    return ConditionReport(
        a, M, delta, results,
        d_positive_end=d_end,
        lambda_star=lam_star,
        lambda_tilde=lam_tilde,
        condition1_satisfied=res is not None and not res.empty,
        condition2_satisfied=bool(t_max is not None and t_max > 0),
        t_max=t_max,
        numerical_extension=numerical,
        notes=tuple(notes),
    )
