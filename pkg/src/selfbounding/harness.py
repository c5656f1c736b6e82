"""Monte Carlo validation against concrete (M, a, b) self-bounding functions.

Instances evaluate whole batches: ``evaluator`` maps an ``(k, n)`` array of
coordinate vectors to ``k`` function values.  Sampling is split into fixed
blocks of ``BLOCK_SIZE`` draws; block ``j`` gets its own Philox stream keyed
by ``(seed, j)``, so results do not depend on how blocks are spread across
workers.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .bounds import (
    SelfBoundingParams,
    lower_tail_improved,
    lower_tail_symmetric,
    upper_tail_improved,
    upper_tail_symmetric,
)
from .errors import DomainError, InvalidParamsError

BLOCK_SIZE = 8192
CI_LEVEL = 1e-3
# relative slack for float comparisons in the definition check
DEF_RTOL = 1e-9


@dataclass(frozen=True)
class SelfBoundingInstance:
    name: str
    n: int
    claimed: SelfBoundingParams
    evaluator: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    coordinate_domain: tuple[np.ndarray, ...] | None
    sampler_description: str = ""
    # optional f_i oracle: (X, i) -> inf over coordinate i, used when the
    # coordinate domain is not enumerable
    infimum: Callable[[np.ndarray, int], np.ndarray] | None = None

    def __call__(self, X) -> np.ndarray:
        return self.evaluator(np.atleast_2d(X))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _map_blocks(fn, samples: int, workers: int) -> list:
    nblocks = -(-samples // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, samples - j * BLOCK_SIZE) for j in range(nblocks)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, range(nblocks), sizes))
    return [fn(j, k) for j, k in zip(range(nblocks), sizes)]


def draw_coordinates(inst: SelfBoundingInstance, samples: int, seed: int,
                     workers: int = 1) -> np.ndarray:
    """Draw ``samples`` coordinate vectors in a partition-independent way."""
    parts = _map_blocks(lambda j, k: inst.sampler(_block_rng(seed, j), k), samples, workers)
    return np.concatenate(parts, axis=0)


def sample_values(inst: SelfBoundingInstance, samples: int, seed: int,
                  workers: int = 1) -> np.ndarray:
    """Values of f at the same points :func:`draw_coordinates` would return."""
    parts = _map_blocks(lambda j, k: inst.evaluator(inst.sampler(_block_rng(seed, j), k)),
                        samples, workers)
    return np.concatenate(parts).astype(float)


# -- generators -----------------------------------------------------------------


def make_distinct_values(n: int, alphabet: int, M: float = 1.0) -> SelfBoundingInstance:
    """f(x) = M * (number of distinct symbols in x), x_i uniform on the alphabet.

    Changing one coordinate can remove at most one distinct symbol, and the
    drop is 1 exactly when x_i is unique, so the total drop is at most f:
    the count is (1, 1, 0) self-bounding and M times it is (M, 1, 0).
    """
    if n < 1 or alphabet < 2 or M <= 0:
        raise InvalidParamsError("need n >= 1, alphabet >= 2, M > 0")

    def evaluator(X):
        S = np.sort(X, axis=1)
        return M * (1 + np.count_nonzero(np.diff(S, axis=1), axis=1))

    def sampler(rng, k):
        return rng.integers(0, alphabet, size=(k, n))

    mean = M * alphabet * -math.expm1(n * math.log1p(-1.0 / alphabet))
    symbols = np.arange(alphabet)
    return SelfBoundingInstance(
        name="distinct-values",
        n=n,
        claimed=SelfBoundingParams(M=M, a=1.0, b=0.0, mean_z=mean),
        evaluator=evaluator,
        sampler=sampler,
        coordinate_domain=tuple(symbols for _ in range(n)),
        sampler_description=f"x_i iid uniform on {{0..{alphabet - 1}}}",
    )


def make_scaled_coverage(sets: Sequence[Sequence[int]], M: float, p_include: float,
                         claimed_M: float | None = None) -> SelfBoundingInstance:
    """f(x) = M * |union of the sets i with x_i = 1|, x_i ~ Bernoulli(p_include).

    Dropping set i loses the elements only it covers, at most |S_i| of them,
    and those private elements are disjoint across i, so the coverage is
    (max |S_i|, 1, 0) self-bounding.  The difference cap is computed from the
    family (attained with every other set inactive).  If ``claimed_M`` is
    given and smaller than the cap, the family is rejected.
    """
    if not 0 < p_include < 1:
        raise InvalidParamsError("p_include must lie in (0, 1)")
    if M <= 0 or not sets:
        raise InvalidParamsError("need M > 0 and at least one set")
    ground = sorted(set().union(*map(set, sets)))
    index = {e: j for j, e in enumerate(ground)}
    incidence = np.zeros((len(sets), len(ground)), dtype=np.int64)
    for i, s in enumerate(sets):
        for e in s:
            incidence[i, index[e]] = 1

    def evaluator(X):
        covered = (np.asarray(X, dtype=np.int64) @ incidence) > 0
        return M * covered.sum(axis=1)

    def sampler(rng, k):
        return (rng.random((k, len(sets))) < p_include).astype(np.int64)

    # per-coordinate cap, read off the witnesses x = e_i against x = 0
    witnesses = np.eye(len(sets), dtype=np.int64)
    cap = float(np.max(evaluator(witnesses) - evaluator(np.zeros((1, len(sets)), np.int64))))
    if claimed_M is not None and claimed_M < cap * (1 - DEF_RTOL):
        raise InvalidParamsError(
            f"claimed M={claimed_M} is below the true difference cap {cap}")
    degree = incidence.sum(axis=0)
    mean = M * float(np.sum(-np.expm1(degree * math.log1p(-p_include))))
    bits = np.array([0, 1])
    return SelfBoundingInstance(
        name="coverage",
        n=len(sets),
        claimed=SelfBoundingParams(M=cap if claimed_M is None else claimed_M,
                                   a=1.0, b=0.0, mean_z=mean),
        evaluator=evaluator,
        sampler=sampler,
        coordinate_domain=tuple(bits for _ in sets),
        sampler_description=f"x_i iid Bernoulli({p_include})",
    )


def make_constant(n: int, value: float = 1.0, M: float = 1.0) -> SelfBoundingInstance:
    def evaluator(X):
        return np.full(len(X), float(value))

    def sampler(rng, k):
        return rng.integers(0, 2, size=(k, n))

    bits = np.array([0, 1])
    return SelfBoundingInstance(
        name="constant", n=n,
        claimed=SelfBoundingParams(M=M, a=0.0, b=0.0, mean_z=float(value)),
        evaluator=evaluator, sampler=sampler,
        coordinate_domain=tuple(bits for _ in range(n)),
        sampler_description="x_i iid Bernoulli(1/2)",
    )


def coverage_windows(n_sets: int, width: int = 2, M: float = 1.0,
                     p_include: float = 0.5) -> SelfBoundingInstance:
    """Coverage by the sliding windows {i, ..., i + width - 1}."""
    sets = [list(range(i, i + width)) for i in range(n_sets)]
    return make_scaled_coverage(sets, M, p_include)


# -- definition check -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    x: tuple
    coordinate: int | None
    kind: str
    value: float


@dataclass(frozen=True)
class SelfBoundingReport:
    samples: int
    max_difference: float
    min_difference: float
    max_sum_slack: float
    n_violations: int
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return self.n_violations == 0


def coordinate_infimum(inst: SelfBoundingInstance, X: np.ndarray, i: int) -> np.ndarray:
    """f_i(x^(i)) = min over the i-th coordinate's domain, by enumeration."""
    if inst.infimum is not None:
        return inst.infimum(X, i)
    if inst.coordinate_domain is None:
        raise DomainError(f"{inst.name}: coordinate domain is not enumerable "
                          "and no infimum oracle was supplied")
    best = None
    Xi = X.copy()
    for v in inst.coordinate_domain[i]:
        Xi[:, i] = v
        vals = inst.evaluator(Xi)
        best = vals if best is None else np.minimum(best, vals)
    return best


def check_self_bounding(inst: SelfBoundingInstance, samples: int, seed: int,
                        max_witnesses: int = 10) -> SelfBoundingReport:
    """Check both (M, a, b) inequalities at ``samples`` random points.

    Violations are reported with witnesses, never raised.
    """
    p = inst.claimed
    X = draw_coordinates(inst, samples, seed)
    fx = inst.evaluator(X).astype(float)
    tol = DEF_RTOL * max(1.0, float(np.max(np.abs(fx))))
    total = np.zeros_like(fx)
    dmax, dmin = -math.inf, math.inf
    violations: list[Violation] = []
    count = 0
    for i in range(inst.n):
        diff = fx - coordinate_infimum(inst, X, i)
        total += diff
        dmax = max(dmax, float(diff.max()))
        dmin = min(dmin, float(diff.min()))
        for kind, mask in (("negative-difference", diff < -tol),
                           ("difference-above-M", diff > p.M + tol)):
            hits = np.flatnonzero(mask)
            count += hits.size
            for r in hits[: max(0, max_witnesses - len(violations))]:
                violations.append(Violation(tuple(X[r].tolist()), i, kind, float(diff[r])))
    slack = total - (p.a * fx + p.b)
    hits = np.flatnonzero(slack > tol)
    count += hits.size
    for r in hits[: max(0, max_witnesses - len(violations))]:
        violations.append(Violation(tuple(X[r].tolist()), None, "sum-above-af+b", float(slack[r])))
    return SelfBoundingReport(samples, dmax, dmin, float(slack.max()), count, tuple(violations))


# -- tail estimation -----------------------------------------------------------------


def cp_lower(k, n, level=CI_LEVEL):
    """One-sided exact (Clopper-Pearson) lower confidence bound for k/n."""
    k = np.asarray(k)
    with np.errstate(invalid="ignore"):
        lo = stats.beta.ppf(level, k, n - k + 1)
    return np.where(k == 0, 0.0, lo)


@dataclass(frozen=True)
class EmpiricalTailCurve:
    t_grid: np.ndarray
    upper_probs: np.ndarray
    lower_probs: np.ndarray
    mean_estimate: float
    center: float
    samples: int
    seed: int
    upper_ci_radius: np.ndarray
    lower_ci_radius: np.ndarray
    level: float = CI_LEVEL


def estimate_tails(inst: SelfBoundingInstance, t_grid, samples: int, seed: int,
                   center: float | None = None, workers: int = 1,
                   level: float = CI_LEVEL) -> EmpiricalTailCurve:
    """Empirical P(Z - c >= t) and P(Z - c <= -t) over ``t_grid``.

    ``c`` defaults to the sample mean.  The radii are ``p_hat - L`` with L
    the one-sided Clopper-Pearson lower bound at ``level``, so
    ``p_hat - radius`` is a lower confidence bound for the true tail.
    """
    if samples < 10_000:
        raise InvalidParamsError("estimate_tails needs at least 10^4 samples")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0) or np.any(t < 0):
        raise InvalidParamsError("t_grid must be a nonempty ascending array of t >= 0")
    z = sample_values(inst, samples, seed, workers)
    mean = math.fsum(z) / samples
    c = mean if center is None else float(center)
    dev = np.sort(z - c)
    # counts via binary search on the sorted deviations
    up = samples - np.searchsorted(dev, t, side="left")
    lo = np.searchsorted(dev, -t, side="right")
    up_p, lo_p = up / samples, lo / samples
    return EmpiricalTailCurve(
        t_grid=t,
        upper_probs=up_p,
        lower_probs=lo_p,
        mean_estimate=mean,
        center=c,
        samples=samples,
        seed=seed,
        upper_ci_radius=up_p - cp_lower(up, samples, level),
        lower_ci_radius=lo_p - cp_lower(lo, samples, level),
        level=level,
    )


@dataclass(frozen=True)
class ValidationRow:
    t: float
    tail: str
    empirical: float
    ci_radius: float
    bounds: dict[str, float]
    passed: bool


VALIDATED_BOUNDS = {
    "upper": {"Mab-symmetric": upper_tail_symmetric, "Mab-improved": upper_tail_improved},
    "lower": {"Mab-symmetric": lower_tail_symmetric, "Mab-improved": lower_tail_improved},
}


def validate_bounds(inst: SelfBoundingInstance, t_grid, samples: int, seed: int,
                    params: SelfBoundingParams | None = None,
                    workers: int = 1) -> list[ValidationRow]:
    """Compare empirical tails with the (M, a, b) bounds at the exact mean.

    Tails are centred at ``params.mean_z`` (the claimed exact mean).  A row
    passes when ``empirical - ci_radius`` does not exceed any bound.  Lower
    tails are only checked inside their window t <= E[Z].
    """
    p = params or inst.claimed
    curve = estimate_tails(inst, t_grid, samples, seed, center=p.mean_z, workers=workers)
    rows = []
    for tail, probs, radii in (("upper", curve.upper_probs, curve.upper_ci_radius),
                               ("lower", curve.lower_probs, curve.lower_ci_radius)):
        for t, pr, r in zip(curve.t_grid, probs, radii):
            if tail == "lower" and t > p.mean_z:
                continue
            bounds = {name: fn(p, float(t)).probability
                      for name, fn in VALIDATED_BOUNDS[tail].items()}
            passed = all(pr - r <= b for b in bounds.values())
            rows.append(ValidationRow(float(t), tail, float(pr), float(r), bounds, passed))
    return rows


# -- cumulant ----------------------------------------------------------------------------

# exp overflows near 709.78
_EXP_GUARD = 700.0


@dataclass(frozen=True)
class CumulantEstimate:
    lambda_grid: np.ndarray
    g_values: np.ndarray
    g_se: np.ndarray
    g_prime_values: np.ndarray
    g_prime_se: np.ndarray
    mean_estimate: float
    samples: int
    seed: int


def estimate_cumulant(inst: SelfBoundingInstance, lambda_grid, samples: int,
                      seed: int) -> CumulantEstimate:
    """Estimate G(lam) = log E exp(lam (Z - E Z)) and G'(lam) by sample averages.

    G' uses the ratio E[(Z - EZ) e^{lam (Z - EZ)}] / E[e^{lam (Z - EZ)}].
    Standard errors come from the delta method.
    """
    lams = np.asarray(lambda_grid, dtype=float)
    p = inst.claimed
    if np.any(np.abs(lams) * p.M * inst.n > _EXP_GUARD):
        raise DomainError("|lambda| M n too large: exp(lambda Z) would overflow")
    z = sample_values(inst, samples, seed)
    mean = math.fsum(z) / samples
    d = z - mean
    g, gse, gp, gpse = (np.empty_like(lams) for _ in range(4))
    root_n = math.sqrt(samples)
    for k, lam in enumerate(lams):
        x = lam * d
        shift = x.max()
        w = np.exp(x - shift)
        wbar = w.mean()
        g[k] = math.log(wbar) + shift
        gse[k] = w.std(ddof=1) / (root_n * wbar)
        ratio = np.mean(d * w) / wbar
        gp[k] = ratio
        gpse[k] = np.std(d * w - ratio * w, ddof=1) / (root_n * wbar)
    return CumulantEstimate(lams, g, gse, gp, gpse, mean, samples, seed)


# -- Harris ----------------------------------------------------------------------------------


@dataclass(frozen=True)
class HarrisTrial:
    kind: str  # "increasing-increasing" or "decreasing-increasing"
    covariance: float
    se: float
    margin: float  # signed distance to the tolerance; >= 0 means consistent
    passed: bool


@dataclass(frozen=True)
class HarrisReport:
    n: int
    samples: int
    seed: int
    z: float
    trials: tuple[HarrisTrial, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(tr.passed for tr in self.trials)

    @property
    def min_margin(self) -> float:
        return min(tr.margin for tr in self.trials)


def random_monotone_map(rng: np.random.Generator, knots: int = 5):
    """Nondecreasing piecewise-linear map of [0, 1] with random knots."""
    xs = np.concatenate([[0.0], np.sort(rng.random(knots)), [1.0]])
    ys = np.concatenate([[0.0], np.cumsum(rng.exponential(size=knots + 1))])
    return lambda u: np.interp(u, xs, ys)


def random_monotone_function(rng: np.random.Generator, n: int, combine: str = "max"):
    """Coordinatewise nondecreasing f on [0, 1]^n.

    Weighted sum of random monotone coordinate maps plus a max (or min) of
    a second set of maps; both parts are nondecreasing in each coordinate.
    """
    first = [random_monotone_map(rng) for _ in range(n)]
    second = [random_monotone_map(rng) for _ in range(n)]
    w = rng.exponential(size=n)
    c = rng.exponential()
    red = np.max if combine == "max" else np.min

    def f(U):
        lin = sum(w[i] * first[i](U[:, i]) for i in range(n))
        return lin + c * red(np.stack([h(U[:, i]) for i, h in enumerate(second)]), axis=0)

    return f


def covariance_with_se(fv: np.ndarray, gv: np.ndarray) -> tuple[float, float]:
    fc, gc = fv - fv.mean(), gv - gv.mean()
    u = fc * gc
    return float(u.mean()), float(u.std(ddof=1) / math.sqrt(len(u)))


def harris_check(n: int, samples: int, seed: int, pairs: int = 5,
                 level: float = CI_LEVEL) -> HarrisReport:
    """Sign of Cov(f, g) for random monotone f, g of independent uniforms.

    Both nondecreasing: Cov >= 0.  f replaced by x -> f(1 - x), which is
    nonincreasing: Cov <= 0.  Each estimate is accepted when it is on the
    right side of zero within ``z`` standard errors, ``z`` the normal
    quantile at ``level``.
    """
    if n < 1:
        raise InvalidParamsError("n must be positive")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    z = float(stats.norm.isf(level))
    trials = []
    for _ in range(pairs):
        f = random_monotone_function(rng, n, "max")
        g = random_monotone_function(rng, n, "min")
        U = rng.random((samples, n))
        gv = g(U)
        cov, se = covariance_with_se(f(U), gv)
        trials.append(HarrisTrial("increasing-increasing", cov, se, cov + z * se, cov >= -z * se))
        cov, se = covariance_with_se(f(1.0 - U), gv)
        trials.append(HarrisTrial("decreasing-increasing", cov, se, z * se - cov, cov <= z * se))
    return HarrisReport(n, samples, seed, z, tuple(trials))


INSTANCES = {
    "distinct-values": make_distinct_values,
    "coverage": coverage_windows,
}
