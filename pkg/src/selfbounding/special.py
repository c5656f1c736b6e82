"""Scalar functions used by the bounds and by the inequality checks.

All functions accept a float or a numpy array and return the same kind.
Domain violations raise :class:`~selfbounding.errors.DomainError`.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

MU_LIMIT = 1.0 / 3.0

# below this |lambda M| mu switches to its Maclaurin expansion
_SERIES_CUTOFF = 1e-4
_TAIL_TERMS = 30


def _ret(x, original):
    if np.ndim(original) == 0:
        return float(x)
    return x


def _exp_tail(x, k):
    """e^x minus its Taylor polynomial of degree k - 1, without cancellation."""
    xa = np.asarray(x, dtype=float)
    # |x| < 1: 30 series terms leave a remainder far below double precision
    series = np.zeros_like(xa)
    coef = 1.0 / math.factorial(k + _TAIL_TERMS - 1)
    for j in range(k + _TAIL_TERMS - 1, k - 1, -1):
        series = series * xa + coef
        coef *= j
    series = series * xa**k
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.expm1(xa) - sum(xa**j / math.factorial(j) for j in range(1, k))
    return np.where(np.abs(xa) < 1.0, series, direct)


def psi(x):
    """psi(x) = e^x - x - 1, nonnegative with a double zero at the origin."""
    return _ret(_exp_tail(x, 2), x)


def alpha(x, lam):
    """Ratio psi(-lam*x) / (x * psi(-lam)).

    Nondecreasing in ``x`` on (0, inf) for every fixed ``lam != 0``; this is
    what lets a per-coordinate cap M replace the cap 1 in the entropy bound.
    """
    xa = np.asarray(x, dtype=float)
    la = np.asarray(lam, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("alpha requires x > 0")
    if np.any(la == 0):
        raise DomainError("alpha is undefined at lambda = 0")
    out = np.asarray(psi(-la * xa)) / (xa * np.asarray(psi(-la)))
    if np.ndim(x) == 0 and np.ndim(lam) == 0:
        return float(out)
    return out


def s_func(x):
    """s(x) = 1 + x - sqrt(1 + 2x) for x >= -1/2.

    Evaluated as x^2 / (1 + x + sqrt(1 + 2x)), which is the same quantity
    without the cancellation near 0.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa < -0.5):
        raise DomainError("s(x) requires x >= -1/2")
    out = xa * xa / (1.0 + xa + np.sqrt(1.0 + 2.0 * xa))
    return _ret(out, x)


def y_func(x):
    """y(x) = x^2 / (1 + x) for x > -1."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= -1):
        raise DomainError("y(x) requires x > -1")
    return _ret(xa * xa / (1.0 + xa), x)


def _mu_series(u):
    # numerator and denominator of mu divided by u^3, truncated after u^3
    num = 2.0 / 3 + u * (-1.0 / 6 + u * (1.0 / 30 - u / 180))
    den = 2.0 + u * (-2.0 / 3 + u * (1.0 / 6 - u / 30))
    return num / den


def mu(lam, M):
    """Largest admissible ``a`` at ``lam`` for the gamma = 0 comparison.

    mu(lam) = (2 M^2 lam^2 - 4 phi) / (4 lam M phi), phi = e^{-lam M} + lam M - 1.
    The same expression serves the negative-lambda branch (there the
    requirement reads a >= mu). Tends to 1/3 as lam -> 0; the removable
    singularity itself is a domain error, use ``MU_LIMIT``.
    """
    la = np.asarray(lam, dtype=float)
    if np.any(np.asarray(M) <= 0):
        raise DomainError("mu requires M > 0")
    if np.any(la == 0):
        raise DomainError("mu is undefined at lambda = 0 (limit is MU_LIMIT)")
    u = la * M
    # 2u^2 - 4 phi = -4 (e^{-u} - 1 + u - u^2/2)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = -_exp_tail(-u, 3) / (u * _exp_tail(-u, 2))
    out = np.where(np.abs(u) < _SERIES_CUTOFF, _mu_series(u), direct)
    return _ret(out, lam)
