"""Special functions and small combinatorial enumerators."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special

MAX_ORDER = 64


class DomainError(ValueError):
    pass


def _betainc_tail_log(a, b, w, z):
    """log of B'(a, b, z) for b > 0 with w = 1 - z, vectorized."""
    out = np.empty_like(w)
    small = w < 0.5
    with np.errstate(divide="ignore"):
        ws = w[small]
        # B_w(b, a) = w^b (1-w)^a / b * 2F1(a+b, 1; b+1; w)
        out[small] = (b * np.log(ws) + a * np.log1p(-ws) - math.log(b)
                      + np.log(special.hyp2f1(a + b, 1.0, b + 1.0, ws)))
        zl = z[~small]
        out[~small] = special.betaln(a, b) + np.log1p(-special.betainc(a, b, zl))
    return out


def log_comp_inc_beta_w(a: float, b: float, w, z=None):
    """log B'(a, b, z) taking the complement argument ``w = 1 - z``.

    Passing both w and z (when each is known to full precision) keeps
    relative accuracy at either end of the unit interval.
    """
    if a <= 0:
        raise DomainError("a must be > 0")
    w = np.asarray(w, dtype=float)
    z = 1.0 - w if z is None else np.broadcast_to(np.asarray(z, dtype=float), w.shape)
    if np.any((w < 0) | (w > 1) | (z <= 0)):
        raise DomainError("argument must lie in (0, 1]")
    if b <= 0:
        raise DomainError("b must be > 0 (the integral diverges at u = 1 otherwise)")
    return _betainc_tail_log(a, b, w, z)


def comp_inc_beta(a: float, b: float, z):
    """B'(a, b, z) = integral over [z, 1] of u^(a-1) (1-u)^(b-1)."""
    z_arr = np.asarray(z, dtype=float)
    if np.any((z_arr <= 0) | (z_arr >= 1)):
        raise DomainError("z must lie in (0, 1)")
    val = np.exp(log_comp_inc_beta_w(a, b, 1.0 - z_arr, z_arr))
    return float(val) if val.ndim == 0 else val


def log_gamma(x):
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError("log_gamma requires x > 0")
    val = special.gammaln(x_arr)
    return float(val) if val.ndim == 0 else val


def multinomial(n: int, parts) -> int:
    parts = [int(p) for p in parts]
    if any(p < 0 for p in parts) or sum(parts) != n:
        raise DomainError("parts must be nonnegative and sum to n")
    if n <= 20:
        out = math.factorial(n)
        for p in parts:
            out //= math.factorial(p)
        return out
    lg = special.gammaln(n + 1) - sum(special.gammaln(p + 1) for p in parts)
    return int(round(math.exp(lg)))


@lru_cache(maxsize=None)
def partitions(m: int) -> tuple[tuple[int, ...], ...]:
    """Integer partitions of m as multiplicity tuples (p_1, ..., p_m).

    Enumerated without recursion; returned in lexicographic order of the
    multiplicity tuples. ``partitions(0)`` is the single empty partition.
    """
    if m < 0 or m > MAX_ORDER:
        raise DomainError(f"order must lie in [0, {MAX_ORDER}]")
    if m == 0:
        return ((),)
    found = []
    # ascending-composition generator (Kelleher's algorithm)
    a = [0] * (m + 1)
    k = 1
    y = m - 1
    while k != 0:
        x = a[k - 1] + 1
        k -= 1
        while 2 * x <= y:
            a[k] = x
            y -= x
            k += 1
        ell = k + 1
        while x <= y:
            a[k] = x
            a[ell] = y
            found.append(a[:k + 2])
            x += 1
            y -= 1
        a[k] = x + y
        y = x + y - 1
        found.append(a[:k + 1])
    out = []
    for parts in found:
        mult = [0] * m
        for p in parts:
            mult[p - 1] += 1
        out.append(tuple(mult))
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def compositions3(n: int) -> tuple[tuple[int, int, int], ...]:
    if n < 0 or n > MAX_ORDER:
        raise DomainError(f"n must lie in [0, {MAX_ORDER}]")
    return tuple((q1, q2, n - q1 - q2) for q1 in range(n + 1) for q2 in range(n - q1 + 1))


@lru_cache(maxsize=None)
def partition_arrays(m: int):
    """Partitions of m as (multiplicity matrix, part counts, log prod p_a!)."""
    parts = partitions(m)
    if m == 0:
        return np.zeros((1, 0)), np.zeros(1, dtype=int), np.zeros(1)
    P = np.array(parts, dtype=float)
    return P, P.sum(axis=1).astype(int), special.gammaln(P + 1.0).sum(axis=1)
