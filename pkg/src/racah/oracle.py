"""Extended-precision reference values from the hypergeometric definition.

Everything here runs on :mod:`mpmath` at a configurable number of decimal
digits (default 50). The entry points are :func:`weighted_drp_exact` for a
single value and :func:`exact_matrix` for a whole (small) matrix.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np

from .core import PolyMatrix, RacahParams
from .errors import DomainError, PoleError, SizeLimit

DEFAULT_DIGITS = 50
MAX_ORACLE_SIZE = 256
# Digits that must survive cancellation in the series; more are added if not.
_GUARD_DIGITS = 20


def log_gamma(x, digits: int = DEFAULT_DIGITS):
    """``log(Gamma(x))`` for ``x > 0``."""
    with mp.workdps(digits):
        x = mp.mpf(x)
        if x <= 0:
            raise DomainError(f"log_gamma needs x > 0, got {x}")
        return mp.loggamma(x)


def pochhammer(a, m: int, digits: int = DEFAULT_DIGITS):
    """Rising factorial ``a (a+1) ... (a+m-1)``; 1 for ``m = 0``."""
    if m < 0:
        raise DomainError(f"pochhammer needs m >= 0, got {m}")
    with mp.workdps(digits):
        out = mp.mpf(1)
        a = mp.mpf(a)
        for i in range(m):
            out *= a + i
        return out


def _hyp_sum(num, den, z, n_terms):
    """Running-ratio sum; returns (sum, largest |term|)."""
    total = mp.mpf(1)
    term = mp.mpf(1)
    biggest = mp.mpf(1)
    for k in range(n_terms):
        numer = mp.mpf(1)
        for p in num:
            numer *= p + k
        if numer == 0:
            break
        denom = mp.mpf(1)
        for q in den:
            denom *= q + k
        if denom == 0:
            raise PoleError(f"denominator Pochhammer vanishes at k={k + 1}")
        term = term * numer / denom * z / (k + 1)
        total += term
        biggest = max(biggest, abs(term))
    return total, biggest


def hyp4f3_terminating(num, den, z, n_terms: int, digits: int = DEFAULT_DIGITS):
    """Finite sum of the 4F3 series over ``k = 0 ... n_terms``.

    ``num[0]`` is normally ``-n`` so the series terminates by itself; the sum
    also stops as soon as any numerator factor vanishes.
    """
    if len(num) != 4 or len(den) != 3:
        raise ValueError("4F3 needs four numerator and three denominator parameters")
    with mp.workdps(digits):
        total, _ = _hyp_sum([mp.mpf(v) for v in num], [mp.mpf(v) for v in den],
                            mp.mpf(z), int(n_terms))
        return total


class _Context:
    """Per-matrix cache of the s- and n-dependent prefactors."""

    def __init__(self, p: RacahParams, digits: int):
        self.p = p
        self.digits = digits
        with mp.workdps(digits):
            self.a = mp.mpf(p.a)
            self.b = mp.mpf(p.b)
            self.al = mp.mpf(p.alpha)
            self.be = mp.mpf(p.beta)

    def log_rho(self, s):
        a, b, al, be = self.a, self.b, self.al, self.be
        lg = mp.loggamma
        return (lg(a + s + 1) + lg(b + s + al + 1) + lg(b + al - s) + lg(s - a + be + 1)
                - lg(b + s + 1) - lg(b - s) - lg(s - a + 1) - lg(a - be + s + 1))

    def log_d2(self, n):
        a, b, al, be = self.a, self.b, self.al, self.be
        lg = mp.loggamma
        if n == 0:
            low = lg(al + be + 2)
        else:
            low = mp.log(al + be + 2 * n + 1) + lg(al + be + n + 1)
        return (lg(al + n + 1) + lg(be + n + 1) + lg(a + b + al + n + 1)
                + lg(b - a + al + be + n + 1)
                - low - lg(n + 1) - lg(b - a - n) - lg(a + b - n - be))

    def lead(self, n):
        a, b, al, be = self.a, self.b, self.al, self.be
        out = mp.mpf(1)
        for i in range(n):
            out *= (a + b + al + 1 + i) * (be + 1 + i) * (a - b + 1 + i) / (i + 1)
        return out

    def series(self, n, s):
        a, b, al, be = self.a, self.b, self.al, self.be
        num = [mp.mpf(-n), a - s, a + s + 1, al + be + n + 1]
        den = [be + 1, a + b + al + 1, a - b + 1]
        return _hyp_sum(num, den, mp.mpf(1), n)

    def value(self, n, x, n_fac=None, s_fac=None, retry=True):
        """Weighted value at degree n, column x, with optional cached factors."""
        s = self.a + x
        total, biggest = self.series(n, s)
        if retry and total != 0:
            lost = mp.log10(biggest / abs(total))
            if lost > self.digits - _GUARD_DIGITS:
                # Cancellation ate the guard digits: redo this value once with more.
                extra = int(lost) + _GUARD_DIGITS + self.digits
                with mp.workdps(extra):
                    return _Context(self.p, extra).value(n, x, retry=False)
        if n_fac is None:
            n_fac = (self.lead(n), self.log_d2(n))
        if s_fac is None:
            s_fac = self.log_rho(s) + mp.log(2 * s + 1)
        lead, log_d2 = n_fac
        return lead * total * mp.exp((s_fac - log_d2) / 2)


def _check_point(p: RacahParams, n: int, s) -> int:
    if not 0 <= n <= p.n_size - 1:
        raise DomainError(f"degree {n} outside 0..{p.n_size - 1}")
    x = float(s) - p.a
    xi = round(x)
    if abs(x - xi) > 1e-9 or not 0 <= xi <= p.n_size - 1:
        raise DomainError(f"s = {s} is not a lattice point of [{p.a}, {p.b - 1}]")
    return int(xi)


def weighted_drp_exact(p: RacahParams, n: int, s, digits: int = DEFAULT_DIGITS):
    """Weighted polynomial value ``R_n(s)`` as an mpmath number."""
    x = _check_point(p, n, s)
    with mp.workdps(digits):
        return _Context(p, digits).value(int(n), x)


def exact_matrix(p: RacahParams, digits: int = DEFAULT_DIGITS) -> PolyMatrix:
    """Full ``N x N`` reference matrix rounded to double precision."""
    size = p.n_size
    if size > MAX_ORACLE_SIZE:
        raise SizeLimit(f"oracle limited to N <= {MAX_ORACLE_SIZE}, got {size}")
    out = np.empty((size, size))
    with mp.workdps(digits):
        ctx = _Context(p, digits)
        s_facs = [ctx.log_rho(ctx.a + x) + mp.log(2 * (ctx.a + x) + 1) for x in range(size)]
        for n in range(size):
            n_fac = (ctx.lead(n), ctx.log_d2(n))
            for x in range(size):
                out[n, x] = float(ctx.value(n, x, n_fac, s_facs[x]))
    return PolyMatrix(p, out, algorithm="oracle")
