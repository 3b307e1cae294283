"""Parameters, matrix container and the closed-form scalar functions.

Conventions used throughout the package:

* the lattice is ``s = a, a+1, ..., b-1`` with ``N = b - a`` points;
* a matrix row is indexed by the degree ``n`` and a column by ``x = s - a``;
* "weighted" values are orthonormal: ``sum_x R[n, x] * R[m, x] = delta_nm``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import ConstraintViolation, DomainError, NonIntegerSize, RacahOverflowError

# Largest natural log that still exponentiates to a finite double.
LOG_MAX = 709.0
SIZE_TOL = 1e-9


@dataclass(frozen=True)
class RacahParams:
    """Validated parameter tuple ``(a, b, alpha, beta)`` with size ``N = b - a``."""

    a: float
    b: float
    alpha: float
    beta: float
    n_size: int = field(init=False)

    def __post_init__(self):
        a, b, alpha, beta = (float(v) for v in (self.a, self.b, self.alpha, self.beta))
        for name, value in zip(("a", "b", "alpha", "beta"), (a, b, alpha, beta)):
            if not math.isfinite(value):
                raise ConstraintViolation(f"{name} must be finite, got {value}")
        if not a > -0.5:
            raise ConstraintViolation(f"a > -1/2 fails: a = {a}")
        if not b > a:
            raise ConstraintViolation(f"b > a fails: b = {b}, a = {a}")
        size = round(b - a)
        if abs((b - a) - size) > SIZE_TOL:
            raise NonIntegerSize(f"b - a = {b - a} is not an integer")
        if size < 1:
            raise ConstraintViolation(f"b - a must be a positive integer, got {b - a}")
        if not alpha > -1:
            raise ConstraintViolation(f"alpha > -1 fails: alpha = {alpha}")
        if not beta > -1:
            raise ConstraintViolation(f"beta > -1 fails: beta = {beta}")
        if not beta < 2 * a + 1:
            raise ConstraintViolation(
                f"beta < 2a+1 fails: {beta} >= {2 * a + 1}"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "n_size", int(size))

    @property
    def is_special(self) -> bool:
        """True for ``a = alpha = beta = 0``, where the symmetric fast path applies."""
        return self.a == 0 and self.alpha == 0 and self.beta == 0

    def lattice(self) -> np.ndarray:
        """The lattice points ``s = a ... b-1`` as floats."""
        return self.a + np.arange(self.n_size, dtype=float)

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "alpha": self.alpha, "beta": self.beta,
                "N": self.n_size}


def validate_params(a: float, b: float, alpha: float, beta: float) -> RacahParams:
    """Build a :class:`RacahParams`, raising on any violated constraint."""
    return RacahParams(a, b, alpha, beta)


@dataclass(frozen=True, eq=False)
class PolyMatrix:
    """Weighted polynomial values ``values[n, x] = R_n(a + x)``.

    Only rows ``0 ... max_order`` are stored. The array is made read-only.
    """

    params: RacahParams
    values: np.ndarray
    algorithm: str = "unknown"

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != self.params.n_size:
            raise ValueError(
                f"values must have shape (rows, {self.params.n_size}), got {values.shape}"
            )
        if values.shape[0] < 1 or values.shape[0] > self.params.n_size:
            raise ValueError(f"row count {values.shape[0]} outside 1..N")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_size(self) -> int:
        return self.params.n_size

    @property
    def max_order(self) -> int:
        return self.values.shape[0] - 1

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


def _lattice_check(p: RacahParams, s) -> np.ndarray:
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < p.a - SIZE_TOL) or np.any(s_arr > p.b - 1 + SIZE_TOL):
        raise DomainError(f"s outside [{p.a}, {p.b - 1}]: {s}")
    return s_arr


def log_weight_rho(p: RacahParams, s):
    """Natural log of the weight ``rho(s)``; accepts scalars or arrays."""
    s_arr = _lattice_check(p, s)
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    out = (gammaln(a + s_arr + 1) + gammaln(b + s_arr + al + 1)
           + gammaln(b + al - s_arr) + gammaln(s_arr - a + be + 1)
           - gammaln(b + s_arr + 1) - gammaln(b - s_arr)
           - gammaln(s_arr - a + 1) - gammaln(a - be + s_arr + 1))
    return float(out) if out.ndim == 0 else out


def weight_rho(p: RacahParams, s):
    """The weight ``rho(s)``. Raises :class:`RacahOverflowError` past double range."""
    log_w = log_weight_rho(p, s)
    if np.any(np.abs(log_w) > LOG_MAX):
        raise RacahOverflowError("weight exceeds double range; use log_weight_rho")
    return np.exp(log_w) if isinstance(log_w, np.ndarray) else math.exp(log_w)


def log_norm_d2(p: RacahParams, n: int) -> float:
    """Natural log of the squared norm ``d_n^2``."""
    n = int(n)
    if n < 0 or n > p.n_size - 1:
        raise DomainError(f"degree {n} outside 0..{p.n_size - 1}")
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    lg = math.lgamma
    # (al+be+2n+1) * Gamma(al+be+n+1) collapses to Gamma(al+be+2) at n = 0,
    # which keeps the expression valid when al+be+1 <= 0.
    if n == 0:
        low = lg(al + be + 2)
    else:
        low = math.log(al + be + 2 * n + 1) + lg(al + be + n + 1)
    return (lg(al + n + 1) + lg(be + n + 1) + lg(a + b + al + n + 1)
            + lg(b - a + al + be + n + 1)
            - low - lg(n + 1) - lg(b - a - n) - lg(a + b - n - be))


def norm_d2(p: RacahParams, n: int) -> float:
    """The squared norm ``d_n^2``."""
    log_d = log_norm_d2(p, n)
    if abs(log_d) > LOG_MAX:
        raise RacahOverflowError("norm exceeds double range; use log_norm_d2")
    return math.exp(log_d)


def sigma_tau_lambda(p: RacahParams, s, n: int):
    """Coefficient functions of the difference equation along ``s``.

    ``sigma`` vanishes at ``s = a``; ``lambda`` vanishes at ``n = 0``.
    """
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    sigma = (s + a - be) * (b + al - s) * (s - a) * (s + b)
    tau = (a * (al + 1) * (a - be) + b * (b + al) * (be + 1)
           - (al + 1) * (be + 1) - s * (s + 1) * (al + be + 2))
    lam = n * (n + 1 + al + be)
    return sigma, tau, lam


def weight_ratio_next(p: RacahParams, s):
    """Algebraic ``rho(s+1) / rho(s)`` for ``s = a ... b-2``.

    At ``s = b - 1`` it is 0 for ``alpha != 0`` and 0/0 for ``alpha = 0``.
    """
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    return ((a + s + 1) * (b + s + al + 1) * (s - a + be + 1) * (b - s - 1)
            / ((b + al - s - 1) * (b + s + 1) * (s - a + 1) * (a - be + s + 1)))


def log_weighted_row0(p: RacahParams) -> np.ndarray:
    """``log R_0(s)`` for every lattice point, from log-gamma values."""
    s = p.lattice()
    return 0.5 * (log_weight_rho(p, s) + np.log(2 * s + 1) - log_norm_d2(p, 0))
