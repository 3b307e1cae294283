"""Comparison generators: Zhu's n- and s-recurrences, Daoui's algorithm, GSOP.

These exist to be measured against ImSt, so they follow the published
procedures without extra safeguards. Where a printed coefficient had to be
corrected the corrected form is used and the printed one is kept in
:data:`PRINTED_FORMS` for reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    PolyMatrix,
    RacahParams,
    log_norm_d2,
    log_weighted_row0,
    sigma_tau_lambda,
    weight_ratio_next,
)
from .errors import DegenerateRow, NonIntegerBeta, NumericalBreakdown

GSOP_EPS = 2.2204e-16
DAOUI_THRESHOLD = 1e-6


class Algorithm(str, Enum):
    ZHU_N = "zhu_n"
    ZHU_S = "zhu_s"
    DAOUI = "daoui"
    IMST = "imst"
    ORACLE = "oracle"


@dataclass(frozen=True)
class AlgorithmId:
    """A generator plus an optional GSOP pass on its output."""

    id: Algorithm
    gsop_post: bool = False

    @classmethod
    def parse(cls, text: str) -> "AlgorithmId":
        """Accepts ``zhu_n``, ``imst`` ... with an optional ``+gsop`` suffix."""
        name, _, post = text.partition("+")
        if post not in ("", "gsop"):
            raise ValueError(f"unknown post-process {post!r}")
        return cls(Algorithm(name.replace("-", "_")), post == "gsop")

    def __str__(self):
        return self.id.value + ("+gsop" if self.gsop_post else "")


def _order(p: RacahParams, order: int | None) -> int:
    if order is None:
        return p.n_size - 1
    if not 0 <= order <= p.n_size - 1:
        raise ValueError(f"order {order} outside 0..{p.n_size - 1}")
    return int(order)


def _finite_or_raise(values: np.ndarray, where: str):
    bad = ~np.isfinite(values)
    if bad.any():
        n, x = np.argwhere(bad)[0]
        raise NumericalBreakdown(f"non-finite value in {where}", n=int(n), x=int(x))


# -- Zhu, recurrence over n ------------------------------------------------

def zhu_coefficients(p: RacahParams, n: int, s):
    """``(A, B, C)`` of ``A R_{n+1} = B (d_n/d_{n+1}) R_n - C (d_{n-1}/d_{n+1}) R_{n-1}``.

    A carries ``(al+be+n+1)`` and B the ``+1/2`` constant; with those two
    the relation reproduces exact values.
    """
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    ab = al + be
    big_a = (n + 1) * (ab + n + 1) / ((ab + 2 * n + 1) * (ab + 2 * n + 2))
    big_b = (s * (s + 1) - (a * a + b * b + (a - be) ** 2 + (b + al) ** 2 - 2) / 4
             + (ab + 2 * n) * (ab + 2 * n + 2) / 8
             - (be * be - al * al) * ((2 * b + al) ** 2 - (2 * a - be) ** 2)
             / (8 * (ab + 2 * n) * (ab + 2 * n + 2)))
    big_c = ((al + n) * (be + n) / ((ab + 2 * n) * (ab + 2 * n + 1))
             * ((a + b + (al - be) / 2) ** 2 - (n + ab / 2) ** 2)
             * ((b - a + ab / 2) ** 2 - (n + ab / 2) ** 2))
    return big_a, big_b, big_c


def zhu_row1(p: RacahParams, row0: np.ndarray) -> np.ndarray:
    """Degree-1 row from the Rodrigues-type initial condition.

    ``rho(s+1) sigma(s+1) / rho(s)`` is expanded algebraically so the last
    lattice point, where ``rho(b)`` is undefined, needs no special case.
    """
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    s = p.lattice()
    shifted = (a + s + 1) * (b + s + al + 1) * (s - a + be + 1) * (b - s - 1)
    sig = sigma_tau_lambda(p, s, 0)[0]
    scale = math.exp((log_norm_d2(p, 0) - log_norm_d2(p, 1)) / 2)
    return -row0 * scale * (shifted - sig) / (2 * s + 1)


def _zhu_n_rows(p: RacahParams, order: int, cols=None) -> np.ndarray:
    s = p.lattice() if cols is None else p.a + np.asarray(cols, dtype=float)
    row0 = np.exp(log_weighted_row0(p))
    R = np.zeros((order + 1, s.size))
    R[0] = row0 if cols is None else row0[np.asarray(cols)]
    if order >= 1:
        r1 = zhu_row1(p, row0)
        R[1] = r1 if cols is None else r1[np.asarray(cols)]
    logd = [log_norm_d2(p, n) for n in range(order + 1)]
    for n in range(1, order):
        big_a, big_b, big_c = zhu_coefficients(p, n, s)
        r_n = math.exp((logd[n] - logd[n + 1]) / 2)
        r_m = math.exp((logd[n - 1] - logd[n + 1]) / 2)
        with np.errstate(all="ignore"):
            R[n + 1] = (big_b * r_n * R[n] - big_c * r_m * R[n - 1]) / big_a
    return R


def zhu_n_generate(p: RacahParams, order: int | None = None) -> PolyMatrix:
    """Three-term recurrence over the degree, no stabilization."""
    order = _order(p, order)
    R = _zhu_n_rows(p, order)
    _finite_or_raise(R, "zhu_n")
    return PolyMatrix(p, R, algorithm="zhu_n")


# -- Zhu, recurrence over s ------------------------------------------------

def s_step_coefficients(p: RacahParams, s: float, lam):
    """``(c1, c2)`` of ``R(s) = c1 R(s-1) - c2 R(s-2)`` with the weight roots folded in.

    The second coefficient uses ``s * sigma(s-1)``; the printed ``2 sigma``
    only agrees at ``s = 2``.
    """
    sig, tau, _ = sigma_tau_lambda(p, s - 1, 0)
    den = (s - 1) * (sig + (2 * s - 1) * tau)
    c1 = (2 * s - 1) * (sig + (s - 1) * tau - 2 * lam * s * (s - 1)) / den
    c2 = s * sig / den
    w1 = weight_ratio_next(p, s - 1) * (2 * s + 1) / (2 * s - 1)
    w2 = w1 * weight_ratio_next(p, s - 2) * (2 * s - 1) / (2 * s - 3)
    if w1 < 0 or w2 < 0:
        raise NumericalBreakdown("negative weight ratio in s-recurrence", x=int(round(s - p.a)))
    return c1 * math.sqrt(w1), c2 * math.sqrt(w2)


def _s_sweep(p: RacahParams, R: np.ndarray, order: int, stabilize=None):
    size = p.n_size
    n = np.arange(order + 1, dtype=float)
    lam = n * (n + 1 + p.alpha + p.beta)
    for x in range(2, size):
        s = p.a + x
        c1, c2 = s_step_coefficients(p, s, lam)
        with np.errstate(all="ignore"):
            col = c1 * R[:, x - 1] - c2 * R[:, x - 2]
        if stabilize is not None:
            col = stabilize(col, R[:, x - 1], R, x)
        R[:, x] = col
    return R


def zhu_s_generate(p: RacahParams, order: int | None = None) -> PolyMatrix:
    """Recurrence over the lattice index; columns ``a`` and ``a+1`` from the n-recurrence."""
    order = _order(p, order)
    size = p.n_size
    R = np.zeros((order + 1, size))
    seed_cols = [0, 1] if size >= 2 else [0]
    R[:, seed_cols] = _zhu_n_rows(p, order, cols=seed_cols)
    _s_sweep(p, R, order)
    _finite_or_raise(R, "zhu_s")
    return PolyMatrix(p, R, algorithm="zhu_s")


# -- Daoui -----------------------------------------------------------------

def daoui_initial_value(p: RacahParams) -> float:
    """``R_0(a)`` by the F(k) product over ``k = 1 ... beta`` (integer beta only)."""
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    if be != int(be) or be < 0:
        raise NonIntegerBeta(f"beta must be a nonnegative integer, got {be}")
    f = (al + 1) / ((a + b) * (al + b - a))
    for k in range(1, int(be) + 1):
        f *= (al + k + 1) * (2 * a - k + 1) / ((a + b - k) * (b - a + al + k))
    return math.sqrt(f * (2 * a + 1))


def daoui_d_factor(p: RacahParams, n: int, printed: bool = False) -> float:
    """Radicand ``D`` of the first-column step; ``printed`` uses ``(al+b-be-n)``."""
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    last = (al + b - be - n) if printed else (a + b - be - n)
    return (n * (al + be + 2 * n + 1) * (al + be + n)
            / ((al + n) * (be + n) * (b - a + al + be + n) * (a + b + al + n)
               * (al + be + 2 * n - 1) * last * (b - a - n)))


def daoui_weight_ratio(p: RacahParams, printed: bool = False) -> float:
    """``rho(a+1)/rho(a)``; ``printed`` uses ``(b-a+1)`` in place of ``(b-a-1)``."""
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    mid = (b - a + 1) if printed else (b - a - 1)
    return ((2 * a + 1) * (be + 1) * (b + al + a + 1) * mid
            / ((b + al - a - 1) * (2 * a - be + 1) * (a + b + 1)))


def daoui_e_factor(p: RacahParams, n, printed: bool = False):
    """Factor ``E`` of the second-column step.

    The two denominators are the same polynomial in ``a, b, al, be``; the
    ``printed`` flag only selects which expansion is evaluated.
    """
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    lam_part = 2 * n * (al + be + n + 1) * (a + 1)
    if printed:
        return 1 + lam_part / ((a - b + 1) * (be + 1) * (a + b + al + 1))
    return 1 + lam_part / ((al + 1) * (be + 1) + a * (a + 1) * (al + be + 2)
                           - a * (al + 1) * (a - be) - b * (be + 1) * (b + al))


# Printed forms that disagree with exact values, next to the corrected ones.
PRINTED_FORMS = {
    "daoui_D": ("(al+b-be-n) in the denominator", "(a+b-be-n)"),
    # Expands to the same polynomial, kept to show the two forms agree.
    "daoui_E": ("(a-b+1)(be+1)(a+b+al+1) as denominator", "tau(a) based denominator"),
    "daoui_rho_ratio": ("(b-a+1) in the numerator", "(b-a-1)"),
    "zhu_A": ("(al+be+n)", "(al+be+n+1)"),
    "zhu_B": ("no constant term", "+1/2"),
    "s_recurrence_c2": ("2 sigma(s-1)", "s sigma(s-1)"),
    "sigma": ("(s+a-be(b+al-s))(s-a)(s+b)", "(s+a-be)(b+al-s)(s-a)(s+b)"),
}


def daoui_generate(p: RacahParams, order: int | None = None, *,
                   zero_mode: str = "cell", check_second_column: bool = True) -> PolyMatrix:
    """Daoui's s-recurrence with the published corrections and its stabilizer.

    A value is zeroed when ``n > N/6``, ``|R| < 1e-6`` and ``|R|`` exceeds
    the previous value in the same row. ``zero_mode="rest"`` additionally
    zeroes the remainder of that row. The test also covers the two-term
    step at ``s = a+1`` unless ``check_second_column`` is False.
    """
    if zero_mode not in ("cell", "rest"):
        raise ValueError("zero_mode must be 'cell' or 'rest'")
    order = _order(p, order)
    size = p.n_size
    R = np.zeros((order + 1, size))
    R[0, 0] = daoui_initial_value(p)
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    for n in range(1, order + 1):
        d = daoui_d_factor(p, n)
        if d < 0:
            raise NumericalBreakdown("negative radicand in first column", n=n, x=0)
        R[n, 0] = (a - b + n) * (be + n) * (a + b + al + n) / n * math.sqrt(d) * R[n - 1, 0]
    rows = np.arange(order + 1)
    active = rows > size / 6
    stopped = np.zeros(order + 1, dtype=bool)

    def stabilize(col, prev, _R, _x):
        col = np.where(stopped, 0.0, col)
        mags = np.abs(col)
        hit = active & (mags < DAOUI_THRESHOLD) & (mags > np.abs(prev))
        if zero_mode == "rest":
            stopped[hit] = True
        return np.where(hit, 0.0, col)

    if size >= 2:
        n = np.arange(order + 1, dtype=float)
        scale = math.sqrt(daoui_weight_ratio(p) * (2 * a + 3) / (2 * a + 1))
        R[:, 1] = daoui_e_factor(p, n) * scale * R[:, 0]
        if check_second_column:
            R[:, 1] = stabilize(R[:, 1], R[:, 0], R, 1)
    _s_sweep(p, R, order, stabilize)
    _finite_or_raise(R, "daoui")
    return PolyMatrix(p, R, algorithm="daoui")


# -- GSOP ------------------------------------------------------------------

def gsop_refine(m: PolyMatrix, eps: float = GSOP_EPS, passes: int = 2) -> PolyMatrix:
    """Classical Gram-Schmidt over the rows, in degree order.

    Each row has its projections on the already refined lower rows removed
    (all computed from the same intermediate row) and is then scaled by
    ``1 / (norm + eps)``. With ``passes=2`` the projection is repeated once
    per row; a single pass loses orthogonality when the input rows are
    badly corrupted (a broken Zhu-n matrix keeps ``E ~ 1``).
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    src = np.asarray(m.values, dtype=float)
    out = np.empty_like(src)
    coef = np.empty(src.shape[0])
    for n in range(src.shape[0]):
        row = src[n].copy()
        if n:
            lower, c = out[:n], coef[:n]
            for _ in range(passes):
                np.dot(lower, row, out=c)
                row -= c @ lower
        norm = math.sqrt(float(row @ row))
        if norm < 1e3 * eps:
            raise DegenerateRow(f"row {n} is numerically dependent on lower rows (norm {norm:.3g})")
        out[n] = row / (norm + eps)
    return PolyMatrix(m.params, out, algorithm=f"{m.algorithm}+gsop")


def generate(alg: AlgorithmId | str, p: RacahParams, order: int | None = None, **kw) -> PolyMatrix:
    """Dispatch by algorithm id (``imst`` and ``oracle`` included)."""
    if isinstance(alg, str):
        alg = AlgorithmId.parse(alg)
    if alg.id is Algorithm.ZHU_N:
        m = zhu_n_generate(p, order)
    elif alg.id is Algorithm.ZHU_S:
        m = zhu_s_generate(p, order)
    elif alg.id is Algorithm.DAOUI:
        m = daoui_generate(p, order, **kw)
    elif alg.id is Algorithm.IMST:
        from .imst import ImStConfig, generate as imst_generate

        cfg = kw.pop("config", None) or ImStConfig(max_order=order)
        m = imst_generate(p, cfg, **kw)[0]
    else:
        from .oracle import exact_matrix

        m = exact_matrix(p)
        if order is not None:
            m = PolyMatrix(p, m.values[:order + 1], algorithm="oracle")
    return gsop_refine(m) if alg.gsop_post else m
