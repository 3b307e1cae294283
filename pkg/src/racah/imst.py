"""Improved stabilization (ImSt) generator for weighted Racah matrices.

The ``(n, x)`` plane is split by three controlling indices:

* ``ind0``  - peak of ``|R_n(a)|`` over ``n`` (first column),
* ``indN1`` - peak of ``|R_n(a+N-1)|`` over ``n`` (last column),
* ``ns``    - peak of the last row ``|R_{N-1}(a+x)|`` over ``x``.

Rows 0 and 1 and the two outer columns come from two-term relations started
at ``R_0(a+N-1)``, which is evaluated through log-gamma so it never
overflows. The interior is filled column-block by column-block with the
three-term recurrence in ``n``::

    x in [ns, N-2]:  n < indN1  plain       (part 1)
                     n >= indN1 stabilized  (part 3)
    x in [1, ns-1]:  n <= ind0  plain       (part 2)
                     n > ind0   stabilized  (part 4)

A stabilized cell is zeroed, together with the rest of its column, when it
is below the threshold yet larger in magnitude than the cell above it.

For ``a = alpha = beta = 0`` the matrix is symmetric up to sign,
``R_s(n) = (-1)^(s-n) R_n(s)``, and :func:`generate_special` only computes
the upper triangle.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import PolyMatrix, RacahParams, sigma_tau_lambda, weight_ratio_next
from .errors import NumericalBreakdown

# Radicands in (-SQRT_CLAMP, 0) are rounding noise and read as zero.
SQRT_CLAMP = 1e-14
# The forward last-row search loses accuracy once sigma(s) exceeds this.
SIGMA_ACCURACY_LIMIT = 4e15

NS_STRATEGIES = ("auto", "log-domain-search", "quarter-fallback")
PART3_GUARDS = ("prose", "algorithm")


@dataclass(frozen=True)
class ImStConfig:
    """Tunable knobs of the generator.

    ``part3_guard`` selects how the extra existence condition of part 3 is
    read: ``"prose"`` requires some earlier ``|R_i(s)| < threshold``;
    ``"algorithm"`` requires some earlier ``|R_i(s)| > threshold``.
    """

    threshold: float = 1e-5
    ns_strategy: str = "auto"
    max_order: int | None = None
    part3_guard: str = "prose"

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.ns_strategy not in NS_STRATEGIES:
            raise ValueError(f"ns_strategy must be one of {NS_STRATEGIES}")
        if self.part3_guard not in PART3_GUARDS:
            raise ValueError(f"part3_guard must be one of {PART3_GUARDS}")
        if self.max_order is not None and self.max_order < 0:
            raise ValueError("max_order must be >= 0")

    def order_for(self, n_size: int) -> int:
        if self.max_order is None:
            return n_size - 1
        if self.max_order > n_size - 1:
            raise ValueError(f"max_order {self.max_order} exceeds N-1 = {n_size - 1}")
        return self.max_order


@dataclass(frozen=True)
class LogLatticeValue:
    """A lattice value stored as ``sign * exp(log_abs)``."""

    log_abs: float
    sign: int

    @classmethod
    def from_value(cls, value: float) -> "LogLatticeValue":
        if value == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)


@dataclass
class StabilizationReport:
    ind0: int
    indN1: int
    ns: int
    zeroed_part3: int = 0
    zeroed_part4: int = 0
    ns_source: str = "log-domain-search"
    path: str = "general"
    forward_ns: int | None = None
    backward_ns: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _sqrt_checked(arg, what, n=None, x=None):
    """Square root that tolerates tiny negative rounding noise only."""
    arr = np.asarray(arg, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < -SQRT_CLAMP):
        raise NumericalBreakdown(f"invalid radicand in {what}", n=n, x=x)
    out = np.sqrt(np.maximum(arr, 0.0))
    return float(out) if out.ndim == 0 else out


def _ab_ratio(p: RacahParams, n: int) -> float:
    """``(al+be+n+1) / (al+be+2n+1)``, equal to 1 at ``n = 0`` even if al+be = -1."""
    if n == 0:
        return 1.0
    ab = p.alpha + p.beta
    return (ab + n + 1) / (ab + 2 * n + 1)


# -- initial values ---------------------------------------------------------

def initial_value_last(p: RacahParams) -> float:
    """``R_0(a+N-1)`` from a sum of log-gamma terms; finite for valid params."""
    a, al, be, size = p.a, p.alpha, p.beta, p.n_size
    lg = math.lgamma
    y = (lg(al + be + 2) + lg(2 * a + size) + lg(be + size) + lg(2 * a + 2 * size + al)
         - lg(2 * a + 2 * size - 1) - lg(be + 1) - lg(al + be + size + 1)
         - lg(2 * a + size + al + 1))
    return math.exp(y / 2)


def log_initial_value_first(p: RacahParams) -> float:
    """``log R_0(a)`` from log-gamma terms (start of the forward last-row search)."""
    a, al, be, size = p.a, p.alpha, p.beta, p.n_size
    lg = math.lgamma
    return (lg(2 * a + 2) + lg(size + al) + lg(al + be + 2) + lg(2 * a + size - be)
            - lg(2 * a - be + 1) - lg(2 * a + size + 1) - lg(al + 1)
            - lg(size + al + be + 1)) / 2


def _row0_ratios(p: RacahParams) -> np.ndarray:
    """``R_0(s) / R_0(s+1)`` for ``s = a ... a+N-2``."""
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    s = p.lattice()[:-1]
    arg = ((2 * s + 1) * (a - be + s + 1) * (b + s + 1) * (b + al - s - 1) * (a - s - 1)
           / ((a + s + 1) * (b + al + s + 1) * (a - be - s - 1) * (2 * s + 3) * (b - s - 1)))
    return _sqrt_checked(arg, "row 0 ratio", n=0)


def initial_row0(p: RacahParams, r_last: float) -> np.ndarray:
    """Row ``R_0(s)`` swept right-to-left from ``R_0(a+N-1) = r_last``."""
    ratios = _row0_ratios(p)
    # cumprod over [r_last, q_{N-2}, q_{N-3}, ...] reproduces the sequential sweep.
    swept = np.cumprod(np.concatenate(([r_last], ratios[::-1])))
    return swept[::-1].copy()


def row1_multiplier(p: RacahParams) -> np.ndarray:
    """Pointwise factor ``R_1(s) / R_0(s)``."""
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    if p.n_size < 2:
        raise ValueError("row 1 needs N >= 2")
    s = p.lattice()
    poly = -(((-a + b - 1) * al + b * b - s * s - a - s - 1) * be
             + (a * a - s * s + b - s - 1) * al + a * a + b * b - 2 * (s * s + s) - 1)
    arg = (al + be + 3) / ((a - b + 1) * (a + b - be - 1) * (al + 1) * (be + 1)
                           * (a - b - al - be - 1) * (a + b + al + 1))
    return poly * _sqrt_checked(arg, "row 1 multiplier", n=1)


def initial_row1(p: RacahParams, row0: np.ndarray) -> np.ndarray:
    """Row ``R_1(s)`` as a closed-form multiple of row 0."""
    return row1_multiplier(p) * np.asarray(row0, dtype=float)


# -- outer columns ----------------------------------------------------------

def _first_column_ratio(p: RacahParams, n: int) -> float:
    """``R_{n+1}(a) / R_n(a)`` (negative)."""
    a, al, be, size = p.a, p.alpha, p.beta, p.n_size
    arg = ((size - n - 1) * (al + be + 2 * n + 3) * _ab_ratio(p, n) * (be + n + 1)
           * (2 * a + size + al + n + 1)
           / ((2 * a + size - be - n - 1) * (al + n + 1) * (size + al + be + n + 1) * (n + 1)))
    return -_sqrt_checked(arg, "first column ratio", n=n + 1, x=0)


def _last_column_ratio(p: RacahParams, n: int) -> float:
    """``R_{n+1}(a+N-1) / R_n(a+N-1)`` (positive)."""
    a, al, be, size = p.a, p.alpha, p.beta, p.n_size
    arg = ((size - n - 1) * (al + be + 2 * n + 3) * _ab_ratio(p, n) * (al + n + 1)
           * (2 * a + size - be - n - 1)
           / ((2 * a + size + al + n + 1) * (be + n + 1) * (size + al + be + n + 1) * (n + 1)))
    return _sqrt_checked(arg, "last column ratio", n=n + 1, x=size - 1)


def _two_term_column(ratio, seed0: float, order: int, seed1=None) -> np.ndarray:
    col = np.empty(order + 1)
    col[0] = seed0
    for n in range(order):
        if n == 0 and seed1 is not None:
            col[1] = seed1
        else:
            col[n + 1] = ratio(n) * col[n]
    return col


def column_first(p: RacahParams, r0a: float, order: int, r1a: float | None = None) -> np.ndarray:
    """``R_n(a)`` for ``n = 0 ... order``; ``r1a`` optionally pins the n = 1 value."""
    return _two_term_column(lambda n: _first_column_ratio(p, n), r0a, order, r1a)


def column_last(p: RacahParams, r0last: float, order: int,
                r1last: float | None = None) -> np.ndarray:
    """``R_n(a+N-1)`` for ``n = 0 ... order``."""
    return _two_term_column(lambda n: _last_column_ratio(p, n), r0last, order, r1last)


def controlling_indices(col_first, col_last) -> tuple[int, int]:
    """Magnitude peaks of the first and last columns; ties go to the lower index."""
    return int(np.argmax(np.abs(col_first))), int(np.argmax(np.abs(col_last)))


# -- last-row split in the log domain ---------------------------------------

def _log_combine(l1, g1, l2, g2):
    """``log|T1 - T2|`` and its sign for ``Ti = gi * exp(li)``."""
    if g2 == 0 or l2 == -math.inf:
        return l1, g1
    if g1 == 0 or l1 == -math.inf:
        return l2, -g2
    # Factor out the larger term so the exponential stays <= 1.
    if l1 >= l2:
        rest = 1.0 - g1 * g2 * math.exp(l2 - l1)
        if rest == 0:
            return -math.inf, 0
        return l1 + math.log(abs(rest)), g1 * (1 if rest > 0 else -1)
    rest = g1 * g2 * math.exp(l1 - l2) - 1.0
    if rest == 0:
        return -math.inf, 0
    return l2 + math.log(abs(rest)), g2 * (1 if rest > 0 else -1)


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def _s_coefficients(p: RacahParams, s: float, n: int):
    """Coefficients of ``R(s) = A1 sqrt(A) R(s-1) - B1 sqrt(B) R(s-2)``."""
    sig, tau, lam = sigma_tau_lambda(p, s - 1, n)
    den = (s - 1) * (sig + (2 * s - 1) * tau)
    a1 = (2 * s - 1) * (sig + (s - 1) * tau - 2 * lam * s * (s - 1)) / den
    b1 = s * sig / den
    ratio_a = weight_ratio_next(p, s - 1) * (2 * s + 1) / (2 * s - 1)
    ratio_prev = weight_ratio_next(p, s - 2) * (2 * s - 1) / (2 * s - 3)
    return a1, b1, ratio_a, ratio_a * ratio_prev


def _first_column_log(p: RacahParams, top: int) -> float:
    out = log_initial_value_first(p)
    for n in range(top):
        out += math.log(abs(_first_column_ratio(p, n)))
    return out


def _last_column_log(p: RacahParams, top: int) -> float:
    out = math.log(initial_value_last(p))
    for n in range(top):
        out += math.log(_last_column_ratio(p, n))
    return out


def log_last_row(p: RacahParams, direction: str = "forward", stop_at_peak: bool = False):
    """Last row ``R_{N-1}(a+x)`` as :class:`LogLatticeValue` entries.

    Returns ``(values, peak)``: ``values`` maps ``x`` to its log value and
    ``peak`` is the first local maximum met in the sweep direction (or
    ``None``). With ``stop_at_peak`` the sweep ends at the peak, and the
    forward sweep also ends (peak ``None``) once ``sigma(s)`` exceeds the
    accuracy limit.
    """
    size = p.n_size
    top = size - 1
    if size < 3:
        raise ValueError("last-row search needs N >= 3")
    a = p.a
    logs: dict[int, float] = {}
    signs: dict[int, int] = {}
    if direction == "forward":
        logs[0] = _first_column_log(p, top)
        signs[0] = -1 if top % 2 else 1
        sig, tau, lam = sigma_tau_lambda(p, a, top)
        e_fac = 1 - 2 * lam * (a + 1) / tau
        d_fac = weight_ratio_next(p, a) * (2 * a + 3) / (2 * a + 1)
        logs[1] = (math.log(abs(e_fac)) if e_fac else -math.inf) + math.log(d_fac) / 2 + logs[0]
        signs[1] = _sign(e_fac) * signs[0]
        for x in range(2, size):
            s = a + x
            if stop_at_peak and sigma_tau_lambda(p, s, top)[0] > SIGMA_ACCURACY_LIMIT:
                return _as_lattice(logs, signs), None
            a1, b1, ra, rb = _s_coefficients(p, s, top)
            l1 = (math.log(abs(a1)) if a1 else -math.inf) + math.log(ra) / 2 + logs[x - 1]
            l2 = (math.log(abs(b1)) if b1 else -math.inf) + math.log(rb) / 2 + logs[x - 2]
            logs[x], signs[x] = _log_combine(l1, _sign(a1) * signs[x - 1],
                                             l2, _sign(b1) * signs[x - 2])
            if logs[x - 1] > logs[x] and logs[x - 1] > logs[x - 2]:
                if stop_at_peak:
                    return _as_lattice(logs, signs), x - 1
        return _as_lattice(logs, signs), _first_peak(logs, range(1, size - 1))
    if direction == "backward":
        last = size - 1
        logs[last] = _last_column_log(p, top)
        signs[last] = 1
        s = a + size
        sig, tau, lam = sigma_tau_lambda(p, s - 1, top)
        lf = (2 * s - 1) * (sig + (s - 1) * tau - 2 * lam * s * (s - 1)) / (s * sig)
        lg_fac = weight_ratio_next(p, s - 2) * (2 * s - 1) / (2 * s - 3)
        logs[last - 1] = logs[last] + (math.log(abs(lf)) if lf else -math.inf) - math.log(lg_fac) / 2
        signs[last - 1] = _sign(lf) * signs[last]
        for x in range(last, 1, -1):
            s = a + x
            if stop_at_peak and sigma_tau_lambda(p, s, top)[0] > SIGMA_ACCURACY_LIMIT:
                return _as_lattice(logs, signs), None
            a1, b1, ra, rb = _s_coefficients(p, s, top)
            l1 = (math.log(abs(a1)) if a1 else -math.inf) + math.log(ra) / 2 + logs[x - 1]
            lv, sv = _log_combine(l1, _sign(a1) * signs[x - 1], logs[x], signs[x])
            logs[x - 2] = lv - (math.log(abs(b1)) if b1 else -math.inf) - math.log(rb) / 2
            signs[x - 2] = sv * _sign(b1)
            if logs[x - 1] > logs[x] and logs[x - 1] > logs[x - 2]:
                if stop_at_peak:
                    return _as_lattice(logs, signs), x - 1
        return _as_lattice(logs, signs), _first_peak(logs, range(size - 2, 0, -1))
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def _first_peak(logs, order):
    for x in order:
        if logs[x] > logs[x - 1] and logs[x] > logs[x + 1]:
            return x
    return None


def _as_lattice(logs, signs):
    return {x: LogLatticeValue(logs[x], signs[x]) for x in sorted(logs)}


def quarter_split(n_size: int) -> int:
    return int(math.floor(n_size / 4 + 0.5))


def _clamp_ns(ns: int, n_size: int) -> int:
    return min(max(ns, 1), max(n_size - 1, 1))


def last_row_split(p: RacahParams, cfg: ImStConfig = ImStConfig()):
    """Border ``ns`` between the left and right column blocks.

    Returns ``(ns, source, forward_ns, backward_ns)``; ``source`` is
    ``"log-domain-search"`` when a log-domain sweep found the last-row peak
    and ``"quarter-fallback"`` when ``floor(N/4 + 0.5)`` had to be used.
    """
    size = p.n_size
    fallback = _clamp_ns(quarter_split(size), size)
    if cfg.ns_strategy == "quarter-fallback" or size < 4:
        return fallback, "quarter-fallback", None, None
    forward = backward = None
    try:
        forward = log_last_row(p, "forward", stop_at_peak=True)[1]
    except (ValueError, ZeroDivisionError, OverflowError, NumericalBreakdown):
        forward = None
    if forward is None:
        try:
            backward = log_last_row(p, "backward", stop_at_peak=True)[1]
        except (ValueError, ZeroDivisionError, OverflowError, NumericalBreakdown):
            backward = None
    found = forward if forward is not None else backward
    if found is None:
        return fallback, "quarter-fallback", forward, backward
    return _clamp_ns(found, size), "log-domain-search", forward, backward


# -- three-term recurrence in n ---------------------------------------------

def theta_coefficients(p: RacahParams, n: int, s):
    """``(theta1, theta2)`` of ``R_n(s) = theta1 R_{n-1}(s) + theta2 R_{n-2}(s)``."""
    if n < 2:
        raise ValueError("the three-term recurrence starts at n = 2")
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    ab = al + be
    t0 = n * (ab + n) / ((ab + 2 * n - 1) * (ab + 2 * n))
    t11 = (s * (s + 1) - (a * a + b * b + (a - be) ** 2 + (b + al) ** 2 - 2) / 4
           + (ab + 2 * n - 2) * (ab + 2 * n) / 8
           - 0.5 * (be * be - al * al) * ((b + al / 2) ** 2 - (a - be / 2) ** 2)
           / ((ab + 2 * n - 2) * (ab + 2 * n)))
    half = ab / 2
    t21 = (-(al + n - 1) * (be + n - 1) / ((ab + 2 * n - 2) * (ab + 2 * n - 1))
           * ((a + b + (al - be) / 2) ** 2 - (n - 1 + half) ** 2)
           * ((b - a + half) ** 2 - (n - 1 + half) ** 2))
    t12 = (n * (ab + n) * (ab + 2 * n + 1)
           / ((al + n) * (be + n) * (ab + 2 * n - 1) * (a - b - ab - n) * (a - b + n))
           / ((a + b + al + n) * (a + b - be - n)))
    # (ab+n-1)/(ab+2n-3) is 1 at n = 2; keep it exact when ab = -1.
    tail = 1.0 if n == 2 else (ab + n - 1) / (ab + 2 * n - 3)
    t22 = ((n - 1) * tail * (ab + 2 * n - 1)
           / ((al + n - 1) * (be + n - 1) * (a - b - ab - n + 1) * (a - b + n - 1))
           / ((a + b + al + n - 1) * (a + b - be - n + 1)))
    root12 = _sqrt_checked(t12, "theta12", n=n)
    theta1 = t11 / t0 * root12
    theta2 = t21 / t0 * root12 * _sqrt_checked(t22, "theta22", n=n)
    return theta1, theta2


def recurrence_step(p: RacahParams, n: int, s: float, rm1: float, rm2: float) -> float:
    """One step of the n-recurrence at lattice point ``s``."""
    theta1, theta2 = theta_coefficients(p, n, s)
    return float(theta1 * rm1 + theta2 * rm2)


def special_theta(n_size: int, n: int, s):
    """Recurrence coefficients for ``a = alpha = beta = 0``."""
    big = n_size
    theta1 = ((2 * s * (s + 1) + n * (n - 1) - big * big + 1) * math.sqrt(4 * n * n - 1)
              / (n * (big - n) * (big + n)))
    theta2 = (-(n - 1) * (big - n + 1) * (big + n - 1) / (n * (big - n) * (big + n))
              * math.sqrt((2 * n + 1) / (2 * n - 3)))
    return theta1, theta2


# -- generators -------------------------------------------------------------

class _WriteLog:
    """Write-once shadow mask used when ``debug`` is on."""

    def __init__(self, shape, enabled):
        self.counts = np.zeros(shape, dtype=np.int32) if enabled else None

    def mark(self, rows, cols):
        if self.counts is not None:
            self.counts[rows, cols] += 1

    def verify(self):
        if self.counts is not None and not np.all(self.counts == 1):
            bad = np.argwhere(self.counts != 1)
            raise AssertionError(
                f"{len(bad)} cells not written exactly once, first at {tuple(bad[0])}"
            )


def _check_finite(values, where, n):
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise NumericalBreakdown(f"non-finite value in {where}", n=n, x=bad)


def _fill_block(p, R, cols, order, split, guard, cfg, log, part_names):
    """Run the n-recurrence on column block ``cols``.

    Rows ``2 .. split`` are plain; later rows are stabilized. Returns the
    number of cells forced to zero.
    """
    if cols.size == 0 or order < 2:
        return 0
    s = p.a + cols
    theta_cut = cfg.threshold
    stopped = np.zeros(cols.size, dtype=bool)
    seen_small = np.zeros(cols.size, dtype=bool)
    seen_large = np.zeros(cols.size, dtype=bool)
    for row in (0, 1):
        mags = np.abs(R[row, cols])
        seen_small |= mags < theta_cut
        seen_large |= mags > theta_cut
    zeroed = 0
    for n in range(2, order + 1):
        theta1, theta2 = theta_coefficients(p, n, s)
        vals = theta1 * R[n - 1, cols] + theta2 * R[n - 2, cols]
        if n > split:
            mags = np.abs(vals)
            trigger = (mags < theta_cut) & (mags > np.abs(R[n - 1, cols])) & ~stopped
            if guard == "prose":
                trigger &= seen_small
            elif guard == "algorithm":
                trigger &= seen_large
            stopped |= trigger
            vals = np.where(stopped, 0.0, vals)
            zeroed += int(stopped.sum())
        where = part_names[0] if n <= split else part_names[1]
        _check_finite(vals, where, n)
        R[n, cols] = vals
        log.mark(n, cols)
        mags = np.abs(vals)
        seen_small |= mags < theta_cut
        seen_large |= mags > theta_cut
    return zeroed


def _small_matrix(p: RacahParams, order: int, path: str):
    size = p.n_size
    R = np.zeros((order + 1, size))
    R[0] = initial_row0(p, initial_value_last(p))
    if order >= 1:
        R[1] = initial_row1(p, R[0])
    ind = int(np.argmax(np.abs(R[:, 0])))
    indl = int(np.argmax(np.abs(R[:, -1])))
    report = StabilizationReport(ind0=ind, indN1=indl, ns=max(size - 1, 0),
                                 ns_source="quarter-fallback", path=path)
    return PolyMatrix(p, R, algorithm="imst"), report


def generate(p: RacahParams, cfg: ImStConfig = ImStConfig(), *, allow_special: bool = True,
             debug: bool = False):
    """Weighted Racah matrix and its :class:`StabilizationReport`.

    ``a = alpha = beta = 0`` is routed to :func:`generate_special` unless
    ``allow_special`` is False. ``debug`` checks that every cell is written
    exactly once.
    """
    if allow_special and p.is_special:
        return generate_special(p.n_size, cfg, debug=debug)
    size = p.n_size
    order = cfg.order_for(size)
    if size <= 2:
        return _small_matrix(p, order, "general")

    R = np.zeros((order + 1, size))
    log = _WriteLog(R.shape, debug)

    R[0] = initial_row0(p, initial_value_last(p))
    log.mark(0, slice(None))
    _check_finite(R[0], "row 0", 0)
    if order >= 1:
        R[1] = initial_row1(p, R[0])
        log.mark(1, slice(None))
        _check_finite(R[1], "row 1", 1)
    # Full-length columns so the indices do not depend on the requested order.
    row1_ends = row1_multiplier(p)[[0, -1]] * R[0, [0, -1]]
    first = column_first(p, R[0, 0], size - 1, r1a=row1_ends[0])
    last = column_last(p, R[0, -1], size - 1, r1last=row1_ends[1])
    ind0, ind_n1 = controlling_indices(first, last)
    if order >= 2:
        R[2:, 0] = first[2:order + 1]
        R[2:, -1] = last[2:order + 1]
        log.mark(slice(2, None), 0)
        log.mark(slice(2, None), size - 1)

    ns, source, fwd, bwd = last_row_split(p, cfg)
    report = StabilizationReport(ind0=ind0, indN1=ind_n1, ns=ns, ns_source=source,
                                 forward_ns=fwd, backward_ns=bwd)

    right = np.arange(ns, size - 1)
    left = np.arange(1, ns)
    report.zeroed_part3 = _fill_block(p, R, right, order, ind_n1 - 1, cfg.part3_guard, cfg,
                                      log, ("part 1", "part 3"))
    report.zeroed_part4 = _fill_block(p, R, left, order, ind0, None, cfg,
                                      log, ("part 2", "part 4"))
    log.verify()
    return PolyMatrix(p, R, algorithm="imst"), report


def generate_special(n_size: int, cfg: ImStConfig = ImStConfig(), *, debug: bool = False):
    """Symmetric fast path for ``a = alpha = beta = 0``.

    Only cells with ``x >= n`` run the recurrence; the rest are sign-flipped
    copies, so ``values[s, n] == (-1)^(s-n) values[n, s]`` holds exactly.
    """
    from .core import validate_params

    p = validate_params(0, n_size, 0, 0)
    size = n_size
    order = cfg.order_for(size)
    if size <= 2:
        return _small_matrix(p, order, "special")
    big = float(size)
    R = np.zeros((order + 1, size))
    log = _WriteLog(R.shape, debug)
    x = np.arange(size, dtype=float)

    ratios = np.sqrt((2 * x[:-1] + 1) / (2 * x[:-1] + 3))
    R[0] = np.cumprod(np.concatenate(([math.sqrt(2 * big - 1) / big], ratios[::-1])))[::-1]
    log.mark(0, slice(None))
    rows = np.arange(1, order + 1)
    R[rows, 0] = np.where(rows % 2, -1.0, 1.0) * R[0, rows]
    log.mark(rows, 0)

    if order >= 1:
        R[1] = -(big * big - 2 * x * x - 2 * x - 1) * math.sqrt(3) / (big * big - 1) * R[0]
        R[1, 0] = -R[0, 1]
        log.mark(1, slice(1, None))
        rows = np.arange(2, order + 1)
        R[rows, 1] = np.where((rows - 1) % 2, -1.0, 1.0) * R[1, rows]
        log.mark(rows, 1)

    # Full last column for the peak index; stored up to the requested order.
    last = np.empty(size)
    last[0] = R[0, -1]
    last[1] = -(big * big - 2 * (big - 1) ** 2 - 2 * (big - 1) - 1) * math.sqrt(3) \
        / (big * big - 1) * R[0, -1]
    for n in range(1, size - 1):
        last[n + 1] = last[n] * (big - n - 1) * math.sqrt(2 * n + 3) / (big + n + 1) \
            / math.sqrt(2 * n + 1)
    ind_n1 = int(np.argmax(np.abs(last)))
    if order >= 2:
        R[2:, -1] = last[2:order + 1]
        log.mark(slice(2, None), size - 1)

    zeroed = 0
    theta_cut = cfg.threshold
    for n in range(2, order + 1):
        cols = np.arange(n, size - 1)
        if cols.size == 0:
            continue
        theta1, theta2 = special_theta(size, n, x[cols])
        vals = theta1 * R[n - 1, cols] + theta2 * R[n - 2, cols]
        if n >= ind_n1:
            mags = np.abs(vals)
            hits = np.flatnonzero((mags < theta_cut) & (mags > np.abs(R[n - 1, cols])))
            if hits.size:
                vals[hits[0]:] = 0.0
                zeroed += int(vals.size - hits[0])
        _check_finite(vals, "part 1" if n < ind_n1 else "part 3", n)
        R[n, cols] = vals
        log.mark(n, cols)

    # Part 2: sign-flipped copies of the upper triangle.
    for n in range(3, order + 1):
        cols = np.arange(2, n)
        R[n, cols] = np.where((n - cols) % 2, -1.0, 1.0) * R[cols, n]
        log.mark(n, cols)
    log.verify()

    report = StabilizationReport(ind0=int(np.argmax(np.abs(R[:, 0]))), indN1=ind_n1,
                                 ns=_clamp_ns(quarter_split(size), size),
                                 zeroed_part3=zeroed, ns_source="diagonal", path="special")
    return PolyMatrix(p, R, algorithm="imst"), report
