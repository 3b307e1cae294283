"""Experiment harness: orthogonality error, size search, 2D moments, metrics,
covariance restriction study and timing."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .baselines import AlgorithmId, generate as generate_alg
from .core import PolyMatrix, RacahParams, validate_params
from .errors import DimensionMismatch, NonIntegerBeta, RacahError, ZeroSignal

log = logging.getLogger(__name__)


# -- orthogonality ---------------------------------------------------------

def _values(m) -> np.ndarray:
    return np.asarray(m.values if isinstance(m, PolyMatrix) else m, dtype=float)


def orthogonality_error(m) -> float:
    """``max |R R^T - I|`` over the stored rows; ``inf`` if any entry is non-finite."""
    r = _values(m)
    if not np.all(np.isfinite(r)):
        return math.inf
    gram = r @ r.T
    gram[np.diag_indices_from(gram)] -= 1.0
    return float(np.abs(gram).max())


# -- parameter rules -------------------------------------------------------

@dataclass(frozen=True)
class ParamRule:
    """Maps a size ``N`` to a parameter tuple with ``b = a + N``."""

    name: str
    func: Callable[[int], tuple]
    description: str = ""

    def __call__(self, n_size: int) -> RacahParams:
        a, alpha, beta = self.func(int(n_size))
        return validate_params(a, a + n_size, alpha, beta)


def _half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


PARAM_RULES = {
    "col1": ParamRule("col1", lambda n: (0, 0, 0), "a = alpha = beta = 0"),
    "col2": ParamRule("col2", lambda n: (math.ceil(n / 10000 + 0.5), n / 10000, n / 10000),
                      "a = ceil(N/10000+0.5), alpha = beta = N/10000"),
    "col3": ParamRule("col3", lambda n: (_half_up(n / 4), _half_up(n / 8), _half_up(n / 16)),
                      "a = [N/4], alpha = [N/8], beta = [N/16] (round half up)"),
    "col4": ParamRule("col4", lambda n: (_half_up(n / 2), _half_up(n / 2), _half_up(n / 4)),
                      "a = [N/2], alpha = [N/2], beta = [N/4] (round half up)"),
    "timing": ParamRule("timing", lambda n: (max(n / 4, 1), n / 8, n / 16),
                        "a = max(N/4, 1), alpha = N/8, beta = N/16"),
}


def get_rule(rule) -> ParamRule:
    if isinstance(rule, ParamRule):
        return rule
    try:
        return PARAM_RULES[rule]
    except KeyError:
        raise ValueError(f"unknown parameter rule {rule!r}; known: {sorted(PARAM_RULES)}") from None


# -- maximum size search ---------------------------------------------------

@dataclass
class Trial:
    n_size: int
    error: float
    seconds: float
    passed: bool
    note: str = ""


@dataclass
class MaxSizeResult:
    """Outcome of :func:`max_size_search`.

    ``n_max`` is the largest size such that every tested size up to it
    passed. ``bisection_n`` is what doubling plus bisection alone reported;
    the two differ when the error curve is not monotone, and the offending
    sizes are listed in ``instabilities``.
    """

    algorithm: str
    rule: str
    e_max: float
    n_max: int
    bisection_n: int
    reached_ceiling: bool = False
    timed_out: bool = False
    interrupted: bool = False
    instabilities: list = field(default_factory=list)
    trials: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def run_trial(alg, p: RacahParams) -> tuple[float, float, str]:
    """Generate at ``p`` and return ``(E, seconds, note)``; breakdowns give ``E = inf``."""
    t0 = time.perf_counter()
    note = ""
    try:
        err = orthogonality_error(generate_alg(alg, p))
    except NonIntegerBeta:
        raise
    except (RacahError, ArithmeticError, FloatingPointError) as exc:
        err, note = math.inf, f"{type(exc).__name__}: {exc}"
    return err, time.perf_counter() - t0, note


def max_size_search(alg, rule, e_max: float = 1e-3, t_max: float = 60.0, *,
                    ceiling: int | None = None, start: int = 1,
                    verify: bool = True) -> MaxSizeResult:
    """Largest ``N`` with ``E <= e_max``, found by doubling then bisection.

    With ``verify`` the sizes between the last passing power of two and the
    bisection result are retested in increasing order, and the search
    answer becomes the size just before the first failure. A trial slower
    than ``t_max`` seconds ends the search with ``timed_out`` set; the best
    size so far is returned.
    """
    alg = AlgorithmId.parse(alg) if isinstance(alg, str) else alg
    rule = get_rule(rule)
    res = MaxSizeResult(str(alg), rule.name, e_max, 0, 0)
    cache: dict[int, bool] = {}

    def passes(n):
        if n not in cache:
            err, secs, note = run_trial(alg, rule(n))
            ok = err <= e_max
            res.trials.append(Trial(n, err, secs, ok, note))
            log.info("N=%d E=%.3g %.2fs %s", n, err, secs, "pass" if ok else "fail")
            cache[n] = ok
            if secs > t_max:
                res.timed_out = True
        return cache[n]

    try:
        lo, hi, n = 0, None, max(int(start), 1)
        while hi is None and not res.timed_out:
            if ceiling is not None and n >= ceiling:
                n = ceiling
            if passes(n):
                lo = n
                if ceiling is not None and n == ceiling:
                    res.reached_ceiling = True
                    break
                n *= 2
            else:
                hi = n
        base = lo
        if hi is not None:
            while hi - lo > 1 and not res.timed_out:
                mid = (lo + hi) // 2
                if passes(mid):
                    lo = mid
                else:
                    hi = mid
        res.bisection_n = res.n_max = lo
        if verify and hi is not None and not res.timed_out:
            for n in range(base + 1, lo + 1):
                if res.timed_out:
                    break
                if not passes(n):
                    res.n_max = n - 1
                    res.instabilities = sorted(k for k, ok in cache.items() if ok and k > n)
                    break
    except KeyboardInterrupt:
        res.interrupted = True
    return res


# -- 2D moments ------------------------------------------------------------

@dataclass(frozen=True)
class ImageGrid:
    pixels: np.ndarray
    value_range: tuple = (0.0, 255.0)

    def __post_init__(self):
        px = np.array(self.pixels, dtype=float)
        if px.ndim != 2:
            raise DimensionMismatch(f"image must be 2D, got shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("image contains non-finite values")
        object.__setattr__(self, "pixels", px)

    @property
    def shape(self):
        return self.pixels.shape


@dataclass(frozen=True)
class MomentMatrix:
    coeffs: np.ndarray
    params_x: RacahParams
    params_y: RacahParams


def _pixels(img) -> np.ndarray:
    return img.pixels if isinstance(img, ImageGrid) else np.asarray(img, dtype=float)


def moments_2d(img, rx: PolyMatrix, ry: PolyMatrix) -> MomentMatrix:
    """``phi = Rx f Ry^T``; rows of ``f`` follow ``x`` and columns follow ``y``."""
    f = _pixels(img)
    if f.shape != (rx.n_size, ry.n_size):
        raise DimensionMismatch(f"image {f.shape} vs matrices {(rx.n_size, ry.n_size)}")
    return MomentMatrix(rx.values @ f @ ry.values.T, rx.params, ry.params)


def reconstruct_2d(mom: MomentMatrix, rx: PolyMatrix, ry: PolyMatrix,
                   order_cap: int | None = None) -> ImageGrid:
    """Image from the moments with ``n, m < order_cap`` (all stored moments by default)."""
    rows, cols = mom.coeffs.shape
    if rows > rx.values.shape[0] or cols > ry.values.shape[0]:
        raise DimensionMismatch("moment matrix larger than the polynomial matrices")
    cap = min(rows, cols) if order_cap is None else int(order_cap)
    if not 0 <= cap <= min(rows, cols):
        raise DimensionMismatch(f"order cap {cap} outside 0..{min(rows, cols)}")
    phi = mom.coeffs[:cap, :cap]
    out = rx.values[:cap].T @ phi @ ry.values[:cap]
    return ImageGrid(out, (float(out.min()), float(out.max())) if out.size else (0.0, 0.0))


def nmse(i, r) -> float:
    a, b = _pixels(i), _pixels(r)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    den = float(np.sum(a * a))
    if den == 0:
        raise ZeroSignal("reference image is identically zero")
    return float(np.sum((a - b) ** 2)) / den


def psnr(i, r, *, natural_log: bool = False) -> float:
    """``10 (log max(I^2) - log MSE)`` in dB (base 10); ``inf`` for identical images.

    ``natural_log`` switches both logarithms to base e.
    """
    a, b = _pixels(i), _pixels(r)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return math.inf
    peak = float(np.max(a * a))
    logf = math.log if natural_log else math.log10
    return 10 * (logf(peak) - logf(mse))


# -- covariance restriction study -----------------------------------------

@dataclass
class RestrictionResult:
    diag: np.ndarray
    j: np.ndarray

    def to_csv(self) -> str:
        lines = ["l,sigma2,J"]
        lines += [f"{k},{float(d)!r},{float(j)!r}" for k, (d, j) in enumerate(zip(self.diag, self.j))]
        return "\n".join(lines) + "\n"


def markov_covariance(rho: float, n_size: int) -> np.ndarray:
    idx = np.arange(n_size)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def restriction_error(diag) -> np.ndarray:
    """``J_m = sum_{k>=m} d_k / sum_k d_k`` in the given order."""
    d = np.asarray(diag, dtype=float)
    tails = np.cumsum(d[::-1])[::-1]
    return tails / tails[0]


def restriction_study(p: RacahParams, rho: float, n_size: int | None = None, *,
                      matrix: PolyMatrix | None = None, alg="imst") -> RestrictionResult:
    """Diagonal of ``R S R^T`` for the first-order Markov covariance ``S`` and its ``J``."""
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if n_size is not None and n_size != p.n_size:
        raise DimensionMismatch(f"n_size {n_size} does not match b - a = {p.n_size}")
    m = matrix if matrix is not None else generate_alg(alg, p)
    r = m.values
    diag = np.einsum("ij,jk,ik->i", r, markov_covariance(rho, p.n_size), r)
    return RestrictionResult(diag, restriction_error(diag))


TABLE2_RHOS = (0.9, 0.95, 0.98)
TABLE2_A = (0, 10, 30, 50)


def table2(n_size: int = 16, rhos=TABLE2_RHOS, a_values=TABLE2_A, alg="imst") -> dict:
    """Diagonals for ``a = alpha``, ``beta = 0``, keyed by ``(rho, a)``."""
    out = {}
    for a in a_values:
        m = generate_alg(alg, validate_params(a, a + n_size, a, 0))
        for rho in rhos:
            out[(rho, a)] = restriction_study(m.params, rho, matrix=m).diag
    return out


# -- timing ----------------------------------------------------------------

@dataclass
class BenchRecord:
    algorithm: str
    n_size: int
    wall_time_s: float
    repeats: int
    ortho_error: float
    params: dict = field(default_factory=dict)
    timed_out: bool = False

    def to_json_dict(self) -> dict:
        return {"algorithm": self.algorithm, "n": self.n_size,
                "params": {k: self.params.get(k) for k in ("a", "alpha", "beta")},
                "repeats": self.repeats, "mean_seconds": self.wall_time_s,
                "ortho_error": None if math.isinf(self.ortho_error) else self.ortho_error,
                "timed_out": self.timed_out}


def bench(alg, sizes, rule="timing", repeats: int = 10, t_max: float = 60.0) -> list:
    """Mean wall time of ``repeats`` generations per size, plus ``E`` of the last one.

    A size whose first run exceeds ``t_max`` is recorded with ``timed_out``
    and not repeated.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    alg = AlgorithmId.parse(alg) if isinstance(alg, str) else alg
    rule = get_rule(rule)
    records = []
    for n in sizes:
        p = rule(n)
        times, m, err = [], None, math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            try:
                m = generate_alg(alg, p)
            except (RacahError, ArithmeticError) as exc:
                log.warning("%s N=%d failed: %s", alg, n, exc)
                m = None
            times.append(max(time.perf_counter() - t0, 1e-9))
            if times[-1] > t_max:
                break
        if m is not None:
            err = orthogonality_error(m)
        records.append(BenchRecord(str(alg), int(n), float(np.mean(times)), len(times), err,
                                   p.as_dict(), timed_out=times[-1] > t_max))
        log.info("%s N=%d %.4fs E=%.3g", alg, n, records[-1].wall_time_s, err)
    return records


def bench_json(records) -> str:
    return json.dumps([r.to_json_dict() for r in records], indent=2)
