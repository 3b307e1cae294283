"""Matrix CSV, binary PGM and reproducible random images."""

from __future__ import annotations

import os
import re
from pathlib import Path

import numpy as np

from .core import PolyMatrix, validate_params
from .errors import FormatError, RacahError

_HEADER = re.compile(
    r"^#\s*racah\s+a=(\S+)\s+b=(\S+)\s+alpha=(\S+)\s+beta=(\S+)\s+N=(\d+)\s+alg=(\S*)\s*$"
)

FIXTURE_ENV = "RACAH_FIXTURES"


def format_matrix_csv(m: PolyMatrix) -> str:
    p = m.params
    head = (f"# racah a={p.a!r} b={p.b!r} alpha={p.alpha!r} beta={p.beta!r} "
            f"N={p.n_size} alg={m.algorithm}")
    rows = (",".join(f"{v:.17g}" for v in row) for row in m.values)
    return head + "\n" + "\n".join(rows) + "\n"


def write_matrix_csv(m: PolyMatrix, path) -> None:
    Path(path).write_text(format_matrix_csv(m))


def parse_matrix_csv(text: str) -> PolyMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty matrix file")
    match = _HEADER.match(lines[0])
    if not match:
        raise FormatError(f"bad header line: {lines[0][:80]!r}")
    a, b, alpha, beta, size, alg = match.groups()
    try:
        p = validate_params(float(a), float(b), float(alpha), float(beta))
        values = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except RacahError as exc:
        raise FormatError(f"bad parameters in header: {exc}") from exc
    except ValueError as exc:
        raise FormatError(f"bad number: {exc}") from exc
    if p.n_size != int(size):
        raise FormatError(f"header N={size} disagrees with b - a = {p.n_size}")
    if values.ndim != 2 or values.shape[1] != p.n_size or not 1 <= values.shape[0] <= p.n_size:
        raise FormatError(f"expected up to {p.n_size} rows of {p.n_size} values, got {values.shape}")
    return PolyMatrix(p, values, algorithm=alg or "unknown")


def read_matrix_csv(path) -> PolyMatrix:
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not a text file") from exc
    return parse_matrix_csv(text)


# -- PGM -------------------------------------------------------------------

def _pgm_tokens(data: bytes, count: int):
    """First ``count`` header tokens and the offset just past the last one."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    """8-bit binary PGM (P5) as a float array of shape (height, width)."""
    data = Path(path).read_bytes()
    tokens, offset = _pgm_tokens(data, 4)
    if tokens[0] != b"P5":
        raise FormatError(f"only binary P5 PGM is supported, got {tokens[0][:4]!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError("non-integer PGM header field") from exc
    if width < 1 or height < 1 or not 0 < maxval < 256:
        raise FormatError(f"unsupported PGM geometry {width}x{height} maxval {maxval}")
    body = data[offset:offset + width * height]
    if len(body) != width * height:
        raise FormatError("PGM pixel data is truncated")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).astype(float)


def write_pgm(path, pixels) -> None:
    """Round and clip to [0, 255] and write as P5."""
    px = np.clip(np.rint(np.asarray(pixels, dtype=float)), 0, 255).astype(np.uint8)
    if px.ndim != 2:
        raise ValueError("PGM needs a 2D array")
    height, width = px.shape
    Path(path).write_bytes(f"P5\n{width} {height}\n255\n".encode() + px.tobytes())


# -- random images ---------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int) -> np.ndarray:
    """The first ``count`` outputs of splitmix64 started from ``seed``."""
    with np.errstate(over="ignore"):
        k = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + k * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def random_image(height: int, width: int, seed: int = 0) -> np.ndarray:
    """Pixels in 0..255 from the top byte of successive splitmix64 outputs, row-major."""
    raw = splitmix64(seed, height * width) >> np.uint64(56)
    return raw.astype(float).reshape(height, width)


# -- fixtures --------------------------------------------------------------

def fixture_dir() -> Path:
    override = os.environ.get(FIXTURE_ENV)
    if override:
        return Path(override)
    return Path(__file__).parent / "fixtures" / "v1"


def load_fixture(name: str) -> PolyMatrix:
    path = fixture_dir() / name
    if not path.suffix:
        path = path.with_suffix(".csv")
    return read_matrix_csv(path)
