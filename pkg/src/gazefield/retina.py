"""Image containers and grid calculus for the simulation.

Fields live on a regular pixel grid with spacing ``h`` (default one pixel).
Arrays are float64, shape ``(height, width)``, indexed ``values[y, x]`` so a
position vector ``(x, y)`` addresses column x and row y.  Containers are
frozen: once constructed they hold a read-only array and never mutate, so
they can be shared freely between pipeline stages.

Derivatives use central differences in the interior and one-sided
differences on the boundary.  The 5-point Laplacian and the smoothing
kernel both close their stencils by edge replication, so constants map to
zero curvature everywhere.  The potential solvers never evaluate stencils
on boundary pixels; they impose their own Dirichlet data there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    DimensionError,
    ParameterError,
    PgmParseError,
)

__all__ = [
    "Field2D",
    "VectorField2D",
    "FrameSequence",
    "BlurSchedule",
    "load_pgm",
    "save_pgm",
    "gradient",
    "laplacian",
    "temporal_derivative",
    "gaussian_blur",
    "magnitude",
    "schedule_sigma",
]


def _as_readonly_2d(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Field2D:
    """Scalar field on the pixel grid.  ``values[y, x]``, finite, read-only."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly_2d(self.values, "field"))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Flat row-major view of length width*height."""
        return self.values.reshape(-1)

    @classmethod
    def zeros(cls, width: int, height: int) -> "Field2D":
        return cls(np.zeros((height, width)))

    @classmethod
    def from_flat(cls, width: int, height: int, data) -> "Field2D":
        flat = np.asarray(data, dtype=np.float64)
        if flat.ndim != 1 or flat.size != width * height:
            raise DimensionError(
                f"flat data of length {flat.size} does not fill a {width}x{height} grid"
            )
        return cls(flat.reshape((height, width)))


@dataclass(frozen=True, eq=False)
class VectorField2D:
    """Vector field as two scalar components of equal shape (dx along x, dy along y)."""

    dx: np.ndarray
    dy: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dx", _as_readonly_2d(self.dx, "dx component"))
        object.__setattr__(self, "dy", _as_readonly_2d(self.dy, "dy component"))
        if self.dx.shape != self.dy.shape:
            raise DimensionError(
                f"component shapes differ: dx {self.dx.shape} vs dy {self.dy.shape}"
            )

    @property
    def width(self) -> int:
        return self.dx.shape[1]

    @property
    def height(self) -> int:
        return self.dx.shape[0]


# A flow field is a VectorField2D whose components carry pixels/second.
FlowField = VectorField2D


@dataclass(frozen=True, eq=False)
class FrameSequence:
    """Uniformly sampled brightness frames, all the same size, dt_frame apart."""

    frames: tuple
    dt_frame: float

    def __post_init__(self):
        frames = tuple(self.frames)
        if len(frames) < 2:
            raise DimensionError("frame sequence needs at least 2 frames")
        shape = frames[0].values.shape
        for i, f in enumerate(frames):
            if not isinstance(f, Field2D):
                raise DataError(f"frame {i} is not a Field2D")
            if f.values.shape != shape:
                raise DimensionError(
                    f"frame {i} shape {f.values.shape} differs from frame 0 shape {shape}"
                )
        if not (isinstance(self.dt_frame, (int, float)) and math.isfinite(self.dt_frame)
                and self.dt_frame > 0):
            raise ParameterError(f"dt_frame must be a positive real, got {self.dt_frame}")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "dt_frame", float(self.dt_frame))

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height


@dataclass(frozen=True)
class BlurSchedule:
    """Coarse-to-fine smoothing schedule: sigma decays exponentially to a floor."""

    sigma0: float = 0.0
    decay_rate: float = 0.0
    floor: float = 0.0

    def __post_init__(self):
        for name in ("sigma0", "decay_rate", "floor"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ParameterError(f"{name} must be a finite real >= 0, got {v}")
            object.__setattr__(self, name, float(v))


def schedule_sigma(schedule: BlurSchedule, t: float) -> float:
    """Smoothing width at time t: max(floor, sigma0 * exp(-decay_rate * t))."""
    if not (math.isfinite(t) and t >= 0):
        raise ParameterError(f"t must be a finite real >= 0, got {t}")
    return max(schedule.floor, schedule.sigma0 * math.exp(-schedule.decay_rate * t))


# ---------------------------------------------------------------------------
# PGM input
# ---------------------------------------------------------------------------

_WHITESPACE = b" \t\n\r\x0b\x0c"


def load_pgm(data: bytes) -> Field2D:
    """Parse a binary (P5) PGM payload into a Field2D scaled to [0, 1].

    Parameters
    ----------
    data : bytes
        Complete file contents.  Header comments (``#`` to end of line) are
        accepted.  maxval up to 65535; two-byte samples are big-endian.

    Returns
    -------
    Field2D with values in [0, 1] (sample / maxval).

    Raises
    ------
    PgmParseError naming the byte offset of the first problem.
    """
    if not isinstance(data, (bytes, bytearray)):
        raise DataError("load_pgm expects bytes")
    data = bytes(data)
    if data[:2] != b"P5":
        raise PgmParseError("not a binary PGM, magic 'P5' missing", 0)

    pos = 2

    def skip_separators(pos: int) -> int:
        # whitespace and '#' comments may separate header tokens
        while pos < len(data):
            b = data[pos:pos + 1]
            if b in _WHITESPACE:
                pos += 1
            elif b == b"#":
                while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                break
        return pos

    def read_int(pos: int, what: str) -> tuple[int, int, int]:
        pos = skip_separators(pos)
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        if pos == start:
            raise PgmParseError(f"expected decimal {what}", start)
        return int(data[start:pos]), pos, start

    width, pos, w_off = read_int(pos, "width")
    height, pos, h_off = read_int(pos, "height")
    maxval, pos, m_off = read_int(pos, "maxval")
    if width < 1:
        raise PgmParseError(f"width must be >= 1, got {width}", w_off)
    if height < 1:
        raise PgmParseError(f"height must be >= 1, got {height}", h_off)
    if not 1 <= maxval <= 65535:
        raise PgmParseError(f"maxval must be in [1, 65535], got {maxval}", m_off)

    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise PgmParseError("expected single whitespace byte before raster", pos)
    pos += 1

    bytes_per_sample = 2 if maxval > 255 else 1
    expected = width * height * bytes_per_sample
    raster = data[pos:pos + expected]
    if len(raster) < expected:
        raise PgmParseError(
            f"raster truncated, expected {expected} bytes, got {len(raster)}", len(data)
        )
    dtype = ">u2" if bytes_per_sample == 2 else "u1"
    samples = np.frombuffer(raster, dtype=dtype).astype(np.float64)
    return Field2D((samples / maxval).reshape((height, width)))


def save_pgm(f: Field2D, maxval: int = 255) -> bytes:
    """Encode a field as a binary (P5) PGM payload.

    Values are clipped to [0, 1] and quantized to round(v * maxval); maxval
    above 255 selects two-byte big-endian samples.  load_pgm recovers the
    quantized values exactly.
    """
    if not (isinstance(maxval, int) and 1 <= maxval <= 65535):
        raise ParameterError(f"maxval must be an integer in [1, 65535], got {maxval}")
    q = np.rint(np.clip(f.values, 0.0, 1.0) * maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{f.width} {f.height}\n{maxval}\n".encode("ascii")
    return header + q.astype(dtype).tobytes()


# ---------------------------------------------------------------------------
# Grid calculus
# ---------------------------------------------------------------------------

def _check_spacing(h: float) -> float:
    if not (isinstance(h, (int, float)) and math.isfinite(h) and h > 0):
        raise ParameterError(f"grid spacing h must be a positive real, got {h}")
    return float(h)


def gradient(f: Field2D, h: float = 1.0) -> VectorField2D:
    """Discrete gradient: central differences interior, one-sided on the boundary.

    Requires width, height >= 2.
    """
    h = _check_spacing(h)
    v = f.values
    if f.width < 2 or f.height < 2:
        raise DimensionError(f"gradient needs at least 2x2, got {f.width}x{f.height}")
    dx = np.empty_like(v)
    dy = np.empty_like(v)
    dx[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2.0 * h)
    dx[:, 0] = (v[:, 1] - v[:, 0]) / h
    dx[:, -1] = (v[:, -1] - v[:, -2]) / h
    dy[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2.0 * h)
    dy[0, :] = (v[1, :] - v[0, :]) / h
    dy[-1, :] = (v[-1, :] - v[-2, :]) / h
    return VectorField2D(dx, dy)


def laplacian(f: Field2D, h: float = 1.0) -> Field2D:
    """5-point Laplacian with edge-replicated ghost values on the boundary.

    Replication keeps constants curvature-free on every pixel.  Interior
    pixels see the plain compact stencil; the potential solvers only ever
    consume those.  Requires width, height >= 3.
    """
    h = _check_spacing(h)
    if f.width < 3 or f.height < 3:
        raise DimensionError(f"laplacian needs at least 3x3, got {f.width}x{f.height}")
    p = np.pad(f.values, 1, mode="edge")
    lap = (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]
           - 4.0 * p[1:-1, 1:-1]) / (h * h)
    return Field2D(lap)


def temporal_derivative(prev: Field2D, nxt: Field2D, dt: float) -> Field2D:
    """Forward-difference rate of change (nxt - prev) / dt."""
    if prev.values.shape != nxt.values.shape:
        raise DimensionError(
            f"frame shapes differ: {prev.values.shape} vs {nxt.values.shape}"
        )
    if not (isinstance(dt, (int, float)) and math.isfinite(dt) and dt > 0):
        raise ParameterError(f"dt must be a positive real, got {dt}")
    return Field2D((nxt.values - prev.values) / float(dt))


def magnitude(vf: VectorField2D) -> Field2D:
    """Pointwise Euclidean norm of a vector field."""
    return Field2D(np.hypot(vf.dx, vf.dy))


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets ** 2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def _convolve_axis(v: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    p = np.pad(v, pad, mode="edge")
    out = np.zeros_like(v)
    n = v.shape[axis]
    for k, w in enumerate(kernel):
        sl = [slice(None), slice(None)]
        sl[axis] = slice(k, k + n)
        out += w * p[tuple(sl)]
    return out


def gaussian_blur(f: Field2D, sigma: float) -> Field2D:
    """Separable Gaussian smoothing with edge replication.

    The kernel is truncated at radius ceil(3*sigma) and renormalized to sum
    to one, so constants are preserved exactly.  sigma = 0 returns the input
    unchanged.  Smoothing never increases the max-norm of the discrete
    gradient: every output difference is a convex combination of input
    differences under edge replication.
    """
    if not (isinstance(sigma, (int, float)) and math.isfinite(sigma) and sigma >= 0):
        raise ParameterError(f"sigma must be a finite real >= 0, got {sigma}")
    if sigma == 0:
        return f
    kernel = _gaussian_kernel(float(sigma))
    out = _convolve_axis(f.values, kernel, axis=1)
    out = _convolve_axis(out, kernel, axis=0)
    return Field2D(out)
