"""Focus-of-attention particle: a damped point mass steered by the potential.

The gaze point is modeled as a second-order particle whose acceleration
combines viscous dissipation with the sampled potential gradient.  The
force sign is configurable: ATTRACT drives the particle uphill toward
potential peaks (the documented behavior), REPEL keeps the opposite
convention in which peaks push the particle away.  Trajectories are
recorded as scanpaths and segmented into fixations and saccades by a
speed threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import DataError, DomainError, ParameterError
from .retina import Field2D, gradient

__all__ = [
    "AttractionSign",
    "BoundaryPolicy",
    "FoaParams",
    "FoaState",
    "FoaSample",
    "Scanpath",
    "sample_gradient",
    "foa_step",
    "energy",
    "detect_saccades",
]


class AttractionSign(Enum):
    """Sign of the gradient force: +1 seeks peaks, -1 flees them."""

    ATTRACT = 1.0
    REPEL = -1.0


class BoundaryPolicy(Enum):
    """What happens when a step carries the particle off the grid."""

    REFLECT = "reflect"
    CLAMP = "clamp"


def _finite(name, v):
    if not (isinstance(v, (int, float)) and math.isfinite(v)):
        raise ParameterError(f"{name} must be a finite real, got {v}")
    return float(v)


@dataclass(frozen=True)
class FoaParams:
    """Particle settings: viscous drag (1/s), step size (s), force sign,
    and the off-grid policy.  The default step is an eighth of a 30 Hz
    frame interval."""

    dissipation: float = 1.0
    dt: float = 1.0 / 240.0
    attraction_sign: AttractionSign = AttractionSign.ATTRACT
    boundary: BoundaryPolicy = BoundaryPolicy.REFLECT

    def __post_init__(self):
        object.__setattr__(self, "dissipation", _finite("dissipation", self.dissipation))
        object.__setattr__(self, "dt", _finite("dt", self.dt))
        if self.dissipation < 0:
            raise ParameterError(f"dissipation must be >= 0, got {self.dissipation}")
        if self.dt <= 0:
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if not isinstance(self.attraction_sign, AttractionSign):
            raise ParameterError(
                f"attraction_sign must be an AttractionSign, got {self.attraction_sign!r}")
        if not isinstance(self.boundary, BoundaryPolicy):
            raise ParameterError(
                f"boundary must be a BoundaryPolicy, got {self.boundary!r}")


@dataclass(frozen=True)
class FoaState:
    """Continuous gaze position (pixels) and velocity (pixels/s)."""

    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "vx", "vy"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


@dataclass(frozen=True)
class FoaSample:
    """One scanpath record: time, position, velocity, saccade flag."""

    t: float
    x: float
    y: float
    vx: float
    vy: float
    saccade: bool = False

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


@dataclass(frozen=True)
class Scanpath:
    """Ordered gaze trace with strictly increasing timestamps."""

    samples: tuple[FoaSample, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        for s in self.samples:
            if not isinstance(s, FoaSample):
                raise DataError(f"scanpath samples must be FoaSample, got {type(s)}")
        ts = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise DataError("scanpath timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.samples)

    def positions(self) -> np.ndarray:
        """(n, 2) array of sample positions."""
        return np.array([(s.x, s.y) for s in self.samples], dtype=np.float64)


def _bilinear(arr: np.ndarray, x: float, y: float) -> float:
    # callers guarantee 0 <= x <= w-1, 0 <= y <= h-1
    h, w = arr.shape
    x0 = min(int(math.floor(x)), w - 2)
    y0 = min(int(math.floor(y)), h - 2)
    fx, fy = x - x0, y - y0
    return float((1 - fy) * ((1 - fx) * arr[y0, x0] + fx * arr[y0, x0 + 1])
                 + fy * ((1 - fx) * arr[y0 + 1, x0] + fx * arr[y0 + 1, x0 + 1]))


def _check_inside(u: Field2D, x: float, y: float):
    if not (0.0 <= x <= u.width - 1 and 0.0 <= y <= u.height - 1):
        raise DomainError(
            f"position ({x}, {y}) outside grid [0, {u.width - 1}] x [0, {u.height - 1}]")


def sample_gradient(u: Field2D, pos: tuple[float, float], h: float = 1.0
                    ) -> tuple[float, float]:
    """Potential gradient at a continuous position.

    The nodal gradient (central differences inside, one-sided at edges) is
    interpolated bilinearly, so the sampled force varies continuously as
    the particle moves across cells.
    """
    x, y = float(pos[0]), float(pos[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError(f"position must be finite, got {pos}")
    _check_inside(u, x, y)
    g = gradient(u, h)
    return (_bilinear(g.dx, x, y), _bilinear(g.dy, x, y))


def foa_step(s: FoaState, u: Field2D, p: FoaParams, h: float = 1.0) -> FoaState:
    """Advance the particle one step of v' = v + dt(-drag*v + sign*grad u).

    Velocity updates first from the force at the old position, then the
    position moves with the fresh velocity (semi-implicit Euler: one
    gradient sample per step, stable for damped oscillation).  A step that
    exits the grid is folded back per the boundary policy: REFLECT mirrors
    the position and negates the normal velocity, CLAMP projects onto the
    edge and zeroes it.
    """
    gx, gy = sample_gradient(u, (s.x, s.y), h)
    sign = p.attraction_sign.value
    vx = s.vx + p.dt * (-p.dissipation * s.vx + sign * gx)
    vy = s.vy + p.dt * (-p.dissipation * s.vy + sign * gy)
    x = s.x + p.dt * vx
    y = s.y + p.dt * vy

    xmax, ymax = float(u.width - 1), float(u.height - 1)
    if p.boundary is BoundaryPolicy.REFLECT:
        while not 0.0 <= x <= xmax:
            if x < 0.0:
                x, vx = -x, -vx
            else:
                x, vx = 2.0 * xmax - x, -vx
        while not 0.0 <= y <= ymax:
            if y < 0.0:
                y, vy = -y, -vy
            else:
                y, vy = 2.0 * ymax - y, -vy
    else:
        if x < 0.0:
            x, vx = 0.0, 0.0
        elif x > xmax:
            x, vx = xmax, 0.0
        if y < 0.0:
            y, vy = 0.0, 0.0
        elif y > ymax:
            y, vy = ymax, 0.0
    return FoaState(x, y, vx, vy)


def energy(s: FoaState, u: Field2D, p: FoaParams, h: float = 1.0) -> float:
    """Kinetic plus potential energy, 0.5|v|^2 - sign*u(a).

    Conserved by the continuum dynamics when dissipation is zero; its
    drift diagnoses integrator quality.
    """
    _check_inside(u, s.x, s.y)
    return 0.5 * (s.vx * s.vx + s.vy * s.vy) \
        - p.attraction_sign.value * _bilinear(u.values, s.x, s.y)


def detect_saccades(path: Scanpath, speed_threshold: float,
                    min_fixation: float) -> Scanpath:
    """Annotate a scanpath: fast samples are saccadic, brief rests between
    saccades merge into them.

    A sample is saccadic when its speed exceeds speed_threshold.  A
    contiguous slow run whose time span is shorter than min_fixation and
    which sits between saccadic runs on both sides is absorbed into the
    surrounding saccade; slow runs at either end of the path always remain
    fixations.
    """
    if len(path) == 0:
        raise DataError("cannot segment an empty scanpath")
    for name, v in (("speed_threshold", speed_threshold),
                    ("min_fixation", min_fixation)):
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ParameterError(f"{name} must be a positive real, got {v}")

    flags = [s.speed > speed_threshold for s in path.samples]

    runs = []  # (flag, start, stop) half-open
    start = 0
    for i in range(1, len(flags) + 1):
        if i == len(flags) or flags[i] != flags[start]:
            runs.append((flags[start], start, i))
            start = i
    for k, (flag, a, b) in enumerate(runs):
        if flag or k == 0 or k == len(runs) - 1:
            continue
        span = path.samples[b - 1].t - path.samples[a].t
        if span < min_fixation:
            for i in range(a, b):
                flags[i] = True

    return Scanpath(tuple(replace(s, saccade=f)
                          for s, f in zip(path.samples, flags)))
