"""Salient mass density and the inhibition-of-return state.

Mass is what the potential field falls toward: spatial detail weighted by
how novel the location still is, plus a motion term.  The inhibition field
I relaxes toward a Gaussian bump centered on the current gaze position, so
recently fixated detail loses its pull and the scanpath moves on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError, ParameterError
from .retina import Field2D, VectorField2D

__all__ = [
    "MotionSource",
    "MassParams",
    "IorParams",
    "IorField",
    "mass_density",
    "ior_step",
]


class MotionSource(Enum):
    """Where the motion term of the mass comes from."""

    TEMPORAL_DERIVATIVE = "temporal_derivative"
    FLOW_MAGNITUDE = "flow_magnitude"


@dataclass(frozen=True)
class MassParams:
    """Weights for the detail and motion contributions to the mass."""

    alpha1: float = 1.0
    alpha2: float = 1.0
    motion_source: MotionSource = MotionSource.TEMPORAL_DERIVATIVE

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ParameterError(f"{name} must be a finite real >= 0, got {v}")
            object.__setattr__(self, name, float(v))
        if self.alpha1 + self.alpha2 <= 0:
            raise ParameterError("alpha1 + alpha2 must be positive")
        if not isinstance(self.motion_source, MotionSource):
            raise ParameterError(f"motion_source must be a MotionSource, got {self.motion_source!r}")


@dataclass(frozen=True)
class IorParams:
    """Inhibition dynamics: relaxation rate beta, footprint sigma_ior."""

    beta: float = 1.0
    sigma_ior: float = 4.0

    def __post_init__(self):
        if not (isinstance(self.beta, (int, float)) and 0 < self.beta <= 1):
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta}")
        if not (isinstance(self.sigma_ior, (int, float)) and math.isfinite(self.sigma_ior)
                and self.sigma_ior > 0):
            raise ParameterError(f"sigma_ior must be a positive real, got {self.sigma_ior}")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "sigma_ior", float(self.sigma_ior))


class IorField(Field2D):
    """Inhibition level per pixel, always inside [0, 1]."""

    def __post_init__(self):
        super().__post_init__()
        v = self.values
        if v.min() < 0.0 or v.max() > 1.0:
            raise ParameterError(
                f"inhibition values must lie in [0, 1], got range "
                f"[{v.min():.3g}, {v.max():.3g}]"
            )

    @classmethod
    def zeros(cls, width: int, height: int) -> "IorField":
        return cls(np.zeros((height, width)))


def mass_density(b_grad: VectorField2D, motion: Field2D, ior: IorField,
                 p: MassParams) -> Field2D:
    """Pointwise mass: alpha1 * |grad b| * (1 - I) + alpha2 * motion.

    The inhibition gates only the detail term; the motion term passes
    through untouched.  motion must already hold the magnitude named by
    p.motion_source (|db/dt| or |v|), so the result is nonnegative.
    """
    if not (b_grad.dx.shape == motion.values.shape == ior.values.shape):
        raise DimensionError(
            f"shapes differ: grad {b_grad.dx.shape}, motion {motion.values.shape}, "
            f"inhibition {ior.values.shape}"
        )
    detail = np.hypot(b_grad.dx, b_grad.dy)
    return Field2D(p.alpha1 * detail * (1.0 - ior.values) + p.alpha2 * motion.values)


def ior_step(ior: IorField, a: tuple[float, float], dt: float, p: IorParams) -> IorField:
    """Advance the inhibition field one step with the gaze at position a.

    The relaxation toward the Gaussian bump at a is integrated exactly over
    the step (the source is held constant), giving the convex combination
    I' = I*e^(-beta*dt) + (1 - e^(-beta*dt))*G.  Both weights are in [0, 1]
    and G <= 1, so the field stays in [0, 1] for any dt.
    """
    ax, ay = float(a[0]), float(a[1])
    if not (math.isfinite(ax) and math.isfinite(ay)):
        raise ParameterError(f"gaze position must be finite, got {a}")
    if not (isinstance(dt, (int, float)) and math.isfinite(dt) and dt > 0):
        raise ParameterError(f"dt must be a positive real, got {dt}")
    ys, xs = np.mgrid[0:ior.height, 0:ior.width].astype(np.float64)
    source = np.exp(-((xs - ax) ** 2 + (ys - ay) ** 2) / (2.0 * p.sigma_ior ** 2))
    decay = math.exp(-p.beta * dt)
    return IorField(decay * ior.values + (1.0 - decay) * source)
