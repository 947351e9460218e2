"""Brightness-invariance optical flow and multi-channel feature conjugation.

The scalar constraint says a feature carried by the moving image keeps its
value along the motion: grad(phi) . v + phi_t = 0.  For brightness alone the
constraint is one equation for two unknowns per pixel, so the flow solver
regularizes with a smoothness term and relaxes the resulting stationarity
system by synchronous (Jacobi) sweeps.  Stacking several feature channels
makes the per-pixel system square or overdetermined; the group solver then
inverts the 2x2 normal equations pixel by pixel and reports the local
numerical rank, which tells where the motion is fully determined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    DimensionError,
    ParameterError,
    SingularityError,
)
from .retina import Field2D, FlowField, VectorField2D, gradient, temporal_derivative

__all__ = [
    "HsParams",
    "FeatureChannel",
    "FeatureStack",
    "conjugation_residual",
    "horn_schunck",
    "hs_jacobi_step",
    "hs_objective",
    "feature_group_flow",
]


@dataclass(frozen=True)
class HsParams:
    """Smoothness-regularized flow solver settings.

    lam weights the smoothness term against the constraint term; tol is the
    max-norm of one synchronous update, in pixels/second.
    """

    lam: float = 0.01
    max_iters: int = 500
    tol: float = 1e-4

    def __post_init__(self):
        if not (isinstance(self.lam, (int, float)) and math.isfinite(self.lam)
                and self.lam > 0):
            raise ParameterError(f"lam must be a positive real, got {self.lam}")
        if not (isinstance(self.max_iters, int) and self.max_iters >= 1):
            raise ParameterError(f"max_iters must be an integer >= 1, got {self.max_iters}")
        if not (isinstance(self.tol, (int, float)) and math.isfinite(self.tol)
                and self.tol > 0):
            raise ParameterError(f"tol must be a positive real, got {self.tol}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "tol", float(self.tol))


@dataclass(frozen=True, eq=False)
class FeatureChannel:
    """One feature map's spatial gradient and temporal derivative."""

    grad: VectorField2D
    ddt: Field2D

    def __post_init__(self):
        if self.grad.dx.shape != self.ddt.values.shape:
            raise DimensionError(
                f"channel gradient shape {self.grad.dx.shape} does not match "
                f"temporal derivative shape {self.ddt.values.shape}"
            )


@dataclass(frozen=True, eq=False)
class FeatureStack:
    """m feature channels over one grid, plus a ridge weight for the solve."""

    channels: tuple
    ridge: float = 0.0

    def __post_init__(self):
        channels = tuple(self.channels)
        if len(channels) < 1:
            raise ParameterError("feature stack needs at least one channel")
        shape = channels[0].grad.dx.shape
        for i, ch in enumerate(channels):
            if not isinstance(ch, FeatureChannel):
                raise DataError(f"channel {i} is not a FeatureChannel")
            if ch.grad.dx.shape != shape:
                raise DimensionError(
                    f"channel {i} shape {ch.grad.dx.shape} differs from channel 0 {shape}"
                )
        if not (isinstance(self.ridge, (int, float)) and math.isfinite(self.ridge)
                and self.ridge >= 0):
            raise ParameterError(f"ridge must be a finite real >= 0, got {self.ridge}")
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "ridge", float(self.ridge))

    def __len__(self) -> int:
        return len(self.channels)


def conjugation_residual(grad: VectorField2D, ddt: Field2D, v: FlowField) -> Field2D:
    """Pointwise transport residual grad . v + ddt.

    Zero means the feature is conjugated with the flow: its value rides
    along v without changing.
    """
    if not (grad.dx.shape == ddt.values.shape == v.dx.shape):
        raise DimensionError(
            f"shapes differ: grad {grad.dx.shape}, ddt {ddt.values.shape}, v {v.dx.shape}"
        )
    return Field2D(grad.dx * v.dx + grad.dy * v.dy + ddt.values)


def _neighbor_average(c: np.ndarray) -> np.ndarray:
    # 4-neighbor mean; out-of-grid neighbors replicate the edge sample,
    # which is the discrete zero-Neumann closure for the flow
    p = np.pad(c, 1, mode="edge")
    return 0.25 * (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:])


def hs_jacobi_step(vx: np.ndarray, vy: np.ndarray, gx: np.ndarray, gy: np.ndarray,
                   bt: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """One synchronous relaxation sweep of the stationarity system.

    Each pixel is replaced by the exact minimizer of its local model
    (constraint residual plus lam-weighted distance to the neighbor mean),
    which is the classic update v <- vbar - grad (grad . vbar + bt) / (lam + |grad|^2).
    """
    ax = _neighbor_average(vx)
    ay = _neighbor_average(vy)
    scale = (gx * ax + gy * ay + bt) / (lam + gx * gx + gy * gy)
    return ax - gx * scale, ay - gy * scale


def horn_schunck(b_prev: Field2D, b_next: Field2D, dt: float, p: HsParams) -> FlowField:
    """Smoothness-regularized flow between two frames.

    The constraint gradient is the average of both frames' spatial
    gradients; the temporal term is the forward difference.  Sweeps stop
    when the max-norm of one update drops below p.tol or p.max_iters is
    reached.

    Returns
    -------
    FlowField in pixels/second.
    """
    if b_prev.values.shape != b_next.values.shape:
        raise DimensionError(
            f"frame shapes differ: {b_prev.values.shape} vs {b_next.values.shape}"
        )
    if b_prev.width < 3 or b_prev.height < 3:
        raise DimensionError(
            f"flow needs at least 3x3 frames, got {b_prev.width}x{b_prev.height}"
        )
    if not (isinstance(dt, (int, float)) and math.isfinite(dt) and dt > 0):
        raise ParameterError(f"dt must be a positive real, got {dt}")
    if not (np.all(np.isfinite(b_prev.values)) and np.all(np.isfinite(b_next.values))):
        raise DataError("non-finite frame values")

    g_prev = gradient(b_prev)
    g_next = gradient(b_next)
    gx = 0.5 * (g_prev.dx + g_next.dx)
    gy = 0.5 * (g_prev.dy + g_next.dy)
    bt = temporal_derivative(b_prev, b_next, dt).values

    vx = np.zeros_like(gx)
    vy = np.zeros_like(gy)
    for _ in range(p.max_iters):
        nvx, nvy = hs_jacobi_step(vx, vy, gx, gy, bt, p.lam)
        delta = max(np.abs(nvx - vx).max(), np.abs(nvy - vy).max())
        vx, vy = nvx, nvy
        if delta < p.tol:
            break
    return FlowField(vx, vy)


def hs_objective(b_grad: VectorField2D, b_t: Field2D, v: FlowField,
                 lam: float, h: float = 1.0) -> float:
    """Discrete flow energy: constraint term plus lam-weighted smoothness.

    The constraint term sums (grad . v + b_t)^2 over every pixel; the
    smoothness term sums |v_p - v_q|^2 over nearest-neighbor pixel pairs
    with weight lam/4, the per-edge share of the compact Laplacian the
    sweeps relax.  This is the one discretization the synchronous update
    descends monotonically; per-pixel gradient-square forms with full
    weight lam are not Lyapunov for it.  The total is scaled by h^2.
    """
    if not (b_grad.dx.shape == b_t.values.shape == v.dx.shape):
        raise DimensionError(
            f"shapes differ: grad {b_grad.dx.shape}, b_t {b_t.values.shape}, "
            f"v {v.dx.shape}"
        )
    data = b_grad.dx * v.dx + b_grad.dy * v.dy + b_t.values
    total = float(np.sum(data ** 2))
    for c in (v.dx, v.dy):
        total += (lam / 4.0) * float(np.sum((c[:, 1:] - c[:, :-1]) ** 2))
        total += (lam / 4.0) * float(np.sum((c[1:, :] - c[:-1, :]) ** 2))
    return total * h * h


def feature_group_flow(stack: FeatureStack) -> tuple[FlowField, Field2D]:
    """Per-pixel least-squares flow from m feature channels.

    Solves (G^T G + ridge I) v = -G^T phi_t at every pixel, where G stacks
    the channel gradients.  Also returns the numerical rank of G per pixel
    (singular values above 1e-8 of the largest); rank 2 means the motion is
    fully pinned down locally, lower rank marks aperture-ambiguous pixels.

    Raises
    ------
    SingularityError if ridge is zero and any pixel has rank < 2; the error
    names the first such pixel in row-major order.
    """
    m = len(stack)
    if stack.ridge == 0 and m < 2:
        raise ParameterError("ridge=0 needs at least 2 channels for a determined solve")

    a11 = np.zeros_like(stack.channels[0].ddt.values)
    a12 = np.zeros_like(a11)
    a22 = np.zeros_like(a11)
    b1 = np.zeros_like(a11)
    b2 = np.zeros_like(a11)
    for ch in stack.channels:
        gx, gy = ch.grad.dx, ch.grad.dy
        ft = ch.ddt.values
        a11 += gx * gx
        a12 += gx * gy
        a22 += gy * gy
        b1 -= gx * ft
        b2 -= gy * ft

    # eigenvalues of G^T G give the squared singular values of G
    half_trace = 0.5 * (a11 + a22)
    radius = np.sqrt(np.maximum(0.25 * (a11 - a22) ** 2 + a12 * a12, 0.0))
    sv_hi = np.sqrt(np.maximum(half_trace + radius, 0.0))
    sv_lo = np.sqrt(np.maximum(half_trace - radius, 0.0))
    threshold = 1e-8 * sv_hi
    rank = (sv_hi > threshold).astype(np.float64) + (sv_lo > threshold).astype(np.float64)

    if stack.ridge == 0:
        deficient = rank < 2
        if np.any(deficient):
            y, x = np.argwhere(deficient)[0]
            raise SingularityError("flow system is rank deficient", (int(x), int(y)))

    det = (a11 + stack.ridge) * (a22 + stack.ridge) - a12 * a12
    vx = ((a22 + stack.ridge) * b1 - a12 * b2) / det
    vy = ((a11 + stack.ridge) * b2 - a12 * b1) / det
    return FlowField(vx, vy), Field2D(rank)
