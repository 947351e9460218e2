"""Attention potential: elliptic solve, free-space oracle, temporal steppers.

The mass density sources a potential whose gradient steers the gaze.  Three
routes produce it: a relaxation solve of the discrete Poisson system, a
dense log-kernel sum (the free-space closed form, kept as a desk-scale
oracle), and explicit time stepping of the damped wave family whose
quiescent limit is the same Poisson system.  The stepper normalizes the
source by c^2 so heat, wave, and damped-wave modes share one steady state;
that makes the large-c limit directly comparable against the relaxation
solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    GridSizeError,
    ParameterError,
)
from .retina import Field2D, gradient, laplacian

__all__ = [
    "Mode",
    "TelegraphParams",
    "PotentialState",
    "poisson_solve",
    "direct_potential",
    "evolve_potential",
    "convergence_in_c",
]

_MAX_DIRECT = 64  # direct_potential is O(N^2) over pixels; desk scale only


class Mode(Enum):
    """Temporal regularization family for the potential."""

    HEAT = "heat"
    WAVE = "wave"
    DAMPED_WAVE = "damped_wave"


@dataclass(frozen=True)
class TelegraphParams:
    """Stepper settings for gamma*u_tt + lambda*u_t = c^2*(lap u + mu).

    Stability is checked at construction: heat mode obeys the explicit
    diffusion bound dt <= h^2*lambda/(4c^2); wave modes obey the 2D CFL
    bound with the effective front speed c/sqrt(gamma) when gamma < 1
    (inertia below 1 propagates faster than c, so the plain c-based bound
    alone would admit unstable steps).
    """

    gamma: float = 1.0
    lambda_drag: float = 1.0
    c: float = 1.0
    h: float = 1.0
    dt: float = 0.005
    mode: Mode = Mode.DAMPED_WAVE

    def __post_init__(self):
        for name, lo in (("gamma", 0.0), ("lambda_drag", 0.0)):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= lo):
                raise ParameterError(f"{name} must be a finite real >= {lo}, got {v}")
            object.__setattr__(self, name, float(v))
        for name in ("c", "h", "dt"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be a positive real, got {v}")
            object.__setattr__(self, name, float(v))
        if not isinstance(self.mode, Mode):
            raise ParameterError(f"mode must be a Mode, got {self.mode!r}")

        eps = 1e-12
        if self.mode is Mode.HEAT:
            if self.gamma != 0.0:
                raise ConfigError("heat mode requires gamma = 0")
            if self.lambda_drag <= 0.0:
                raise ConfigError("heat mode requires lambda_drag > 0")
            bound = self.h * self.h * self.lambda_drag / (4.0 * self.c * self.c)
            if self.dt > bound * (1.0 + eps):
                raise ConfigError(
                    f"diffusion stability violated: dt={self.dt:g} exceeds "
                    f"h^2*lambda/(4c^2)={bound:g}"
                )
        else:
            if self.gamma <= 0.0:
                raise ConfigError(f"{self.mode.value} mode requires gamma > 0")
            if self.mode is Mode.WAVE and self.lambda_drag != 0.0:
                raise ConfigError("wave mode requires lambda_drag = 0")
            speed = self.c * max(1.0, 1.0 / math.sqrt(self.gamma))
            if speed * self.dt / self.h > 1.0 / math.sqrt(2.0) * (1.0 + eps):
                raise ConfigError(
                    f"CFL violated: effective speed {speed:g} * dt {self.dt:g} / "
                    f"h {self.h:g} exceeds 1/sqrt(2)"
                )


@dataclass(frozen=True, eq=False)
class PotentialState:
    """Potential and its time derivative, advanced together by the stepper."""

    u: Field2D
    u_t: Field2D

    def __post_init__(self):
        if self.u.values.shape != self.u_t.values.shape:
            raise DimensionError(
                f"u shape {self.u.values.shape} differs from u_t shape "
                f"{self.u_t.values.shape}"
            )

    @classmethod
    def zero(cls, width: int, height: int) -> "PotentialState":
        return cls(Field2D.zeros(width, height), Field2D.zeros(width, height))


def _interior_residual(u: np.ndarray, mu: np.ndarray, h: float) -> float:
    lap = (u[:-2, 1:-1] + u[2:, 1:-1] + u[1:-1, :-2] + u[1:-1, 2:]
           - 4.0 * u[1:-1, 1:-1]) / (h * h)
    return float(np.abs(lap + mu[1:-1, 1:-1]).max())


def poisson_solve(mu: Field2D, h: float = 1.0, tol: float = 1e-8,
                  max_iters: int = 20000, boundary: Field2D | None = None) -> Field2D:
    """Solve -lap u = mu on the interior by red-black over-relaxation.

    Parameters
    ----------
    mu : Field2D
        Source density; at least 3x3 so an interior exists.
    boundary : Field2D or None
        None imposes u = 0 on the edge ring; a Field2D supplies the edge
        ring values (its interior is ignored).
    tol : float
        Max-norm bound on the interior residual of -lap u - mu.

    The relaxation factor is the classical optimum 2/(1+sin(pi/max(w,h))).
    Red-black sweep ordering makes the update deterministic and
    vectorizable while keeping the over-relaxation convergence rate.

    Raises
    ------
    ConvergenceError carrying the final residual if max_iters sweeps do not
    reach tol.
    """
    if mu.width < 3 or mu.height < 3:
        raise DimensionError(f"poisson_solve needs at least 3x3, got {mu.width}x{mu.height}")
    if not (isinstance(tol, (int, float)) and math.isfinite(tol) and tol > 0):
        raise ParameterError(f"tol must be a positive real, got {tol}")
    if not (isinstance(h, (int, float)) and math.isfinite(h) and h > 0):
        raise ParameterError(f"h must be a positive real, got {h}")
    if boundary is not None and boundary.values.shape != mu.values.shape:
        raise DimensionError(
            f"boundary shape {boundary.values.shape} does not match mu {mu.values.shape}"
        )

    m = mu.values
    u = np.zeros_like(m)
    if boundary is not None:
        b = boundary.values
        u[0, :], u[-1, :] = b[0, :], b[-1, :]
        u[:, 0], u[:, -1] = b[:, 0], b[:, -1]

    omega = 2.0 / (1.0 + math.sin(math.pi / max(mu.width, mu.height)))
    f = h * h * m[1:-1, 1:-1]
    iy, ix = np.mgrid[0:mu.height - 2, 0:mu.width - 2]
    checker = (iy + ix) % 2

    residual = _interior_residual(u, m, h)
    for _ in range(max_iters):
        if residual < tol:
            return Field2D(u)
        for parity in (0, 1):
            nb = u[:-2, 1:-1] + u[2:, 1:-1] + u[1:-1, :-2] + u[1:-1, 2:]
            relaxed = (1.0 - omega) * u[1:-1, 1:-1] + omega * 0.25 * (nb + f)
            u[1:-1, 1:-1] = np.where(checker == parity, relaxed, u[1:-1, 1:-1])
        residual = _interior_residual(u, m, h)
    if residual < tol:
        return Field2D(u)
    raise ConvergenceError(
        f"relaxation did not reach tol={tol:g} within {max_iters} sweeps", residual
    )


def direct_potential(mu: Field2D, h: float = 1.0) -> Field2D:
    """Dense log-kernel potential: the free-space closed form, evaluated exactly.

    u(x) = (1/2pi) * sum_y log(1/|x-y|) * mu(y) * h^2, with the singular
    y = x term replaced by the cell-averaged value
    (1/2pi) * (1.5 - log(h/2)) * mu(x) * h^2.  Quadratic in pixel count, so
    restricted to grids of at most 64x64.
    """
    if mu.width > _MAX_DIRECT or mu.height > _MAX_DIRECT:
        raise GridSizeError(
            f"direct_potential is limited to {_MAX_DIRECT}x{_MAX_DIRECT}, "
            f"got {mu.width}x{mu.height}"
        )
    if not (isinstance(h, (int, float)) and math.isfinite(h) and h > 0):
        raise ParameterError(f"h must be a positive real, got {h}")

    ys, xs = np.mgrid[0:mu.height, 0:mu.width]
    px = (xs.reshape(-1) * h).astype(np.float64)
    py = (ys.reshape(-1) * h).astype(np.float64)
    src = mu.values.reshape(-1)
    scale = h * h / (2.0 * math.pi)
    self_term = scale * (1.5 - math.log(0.5 * h))

    out = np.empty(src.size)
    for i in range(src.size):
        d = np.hypot(px - px[i], py - py[i])
        d[i] = 1.0  # placeholder; the self term is added separately
        out[i] = -scale * float(np.dot(np.log(d), src)) + self_term * src[i]
    return Field2D.from_flat(mu.width, mu.height, out)


def evolve_potential(state: PotentialState, mu: Field2D,
                     p: TelegraphParams) -> PotentialState:
    """One explicit step of gamma*u_tt + lambda*u_t = c^2*(lap u + mu).

    Interior pixels advance; the edge ring holds its (zero) Dirichlet
    values.  Heat mode is forward Euler on the first-order equation with
    u_t reported as zero.  Wave modes advance (u, u_t) with the centered
    staggered scheme: u_t lives at half steps, the drag term is averaged
    across the step, and u then advances with the fresh u_t, which is
    algebraically the classic three-level centered scheme on u.

    Stability was already enforced when p was constructed, so the state is
    never touched by an inadmissible step.
    """
    if state.u.values.shape != mu.values.shape:
        raise DimensionError(
            f"state shape {state.u.values.shape} does not match mu {mu.values.shape}"
        )
    if mu.width < 3 or mu.height < 3:
        raise DimensionError(f"stepper needs at least 3x3, got {mu.width}x{mu.height}")

    inner = np.s_[1:-1, 1:-1]
    drive = laplacian(state.u, p.h).values[inner] + mu.values[inner]

    if p.mode is Mode.HEAT:
        u_new = state.u.values.copy()
        u_new[inner] += (p.dt * p.c * p.c / p.lambda_drag) * drive
        return PotentialState(Field2D(u_new), Field2D.zeros(mu.width, mu.height))

    half_drag = 0.5 * p.lambda_drag * p.dt
    ut_new = np.zeros_like(state.u_t.values)
    ut_new[inner] = ((p.gamma - half_drag) * state.u_t.values[inner]
                     + p.dt * p.c * p.c * drive) / (p.gamma + half_drag)
    u_new = state.u.values.copy()
    u_new[inner] += p.dt * ut_new[inner]
    return PotentialState(Field2D(u_new), Field2D(ut_new))


def convergence_in_c(mu: Field2D, c_list, horizon: float,
                     base: TelegraphParams,
                     reference_tol: float = 1e-10) -> list[float]:
    """Gradient error against the relaxation solution for each speed in c_list.

    Every speed evolves a zero state for the given horizon with the same
    dt, h, and mode taken from base (base.c is ignored); the error is
    |grad u_c - grad u_ref|_2 / |grad u_ref|_2 with u_ref the tight
    relaxation solve under the same zero-Dirichlet boundary.  A zero
    reference gradient with a zero evolved gradient counts as error 0.
    The list is returned as computed; callers assert monotonicity.
    """
    from dataclasses import replace

    cs = [float(c) for c in c_list]
    if any(not (math.isfinite(c) and c > 0) for c in cs):
        raise ParameterError(f"c_list must hold positive reals, got {c_list}")
    if any(b <= a for a, b in zip(cs, cs[1:])):
        raise ParameterError(f"c_list must be strictly ascending, got {c_list}")
    if not (isinstance(horizon, (int, float)) and math.isfinite(horizon) and horizon > 0):
        raise ParameterError(f"horizon must be a positive real, got {horizon}")

    u_ref = poisson_solve(mu, h=base.h, tol=reference_tol, max_iters=200000)
    g_ref = gradient(u_ref, base.h)
    ref_norm = math.sqrt(float(np.sum(g_ref.dx ** 2) + np.sum(g_ref.dy ** 2)))

    steps = max(1, round(horizon / base.dt))
    errors = []
    for c in cs:
        params = replace(base, c=c)
        state = PotentialState.zero(mu.width, mu.height)
        for _ in range(steps):
            state = evolve_potential(state, mu, params)
        g = gradient(state.u, base.h)
        diff = math.sqrt(float(np.sum((g.dx - g_ref.dx) ** 2)
                               + np.sum((g.dy - g_ref.dy) ** 2)))
        if ref_norm == 0.0:
            errors.append(0.0 if diff == 0.0 else math.inf)
        else:
            errors.append(diff / ref_norm)
    return errors
