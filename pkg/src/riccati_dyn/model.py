"""Dynamical systems built from reciprocal (non-natural) Lagrangians.

Every one-dimensional system here comes from a Lagrangian of the form
``L = 1/D`` with ``D`` affine in the velocity:

* ``GeneralU(U, k)``            D = v + k U(x)
* ``CubicRiccati(k)``           D = v + k x**2
* ``NonlinearOscillator(k, w)`` D = k v + k**2 x**2 + w**2

``Product2D`` stacks two of them with no coupling. The phase-space vector
used by the integrator is ordered ``(x, v)`` or ``(x, vx, y, vy)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import SingularDenominator

DEFAULT_EPSILON = 1e-12


@dataclass(frozen=True)
class QuadraticU:
    """U(x) = c0 + c1 x + c2 x**2, optionally with coefficient time derivatives.

    For a time-dependent U the caller supplies the coefficient values *and*
    their time derivatives (dc0, dc1, dc2) at the evaluation time.
    """

    c0: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    dc0: float = 0.0
    dc1: float = 0.0
    dc2: float = 0.0

    def __call__(self, x: float) -> float:
        return self.c0 + self.c1 * x + self.c2 * x * x

    def dx(self, x: float) -> float:
        return self.c1 + 2.0 * self.c2 * x

    def dt(self, x: float) -> float:
        return self.dc0 + self.dc1 * x + self.dc2 * x * x

    @property
    def time_dependent(self) -> bool:
        return (self.dc0, self.dc1, self.dc2) != (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class GeneralU:
    U: QuadraticU
    k: float = 1.0


@dataclass(frozen=True)
class CubicRiccati:
    k: float = 1.0


@dataclass(frozen=True)
class NonlinearOscillator:
    k: float = 1.0
    w: float = 1.0

    def __post_init__(self):
        if self.w < 0:
            raise ValueError("oscillator frequency w must be >= 0")


OneDim = Union[GeneralU, CubicRiccati, NonlinearOscillator]


@dataclass(frozen=True)
class Product2D:
    first: OneDim
    second: OneDim

    def __post_init__(self):
        for axis in (self.first, self.second):
            if isinstance(axis, Product2D):
                raise TypeError("Product2D components must be one-dimensional")

    @property
    def axes(self) -> tuple[OneDim, OneDim]:
        return (self.first, self.second)


SystemSpec = Union[GeneralU, CubicRiccati, NonlinearOscillator, Product2D]


def arity(spec: SystemSpec) -> int:
    return 2 if isinstance(spec, Product2D) else 1


def axes_of(spec: SystemSpec) -> tuple[OneDim, ...]:
    return spec.axes if isinstance(spec, Product2D) else (spec,)


@dataclass(frozen=True)
class State:
    """Phase point: time, positions and velocities (1 or 2 entries each)."""

    t: float
    q: tuple[float, ...]
    v: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(c) for c in self.q))
        object.__setattr__(self, "v", tuple(float(c) for c in self.v))
        if len(self.q) != len(self.v) or len(self.q) not in (1, 2):
            raise ValueError("State needs matching 1- or 2-component q and v")

    @classmethod
    def one(cls, x: float, v: float, t: float = 0.0) -> "State":
        return cls(t, (x,), (v,))

    @classmethod
    def two(cls, x: float, vx: float, y: float, vy: float, t: float = 0.0) -> "State":
        return cls(t, (x, y), (vx, vy))

    @classmethod
    def from_array(cls, t: float, y) -> "State":
        y = [float(c) for c in y]
        return cls(float(t), tuple(y[0::2]), tuple(y[1::2]))

    def to_array(self) -> np.ndarray:
        out = np.empty(2 * len(self.q))
        out[0::2] = self.q
        out[1::2] = self.v
        return out

    @property
    def dim(self) -> int:
        return len(self.q)

    def axis(self, i: int) -> tuple[float, float]:
        return self.q[i], self.v[i]


def _check_arity(spec: SystemSpec, state: State) -> None:
    if arity(spec) != state.dim:
        raise ValueError(f"state has {state.dim} degrees of freedom, system has {arity(spec)}")


# --- per-axis primitives -------------------------------------------------------


def denominator(spec: OneDim, x: float, v: float) -> float:
    """Lagrangian denominator D so that L = 1/D."""
    if isinstance(spec, CubicRiccati):
        return v + spec.k * x * x
    if isinstance(spec, NonlinearOscillator):
        k = spec.k
        return k * v + k * k * x * x + spec.w * spec.w
    if isinstance(spec, GeneralU):
        return v + spec.k * spec.U(x)
    raise TypeError(f"not a one-dimensional system: {spec!r}")


def denominator_rate(spec: OneDim, x: float, v: float, a: float) -> float:
    """dD/dt along a motion with acceleration a."""
    if isinstance(spec, CubicRiccati):
        return a + 2.0 * spec.k * x * v
    if isinstance(spec, NonlinearOscillator):
        k = spec.k
        return k * a + 2.0 * k * k * x * v
    if isinstance(spec, GeneralU):
        U = spec.U
        return a + spec.k * (U.dx(x) * v + U.dt(x))
    raise TypeError(f"not a one-dimensional system: {spec!r}")


def _riccati_accel(k: float, U: float, dU: float, Ut: float, v: float) -> float:
    return -(1.5 * k * dU * v + 0.5 * k * k * U * dU + k * Ut)


def axis_force(spec: OneDim, x: float, v: float) -> float:
    if isinstance(spec, CubicRiccati):
        return _riccati_accel(spec.k, x * x, 2.0 * x, 0.0, v)
    if isinstance(spec, NonlinearOscillator):
        return _riccati_accel(spec.k, x * x, 2.0 * x, 0.0, v) - spec.w * spec.w * x
    if isinstance(spec, GeneralU):
        U = spec.U
        return _riccati_accel(spec.k, U(x), U.dx(x), U.dt(x), v)
    raise TypeError(f"not a one-dimensional system: {spec!r}")


# --- public operations ---------------------------------------------------------


def lagrangian_value(spec: OneDim, state: State, eps: float = DEFAULT_EPSILON) -> float:
    """L = 1/D at the given phase point.

    Raises SingularDenominator when |D| < eps.
    """
    if isinstance(spec, Product2D):
        return sum(lagrangian_value(ax, State.one(*state.axis(i), t=state.t), eps)
                   for i, ax in enumerate(spec.axes))
    _check_arity(spec, state)
    D = denominator(spec, state.q[0], state.v[0])
    if abs(D) < eps:
        raise SingularDenominator()
    return 1.0 / D


def force(spec: SystemSpec, state: State) -> np.ndarray:
    """Acceleration vector of the Euler-Lagrange equations."""
    _check_arity(spec, state)
    return np.array([axis_force(ax, state.q[i], state.v[i]) for i, ax in enumerate(axes_of(spec))])


def rhs(spec: SystemSpec, state: State) -> np.ndarray:
    """First-order reduction: (v, a) interleaved in state order."""
    _check_arity(spec, state)
    return rhs_array(spec, state.t, state.to_array())


def rhs_array(spec: SystemSpec, t: float, y: np.ndarray) -> np.ndarray:
    out = np.empty_like(y, dtype=float)
    for i, ax in enumerate(axes_of(spec)):
        x, v = float(y[2 * i]), float(y[2 * i + 1])
        out[2 * i] = v
        out[2 * i + 1] = axis_force(ax, x, v)
    return out


def make_rhs(spec: SystemSpec) -> Callable[[float, np.ndarray], np.ndarray]:
    """Closure form of rhs_array for the integrator."""
    axes = axes_of(spec)

    def fun(t: float, y: np.ndarray) -> np.ndarray:
        out = np.empty(2 * len(axes))
        for i, ax in enumerate(axes):
            x, v = y[2 * i], y[2 * i + 1]
            out[2 * i] = v
            out[2 * i + 1] = axis_force(ax, x, v)
        return out

    return fun


def as_general_u(spec: OneDim) -> GeneralU:
    """Rewrite a system as GeneralU(U, k) with identical equations of motion.

    The oscillator maps to U = x**2 + w**2/k**2 (needs k != 0); its own
    Lagrangian is then 1/k times the general one.
    """
    if isinstance(spec, GeneralU):
        return spec
    if isinstance(spec, CubicRiccati):
        return GeneralU(QuadraticU(0.0, 0.0, 1.0), spec.k)
    if isinstance(spec, NonlinearOscillator):
        if spec.k == 0:
            raise ValueError("the k = 0 oscillator is linear and has no GeneralU form")
        return GeneralU(QuadraticU(spec.w ** 2 / spec.k ** 2, 0.0, 1.0), spec.k)
    raise TypeError(f"not a one-dimensional system: {spec!r}")


# --- second-order Riccati coefficients -----------------------------------------


@dataclass(frozen=True)
class RiccatiCoefficients:
    """y'' + (b0 + b1 y) y' + a0 + a1 y + a2 y**2 + a3 y**3 = 0."""

    a0: float
    a1: float
    a2: float
    a3: float
    b0: float
    b1: float


def riccati_coefficients(U: QuadraticU) -> RiccatiCoefficients:
    """Coefficient map for the k = 1 equation of motion with quadratic U."""
    c0, c1, c2 = U.c0, U.c1, U.c2
    return RiccatiCoefficients(
        a0=0.5 * c0 * c1 + U.dc0,
        a1=c0 * c2 + 0.5 * c1 * c1 + U.dc1,
        a2=1.5 * c1 * c2 + U.dc2,
        a3=c2 * c2,
        b0=1.5 * c1,
        b1=3.0 * c2,
    )


def b0_discrepancy(U: QuadraticU) -> float:
    """(a2/sqrt(a3) - a3'/(2 a3)) - b0 for the coefficients produced by U.

    The first form is the general constraint linking b0 to the cubic
    coefficients; the second is what the quadratic-U map yields. They agree
    for c2 > 0 and differ for c2 < 0 (where sqrt(a3) = -c2). NaN if a3 = 0.
    """
    co = riccati_coefficients(U)
    if co.a3 == 0.0:
        return math.nan
    da3 = 2.0 * U.c2 * U.dc2
    return co.a2 / math.sqrt(co.a3) - da3 / (2.0 * co.a3) - co.b0


def riccati_force(co: RiccatiCoefficients, x: float, v: float) -> float:
    """Acceleration from the polynomial form of the second-order Riccati equation."""
    return -((co.b0 + co.b1 * x) * v + co.a0 + co.a1 * x + co.a2 * x * x + co.a3 * x * x * x)


# --- Lagrangians as phase functions --------------------------------------------


def lagrangian(spec: OneDim, eps: float = DEFAULT_EPSILON) -> Callable[[float, float], float]:
    def L(x: float, v: float) -> float:
        D = denominator(spec, x, v)
        if abs(D) < eps:
            raise SingularDenominator()
        return 1.0 / D

    return L


def alternative_lagrangian(spec: OneDim) -> Callable[[float, float], float]:
    """L2 = sqrt(2 v + k U(x)); same dynamics as 1/(v + k U) where defined."""
    g = as_general_u(spec)
    if isinstance(spec, NonlinearOscillator):
        raise TypeError("the square-root Lagrangian is defined for the U-family only")

    def L2(x: float, v: float) -> float:
        arg = 2.0 * v + g.k * g.U(x)
        if arg <= 0.0:
            raise SingularDenominator("sqrt(2 v + k U) undefined")
        return math.sqrt(arg)

    return L2


def _d1(f: Callable[[float], float], z: float, h: float) -> float:
    return (f(z - 2 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2 * h)) / (12.0 * h)


def euler_lagrange_residual(
    L: Callable[[float, float], float],
    state: State,
    accel: float,
    fd_step: float | None = None,
    outer_step: float | None = None,
) -> float:
    """d/dt(dL/dv) - dL/dx at (x, v) for the supplied acceleration.

    All partials use 4th-order central differences. The inner velocity
    derivative uses ``fd_step`` (default 1e-5); the outer derivatives of
    dL/dv use ``outer_step`` (default 5e-4), which balances truncation
    against roundoff amplified by the nested stencil. Both are scaled by
    max(1, |coordinate|).
    """
    if state.dim != 1:
        raise ValueError("euler_lagrange_residual works on one degree of freedom")
    x, v = state.q[0], state.v[0]
    h_in = 1e-5 if fd_step is None else fd_step
    h_out = 5e-4 if outer_step is None else outer_step
    hx_in, hv_in = h_in * max(1.0, abs(x)), h_in * max(1.0, abs(v))
    hx_out, hv_out = h_out * max(1.0, abs(x)), h_out * max(1.0, abs(v))

    def call(xx: float, vv: float) -> float:
        try:
            val = L(xx, vv)
        except (ZeroDivisionError, ValueError) as exc:
            raise SingularDenominator(f"Lagrangian undefined in stencil: {exc}") from exc
        if not math.isfinite(val):
            raise SingularDenominator("Lagrangian not finite in stencil")
        return val

    def L_v(xx: float, vv: float) -> float:
        return _d1(lambda s: call(xx, s), vv, hv_in)

    call(x, v)  # the centre point belongs to the stencil neighbourhood
    L_x = _d1(lambda s: call(s, v), x, hx_in)
    L_vx = _d1(lambda s: L_v(s, v), x, hx_out)
    L_vv = _d1(lambda s: L_v(x, s), v, hv_out)
    return L_vx * v + L_vv * accel - L_x
