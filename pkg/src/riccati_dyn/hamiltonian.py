"""Legendre transform, Hamiltonians and the canonical map to a linear oscillator.

Momentum conventions:

* U-family (``GeneralU``, ``CubicRiccati``): ``p = dL/dv = -1/D**2`` for
  ``L = 1/D``, ``D = v + k U``.
* Oscillator: the momentum comes from the rescaled Lagrangian
  ``(w/k)**2 / (k v + k**2 x**2 + w**2) - 1/k**2``, giving
  ``p = -w**2 / (k D**2)``. With the raw ``1/D`` the oscillator Hamiltonian
  below would not reproduce ``I_XW``; with this one it does identically.

Both identities hold on the ``D > 0`` branch, where ``sqrt(-p)`` (resp.
``sqrt(-k p)``) recovers ``+1/D`` (resp. ``w/D``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PositiveMomentum, RootDomain, SingularDenominator, WrongBranch
from .integrate import IntegratorConfig, Status, Trajectory, integrate, solve
from .model import (
    DEFAULT_EPSILON,
    NonlinearOscillator,
    OneDim,
    QuadraticU,
    State,
    as_general_u,
    denominator,
)


@dataclass(frozen=True)
class CanonicalPoint:
    x: float
    p: float
    Q: float | None = None
    P: float | None = None


def _denominator(spec: OneDim, state: State, eps: float) -> float:
    D = denominator(spec, state.q[0], state.v[0])
    if not abs(D) > eps:
        raise SingularDenominator()
    return D


def momentum(spec: OneDim, state: State, eps: float = DEFAULT_EPSILON) -> float:
    """Canonical momentum p = dL/dv (always negative)."""
    D = _denominator(spec, state, eps)
    if isinstance(spec, NonlinearOscillator):
        return -spec.w ** 2 / (spec.k * D * D)
    return -1.0 / (D * D)


def hamiltonian_u(U: QuadraticU, k: float, x: float, p: float) -> float:
    """H = -2 sqrt(-p) - k U(x) p."""
    if not p < 0:
        raise PositiveMomentum(f"p = {p!r} must be negative")
    return -2.0 * math.sqrt(-p) - k * U(x) * p


def hamiltonian_osc(k: float, w: float, x: float, p: float) -> float:
    """H = -[(2w/k**2) sqrt(-k p) + (k x**2 + w**2/k) p] + 1/k**2."""
    if not -k * p > 0:
        raise RootDomain(f"-k p = {-k * p!r} must be positive")
    return -((2.0 * w / (k * k)) * math.sqrt(-k * p) + (k * x * x + w * w / k) * p) + 1.0 / (k * k)


def hamiltonian_of_state(spec: OneDim, state: State, eps: float = DEFAULT_EPSILON) -> float:
    """H evaluated at the Legendre image of a D > 0 state."""
    D = _denominator(spec, state, eps)
    if D < 0:
        raise WrongBranch("Legendre identity is implemented on the D > 0 branch only")
    p = momentum(spec, state, eps)
    x = state.q[0]
    if isinstance(spec, NonlinearOscillator):
        return hamiltonian_osc(spec.k, spec.w, x, p)
    g = as_general_u(spec)
    return hamiltonian_u(g.U, g.k, x, p)


def canonical_qp(k: float, w: float, x: float, p: float) -> tuple[float, float]:
    """Q = (sqrt2/w) x sqrt(-k p), P = (sqrt2/k)(1 - w sqrt(-k p))."""
    if not -k * p > 0:
        raise RootDomain(f"-k p = {-k * p!r} must be positive")
    r = math.sqrt(-k * p)
    return math.sqrt(2.0) / w * x * r, math.sqrt(2.0) / k * (1.0 - w * r)


def legendre(spec: OneDim, state: State, eps: float = DEFAULT_EPSILON) -> CanonicalPoint:
    p = momentum(spec, state, eps)
    x = state.q[0]
    if isinstance(spec, NonlinearOscillator):
        Q, P = canonical_qp(spec.k, spec.w, x, p)
        return CanonicalPoint(x, p, Q, P)
    return CanonicalPoint(x, p)


def _d1(f, z: float, h: float) -> float:
    # paired differences keep the stencil exactly odd under z -> -z
    return (8 * (f(z + h) - f(z - h)) - (f(z + 2 * h) - f(z - 2 * h))) / (12 * h)


def poisson_bracket_check(k: float, w: float, x: float, p: float, fd_step: float | None = None) -> float:
    """{Q, P} in (x, p) by 4th-order central differences; exact value is 1."""
    hx = fd_step if fd_step is not None else 1e-6 * max(1.0, abs(x))
    hp = fd_step if fd_step is not None else 1e-6 * max(1.0, abs(p))
    if not -k * (p + 2 * hp) > 0 or not -k * (p - 2 * hp) > 0:
        raise RootDomain("finite-difference stencil leaves the -k p > 0 domain")
    Qx = _d1(lambda s: canonical_qp(k, w, s, p)[0], x, hx)
    Qp = _d1(lambda s: canonical_qp(k, w, x, s)[0], p, hp)
    Px = _d1(lambda s: canonical_qp(k, w, s, p)[1], x, hx)
    Pp = _d1(lambda s: canonical_qp(k, w, x, s)[1], p, hp)
    return Qx * Pp - Qp * Px


def hamilton_rhs(spec: OneDim):
    """Vector field (dx/dt, dp/dt) = (dH/dp, -dH/dx) for the matching Hamiltonian."""
    if isinstance(spec, NonlinearOscillator):
        k, w = spec.k, spec.w

        def fun(t, y):
            x, p = y
            if not -k * p > 0:
                raise RootDomain("-k p left the positive domain")
            dx = w / (k * math.sqrt(-k * p)) - k * x * x - w * w / k
            return np.array([dx, 2.0 * k * x * p])

        return fun
    g = as_general_u(spec)
    U, k = g.U, g.k

    def fun(t, y):
        x, p = y
        if not p < 0:
            raise PositiveMomentum("p left the negative domain")
        return np.array([1.0 / math.sqrt(-p) - k * U(x), k * U.dx(x) * p])

    return fun


def hamilton_flow(spec: OneDim, state: State, t_end: float,
                  config: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate Hamilton's equations from the Legendre image of ``state``."""
    pt = legendre(spec, state)
    return solve(hamilton_rhs(spec), state.t, np.array([pt.x, pt.p]), t_end, config)


def hamilton_tracking_error(spec: OneDim, state: State, t_end: float,
                            config: IntegratorConfig = IntegratorConfig(),
                            samples: int = 200) -> float:
    """max |x_H(t) - x_L(t)| over a uniform grid, both flows integrated numerically."""
    ham = hamilton_flow(spec, state, t_end, config)
    lag = integrate(spec, state, t_end, config)
    if ham.status is not Status.COMPLETED or lag.status is not Status.COMPLETED:
        raise RuntimeError(f"flow stopped early: {ham.status}, {lag.status}")
    ts = np.linspace(state.t, t_end, samples)
    xh = np.array([ham.dense_array(s)[0] for s in ts])
    xl = np.array([lag.dense_array(s)[0] for s in ts])
    return float(np.max(np.abs(xh - xl)))


__all__ = [
    "CanonicalPoint",
    "canonical_qp",
    "hamilton_flow",
    "hamilton_rhs",
    "hamilton_tracking_error",
    "hamiltonian_of_state",
    "hamiltonian_osc",
    "hamiltonian_u",
    "legendre",
    "momentum",
    "poisson_bracket_check",
]
