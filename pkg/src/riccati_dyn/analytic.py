"""Closed-form solutions, energy-level quadrature and the third-order linearization.

Energy conventions for the ``E`` arguments:

* cubic / general-U systems: ``E`` is the Lagrangian energy ``E_L``;
* nonlinear oscillator: ``E`` is the level of ``I_XW`` (the rescaled
  energy), i.e. the same ``E`` as in ``oscillator_solution``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    OutsideAllowedRegion,
    SingularIntegrand,
    SingularTime,
    ZeroCrossing,
    ZeroEnergy,
)
from .integrate import IntegratorConfig, Status, solve
from .model import GeneralU, NonlinearOscillator, OneDim, as_general_u

DEFAULT_EPSILON = 1e-12


# --- cubic system --------------------------------------------------------------


def cubic_solution(k: float, E: float, t: float, eps: float = DEFAULT_EPSILON) -> float:
    """x(t) = 2t / (k t**2 - E), the orbit through x = 0 at t = 0."""
    den = k * t * t - E
    if abs(den) < eps:
        raise SingularTime(f"k t^2 - E vanishes at t={t!r}")
    return 2.0 * t / den


def cubic_velocity(k: float, E: float, t: float, eps: float = DEFAULT_EPSILON) -> float:
    den = k * t * t - E
    if abs(den) < eps:
        raise SingularTime(f"k t^2 - E vanishes at t={t!r}")
    return -2.0 * (k * t * t + E) / (den * den)


def cubic_acceleration(k: float, E: float, t: float, eps: float = DEFAULT_EPSILON) -> float:
    den = k * t * t - E
    if abs(den) < eps:
        raise SingularTime(f"k t^2 - E vanishes at t={t!r}")
    return 4.0 * k * t * (k * t * t + 3.0 * E) / den ** 3


def cubic_singular_times(k: float, E: float) -> tuple[float, ...]:
    """Blow-up times +-sqrt(E/k) when k and E share a sign, else ()."""
    if k == 0 or E == 0 or (k > 0) != (E > 0):
        return ()
    r = math.sqrt(abs(E) / abs(k))
    return (-r, r)


def cubic_time_offset(k: float, E: float, x0: float, v0: float) -> float:
    """Time tau with cubic_solution(k, E, tau) = x0 and matching velocity v0.

    Candidates come from t = (1 +- sqrt(1 + k E x**2)) / (k x); the one whose
    closed-form velocity is nearest v0 is returned. A general state (x0, v0)
    at time t0 then follows x(t) = cubic_solution(k, E, t - t0 + tau).
    """
    if x0 == 0.0:
        return 0.0
    s = 1.0 + k * E * x0 * x0
    if s < 0:
        raise OutsideAllowedRegion("1 + k E x^2 < 0")
    r = math.sqrt(s)
    # (1 - r) / (k x) rewritten without cancellation for small k E x**2
    cands = [(1.0 + r) / (k * x0), -E * x0 / (1.0 + r)]
    best, err = None, math.inf
    for tau in cands:
        try:
            d = abs(cubic_velocity(k, E, tau) - v0) + abs(cubic_solution(k, E, tau) - x0)
        except SingularTime:
            continue
        if d < err:
            best, err = tau, d
    if best is None:
        raise SingularTime("no regular branch through the given state")
    return best


# --- oscillator ----------------------------------------------------------------


def oscillator_solution(k: float, w: float, E: float, phi: float, t: float,
                        eps: float = DEFAULT_EPSILON) -> tuple[float, float]:
    """(x, v) with x = w sqrt(E) sin(th) / (1 - k sqrt(E) cos(th)), th = w t + phi."""
    if E < 0:
        raise ValueError("oscillator energy E must be >= 0")
    A = math.sqrt(E)
    th = w * t + phi
    s, c = math.sin(th), math.cos(th)
    den = 1.0 - k * A * c
    if abs(den) < eps:
        raise SingularTime(f"1 - k sqrt(E) cos(w t + phi) vanishes at t={t!r}")
    x = w * A * s / den
    v = w * w * A * (c - k * A) / (den * den)
    return x, v


def oscillator_acceleration(k: float, w: float, E: float, phi: float, t: float) -> float:
    """Closed-form d2x/dt2 of oscillator_solution."""
    A = math.sqrt(E)
    th = w * t + phi
    s, c = math.sin(th), math.cos(th)
    den = 1.0 - k * A * c
    # d/dt [w^2 A (c - kA) den^-2]
    return w ** 3 * A * (-s * den - 2.0 * (c - k * A) * k * A * s) / den ** 3


def oscillator_regular(k: float, E: float) -> bool:
    """True inside the regular oscillatory region 0 < E < 1/k**2."""
    return 0.0 < E and (k == 0 or E < 1.0 / (k * k))


# --- energy-level kinematics ---------------------------------------------------


def u_form(spec: OneDim, E: float) -> tuple[GeneralU, float]:
    """(GeneralU, E_L of that GeneralU) describing the same energy level."""
    g = as_general_u(spec)
    if isinstance(spec, NonlinearOscillator):
        k, w = spec.k, spec.w
        e_osc = (E - 1.0 / (k * k)) * (k / w) ** 2
        return g, k * e_osc
    return g, E


def _region(g: GeneralU, E_u: float, x: float) -> float:
    return 1.0 + g.k * E_u * g.U(x)


def velocity_branches(spec: OneDim, x: float, E: float) -> tuple[float, float]:
    """(v_plus, v_minus) = (-(1 + kEU) +- sqrt(1 + kEU)) / E at position x."""
    g, E_u = u_form(spec, E)
    if E_u == 0.0:
        raise ZeroEnergy("velocity branches degenerate at E = 0")
    s = _region(g, E_u, x)
    if s < 0.0:
        raise OutsideAllowedRegion(f"1 + k E U(x) = {s!r} < 0 at x={x!r}")
    r = math.sqrt(s)
    return (-s + r) / E_u, (-s - r) / E_u


def _quadratic_roots(a: float, b: float, c: float) -> list[float]:
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    r = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(r, b))
    roots = []
    if q != 0.0:
        roots += [q / a, c / q]
    else:
        roots += [0.0]
    return sorted(set(roots))


def turning_points(spec: OneDim, E: float) -> list[float]:
    """Positions where 1 + k E U(x) = 0 (both velocity branches meet)."""
    g, E_u = u_form(spec, E)
    U = g.U
    kE = g.k * E_u
    return _quadratic_roots(kE * U.c2, kE * U.c1, 1.0 + kE * U.c0)


# Gauss-Kronrod 7-15 rule on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes, ascending
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[7] = _WG[3]
_WG15[[9, 11, 13]] = _WG[:3][::-1]


def gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """(Kronrod estimate, |Kronrod - Gauss|) on [a, b]."""
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    vals = np.array([f(c + h * z) for z in _NODES])
    k = h * float(vals @ _WK)
    g = h * float(vals @ _WG15)
    return k, abs(k - g)


def adaptive_quad(f: Callable[[float], float], a: float, b: float, rtol: float = 1e-10,
                  atol: float = 1e-14, max_panels: int = 5000) -> tuple[float, float]:
    """Globally adaptive bisection with the 15-point Kronrod rule.

    Returns (integral, error estimate). Panels are summed in interval order.
    """
    if a == b:
        return 0.0, 0.0
    val, err = gk15(f, a, b)
    heap = [(-err, a, b, val)]
    panels = {(a, b): (val, err)}
    total_err = err
    while total_err > max(atol, rtol * abs(sum(v for v, _ in panels.values()))):
        if len(panels) >= max_panels:
            break
        _, lo, hi, _ = heapq.heappop(heap)
        old_v, old_e = panels.pop((lo, hi))
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            panels[(lo, hi)] = (old_v, old_e)
            break
        total_err -= old_e
        for p, q in ((lo, mid), (mid, hi)):
            v, e = gk15(f, p, q)
            panels[(p, q)] = (v, e)
            total_err += e
            heapq.heappush(heap, (-e, p, q, v))
    ordered = sorted(panels.items(), key=lambda kv: kv[0][0] if a < b else -kv[0][0])
    return math.fsum(v for _, (v, _) in ordered), total_err


def quadrature_time(spec: OneDim, E: float, x0: float, x1: float, branch: str,
                    rtol: float = 1e-10) -> float:
    """Travel time from x0 to x1 on a fixed velocity branch ("plus" or "minus").

    ``branch`` names the sign in front of the root in the velocity formula
    returned by ``velocity_branches``; dt/dx is the reciprocal of that
    velocity. Turning points (1 + k E U = 0) are allowed at the endpoints,
    where a cosine substitution removes the inverse-square-root singularity.
    """
    if branch not in ("plus", "minus"):
        raise ValueError("branch must be 'plus' or 'minus'")
    if x0 == x1:
        return 0.0
    g, E_u = u_form(spec, E)
    if E_u == 0.0:
        raise ZeroEnergy("velocity branches degenerate at E = 0")
    lo, hi = min(x0, x1), max(x0, x1)
    width = hi - lo
    tol = 1e-9 * max(1.0, width)

    for end in (x0, x1):
        if _region(g, E_u, end) < -1e-12:
            raise OutsideAllowedRegion(f"x={end!r} lies outside the allowed region")
    for r in turning_points(spec, E):
        if lo + tol < r < hi - tol:
            mid_l, mid_r = _region(g, E_u, r - tol), _region(g, E_u, r + tol)
            if mid_l < 0 or mid_r < 0:
                raise OutsideAllowedRegion(f"1 + k E U < 0 near x={r!r}")
            raise SingularIntegrand(f"turning point at x={r!r} inside the interval")
    if branch == "plus":
        # v_plus vanishes where U = 0 (the Lagrangian itself is singular there)
        U = g.U
        for r in _quadratic_roots(U.c2, U.c1, U.c0):
            if lo - tol <= r <= hi + tol:
                raise SingularIntegrand(f"v_plus = 0 at x={r!r} (U = 0)")

    sign = 1.0 if branch == "plus" else -1.0

    def dt_dx(x: float) -> float:
        s = _region(g, E_u, x)
        s = max(s, 0.0)
        v = (-s + sign * math.sqrt(s)) / E_u
        if v == 0.0:
            raise SingularIntegrand(f"velocity vanishes at x={x!r}")
        return 1.0 / v

    half = 0.5 * (x1 - x0)

    def integrand(theta: float) -> float:
        # x = x0 + (x1 - x0)(1 - cos theta)/2, theta in [0, pi]
        x = x0 + half * (1.0 - math.cos(theta))
        jac = half * math.sin(theta)
        if jac == 0.0:
            return 0.0
        try:
            return dt_dx(x) * jac
        except SingularIntegrand:
            return 0.0

    val, _ = adaptive_quad(integrand, 0.0, math.pi, rtol=rtol)
    return val


def oscillator_period_by_quadrature(k: float, w: float, E: float) -> float:
    """Sum of branch travel times around one closed orbit of the oscillator."""
    spec = NonlinearOscillator(k, w)
    tps = turning_points(spec, E)
    if len(tps) != 2:
        raise OutsideAllowedRegion("no closed orbit at this energy")
    x_min, x_max = tps
    # v_minus > 0 carries x upward, v_plus < 0 carries it back.
    up = quadrature_time(spec, E, x_min, x_max, "minus")
    down = quadrature_time(spec, E, x_max, x_min, "plus")
    return up + down


# --- third-order linearization -------------------------------------------------


@dataclass(frozen=True)
class InceReport:
    t: np.ndarray
    u: np.ndarray
    w: np.ndarray
    residual_cascade: float
    residual_fd: float
    zeros: tuple[float, ...] = field(default=())

    @property
    def residual(self) -> float:
        return max(self.residual_cascade, self.residual_fd)


def ince_linearization_oracle(
    q: Callable[[float], float],
    u0: tuple[float, float, float],
    tspan: tuple[float, float],
    n_grid: int = 201,
    config: IntegratorConfig = IntegratorConfig(rtol=1e-12, atol=1e-14),
    exclusion: float = 1e-3,
    exclude_zeros: bool = True,
) -> InceReport:
    """Check that w = u'/u solves w'' + 3 w w' + w**3 = q when u''' = q u.

    u is integrated on a uniform grid (each grid interval is its own march,
    so grid values are integrator nodes). Two residuals are reported:
    ``residual_cascade`` takes w' and w'' from the exact derivative cascade,
    ``residual_fd`` takes them from 4th-order central differences of the
    sampled w. Grid points within ``exclusion`` of a zero of u are dropped.
    """
    t0, t1 = tspan
    if not t1 > t0:
        raise ValueError("tspan must be increasing")
    grid = np.linspace(t0, t1, n_grid)

    def fun(t, y):
        return np.array([y[1], y[2], q(t) * y[0]])

    Y = np.empty((n_grid, 3))
    Y[0] = u0
    for i in range(n_grid - 1):
        tr = solve(fun, grid[i], Y[i], grid[i + 1], config)
        if tr.status is not Status.COMPLETED:
            raise RuntimeError(f"linear integration stopped: {tr.status}")
        Y[i + 1] = tr.y[-1]

    u, du, ddu = Y[:, 0], Y[:, 1], Y[:, 2]
    zeros = []
    for i in range(n_grid - 1):
        if u[i] == 0.0:
            zeros.append(float(grid[i]))
        elif u[i] * u[i + 1] < 0:
            zeros.append(float(grid[i] - u[i] * (grid[i + 1] - grid[i]) / (u[i + 1] - u[i])))
    if u[-1] == 0.0:
        zeros.append(float(grid[-1]))
    if zeros and not exclude_zeros:
        raise ZeroCrossing(f"u vanishes at t={zeros[0]!r}")
    keep = np.ones(n_grid, dtype=bool)
    for z in zeros:
        keep &= np.abs(grid - z) > exclusion
        # the FD stencil also needs neighbours on the same side of the zero
        keep &= ~((grid - z) * (grid - z) < (3 * (grid[1] - grid[0])) ** 2)

    with np.errstate(divide="ignore", invalid="ignore"):
        w = du / u
        qv = np.array([q(s) for s in grid])
        dw = ddu / u - w * w
        ddw = qv - 3 * w * dw - w ** 3  # u'''/u = q
        res_c = np.abs(ddw + 3 * w * dw + w ** 3 - qv)

    h = grid[1] - grid[0]
    res_f = []
    for i in range(2, n_grid - 2):
        if not keep[i - 2:i + 3].all():
            continue
        wm2, wm1, w0, wp1, wp2 = w[i - 2:i + 3]
        d1 = (wm2 - 8 * wm1 + 8 * wp1 - wp2) / (12 * h)
        d2 = (-wm2 + 16 * wm1 - 30 * w0 + 16 * wp1 - wp2) / (12 * h * h)
        res_f.append(abs(d2 + 3 * w0 * d1 + w0 ** 3 - qv[i]))

    rc = float(np.max(res_c[keep])) if keep.any() else 0.0
    rf = float(max(res_f)) if res_f else 0.0
    return InceReport(grid, u, w, rc, rf, tuple(zeros))
