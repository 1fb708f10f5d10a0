"""First integrals, generators and time-dependent constants of motion.

Conventions:

* ``energy`` is the Lagrangian energy ``E_L = v dL/dv - L`` of ``L = 1/D``.
* For the oscillator, ``ixw`` is the energy of the rescaled Lagrangian
  ``(w/k)**2 L - 1/k**2``; its value is the ``E`` that parametrizes the
  trigonometric solution.
* ``kij_constant`` returns ``K1**n2 * conj(K2)**n1``. Its real part is the
  Fradkin-like integral I4. Its imaginary part is the angular-momentum-like
  I3 up to a constant factor: the rational expressions in
  ``printed_i3_i4_isotropic`` / ``printed_i3_i4_anisotropic`` equal
  ``Im / w0`` (1:1) and ``Im / (2 w0)`` (1:2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularDenominator
from .integrate import Trajectory
from .model import (
    DEFAULT_EPSILON,
    CubicRiccati,
    GeneralU,
    NonlinearOscillator,
    OneDim,
    Product2D,
    State,
    SystemSpec,
    axes_of,
    denominator,
)


def _nonsingular(D: float, eps: float, axis: int | None = None) -> float:
    if not abs(D) >= eps:  # also catches NaN
        raise SingularDenominator(axis=axis)
    return D


# --- energies ------------------------------------------------------------------


def axis_energy(spec: OneDim, x: float, v: float, eps: float = DEFAULT_EPSILON, axis: int | None = None) -> float:
    D = _nonsingular(denominator(spec, x, v), eps, axis)
    if isinstance(spec, NonlinearOscillator):
        return -(spec.k * v + D) / (D * D)
    return -(v + D) / (D * D)


def energy(spec: OneDim, state: State, eps: float = DEFAULT_EPSILON) -> float:
    """Lagrangian energy of a one-dimensional system.

    >>> energy(CubicRiccati(1.0), State.one(0.0, -2.0))
    1.0
    """
    if isinstance(spec, Product2D):
        raise TypeError("use energy_2d for Product2D systems")
    return axis_energy(spec, state.q[0], state.v[0], eps)


def energy_2d(spec: Product2D, state: State, eps: float = DEFAULT_EPSILON) -> tuple[float, float, float]:
    """(E_total, I1, I2) with I1, I2 the per-axis energies."""
    I1 = axis_energy(spec.first, state.q[0], state.v[0], eps, axis=0)
    I2 = axis_energy(spec.second, state.q[1], state.v[1], eps, axis=1)
    return I1 + I2, I1, I2


# --- generators of integrals (U = x**2 family) -------------------------------


def t_generators(k: float, x: float, v: float, eps: float = DEFAULT_EPSILON) -> tuple[float, float]:
    """(T1, T2) = (1, x) / (v + k x**2); dT2/dt = 1 and dT1/dt = k T2."""
    D = _nonsingular(v + k * x * x, eps)
    return 1.0 / D, x / D


def j_integrals(k: float, x: float, v: float, t: float, eps: float = DEFAULT_EPSILON) -> tuple[float, float]:
    """Time-dependent constants (T2 - t, T1 - k t T2 + k t**2 / 2)."""
    T1, T2 = t_generators(k, x, v, eps)
    return T2 - t, T1 - k * t * T2 + 0.5 * k * t * t


def i3_i4_dissipative(k1: float, k2: float, state: State, eps: float = DEFAULT_EPSILON) -> tuple[float, float]:
    (x, y), (vx, vy) = state.q, state.v
    try:
        Tx1, Tx2 = t_generators(k1, x, vx, eps)
    except SingularDenominator:
        raise SingularDenominator(axis=0) from None
    try:
        Ty1, Ty2 = t_generators(k2, y, vy, eps)
    except SingularDenominator:
        raise SingularDenominator(axis=1) from None
    return Tx2 - Ty2, k2 * Tx1 + k1 * Ty1 - k1 * k2 * Tx2 * Ty2


# --- oscillator integrals ------------------------------------------------------


def xw_pair(k: float, w: float, x: float, v: float, eps: float = DEFAULT_EPSILON) -> tuple[float, float]:
    """X = x/D, W = (v + k x**2)/D with D = k v + k**2 x**2 + w**2.

    dX/dt = W, dW/dt = -w**2 X, and w**2 X + k x W = x identically.
    """
    D = _nonsingular(k * v + k * k * x * x + w * w, eps)
    return x / D, (v + k * x * x) / D


def ixw(k: float, w: float, x: float, v: float, eps: float = DEFAULT_EPSILON) -> float:
    X, W = xw_pair(k, w, x, v, eps)
    return W * W + w * w * X * X


def rescaled_energy(k: float, w: float, x: float, v: float, eps: float = DEFAULT_EPSILON) -> float:
    """Energy of (w/k)**2 L - 1/k**2, computed from v dL/dv - L directly."""
    D = _nonsingular(k * v + k * k * x * x + w * w, eps)
    L = 1.0 / D
    dL_dv = -k / (D * D)
    c1, c0 = (w / k) ** 2, -1.0 / k ** 2
    return c1 * (v * dL_dv) - (c1 * L + c0)


def _oscillator_axes(spec: Product2D) -> tuple[NonlinearOscillator, NonlinearOscillator]:
    a, b = spec.axes
    if not (isinstance(a, NonlinearOscillator) and isinstance(b, NonlinearOscillator)):
        raise TypeError("K-functions need a Product2D of two oscillators")
    return a, b


def k_functions(spec: Product2D, state: State, n1: int, n2: int,
                eps: float = DEFAULT_EPSILON) -> tuple[complex, complex]:
    """K_j = W_j + i n_j w0 X_j, with w_j = n_j w0."""
    if n1 < 1 or n2 < 1 or int(n1) != n1 or int(n2) != n2:
        raise ValueError("resonance numbers must be positive integers")
    o1, o2 = _oscillator_axes(spec)
    w0 = o1.w / n1
    if not math.isclose(o2.w / n2, w0, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"frequencies {o1.w}, {o2.w} are not in ratio {n1}:{n2}")
    out = []
    for j, (osc, n) in enumerate(((o1, n1), (o2, n2))):
        try:
            X, W = xw_pair(osc.k, osc.w, state.q[j], state.v[j], eps)
        except SingularDenominator:
            raise SingularDenominator(axis=j) from None
        out.append(complex(W, n * w0 * X))
    return out[0], out[1]


def _ipow(z: complex, n: int) -> complex:
    out = complex(1.0, 0.0)
    for _ in range(n):
        out = out * z
    return out


def kij_constant(K1: complex, K2: complex, n1: int, n2: int) -> complex:
    """K1**n2 * conj(K2)**n1 by repeated multiplication."""
    return _ipow(K1, n2) * _ipow(K2.conjugate(), n1)


def printed_i3_i4_isotropic(k1: float, k2: float, w0: float, state: State) -> tuple[float, float]:
    """Closed rational forms of the 1:1 integrals (angular momentum, Fradkin)."""
    (x, y), (vx, vy) = state.q, state.v
    D1 = k1 * vx + k1 * k1 * x * x + w0 * w0
    D2 = k2 * vy + k2 * k2 * y * y + w0 * w0
    den = D1 * D2
    i3 = ((x * vy - y * vx) + (k2 * y - k1 * x) * x * y) / den
    i4 = ((vx + k1 * x * x) * (vy + k2 * y * y) + w0 * w0 * x * y) / den
    return i3, i4


def printed_i3_i4_anisotropic(k1: float, k2: float, w0: float, state: State) -> tuple[float, float]:
    """Closed rational forms of the 1:2 integrals (w1 = w0, w2 = 2 w0)."""
    (x, y), (vx, vy) = state.q, state.v
    D1 = k1 * vx + k1 * k1 * x * x + w0 * w0
    D2 = k2 * vy + k2 * k2 * y * y + 4 * w0 * w0
    den = D1 * D1 * D2
    Mx, My = vx + k1 * x * x, vy + k2 * y * y
    i3 = (Mx * ((x * vy - y * vx) + (k2 * y - k1 * x) * x * y) + w0 * w0 * x * x * y) / den
    i4 = (Mx * Mx * My + w0 * w0 * (4 * y * vx - x * vy + (4 * k1 * x - k2 * y) * x * y) * x) / den
    return i3, i4


# --- limits --------------------------------------------------------------------


@dataclass(frozen=True)
class LimitReport:
    name: str
    parameter: float
    full: float
    limit: float
    relative_deviation: float


def _rel(a: float, b: float) -> float:
    scale = max(abs(b), 1e-300)
    return abs(a - b) / scale


def limit_k_to_zero(k: float, w0: float, state: State) -> tuple[LimitReport, LimitReport]:
    """Compare the isotropic I3/I4 at k1 = k2 = k with their k -> 0 forms."""
    if not 0 < k <= 1e-3:
        raise ValueError("limit parameter must lie in (0, 1e-3]")
    (x, y), (vx, vy) = state.q, state.v
    i3, i4 = printed_i3_i4_isotropic(k, k, w0, state)
    l3 = (x * vy - y * vx) / w0 ** 4
    l4 = (vx * vy + w0 * w0 * x * y) / w0 ** 4
    return (LimitReport("I3 (k->0)", k, i3, l3, _rel(i3, l3)),
            LimitReport("I4 (k->0)", k, i4, l4, _rel(i4, l4)))


def limit_w_to_zero(w0: float, k1: float, k2: float, state: State) -> tuple[LimitReport, LimitReport]:
    """Compare the isotropic I3/I4 at small w0 with their w0 -> 0 forms."""
    if not 0 < w0 <= 1e-3:
        raise ValueError("limit parameter must lie in (0, 1e-3]")
    (x, y), (vx, vy) = state.q, state.v
    i3, i4 = printed_i3_i4_isotropic(k1, k2, w0, state)
    Mx, My = vx + k1 * x * x, vy + k2 * y * y
    l3 = ((x * vy - y * vx) + (k2 * y - k1 * x) * x * y) / (k1 * k2 * Mx * My)
    l4 = 1.0 / (k1 * k2)
    return (LimitReport("I3 (w->0)", w0, i3, l3, _rel(i3, l3)),
            LimitReport("I4 (w->0)", w0, i4, l4, _rel(i4, l4)))


def limit_checks(which: str, param: float, state: State, k1: float = 1.0, k2: float = 1.0,
                 w0: float = 1.0) -> tuple[LimitReport, LimitReport]:
    """``which`` is "k" (k1 = k2 = param) or "w" (w0 = param)."""
    if which == "k":
        return limit_k_to_zero(param, w0, state)
    if which == "w":
        return limit_w_to_zero(param, k1, k2, state)
    raise ValueError(f"unknown limit {which!r}")


# --- drift reports -------------------------------------------------------------


class Integral(enum.Enum):
    ENERGY_EL = "EnergyEL"
    ENERGY_I1 = "EnergyI1"
    ENERGY_I2 = "EnergyI2"
    TX1 = "Tx1"
    TX2 = "Tx2"
    TY1 = "Ty1"
    TY2 = "Ty2"
    JX1T = "Jx1t"
    JX2T = "Jx2t"
    JY1T = "Jy1t"
    JY2T = "Jy2t"
    I3_DISSIPATIVE = "I3Dissipative"
    I4_DISSIPATIVE = "I4Dissipative"
    IXW = "Ixw"
    X = "X"
    W = "W"
    K1 = "K1"
    K2 = "K2"
    KIJ = "Kij"
    I3_OSC = "I3Osc"
    I4_OSC = "I4Osc"


_RESONANT = {Integral.K1, Integral.K2, Integral.KIJ, Integral.I3_OSC, Integral.I4_OSC}


@dataclass(frozen=True)
class IntegralId:
    kind: Integral
    n1: int | None = None
    n2: int | None = None

    def __post_init__(self):
        if self.kind in _RESONANT:
            if self.n1 is None or self.n2 is None or self.n1 < 1 or self.n2 < 1:
                raise ValueError(f"{self.kind.value} needs positive resonance numbers n1, n2")

    @classmethod
    def parse(cls, text: str) -> "IntegralId":
        """'EnergyEL', 'Kij(1,2)', 'I3Osc(2,3)' ..."""
        text = text.strip()
        if "(" in text:
            name, args = text[:-1].split("(", 1)
            n1, n2 = (int(a) for a in args.split(","))
            return cls(Integral(name), n1, n2)
        return cls(Integral(text))

    def __str__(self) -> str:
        if self.n1 is None:
            return self.kind.value
        return f"{self.kind.value}({self.n1},{self.n2})"


def _k_only(spec: OneDim) -> float:
    if isinstance(spec, CubicRiccati):
        return spec.k
    if isinstance(spec, GeneralU) and (spec.U.c0, spec.U.c1, spec.U.c2) == (0.0, 0.0, 1.0):
        return spec.k
    raise TypeError("T/J generators are defined for the cubic (U = x**2) system")


def _osc(spec: OneDim) -> NonlinearOscillator:
    if not isinstance(spec, NonlinearOscillator):
        raise TypeError("X, W and I_XW are defined for the nonlinear oscillator")
    return spec


def evaluate_integral(integral: IntegralId, spec: SystemSpec, state: State,
                      eps: float = DEFAULT_EPSILON) -> float | complex:
    """Value of one tagged quantity at a phase point."""
    kind = integral.kind
    axes = axes_of(spec)
    t = state.t

    def axis(i: int) -> tuple[OneDim, float, float]:
        if i >= len(axes):
            raise TypeError(f"{kind.value} needs a two-dimensional system")
        return axes[i], state.q[i], state.v[i]

    if kind is Integral.ENERGY_EL:
        if isinstance(spec, Product2D):
            return energy_2d(spec, state, eps)[0]
        return energy(spec, state, eps)
    if kind in (Integral.ENERGY_I1, Integral.ENERGY_I2):
        i = 0 if kind is Integral.ENERGY_I1 else 1
        ax, x, v = axis(i)
        return axis_energy(ax, x, v, eps, axis=i)
    if kind in (Integral.TX1, Integral.TX2, Integral.TY1, Integral.TY2,
                Integral.JX1T, Integral.JX2T, Integral.JY1T, Integral.JY2T):
        i = 0 if kind.value[1] == "x" else 1
        ax, x, v = axis(i)
        k = _k_only(ax)
        if kind.value[0] == "T":
            return t_generators(k, x, v, eps)[int(kind.value[2]) - 1]
        return j_integrals(k, x, v, t, eps)[int(kind.value[2]) - 1]
    if kind in (Integral.I3_DISSIPATIVE, Integral.I4_DISSIPATIVE):
        if not isinstance(spec, Product2D):
            raise TypeError(f"{kind.value} needs a two-dimensional system")
        i3, i4 = i3_i4_dissipative(_k_only(spec.first), _k_only(spec.second), state, eps)
        return i3 if kind is Integral.I3_DISSIPATIVE else i4
    if kind in (Integral.IXW, Integral.X, Integral.W):
        osc = _osc(axes[0])
        x, v = state.q[0], state.v[0]
        if kind is Integral.IXW:
            return ixw(osc.k, osc.w, x, v, eps)
        X, W = xw_pair(osc.k, osc.w, x, v, eps)
        return X if kind is Integral.X else W
    if kind in _RESONANT:
        if not isinstance(spec, Product2D):
            raise TypeError(f"{kind.value} needs a two-dimensional system")
        K1, K2 = k_functions(spec, state, integral.n1, integral.n2, eps)
        if kind is Integral.K1:
            return K1
        if kind is Integral.K2:
            return K2
        Kij = kij_constant(K1, K2, integral.n1, integral.n2)
        if kind is Integral.I3_OSC:
            return Kij.imag
        if kind is Integral.I4_OSC:
            return Kij.real
        return Kij
    raise ValueError(f"unhandled integral {integral}")


@dataclass(frozen=True)
class ConservedReport:
    integral: IntegralId
    samples: tuple[tuple[float, float | complex | None], ...]
    drift: float
    tolerance: float
    passed: bool
    singular_times: tuple[float, ...] = ()

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples if v is not None])

    def as_dict(self) -> dict:
        return {"name": str(self.integral), "value": self.drift,
                "tolerance": self.tolerance, "pass": self.passed}


def drift_report(integral: IntegralId, trajectory: Trajectory, tolerance: float,
                 spec: SystemSpec | None = None, eps: float = DEFAULT_EPSILON) -> ConservedReport:
    """Evaluate an integral at every node; drift is max |value - value at node 0|.

    Nodes where the integral is undefined are kept as ``None`` samples and
    make the report fail.
    """
    spec = spec if spec is not None else trajectory.spec
    if spec is None:
        raise ValueError("trajectory carries no system; pass spec explicitly")
    if len(trajectory) == 0:
        raise ValueError("empty trajectory")
    samples, gaps = [], []
    for i in range(len(trajectory)):
        st = trajectory.state(i)
        try:
            val = evaluate_integral(integral, spec, st, eps)
        except SingularDenominator:
            val = None
            gaps.append(st.t)
        samples.append((st.t, val))
    finite = [v for _, v in samples if v is not None]
    if finite:
        ref = finite[0] if samples[0][1] is None else samples[0][1]
        drift = max(abs(v - ref) for v in finite)
    else:
        drift = math.inf
    passed = (not gaps) and drift <= tolerance
    return ConservedReport(integral, tuple(samples), float(drift), tolerance, passed, tuple(gaps))
