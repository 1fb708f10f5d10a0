"""Verification suites: lists of named numeric checks against tolerances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analytic import ince_linearization_oracle, oscillator_solution
from .conserved import (
    Integral,
    IntegralId,
    drift_report,
    energy,
    ixw,
    k_functions,
    kij_constant,
    limit_checks,
    printed_i3_i4_anisotropic,
    printed_i3_i4_isotropic,
    t_generators,
)
from .hamiltonian import (
    canonical_qp,
    hamilton_tracking_error,
    hamiltonian_of_state,
    hamiltonian_osc,
    momentum,
    poisson_bracket_check,
)
from .integrate import IntegratorConfig, Status, Trajectory, integrate, integrate_window
from .model import (
    CubicRiccati,
    GeneralU,
    NonlinearOscillator,
    Product2D,
    QuadraticU,
    State,
    SystemSpec,
    alternative_lagrangian,
    axis_force,
    euler_lagrange_residual,
)

SUITES = ("energy", "generators", "superint-dissipative", "superint-oscillator",
          "hamiltonian", "linearization", "alt-lagrangian")

# The figure-eight tails have D ~ 1e-3; the absolute tolerance dominates there.
FIGURE_EIGHT_CONFIG = IntegratorConfig(rtol=1e-12, atol=1e-16)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance, "pass": self.passed}


def check(name: str, value: float, tolerance: float) -> Check:
    value = float(value)
    return Check(name, value, tolerance, math.isfinite(value) and value <= tolerance)


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    checks: tuple[Check, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "checks": [c.as_dict() for c in self.checks]}


# --- energy ----------------------------------------------------------------


def _osc_state(k: float, w: float, E: float, phi: float = 0.0) -> State:
    return State.one(*oscillator_solution(k, w, E, phi, 0.0))


def energy_cases() -> list[tuple[str, SystemSpec, State, float]]:
    """Twenty Completed-by-construction runs across the four system kinds."""
    cases = []
    for k, E in [(1.0, -1.0), (1.0, -0.5), (1.0, -2.0), (2.0, -3.0), (-1.0, 1.0)]:
        cases.append((f"cubic k={k:g} E={E:g}", CubicRiccati(k), State.one(0.0, -2.0 / E), 10.0))
    for k, w, E in [(1.0, 1.0, 0.2), (1.0, 1.0, 0.5), (1.0, 1.0, 0.8), (0.5, 2.0, 1.0), (2.0, 1.0, 0.1)]:
        cases.append((f"oscillator k={k:g} w={w:g} E={E:g}", NonlinearOscillator(k, w),
                      _osc_state(k, w, E), 4 * math.pi / w))
    for c in [(0.5, 0.2, 1.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.5), (0.0, 0.0, 1.0), (0.2, -0.3, 2.0)]:
        cases.append((f"general-u U={c}", GeneralU(QuadraticU(*c), 1.0), State.one(0.2, 1.0), 5.0))
    cubic = Product2D(CubicRiccati(1.0), CubicRiccati(1.0))
    cases.append(("2d-cubic E=(-1,-5)", cubic, State.two(0.0, 2.0, 0.0, 0.4), 10.0))
    cases.append(("2d-cubic E=(-2,-2)", cubic, State.two(0.0, 1.0, 0.0, 1.0), 10.0))
    for n1, n2, E1, E2 in [(1, 1, 0.2, 0.5), (1, 2, 0.3, 0.4), (2, 3, 0.2, 0.2)]:
        spec = Product2D(NonlinearOscillator(1.0, n1), NonlinearOscillator(1.0, n2))
        st = State.two(*oscillator_solution(1.0, n1, E1, 0.0, 0.0), *oscillator_solution(1.0, n2, E2, 0.5, 0.0))
        cases.append((f"2d-oscillator n=({n1},{n2})", spec, st, 2 * math.pi))
    return cases


def energy_suite(config: IntegratorConfig = IntegratorConfig(), tolerance: float = 1e-8) -> SuiteResult:
    checks = []
    for label, spec, st, t_end in energy_cases():
        tr = integrate(spec, st, t_end, config)
        rep = drift_report(IntegralId(Integral.ENERGY_EL), tr, tolerance)
        checks.append(check(f"{label}: E_L drift", rep.drift, tolerance))
        checks.append(check(f"{label}: completed", 0.0 if tr.status is Status.COMPLETED else 1.0, 0.0))
    return SuiteResult("energy", tuple(checks))


# --- generators --------------------------------------------------------------


def _fd_rate(traj: Trajectory, f: Callable[[State], float], t: float, h: float) -> float:
    g = lambda s: f(traj.dense_eval(s))  # noqa: E731
    return (g(t - 2 * h) - 8 * g(t - h) + 8 * g(t + h) - g(t + 2 * h)) / (12 * h)


def generators_suite(config: IntegratorConfig = IntegratorConfig(), fd_tol: float = 1e-6,
                     drift_tol: float = 1e-7) -> SuiteResult:
    checks = []
    for k, E in [(1.0, -1.0), (1.0, -2.0), (2.0, -3.0)]:
        spec = CubicRiccati(k)
        tr = integrate(spec, State.one(0.0, -2.0 / E), 10.0, config)
        label = f"cubic k={k:g} E={E:g}"
        ts = np.linspace(0.5, 9.5, 37)
        h = 1e-3
        d2 = max(abs(_fd_rate(tr, lambda s: t_generators(k, s.q[0], s.v[0])[1], t, h) - 1.0) for t in ts)
        d1 = max(
            abs(_fd_rate(tr, lambda s: t_generators(k, s.q[0], s.v[0])[0], t, h)
                - k * t_generators(k, *tr.dense_array(t))[1])
            for t in ts
        )
        checks.append(check(f"{label}: |dTx2/dt - 1|", d2, fd_tol))
        checks.append(check(f"{label}: |dTx1/dt - k Tx2|", d1, fd_tol))
        for kind in (Integral.JX1T, Integral.JX2T):
            rep = drift_report(IntegralId(kind), tr, drift_tol)
            checks.append(check(f"{label}: {kind.value} drift", rep.drift, drift_tol))
    return SuiteResult("generators", tuple(checks))


# --- dissipative superintegrability ---------------------------------------------


def figure_eight(k1: float = 1.0, k2: float = 1.0, E1: float = -1.0, E2: float = -5.0, T: float = 50.0,
                 config: IntegratorConfig = FIGURE_EIGHT_CONFIG) -> Trajectory:
    """Orbit through the origin at t = 0 with axis energies E1, E2, over [-T, T]."""
    spec = Product2D(CubicRiccati(k1), CubicRiccati(k2))
    st = State.two(0.0, -2.0 / E1, 0.0, -2.0 / E2)
    return integrate_window(spec, st, -T, T, config)


def superint_dissipative_suite(k1: float = 1.0, k2: float = 1.0, E1: float = -1.0, E2: float = -5.0,
                               T: float = 50.0, config: IntegratorConfig = FIGURE_EIGHT_CONFIG,
                               drift_tol: float = 1e-7, end_bound: float = 0.05) -> SuiteResult:
    tr = figure_eight(k1, k2, E1, E2, T, config)
    checks = [check("completed", 0.0 if tr.status is Status.COMPLETED else 1.0, 0.0)]
    for kind in (Integral.I3_DISSIPATIVE, Integral.I4_DISSIPATIVE, Integral.ENERGY_I1, Integral.ENERGY_I2):
        rep = drift_report(IntegralId(kind), tr, drift_tol)
        checks.append(check(f"{kind.value} drift", rep.drift, drift_tol))
    for label, i in (("start", 0), ("end", -1)):
        y = tr.y[i]
        checks.append(check(f"|x| at {label} (t={tr.t[i]:g})", abs(y[0]), end_bound))
        checks.append(check(f"|y| at {label} (t={tr.t[i]:g})", abs(y[2]), end_bound))
    return SuiteResult("superint-dissipative", tuple(checks))


# --- oscillator superintegrability -----------------------------------------------


def resonant_oscillator(n1: int, n2: int, k1: float = 1.0, k2: float = 1.0, w0: float = 1.0) -> Product2D:
    return Product2D(NonlinearOscillator(k1, n1 * w0), NonlinearOscillator(k2, n2 * w0))


def resonant_state(n1: int, n2: int, E1: float, E2: float, phi1: float = 0.0, phi2: float = 0.0,
                   k1: float = 1.0, k2: float = 1.0, w0: float = 1.0) -> State:
    a = oscillator_solution(k1, n1 * w0, E1, phi1, 0.0)
    b = oscillator_solution(k2, n2 * w0, E2, phi2, 0.0)
    return State.two(*a, *b)


def random_resonant_states(rng: np.random.Generator, n: int, n1: int, n2: int, k1: float, k2: float,
                           w0: float) -> list[State]:
    out = []
    for _ in range(n):
        E1 = rng.uniform(0.05, 0.9) / k1 ** 2
        E2 = rng.uniform(0.05, 0.9) / k2 ** 2
        out.append(resonant_state(n1, n2, E1, E2, rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi),
                                  k1, k2, w0))
    return out


def printed_formula_gap(n1: int, n2: int, k1: float, k2: float, w0: float, state: State) -> float:
    """max |printed - K_ij part| for the 1:1 and 1:2 rational forms."""
    spec = resonant_oscillator(n1, n2, k1, k2, w0)
    Kij = kij_constant(*k_functions(spec, state, n1, n2), n1, n2)
    if (n1, n2) == (1, 1):
        i3, i4 = printed_i3_i4_isotropic(k1, k2, w0, state)
        scale = w0
    elif (n1, n2) == (1, 2):
        i3, i4 = printed_i3_i4_anisotropic(k1, k2, w0, state)
        scale = 2 * w0
    else:
        raise ValueError("printed forms exist for 1:1 and 1:2 only")
    return max(abs(Kij.imag - scale * i3), abs(Kij.real - i4))


def superint_oscillator_suite(pairs=((1, 1), (1, 2), (2, 3)), k1: float = 1.0, k2: float = 1.0,
                              w0: float = 1.0, E1: float = 0.2, E2: float = 0.2, phi1: float = 0.0,
                              phi2: float = 0.7, seed: int = 0, config: IntegratorConfig = IntegratorConfig(),
                              drift_tol: float = 1e-7, formula_tol: float = 1e-12,
                              n_random: int = 100) -> SuiteResult:
    rng = np.random.default_rng(seed)
    checks = []
    for n1, n2 in pairs:
        spec = resonant_oscillator(n1, n2, k1, k2, w0)
        st = resonant_state(n1, n2, E1, E2, phi1, phi2, k1, k2, w0)
        tr = integrate(spec, st, 2 * math.pi / w0, config)
        checks.append(check(f"({n1},{n2}) completed", 0.0 if tr.status is Status.COMPLETED else 1.0, 0.0))
        for kind, label in ((Integral.I4_OSC, "Re Kij"), (Integral.I3_OSC, "Im Kij")):
            rep = drift_report(IntegralId(kind, n1, n2), tr, drift_tol)
            checks.append(check(f"({n1},{n2}) {label} drift", rep.drift, drift_tol))
        if (n1, n2) in ((1, 1), (1, 2)):
            states = random_resonant_states(rng, n_random, n1, n2, k1, k2, w0)
            gap = max(printed_formula_gap(n1, n2, k1, k2, w0, s) for s in states)
            checks.append(check(f"({n1},{n2}) printed I3/I4 vs Kij", gap, formula_tol))
    st = State.two(0.3, 0.7, -0.4, 0.2)
    for rep in limit_checks("k", 1e-6, st, w0=w0):
        checks.append(check(f"limit {rep.name}", rep.relative_deviation, 1e-3))
    for rep in limit_checks("w", 1e-6, st, k1=k1, k2=k2):
        if rep.name.startswith("I4"):
            checks.append(check(f"limit {rep.name}", rep.relative_deviation, 1e-3))
    return SuiteResult("superint-oscillator", tuple(checks))


# --- hamiltonian -------------------------------------------------------------------


def random_u_states(rng: np.random.Generator, n: int) -> list[tuple[GeneralU, State]]:
    """Random U-family systems and states with D in [0.5, 2]."""
    out = []
    for _ in range(n):
        U = QuadraticU(*rng.uniform(-1, 1, 3))
        k = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        x = rng.uniform(-1.0, 1.0)
        D = rng.uniform(0.5, 2.0)
        out.append((GeneralU(U, k), State.one(x, D - k * U(x))))
    return out


def random_oscillator_states(rng: np.random.Generator, n: int) -> list[tuple[NonlinearOscillator, State]]:
    out = []
    for _ in range(n):
        k, w = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
        E = rng.uniform(0.05, 0.9) / k ** 2
        out.append((NonlinearOscillator(k, w), _osc_state(k, w, E, rng.uniform(0, 2 * math.pi))))
    return out


def hamiltonian_suite(seed: int = 0, n: int = 200, identity_tol: float = 1e-12,
                      bracket_tol: float = 1e-6, flow_tol: float = 1e-6) -> SuiteResult:
    rng = np.random.default_rng(seed)
    u_gap = max(abs(hamiltonian_of_state(s, st) - energy(s, st)) for s, st in random_u_states(rng, n))
    osc = random_oscillator_states(rng, n)
    o_gap = max(abs(hamiltonian_of_state(s, st) - ixw(s.k, s.w, st.q[0], st.v[0])) for s, st in osc)
    qp_gap = 0.0
    for s, st in osc:
        p = momentum(s, st)
        Q, P = canonical_qp(s.k, s.w, st.q[0], p)
        qp_gap = max(qp_gap, abs(0.5 * (P * P + s.w ** 2 * Q * Q) - hamiltonian_osc(s.k, s.w, st.q[0], p)))
    br = max(abs(poisson_bracket_check(s.k, s.w, st.q[0], momentum(s, st)) - 1.0) for s, st in osc[:100])
    flow = 0.0
    for k, w, E, phi in [(1.0, 1.0, 0.25, 0.3), (0.5, 2.0, 1.0, 1.0), (2.0, 1.0, 0.1, 2.0)]:
        spec = NonlinearOscillator(k, w)
        flow = max(flow, hamilton_tracking_error(spec, _osc_state(k, w, E, phi), 2 * math.pi / w))
    return SuiteResult("hamiltonian", (
        check("|H_U o Legendre - E_L|", u_gap, identity_tol),
        check("|H_osc o Legendre - I_XW|", o_gap, identity_tol),
        check("|(P^2 + w^2 Q^2)/2 - H_osc|", qp_gap, identity_tol),
        check("|{Q,P} - 1|", br, bracket_tol),
        check("Hamilton flow vs Lagrangian x(t)", flow, flow_tol),
    ))


# --- linearization ---------------------------------------------------------------


INCE_CASES = (
    ("q=0", lambda t: 0.0, (1.0, 0.0, 0.0), (0.0, 2.0), 1e-9),
    ("q=1", lambda t: 1.0, (1.0, 1.0, 1.0), (0.0, 2.0), 1e-9),
    ("q=cos t", math.cos, (1.0, 0.0, 0.0), (0.0, 2.0), 1e-6),
)


def linearization_suite() -> SuiteResult:
    checks = []
    for label, q, u0, span, tol in INCE_CASES:
        rep = ince_linearization_oracle(q, u0, span)
        checks.append(check(f"{label}: cascade residual", rep.residual_cascade, tol))
        checks.append(check(f"{label}: finite-difference residual", rep.residual_fd, 1e-6))
    return SuiteResult("linearization", tuple(checks))


# --- alternative Lagrangian --------------------------------------------------------


def alt_lagrangian_suite(config: IntegratorConfig = IntegratorConfig(), tolerance: float = 1e-6) -> SuiteResult:
    checks = []
    for k, E in [(1.0, -1.0), (2.0, -3.0), (1.0, -2.0)]:
        spec = CubicRiccati(k)
        tr = integrate(spec, State.one(0.0, -2.0 / E), 2.0, config)
        L2 = alternative_lagrangian(spec)
        res = max(
            abs(euler_lagrange_residual(L2, st, axis_force(spec, st.q[0], st.v[0])))
            for st in (tr.dense_eval(t) for t in np.linspace(0.0, 2.0, 41))
        )
        checks.append(check(f"cubic k={k:g} E={E:g}: Euler-Lagrange residual of sqrt(2v + kU)", res, tolerance))
    return SuiteResult("alt-lagrangian", tuple(checks))


def run_suite(name: str, **kw) -> SuiteResult:
    table = {
        "energy": energy_suite,
        "generators": generators_suite,
        "superint-dissipative": superint_dissipative_suite,
        "superint-oscillator": superint_oscillator_suite,
        "hamiltonian": hamiltonian_suite,
        "linearization": linearization_suite,
        "alt-lagrangian": alt_lagrangian_suite,
    }
    if name not in table:
        raise KeyError(name)
    return table[name](**kw)


__all__ = [
    "Check", "SuiteResult", "SUITES", "FIGURE_EIGHT_CONFIG", "energy_cases", "figure_eight", "run_suite",
]
