"""Adaptive Dormand-Prince 5(4) integration with dense output.

``solve`` is the generic driver (any first-order system ``f(t, y)``);
``integrate`` wraps it for a ``SystemSpec`` and adds the singularity
monitor on the Lagrangian denominators.

Near a singular time of the closed-form solutions the position blows up
like ``c/(t* - t)`` while the reciprocal denominator ``1/D`` crosses zero
smoothly. The march therefore reports ``SINGULAR`` when the blow-up bound
is hit and a Newton step on ``1/D`` places its zero just ahead; an exactly
vanishing ``D`` is bracketed by step bisection.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonFiniteStage, OutOfRange
from .model import (
    State,
    SystemSpec,
    arity,
    axes_of,
    axis_force,
    denominator,
    denominator_rate,
    make_rhs,
)

# Dormand & Prince (1980) 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4
# Shampine's quartic continuous extension of the pair: y(t + th h) = y + h K^T P [th, th^2, th^3, th^4]
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_ALPHA = 0.17  # PI controller exponents for a 5th-order pair
_BETA = 0.04
_MIN_FACTOR, _MAX_FACTOR = 0.2, 10.0
_EVENT_BRACKET = 1e-10


class Status(enum.Enum):
    COMPLETED = "Completed"
    SINGULAR = "Singular"
    BLOWUP = "BlowUp"
    MAX_STEPS = "MaxSteps"


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    h_init: float | None = None
    h_max: float | None = None
    max_steps: int = 200_000
    blowup_bound: float = 1e8
    denom_epsilon: float = 1e-12

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.h_max is not None and self.h_max <= 0:
            raise ValueError("h_max must be positive")
        if self.h_init is not None and self.h_init <= 0:
            raise ValueError("h_init must be positive")


@dataclass(frozen=True)
class StepResult:
    y: np.ndarray
    error: np.ndarray  # y5 - y4, componentwise
    error_norm: float
    f_new: np.ndarray  # f(t + h, y) (FSAL stage)
    stages: np.ndarray  # (7, n) stage derivatives, feeds the dense output


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def dopri_step(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    y: np.ndarray,
    f0: np.ndarray,
    h: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> StepResult:
    """One Dormand-Prince step of signed size h from (t, y) with f0 = f(t, y)."""
    K = np.empty((7, y.size))
    K[0] = f0
    for s in range(1, 7):
        ys = y + h * np.dot(_A[s], K[:s])
        ks = fun(t + _C[s] * h, ys)
        if not np.all(np.isfinite(ks)):
            raise NonFiniteStage(f"stage {s} non-finite at t={t + _C[s] * h!r}")
        K[s] = ks
    y_new = y + h * np.dot(_A[6], K[:6])
    err = h * np.dot(_E, K)
    return StepResult(y_new, err, _error_norm(err, y, y_new, rtol, atol), K[6], K)


def step_embedded(spec: SystemSpec, state: State, h: float, rtol: float = 1e-10, atol: float = 1e-12):
    """One 5(4) step for a system; returns (State at t + h, StepResult)."""
    if h <= 0:
        raise ValueError("step size must be positive")
    fun = make_rhs(spec)
    y = state.to_array()
    res = dopri_step(fun, state.t, y, fun(state.t, y), h, rtol, atol)
    return State.from_array(state.t + h, res.y), res


@dataclass(frozen=True)
class Trajectory:
    """Nodes of an integration in march order, with dense output.

    ``t`` is strictly monotone: increasing for forward runs and for what
    ``integrate`` returns, decreasing for a raw reverse march; ``f[i]`` is the right-hand side at node i as
    evaluated during the march. ``stages[j]`` holds the seven stage
    derivatives of the step between nodes j and j+1 together with the node
    the step started from (``origin[j]`` is 0 for a march-order interval,
    1 once the trajectory has been reversed). Without stages the dense
    output falls back to cubic Hermite on (y, f).
    """

    t: np.ndarray
    y: np.ndarray
    f: np.ndarray
    status: Status
    t_event: float | None = None
    spec: SystemSpec | None = None
    stages: np.ndarray | None = None
    origin: np.ndarray | None = None

    def __len__(self) -> int:
        return self.t.size

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def span(self) -> tuple[float, float]:
        return (float(self.t.min()), float(self.t.max()))

    def state(self, i: int) -> State:
        return State.from_array(self.t[i], self.y[i])

    def states(self) -> list[State]:
        return [self.state(i) for i in range(len(self))]

    def dense_eval(self, t: float) -> State:
        return State.from_array(t, self.dense_array(t))

    def dense_array(self, t: float) -> np.ndarray:
        lo, hi = self.span
        if not (lo <= t <= hi):
            raise OutOfRange(f"t={t!r} outside [{lo!r}, {hi!r}]")
        n = self.t.size
        increasing = n < 2 or self.t[-1] > self.t[0]
        ts = self.t if increasing else self.t[::-1]
        j = int(np.searchsorted(ts, t))
        if j < n and ts[j] == t:
            return self.y[j if increasing else n - 1 - j].copy()
        a = j - 1 if increasing else n - 1 - j  # interval a spans nodes a, a+1
        if self.stages is None:
            b = a + 1
            return hermite(self.t[a], self.y[a], self.f[a], self.t[b], self.y[b], self.f[b], t)
        start = a + int(self.origin[a])
        t_s, y_s = self.t[start], self.y[start]
        h = self.t[a + 1 - int(self.origin[a])] - t_s
        return quartic(t_s, y_s, h, self.stages[a], t)

    def sample(self, ts: Sequence[float]) -> np.ndarray:
        return np.array([self.dense_array(float(s)) for s in ts])

    def reversed(self) -> "Trajectory":
        stages = origin = None
        if self.stages is not None:
            stages = self.stages[::-1].copy()
            origin = 1 - self.origin[::-1]
        return Trajectory(self.t[::-1].copy(), self.y[::-1].copy(), self.f[::-1].copy(),
                          self.status, self.t_event, self.spec, stages, origin)

    @staticmethod
    def join(backward: "Trajectory", forward: "Trajectory") -> "Trajectory":
        """Glue a reverse-time run and a forward run that share their initial node.

        Both runs may be given in march order or time-sorted. The result is
        time-increasing; a non-Completed status of the forward run takes
        precedence over that of the backward run.
        """
        b = backward if backward.t[-1] >= backward.t[0] else backward.reversed()
        if b.t[-1] != forward.t[0] or not np.array_equal(b.y[-1], forward.y[0]):
            raise ValueError("runs must start from the same node")
        status = forward.status if forward.status is not Status.COMPLETED else backward.status
        t_event = forward.t_event if forward.status is not Status.COMPLETED else backward.t_event
        stages = origin = None
        if b.stages is not None and forward.stages is not None:
            stages = np.concatenate([b.stages, forward.stages])
            origin = np.concatenate([b.origin, forward.origin])
        return Trajectory(
            np.concatenate([b.t[:-1], forward.t]),
            np.vstack([b.y[:-1], forward.y]),
            np.vstack([b.f[:-1], forward.f]),
            status,
            t_event,
            forward.spec,
            stages,
            origin,
        )


def quartic(t0: float, y0: np.ndarray, h: float, K: np.ndarray, t: float) -> np.ndarray:
    th = (t - t0) / h
    powers = np.array([th, th * th, th ** 3, th ** 4])
    return y0 + h * (K.T @ (_P @ powers))


def hermite(t0: float, y0, f0, t1: float, y1, f1, t: float) -> np.ndarray:
    h = t1 - t0
    s = (t - t0) / h
    s2, s3 = s * s, s * s * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


# Monitor hooks receive (t, y, f) at a node.
#   check(t, y, f) -> "ok" | "near" | "singular"
#   classify(t, y, f) -> (Status, t_event)   (called on blow-up / step collapse)


def solve(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0,
    t_end: float,
    config: IntegratorConfig = IntegratorConfig(),
    check: Callable | None = None,
    classify: Callable | None = None,
    spec: SystemSpec | None = None,
) -> Trajectory:
    """Adaptive march from t0 to t_end (either direction). Never raises on blow-up."""
    y = np.asarray(y0, dtype=float).copy()
    if not np.all(np.isfinite(y)):
        raise ValueError("initial state must be finite")
    if t_end == t0:
        raise ValueError("t_end must differ from t0")
    direction = 1.0 if t_end > t0 else -1.0
    span = abs(t_end - t0)
    h_max = config.h_max if config.h_max is not None else span
    h = min(config.h_init if config.h_init is not None else 1e-4 * span, h_max)

    t = float(t0)
    f = np.asarray(fun(t, y), dtype=float)
    ts, ys, fs, ks = [t], [y], [f], []
    err_old = 1e-4
    rejected = False
    status, t_event = Status.MAX_STEPS, None

    def finish(st, te=None):
        stages = np.array(ks) if ks else np.empty((0, 7, y.size))
        return Trajectory(np.array(ts), np.array(ys), np.array(fs), st, te, spec,
                          stages, np.zeros(len(ks), dtype=int))

    if check is not None and check(t, y, f) == "singular":
        return finish(Status.SINGULAR, t)

    for _ in range(config.max_steps):
        remaining = abs(t_end - t)
        if remaining <= 1e-15 * max(1.0, abs(t_end)):
            return finish(Status.COMPLETED)
        h_min = 16 * np.finfo(float).eps * max(1.0, abs(t))
        last = h >= remaining
        h_try = remaining if last else h
        if h_try < h_min:
            st, te = classify(t, y, f) if classify else (Status.BLOWUP, t)
            return finish(st, te)
        try:
            res = dopri_step(fun, t, y, f, direction * h_try, config.rtol, config.atol)
            ok = np.all(np.isfinite(res.y))
        except NonFiniteStage:
            res, ok = None, False
        if not ok:
            h = 0.25 * h_try
            rejected = True
            continue
        err = res.error_norm
        if err > 1.0:
            h = h_try * max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            rejected = True
            continue

        t_new = t_end if last else t + direction * h_try
        if check is not None:
            verdict = check(t_new, res.y, res.f_new)
            if verdict in ("near", "singular"):
                if h_try <= _EVENT_BRACKET:
                    ts.append(t_new), ys.append(res.y), fs.append(res.f_new), ks.append(res.stages)
                    return finish(Status.SINGULAR, t_new)
                h = 0.5 * h_try
                rejected = True
                continue

        t, y, f = t_new, res.y, res.f_new
        ts.append(t), ys.append(y), fs.append(f), ks.append(res.stages)
        if np.max(np.abs(y)) > config.blowup_bound:
            st, te = classify(t, y, f) if classify else (Status.BLOWUP, t)
            return finish(st, te)
        if last:
            return finish(Status.COMPLETED)

        err = max(err, 1e-10)
        factor = _SAFETY * err ** -_ALPHA * err_old ** _BETA
        factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        if rejected:
            factor = min(1.0, factor)
        h = min(h_try * factor, h_max)
        err_old = err
        rejected = False

    return finish(status, t_event)


def _axis_monitor(spec: SystemSpec, eps: float):
    axes = axes_of(spec)
    near = 1e3 * eps

    def check(t, y, f):
        signs = []
        verdict = "ok"
        for i, ax in enumerate(axes):
            D = denominator(ax, y[2 * i], y[2 * i + 1])
            signs.append(D)
            if abs(D) < eps:
                return "singular"
            if abs(D) < near:
                verdict = "near"
        if check.prev is not None and any(
            d * p < 0 and abs(p) < 1.0 / eps and abs(d) < 1.0 / eps for d, p in zip(signs, check.prev)
        ):
            # sign change of a finite D between nodes: bracket the zero
            verdict = "near"
        if verdict == "ok":
            check.prev = signs
        return verdict

    check.prev = None

    def classify(t, y, f):
        for i, ax in enumerate(axes):
            x, v = y[2 * i], y[2 * i + 1]
            a = axis_force(ax, x, v)
            D = denominator(ax, x, v)
            if D == 0 or not math.isfinite(D):
                continue
            dD = denominator_rate(ax, x, v, a)
            g, dg = 1.0 / D, -dD / (D * D)
            if dg == 0 or not math.isfinite(dg):
                continue
            delta = -g / dg
            if abs(delta) <= 1e-3 * max(1.0, abs(t)):
                return Status.SINGULAR, t + delta
        return Status.BLOWUP, t

    return check, classify


def integrate(
    spec: SystemSpec,
    state0: State,
    t_end: float,
    config: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """Integrate a system from state0 to t_end; termination is reported via status."""
    if arity(spec) != state0.dim:
        raise ValueError("state arity does not match the system")
    check, classify = _axis_monitor(spec, config.denom_epsilon)
    traj = solve(make_rhs(spec), state0.t, state0.to_array(), t_end, config,
                 check=check, classify=classify, spec=spec)
    # reverse-time runs are handed back time-sorted, like forward ones
    return traj if t_end > state0.t else traj.reversed()


def integrate_window(
    spec: SystemSpec,
    state0: State,
    t_lo: float,
    t_hi: float,
    config: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """Integrate backward to t_lo and forward to t_hi from state0 and join the runs."""
    if not (t_lo < state0.t < t_hi):
        raise ValueError("need t_lo < state0.t < t_hi")
    back = integrate(spec, state0, t_lo, config)
    fwd = integrate(spec, state0, t_hi, config)
    return Trajectory.join(back, fwd)


def dense_eval(trajectory: Trajectory, t: float) -> State:
    return trajectory.dense_eval(t)
