"""Fixed-step time integrators and the trajectory driver.

The generic steppers (``step_midpoint``, ``step_rk4``, ``step_rkf45``,
``ab4_run``) accept any right-hand side ``f(y)`` built from array arithmetic,
including scalars. When ``f`` is a numba-compiled function the same source is
run compiled; the lattice drivers always take that path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np
from numba import njit
from numba.core.registry import CPUDispatcher

from todalab import _kernels
from todalab.lattice import (
    IndexWindow,
    LatticeStateAB,
    LatticeStatePQ,
    flaschka,
    inverse_flaschka,
)


class MethodKind(str, enum.Enum):
    midpoint = "midpoint"
    midpointqp = "midpointqp"
    sv2symp = "sv2symp"
    ab4 = "ab4"
    rk4 = "rk4"
    rk4qp = "rk4qp"
    rkf45 = "rkf45"

    @property
    def uses_pq(self) -> bool:
        """True when the method advances ``(p, q)`` rather than ``(a, b)``."""
        return self in (MethodKind.midpointqp, MethodKind.rk4qp, MethodKind.sv2symp)

    @property
    def order(self) -> int:
        return 2 if self in SECOND_ORDER else 4

    def __str__(self) -> str:
        return self.value


SECOND_ORDER = (MethodKind.midpoint, MethodKind.midpointqp, MethodKind.sv2symp)
FOURTH_ORDER = (MethodKind.rk4, MethodKind.rk4qp, MethodKind.rkf45, MethodKind.ab4)


class BlowUpError(ArithmeticError):
    """A non-finite value appeared during time stepping."""

    def __init__(self, step: int, time: float):
        super().__init__(f"non-finite state after step {step} (t = {time:g})")
        self.step = step
        self.time = time


@dataclass(frozen=True)
class RKF45Tableau:
    """Fehlberg's stage coefficients and fourth-order output weights."""

    b: tuple[tuple[Fraction, ...], ...]
    c: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if sum(self.c) != 1:
            raise ValueError("output weights must sum to 1")
        for i, row in enumerate(self.b):
            if len(row) != i + 1:
                raise ValueError("stage rows must be lower triangular")

    @property
    def b_matrix(self) -> np.ndarray:
        out = np.zeros((len(self.c), len(self.c)))
        for i, row in enumerate(self.b, start=1):
            out[i, : len(row)] = [float(v) for v in row]
        return out

    @property
    def c_vector(self) -> np.ndarray:
        return np.array([float(v) for v in self.c])


F = Fraction
FEHLBERG45 = RKF45Tableau(
    b=(
        (F(1, 4),),
        (F(3, 32), F(9, 32)),
        (F(1932, 2197), F(-7200, 2197), F(7296, 2197)),
        (F(439, 216), F(-8), F(3680, 513), F(-845, 4104)),
        (F(-8, 27), F(2), F(-3544, 2565), F(1859, 4104), F(-11, 40)),
    ),
    c=(F(25, 216), F(0), F(1408, 2565), F(2197, 4104), F(-1, 5), F(0)),
)
del F

_FEHLBERG_B = FEHLBERG45.b_matrix
_FEHLBERG_C = FEHLBERG45.c_vector


@dataclass(frozen=True)
class StepperConfig:
    method: MethodKind
    dt: float
    t_final: float
    ab4_startup: str = "rk4"

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", MethodKind(self.method))
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_final >= 0:
            raise ValueError(f"t_final must be non-negative, got {self.t_final}")
        step_count(self.t_final, self.dt)
        if self.ab4_startup not in AB4_STARTUPS:
            raise ValueError(f"ab4_startup must be one of {AB4_STARTUPS}")

    @property
    def n_steps(self) -> int:
        return step_count(self.t_final, self.dt)


def step_count(t_final: float, dt: float) -> int:
    """Number of steps of size ``dt`` reaching ``t_final`` exactly."""
    n = round(t_final / dt)
    if abs(n * dt - t_final) > 1e-12 * max(abs(t_final), dt):
        raise ValueError(f"dt = {dt} does not divide t_final = {t_final}")
    return n


# -- generic one-step methods -------------------------------------------------


def _midpoint(y, h, f):
    return y + h * f(y + 0.5 * h * f(y))


def _rk4(y, h, f):
    s1 = h * f(y)
    s2 = h * f(y + 0.5 * s1)
    s3 = h * f(y + 0.5 * s2)
    s4 = h * f(y + s3)
    return y + (s1 + 2.0 * s2 + 2.0 * s3 + s4) / 6.0


def _rkf45(y, h, f, b, c):
    k1 = f(y)
    k2 = f(y + h * (b[1, 0] * k1))
    k3 = f(y + h * (b[2, 0] * k1 + b[2, 1] * k2))
    k4 = f(y + h * (b[3, 0] * k1 + b[3, 1] * k2 + b[3, 2] * k3))
    k5 = f(y + h * (b[4, 0] * k1 + b[4, 1] * k2 + b[4, 2] * k3 + b[4, 3] * k4))
    out = y + h * (c[0] * k1 + c[1] * k2 + c[2] * k3 + c[3] * k4 + c[4] * k5)
    if c[5] != 0.0:
        k6 = f(y + h * (b[5, 0] * k1 + b[5, 1] * k2 + b[5, 2] * k3 + b[5, 3] * k4
                        + b[5, 4] * k5))
        out = out + h * c[5] * k6
    return out


_midpoint_jit = njit(cache=True)(_midpoint)
_rk4_jit = njit(cache=True)(_rk4)
_rkf45_jit = njit(cache=True)(_rkf45)


def _compiled(f) -> bool:
    return isinstance(f, CPUDispatcher)


def step_midpoint(y, h: float, f: Callable):
    """One explicit midpoint step ``y + h f(y + h f(y) / 2)``."""
    return (_midpoint_jit if _compiled(f) else _midpoint)(y, h, f)


def step_rk4(y, h: float, f: Callable):
    """One classical fourth-order Runge-Kutta step."""
    return (_rk4_jit if _compiled(f) else _rk4)(y, h, f)


def step_rkf45(y, h: float, f: Callable, tableau: RKF45Tableau = FEHLBERG45):
    """One fixed-size Fehlberg step propagating the fourth-order solution.

    No error estimate is formed; stages whose weight is zero and that feed no
    later stage are skipped.
    """
    b, c = tableau.b_matrix, tableau.c_vector
    return (_rkf45_jit if _compiled(f) else _rkf45)(y, h, f, b, c)


# -- Adams-Bashforth ----------------------------------------------------------

AB4_STARTUPS = ("rk4", "adams")

_AB_ROWS = np.array([
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0 / 2.0, 3.0 / 2.0],
    [0.0, 5.0 / 12.0, -16.0 / 12.0, 23.0 / 12.0],
    [-9.0 / 24.0, 37.0 / 24.0, -59.0 / 24.0, 55.0 / 24.0],
])


def _ab4_loop(y, h, n_steps, f, hist, n_hist, rk4_start, rk4_step):
    """Advance ``n_steps`` AB4 steps; ``hist[3]`` holds the newest f value.

    ``n_hist`` counts stored f values (capped at 4). ``rk4_step`` is used for
    the first three iterates when ``rk4_start`` is set. Returns the new state,
    the updated count and the 1-based index of the first step that produced
    non-finite values, or 0.
    """
    for k in range(n_steps):
        fy = f(y)
        hist[0] = hist[1]
        hist[1] = hist[2]
        hist[2] = hist[3]
        hist[3] = fy
        if n_hist < 4:
            n_hist += 1
        if n_hist < 4 and rk4_start:
            y = rk4_step(y, h, f)
        else:
            row = _AB_ROWS[n_hist - 1]
            incr = row[3] * hist[3]
            for j in range(4 - n_hist, 3):
                incr = incr + row[j] * hist[j]
            y = y + h * incr
        if not _kernels.all_finite(y):
            return y, n_hist, k + 1
    return y, n_hist, 0


_ab4_loop_jit = njit(cache=True)(_ab4_loop)


def ab4_run(y0, h: float, n_steps: int, f: Callable, startup: str = "rk4"):
    """Fourth-order Adams-Bashforth iterate after ``n_steps`` steps.

    The first three iterates come from classical RK4 steps (``startup="rk4"``)
    or from forward Euler, AB2 and AB3 (``startup="adams"``). The Euler start
    leaves an O(h^2) global error, so only the RK4 start is fourth order.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    if startup not in AB4_STARTUPS:
        raise ValueError(f"startup must be one of {AB4_STARTUPS}")
    scalar = np.ndim(y0) == 0
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    hist = np.zeros((4,) + y.shape)
    if _compiled(f):
        y, _, bad = _ab4_loop_jit(y, h, n_steps, f, hist, 0, startup == "rk4", _rk4_jit)
    else:
        y, _, bad = _ab4_loop(y, h, n_steps, f, hist, 0, startup == "rk4", _rk4)
    if bad:
        raise BlowUpError(bad, bad * h)
    return float(y[0]) if scalar else y


# -- lattice drivers -----------------------------------------------------------


def step_sv2symp(state: LatticeStatePQ, h: float) -> LatticeStatePQ:
    """One Stormer-Verlet step of the physical equations."""
    p, q = state.p.copy(), state.q.copy()
    if _kernels.sv2symp_steps(p, q, _kernels.spring_force(q), h, 1):
        raise BlowUpError(1, state.time + h)
    return LatticeStatePQ(state.window, p, q, state.time + h)


class _Stepper:
    """Advances one method in its native variables, in chunks of steps."""

    def __init__(self, method: MethodKind, dt: float, start: LatticeStateAB | LatticeStatePQ,
                 ab4_startup: str = "rk4"):
        self.method = MethodKind(method)
        self.dt = dt
        self.window = start.window
        self.t0 = start.time
        self.steps_done = 0
        if self.method.uses_pq:
            if isinstance(start, LatticeStateAB):
                start = inverse_flaschka(start)
        elif isinstance(start, LatticeStatePQ):
            start = flaschka(start)
        self.y = start.flat()
        n = len(self.window)
        if self.method is MethodKind.sv2symp:
            self.force = _kernels.spring_force(self.y[n:])
        if self.method is MethodKind.ab4:
            self.hist = np.zeros((4, self.y.size))
            self.n_hist = 0
            self.head = 3
            self.rk4_start = ab4_startup == "rk4"

    @property
    def time(self) -> float:
        return self.t0 + self.steps_done * self.dt

    def advance(self, n_steps: int) -> None:
        if n_steps <= 0:
            return
        h, y, m = self.dt, self.y, self.method
        rhs = _kernels.rhs_pq_into if m.uses_pq else _kernels.rhs_ab_into
        if m in (MethodKind.midpoint, MethodKind.midpointqp):
            bad = _kernels.midpoint_steps(y, h, n_steps, rhs)
        elif m in (MethodKind.rk4, MethodKind.rk4qp):
            bad = _kernels.rk4_steps(y, h, n_steps, rhs)
        elif m is MethodKind.rkf45:
            bad = _kernels.rkf45_steps(y, h, n_steps, rhs, _FEHLBERG_B, _FEHLBERG_C)
        elif m is MethodKind.ab4:
            self.n_hist, self.head, bad = _kernels.ab4_steps(
                y, h, n_steps, rhs, self.hist, self.n_hist, self.head, _AB_ROWS, self.rk4_start)
        else:
            n = len(self.window)
            bad = _kernels.sv2symp_steps(y[:n], y[n:], self.force, h, n_steps)
        if bad:
            step = self.steps_done + bad
            raise BlowUpError(step, self.t0 + step * h)
        self.steps_done += n_steps

    def native_state(self) -> LatticeStateAB | LatticeStatePQ:
        if self.method.uses_pq:
            return LatticeStatePQ.from_flat(self.window, self.y, self.time)
        # a_n may legitimately cross zero in an inaccurate run; keep the values
        return LatticeStateAB.from_flat(self.window, self.y, self.time, check_positive=False)

    def ab_state(self) -> LatticeStateAB:
        state = self.native_state()
        return flaschka(state) if isinstance(state, LatticeStatePQ) else state


def evolve(state: LatticeStateAB | LatticeStatePQ, method: MethodKind | str, dt: float,
           t_final: float, *, ab4_startup: str = "rk4") -> LatticeStateAB:
    """Advance ``state`` by ``t_final`` with fixed steps and return ``(a, b)``."""
    stepper = _Stepper(method, dt, state, ab4_startup)
    stepper.advance(step_count(t_final, dt))
    return replace(stepper.ab_state(), time=state.time + t_final)


def trajectory(state: LatticeStateAB | LatticeStatePQ, method: MethodKind | str, dt: float,
               t_final: float, sample_every: int = 1, *,
               ab4_startup: str = "rk4") -> Iterator[LatticeStateAB | LatticeStatePQ]:
    """Yield native-variable snapshots every ``sample_every`` steps, start included.

    The final state is always yielded.
    """
    if sample_every < 1:
        raise ValueError("sample_every must be at least 1")
    stepper = _Stepper(method, dt, state, ab4_startup)
    total = step_count(t_final, dt)
    yield stepper.native_state()
    while stepper.steps_done < total:
        stepper.advance(min(sample_every, total - stepper.steps_done))
        yield stepper.native_state()


def default_window(s_max: float, t_final: float, margin: int = 200) -> IndexWindow:
    """Symmetric window reaching past the fastest signal by ``margin`` sites."""
    return IndexWindow.symmetric(math.ceil(max(s_max, 1.0) * t_final) + margin)


def integrate(id, config: StepperConfig, window: IndexWindow | None = None) -> LatticeStateAB:
    """Build initial data, integrate to ``config.t_final`` and return ``(a, b)``."""
    from todalab.initial_data import make_id
    from todalab.spectral import id_spectrum

    if window is None:
        window = default_window(id_spectrum(id).s_max, config.t_final)
    start = make_id(id, window)
    return evolve(start, config.method, config.dt, config.t_final,
                  ab4_startup=config.ab4_startup)
