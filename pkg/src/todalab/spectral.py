"""Jacobi-operator spectra: bound states, soliton speeds and the Lax residual."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from todalab.lattice import IndexWindow, LatticeStateAB, rhs_ab

TOL_BAND = 1e-8
DEFAULT_M = 60


@dataclass(frozen=True)
class JacobiMatrix:
    diag: np.ndarray
    offdiag: np.ndarray
    window: IndexWindow

    def __post_init__(self) -> None:
        if len(self.diag) != len(self.window) or len(self.offdiag) != len(self.window) - 1:
            raise ValueError("diagonal lengths do not match the window")
        if np.any(self.offdiag <= 0.0):
            raise ValueError("Jacobi off-diagonal entries must be positive")

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class SpectralSummary:
    bound_states: tuple[float, ...]
    kappas: tuple[float, ...]
    speeds: tuple[float, ...]
    s_max: float


def build_jacobi(state: LatticeStateAB, m: int) -> JacobiMatrix:
    """Restrict ``L`` to the sites ``-m..m``: diagonal ``b_n``, off-diagonal ``a_n``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    sub = IndexWindow.symmetric(m)
    if not state.window.covers(sub):
        raise ValueError(f"sub-window {sub} is not inside {state.window}")
    lo = sub.k_min - state.window.k_min
    diag = state.b[lo: lo + len(sub)].copy()
    offdiag = state.a[lo: lo + len(sub) - 1].copy()
    return JacobiMatrix(diag, offdiag, sub)


@njit(cache=True)
def _count_below(diag, off_sq, x):
    """Number of eigenvalues smaller than ``x`` (Sturm sequence of LDL^T pivots)."""
    count = 0
    d = 1.0
    tiny = 1e-300
    for i in range(diag.size):
        d = (diag[i] - x) - (off_sq[i - 1] / d if i > 0 else 0.0)
        if d == 0.0:
            d = -tiny
        if d < 0.0:
            count += 1
    return count


@njit(cache=True)
def _kth_eigenvalue(diag, off_sq, k, lo, hi):
    """Bisect for the eigenvalue with exactly ``k`` eigenvalues below it."""
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        if _count_below(diag, off_sq, mid) > k:
            hi = mid
        else:
            lo = mid


def eigenvalues_outside_band(matrix: JacobiMatrix, tol_band: float = TOL_BAND) -> list[float]:
    """Eigenvalues with ``|lambda| > 1 + tol_band``, ascending.

    Sturm-count bisection on the two half-lines outside the band; each
    eigenvalue is bisected until the bracket cannot shrink in floating point.
    """
    diag = np.asarray(matrix.diag, dtype=float)
    off_sq = np.asarray(matrix.offdiag, dtype=float) ** 2
    n = diag.size
    off = np.abs(np.asarray(matrix.offdiag, dtype=float))
    radius = np.zeros(n)
    radius[:-1] += off
    radius[1:] += off
    lower = float(np.min(diag - radius)) - 1.0
    upper = float(np.max(diag + radius)) + 1.0
    edge = 1.0 + tol_band
    below_neg = _count_below(diag, off_sq, -edge)
    below_pos = _count_below(diag, off_sq, edge)
    out = []
    for k in range(below_neg):
        out.append(_kth_eigenvalue(diag, off_sq, k, lower, -edge))
    for k in range(below_pos, n):
        out.append(_kth_eigenvalue(diag, off_sq, k, edge, upper))
    return [float(v) for v in out]


def soliton_speeds(eigs) -> SpectralSummary:
    """Map bound states to ``kappa = arccosh|lambda|`` and speeds ``sinh(kappa)/kappa``."""
    eigs = [float(v) for v in eigs]
    for lam in eigs:
        if not abs(lam) > 1.0:
            raise ValueError(f"{lam} is not a bound state (|lambda| <= 1)")
    kappas = [math.acosh(abs(lam)) for lam in eigs]
    speeds = [math.sinh(k) / k for k in kappas]
    return SpectralSummary(tuple(eigs), tuple(kappas), tuple(speeds), max(speeds, default=1.0))


@lru_cache(maxsize=None)
def _id_spectrum(id_key: str, m: int) -> SpectralSummary:
    from todalab.initial_data import InitialDataKind, make_id

    kind = InitialDataKind.parse(id_key)
    state = make_id(kind, IndexWindow.symmetric(m))
    return soliton_speeds(eigenvalues_outside_band(build_jacobi(state, m)))


def id_spectrum(id, m: int = DEFAULT_M) -> SpectralSummary:
    """Spectral summary of an initial-data family on the sites ``-m..m``."""
    from todalab.initial_data import InitialDataKind

    kind = id if isinstance(id, InitialDataKind) else InitialDataKind.parse(id)
    return _id_spectrum(f"{kind.name}:{kind.kappa!r}", m)


def lax_residual(state: LatticeStateAB, m: int) -> float:
    """Max-norm of ``dL/dt - (PL - LP)`` over the rows ``-m..m``.

    ``L`` and ``P`` are assembled one site wider than the checked rows so that
    every checked entry sees its full stencil.
    """
    if state.window.k_min > -m - 5 or state.window.k_max < m + 5:
        raise ValueError("m must be at least 5 sites inside the state window")
    sub = IndexWindow(-m - 1, m + 1)
    lo = sub.k_min - state.window.k_min
    hi = lo + len(sub)
    a, b = state.a[lo:hi], state.b[lo:hi]
    da, db = (v[lo:hi] for v in rhs_ab(state))
    upper = a[:-1]
    L = np.diag(b) + np.diag(upper, 1) + np.diag(upper, -1)
    P = np.diag(upper, 1) - np.diag(upper, -1)
    dL = np.diag(db) + np.diag(da[:-1], 1) + np.diag(da[:-1], -1)
    residual = dL - (P @ L - L @ P)
    return float(np.max(np.abs(residual[1:-1, :])))


def measure_soliton_speed(id, t1: float, t2: float, dt: float = 1e-3,
                          window: IndexWindow | None = None) -> float:
    """Empirical speed of the leading left-moving soliton between ``t1`` and ``t2``.

    The peak of ``|a_n - 1/2|`` is searched on ``n < -t`` and located to
    sub-site precision by a parabola through the three largest samples.
    """
    from todalab.initial_data import InitialDataKind, make_id
    from todalab.integrators import MethodKind, _Stepper, default_window, step_count

    kind = id if isinstance(id, InitialDataKind) else InitialDataKind.parse(id)
    if not 0 <= t1 < t2:
        raise ValueError("need 0 <= t1 < t2")
    spectrum = id_spectrum(kind)
    if not spectrum.bound_states:
        raise ValueError(f"no soliton peak: {kind} has an empty discrete spectrum")
    if window is None:
        window = default_window(spectrum.s_max, t2)
    stepper = _Stepper(MethodKind.rk4, dt, make_id(kind, window))
    positions = []
    for t in (t1, t2):
        stepper.advance(step_count(t, dt) - stepper.steps_done)
        state = stepper.ab_state()
        positions.append(_peak_position(state, -t))
    return (positions[0] - positions[1]) / (t2 - t1)


def _peak_position(state: LatticeStateAB, front: float) -> float:
    sites = state.window.sites
    ahead = sites < front
    dev = np.abs(state.a - 0.5)
    dev_ahead = np.where(ahead, dev, -1.0)
    i = int(np.argmax(dev_ahead))
    if not ahead.any() or dev_ahead[i] < 1e-6:
        raise ValueError(f"no soliton peak beyond n = {front:g}")
    if 0 < i < len(sites) - 1:
        left, mid, right = dev[i - 1], dev[i], dev[i + 1]
        curv = left - 2.0 * mid + right
        if curv < 0.0:
            return float(sites[i] + 0.5 * (left - right) / curv)
    return float(sites[i])
