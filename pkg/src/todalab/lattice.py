"""Truncated Toda lattice states, right-hand sides and conserved quantities.

Both variable sets live on a finite index window. Everything outside the window
is frozen at the background state: ``(a_n, b_n) = (1/2, 0)`` in Flaschka
variables, zero momentum and zero spring extension in physical variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from todalab import _kernels


@dataclass(frozen=True)
class IndexWindow:
    """Inclusive range of lattice sites ``k_min..k_max``."""

    k_min: int
    k_max: int

    def __post_init__(self) -> None:
        if self.k_min > self.k_max:
            raise ValueError(f"empty window [{self.k_min}, {self.k_max}]")

    @classmethod
    def symmetric(cls, half_width: int) -> IndexWindow:
        return cls(-int(half_width), int(half_width))

    def __len__(self) -> int:
        return self.k_max - self.k_min + 1

    def __contains__(self, n: object) -> bool:
        return isinstance(n, (int, np.integer)) and self.k_min <= n <= self.k_max

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def offset(self, n: int) -> int:
        """Array position of site ``n``."""
        if n not in self:
            raise IndexError(f"site {n} outside window [{self.k_min}, {self.k_max}]")
        return n - self.k_min

    def covers(self, other: IndexWindow) -> bool:
        return self.k_min <= other.k_min and other.k_max <= self.k_max


def _as_site_array(values, window: IndexWindow, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (len(window),):
        raise ValueError(f"{name} has shape {arr.shape}, expected ({len(window)},)")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LatticeStatePQ:
    """Momenta ``p`` and displacements ``q`` on a window at a given time."""

    window: IndexWindow
    p: np.ndarray
    q: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _as_site_array(self.p, self.window, "p"))
        object.__setattr__(self, "q", _as_site_array(self.q, self.window, "q"))

    @classmethod
    def background(cls, window: IndexWindow, time: float = 0.0) -> LatticeStatePQ:
        zeros = np.zeros(len(window))
        return cls(window, zeros, zeros, time)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.p, self.q])

    @classmethod
    def from_flat(cls, window: IndexWindow, y: np.ndarray, time: float) -> LatticeStatePQ:
        n = len(window)
        return cls(window, y[:n], y[n:], time)


@dataclass(frozen=True)
class LatticeStateAB:
    """Flaschka variables ``(a, b)`` on a window at a given time.

    ``a`` must be strictly positive so that the associated Jacobi matrix is
    well defined.
    """

    window: IndexWindow
    a: np.ndarray
    b: np.ndarray
    time: float = 0.0
    check_positive: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _as_site_array(self.a, self.window, "a"))
        object.__setattr__(self, "b", _as_site_array(self.b, self.window, "b"))
        if self.check_positive and np.any(self.a <= 0.0):
            bad = self.window.k_min + int(np.argmax(self.a <= 0.0))
            raise ValueError(f"a_n must be positive; a[{bad}] = {self.a[bad - self.window.k_min]}")

    @classmethod
    def background(cls, window: IndexWindow, time: float = 0.0) -> LatticeStateAB:
        n = len(window)
        return cls(window, np.full(n, 0.5), np.zeros(n), time)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])

    @classmethod
    def from_flat(cls, window: IndexWindow, y: np.ndarray, time: float,
                  check_positive: bool = True) -> LatticeStateAB:
        n = len(window)
        return cls(window, y[:n], y[n:], time, check_positive=check_positive)

    def restrict(self, window: IndexWindow) -> LatticeStateAB:
        if not self.window.covers(window):
            raise ValueError(f"{window} is not inside {self.window}")
        lo = window.k_min - self.window.k_min
        hi = lo + len(window)
        return LatticeStateAB(window, self.a[lo:hi], self.b[lo:hi], self.time,
                              check_positive=self.check_positive)


def toda_potential(r):
    """Toda interaction energy ``V(r) = e^{-r} + r - 1``."""
    r = np.asarray(r, dtype=float)
    out = np.expm1(-r) + r
    return float(out) if out.ndim == 0 else out


def flaschka(state: LatticeStatePQ) -> LatticeStateAB:
    """Map physical variables to Flaschka variables.

    ``a_n = exp(-(q_{n+1} - q_n)/2) / 2`` and ``b_n = -p_n / 2``; the last site uses
    a zero spring extension.
    """
    dq = np.append(np.diff(state.q), 0.0)
    return LatticeStateAB(state.window, 0.5 * np.exp(-0.5 * dq), -0.5 * state.p, state.time)


def inverse_flaschka(state: LatticeStateAB, q_anchor: float = 0.0) -> LatticeStatePQ:
    """Recover ``(p, q)`` from ``(a, b)``, fixing ``q`` at the left edge to ``q_anchor``."""
    if np.any(state.a <= 0.0):
        raise ValueError("inverse_flaschka requires a_n > 0 everywhere")
    p = -2.0 * state.b
    steps = -2.0 * np.log(2.0 * state.a[:-1])
    q = q_anchor + np.concatenate([[0.0], np.cumsum(steps)])
    return LatticeStatePQ(state.window, p, q, state.time)


def rhs_pq(state: LatticeStatePQ) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives ``(dp, dq)`` of the physical equations of motion."""
    return _kernels.spring_force(state.q), state.p.copy()


def rhs_ab(state: LatticeStateAB) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives ``(da, db)`` of the Flaschka equations of motion."""
    out = _kernels.rhs_ab_flat(state.flat())
    n = len(state.window)
    return out[:n], out[n:]


def hamiltonian(state: LatticeStatePQ) -> float:
    """Total energy ``sum(p_n^2 / 2 + V(q_{n+1} - q_n))`` over the window."""
    dq = np.append(np.diff(state.q), 0.0)
    return float(0.5 * np.sum(state.p**2) + np.sum(toda_potential(dq)))


def conserved_traces(state: LatticeStateAB) -> tuple[float, float]:
    """Background-subtracted traces of ``L`` and ``L^2``.

    Returns ``(sum b_n, sum(b_n^2 + 2 a_n^2 - 1/2))``; both vanish on the
    background and are constants of the untruncated flow.
    """
    c1 = float(np.sum(state.b))
    c2 = float(np.sum(state.b**2 + 2.0 * state.a**2 - 0.5))
    return c1, c2
