"""The five initial-data families and the exact travelling 1-soliton."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from todalab.lattice import IndexWindow, LatticeStateAB

NAMES = ("NoS", "PureS", "double", "quad", "dirac")

DEFAULT_KAPPA = 0.4

# Propagation direction of the 1-soliton built from ``soliton_profile``; the
# profile moves towards negative n. ``calibrate_direction`` re-derives it.
SOLITON_DIRECTION = -1


@dataclass(frozen=True)
class InitialDataKind:
    """One of ``NoS``, ``PureS``, ``double``, ``quad``, ``dirac``.

    ``kappa`` only matters for ``PureS``.
    """

    name: str
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self) -> None:
        if self.name not in NAMES:
            raise ValueError(f"unknown initial data {self.name!r}; choose from {', '.join(NAMES)}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")

    @classmethod
    def parse(cls, text: str) -> InitialDataKind:
        """Parse ``"double"`` or ``"PureS:0.3"``."""
        name, _, kappa = text.partition(":")
        for known in NAMES:
            if known.lower() == name.strip().lower():
                return cls(known, float(kappa) if kappa else DEFAULT_KAPPA)
        raise ValueError(f"unknown initial data {text!r}; choose from {', '.join(NAMES)}")

    def __str__(self) -> str:
        if self.name == "PureS" and self.kappa != DEFAULT_KAPPA:
            return f"PureS:{self.kappa:g}"
        return self.name


def _logistic_tail(z):
    """``e^{-z} / (1 + e^{-z})`` without overflow."""
    return 0.5 * (1.0 - np.tanh(0.5 * z))


def soliton_profile(x, kappa: float = DEFAULT_KAPPA, verbatim: bool = False):
    """1-soliton ``(a, b)`` evaluated at real positions ``x``.

    With ``verbatim=True`` the off-diagonal is ``1 - R/2`` instead of ``R/2``,
    where ``R = sqrt((1 + X(x-1))(1 + X(x+1))) / (1 + X(x))`` and
    ``X(x) = e^{-2 kappa x}``. Only ``R/2`` solves the lattice equations; the
    other form has no bound state and is kept for comparison.
    """
    x = np.asarray(x, dtype=float)
    # log(1 + X(y)) evaluated stably for both signs of y
    log1p_x = lambda y: np.logaddexp(0.0, -2.0 * kappa * y)  # noqa: E731
    ratio = np.exp(0.5 * (log1p_x(x - 1.0) + log1p_x(x + 1.0)) - log1p_x(x))
    a = 1.0 - 0.5 * ratio if verbatim else 0.5 * ratio
    b = 0.5 * (math.exp(-kappa) - math.exp(kappa)) * (
        _logistic_tail(2.0 * kappa * x) - _logistic_tail(2.0 * kappa * (x - 1.0))
    )
    return a, b


def soliton_speed(kappa: float) -> float:
    return math.sinh(kappa) / kappa


def exact_soliton(kappa: float, n, t: float):
    """The travelling 1-soliton ``(a_n(t), b_n(t))``; ``n`` may be an array."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    x = np.asarray(n, dtype=float) - SOLITON_DIRECTION * soliton_speed(kappa) * t
    a, b = soliton_profile(x, kappa)
    if np.ndim(a) == 0:
        return float(a), float(b)
    return a, b


def _sech(n):
    e = np.exp(-np.abs(n))
    return 2.0 * e / (1.0 + e * e)


def make_id(kind: InitialDataKind | str, window: IndexWindow) -> LatticeStateAB:
    if isinstance(kind, str):
        kind = InitialDataKind.parse(kind)
    n = window.sites.astype(float)
    if kind.name == "NoS":
        a = 0.5 - 0.25 * np.exp(-n * n)
        b = 0.1 * _sech(n)
    elif kind.name == "PureS":
        a, b = soliton_profile(n, kind.kappa)
    elif kind.name == "double":
        a = 0.5 + 0.8 * n * np.exp(-n * n)
        b = 0.1 * _sech(n)
    elif kind.name == "quad":
        a = np.abs(0.5 - n * np.exp(-n * n + n))
        b = n * _sech(n)
    else:
        a = np.full(n.shape, 0.5)
        b = np.where(n == 0, 4.0, 0.0)
    return LatticeStateAB(window, a, b, 0.0)


def calibrate_direction(kappa: float = DEFAULT_KAPPA, t_final: float = 5.0,
                        dt: float = 1e-3, half_width: int = 60) -> int:
    """Pick the sign of the soliton velocity that best matches a fine rk4 run."""
    from todalab.integrators import MethodKind, evolve

    window = IndexWindow.symmetric(half_width)
    start = make_id(InitialDataKind("PureS", kappa), window)
    end = evolve(start, MethodKind.rk4, dt, t_final)
    n = window.sites.astype(float)
    best, best_err = 0, math.inf
    for sigma in (1, -1):
        a, b = soliton_profile(n - sigma * soliton_speed(kappa) * t_final, kappa)
        err = max(np.max(np.abs(a - end.a)), np.max(np.abs(b - end.b)))
        if err < best_err:
            best, best_err = sigma, err
    return best
