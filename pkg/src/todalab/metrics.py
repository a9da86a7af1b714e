"""Sorted-norm error measures and the soliton/dispersive index regions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from todalab.lattice import IndexWindow

DEFAULT_FRACTION = 0.1
BACKGROUND_A = 0.5
BACKGROUND_B = 0.0


def _head_count(d: float, n: int) -> int:
    # 0.3 * 10 evaluates to 3.0000000000000004; round away the representation noise
    return max(1, math.ceil(round(d * n, 9)))


def sorted_norm(x, d: float = DEFAULT_FRACTION) -> float:
    """l2 norm of the ``ceil(d * n)`` largest entries of ``|x|``."""
    x = np.abs(np.asarray(x, dtype=float)).ravel()
    if x.size == 0:
        raise ValueError("sorted_norm of an empty vector")
    if not 0.0 < d < 1.0:
        raise ValueError(f"fraction d must lie in (0, 1), got {d}")
    head = np.sort(x)[::-1][: _head_count(d, x.size)]
    scale = head[0]
    if scale == 0.0 or not np.isfinite(scale):
        return float(scale)
    # scaling by the largest entry keeps tiny or huge inputs from under/overflowing
    return float(scale * np.linalg.norm(head / scale))


class DegenerateReferenceError(ValueError):
    """The reference coincides with its background, so a relative error is undefined."""


def relative_error(x, y, c: float, d: float = DEFAULT_FRACTION) -> float:
    """``||x - y||_sort / ||c - y||_sort`` for a reference ``y`` over background ``c``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    denom = sorted_norm(c - y, d)
    if denom == 0.0:
        raise DegenerateReferenceError("reference equals its background; use absolute_error")
    return sorted_norm(x - y, d) / denom


def absolute_error(x, y, d: float = DEFAULT_FRACTION) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    return sorted_norm(x - y, d)


REGION_KINDS = ("soliton", "dispersive", "full")


@dataclass(frozen=True)
class RegionSpec:
    kind: str
    window: IndexWindow

    def __post_init__(self) -> None:
        if self.kind not in REGION_KINDS:
            raise ValueError(f"region kind must be one of {REGION_KINDS}")
        if self.kind != "full" and self.window.k_max > 0:
            raise ValueError("soliton and dispersive regions lie in n <= 0")

    @property
    def indices(self) -> np.ndarray:
        return self.window.sites

    def __str__(self) -> str:
        return f"{self.kind}[{self.window.k_min},{self.window.k_max}]"


def soliton_region(t_final: float, s_max: float, margin: int = 100) -> RegionSpec:
    """``[-ceil(s_max T) - margin, -ceil(T)]``: the fastest soliton plus a margin."""
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    if s_max < 1.0:
        raise ValueError("s_max is at least 1")
    lead = math.ceil(round(s_max * t_final, 9))
    return RegionSpec("soliton", IndexWindow(-lead - margin, -math.ceil(t_final)))


def dispersive_region(t_final: float, half_width: int = 50) -> RegionSpec:
    """``[-T/2 - half_width, -T/2 + half_width]``; odd ``T`` centres on ``-floor(T/2)``.

    For ``T < 2 * half_width`` the right end is clipped at ``n = 0``.
    """
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    centre = -math.floor(t_final / 2.0)
    return RegionSpec("dispersive", IndexWindow(centre - half_width, min(centre + half_width, 0)))


def region_for(kind: str, t_final: float, s_max: float) -> RegionSpec:
    if kind == "soliton":
        return soliton_region(t_final, s_max)
    if kind == "dispersive":
        return dispersive_region(t_final)
    raise ValueError(f"unknown region kind {kind!r}")


@dataclass(frozen=True)
class ErrorReport:
    """Errors of one benchmark cell, ``inf`` when the run diverged or failed."""

    method: str
    id: str
    dt: float
    t_final: float
    region: RegionSpec
    err_a: float
    err_b: float
    metric_kind: str
    status: str = "ok"
    source: str = ""
    message: str = ""

    def __post_init__(self) -> None:
        if self.metric_kind not in ("relative", "absolute"):
            raise ValueError("metric_kind must be relative or absolute")
        if self.status not in ("ok", "diverged", "failed"):
            raise ValueError("status must be ok, diverged or failed")
        if self.status == "ok" and not (self.err_a >= 0 and self.err_b >= 0):
            raise ValueError("errors of an ok cell must be non-negative")
