"""Reference solutions: exact soliton, fine-step integration and CSV files.

Reference CSV layout::

    # toda-reference id=<name> T=<real> source=<tag>
    n,a_ref,b_ref
    -105,0.5000000000000001,-1.2e-17
    ...

The second line is optional; sites must be strictly increasing and contiguous.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from todalab.initial_data import InitialDataKind, exact_soliton, make_id
from todalab.integrators import MethodKind, _Stepper, default_window, step_count
from todalab.lattice import IndexWindow, LatticeStateAB
from todalab.metrics import (
    BACKGROUND_A,
    BACKGROUND_B,
    DegenerateReferenceError,
    RegionSpec,
    absolute_error,
    relative_error,
)
from todalab.spectral import id_spectrum

SOURCES = ("exact-soliton", "external-file", "fine-integration")
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class ReferenceSolution:
    id: InitialDataKind
    t_final: float
    region: RegionSpec
    a_ref: np.ndarray
    b_ref: np.ndarray
    source: str

    def __post_init__(self) -> None:
        n = len(self.region.window)
        if len(self.a_ref) != n or len(self.b_ref) != n:
            raise ValueError("reference length does not match its region")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")

    @property
    def sites(self) -> np.ndarray:
        return self.region.indices


class ReferenceError(RuntimeError):
    """A reference could not be produced to the requested accuracy."""


def pures_reference(t_final: float, region: RegionSpec, kappa: float = 0.4) -> ReferenceSolution:
    a, b = exact_soliton(kappa, region.indices, t_final)
    return ReferenceSolution(InitialDataKind("PureS", kappa), t_final, region,
                             np.asarray(a), np.asarray(b), "exact-soliton")


def _sorted_difference(x: LatticeStateAB, y: LatticeStateAB) -> float:
    """Sorted difference of ``x`` from ``y``, relative where ``y`` is not background."""
    out = 0.0
    for xv, yv, c in ((x.a, y.a, BACKGROUND_A), (x.b, y.b, BACKGROUND_B)):
        try:
            err = relative_error(xv, yv, c)
        except DegenerateReferenceError:
            err = absolute_error(xv, yv)
        out = max(out, err)
    return out


def fine_solution(id, t_final: float, dt_ref: float, window: IndexWindow | None = None,
                  tol: float = DEFAULT_TOL) -> LatticeStateAB:
    """rk4 solution on the whole window, accepted only if a half-step rerun agrees.

    The companion run at ``dt_ref / 2`` must match within ``10 * tol`` in the
    sorted norm (relative for ``a`` and ``b`` against their backgrounds).
    """
    kind = id if isinstance(id, InitialDataKind) else InitialDataKind.parse(id)
    if window is None:
        window = default_window(id_spectrum(kind).s_max, t_final)
    start = make_id(kind, window)
    runs = []
    for h in (dt_ref, dt_ref / 2.0):
        stepper = _Stepper(MethodKind.rk4, h, start)
        stepper.advance(step_count(t_final, h))
        runs.append(replace(stepper.ab_state(), time=start.time + t_final))
    if t_final > 0:
        gap = _sorted_difference(runs[0], runs[1])
        if not gap <= 10.0 * tol:
            raise ReferenceError(
                f"{kind} at T={t_final:g}: dt_ref={dt_ref:g} and dt_ref/2 differ by {gap:.3e}"
                f" > {10 * tol:.1e}")
    return runs[0]


def fine_reference(id, t_final: float, region: RegionSpec, dt_ref: float,
                   window: IndexWindow | None = None, tol: float = DEFAULT_TOL) -> ReferenceSolution:
    kind = id if isinstance(id, InitialDataKind) else InitialDataKind.parse(id)
    state = fine_solution(kind, t_final, dt_ref, window, tol)
    return extract_reference(state, kind, region, "fine-integration")


def extract_reference(state: LatticeStateAB, kind: InitialDataKind, region: RegionSpec,
                      source: str) -> ReferenceSolution:
    sub = state.restrict(region.window)
    return ReferenceSolution(kind, state.time, region, sub.a.copy(), sub.b.copy(), source)


# -- CSV ----------------------------------------------------------------------

_HEADER = re.compile(r"^#\s*toda-reference\s+id=(\S+)\s+T=(\S+)\s+source=(\S+)\s*$")


class ReferenceFormatError(ValueError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


def write_reference_csv(ref: ReferenceSolution, path, source_tag: str | None = None) -> None:
    lines = [f"# toda-reference id={ref.id} T={ref.t_final!r} source={source_tag or ref.source}",
             "n,a_ref,b_ref"]
    for n, a, b in zip(ref.sites, ref.a_ref, ref.b_ref):
        lines.append(f"{int(n)},{float(a)!r},{float(b)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_reference_csv(path, region_kind: str | None = None) -> ReferenceSolution:
    """Parse a reference file; the region spans exactly the listed sites.

    ``region_kind`` defaults to ``full`` when the sites reach ``n > 0``, else to
    ``soliton`` or ``dispersive`` guessed from the file name.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ReferenceFormatError(path, 1, "empty file")
    match = _HEADER.match(lines[0])
    if not match:
        raise ReferenceFormatError(path, 1, "header must read "
                                   "'# toda-reference id=<name> T=<real> source=<tag>'")
    try:
        kind = InitialDataKind.parse(match.group(1))
        t_final = float(match.group(2))
    except ValueError as exc:
        raise ReferenceFormatError(path, 1, str(exc)) from None
    sites, a_vals, b_vals = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if not text or text.startswith("#") or text.replace(" ", "") == "n,a_ref,b_ref":
            continue
        fields = text.split(",")
        if len(fields) != 3:
            raise ReferenceFormatError(path, lineno, f"expected 3 fields, got {len(fields)}")
        try:
            n, a, b = int(fields[0]), float(fields[1]), float(fields[2])
        except ValueError as exc:
            raise ReferenceFormatError(path, lineno, f"unparsable value ({exc})") from None
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ReferenceFormatError(path, lineno, "non-finite value")
        if sites and n != sites[-1] + 1:
            raise ReferenceFormatError(path, lineno,
                                       f"sites not contiguous: {sites[-1]} followed by {n}")
        sites.append(n)
        a_vals.append(a)
        b_vals.append(b)
    if not sites:
        raise ReferenceFormatError(path, len(lines), "no data rows")
    if region_kind is None:
        if sites[-1] > 0:
            region_kind = "full"
        else:
            region_kind = "dispersive" if "dispersive" in path.name else "soliton"
    region = RegionSpec(region_kind, IndexWindow(sites[0], sites[-1]))
    return ReferenceSolution(kind, t_final, region, np.array(a_vals), np.array(b_vals),
                             "external-file")
