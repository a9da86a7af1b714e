"""Benchmark matrix runner, table emitters, profiles and convergence orders."""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from todalab.initial_data import InitialDataKind, make_id
from todalab.integrators import (
    BlowUpError,
    MethodKind,
    StepperConfig,
    default_window,
    evolve,
    integrate,
    trajectory,
)
from todalab.lattice import IndexWindow, LatticeStateAB, LatticeStatePQ, hamiltonian, inverse_flaschka
from todalab.metrics import (
    BACKGROUND_A,
    BACKGROUND_B,
    DegenerateReferenceError,
    ErrorReport,
    RegionSpec,
    absolute_error,
    region_for,
    relative_error,
)
from todalab.reference import (
    DEFAULT_TOL,
    ReferenceSolution,
    extract_reference,
    fine_solution,
    load_reference_csv,
    pures_reference,
)
from todalab.spectral import id_spectrum

ALL_IDS = tuple(InitialDataKind(name) for name in ("NoS", "PureS", "double", "quad", "dirac"))


@dataclass(frozen=True)
class BenchmarkMatrix:
    """Cells are ``methods x dts x t_finals x ids x regions``.

    ``reference_dir`` switches the reference policy to external files named
    ``<id>_T<T>_<region>.csv``; cells without a file fall back to fine
    integration. ``dt_ref`` defaults to a tenth of the smallest ``dt``.
    """

    methods: tuple[MethodKind, ...]
    dts: tuple[float, ...]
    t_finals: tuple[float, ...]
    ids: tuple[InitialDataKind, ...]
    regions: tuple[str, ...] = ("soliton", "dispersive")
    reference_dir: Path | None = None
    dt_ref: float | None = None
    tol: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        object.__setattr__(self, "methods", tuple(MethodKind(m) for m in self.methods))
        object.__setattr__(self, "ids", tuple(
            i if isinstance(i, InitialDataKind) else InitialDataKind.parse(i) for i in self.ids))
        object.__setattr__(self, "dts", tuple(float(v) for v in self.dts))
        object.__setattr__(self, "t_finals", tuple(float(v) for v in self.t_finals))
        object.__setattr__(self, "regions", tuple(self.regions))
        for name in ("methods", "dts", "t_finals", "ids", "regions"):
            if not getattr(self, name):
                raise ValueError(f"benchmark matrix needs at least one entry in {name}")
        if any(not dt > 0 for dt in self.dts):
            raise ValueError("time steps must be positive")
        for r in self.regions:
            if r not in ("soliton", "dispersive"):
                raise ValueError(f"unknown region {r!r}")
        for t in self.t_finals:
            for dt in self.dts:
                StepperConfig(MethodKind.rk4, dt, t)
        if self.dt_ref is not None and self.dt_ref > min(self.dts) / 5.0:
            raise ValueError("dt_ref must be at most a fifth of the smallest dt")

    @property
    def reference_dt(self) -> float:
        return self.dt_ref if self.dt_ref is not None else min(self.dts) / 10.0

    @property
    def size(self) -> int:
        return (len(self.methods) * len(self.dts) * len(self.t_finals) * len(self.ids)
                * len(self.regions))

    @classmethod
    def desk_scale(cls, t_finals: Sequence[float] = (100.0,), **kwargs) -> BenchmarkMatrix:
        return cls(methods=tuple(MethodKind), dts=(0.01, 0.001), t_finals=tuple(t_finals),
                   ids=ALL_IDS, **kwargs)


@dataclass(frozen=True)
class BenchTable:
    rows: tuple[ErrorReport, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def select(self, **conditions) -> list[ErrorReport]:
        """Rows whose attributes equal ``conditions`` (``region`` matches the kind)."""
        out = []
        for row in self.rows:
            ok = True
            for key, want in conditions.items():
                have = row.region.kind if key == "region" else getattr(row, key)
                if key in ("method", "id"):
                    want = str(want)
                if have != want:
                    ok = False
                    break
            if ok:
                out.append(row)
        return out


def _integrate_cell(args) -> LatticeStateAB | BlowUpError:
    method, dt, t_final, kind, window = args
    try:
        return integrate(kind, StepperConfig(method, dt, t_final), window)
    except BlowUpError as exc:
        return exc


def _fine_cell(args) -> LatticeStateAB | Exception:
    kind, t_final, dt_ref, window, tol = args
    try:
        return fine_solution(kind, t_final, dt_ref, window, tol)
    except Exception as exc:  # recorded per cell
        return exc


def _map(fn, tasks: list, jobs: int) -> list:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _errors(x: LatticeStateAB, ref: ReferenceSolution, absolute: bool) -> tuple[float, float, str]:
    sub = x.restrict(ref.region.window)
    if not absolute:
        try:
            return (relative_error(sub.a, ref.a_ref, BACKGROUND_A),
                    relative_error(sub.b, ref.b_ref, BACKGROUND_B), "relative")
        except DegenerateReferenceError:
            pass
    return absolute_error(sub.a, ref.a_ref), absolute_error(sub.b, ref.b_ref), "absolute"


def run_benchmark(matrix: BenchmarkMatrix, jobs: int = 1) -> BenchTable:
    """Evaluate every cell of ``matrix``; failures are recorded, never raised.

    One integration serves all regions of a ``(method, dt, T, id)`` and one
    fine reference all methods of an ``(id, T)``; both are deterministic, so
    the rows equal those of fully isolated runs.
    """
    windows, regions = {}, {}
    for kind in matrix.ids:
        s_max = id_spectrum(kind).s_max
        for t in matrix.t_finals:
            windows[kind, t] = default_window(s_max, t)
            for r in matrix.regions:
                regions[kind, t, r] = region_for(r, t, s_max)

    references: dict = {}
    need_fine = []
    for kind in matrix.ids:
        for t in matrix.t_finals:
            for r in matrix.regions:
                if kind.name == "PureS":
                    references[kind, t, r] = pures_reference(t, regions[kind, t, r], kind.kappa)
                    continue
                if matrix.reference_dir is not None:
                    path = Path(matrix.reference_dir) / f"{kind}_T{t:g}_{r}.csv"
                    if path.exists():
                        try:
                            references[kind, t, r] = load_reference_csv(path, r)
                        except Exception as exc:
                            references[kind, t, r] = exc
                        continue
                if (kind, t) not in need_fine:
                    need_fine.append((kind, t))
    fine_results = _map(_fine_cell, [(k, t, matrix.reference_dt, windows[k, t], matrix.tol)
                                     for k, t in need_fine], jobs)
    for (kind, t), result in zip(need_fine, fine_results):
        for r in matrix.regions:
            if (kind, t, r) in references:
                continue
            if isinstance(result, Exception):
                references[kind, t, r] = result
            else:
                references[kind, t, r] = extract_reference(result, kind, regions[kind, t, r],
                                                           "fine-integration")

    cells = [(m, dt, t, kind, windows[kind, t])
             for kind in matrix.ids for t in matrix.t_finals
             for m in matrix.methods for dt in matrix.dts]
    finals = dict(zip([c[:4] for c in cells], _map(_integrate_cell, cells, jobs)))

    rows = []
    for kind in matrix.ids:
        for r in matrix.regions:
            for m in matrix.methods:
                for t in matrix.t_finals:
                    for dt in matrix.dts:
                        rows.append(_row(m, dt, t, kind, r, regions[kind, t, r],
                                         references[kind, t, r], finals[m, dt, t, kind]))
    return BenchTable(tuple(rows))


def _row(method, dt, t, kind, region_kind, region, ref, final) -> ErrorReport:
    absolute = kind.name == "PureS" and region_kind == "dispersive"
    base = dict(method=str(method), id=str(kind), dt=dt, t_final=t)
    metric = "absolute" if absolute else "relative"
    # a diverged run is reported as such even when its reference also failed
    if isinstance(final, BlowUpError):
        source = "" if isinstance(ref, Exception) else ref.source
        return ErrorReport(**base, region=region, err_a=math.inf, err_b=math.inf,
                           metric_kind=metric, status="diverged", source=source,
                           message=str(final))
    if isinstance(ref, Exception):
        return ErrorReport(**base, region=region, err_a=math.inf, err_b=math.inf,
                           metric_kind=metric, status="failed", message=str(ref))
    err_a, err_b, metric = _errors(final, ref, absolute)
    return ErrorReport(**base, region=ref.region, err_a=err_a, err_b=err_b, metric_kind=metric,
                       status="ok", source=ref.source)


# -- emitters -----------------------------------------------------------------


def _sci(x: float) -> str:
    return "inf" if not math.isfinite(x) else f"{x:.3e}"


CSV_COLUMNS = ("id", "region", "n_min", "n_max", "method", "T", "dt", "metric",
               "err_a", "err_b", "status", "source")


def emit_table(table: BenchTable, fmt: str = "markdown") -> str:
    if not table.rows:
        raise ValueError("empty table")
    if fmt == "csv":
        return _emit_csv(table)
    if fmt == "json":
        return _emit_json(table)
    if fmt == "markdown":
        return _emit_markdown(table)
    raise ValueError(f"unknown format {fmt!r}")


def _row_fields(row: ErrorReport) -> dict:
    return {
        "id": row.id, "region": row.region.kind, "n_min": row.region.window.k_min,
        "n_max": row.region.window.k_max, "method": row.method, "T": f"{row.t_final:g}",
        "dt": f"{row.dt:g}", "metric": row.metric_kind, "err_a": _sci(row.err_a),
        "err_b": _sci(row.err_b), "status": row.status, "source": row.source,
    }


def _emit_csv(table: BenchTable) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in table.rows:
        fields = _row_fields(row)
        buf.write(",".join(str(fields[c]) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def _emit_json(table: BenchTable) -> str:
    records = []
    for row in table.rows:
        rec = _row_fields(row)
        rec["T"], rec["dt"] = row.t_final, row.dt
        for key in ("err_a", "err_b"):
            rec[key] = rec[key] if rec[key] == "inf" else float(rec[key])
        if row.message:
            rec["message"] = row.message
        records.append(rec)
    return json.dumps({"rows": records}, indent=2, sort_keys=True) + "\n"


def _emit_markdown(table: BenchTable) -> str:
    blocks: dict[tuple[str, str], list[ErrorReport]] = {}
    for row in table.rows:
        blocks.setdefault((row.id, row.region.kind), []).append(row)
    out = []
    for (kind, region), rows in blocks.items():
        w = rows[0].region.window
        out.append(f"### {kind}, {region} region [{w.k_min}, {w.k_max}]")
        out.append("")
        out.append(f"{rows[0].metric_kind} error, reference: {rows[0].source or 'none'}")
        out.append("")
        columns = []
        for row in rows:
            key = (row.t_final, row.dt)
            if key not in columns:
                columns.append(key)
        methods = []
        for row in rows:
            if row.method not in methods:
                methods.append(row.method)
        header = ["method"]
        for var in ("a", "b"):
            header += [f"{var}: T={t:g} dt={dt:g}" for t, dt in columns]
        out.append("| " + " | ".join(header) + " |")
        out.append("|" + "---|" * len(header))
        lookup = {(r.method, r.t_final, r.dt): r for r in rows}
        for m in methods:
            cells = [m]
            for var in ("a", "b"):
                for t, dt in columns:
                    r = lookup.get((m, t, dt))
                    if r is None:
                        cells.append("")
                    elif r.status != "ok":
                        cells.append("—")
                    else:
                        cells.append(_sci(r.err_a if var == "a" else r.err_b))
            out.append("| " + " | ".join(cells) + " |")
        out.append("")
    return "\n".join(out)


def emit_profile(id, method, dt: float, t_final: float, out, window: IndexWindow | None = None) -> None:
    """Write ``n, a_n, b_n`` over the whole window at ``t_final`` as reference-style CSV."""
    kind = id if isinstance(id, InitialDataKind) else InitialDataKind.parse(id)
    method = MethodKind(method)
    state = integrate(kind, StepperConfig(method, dt, t_final), window)
    lines = [f"# toda-reference id={kind} T={t_final!r} source=profile:{method}:dt={dt:g}",
             "n,a_ref,b_ref"]
    for n, a, b in zip(state.window.sites, state.a, state.b):
        lines.append(f"{int(n)},{float(a)!r},{float(b)!r}")
    Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- convergence --------------------------------------------------------------


def convergence_errors(method, id, t_final: float, dts: Iterable[float], dt_ref: float = 1e-5,
                       window: IndexWindow | None = None,
                       reference: LatticeStateAB | None = None) -> list[float]:
    """Relative sorted-norm error of ``a`` over the whole window for each ``dt``."""
    kind = id if isinstance(id, InitialDataKind) else InitialDataKind.parse(id)
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    if window is None:
        window = default_window(id_spectrum(kind).s_max, t_final)
    if reference is None:
        reference = fine_solution(kind, t_final, dt_ref, window)
    start = make_id(kind, window)
    errors = []
    for dt in dts:
        final = evolve(start, method, dt, t_final)
        errors.append(relative_error(final.a, reference.a, BACKGROUND_A))
    return errors


def fit_order(dts: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(dt)``."""
    return float(np.polyfit(np.log(dts), np.log(errors), 1)[0])


def observed_order(method, id, t_final: float, dts: Sequence[float], dt_ref: float = 1e-5,
                   window: IndexWindow | None = None,
                   reference: LatticeStateAB | None = None) -> float:
    dts = [float(v) for v in dts]
    if len(dts) < 3:
        raise ValueError("need at least three time steps")
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise ValueError("time steps must be strictly decreasing")
    for dt in dts:
        StepperConfig(MethodKind(method), dt, t_final)
    errors = convergence_errors(method, id, t_final, dts, dt_ref, window, reference)
    return fit_order(dts, errors)


# -- energy -------------------------------------------------------------------


def energy_history(id, method, dt: float, t_final: float, sample_every: int = 100,
                   window: IndexWindow | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Times and relative energy errors ``(H(t) - H(0)) / max(|H(0)|, 1)``."""
    kind = id if isinstance(id, InitialDataKind) else InitialDataKind.parse(id)
    if window is None:
        window = default_window(id_spectrum(kind).s_max, t_final)
    times, energies = [], []
    for state in trajectory(make_id(kind, window), method, dt, t_final, sample_every):
        pq = state if isinstance(state, LatticeStatePQ) else inverse_flaschka(state)
        times.append(state.time)
        energies.append(hamiltonian(pq))
    energies = np.array(energies)
    return np.array(times), (energies - energies[0]) / max(abs(energies[0]), 1.0)
