"""Parameter-grid sweeps over (g_tilde, eta) with workers and resume.

Completed points are streamed to a journal (records.jsonl) as they
finish, so a killed sweep loses at most its in-flight points; the final
records.csv is written sorted by grid index, making the output
byte-identical for a fixed plan and seed regardless of worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    fit_exponential_saturation,
    temporal_fluctuations,
    windowed_time_average,
)
from .classical import Phase, classify_phase, integrate, lyapunov_exponent
from .model import (
    CutoffExceededError,
    DimensionlessView,
    InitialCondition,
    build_initial_classical,
    build_initial_quantum,
    from_dimensionless,
)

__all__ = [
    "SweepPlan",
    "SweepResult",
    "PointRecord",
    "BoundaryCurve",
    "PlanMismatchError",
    "run_sweep",
    "resume_sweep",
    "boundary_extract",
]

TASKS = ("classical-phase", "lyapunov-map", "quantum-map")

DEFAULT_SETTINGS = {
    "classical-phase": {
        "theta0": 0.0,
        "beta0": 1.0,
        "g": 1.0,
        "t_final": 2000.0,
        "tol": 1e-10,
        "sample_dt": 0.1,
        "threshold": 0.1,
        "method": "auto",
        "keep_traces": False,
    },
    "lyapunov-map": {
        "theta0": 0.0,
        "beta0": 1.0,
        "g": 1.0,
        "t_total": 2000.0,
        "t_transient": 100.0,
        "renorm_dt": 1.0,
        "d0": 1e-8,
        "tol": 1e-9,
    },
    "quantum-map": {
        "theta0": 0.0,
        "beta0": 1.0,
        "g": 1.0,
        "n_spins": 40,
        "t_final": 300.0,
        "eps": 1e-6,
        "tau_check": 1.0,
        "delta_n": 8,
        "sample_dt": 0.1,
        "krylov_tol": 1e-10,
        "window_t0": 150.0,
        "window_horizon": 150.0,
        "fit_target": "sz_var",
        "ceiling": 4096,
        "wall_budget_s": 900.0,
    },
}

PAYLOAD_COLUMNS = {
    "classical-phase": ["label", "sz_bar", "x_bar", "confidence"],
    "lyapunov-map": ["lambda", "lambda_raw", "n_renorms"],
    "quantum-map": ["svn_bar", "svn_fluct", "gamma", "fit_converged", "sz_bar",
                    "n_max_peak"],
}


class PlanMismatchError(RuntimeError):
    """The output directory belongs to a different plan."""


@dataclass(frozen=True)
class SweepPlan:
    """Grid over g_tilde (linear) and eta (linear or log) for one task."""

    g_tilde_axis: tuple  # (min, max, count)
    eta_axis: tuple  # (min, max, count, "linear"|"log")
    task: str
    output_dir: str
    settings: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if len(self.g_tilde_axis) != 3 or self.g_tilde_axis[2] < 1:
            raise ValueError("g_tilde_axis must be (min, max, count >= 1)")
        if len(self.eta_axis) != 4 or self.eta_axis[2] < 1:
            raise ValueError("eta_axis must be (min, max, count >= 1, spacing)")
        if self.eta_axis[3] not in ("linear", "log"):
            raise ValueError("eta spacing must be 'linear' or 'log'")
        if self.eta_axis[3] == "log" and (self.eta_axis[0] <= 0 or self.eta_axis[1] <= 0):
            raise ValueError("log spacing requires positive eta bounds")
        unknown = set(self.settings) - set(DEFAULT_SETTINGS[self.task])
        if unknown:
            raise ValueError(f"unknown settings for {self.task}: {sorted(unknown)}")

    def g_values(self) -> np.ndarray:
        lo, hi, n = self.g_tilde_axis
        return np.linspace(lo, hi, int(n))

    def eta_values(self) -> np.ndarray:
        lo, hi, n, spacing = self.eta_axis
        if spacing == "log":
            return np.geomspace(lo, hi, int(n))
        return np.linspace(lo, hi, int(n))

    def resolved_settings(self) -> dict:
        return {**DEFAULT_SETTINGS[self.task], **self.settings}

    def points(self):
        for i in range(int(self.g_tilde_axis[2])):
            for j in range(int(self.eta_axis[2])):
                yield i, j

    def n_points(self) -> int:
        return int(self.g_tilde_axis[2]) * int(self.eta_axis[2])

    def canonical_dict(self) -> dict:
        return {
            "g_tilde_axis": list(self.g_tilde_axis),
            "eta_axis": list(self.eta_axis),
            "task": self.task,
            "settings": self.resolved_settings(),
            "seed": self.seed,
        }

    def plan_hash(self) -> str:
        from .io import canonical_json

        return hashlib.sha256(canonical_json(self.canonical_dict()).encode()).hexdigest()


@dataclass(frozen=True)
class PointRecord:
    i: int
    j: int
    g_tilde: float
    eta: float
    status: str  # done | failed | excluded
    payload: dict
    error: str | None = None


@dataclass
class SweepResult:
    records: list
    plan_hash: str
    tool_version: str
    wall_time: float
    executed: int = 0
    reused: int = 0

    def by_index(self) -> dict:
        return {(r.i, r.j): r for r in self.records}

    def grid(self, key: str, fill=math.nan) -> np.ndarray:
        """Payload field as a (n_g_tilde, n_eta) array (NaN where absent)."""
        ni = max(r.i for r in self.records) + 1
        nj = max(r.j for r in self.records) + 1
        out = np.full((ni, nj), fill, dtype=float)
        for r in self.records:
            if key in r.payload:
                value = r.payload[key]
                if isinstance(value, (int, float)):
                    out[r.i, r.j] = value
        return out


def _point_seed(plan_seed: int, i: int, j: int) -> int:
    return int(np.random.SeedSequence((plan_seed, i, j)).generate_state(1)[0])


def _execute_point(plan: SweepPlan, i: int, j: int) -> dict:
    g_tilde = float(plan.g_values()[i])
    eta = float(plan.eta_values()[j])
    settings = plan.resolved_settings()
    base = {"i": i, "j": j, "g_tilde": g_tilde, "eta": eta}
    try:
        if plan.task == "classical-phase":
            payload = _classical_phase_point(plan, g_tilde, eta, settings, i, j)
        elif plan.task == "lyapunov-map":
            payload = _lyapunov_point(plan, g_tilde, eta, settings, i, j)
        else:
            payload = _quantum_point(plan, g_tilde, eta, settings, i, j)
        return {**base, "status": "done", "payload": payload, "error": None}
    except CutoffExceededError as err:
        return {
            **base,
            "status": "excluded",
            "payload": {},
            "error": f"fock ceiling: {err}",
        }
    except _BudgetExceeded as err:
        return {
            **base,
            "status": "excluded",
            "payload": {},
            "error": f"wall budget: {err}",
        }
    except Exception as err:  # noqa: BLE001 - failures become retryable records
        return {
            **base,
            "status": "failed",
            "payload": {},
            "error": f"{type(err).__name__}: {err}",
        }


def _classical_phase_point(plan, g_tilde, eta, settings, i, j) -> dict:
    view = DimensionlessView(g_tilde=g_tilde, eta=eta)
    ic = InitialCondition(theta0=settings["theta0"], beta0=settings["beta0"])
    x0 = build_initial_classical(ic)
    traj = integrate(
        x0,
        view,
        t_final=settings["t_final"],
        tol=settings["tol"],
        sample_dt=settings["sample_dt"],
        g=settings["g"],
        method=settings["method"],
    )
    label = classify_phase(traj, threshold=settings["threshold"])
    if settings.get("keep_traces"):
        tdir = Path(plan.output_dir) / "traces"
        traj.to_csv(tdir / f"trace_{i:04d}_{j:04d}.csv",
                    tdir / f"trace_{i:04d}_{j:04d}.json")
    return {
        "label": label.label.value,
        "sz_bar": label.order_parameter_sz,
        "x_bar": label.order_parameter_x,
        "confidence": label.confidence,
    }


def _lyapunov_point(plan, g_tilde, eta, settings, i, j) -> dict:
    view = DimensionlessView(g_tilde=g_tilde, eta=eta)
    ic = InitialCondition(theta0=settings["theta0"], beta0=settings["beta0"])
    x0 = build_initial_classical(ic)
    result = lyapunov_exponent(
        x0,
        view,
        t_total=settings["t_total"],
        t_transient=settings["t_transient"],
        renorm_dt=settings["renorm_dt"],
        seed=_point_seed(plan.seed, i, j),
        d0=settings["d0"],
        g=settings["g"],
        tol=settings["tol"],
    )
    return {
        "lambda": result.lam,
        "lambda_raw": result.lam_raw,
        "n_renorms": result.n_renorms,
    }


class _BudgetExceeded(RuntimeError):
    pass


def _quantum_point(plan, g_tilde, eta, settings, i, j) -> dict:
    from .quantum import BudgetExceededError, propagate_adaptive

    view = DimensionlessView(g_tilde=g_tilde, eta=eta)
    params = from_dimensionless(view, g=settings["g"], n_spins=int(settings["n_spins"]))
    ic = InitialCondition(theta0=settings["theta0"], beta0=settings["beta0"])
    psi0 = build_initial_quantum(params, ic, eps=settings["eps"],
                                 ceiling=int(settings["ceiling"]))
    try:
        traj = propagate_adaptive(
            psi0,
            params,
            t_final=settings["t_final"],
            eps=settings["eps"],
            tau_check=settings["tau_check"],
            delta_n=int(settings["delta_n"]),
            sample_dt=settings["sample_dt"],
            krylov_tol=settings["krylov_tol"],
            ceiling=int(settings["ceiling"]),
            wall_budget_s=settings["wall_budget_s"],
        )
    except BudgetExceededError as err:
        raise _BudgetExceeded(str(err)) from err
    t0 = settings["window_t0"]
    horizon = settings["window_horizon"]
    svn = traj.data["svn"]
    svn_bar = windowed_time_average(traj.times, svn, t0, horizon)
    svn_fluct = temporal_fluctuations(traj.times, svn, t0, horizon)
    sz_norm = traj.data["sz"] / (params.n_spins / 2.0)
    sz_bar = windowed_time_average(traj.times, sz_norm, t0, horizon)
    fit = fit_exponential_saturation(traj.times, traj.column(settings["fit_target"]))
    return {
        "svn_bar": svn_bar,
        "svn_fluct": svn_fluct,
        "gamma": fit.gamma_effective if fit.converged else math.nan,
        "fit_converged": fit.converged,
        "sz_bar": sz_bar,
        "n_max_peak": int(np.max(traj.n_max)),
    }


def _journal_path(output_dir) -> Path:
    return Path(output_dir) / "records.jsonl"


def _append_journal(path: Path, record: dict, plan_hash: str) -> None:
    from .io import canonical_json

    entry = {**record, "plan_hash": plan_hash, "wall_time": time.time()}
    with open(path, "a") as fh:
        fh.write(canonical_json(entry) + "\n")
        fh.flush()


def _load_journal(path: Path, plan: SweepPlan) -> dict:
    """First valid record per grid point; invalid lines are skipped."""
    records: dict[tuple, dict] = {}
    if not path.exists():
        return records
    plan_hash = plan.plan_hash()
    ni, nj = int(plan.g_tilde_axis[2]), int(plan.eta_axis[2])
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
                i, j = int(entry["i"]), int(entry["j"])
                if entry.get("plan_hash") != plan_hash:
                    continue
                if not (0 <= i < ni and 0 <= j < nj):
                    continue
                if entry["status"] not in ("done", "failed", "excluded"):
                    continue
                if not isinstance(entry["payload"], dict):
                    continue
            except (ValueError, KeyError, TypeError):
                continue
            records.setdefault((i, j), entry)
    return records


def _write_records_csv(plan: SweepPlan, records: list) -> None:
    from .io import write_csv

    columns = PAYLOAD_COLUMNS[plan.task]
    header = ["i", "j", "g_tilde", "eta", "status"] + columns + ["error"]
    rows = []
    for r in records:
        rows.append(
            [r.i, r.j, r.g_tilde, r.eta, r.status]
            + [r.payload.get(c, "") for c in columns]
            + [r.error or ""]
        )
    write_csv(Path(plan.output_dir) / "records.csv", header, rows)


def _finalize(plan, by_index, t_start, executed, reused) -> SweepResult:
    missing = [p for p in plan.points() if p not in by_index]
    if missing:
        raise RuntimeError(f"sweep incomplete: missing points {missing[:5]}...")
    records = [
        PointRecord(
            i=e["i"], j=e["j"], g_tilde=e["g_tilde"], eta=e["eta"],
            status=e["status"], payload=e["payload"], error=e["error"] or None,
        )
        for e in (by_index[p] for p in sorted(by_index))
    ]
    _write_records_csv(plan, records)
    return SweepResult(
        records=records,
        plan_hash=plan.plan_hash(),
        tool_version=__version__,
        wall_time=time.monotonic() - t_start,
        executed=executed,
        reused=reused,
    )


def _execute_points(plan: SweepPlan, todo: list, workers: int, journal: Path,
                    by_index: dict) -> int:
    plan_hash = plan.plan_hash()
    if workers <= 1:
        for i, j in todo:
            record = _execute_point(plan, i, j)
            _append_journal(journal, record, plan_hash)
            by_index[(i, j)] = record
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_execute_point, plan, i, j): (i, j) for i, j in todo}
            for fut in as_completed(futures):
                record = fut.result()
                _append_journal(journal, record, plan_hash)
                by_index[(record["i"], record["j"])] = record
    return len(todo)


def run_sweep(plan: SweepPlan, workers: int = 1) -> SweepResult:
    """Execute every point of the plan, streaming results to disk.

    Ceiling/budget blowups are recorded as status 'excluded' with a
    reason; unexpected exceptions as 'failed' (retryable by resume).
    """
    from .io import write_json

    t_start = time.monotonic()
    out = Path(plan.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "plan.json",
               {**plan.canonical_dict(), "plan_hash": plan.plan_hash()})
    journal = _journal_path(out)
    journal.write_text("")  # fresh run
    by_index: dict[tuple, dict] = {}
    executed = _execute_points(plan, list(plan.points()), workers, journal, by_index)
    return _finalize(plan, by_index, t_start, executed, reused=0)


def resume_sweep(plan: SweepPlan, workers: int = 1) -> SweepResult:
    """Complete a partial run: only missing or failed points re-execute."""
    t_start = time.monotonic()
    out = Path(plan.output_dir)
    plan_file = out / "plan.json"
    if not plan_file.exists():
        raise PlanMismatchError(f"no prior run in {out} (plan.json missing)")
    prior = json.loads(plan_file.read_text())
    if prior.get("plan_hash") != plan.plan_hash():
        raise PlanMismatchError(
            f"plan hash mismatch: directory has {prior.get('plan_hash')}, "
            f"plan is {plan.plan_hash()}"
        )
    journal = _journal_path(out)
    by_index = _load_journal(journal, plan)
    reusable = {k: e for k, e in by_index.items() if e["status"] != "failed"}
    todo = [p for p in plan.points() if p not in reusable]
    by_index = dict(reusable)
    executed = _execute_points(plan, todo, workers, journal, by_index)
    return _finalize(plan, by_index, t_start, executed, reused=len(reusable))


@dataclass
class BoundaryCurve:
    """g_tilde_crit(eta) extracted from a classical-phase sweep."""

    points: list  # (eta, g_tilde_crit)
    notes: list

    def to_csv(self, path) -> None:
        from .io import write_csv

        write_csv(path, ["eta", "g_tilde_crit"], self.points)


def boundary_extract(result: SweepResult, threshold: float = 0.1) -> BoundaryCurve:
    """Per eta column, the first untrapped->trapped flip along ascending
    g_tilde, with g_tilde interpolated at the |sz_bar| = threshold crossing."""
    by_index = result.by_index()
    if not by_index:
        raise ValueError("empty sweep result")
    if "sz_bar" not in next(iter(by_index.values())).payload:
        raise ValueError("boundary_extract requires a classical-phase sweep")
    nj = max(j for _, j in by_index) + 1
    ni = max(i for i, _ in by_index) + 1
    points = []
    notes = []
    for j in range(nj):
        column = [by_index.get((i, j)) for i in range(ni)]
        usable = [r for r in column if r is not None and r.status == "done"]
        if len(usable) < 2:
            notes.append(f"eta column {j}: not enough usable points")
            continue
        usable.sort(key=lambda r: r.g_tilde)
        eta = usable[0].eta
        found = False
        for a, b in zip(usable[:-1], usable[1:]):
            ya = abs(a.payload["sz_bar"])
            yb = abs(b.payload["sz_bar"])
            if ya <= threshold < yb:
                frac = (threshold - ya) / (yb - ya)
                points.append((eta, a.g_tilde + frac * (b.g_tilde - a.g_tilde)))
                found = True
                break
        if not found:
            notes.append(f"eta={eta:g}: no untrapped->trapped flip in range")
    return BoundaryCurve(points=points, notes=notes)
