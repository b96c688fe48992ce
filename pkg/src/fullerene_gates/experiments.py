"""Duration-vs-detuning sweeps, the degenerate optimum, coherence budgets and
spectrum tables, with CSV output."""

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import gates, spin_model
from .errors import ZeroDetuning

DEFAULT_Q_VALUES = (10, 7, 5)
GRID_MARGIN = 0.1
GRID_STEP = 0.05


@dataclass(frozen=True)
class SweepRow:
    delta1: float
    q: float
    delta_min: float
    effective_rabi: float
    duration: float
    fidelity_proxy: float


@dataclass(frozen=True)
class BudgetParams:
    t2: float = 20.0
    t1: float = 1e6

    def __post_init__(self):
        if not self.t2 > 0:
            raise ValueError("t2 must be positive")


@dataclass(frozen=True)
class Budget:
    count: int
    ratio: float


def singular_points(p):
    """δ₁ values where one of the four detunings vanishes."""
    return sorted({0.0, p.delta, p.j, p.j + p.delta})


def default_grid(p, step=GRID_STEP, margin=GRID_MARGIN):
    """δ₁ grid across (min(Δ, J), max(Δ, J)) with ``margin`` at both ends."""
    lo, hi = sorted((p.delta, p.j))
    n = int(round((hi - lo - 2 * margin) / step))
    return np.round(lo + margin + step * np.arange(n + 1), 10)


def sweep_point(p, q, delta1):
    cp = gates.CphaseParams.with_q(p, delta1, q)
    w = gates.effective_rabi(cp)
    return SweepRow(
        delta1=float(delta1),
        q=q,
        delta_min=gates.selectivity(cp).delta_min,
        effective_rabi=w,
        duration=2 * math.pi / abs(w),
        fidelity_proxy=gates.proxy_for_q(q),
    )


def sweep_cphase(p, q_values=DEFAULT_Q_VALUES, delta1_grid=None, workers=None):
    """One row per (q, δ₁), sorted by (q, δ₁) whatever the completion order."""
    grid = default_grid(p) if delta1_grid is None else np.asarray(delta1_grid, dtype=float)
    for d in grid:
        if any(abs(d - s) < 1e-12 for s in singular_points(p)):
            raise ZeroDetuning(f"grid point δ₁ = {d} makes a detuning vanish")
    jobs = [(q, d) for q in q_values for d in grid]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda job: sweep_point(p, *job), jobs))
    else:
        rows = [sweep_point(p, q, d) for q, d in jobs]
    return sorted(rows, key=lambda r: (r.q, r.delta1))


def optimum(rows, q):
    """Row of minimum duration for one q."""
    return min((r for r in rows if r.q == q), key=lambda r: r.duration)


def degenerate_optimum(p, q=7):
    """Equal Zeeman frequencies: all four detunings equal J/2."""
    if not math.isclose(p.omega1, p.omega2, rel_tol=0, abs_tol=1e-12 * max(1.0, abs(p.omega1))):
        raise ValueError("degenerate optimum requires omega1 == omega2")
    row = sweep_point(p, q, p.j / 2)
    return {"delta1": row.delta1, "duration": row.duration}


def gate_budget(b, gate_duration):
    """How many gates of ``gate_duration`` fit in T₂ (rounded half up)."""
    if not gate_duration > 0:
        raise ValueError("gate duration must be positive")
    ratio = b.t2 / gate_duration
    return Budget(count=int(math.floor(ratio + 0.5)), ratio=ratio)


def spectrum_tables(p):
    """Level table (sorted by energy) and transition groups."""
    levels = sorted(
        ((ma, mb, spin_model.eigenenergy(ma.m, mb.m, p)) for ma, mb in spin_model.basis_labels()),
        key=lambda r: (r[2], -r[0].m, -r[1].m),
    )
    lines = spin_model.transition_spectrum(p)
    groups = {}
    for line in lines:
        groups.setdefault(line.group_id, []).append(line)
    transitions = []
    for gid in sorted(groups):
        members = groups[gid]
        transitions.append({
            "group_id": gid,
            "frequency": members[0].frequency,
            "spins": tuple(sorted({m.spin for m in members})),
            "spectators": tuple(sorted({m.spectator_m for m in members})),
            "lines": tuple(members),
        })
    return {"levels": levels, "transitions": transitions}


# --- CSV / text output --------------------------------------------------------

def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(x)
    return f"{float(x):.9g}"


def sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(SweepRow)])
    for r in rows:
        w.writerow([_fmt(x) for x in astuple(r)])
    return buf.getvalue()


def levels_csv(tables):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m1", "m2", "energy"])
    for ma, mb, e in tables["levels"]:
        w.writerow([_fmt(float(ma)), _fmt(float(mb)), _fmt(e)])
    return buf.getvalue()


def transitions_csv(tables):
    lines = [line for g in tables["transitions"] for line in g["lines"]]
    return spin_model.spectrum_csv(lines)


def summary_report(p, rows, budget_params=BudgetParams(), rabi=25.0):
    out = [f"omega1 = {_fmt(p.omega1)}", f"omega2 = {_fmt(p.omega2)}", f"j = {_fmt(p.j)}", f"delta = {_fmt(p.delta)}"]
    for q in sorted({r.q for r in rows}):
        best = optimum(rows, q)
        b = gate_budget(budget_params, best.duration)
        out.append(
            f"q = {q}: optimum delta1 = {_fmt(best.delta1)}, duration = {_fmt(best.duration)}, "
            f"fidelity_proxy = {_fmt(best.fidelity_proxy)}, cphase_budget = {b.count} (ratio {_fmt(b.ratio)})"
        )
    cnot = gate_budget(budget_params, math.pi / rabi)
    out.append(f"cnot duration = {_fmt(math.pi / rabi)}, cnot_budget_ratio = {_fmt(cnot.ratio)}")
    return "\n".join(out) + "\n"
