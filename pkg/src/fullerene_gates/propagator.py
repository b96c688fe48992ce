"""Unitary propagation of schedules.

Frame-static segments are exponentiated exactly. Time-dependent segments use
the midpoint exponential ``U <- exp(-i H(t + dt/2) dt) U`` (second-order
Magnus truncation), which is exactly unitary per step and second order in
``dt`` globally. Step exponentials are computed in vectorised batches.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import pulses
from .densela import check_hermitian, herm_expm, herm_expm_batch, unitarity_defect
from .errors import InvalidStep
from .spin_model import DIM

SAMPLES_PER_PERIOD = 40
MIN_STEPS_PER_SEGMENT = 1000
_BATCH = 4096


@dataclass(frozen=True)
class PropagationResult:
    unitary: np.ndarray
    duration: float
    step_count: int
    unitarity_defect: float
    frame: pulses.FrameSpec = field(default_factory=pulses.FrameSpec.lab)
    # optional trajectory: sample times and propagators U(t) at those times
    times: np.ndarray = None
    trajectory: np.ndarray = None


def evolve_constant(h, duration, frame=None):
    """Exact propagator ``exp(-i h duration)`` for a time-independent ``h``."""
    h = check_hermitian(h)
    u = herm_expm(h, duration)
    return PropagationResult(
        unitary=u,
        duration=float(duration),
        step_count=1,
        unitarity_defect=unitarity_defect(u),
        frame=frame or pulses.FrameSpec.lab(),
    )


def default_dt(schedule):
    """``min(2π/ω_max/40, T/1000)`` over the driven segments of ``schedule``."""
    total = schedule.total_duration
    w_max = max(
        [pulses.max_frequency(schedule.params, seg.tones, schedule.frame) for seg in schedule.segments] or [0.0]
    )
    candidates = [total / MIN_STEPS_PER_SEGMENT] if total > 0 else []
    if w_max > 0:
        candidates.append(2 * math.pi / w_max / SAMPLES_PER_PERIOD)
    return min(candidates) if candidates else 1.0


def _segment_steps(duration, dt):
    return max(1, math.ceil(duration / dt - 1e-9))


def evolve_stepped(schedule, dt=None, record=False, exact_constant=False, columns=None, subspace=None):
    """Propagate ``schedule`` in its own frame with midpoint-exponential steps.

    Parameters
    ----------
    schedule : pulses.Schedule
    dt : float, optional
        Target step; each segment is split into ``ceil(duration/dt)`` equal
        steps. Defaults to :func:`default_dt`.
    record : bool
        Keep ``U(t)`` after every step (and at every segment boundary) in
        ``result.trajectory``.
    exact_constant : bool
        Exponentiate frame-static segments in one shot instead of stepping.
    columns : sequence of int, optional
        With ``record``, store only these columns of ``U(t)``.
    subspace : sequence of int, optional
        Propagate only inside this invariant set of basis states; the
        returned unitary is the restricted block. Hard pulses are not
        allowed in this mode.

    Raises
    ------
    InvalidStep
        If ``dt <= 0``.
    """
    if dt is None:
        dt = default_dt(schedule)
    if not dt > 0:
        raise InvalidStep(f"dt must be positive, got {dt}")

    params, frame = schedule.params, schedule.frame
    sub = None if subspace is None else np.asarray(subspace)
    dim = DIM if sub is None else sub.size
    cols = slice(None) if columns is None else np.asarray(columns)

    def ham(tones, ts):
        hs = pulses.hamiltonians(params, tones, frame, ts)
        return hs if sub is None else hs[:, sub][:, :, sub]

    u = np.eye(dim, dtype=complex)
    t0 = 0.0
    steps_total = 0
    times, traj = ([0.0], [u[:, cols].copy()]) if record else (None, None)

    for seg in schedule.segments:
        if seg.hard_pulses and sub is not None:
            raise ValueError("hard pulses cannot be propagated inside a subspace")
        for hp in seg.hard_pulses:
            u = pulses.hard_pulse_in_frame(hp, frame, t0) @ u
        if record and seg.hard_pulses:
            times.append(t0)
            traj.append(u[:, cols].copy())
        if seg.duration == 0:
            continue

        static = exact_constant and pulses.is_time_independent(params, seg.tones, frame)
        n = 1 if static else _segment_steps(seg.duration, dt)
        h = seg.duration / n
        if static:
            step = herm_expm(ham(seg.tones, [t0])[0], seg.duration)
            u = step @ u
            if record:
                times.append(t0 + seg.duration)
                traj.append(u[:, cols].copy())
        else:
            for start in range(0, n, _BATCH):
                k = np.arange(start, min(n, start + _BATCH))
                mids = t0 + (k + 0.5) * h
                steps = herm_expm_batch(ham(seg.tones, mids), np.full(k.size, h))
                for i, s in enumerate(steps):
                    u = s @ u
                    if record:
                        times.append(t0 + (k[i] + 1) * h)
                        traj.append(u[:, cols].copy())
        steps_total += n
        t0 += seg.duration

    return PropagationResult(
        unitary=u,
        duration=t0,
        step_count=steps_total,
        unitarity_defect=unitarity_defect(u),
        frame=frame,
        times=np.array(times) if record else None,
        trajectory=np.array(traj) if record else None,
    )


def sample_constant(h, times):
    """Propagators ``exp(-i h t)`` for many ``t`` from one diagonalisation."""
    h = check_hermitian(h)
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), evals))
    return (evecs[None] * phases[:, None, :]) @ evecs.conj().T[None]


def propagate(schedule, dt=None, record=False, columns=None):
    """Exact when every segment is frame-static, midpoint-stepped otherwise."""
    return evolve_stepped(schedule, dt=dt, record=record, exact_constant=True, columns=columns)


def convergence_ratio(schedule, dt=None):
    """Error ratio ‖U_dt − U_ref‖ / ‖U_{dt/2} − U_ref‖ with U_ref at dt/8.

    Second-order convergence gives a value close to 4.
    """
    if dt is None:
        dt = default_dt(schedule)
    # step counts must halve exactly, so work from a whole number of steps
    n = _segment_steps(schedule.total_duration, dt)
    dt = schedule.total_duration / n
    ref = evolve_stepped(schedule, dt / 8).unitary
    e1 = np.linalg.norm(evolve_stepped(schedule, dt).unitary - ref)
    e2 = np.linalg.norm(evolve_stepped(schedule, dt / 2).unitary - ref)
    return float(e1 / e2) if e2 > 0 else math.inf
