"""Gate schedules (CNOT, single-qubit flip, two-tone CPHASE), the closed-form
two-photon model, and fidelity / leakage metrics.

Qubits live in |±3/2⟩ of each spin (|+3/2⟩ = logical 0, |−3/2⟩ = logical 1);
the computational subspace is span{|±3/2⟩⊗|±3/2⟩}, ordered
|3/2,3/2⟩, |3/2,−3/2⟩, |−3/2,3/2⟩, |−3/2,−3/2⟩.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from . import propagator, pulses, spin_model
from .densela import unitarity_defect
from .errors import ZeroDetuning
from .pulses import DriveModel, Schedule, Segment, Tone
from .spin_model import basis_index

COMPUTATIONAL = tuple(basis_index(a, b) for a in (1.5, -1.5) for b in (1.5, -1.5))
GROUND = basis_index(-1.5, -1.5)
DOUBLY_EXCITED = basis_index(-0.5, -0.5)
INTERMEDIATES = (basis_index(-0.5, -1.5), basis_index(-1.5, -0.5))
# the four states the two-tone drive connects, reachable from |−3/2,−3/2⟩
TWO_PHOTON_BLOCK = (GROUND, INTERMEDIATES[0], INTERMEDIATES[1], DOUBLY_EXCITED)

# relative phase of the second tone; makes the closed-form rate exact when the
# two carriers coincide (δ₁ = (J + Δ)/2)
DEFAULT_PHI2 = math.pi / 2


class GateKind(enum.Enum):
    CNOT_AB = "CNOT_AB"
    CNOT_BA = "CNOT_BA"
    FLIP_A = "FLIP_A"
    FLIP_B = "FLIP_B"
    CPHASE = "CPHASE"


def _other(spin):
    return "B" if spin == "A" else "A"


def target_unitary(kind):
    """Ideal 4x4 action on the computational subspace."""
    kind = GateKind(kind)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    i2 = np.eye(2, dtype=complex)
    if kind is GateKind.CPHASE:
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind is GateKind.FLIP_A:
        return np.kron(x, i2)
    if kind is GateKind.FLIP_B:
        return np.kron(i2, x)
    # control in logical 1 (|−3/2⟩) flips the target
    p0, p1 = np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex)
    if kind is GateKind.CNOT_AB:
        return np.kron(p0, i2) + np.kron(p1, x)
    return np.kron(i2, p0) + np.kron(x, p1)


# --- schedules ----------------------------------------------------------------

def cnot_carrier(control, p):
    """Carrier selecting the control-in-|−3/2⟩ manifold of the target's ladder.

    Read off the computed transition spectrum (energy differences), so it is
    2ω+Δ−3J/2 for control A and 2ω−3J/2 for control B by construction of H.
    """
    target = _other(control)
    for line in spin_model.transition_spectrum(p):
        if line.spin == target and float(line.spectator_m) == -1.5:
            return line.frequency
    raise AssertionError("spectrum lacks the control-in-|−3/2⟩ line")


def cnot_schedule(control, p, rabi):
    """π pulse on the target ladder, resonant only when the control is |−3/2⟩.

    The schedule is returned in the frame rotating at the carrier on the
    target spin, where its Hamiltonian is time independent.
    """
    if not rabi > 0:
        raise ValueError("rabi frequency must be positive")
    target = _other(control)
    carrier = cnot_carrier(control, p)
    tone = Tone(target, DriveModel.LADDER, carrier, rabi)
    return Schedule(p, (Segment(math.pi / rabi, (tone,)),), pulses.rotating_frame(carrier, target))


def flip_schedule(target, p, rabi):
    """Two simultaneous ladder tones at 2ω_target ± 3J/2 (flip for spectator |±3/2⟩)."""
    if not rabi > 0:
        raise ValueError("rabi frequency must be positive")
    tones = tuple(
        Tone(target, DriveModel.LADDER, spin_model.transition_frequency(target, m, p), rabi)
        for m in (-1.5, 1.5)
    )
    return Schedule(p, (Segment(math.pi / rabi, tones),), pulses.interaction_frame(p))


@dataclass(frozen=True)
class CphaseParams:
    """Two-tone CPHASE configuration.

    Carriers are derived so that both two-photon paths are resonant:
    ``ω_s1 = ω_A + δ₁`` and ``ω_s2 = ω_B + J − δ₁``.
    """

    omega_a: float
    omega_b: float
    j: float
    rabi_a: float
    rabi_b: float
    delta1: float
    phi1: float = 0.0
    phi2: float = DEFAULT_PHI2

    def __post_init__(self):
        scale = max(1.0, abs(self.j), abs(self.omega_b - self.omega_a))
        for k, d in enumerate(self.detunings, start=1):
            if abs(d) <= 1e-12 * scale:
                raise ZeroDetuning(f"detuning δ{k} vanishes for δ₁ = {self.delta1}")

    @classmethod
    def from_system(cls, p, delta1, rabi_a, rabi_b=None, phi1=0.0, phi2=DEFAULT_PHI2):
        return cls(
            omega_a=2 * p.omega1 - 1.5 * p.j,
            omega_b=2 * p.omega2 - 1.5 * p.j,
            j=p.j,
            rabi_a=rabi_a,
            rabi_b=rabi_a if rabi_b is None else rabi_b,
            delta1=delta1,
            phi1=phi1,
            phi2=phi2,
        )

    @classmethod
    def with_q(cls, p, delta1, q, phi1=0.0, phi2=DEFAULT_PHI2):
        """Equal Rabi frequencies Ω_A = Ω_B = 2δ_min/q."""
        d_min = min(abs(d) for d in detunings_for(p, delta1))
        if d_min == 0:
            raise ZeroDetuning(f"a detuning vanishes for δ₁ = {delta1}")
        rabi = 2 * d_min / q
        return cls.from_system(p, delta1, rabi, rabi, phi1, phi2)

    @property
    def carrier1(self):
        return self.omega_a + self.delta1

    @property
    def carrier2(self):
        return self.omega_b + self.j - self.delta1

    @property
    def delta2(self):
        return self.carrier1 - self.omega_b

    @property
    def delta3(self):
        return self.carrier2 - self.omega_b

    @property
    def delta4(self):
        return self.carrier2 - self.omega_a

    @property
    def detunings(self):
        return (self.delta1, self.delta2, self.delta3, self.delta4)


def detunings_for(p, delta1):
    """(δ₁, δ₂, δ₃, δ₄) = (δ₁, δ₁ − Δ, J − δ₁, J + Δ − δ₁)."""
    return (delta1, delta1 - p.delta, p.j - delta1, p.j + p.delta - delta1)


def effective_rabi(cp):
    """Two-photon Rabi frequency ``Ω̃ = (Ω_A Ω_B / 2) Σ 1/δᵢ``."""
    if any(d == 0 for d in cp.detunings):
        raise ZeroDetuning("effective rabi frequency is singular at zero detuning")
    return 0.5 * cp.rabi_a * cp.rabi_b * math.fsum(1.0 / d for d in cp.detunings)


def cphase_duration(cp):
    return 2 * math.pi / abs(effective_rabi(cp))


def cphase_schedule(cp, p):
    """Both tones drive |−3/2⟩↔|−1/2⟩ on both spins for T = 2π/Ω̃.

    Returned in the frame generated by the full static Hamiltonian.
    """
    tones = []
    for spin, rabi in (("A", cp.rabi_a), ("B", cp.rabi_b)):
        tones.append(Tone(spin, DriveModel.TWO_LEVEL, cp.carrier1, rabi, cp.phi1))
        tones.append(Tone(spin, DriveModel.TWO_LEVEL, cp.carrier2, rabi, cp.phi2))
    return Schedule(p, (Segment(cphase_duration(cp), tuple(tones)),), pulses.interaction_frame(p))


@dataclass(frozen=True)
class SelectivityMetrics:
    omega0: float
    delta_min: float
    p: float
    n_tilde: float

    @property
    def fidelity_proxy(self):
        return 1.0 - self.n_tilde


def selectivity(cp):
    """P = Ω₀/(2δ_min) and the intermediate-excitation estimate ñ = 2P²."""
    d_min = min(abs(d) for d in cp.detunings)
    if d_min == 0:
        raise ZeroDetuning("selectivity undefined at zero detuning")
    omega0 = max(cp.rabi_a, cp.rabi_b)
    big_p = omega0 / (2 * d_min)
    return SelectivityMetrics(omega0=omega0, delta_min=d_min, p=big_p, n_tilde=2 * big_p**2)


def proxy_for_q(q):
    """Fidelity proxy 1 − 2/q² for Ω_A = Ω_B = 2δ_min/q."""
    return 1.0 - 2.0 / q**2


def effective_evolution(cp, t):
    """Closed-form 2x2 evolution on span{|−3/2,−3/2⟩, |−1/2,−1/2⟩}.

    Schrödinger picture with |−3/2,−3/2⟩ as energy zero, so the doubly
    excited state carries e^{−i(ω_A+ω_B+J)t}.
    """
    w = effective_rabi(cp)
    c, s = math.cos(w * t / 2), math.sin(w * t / 2)
    free = np.exp(-1j * (cp.omega_a + cp.omega_b + cp.j) * t)
    phi = cp.phi1 + cp.phi2
    return np.array([
        [c, -1j * np.exp(1j * phi) * s],
        [-1j * free * np.exp(-1j * phi) * s, free * c],
    ])


@dataclass(frozen=True)
class TwoPhotonFit:
    effective_rabi: float
    fitted_rabi: float
    max_intermediate: float
    mean_intermediate: float
    times: np.ndarray = field(repr=False)
    populations: np.ndarray = field(repr=False)

    @property
    def relative_deviation(self):
        return abs(self.fitted_rabi - self.effective_rabi) / abs(self.effective_rabi)


def two_photon_dynamics(cp, p, periods=1.0, dt=None):
    """Simulate the exact two-tone dynamics from |−3/2,−3/2⟩ and fit Ω̃.

    Only the four states reachable from |−3/2,−3/2⟩ are coupled by the
    drive, so the evolution is restricted to that block. The doubly
    excited population is fitted to ``a·sin²(wt/2) + c``.

    Parameters
    ----------
    cp : CphaseParams
    p : SystemParams
    periods : float
        Simulated time in units of 2π/Ω̃.
    dt : float, optional
        Step; defaults to 40 samples per period of the largest detuning.

    Returns
    -------
    TwoPhotonFit
        ``populations`` has columns for TWO_PHOTON_BLOCK in order.
    """
    w = effective_rabi(cp)
    tones = cphase_schedule(cp, p).segments[0].tones
    duration = periods * 2 * math.pi / abs(w)
    sched = Schedule(p, (Segment(duration, tones),), pulses.interaction_frame(p))
    if dt is None:
        dt = 2 * math.pi / max(abs(d) for d in cp.detunings) / propagator.SAMPLES_PER_PERIOD
    res = propagator.evolve_stepped(sched, dt, record=True, columns=[0], subspace=TWO_PHOTON_BLOCK)
    pops = np.abs(res.trajectory[:, :, 0]) ** 2
    excited = pops[:, 3]
    inter = pops[:, 1] + pops[:, 2]

    def model(t, a, freq, c):
        return a * np.sin(freq * t / 2) ** 2 + c

    popt, _ = curve_fit(model, res.times, excited, p0=[1.0, abs(w), 0.0])
    return TwoPhotonFit(
        effective_rabi=abs(w),
        fitted_rabi=abs(float(popt[1])),
        max_intermediate=float(inter.max()),
        mean_intermediate=float(inter.mean()),
        times=res.times,
        populations=pops,
    )


# --- metrics ------------------------------------------------------------------

def computational_block(u):
    return np.asarray(u)[np.ix_(COMPUTATIONAL, COMPUTATIONAL)]


def fidelity_exact(u_actual, u_target):
    """|Tr(U_target† · U_actual)| / 4 over the computational subspace.

    ``u_actual`` may be 16x16 (restricted here) or already 4x4.
    """
    m = computational_block(u_actual) if np.shape(u_actual)[0] == spin_model.DIM else np.asarray(u_actual)
    return float(min(1.0, abs(np.trace(np.asarray(u_target).conj().T @ m)) / 4))


def fidelity_phase_insensitive(u_actual, u_target):
    """Fidelity after removing the best diagonal phase on each output state.

    Maximising |Tr(D · T† M)| over diagonal unitaries D gives Σᵢ |(T† M)ᵢᵢ| / 4.
    """
    m = computational_block(u_actual) if np.shape(u_actual)[0] == spin_model.DIM else np.asarray(u_actual)
    return float(min(1.0, np.sum(np.abs(np.diag(np.asarray(u_target).conj().T @ m))) / 4))


def auxiliary_states(kind, p=None):
    """States a gate is designed to pass through (not counted as leakage)."""
    kind = GateKind(kind)
    if kind is GateKind.CPHASE:
        return (DOUBLY_EXCITED,)
    target = {
        GateKind.CNOT_AB: "B", GateKind.CNOT_BA: "A", GateKind.FLIP_A: "A", GateKind.FLIP_B: "B",
    }[kind]
    states = []
    for m_t in (0.5, -0.5):
        for m_o in (1.5, -1.5):
            states.append(basis_index(m_t, m_o) if target == "A" else basis_index(m_o, m_t))
    return tuple(states)


@dataclass
class GateReport:
    gate_kind: GateKind
    unitary: np.ndarray
    duration: float
    fidelity_exact: float
    fidelity_phase_insensitive: float
    leakage: float
    final_leakage: float
    unitarity_defect: float
    step_count: int
    frame: str = "interaction"
    metrics: SelectivityMetrics = None
    trajectory_times: np.ndarray = field(default=None, repr=False)
    trajectory_populations: np.ndarray = field(default=None, repr=False)

    @property
    def computational(self):
        return computational_block(self.unitary)

    @property
    def phases(self):
        """Phase of each diagonal entry of T†M (rad)."""
        m = target_unitary(self.gate_kind).conj().T @ self.computational
        return np.angle(np.diag(m))

    def to_text(self):
        lines = [
            f"gate_kind = {self.gate_kind.value}",
            f"frame = {self.frame}",
            f"duration = {self.duration:.9g}",
            f"fidelity_exact = {self.fidelity_exact:.9g}",
            f"fidelity_phase_insensitive = {self.fidelity_phase_insensitive:.9g}",
            f"leakage = {self.leakage:.9g}",
            f"final_leakage = {self.final_leakage:.9g}",
            f"unitarity_defect = {self.unitarity_defect:.9g}",
            f"step_count = {self.step_count}",
            "phases = " + ", ".join(f"{x:.9g}" for x in self.phases),
        ]
        if self.metrics is not None:
            m = self.metrics
            lines += [
                f"omega0 = {m.omega0:.9g}",
                f"delta_min = {m.delta_min:.9g}",
                f"p = {m.p:.9g}",
                f"n_tilde = {m.n_tilde:.9g}",
                f"fidelity_proxy = {m.fidelity_proxy:.9g}",
            ]
        return "\n".join(lines) + "\n"


def _trajectory(schedule, dt, samples):
    """(times, U(t)[:, computational]) sampled through the schedule."""
    segs = schedule.segments
    if len(segs) == 1 and pulses.is_time_independent(schedule.params, segs[0].tones, schedule.frame):
        seg = segs[0]
        h = pulses.hamiltonians(schedule.params, seg.tones, schedule.frame, [0.0])[0]
        w = pulses.max_frequency(schedule.params, seg.tones, schedule.frame)
        n = max(samples, int(seg.duration * w / (2 * math.pi) * propagator.SAMPLES_PER_PERIOD))
        times = np.linspace(0.0, seg.duration, n + 1)
        us = propagator.sample_constant(h, times)
        return times, us[:, :, COMPUTATIONAL], us[-1], 1
    res = propagator.evolve_stepped(schedule, dt=dt, record=True, columns=COMPUTATIONAL)
    return res.times, res.trajectory, res.unitary, res.step_count


def run_gate(schedule, kind, dt=None, target=None, samples=2000, keep_trajectory=False, metrics=None):
    """Propagate a gate schedule and score it against its ideal action.

    The reported unitary is moved to the interaction frame of the static
    Hamiltonian, so free-evolution phases (removed separately by refocusing)
    do not show up as gate errors. ``leakage`` is the largest population
    found, over the sampled evolution and over the four computational input
    states, outside the computational subspace and the gate's designed
    auxiliary states; ``final_leakage`` is the population outside the
    computational subspace at the end.
    """
    kind = GateKind(kind)
    target = target_unitary(kind) if target is None else np.asarray(target)
    times, traj, u_sched, steps = _trajectory(schedule, dt, samples)
    inter = pulses.interaction_frame(schedule.params)
    total = schedule.total_duration
    u = pulses.to_frame(u_sched, schedule.frame, inter, total)

    pops = np.abs(traj) ** 2  # (n_t, 16, 4)
    allowed = list(COMPUTATIONAL) + list(auxiliary_states(kind))
    outside = np.ones(spin_model.DIM, dtype=bool)
    outside[allowed] = False
    leak = float(np.max(pops[:, outside, :].sum(axis=1))) if outside.any() else 0.0
    not_comp = np.ones(spin_model.DIM, dtype=bool)
    not_comp[list(COMPUTATIONAL)] = False
    final_leak = float(np.max((np.abs(u[not_comp][:, COMPUTATIONAL]) ** 2).sum(axis=0)))

    return GateReport(
        gate_kind=kind,
        unitary=u,
        duration=total,
        fidelity_exact=fidelity_exact(u, target),
        fidelity_phase_insensitive=fidelity_phase_insensitive(u, target),
        leakage=leak,
        final_leakage=final_leak,
        unitarity_defect=unitarity_defect(u),
        step_count=steps,
        metrics=metrics,
        trajectory_times=times if keep_trajectory else None,
        trajectory_populations=pops if keep_trajectory else None,
    )


def run_cnot(control, p, rabi, **kw):
    kind = GateKind.CNOT_AB if control == "A" else GateKind.CNOT_BA
    return run_gate(cnot_schedule(control, p, rabi), kind, **kw)


def run_flip(target, p, rabi, **kw):
    kind = GateKind.FLIP_A if target == "A" else GateKind.FLIP_B
    return run_gate(flip_schedule(target, p, rabi), kind, **kw)


def run_cphase(cp, p, **kw):
    return run_gate(cphase_schedule(cp, p), GateKind.CPHASE, metrics=selectivity(cp), **kw)


def off_resonant_excursion(control, p, rabi, samples=2000):
    """Worst transient flip of the target when the control is |+3/2⟩.

    Maximum, over the π pulse and over both target inputs |±3/2⟩, of the
    population driven out of the initial state. This is the conditional
    selectivity error of the CNOT; it scales as (Ω/J)².
    """
    sched = cnot_schedule(control, p, rabi)
    times, traj, _, _ = _trajectory(sched, None, samples)
    worst = 0.0
    for m_t in (1.5, -1.5):
        start = basis_index(1.5, m_t) if control == "A" else basis_index(m_t, 1.5)
        col = COMPUTATIONAL.index(start)
        worst = max(worst, float(np.max(1.0 - np.abs(traj[:, start, col]) ** 2)))
    return worst
