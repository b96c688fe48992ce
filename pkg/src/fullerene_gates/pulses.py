"""Drive description (tones, segments, schedules) and Hamiltonian assembly.

Two drive models are supported:

``LADDER``
    Couples the whole S± ladder of the target spin::

        (Ω/2) (e^{-i(ω_L t + φ)} S₊ + e^{+i(ω_L t + φ)} S₋)

    so that at resonance the rotating-frame coupling is exactly ``Ω S_x`` and
    a pulse of length π/Ω produces ``exp(-iπ S_x)``.

``TWO_LEVEL``
    Couples only |−3/2⟩ ↔ |−1/2⟩ of the target spin (identity on the other
    spin)::

        (Ω/2) e^{+i(ω_s t + φ)} |−3/2⟩⟨−1/2| + h.c.

Frames are generated by diagonal Hermitian matrices ``G``; a state in frame
``G`` is ``exp(+iGt)`` times the lab-frame state, and the frame Hamiltonian
is ``exp(iGt) H exp(-iGt) − G``.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import spin_model
from .densela import herm_expm
from .errors import TimeOutOfRange
from .spin_model import DIM, SystemParams, embed, spin_operators


class DriveModel(enum.Enum):
    LADDER = "LADDER"
    TWO_LEVEL = "TWO_LEVEL"


@dataclass(frozen=True)
class Tone:
    target: str
    model: DriveModel
    carrier: float
    rabi: float
    phase: float = 0.0

    def __post_init__(self):
        if self.target not in spin_model.SPINS:
            raise ValueError(f"tone target must be 'A' or 'B', got {self.target!r}")
        object.__setattr__(self, "model", DriveModel(self.model))
        if self.rabi < 0:
            raise ValueError("rabi frequency must be non-negative")
        if self.carrier < 0:
            raise ValueError("carrier frequency must be non-negative")

    def raising_part(self):
        """The 16x16 operator X multiplied by e^{-i(ωt+φ)} in the drive (h.c. added separately)."""
        ops = spin_operators()
        if self.model is DriveModel.LADDER:
            return 0.5 * self.rabi * embed(ops["s_plus"], self.target)
        # |−1/2⟩⟨−3/2| is the raising partner of |−3/2⟩⟨−1/2|
        up = np.zeros((4, 4), dtype=complex)
        up[2, 3] = 1.0
        return 0.5 * self.rabi * embed(up, self.target)


@dataclass(frozen=True)
class HardPulse:
    """Instantaneous ideal π rotation ``exp(-i·sign·π S_x^target)``."""

    target: str
    sign: int = +1

    def __post_init__(self):
        if self.target not in spin_model.SPINS:
            raise ValueError(f"hard pulse target must be 'A' or 'B', got {self.target!r}")
        if self.sign not in (+1, -1):
            raise ValueError("hard pulse sign must be +1 or -1")

    def __str__(self):
        return f"{'+' if self.sign > 0 else '-'}{self.target}"


@dataclass(frozen=True)
class Segment:
    duration: float
    tones: tuple = ()
    hard_pulses: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "tones", tuple(self.tones))
        object.__setattr__(self, "hard_pulses", tuple(self.hard_pulses))
        if self.duration < 0:
            raise ValueError("segment duration must be non-negative")
        if self.duration == 0 and (self.tones or not self.hard_pulses):
            raise ValueError("zero-duration segments may only carry hard pulses")


@dataclass(frozen=True)
class FrameSpec:
    """Rotating frame generated by ``diag(generator)``; all zeros is the lab frame."""

    generator: tuple = field(default_factory=lambda: (0.0,) * DIM)
    name: str = "lab"

    def __post_init__(self):
        g = np.asarray(self.generator, dtype=float).ravel()
        if g.shape != (DIM,):
            raise ValueError(f"frame generator must have {DIM} diagonal entries")
        object.__setattr__(self, "generator", tuple(float(x) for x in g))

    @classmethod
    def lab(cls):
        return cls()

    @classmethod
    def from_matrix(cls, g, name="rotating"):
        g = np.asarray(g)
        if g.ndim == 2:
            if np.count_nonzero(g - np.diag(np.diag(g))):
                raise ValueError("frame generators must be diagonal")
            g = np.diag(g).real
        return cls(tuple(g), name)

    @property
    def diag(self):
        return np.array(self.generator)

    @property
    def is_lab(self):
        return not any(self.generator)

    def phases(self, t):
        return np.exp(1j * self.diag * t)


def rotating_frame(carrier, spin, name=None):
    """Frame generated by ``carrier · S_z^spin``."""
    return FrameSpec.from_matrix(carrier * spin_model.sz(spin), name or f"rotating({spin}@{carrier:.9g})")


def interaction_frame(p, name="interaction"):
    """Frame generated by the full static Hamiltonian.

    Restricted to span{|−3/2⟩,|−1/2⟩}⊗span{|−3/2⟩,|−1/2⟩} this is the H₀ of
    the two-tone problem up to a constant, so the frame Hamiltonian there
    carries exactly the phasors e^{i((ω_s − ω_A)t + φ)} etc.
    """
    return FrameSpec.from_matrix(spin_model.static_hamiltonian(p), name)


@dataclass(frozen=True)
class Schedule:
    params: SystemParams
    segments: tuple
    frame: FrameSpec = field(default_factory=FrameSpec.lab)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def total_duration(self):
        return math.fsum(s.duration for s in self.segments)

    def boundaries(self):
        """Start times of each segment."""
        starts, t = [], 0.0
        for seg in self.segments:
            starts.append(t)
            t += seg.duration
        return starts

    def segment_at(self, t):
        total = self.total_duration
        if t < 0 or t > total * (1 + 1e-12) + 1e-15:
            raise TimeOutOfRange(f"t={t} outside [0, {total}]")
        starts = self.boundaries()
        chosen = None
        for start, seg in zip(starts, self.segments):
            if seg.duration > 0 and t >= start:
                chosen = seg
        return chosen

    def with_frame(self, frame):
        return Schedule(self.params, self.segments, frame)


def _drive_terms(tones, frame, ts):
    """Sum of drive terms in ``frame`` at times ``ts`` -> (len(ts), 16, 16)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    out = np.zeros((ts.size, DIM, DIM), dtype=complex)
    if not tones:
        return out
    g = frame.diag
    # exp(i(g_a - g_b) t) for every element
    gap = g[:, None] - g[None, :]
    for tone in tones:
        x = tone.raising_part()
        rows, cols = np.nonzero(x)
        # both models carry e^{-i(ωt+φ)} on the raising part
        freq = gap[rows, cols] - tone.carrier
        vals = x[rows, cols][None, :] * np.exp(1j * (np.outer(ts, freq) - tone.phase))
        out[:, rows, cols] += vals
        out[:, cols, rows] += vals.conj()
    return out


def static_part(params, frame):
    """Time-independent diagonal part of the frame Hamiltonian."""
    return np.diag(spin_model.static_energies(params) - frame.diag).astype(complex)


def hamiltonian_at(schedule, t):
    """Hermitian 16x16 Hamiltonian of ``schedule`` at time ``t`` in its frame."""
    seg = schedule.segment_at(t)
    tones = seg.tones if seg is not None else ()
    return static_part(schedule.params, schedule.frame) + _drive_terms(tones, schedule.frame, [t])[0]


def hamiltonians(params, tones, frame, ts):
    """Vectorised Hamiltonians for one segment's tones at many times."""
    return static_part(params, frame)[None] + _drive_terms(tones, frame, ts)


def max_frequency(params, tones, frame):
    """Largest angular frequency present in the frame Hamiltonian."""
    w = float(np.max(np.abs(spin_model.static_energies(params) - frame.diag)))
    g = frame.diag
    for tone in tones:
        rows, cols = np.nonzero(tone.raising_part())
        if rows.size:
            w = max(w, float(np.max(np.abs(g[rows] - g[cols] - tone.carrier))))
    return w


def is_time_independent(params, tones, frame, atol=1e-12):
    """True when every drive phasor is static in ``frame``."""
    g = frame.diag
    for tone in tones:
        rows, cols = np.nonzero(tone.raising_part())
        if rows.size and np.max(np.abs(g[rows] - g[cols] - tone.carrier)) > atol * max(1.0, tone.carrier):
            return False
    return True


def to_frame(x, frm, to, t):
    """Move a state or propagator (from time 0) between frames at time ``t``.

    Both frames coincide at t = 0, so a propagator transforms like a state:
    ``X_to = exp(i(G_to − G_from)t) · X_from``.
    """
    phase = np.exp(1j * (to.diag - frm.diag) * t)
    x = np.asarray(x, dtype=complex)
    if x.ndim == 1:
        return phase * x
    return phase[:, None] * x


def hard_pulse_operator(target, sign=+1):
    """``exp(-i·sign·π S_x^target)`` embedded in 16 dims (P̂ for sign=+1)."""
    p_hat = herm_expm(spin_operators()["s_x"], sign * math.pi)
    return embed(p_hat, target)


def p_hat():
    """Single-spin π-pulse operator ``exp(-iπ S_x)``."""
    return herm_expm(spin_operators()["s_x"], math.pi)


def hard_pulse_in_frame(pulse, frame, t):
    """An instantaneous lab-frame pulse at time t, expressed in ``frame``."""
    u = hard_pulse_operator(pulse.target, pulse.sign)
    ph = frame.phases(t)
    return (ph[:, None] * u) * ph.conj()[None, :]


# --- structured text round trip ------------------------------------------------

def schedule_to_text(schedule):
    """Serialise to ``key = value`` lines grouped in ``[section]`` headers.

    Floats are written with ``repr`` so a round trip is exact.
    """
    p = schedule.params
    lines = [
        "[schedule]",
        f"omega1 = {p.omega1!r}",
        f"omega2 = {p.omega2!r}",
        f"j = {p.j!r}",
        f"frame = {schedule.frame.name}",
    ]
    if not schedule.frame.is_lab:
        lines.append("frame_generator = " + ", ".join(repr(x) for x in schedule.frame.generator))
    for k, seg in enumerate(schedule.segments):
        lines += ["", f"[segment {k}]", f"duration = {seg.duration!r}"]
        if seg.hard_pulses:
            lines.append("hard_pulses = " + ", ".join(str(h) for h in seg.hard_pulses))
        for i, tone in enumerate(seg.tones):
            lines.append(
                f"tone.{i} = target={tone.target} model={tone.model.value} "
                f"carrier={tone.carrier!r} phase={tone.phase!r} rabi={tone.rabi!r}"
            )
    return "\n".join(lines) + "\n"


def _sections(text):
    sections, current = [], None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = (line[1:-1].strip(), {})
            sections.append(current)
            continue
        if current is None or "=" not in line:
            raise ValueError(f"malformed schedule line: {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        current[1][key] = value
    return sections


def schedule_from_text(text):
    sections = _sections(text)
    if not sections or sections[0][0] != "schedule":
        raise ValueError("schedule text must start with a [schedule] section")
    head = sections[0][1]
    params = SystemParams(float(head["omega1"]), float(head["omega2"]), float(head["j"]))
    name = head.get("frame", "lab")
    if "frame_generator" in head:
        frame = FrameSpec(tuple(float(x) for x in head["frame_generator"].split(",")), name)
    else:
        frame = FrameSpec.lab()
    segments = []
    for title, kv in sections[1:]:
        if not title.startswith("segment"):
            raise ValueError(f"unexpected section [{title}]")
        pulses = []
        if kv.get("hard_pulses"):
            for tok in kv["hard_pulses"].split(","):
                tok = tok.strip()
                pulses.append(HardPulse(tok[1:], -1 if tok[0] == "-" else +1))
        tones = []
        for key in sorted((k for k in kv if k.startswith("tone.")), key=lambda k: int(k.split(".")[1])):
            fields = dict(item.split("=", 1) for item in kv[key].split())
            tones.append(Tone(
                target=fields["target"],
                model=DriveModel(fields["model"]),
                carrier=float(fields["carrier"]),
                phase=float(fields["phase"]),
                rabi=float(fields["rabi"]),
            ))
        segments.append(Segment(float(kv["duration"]), tuple(tones), tuple(pulses)))
    return Schedule(params, tuple(segments), frame)
