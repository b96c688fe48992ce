"""Spin-3/2 operators and the static Hamiltonian of two dipolar-coupled spins.

Units: every frequency in this package is an angular frequency in rad/µs and
every time is in µs. Experimental numbers quoted in "MHz" are used verbatim as
rad/µs, so a Rabi frequency of 25 gives a π-pulse time of π/25 = 0.1257 µs.

Basis ordering is A-major with m descending on each spin::

    index = 4 * idx(m_A) + idx(m_B),   idx: +3/2 -> 0, +1/2 -> 1, -1/2 -> 2, -3/2 -> 3

Δ is taken as the Zeeman difference per unit of m, ``Δ = 2ω₂ − 2ω₁`` (so the
|±3/2⟩ splittings of the two spins differ by 3Δ).
"""

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .densela import kron

SPIN_DIM = 4
DIM = SPIN_DIM * SPIN_DIM
M_VALUES = (Fraction(3, 2), Fraction(1, 2), Fraction(-1, 2), Fraction(-3, 2))
SPINS = ("A", "B")

# Bohr magneton over hbar, in rad/(µs·T)
_MU_B_OVER_HBAR = 9.2740100783e-24 / 1.054571817e-34 * 1e-6


@dataclass(frozen=True, order=True)
class SpinProjection:
    """One of the four Zeeman projections of a spin-3/2."""

    m: Fraction

    def __post_init__(self):
        m = Fraction(self.m).limit_denominator(2)
        if m not in M_VALUES:
            raise ValueError(f"spin-3/2 projection must be one of ±3/2, ±1/2, got {self.m}")
        object.__setattr__(self, "m", m)

    @property
    def index(self):
        return M_VALUES.index(self.m)

    @classmethod
    def from_index(cls, index):
        return cls(M_VALUES[index])

    def __float__(self):
        return float(self.m)

    def __neg__(self):
        return SpinProjection(-self.m)

    def __str__(self):
        return str(self.m)


def all_projections():
    return [SpinProjection(m) for m in M_VALUES]


def basis_index(m_a, m_b):
    """16-dim basis index of |m_A, m_B⟩ (accepts SpinProjection or numbers)."""
    return 4 * SpinProjection(_m(m_a)).index + SpinProjection(_m(m_b)).index


def basis_labels():
    return [(SpinProjection(ma), SpinProjection(mb)) for ma, mb in itertools.product(M_VALUES, M_VALUES)]


def _m(x):
    return x.m if isinstance(x, SpinProjection) else Fraction(x).limit_denominator(2)


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the coupled pair.

    ``omega1 = gµ_B B_A / 2`` and ``omega2 = gµ_B B_B / 2``; ``j`` is the
    dipolar coupling. All in rad/µs.
    """

    omega1: float = 100.0
    omega2: float = 106.35
    j: float = 50.0

    @property
    def delta(self):
        return 2.0 * (self.omega2 - self.omega1)

    @property
    def omega(self):
        return self.omega1

    def omega_of(self, spin):
        return {"A": self.omega1, "B": self.omega2}[spin]

    @classmethod
    def from_fields(cls, b_a, b_b, j, g=2.0023):
        """Build from local field strengths in tesla (ω = gµ_B B / 2)."""
        return cls(
            omega1=g * _MU_B_OVER_HBAR * b_a / 2.0,
            omega2=g * _MU_B_OVER_HBAR * b_b / 2.0,
            j=j,
        )


def spin_operators():
    """Return the spin-3/2 matrices ``{"s_z", "s_x", "s_plus", "s_minus"}``."""
    s = 1.5
    ms = np.array([float(m) for m in M_VALUES])
    s_z = np.diag(ms).astype(complex)
    s_plus = np.zeros((SPIN_DIM, SPIN_DIM), dtype=complex)
    for k in range(1, SPIN_DIM):
        # S+|m⟩ = sqrt(s(s+1) - m(m+1)) |m+1⟩, m+1 sits one index up
        m = ms[k]
        s_plus[k - 1, k] = np.sqrt(s * (s + 1) - m * (m + 1))
    s_minus = s_plus.conj().T
    s_x = 0.5 * (s_plus + s_minus)
    return {"s_z": s_z, "s_x": s_x, "s_plus": s_plus, "s_minus": s_minus}


def embed(op, spin):
    """Lift a single-spin 4x4 operator to the 16-dim two-spin space."""
    eye = np.eye(SPIN_DIM, dtype=complex)
    if spin == "A":
        return kron(op, eye)
    if spin == "B":
        return kron(eye, op)
    raise ValueError(f"spin must be 'A' or 'B', got {spin!r}")


def sz(spin):
    return embed(spin_operators()["s_z"], spin)


def static_hamiltonian(p):
    """H = 2ω₁ S_z^A + 2ω₂ S_z^B + J S_z^A S_z^B (16x16, diagonal)."""
    s_z = spin_operators()["s_z"]
    return 2 * p.omega1 * sz("A") + 2 * p.omega2 * sz("B") + p.j * kron(s_z, s_z)


def eigenenergy(m1, m2, p):
    m1, m2 = float(_m(m1)), float(_m(m2))
    return 2 * p.omega1 * m1 + 2 * p.omega2 * m2 + p.j * m1 * m2


def static_energies(p):
    """Closed-form energies in basis order."""
    return np.array([eigenenergy(ma, mb, p) for ma, mb in itertools.product(M_VALUES, M_VALUES)])


@dataclass(frozen=True)
class TransitionLine:
    spin: str
    m_from: SpinProjection
    m_to: SpinProjection
    spectator_m: SpinProjection
    frequency: float
    group_id: int


def transition_frequency(spin, spectator_m, p):
    """Frequency 2ω_spin + J·m_spectator of any Δm = −1 line of ``spin``."""
    return 2 * p.omega_of(spin) + p.j * float(_m(spectator_m))


def transition_spectrum(p, rtol=1e-12):
    """All 24 single-spin Δm = −1 lines, grouped by (degenerate) frequency.

    Frequencies are measured as energy differences of :func:`eigenenergy`,
    not taken from the closed form, so the grouping is a check on the
    Hamiltonian. Lines whose frequencies agree to ``rtol`` share a group;
    group ids are assigned in ascending frequency.
    """
    raw = []
    for spin in SPINS:
        for spectator in M_VALUES:
            for k in range(SPIN_DIM - 1):
                m_from, m_to = M_VALUES[k], M_VALUES[k + 1]
                if spin == "A":
                    freq = eigenenergy(m_from, spectator, p) - eigenenergy(m_to, spectator, p)
                else:
                    freq = eigenenergy(spectator, m_from, p) - eigenenergy(spectator, m_to, p)
                raw.append((spin, m_from, m_to, spectator, freq))

    groups = []  # representative frequencies
    for *_, freq in sorted(raw, key=lambda r: r[-1]):
        if not groups or abs(freq - groups[-1]) > rtol * max(1.0, abs(freq)):
            groups.append(freq)

    def group_of(freq):
        for gid, g in enumerate(groups):
            if abs(freq - g) <= rtol * max(1.0, abs(freq)):
                return gid
        raise AssertionError("unreachable")

    return [
        TransitionLine(
            spin=spin,
            m_from=SpinProjection(m_from),
            m_to=SpinProjection(m_to),
            spectator_m=SpinProjection(spectator),
            frequency=freq,
            group_id=group_of(freq),
        )
        for spin, m_from, m_to, spectator, freq in raw
    ]


def spectrum_csv(lines):
    """CSV text: spin, m_from, m_to, spectator_m, frequency, group_id."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["spin", "m_from", "m_to", "spectator_m", "frequency", "group_id"])
    for line in lines:
        writer.writerow([
            line.spin,
            f"{float(line.m_from):.9g}",
            f"{float(line.m_to):.9g}",
            f"{float(line.spectator_m):.9g}",
            f"{line.frequency:.9g}",
            line.group_id,
        ])
    return buf.getvalue()
