import math

import numpy as np
import pytest

from fullerene_gates import gates, pulses
from fullerene_gates import spin_model as sm
from fullerene_gates.errors import TimeOutOfRange
from fullerene_gates.pulses import DriveModel, FrameSpec, HardPulse, Schedule, Segment, Tone

SZ = np.diag([1.5, 0.5, -0.5, -1.5])
R3 = math.sqrt(3)
SX = 0.5 * np.array([[0, R3, 0, 0], [R3, 0, 2, 0], [0, 2, 0, R3], [0, 0, R3, 0]])
I4 = np.eye(4)


def cnot_ab_schedule(p, rabi=2.0):
    carrier = 2 * p.omega2 - 1.5 * p.j
    tone = Tone("B", DriveModel.LADDER, carrier, rabi)
    return Schedule(p, (Segment(1.0, (tone,)),), pulses.rotating_frame(carrier, "B"))


def test_free_lab_segment_is_static(params):
    s = Schedule(params, (Segment(2.0),))
    np.testing.assert_array_equal(pulses.hamiltonian_at(s, 0.7), sm.static_hamiltonian(params))


def test_cnot_rotating_frame_hamiltonian(params):
    rabi = 2.0
    s = cnot_ab_schedule(params, rabi)
    expected = (
        2 * params.omega1 * np.kron(SZ, I4)
        + 1.5 * params.j * np.kron(I4, SZ)
        + params.j * np.kron(SZ, SZ)
        + rabi * np.kron(I4, SX)
    )
    for t in np.linspace(0, 1.0, 17):
        np.testing.assert_allclose(pulses.hamiltonian_at(s, t), expected, atol=1e-12)
    assert pulses.is_time_independent(params, s.segments[0].tones, s.frame)


def test_ladder_block_is_rabi_sx(params):
    rabi = 3.0
    s = cnot_ab_schedule(params, rabi)
    h = pulses.hamiltonian_at(s, 0.31)
    block = h[12:16, 12:16]  # control A in |−3/2⟩
    offset = block[0, 0]
    np.testing.assert_allclose(block - offset * I4, rabi * SX, atol=1e-12)


def cphase_setup(p, delta1=31.35, q=7, phi1=0.3, phi2=1.1):
    cp = gates.CphaseParams.with_q(p, delta1, q, phi1=phi1, phi2=phi2)
    return cp, gates.cphase_schedule(cp, p)


def test_cphase_phasors_term_by_term(params, rng):
    cp, s = cphase_setup(params)
    d1, d2, d3, d4 = cp.detunings
    oa, ob, f1, f2 = cp.rabi_a, cp.rabi_b, cp.phi1, cp.phi2
    g = sm.basis_index(-1.5, -1.5)
    ia = sm.basis_index(-0.5, -1.5)
    ib = sm.basis_index(-1.5, -0.5)
    e = sm.basis_index(-0.5, -0.5)
    for t in rng.uniform(0, s.total_duration, 25):
        h = pulses.hamiltonian_at(s, t)
        ph = lambda d, f: np.exp(1j * (d * t + f))
        assert h[g, ia] == pytest.approx(oa / 2 * (ph(d1, f1) + ph(d4, f2)), abs=1e-12)
        assert h[g, ib] == pytest.approx(ob / 2 * (ph(d2, f1) + ph(d3, f2)), abs=1e-12)
        assert h[ia, e] == pytest.approx(ob / 2 * (ph(-d4, f1) + ph(-d1, f2)), abs=1e-12)
        assert h[ib, e] == pytest.approx(oa / 2 * (ph(-d3, f1) + ph(-d2, f2)), abs=1e-12)
        assert h[g, e] == 0 and h[ia, ib] == 0
        # no static energies survive in the interaction frame
        assert np.max(np.abs(np.diag(h))) == 0


def test_two_level_couples_only_lower_pair(params):
    for target in "AB":
        tone = Tone(target, DriveModel.TWO_LEVEL, 123.0, 4.0, 0.2)
        s = Schedule(params, (Segment(1.0, (tone,)),))
        drive = pulses.hamiltonian_at(s, 0.4) - sm.static_hamiltonian(params)
        rows, cols = np.nonzero(drive)
        assert rows.size == 8
        k = 0 if target == "A" else 1
        for r, c in zip(rows, cols):
            lr, lc = sm.basis_labels()[r], sm.basis_labels()[c]
            assert {float(lr[k]), float(lc[k])} == {-1.5, -0.5}
            assert lr[1 - k] == lc[1 - k]


def test_two_level_phase_convention(params):
    tone = Tone("A", DriveModel.TWO_LEVEL, 50.0, 2.0, 0.4)
    s = Schedule(params, (Segment(1.0, (tone,)),))
    t = 0.23
    h = pulses.hamiltonian_at(s, t)
    lo, hi = sm.basis_index(-1.5, 1.5), sm.basis_index(-0.5, 1.5)
    assert h[lo, hi] == pytest.approx(1.0 * np.exp(1j * (50.0 * t + 0.4)), abs=1e-13)


def scenarios(p):
    cnot = cnot_ab_schedule(p)
    flip = gates.flip_schedule("A", p, 25.0)
    _, cph = cphase_setup(p)
    return [cnot, flip, cph, cph.with_frame(FrameSpec.lab()), flip.with_frame(FrameSpec.lab())]


def test_hermitian_at_random_times(params, rng):
    for s in scenarios(params):
        for t in rng.uniform(0, s.total_duration, 200):
            h = pulses.hamiltonian_at(s, t)
            assert np.linalg.norm(h - h.conj().T) <= 1e-12


def test_time_out_of_range(params):
    s = cnot_ab_schedule(params)
    with pytest.raises(TimeOutOfRange):
        pulses.hamiltonian_at(s, -0.1)
    with pytest.raises(TimeOutOfRange):
        pulses.hamiltonian_at(s, 1.5)


def test_tone_and_segment_validation():
    with pytest.raises(ValueError):
        Tone("C", DriveModel.LADDER, 1.0, 1.0)
    with pytest.raises(ValueError):
        Tone("A", DriveModel.LADDER, 1.0, -1.0)
    with pytest.raises(ValueError):
        Tone("A", DriveModel.LADDER, -1.0, 1.0)
    with pytest.raises(ValueError):
        Segment(0.0)
    with pytest.raises(ValueError):
        Segment(-1.0)
    assert Segment(0.0, (), (HardPulse("A"),)).duration == 0


def test_frame_validation():
    with pytest.raises(ValueError):
        FrameSpec.from_matrix(np.ones((16, 16)))
    with pytest.raises(ValueError):
        FrameSpec((0.0,) * 5)


def test_to_frame_identity_and_round_trip(params, rng):
    frame = pulses.interaction_frame(params)
    lab = FrameSpec.lab()
    x = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    np.testing.assert_array_equal(pulses.to_frame(x, frame, frame, 1.3), x)
    back = pulses.to_frame(pulses.to_frame(x, lab, frame, 1.3), frame, lab, 1.3)
    assert np.max(np.abs(back - x)) <= 1e-12
    v = rng.normal(size=16) + 0j
    back = pulses.to_frame(pulses.to_frame(v, lab, frame, 0.4), frame, lab, 0.4)
    assert np.max(np.abs(back - v)) <= 1e-12


def test_diagonal_state_picks_up_pure_phase(params):
    frame = pulses.interaction_frame(params)
    k = sm.basis_index(-1.5, -1.5)
    e = sm.eigenenergy(-1.5, -1.5, params)
    v = np.zeros(16, complex)
    v[k] = 1
    t = 0.37
    out = pulses.to_frame(v, FrameSpec.lab(), frame, t)
    assert out[k] == pytest.approx(np.exp(1j * e * t), abs=1e-12)
    assert np.count_nonzero(out) == 1


def test_lab_evolution_is_frozen_in_interaction_frame(params):
    # free evolution looks like the identity once moved to the H₀ frame
    t = 0.77
    u_lab = np.diag(np.exp(-1j * sm.static_energies(params) * t))
    u = pulses.to_frame(u_lab, FrameSpec.lab(), pulses.interaction_frame(params), t)
    np.testing.assert_allclose(u, np.eye(16), atol=1e-12)


def test_hard_pulse_inverse_pair():
    for spin in "AB":
        u = pulses.hard_pulse_operator(spin, +1) @ pulses.hard_pulse_operator(spin, -1)
        np.testing.assert_allclose(u, np.eye(16), atol=1e-12)


def test_hard_pulse_flips_sz():
    for spin in "AB":
        u = pulses.hard_pulse_operator(spin)
        sz = sm.sz(spin)
        assert np.linalg.norm(u.conj().T @ sz @ u + sz) <= 1e-10


def test_hard_pulse_maps_energies(params):
    u = pulses.hard_pulse_operator("A")
    h = u.conj().T @ sm.static_hamiltonian(params) @ u
    for a, b in sm.basis_labels():
        k = sm.basis_index(a, b)
        assert h[k, k].real == pytest.approx(sm.eigenenergy(-a, b, params), abs=1e-9)


def test_hard_pulse_on_ground_state():
    v = np.zeros(16, complex)
    v[sm.basis_index(-1.5, -1.5)] = 1
    out = pulses.hard_pulse_operator("B") @ v
    expected = np.zeros(16, complex)
    expected[sm.basis_index(-1.5, 1.5)] = 1j
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_p_hat_blocks():
    ph = pulses.p_hat()
    np.testing.assert_allclose(ph, 1j * np.fliplr(I4), atol=1e-10)
    # |±3/2⟩ and |±1/2⟩ never mix
    assert np.max(np.abs(ph[np.ix_([0, 3], [1, 2])])) <= 1e-12


def test_schedule_segment_lookup(params):
    s = Schedule(params, (Segment(0.0, (), (HardPulse("A"),)), Segment(1.0), Segment(2.0)))
    assert s.total_duration == 3.0
    assert s.boundaries() == [0.0, 0.0, 1.0]
    assert s.segment_at(0.5) is s.segments[1]
    assert s.segment_at(1.5) is s.segments[2]


def test_schedule_text_round_trip(params):
    _, cph = cphase_setup(params)
    s = Schedule(
        params,
        cph.segments + (Segment(0.5, (), (HardPulse("A", -1), HardPulse("B"))), Segment(0.0, (), (HardPulse("B", -1),))),
        cph.frame,
    )
    text = pulses.schedule_to_text(s)
    assert "[segment 0]" in text and "hard_pulses = -A, +B" in text
    back = pulses.schedule_from_text(text)
    assert back == s
    assert pulses.schedule_to_text(back) == text


def test_schedule_text_rejects_garbage():
    with pytest.raises(ValueError):
        pulses.schedule_from_text("[segment 0]\nduration = 1\n")
    with pytest.raises(ValueError):
        pulses.schedule_from_text("[schedule]\nno equals sign\n")
