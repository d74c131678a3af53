import numpy as np
import pytest

from src.dynamics import (
    DelayBuffer,
    EnergyLedger,
    VehicleParams,
    VehicleState,
    accumulate_energy,
    integrate_energy,
    kinematic_step,
    realized_commands,
    resistance,
    saturate,
    step,
)
from src.errors import DomainError


class TestVehicleParams:
    def test_resistance(self, vehicle):
        assert resistance(20.0, vehicle) == pytest.approx(0.0147 + 2.75e-4 * 400.0)

    def test_resistance_rejects_negative_speed(self, vehicle):
        with pytest.raises(DomainError):
            resistance(-1.0, vehicle)

    def test_envelope(self, vehicle):
        assert vehicle.u_max(0.0) == pytest.approx(2.0)
        assert vehicle.u_max(30.0) == pytest.approx(-0.121 * 30.0 + 4.83)

    def test_envelope_cap(self):
        capped = VehicleParams(u_max_cap=1.0)
        assert capped.u_max(0.0) == 1.0

    def test_delay_steps(self, vehicle):
        assert vehicle.delay_steps(0.1) == 6
        assert VehicleParams(sigma=0.0).delay_steps(0.1) == 0

    def test_delay_must_be_multiple_of_dt(self):
        with pytest.raises(DomainError):
            VehicleParams(sigma=0.65).delay_steps(0.1)

    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            VehicleParams(u_min=1.0)
        with pytest.raises(DomainError):
            VehicleParams(c0=-0.1)

    def test_envelope_check(self):
        with pytest.raises(DomainError):
            VehicleParams(b2=1.0).check_envelope(35.0)


class TestSaturation:
    def test_clip_both_sides(self, vehicle):
        assert saturate(10.0, 0.0, vehicle) == pytest.approx(2.0)
        assert saturate(-10.0, 10.0, vehicle) == -6.0
        assert saturate(0.5, 10.0, vehicle) == 0.5

    def test_idempotent(self, vehicle):
        for v in (0.0, 5.0, 20.0, 33.0):
            for u in (-9.0, -6.0, -0.3, 0.0, 1.7, 4.0):
                once = saturate(u, v, vehicle)
                assert saturate(once, v, vehicle) == once


class TestDelayBuffer:
    def test_commands_leave_in_order(self):
        buffer = DelayBuffer(2)
        assert buffer.push(1.0) == 0.0
        assert buffer.push(2.0) == 0.0
        assert buffer.push(3.0) == 1.0
        assert buffer.pending() == (2.0, 3.0)

    def test_zero_delay_passes_through(self):
        assert DelayBuffer(0).push(1.5) == 1.5

    def test_from_commands_and_copy(self):
        buffer = DelayBuffer.from_commands([0.1, 0.2])
        clone = buffer.copy()
        clone.push(9.0)
        assert buffer.pending() == (0.1, 0.2)
        assert len(clone) == 2

    def test_negative_length(self):
        with pytest.raises(DomainError):
            DelayBuffer(-1)


class TestKinematics:
    def test_two_steps_equal_one_double_step(self):
        p = VehicleParams(sigma=0.0)
        start = VehicleState(s=3.0, v=12.0)
        mid, buffer = step(start, DelayBuffer(0), 0.8, 0.1, p)
        end, _ = step(mid, buffer, 0.8, 0.1, p)
        once, _ = step(start, DelayBuffer(0), 0.8, 0.2, p)
        assert end.s == pytest.approx(once.s, abs=1e-12)
        assert end.v == pytest.approx(once.v, abs=1e-12)
        assert end.a == once.a == 0.8

    def test_constant_acceleration(self):
        s, v, a = kinematic_step(0.0, 10.0, 1.0, 0.1)
        assert s == pytest.approx(1.005)
        assert v == pytest.approx(10.1)
        assert a == 1.0

    def test_stops_exactly(self):
        s, v, a = kinematic_step(0.0, 0.3, -6.0, 0.1)
        assert v == 0.0
        assert s == pytest.approx(0.09 / 12.0)
        assert a == pytest.approx(-3.0)

    def test_step_applies_delay_and_saturation(self, vehicle):
        buffer = DelayBuffer.from_commands([5.0])
        state, buffer = step(VehicleState(s=0.0, v=0.0), buffer, -1.0, 0.1, vehicle)
        assert state.a == pytest.approx(2.0)
        assert state.v == pytest.approx(0.2)
        assert buffer.pending() == (-1.0,)

    def test_step_rejects_bad_dt(self, vehicle):
        with pytest.raises(DomainError):
            step(VehicleState(0.0, 1.0), DelayBuffer(0), 0.0, 0.0, vehicle)

    def test_realized_commands_clamp_at_stop(self, vehicle):
        realized = realized_commands(VehicleState(s=0.0, v=0.2), [-6.0, -6.0, 1.0], 0.1, vehicle)
        assert realized[0] == pytest.approx(-2.0)
        assert realized[1] == 0.0
        assert realized[2] == pytest.approx(1.0)


class TestEnergy:
    def test_constant_speed_closed_form(self, vehicle):
        w = integrate_energy(np.full(100, 20.0), np.zeros(100), vehicle, 0.1)
        assert w == pytest.approx(24.94, abs=1e-6)

    def test_braking_costs_nothing(self, vehicle):
        assert integrate_energy(np.full(50, 20.0), np.full(50, -1.0), vehicle, 0.1) == 0.0

    def test_ledger_matches_batch_sum(self, vehicle):
        rng = np.random.default_rng(0)
        v = 10.0 + rng.random(200)
        a = rng.normal(0.0, 0.5, 200)
        ledger = EnergyLedger()
        for v_k, a_k in zip(v, a):
            ledger = accumulate_energy(ledger, v_k, a_k, vehicle, 0.1)
        assert ledger.w == integrate_energy(v, a, vehicle, 0.1)
        assert ledger.t == pytest.approx(20.0)

    def test_energy_is_monotone(self, vehicle):
        ledger = EnergyLedger()
        for a in (1.0, -3.0, 0.0):
            previous = ledger.w
            ledger = accumulate_energy(ledger, 15.0, a, vehicle, 0.1)
            assert ledger.w >= previous

    def test_length_mismatch(self, vehicle):
        with pytest.raises(DomainError):
            integrate_energy([1.0, 2.0], [0.0], vehicle, 0.1)

    def test_empty_series(self, vehicle):
        assert integrate_energy([], [], vehicle, 0.1) == 0.0
