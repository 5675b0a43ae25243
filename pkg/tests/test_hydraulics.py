"""Tests for the ODE core: conversions, flows, derivatives, RK4 stepping."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from droopvessel import (
    LevelRangeError,
    Network,
    PiecewiseConstant,
    Pipe,
    ProfileSegment,
    Sampled,
    InfiniteTank,
    Uniform,
    Vessel,
    closed_form_uniform_level,
    derivatives,
    initial_state,
    level_from_volume,
    pipe_flow,
    step,
    volume_from_level,
)

TWO_STEP = PiecewiseConstant(
    segments=(
        ProfileSegment(lo_cm=0.0, hi_cm=30.0, area_cm2=2.0),
        ProfileSegment(lo_cm=30.0, hi_cm=60.0, area_cm2=4.0),
    )
)
CONE_ISH = Sampled(points=((0.0, 1.0), (40.0, 3.0), (100.0, 3.5)))


def riemann_volume(profile, level: float, dx: float = 1e-4) -> float:
    """Independent quadrature oracle: midpoint Riemann sum of the area."""
    n = int(level / dx)
    total = sum(profile.area_at((i + 0.5) * dx) for i in range(n)) * dx
    rest = level - n * dx
    return total + profile.area_at(n * dx + 0.5 * rest) * rest


class TestVolumeFromLevel:
    def test_uniform_rectangle(self) -> None:
        assert volume_from_level(Uniform(2.5), 60.0) == pytest.approx(150.0, abs=0)

    def test_empty_vessel(self) -> None:
        for prof in (Uniform(3.0), TWO_STEP, CONE_ISH):
            assert volume_from_level(prof, 0.0) == 0.0

    def test_two_step_against_riemann_oracle(self) -> None:
        # 2*30 + 4*15 = 120, and the quadrature oracle agrees
        assert riemann_volume(TWO_STEP, 45.0) == pytest.approx(120.0, abs=1e-2)
        assert volume_from_level(TWO_STEP, 45.0) == pytest.approx(120.0, abs=1e-12)

    def test_sampled_against_riemann_oracle(self) -> None:
        for level in (7.0, 40.0, 73.5, 100.0):
            oracle = riemann_volume(CONE_ISH, level)
            assert volume_from_level(CONE_ISH, level) == pytest.approx(oracle, rel=1e-6)

    def test_strictly_increasing(self) -> None:
        for prof in (TWO_STEP, CONE_ISH):
            levels = np.linspace(0.0, 60.0, 61)
            vols = [volume_from_level(prof, float(h)) for h in levels]
            assert all(b > a for a, b in zip(vols, vols[1:]))

    def test_level_out_of_range(self) -> None:
        with pytest.raises(ValueError, match="below"):
            volume_from_level(Uniform(1.0), -1.0)
        with pytest.raises(ValueError, match="above"):
            volume_from_level(TWO_STEP, 61.0)


class TestLevelFromVolume:
    def test_uniform_inverse(self) -> None:
        assert level_from_volume(Uniform(2.5), 150.0) == pytest.approx(60.0, abs=0)

    def test_zero_volume(self) -> None:
        for prof in (Uniform(3.0), TWO_STEP, CONE_ISH):
            assert level_from_volume(prof, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_round_trip_100_random_levels(self) -> None:
        rng = np.random.default_rng(7)
        for prof, top in ((Uniform(2.5), 120.0), (TWO_STEP, 60.0), (CONE_ISH, 100.0)):
            for level in rng.uniform(0.0, top, size=100):
                vol = volume_from_level(prof, float(level))
                back = level_from_volume(prof, vol)
                assert volume_from_level(prof, back) == pytest.approx(vol, rel=1e-9, abs=1e-9)
                assert back == pytest.approx(level, rel=1e-9, abs=1e-9)

    def test_volume_out_of_range(self) -> None:
        with pytest.raises(ValueError, match="negative"):
            level_from_volume(Uniform(1.0), -0.5)
        with pytest.raises(ValueError, match="capacity"):
            level_from_volume(TWO_STEP, 180.1)


class TestPipeFlow:
    def test_worked_example(self) -> None:
        assert pipe_flow(63.0, 60.0, 0.8, True) == pytest.approx(2.4, abs=1e-15)

    def test_equal_levels(self) -> None:
        assert pipe_flow(58.0, 58.0, 5.0, True) == 0.0

    def test_closed_valve_blocks_any_head(self) -> None:
        assert pipe_flow(100.0, 0.0, 10.0, False) == 0.0

    @given(
        a=st.floats(-200, 200),
        b=st.floats(-200, 200),
        g=st.floats(1e-3, 1e3),
        open_=st.booleans(),
    )
    def test_antisymmetric(self, a, b, g, open_) -> None:
        assert pipe_flow(a, b, g, open_) == -pipe_flow(b, a, g, open_)

    def test_linearity_oracle(self) -> None:
        # doubling the head or the conductance doubles the flow
        base = pipe_flow(63.0, 60.0, 0.8, True)
        assert pipe_flow(66.0, 60.0, 0.8, True) == pytest.approx(2 * base)
        assert pipe_flow(63.0, 60.0, 1.6, True) == pytest.approx(2 * base)


def two_vessels(level_a=70.0, level_b=50.0, area=1.0, g=1.0) -> Network:
    return Network(
        vessels=(
            Vessel(id="a", profile=Uniform(area), initial_level_cm=level_a),
            Vessel(id="b", profile=Uniform(area), initial_level_cm=level_b),
        ),
        pipes=(Pipe(id="a-b", ends=("a", "b"), conductance=g),),
    )


class TestDerivatives:
    def test_isolated_vessel(self) -> None:
        net = Network(vessels=(Vessel(id="solo", profile=Uniform(2.0), initial_level_cm=80.0),))
        assert derivatives(net, initial_state(net)) == {"solo": 0.0}

    def test_two_vessel_exchange(self) -> None:
        net = two_vessels()
        d = derivatives(net, initial_state(net))
        assert d["a"] == pytest.approx(-20.0)
        assert d["b"] == pytest.approx(20.0)
        assert d["a"] == -d["b"]  # antisymmetry + conservation oracle

    def test_vessel_drains_into_tank(self) -> None:
        net = Network(
            vessels=(Vessel(id="v", profile=Uniform(2.5), initial_level_cm=72.0),),
            tanks=(InfiniteTank(id="grid", fixed_level_cm=60.0),),
            pipes=(Pipe(id="v-grid", ends=("v", "grid"), conductance=1.0),),
        )
        d = derivatives(net, initial_state(net))
        assert d["v"] == pytest.approx(-12.0)
        assert set(d) == {"v"}  # the tank is a boundary, not tracked

    def test_closed_component_sums_to_zero(self) -> None:
        net = Network(
            vessels=(
                Vessel(id="a", profile=Uniform(1.0), initial_level_cm=70.0),
                Vessel(id="b", profile=Uniform(2.0), initial_level_cm=55.0),
                Vessel(id="c", profile=Uniform(3.0), initial_level_cm=40.0),
            ),
            pipes=(
                Pipe(id="a-b", ends=("a", "b"), conductance=1.3),
                Pipe(id="b-c", ends=("b", "c"), conductance=0.7),
            ),
        )
        d = derivatives(net, initial_state(net))
        assert sum(d.values()) == pytest.approx(0.0, abs=1e-12)


class TestStep:
    def test_equilibrium_is_a_fixed_point(self) -> None:
        net = two_vessels(level_a=60.0, level_b=60.0)
        before = initial_state(net)
        after = step(net, before, 0.01)
        assert after.time_s == pytest.approx(0.01)
        assert np.array_equal(after.volumes_cm3, before.volumes_cm3)

    def test_conservation_over_10k_steps(self) -> None:
        net = two_vessels(area=2.0)
        state = initial_state(net)
        total0 = float(state.volumes_cm3.sum())
        for _ in range(10_000):
            state = step(net, state, 0.01)
        assert abs(float(state.volumes_cm3.sum()) - total0) / total0 < 1e-9

    def test_rk4_order_via_dt_halving(self) -> None:
        # closed form: each level decays to the mean at rate g*(1/A1 + 1/A2) = 2
        exact = 60.0 + 10.0 * math.exp(-4.0)

        def final_level(dt: float) -> float:
            net = two_vessels()
            state = initial_state(net)
            for _ in range(round(2.0 / dt)):
                state = step(net, state, dt)
            return state.level("a")

        err = abs(final_level(0.1) - exact)
        err_half = abs(final_level(0.05) - exact)
        assert 12.0 < err / err_half < 20.0

    def test_overflow_names_vessel_and_time(self) -> None:
        net = Network(
            vessels=(
                Vessel(id="low", profile=Uniform(1.0), initial_level_cm=10.0, max_height_cm=12.0),
                Vessel(id="high", profile=Uniform(50.0), initial_level_cm=100.0, max_height_cm=120.0),
            ),
            pipes=(Pipe(id="low-high", ends=("low", "high"), conductance=5.0),),
        )
        state = initial_state(net)
        with pytest.raises(LevelRangeError, match="low") as exc:
            for _ in range(1000):
                state = step(net, state, 0.01)
        assert exc.value.time_s > 0
        assert "overflow" in str(exc.value)

    def test_underflow_detected(self) -> None:
        net = Network(
            vessels=(Vessel(id="v", profile=Uniform(1.0), initial_level_cm=2.0),),
            tanks=(InfiniteTank(id="sink", fixed_level_cm=-500.0),),
            pipes=(Pipe(id="v-sink", ends=("v", "sink"), conductance=1.0),),
        )
        state = initial_state(net)
        with pytest.raises(LevelRangeError, match="underflow"):
            for _ in range(1000):
                state = step(net, state, 0.01)

    def test_rejects_nonpositive_dt(self) -> None:
        net = two_vessels()
        with pytest.raises(ValueError, match="dt"):
            step(net, initial_state(net), 0.0)


class TestStateInvariants:
    def test_exited_identity(self) -> None:
        net = two_vessels(area=2.0)
        state = initial_state(net)
        for _ in range(500):
            state = step(net, state, 0.01)
        expected = state.initial_volumes_cm3 + state.injected_cm3 - state.volumes_cm3
        assert np.allclose(state.exited_cm3, expected, atol=0)

    def test_levels_match_volume_inverse(self) -> None:
        net = Network(
            vessels=(
                Vessel(id="shaped", profile=TWO_STEP, initial_level_cm=45.0, max_height_cm=60.0),
                Vessel(id="plain", profile=Uniform(2.0), initial_level_cm=20.0),
            ),
            pipes=(Pipe(id="shaped-plain", ends=("shaped", "plain"), conductance=0.5),),
        )
        state = initial_state(net)
        for _ in range(200):
            state = step(net, state, 0.01)
        for vid in state.vessel_ids:
            i = state.vessel_ids.index(vid)
            profile = net.vessel(vid).profile
            assert state.levels_cm[i] == pytest.approx(
                level_from_volume(profile, float(state.volumes_cm3[i])), rel=1e-9, abs=1e-9
            )

    def test_state_arrays_are_read_only(self) -> None:
        state = initial_state(two_vessels())
        with pytest.raises(ValueError):
            state.volumes_cm3[0] = 1.0


def random_ring(rng: np.random.Generator, n: int) -> Network:
    areas = rng.uniform(1.0, 3.0, size=n)
    levels = rng.uniform(30.0, 90.0, size=n)
    elevations = rng.uniform(-10.0, 10.0, size=n)
    vessels = tuple(
        Vessel(
            id=f"v{i}",
            profile=Uniform(float(areas[i])),
            base_elevation_cm=float(elevations[i]),
            initial_level_cm=float(levels[i]),
        )
        for i in range(n)
    )
    pipes = tuple(
        Pipe(id=f"p{i}", ends=(f"v{i}", f"v{(i + 1) % n}"), conductance=float(rng.uniform(0.8, 1.5)))
        for i in range(n)
    )
    return Network(vessels=vessels, pipes=pipes)


class TestConsensusBehavior:
    def test_monotone_convergence_to_predicted_level(self) -> None:
        # settling horizon heuristic 50 * (sum A / sum g) must reach 1e-6
        rng = np.random.default_rng(42)
        for n in (3, 4, 6):
            net = random_ring(rng, n)
            areas = [v.profile.area_cm2 for v in net.vessels]
            target = closed_form_uniform_level(
                areas, [v.base_elevation_cm + v.initial_level_cm for v in net.vessels]
            )
            horizon = 50.0 * sum(areas) / sum(p.conductance for p in net.pipes)
            dt = 0.02
            state = initial_state(net)
            for _ in range(round(horizon / dt)):
                state = step(net, state, dt)
            assert np.max(np.abs(state.absolute_levels_cm - target)) < 1e-6

    def test_level_spread_contracts(self) -> None:
        rng = np.random.default_rng(3)
        net = random_ring(rng, 5)
        state = initial_state(net)
        spread = float(np.ptp(state.absolute_levels_cm))
        for _ in range(100):
            for _ in range(10):
                state = step(net, state, 0.01)
            new_spread = float(np.ptp(state.absolute_levels_cm))
            assert new_spread <= spread + 1e-12  # rounding slack only
            spread = new_spread


@settings(max_examples=50)
@given(area=st.floats(0.1, 50.0), level=st.floats(0.0, 120.0))
def test_uniform_round_trip_property(area: float, level: float) -> None:
    vol = volume_from_level(Uniform(area), level)
    assert level_from_volume(Uniform(area), vol) == pytest.approx(level, rel=1e-12, abs=1e-12)
