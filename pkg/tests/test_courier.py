import pytest
from hypothesis import given, strategies as st

from amctd_sim.courier import (TourPlan, advance, courier_collect, courier_deliver, handoff,
                               offload_energy, position_at, set_plan, tour_plan)
from amctd_sim.channel import tx_energy
from amctd_sim.model import CourierNode, DataPacket, NetworkConfig, Sink
from amctd_sim.routing import CourierPhase

CFG = NetworkConfig()


def courier(depth=500.0, heading="up", band=(0.0, 500.0), speed=3.0):
    return CourierNode(0, 1, (100.0, 100.0, depth), speed, band[0], band[1], heading)


def packets(n, start=1):
    return [DataPacket(i, 0, 50, 1, 0.0) for i in range(start, start + n)]


def test_tour_plans():
    p1 = tour_plan(1, CourierPhase.SPARSE, CFG)
    p2 = tour_plan(2, CourierPhase.SPARSE, CFG)
    assert (p1.band_top, p1.band_bottom, p1.speed) == (355.0, 500.0, 6.0)
    assert (p2.band_top, p2.band_bottom) == (100.0, 200.0)
    assert tour_plan(3, CourierPhase.SPARSE, CFG).band_top == 355.0
    assert tour_plan(4, CourierPhase.SPARSE, CFG).band_bottom == 200.0
    for k in range(1, 5):
        p = tour_plan(k, CourierPhase.INITIAL, CFG)
        assert (p.band_top, p.band_bottom, p.speed) == (0.0, 500.0, 3.0)
    with pytest.raises(ValueError):
        TourPlan(1, 200.0, 100.0, 1.0)


def test_position_examples():
    full = TourPlan(1, 0.0, 500.0, 3.0)
    depth, heading = position_at(full, 500.0, "up", 100.0)
    assert depth == pytest.approx(200.0) and heading == "up"
    assert position_at(full, 321.0, "down", 0.0) == (321.0, "down")
    mid = TourPlan(2, 100.0, 200.0, 5.0)
    depth, heading = position_at(mid, 100.0, "down", 40.0)
    assert depth == pytest.approx(100.0) and heading == "down"
    depth, heading = position_at(mid, 100.0, "down", 30.0)
    assert depth == pytest.approx(150.0) and heading == "up"
    with pytest.raises(ValueError):
        position_at(mid, 50.0, "down", 1.0)


def _step_oracle(top, bottom, speed, depth, heading, elapsed, dt=0.01):
    # brute-force bounce simulation in small steps
    steps = round(elapsed / dt)
    for _ in range(steps):
        depth += speed * dt if heading == "down" else -speed * dt
        if depth > bottom:
            depth, heading = 2 * bottom - depth, "up"
        elif depth < top:
            depth, heading = 2 * top - depth, "down"
    return depth, heading


@given(st.integers(0, 3), st.floats(0.0, 1.0), st.sampled_from(["up", "down"]),
       st.integers(0, 20_000))
def test_position_matches_step_oracle(band_idx, frac, heading, centis):
    top, bottom = [(0, 500), (100, 200), (355, 500), (10, 30)][band_idx]
    plan = TourPlan(1, top, bottom, 3.0)
    start = top + frac * (bottom - top)
    elapsed = centis / 100
    depth, _ = position_at(plan, start, heading, elapsed)
    expected, _ = _step_oracle(top, bottom, 3.0, start, heading, elapsed)
    assert top <= depth <= bottom
    assert depth == pytest.approx(expected, abs=1e-6)


def test_phase_switch_is_continuous():
    c = courier(depth=50.0, heading="up")
    set_plan(c, tour_plan(1, CourierPhase.SPARSE, CFG))
    assert c.in_transit
    last = c.depth
    for _ in range(200):
        advance(c, 1.0)
        assert abs(c.depth - last) <= c.speed + 1e-9
        last = c.depth
    assert not c.in_transit
    assert 355.0 <= c.depth <= 500.0


def test_advance_stays_in_band():
    c = courier(depth=150.0, band=(100.0, 200.0), speed=6.0)
    for _ in range(500):
        advance(c, 1.0)
        assert 100.0 <= c.depth <= 200.0


def test_collect_is_idempotent():
    c = courier()
    p = packets(3)
    assert len(courier_collect(c, p[0])) == 1
    assert len(courier_collect(c, p[0])) == 1
    for q in p:
        courier_collect(c, q)
    assert len(c.buffer) == 3


def test_deliver():
    sinks = [Sink(0, (100.0, 100.0, 0.0))]
    c = courier(depth=60.0)
    assert courier_deliver(c, sinks, CFG, now=3.0) == []
    for q in packets(10):
        courier_collect(c, q)
    out = courier_deliver(c, sinks, CFG, now=3.0)
    assert len(out) == 10 and all(q.delivered_time == 3.0 for q in out)
    assert c.energy_ledger == pytest.approx(0.6 * 10 * tx_energy(50, CFG))
    assert c.buffer == [] and not c.buffered_ids


def test_deep_courier_cannot_deliver_directly():
    sinks = [Sink(0, (100.0, 100.0, 0.0))]
    c = courier(depth=355.0, band=(355.0, 500.0))
    courier_collect(c, packets(1)[0])
    assert courier_deliver(c, sinks, CFG) == []
    assert len(c.buffer) == 1


def test_handoff_moves_buffer():
    deep = courier(depth=360.0, band=(355.0, 500.0))
    mid = CourierNode(1, 2, (100.0, 100.0, 190.0), 6.0, 100.0, 200.0)
    for q in packets(4):
        courier_collect(deep, q)
    courier_collect(mid, packets(1)[0])
    assert handoff(deep, mid, CFG, reach=200.0, power_scale=2.0) == 4
    assert len(mid.buffer) == 4  # packet 1 was already buffered
    assert deep.buffer == []
    assert deep.energy_ledger == pytest.approx(offload_energy(4, CFG, 2.0))
    assert handoff(deep, mid, CFG, reach=200.0) == 0
