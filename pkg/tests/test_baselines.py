import pytest

from amctd_sim.baselines import (BaselinePolicy, DbrRouter, EedbrRouter, dbr_forward_decision,
                                 dbr_holding_time, eedbr_holding_time, eedbr_select)
from amctd_sim.model import NeighborEntry, NetworkConfig, SensorNode

CFG = NetworkConfig()
DBR = BaselinePolicy("DBR")
EEDBR = BaselinePolicy("EEDBR")


def test_policy_validation():
    with pytest.raises(ValueError):
        BaselinePolicy("VBF")
    with pytest.raises(ValueError):
        BaselinePolicy("DBR", depth_threshold=0)


def test_dbr_decision():
    assert dbr_forward_decision(300, 240, DBR)
    assert not dbr_forward_decision(300, 241, DBR)
    assert dbr_holding_time(CFG.tx_range, DBR, CFG.tx_range) == 0.0
    assert dbr_holding_time(60, DBR, CFG.tx_range) == pytest.approx(0.2)
    assert dbr_holding_time(0, DBR, CFG.tx_range) == 0.5


def test_eedbr_select():
    a, b = NeighborEntry(1, 100, 0.0, 70), NeighborEntry(2, 100, 0.0, 35)
    assert eedbr_select([b, a], EEDBR) == 1
    a, b = NeighborEntry(1, 100, 0.0, 50), NeighborEntry(2, 200, 0.0, 50)
    assert eedbr_select([b, a], EEDBR) == 1
    assert eedbr_select([], EEDBR) is None
    assert eedbr_holding_time(70, [70, 35], EEDBR) == 0.0
    assert eedbr_holding_time(35, [70, 35], EEDBR) == 0.5


def _source():
    table = [NeighborEntry(1, 150, 0.0, 30), NeighborEntry(2, 220, 0.0, 60),
             NeighborEntry(3, 280, 0.0, 70), NeighborEntry(4, 100, 0.0, 10, is_courier=True)]
    return SensorNode(0, (0, 0, 300), 70.0, neighbor_table=table)


def test_dbr_router_ranks_by_depth_and_ignores_couriers():
    ranked = DbrRouter(CFG).rank(_source())
    assert [e.id for e, _ in ranked] == [1, 2]
    assert ranked[0][1] < ranked[1][1]


def test_eedbr_router_ranks_by_energy():
    ranked = EedbrRouter(CFG).rank(_source())
    assert [e.id for e, _ in ranked] == [2, 1]
    assert ranked[0][1] == 0.0


def test_baselines_never_adapt():
    for router in (DbrRouter(CFG), EedbrRouter(CFG)):
        before = router.depth_threshold
        for dead in (0, 5, 169, 201):
            router.on_hello(dead)
            assert router.depth_threshold == before == 60.0
        assert not router.uses_couriers
