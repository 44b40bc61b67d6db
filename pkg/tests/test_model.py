import statistics

import pytest

from amctd_sim.model import (CONFIG_KEYS, ConfigError, NetworkConfig, config_with_overrides,
                             dump_config, generate_topology, initial_node_energy, load_config,
                             sink_positions)


def test_table1_defaults(config):
    assert config.node_count == 225
    assert config.initial_energy == 70.0
    assert config.packet_payload == 50
    assert config.tx_range == 100.0
    assert (config.tx_power, config.rx_power, config.idle_power) == (2.0, 0.1, 0.01)
    assert config.courier_count == 4
    assert config.sink_spacing == 100.0
    assert config.hello_interval_rounds == 50
    assert config.aggregation_factor == 0.6
    assert config.run_count == 3
    assert config.rounds_max == 15000


def test_topology_table1(config):
    nodes, sinks, couriers = generate_topology(config, 42)
    assert len(nodes) == 225
    assert all(0 <= n.depth <= 500 for n in nodes)
    assert all(0 <= n.position[0] <= 500 and 0 <= n.position[1] <= 500 for n in nodes)
    assert all(s.position[2] == 0.0 for s in sinks)
    assert [s.position[0] for s in sinks] == [50.0, 150.0, 250.0, 350.0, 450.0]
    assert all(c.depth == config.water_depth for c in couriers)
    assert [c.position[0] for c in couriers] == [62.5, 187.5, 312.5, 437.5]


def test_single_node_topology(config):
    nodes, _, _ = generate_topology(config.replace(node_count=1), 7)
    assert len(nodes) == 1
    x, y, z = nodes[0].position
    assert 0 <= x <= 500 and 0 <= y <= 500 and 0 <= z <= 500


def test_topology_is_reproducible(config):
    a = [n.position for n in generate_topology(config, 1234)[0]]
    b = [n.position for n in generate_topology(config, 1234)[0]]
    assert repr(a) == repr(b)
    assert a != [n.position for n in generate_topology(config, 1235)[0]]


def test_depth_uniformity(config):
    nodes, _, _ = generate_topology(config, 3)
    mean_depth = statistics.fmean(n.depth for n in nodes)
    assert abs(mean_depth - 250.0) <= 25.0


def test_initial_energy(config):
    assert initial_node_energy(config) == 70.0
    assert initial_node_energy(config.replace(initial_energy=1.0)) == 1.0
    nodes, _, _ = generate_topology(config, 42)
    assert sum(n.residual_energy for n in nodes) == pytest.approx(225 * 70.0)


def test_sinks_must_fit(config):
    with pytest.raises(ConfigError):
        sink_positions(config.replace(sink_count=6))
    with pytest.raises(ConfigError):
        generate_topology(config.replace(sink_count=6), 1)


@pytest.mark.parametrize("field,value", [
    ("node_count", 0), ("tx_range", 0.0), ("loss_base", 1.5), ("aggregation_factor", 0.0),
    ("hello_interval_rounds", 0), ("depth_threshold_schedule", (60.0, 40.0)),
])
def test_invalid_config(field, value):
    with pytest.raises(ConfigError):
        NetworkConfig(**{field: value})


def test_overrides_parse_types(config):
    cfg = config_with_overrides(config, {"node_count": "20", "loss_base": "0",
                                         "courier_relay": "off",
                                         "depth_threshold_schedule": "50,30,10"})
    assert cfg.node_count == 20 and isinstance(cfg.node_count, int)
    assert cfg.loss_base == 0.0
    assert cfg.courier_relay is False
    assert cfg.depth_threshold_schedule == (50.0, 30.0, 10.0)
    with pytest.raises(ConfigError):
        config_with_overrides(config, {"no_such_key": "1"})
    with pytest.raises(ConfigError):
        config_with_overrides(config, {"node_count": "many"})


def test_config_file_roundtrip(tmp_path, config):
    cfg = config.replace(node_count=30, courier_relay=False, rng_seed=9)
    path = tmp_path / "scenario.cfg"
    path.write_text("# desk scenario\n\n" + dump_config(cfg), encoding="utf-8")
    assert load_config(path) == cfg
    assert len(dump_config(cfg).splitlines()) == len(CONFIG_KEYS)


def test_config_file_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("node_count = 10\nnodes = 3\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="unknown config key"):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
