import pytest

from centroid_dtn.config import ConfigError, SimConfig, desk_config, format_config, parse_config, split_router


def test_empty_file_gives_city_defaults():
    cfg = parse_config("")
    assert cfg.duration_s == 43200 and cfg.warmup_s == 1000
    assert cfg.n_nodes == 126
    assert cfg.bandwidth_bps == 10_000_000
    assert cfg.buffer_bytes == 5_000_000
    assert cfg.transmit_range_m == 10
    assert cfg.traffic.ttl_s == 5 * 3600
    assert (cfg.world_width_m, cfg.world_height_m) == (4500, 3400)


def test_override_single_key():
    cfg = parse_config("bandwidth_bps = 125000\n")
    assert cfg.bandwidth_bps == 125000
    assert cfg.buffer_bytes == SimConfig().buffer_bytes


def test_comments_and_preset():
    cfg = parse_config("# scenario\npreset = desk ; small\nseed = 3\n")
    assert cfg == desk_config(seed=3)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("timestep_s = 0\n", "timestep_s"),
        ("\n\nfoo = 1\n", "line 3"),
        ("bandwidth_bps = fast\n", "line 1"),
        ("seed = 1\npreset = desk\n", "preset"),
        ("[group:x]\ncount = 2\n", "missing"),
        ("[nodes]\ncount = 2\n", "unknown section"),
        ("warmup_s = 50000\n", "warmup"),
        ("router = maxprop\n", "maxprop"),
    ],
)
def test_rejections(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_group_sections_replace_defaults():
    text = """
[group:walkers]
count = 3
speed_min = 1
speed_max = 2
pause_min = 0
pause_max = 5

[group:bikes]
count = 2
speed_min = 4
speed_max = 6
pause_min = 0
pause_max = 1
"""
    cfg = parse_config(text)
    assert [g.name for g in cfg.node_groups] == ["walkers", "bikes"]
    assert cfg.n_nodes == 5


def test_format_round_trip():
    cfg = desk_config(seed=9, noise_amplitude_m=12.5, router="vector-noisy")
    assert parse_config(format_config(cfg)) == cfg
    assert parse_config(format_config(SimConfig())) == SimConfig()


def test_noisy_suffix():
    assert split_router("centermass-noisy") == ("centermass", True)
    assert SimConfig(router="centroid-noisy").effective_noise_m == 20
    assert SimConfig(router="centroid-noisy", noise_amplitude_m=5).effective_noise_m == 5
    assert SimConfig(router="centroid").effective_noise_m == 0
