"""Smoke tests for the python bindings: build a small simulator, run the
covert channel with and without the defense, and exercise the metric
helpers end to end."""

import json
import os
import tempfile

import tppdsim


def test_geometry_and_mapping():
    llc = tppdsim.CacheGeometry(
        sets=4096, ways=8, block_bytes=64, hit_latency=18, next_level_latency=250
    )
    assert tppdsim.map_address(llc, 0x0) == (0, 0)
    assert tppdsim.map_address(llc, 5 * 64) == (5, 0)
    assert tppdsim.map_address(llc, (3 * 4096 + 5) * 64) == (5, 3)

    try:
        tppdsim.CacheGeometry(
            sets=3, ways=8, block_bytes=64, hit_latency=18, next_level_latency=250
        )
    except tppdsim.SimError:
        pass
    else:
        raise AssertionError("non power-of-two set count must be rejected")


def make_hierarchy():
    l1 = tppdsim.CacheGeometry(
        sets=4, ways=2, block_bytes=64, hit_latency=2, next_level_latency=18
    )
    llc = tppdsim.CacheGeometry(
        sets=16, ways=4, block_bytes=64, hit_latency=18, next_level_latency=250
    )
    h = tppdsim.Hierarchy(l1, llc, cores=2)
    h.bind_process(0, 0)
    h.bind_process(1, 1)
    return h


def test_access_latencies():
    h = make_hierarchy()
    miss = h.access(0, 0x1000)
    assert miss.level == tppdsim.HitLevel.MISS
    assert miss.latency == 2 + 18 + 250
    hit = h.access(0, 0x1000)
    assert hit.level == tppdsim.HitLevel.L1_HIT
    assert hit.latency == 2


def test_channel_with_and_without_defense():
    bits = tppdsim.PrimeProbeChannel.random_bits(64, 7)

    h = make_hierarchy()
    channel = tppdsim.PrimeProbeChannel(h, tppdsim.ChannelConfig(target_set=5))
    run = channel.run_channel(bits)
    assert run.accuracy() == 1.0
    for sent, probe in zip(run.bits_sent, run.per_bit_probe):
        assert probe.miss_count == (4 if sent else 0)

    defended = make_hierarchy()
    policy = tppdsim.TppdPolicy(sets=16, ways=4, z=2)
    tppdsim.attach_tppd(defended, policy)
    policy.engage(defended, 5, 0, 1)
    assert policy.engaged(5)
    channel = tppdsim.PrimeProbeChannel(defended, tppdsim.ChannelConfig(target_set=5))
    run = channel.run_channel(bits)
    for probe in run.per_bit_probe:
        assert probe.miss_count == 2  # z misses for a 0, A - z for a 1: equal at A/2
    zeros = sum(1 for b in run.bits_sent if not b)
    assert abs(run.accuracy() - zeros / len(run.bits_sent)) < 1e-12


def test_metrics():
    assert tppdsim.storage_overhead(4096, 8, 2) == (11, 5632.0)
    assert tppdsim.storage_overhead(4096, 8, 16) == (39, 19968.0)
    assert tppdsim.miss_diff(117, 100) == 17
    assert tppdsim.isolated_impact(20, 17) == 3
    assert tppdsim.avg_impact([3, -1, 4]) == 2.0
    assert tppdsim.mpki(50, 100000) == 0.5
    assert tppdsim.occupancy_correlation([1, 2, 3], [3, 2, 1]) == -1.0


def test_experiment_file_roundtrip():
    config = {
        "name": "smoke",
        "cores": 2,
        "l1": {"sets": 4, "ways": 2, "block_bytes": 64, "hit_latency": 2},
        "llc": {"sets": 32, "ways": 4, "block_bytes": 64, "hit_latency": 18},
        "memory_latency": 250,
        "defense": {"kind": "tppd", "z": 2},
        "force_engage": True,
        "workload": {
            "attack": {"enabled": True, "target_set": 9, "bits": 32, "bit_seed": 3}
        },
    }
    with tempfile.TemporaryDirectory() as tmp:
        config["out_dir"] = os.path.join(tmp, "out")
        path = os.path.join(tmp, "config.json")
        with open(path, "w") as f:
            json.dump(config, f)
        summary = tppdsim.run_experiment_file(path)
        assert summary["total_accesses"] > 0
        assert 0.0 <= summary["accuracy"] <= 1.0
        with open(os.path.join(config["out_dir"], "summary.json")) as f:
            report = json.load(f)
        assert report["name"] == "smoke"
        assert report["channel"]["bits"] == 32


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
