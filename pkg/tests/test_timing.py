import json

import numpy as np
import pytest

from streamgpm.apps import count_pattern
from streamgpm.graph import erdos_renyi
from streamgpm.isa import Machine, Memory, assemble
from streamgpm.timing import (
    ConfigError,
    LRUCache,
    MemorySystem,
    SimConfig,
    SimStats,
    SimulationError,
    parse_config,
    simulate,
)


def _trace(asm_builder, **arrays):
    m = Machine(Memory())
    addrs = {k: m.memory.place(np.asarray(v, dtype=np.uint32)) for k, v in arrays.items()}
    return m.execute(assemble(asm_builder(addrs))).trace


def _two_inters(a):
    return f"""
        S_READ {a['x']}, 400, 0
        S_READ {a['y']}, 400, 1
        S_READ {a['z']}, 400, 2
        S_READ {a['w']}, 400, 3
        S_INTER.C 0, 1, r3
        S_INTER.C 2, 3, r4
        S_FREE 0
        S_FREE 1
        S_FREE 2
        S_FREE 3
        HALT
    """


ARRAYS = {k: np.arange(i, 1600 + i, 4) for i, k in enumerate("xyzw")}


def test_config_defaults_and_derived_values():
    cfg = SimConfig()
    assert (cfg.rob_size, cfg.n_stream_regs, cfg.n_ius, cfg.s_cache_bandwidth) == (128, 16, 4, 4)
    assert cfg.memory_latency == 55
    assert cfg.slot_fill_cycles == 14


@pytest.mark.parametrize("bad", [{"n_ius": 0}, {"n_ius": 17}, {"slot_keys": 48}, {"l1_size": 1000},
                                 {"rob_size": -1}, {"ius": "x"}])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        SimConfig().replace(**bad)


def test_config_file_parsing():
    cfg = parse_config("# comment\nius = 8\nscache_bw=16  # keys per cycle\nl2_size = 4MiB\n")
    assert (cfg.n_ius, cfg.s_cache_bandwidth, cfg.l2_size) == (8, 16, 4 << 20)
    with pytest.raises(ConfigError):
        parse_config("warp_drive = 1\n")
    with pytest.raises(ConfigError):
        parse_config("ius 8\n")


def test_key_width_mismatch_is_rejected():
    with pytest.raises(ConfigError):
        simulate([], SimConfig(key_bytes=8, line_bytes=64))


def test_lru_cache_evicts_least_recent():
    c = LRUCache(size=2 * 64, assoc=2, line=64)  # one set, two ways
    assert not c.access(1) and not c.access(2)
    assert c.access(1)
    c.access(3)  # evicts 2
    assert 1 in c and 3 in c and 2 not in c


def test_slot_fill_from_warm_l2_takes_fourteen_cycles():
    cfg = SimConfig()
    mem = MemorySystem(cfg, SimStats())
    mem.stream_store(0, 64)  # lines now resident in L2
    assert mem.stream_fill(0, 64, 100) - 100 == cfg.slot_fill_cycles == 14


def test_cold_load_goes_to_memory():
    cfg = SimConfig()
    mem = MemorySystem(cfg, SimStats())
    assert mem.load(4096, 0) == cfg.l1_latency + cfg.l2_latency + cfg.memory_latency
    assert mem.load(4096, 200) == 200 + cfg.l1_latency


def test_more_ius_overlap_independent_intersections():
    tr = _trace(_two_inters, **ARRAYS)
    one = simulate(tr, SimConfig(n_ius=1)).total_cycles
    two = simulate(tr, SimConfig(n_ius=2)).total_cycles
    assert two < one


def test_lower_bandwidth_is_never_faster():
    tr = _trace(_two_inters, **ARRAYS)
    assert simulate(tr, SimConfig(s_cache_bandwidth=1)).total_cycles >= simulate(tr, SimConfig()).total_cycles


def test_scalar_only_trace_has_zero_intersection_fraction():
    tr = Machine(Memory()).execute(assemble("MOV r3, 1\nADD r3, r3, 2\nMUL r3, r3, r3\nHALT\n")).trace
    st = simulate(tr)
    assert st.total_cycles > 0 and st.intersection_fraction == 0.0


def test_single_long_intersection_dominates():
    tr = _trace(lambda a: f"S_READ {a['x']}, 400, 0\nS_READ {a['y']}, 400, 1\nS_INTER.C 0, 1, r3\n"
                          "S_FREE 0\nS_FREE 1\nHALT\n", **ARRAYS)
    st = simulate(tr)
    assert 0.5 < st.intersection_fraction <= 1.0
    assert st.stream_ops == 5 and sum(st.iu_ops) == 1


def test_use_of_undefined_stream_in_trace():
    tr = _trace(_two_inters, **ARRAYS)
    with pytest.raises(SimulationError):
        simulate([e for e in tr if e.sid_out != 0])


def test_simulation_is_deterministic_and_serializable():
    g = erdos_renyi(80, 0.15, seed=2)
    res = count_pattern(g, "T", keep_trace=True)
    a = simulate(res.trace).to_dict()
    b = simulate(res.trace).to_dict()
    assert a == b
    text = json.dumps(a, allow_nan=False)
    assert json.loads(text)["total_cycles"] == a["total_cycles"]


def test_timing_does_not_change_counts():
    g = erdos_renyi(80, 0.15, seed=2)
    plain = count_pattern(g, "4C").count
    timed = count_pattern(g, "4C", timing=True, config=SimConfig(n_ius=1, s_cache_bandwidth=2))
    assert timed.count == plain and timed.stats.total_cycles > 0


def test_stats_are_internally_consistent():
    g = erdos_renyi(80, 0.15, seed=2)
    st = count_pattern(g, "TT", timing=True).stats
    assert st.intersection_cycles + st.other_cycles == st.total_cycles
    assert st.max_rob_occupancy <= 128 and st.max_load_queue_occupancy <= 32
    assert all(b >= c for b, c in zip(st.iu_busy, st.iu_compare))
    cdf = st.cdf()
    assert cdf[-1][1] == 1.0 and all(p <= q for (_, p), (_, q) in zip(cdf, cdf[1:]))
