#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tppdsim/attack.hpp"
#include "tppdsim/detector.hpp"
#include "tppdsim/experiment.hpp"
#include "tppdsim/hierarchy.hpp"
#include "tppdsim/metrics.hpp"
#include "tppdsim/workload.hpp"

namespace py = pybind11;
using namespace tppd;

PYBIND11_MODULE(_core, m) {
    m.doc() = "trace-driven LLC covert-channel simulator with targeted"
              " pseudo-partitioning";

    py::register_exception<SimError>(m, "SimError");

    py::class_<CacheGeometry>(m, "CacheGeometry")
        .def(py::init([](std::size_t sets, std::size_t ways, std::size_t block,
                         Cycles hit_latency, Cycles next_level_latency) {
                 CacheGeometry g{sets, ways, block, hit_latency, next_level_latency};
                 g.validate();
                 return g;
             }),
             py::arg("sets"), py::arg("ways"), py::arg("block_bytes"),
             py::arg("hit_latency"), py::arg("next_level_latency"))
        .def_readonly("sets", &CacheGeometry::num_sets)
        .def_readonly("ways", &CacheGeometry::associativity)
        .def_readonly("block_bytes", &CacheGeometry::block_size)
        .def_readonly("hit_latency", &CacheGeometry::hit_latency)
        .def_readonly("next_level_latency", &CacheGeometry::next_level_latency);

    m.def(
        "map_address",
        [](const CacheGeometry& g, Addr address) { return map_address(g, address); },
        py::arg("geometry"), py::arg("address"),
        "Split an address into (set index, tag).");

    py::enum_<HitLevel>(m, "HitLevel")
        .value("L1_HIT", HitLevel::L1Hit)
        .value("LLC_HIT", HitLevel::LlcHit)
        .value("MISS", HitLevel::Miss);

    py::class_<AccessResult>(m, "AccessResult")
        .def_readonly("level", &AccessResult::level)
        .def_readonly("latency", &AccessResult::latency)
        .def_readonly("set_index", &AccessResult::set_index)
        .def_readonly("back_invalidated", &AccessResult::back_invalidated);

    py::class_<Hierarchy>(m, "Hierarchy")
        .def(py::init<CacheGeometry, CacheGeometry, std::size_t>(), py::arg("l1"),
             py::arg("llc"), py::arg("cores"))
        .def("bind_process", &Hierarchy::bind_process, py::arg("pid"), py::arg("core"))
        .def(
            "access",
            [](Hierarchy& h, Pid pid, Addr address, bool write) {
                return h.access({pid, address, write ? Op::Write : Op::Read});
            },
            py::arg("pid"), py::arg("address"), py::arg("write") = false)
        .def("llc_occupancy", &Hierarchy::llc_occupancy, py::arg("set_index"),
             py::arg("pid"))
        .def_property_readonly("llc_misses",
                               [](const Hierarchy& h) { return h.stats().llc_misses; })
        .def_property_readonly("total_accesses",
                               [](const Hierarchy& h) { return h.stats().total_accesses; });

    py::class_<ProbeOutcome>(m, "ProbeOutcome")
        .def_readonly("miss_count", &ProbeOutcome::miss_count)
        .def_readonly("total_latency", &ProbeOutcome::total_latency);

    py::class_<ChannelRun>(m, "ChannelRun")
        .def_readonly("bits_sent", &ChannelRun::bits_sent)
        .def_readonly("bits_decoded", &ChannelRun::bits_decoded)
        .def_readonly("per_bit_probe", &ChannelRun::per_bit_probe)
        .def_readonly("decode_threshold", &ChannelRun::decode_threshold)
        .def("accuracy", &ChannelRun::accuracy);

    m.def("occupancy_correlation",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              return occupancy_correlation(a, b);
          },
          py::arg("series_a"), py::arg("series_b"),
          "Pearson correlation of two per-epoch occupancy series.");

    m.def("miss_diff", &miss_diff, py::arg("misses_defended"), py::arg("misses_baseline"));
    m.def("isolated_impact", &isolated_impact, py::arg("diff_combined"),
          py::arg("diff_attack_only"));
    m.def(
        "avg_impact",
        [](const std::vector<long long>& impacts) { return avg_impact(impacts); },
        py::arg("impacts"));
    m.def("mpki", &mpki, py::arg("misses"), py::arg("accesses"),
          "Misses per thousand memory accesses.");
    m.def(
        "storage_overhead",
        [](std::size_t sets, std::size_t ways, unsigned id_bits) {
            const auto cost = storage_overhead(sets, ways, id_bits);
            return py::make_tuple(cost.bits_per_set, cost.total_bytes);
        },
        py::arg("sets"), py::arg("ways"), py::arg("id_bits"),
        "Defense metadata cost as (bits per set, total bytes).");

    // Channel experiments via the config surface used by the CLI.
    py::class_<ChannelConfig>(m, "ChannelConfig")
        .def(py::init([](std::size_t target_set, Pid spy_pid, Pid trojan_pid) {
                 ChannelConfig c;
                 c.target_set = target_set;
                 c.spy_pid = spy_pid;
                 c.trojan_pid = trojan_pid;
                 return c;
             }),
             py::arg("target_set"), py::arg("spy_pid") = 0, py::arg("trojan_pid") = 1)
        .def_readwrite("target_set", &ChannelConfig::target_set)
        .def_readwrite("spy_pid", &ChannelConfig::spy_pid)
        .def_readwrite("trojan_pid", &ChannelConfig::trojan_pid)
        .def_readwrite("es_size", &ChannelConfig::es_size);

    py::class_<PrimeProbeChannel>(m, "PrimeProbeChannel")
        .def(py::init<Hierarchy&, ChannelConfig>(), py::keep_alive<1, 2>(),
             py::arg("hierarchy"), py::arg("config"))
        .def("prime", &PrimeProbeChannel::prime)
        .def("transmit", &PrimeProbeChannel::transmit, py::arg("bit"))
        .def("probe", &PrimeProbeChannel::probe)
        .def(
            "run_channel",
            [](PrimeProbeChannel& ch, const std::vector<bool>& bits) {
                return ch.run_channel(bits);
            },
            py::arg("bits"))
        .def_property_readonly("decode_threshold", &PrimeProbeChannel::decode_threshold)
        .def_static("random_bits", &PrimeProbeChannel::random_bits, py::arg("count"),
                    py::arg("seed"));

    py::class_<TppdPolicy>(m, "TppdPolicy")
        .def(py::init([](std::size_t sets, std::size_t ways, std::size_t z) {
                 return new TppdPolicy(sets, ways, ThresholdConfig::symmetric(z));
             }),
             py::arg("sets"), py::arg("ways"), py::arg("z"))
        .def(
            "engage",
            [](TppdPolicy& policy, Hierarchy& h, std::size_t set_index, Pid spy,
               Pid trojan) { policy.engage(set_index, spy, trojan, h.llc_set(set_index)); },
            py::arg("hierarchy"), py::arg("set_index"), py::arg("spy"), py::arg("trojan"))
        .def("engaged", &TppdPolicy::engaged, py::arg("set_index"));

    m.def(
        "attach_tppd",
        [](Hierarchy& h, TppdPolicy& policy) { h.set_policy(&policy); },
        py::keep_alive<1, 2>(), py::arg("hierarchy"), py::arg("policy"),
        "Route the hierarchy's LLC victim selection through a policy.");

    m.def(
        "run_experiment_file",
        [](const std::string& config_path) {
            const auto config = load_experiment_config(config_path);
            const auto result = run_experiment(config);
            write_reports(config, result);
            py::dict out;
            out["llc_misses"] = result.stats.llc_misses;
            out["total_accesses"] = result.stats.total_accesses;
            out["verdicts"] = result.verdicts.size();
            if (result.channel)
                out["accuracy"] = result.channel->accuracy();
            return out;
        },
        py::arg("config_path"),
        "Load a JSON experiment config, run it, and write its reports.");
}
