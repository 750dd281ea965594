#include "tppdsim/workload.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

namespace tppd {

void BenignProfile::validate(const CacheGeometry& llc) const {
    if (first_set > last_set || last_set >= llc.num_sets)
        throw ConfigError("benign profile pid " + std::to_string(pid) +
                          ": footprint [" + std::to_string(first_set) + ", " +
                          std::to_string(last_set) + "] invalid for " +
                          std::to_string(llc.num_sets) + " sets");
    if (locality < 0.0 || locality > 1.0)
        throw ConfigError("benign profile pid " + std::to_string(pid) +
                          ": locality must lie in [0, 1]");
    if (working_set_blocks == 0)
        throw ConfigError("benign profile pid " + std::to_string(pid) +
                          ": working set must be nonempty");
}

std::vector<TraceEvent> generate_benign(const BenignProfile& profile,
                                        const CacheGeometry& llc_geometry,
                                        std::size_t n_events) {
    profile.validate(llc_geometry);
    const std::size_t span = profile.last_set - profile.first_set + 1;
    // Tags live in a per-pid region so processes never share blocks.
    const Addr tag_base = (static_cast<Addr>(profile.pid) + 1) << 32;

    std::mt19937_64 rng(profile.rng_seed);
    // explicit 53-bit uniform; distribution objects are not bit-portable
    const auto coin = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    std::vector<TraceEvent> trace;
    trace.reserve(n_events);
    std::vector<Addr> issued;
    issued.reserve(std::min(n_events, profile.working_set_blocks * 4));

    for (std::size_t i = 0; i < n_events; ++i) {
        Addr address;
        if (!issued.empty() && coin() < profile.locality) {
            address = issued[rng() % issued.size()];
        } else {
            const std::size_t pick = rng() % profile.working_set_blocks;
            const std::size_t set = profile.first_set + pick % span;
            const Addr tag = tag_base + pick / span;
            address = compose_address(llc_geometry, set, tag);
            issued.push_back(address);
        }
        trace.push_back({i, profile.pid, address, Op::Read});
    }
    return trace;
}

std::vector<std::size_t> merge_order(std::span<const std::size_t> lengths,
                                     const Schedule& schedule) {
    if (lengths.empty())
        throw ConfigError("interleave: at least one trace required");
    std::vector<std::size_t> burst(lengths.size(), 1);
    if (schedule.kind == Schedule::Kind::Ratio) {
        if (schedule.ratio.size() != lengths.size())
            throw ConfigError("schedule.ratio: needs one entry per trace");
        for (std::size_t r : schedule.ratio)
            if (r == 0)
                throw ConfigError("schedule.ratio: entries must be positive");
        burst.assign(schedule.ratio.begin(), schedule.ratio.end());
    }

    std::vector<std::size_t> taken(lengths.size(), 0);
    std::size_t remaining = 0;
    for (std::size_t len : lengths)
        remaining += len;

    std::vector<std::size_t> order;
    order.reserve(remaining);
    while (remaining > 0) {
        for (std::size_t src = 0; src < lengths.size(); ++src) {
            for (std::size_t b = 0; b < burst[src] && taken[src] < lengths[src]; ++b) {
                order.push_back(src);
                ++taken[src];
                --remaining;
            }
        }
    }
    return order;
}

std::vector<TraceEvent> interleave(std::span<const std::vector<TraceEvent>> traces,
                                   const Schedule& schedule) {
    std::vector<std::size_t> lengths;
    lengths.reserve(traces.size());
    for (const auto& t : traces)
        lengths.push_back(t.size());
    const auto order = merge_order(lengths, schedule);

    std::vector<TraceEvent> merged;
    merged.reserve(order.size());
    std::vector<std::size_t> cursor(traces.size(), 0);
    for (std::size_t src : order) {
        TraceEvent ev = traces[src][cursor[src]++];
        ev.seq = merged.size();
        merged.push_back(ev);
    }
    return merged;
}

namespace {

Pid parse_pid(const std::string& field, const std::string& where) {
    Pid value = 0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(where + ": bad pid '" + field + "'");
    return value;
}

Addr parse_address(const std::string& field, const std::string& where) {
    if (field.size() < 3 || field[0] != '0' || (field[1] != 'x' && field[1] != 'X'))
        throw ParseError(where + ": address must be 0x-prefixed hex, got '" + field + "'");
    Addr value = 0;
    const auto [ptr, ec] =
        std::from_chars(field.data() + 2, field.data() + field.size(), value, 16);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(where + ": bad address '" + field + "'");
    return value;
}

} // namespace

std::vector<TraceEvent> read_trace(std::istream& in, const std::string& name) {
    std::vector<TraceEvent> trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#')
            continue;
        const std::string where = name + ":" + std::to_string(line_no);

        std::array<std::string, 3> fields;
        std::size_t field = 0;
        std::string token;
        std::stringstream ss(line.substr(start));
        while (std::getline(ss, token, ',')) {
            if (field >= fields.size())
                throw ParseError(where + ": expected pid,R|W,0xADDRESS");
            // trim surrounding whitespace
            const auto b = token.find_first_not_of(" \t\r");
            const auto e = token.find_last_not_of(" \t\r");
            fields[field++] = b == std::string::npos ? "" : token.substr(b, e - b + 1);
        }
        if (field != 3)
            throw ParseError(where + ": expected pid,R|W,0xADDRESS");

        TraceEvent ev;
        ev.seq = trace.size();
        ev.pid = parse_pid(fields[0], where);
        if (fields[1] == "R" || fields[1] == "r")
            ev.op = Op::Read;
        else if (fields[1] == "W" || fields[1] == "w")
            ev.op = Op::Write;
        else
            throw ParseError(where + ": bad op '" + fields[1] + "'");
        ev.address = parse_address(fields[2], where);
        trace.push_back(ev);
    }
    return trace;
}

std::vector<TraceEvent> read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open trace file " + path);
    return read_trace(in, path);
}

void write_trace(std::ostream& out, std::span<const TraceEvent> trace) {
    for (const auto& ev : trace) {
        out << ev.pid << ',' << (ev.op == Op::Read ? 'R' : 'W') << ",0x" << std::hex
            << ev.address << std::dec << '\n';
    }
}

void write_trace_file(const std::string& path, std::span<const TraceEvent> trace) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    write_trace(out, trace);
    if (!out)
        throw IoError("failed writing trace to " + path);
}

namespace {

struct MixShape {
    const char* name;
    // Footprints as fractions of the LLC sets, plus reuse behaviour.
    double a_start, a_frac, a_locality;
    std::size_t a_blocks_per_set;
    double b_start, b_frac, b_locality;
    std::size_t b_blocks_per_set;
};

// Seven co-running pairs with distinct footprint/locality flavours:
// hot loops, streaming scans, and partially overlapping working sets.
// Footprints stay wide so no benign pair concentrates attack-like
// eviction pressure on a single set.
constexpr std::array<MixShape, 7> kMixes = {{
    {"mix1", 0.000, 0.250, 0.92, 2, 0.125, 0.250, 0.70, 4},
    {"mix2", 0.000, 0.125, 0.90, 2, 0.500, 0.500, 0.35, 5},
    {"mix3", 0.250, 0.375, 0.80, 4, 0.250, 0.375, 0.55, 5},
    {"mix4", 0.000, 1.000, 0.55, 2, 0.750, 0.250, 0.85, 4},
    {"mix5", 0.125, 0.500, 0.70, 4, 0.375, 0.500, 0.45, 5},
    {"mix6", 0.000, 0.125, 0.85, 4, 0.062, 0.125, 0.60, 5},
    {"mix7", 0.500, 0.500, 0.40, 5, 0.000, 0.375, 0.75, 3},
}};

BenignProfile shape_profile(const CacheGeometry& llc, Pid pid, double start_frac,
                            double frac, double locality, std::size_t blocks_per_set,
                            std::uint64_t seed) {
    const auto sets = static_cast<double>(llc.num_sets);
    BenignProfile p;
    p.pid = pid;
    p.first_set = static_cast<std::size_t>(start_frac * sets);
    const auto span = std::max<std::size_t>(1, static_cast<std::size_t>(frac * sets));
    p.last_set = std::min(llc.num_sets - 1, p.first_set + span - 1);
    p.locality = locality;
    p.working_set_blocks = span * blocks_per_set;
    p.rng_seed = seed;
    return p;
}

} // namespace

std::vector<BenignProfile> mix_preset(const std::string& name, const CacheGeometry& llc,
                                      Pid first_pid, std::uint64_t seed) {
    for (const auto& mix : kMixes) {
        if (name == mix.name) {
            return {
                shape_profile(llc, first_pid, mix.a_start, mix.a_frac, mix.a_locality,
                              mix.a_blocks_per_set, seed * 2654435761u + 1),
                shape_profile(llc, first_pid + 1, mix.b_start, mix.b_frac, mix.b_locality,
                              mix.b_blocks_per_set, seed * 2654435761u + 2),
            };
        }
    }
    throw ConfigError("unknown benign preset '" + name + "'");
}

std::vector<std::string> mix_preset_names() {
    std::vector<std::string> names;
    for (const auto& mix : kMixes)
        names.emplace_back(mix.name);
    return names;
}

} // namespace tppd
