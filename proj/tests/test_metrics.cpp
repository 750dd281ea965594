#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tppdsim/metrics.hpp"

using namespace tppd;

TEST_CASE("miss deltas keep their sign") {
    CHECK(miss_diff(117, 100) == 17);
    CHECK(miss_diff(100, 100) == 0);
    CHECK(miss_diff(90, 100) == -10);
}

TEST_CASE("isolated impact and its average") {
    CHECK(isolated_impact(20, 17) == 3);
    CHECK(isolated_impact(17, 17) == 0);

    const std::vector<long long> impacts{3, -1, 4};
    CHECK(avg_impact(impacts) == doctest::Approx(2.0));
    const std::vector<long long> zeros{0, 0, 0};
    CHECK(avg_impact(zeros) == doctest::Approx(0.0));
    CHECK_THROWS_AS(avg_impact({}), EmptyBenchmarkSet);
}

TEST_CASE("zero property: matching deltas cancel") {
    const long long diff = miss_diff(150, 100);
    CHECK(isolated_impact(miss_diff(250, 200), diff) == 0);
}

TEST_CASE("mpki is per thousand accesses") {
    CHECK(mpki(50, 100000) == doctest::Approx(0.5));
    CHECK(mpki(0, 12345) == doctest::Approx(0.0));
    CHECK_THROWS_AS(mpki(1, 0), SimError);
}

TEST_CASE("storage overhead matches the published table") {
    const auto core_id = storage_overhead(4096, 8, 2);
    CHECK(core_id.bits_per_set == 11);
    CHECK(core_id.total_bits == 45056);
    CHECK(core_id.total_bytes == doctest::Approx(5632.0)); // 5.5 KB

    const auto process_id = storage_overhead(4096, 8, 16);
    CHECK(process_id.bits_per_set == 39);
    CHECK(process_id.total_bytes == doctest::Approx(19968.0)); // 19.5 KB

    const auto minimal = storage_overhead(1, 2, 0);
    CHECK(minimal.bits_per_set == 3);

    CHECK_THROWS_AS(storage_overhead(16, 3, 2), ConfigError);
}
