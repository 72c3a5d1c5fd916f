#include "doctest.h"
#include "generators.hpp"

#include <stdexcept>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kac/state_io.hpp"

using namespace kac;

namespace {
std::string tmp_path(const char* name)
{
    return (std::filesystem::temp_directory_path() / name).string();
}
} // namespace

TEST_CASE("states round-trip bit for bit")
{
    Rng r = gen::rng(1);
    std::vector<ParticleState> states;
    for (int i = 0; i < 50; ++i) {
        states.push_back(sample_invariant_recursive(6, r));
    }
    const std::string p = tmp_path("kac_states_roundtrip.bin");
    write_states(p, states);
    CHECK(std::filesystem::file_size(p) == 16 + 50 * 6 * 3 * sizeof(double));
    const auto back = read_states(p);
    REQUIRE(back.size() == states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (int j = 0; j < 6; ++j) {
            CHECK(back[i].v[j].x == states[i].v[j].x);
            CHECK(back[i].v[j].y == states[i].v[j].y);
            CHECK(back[i].v[j].z == states[i].v[j].z);
        }
    }
    std::remove(p.c_str());
}

TEST_CASE("state files are validated")
{
    Rng r = gen::rng(2);
    std::vector<ParticleState> mixed{sample_invariant_recursive(3, r), sample_invariant_recursive(4, r)};
    CHECK_THROWS_AS(write_states(tmp_path("kac_mixed.bin"), mixed), std::invalid_argument);

    const std::string bad = tmp_path("kac_bad_magic.bin");
    {
        std::ofstream f(bad, std::ios::binary);
        f << "NOPE0000000000000000";
    }
    CHECK_THROWS_AS(read_states(bad), std::runtime_error);

    const std::string good = tmp_path("kac_truncated.bin");
    write_states(good, {sample_invariant_recursive(3, r), sample_invariant_recursive(3, r)});
    std::filesystem::resize_file(good, std::filesystem::file_size(good) - 8);
    CHECK_THROWS_AS(read_states(good), std::runtime_error);
    CHECK_THROWS_AS(read_states(tmp_path("kac_does_not_exist.bin")), std::runtime_error);
    std::remove(bad.c_str());
    std::remove(good.c_str());
}
