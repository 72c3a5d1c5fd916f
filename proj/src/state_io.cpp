#include "kac/state_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace kac {

namespace {

static_assert(std::endian::native == std::endian::little, "state dump assumes a little-endian host");

void put_u32(std::ofstream& out, std::uint32_t x) { out.write(reinterpret_cast<const char*>(&x), 4); }

std::uint32_t get_u32(std::ifstream& in)
{
    std::uint32_t x = 0;
    in.read(reinterpret_cast<char*>(&x), 4);
    return x;
}

} // namespace

void write_states(const std::string& path, const std::vector<ParticleState>& states)
{
    const std::uint32_t n = states.empty() ? 0u : static_cast<std::uint32_t>(states.front().n());
    for (const auto& s : states) {
        if (static_cast<std::uint32_t>(s.n()) != n) {
            throw std::invalid_argument("write_states: all states must have the same N");
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_states: cannot open " + path);
    }
    out.write("KACS", 4);
    put_u32(out, n);
    put_u32(out, static_cast<std::uint32_t>(states.size()));
    put_u32(out, 0);
    for (const auto& s : states) {
        for (const auto& v : s.v) {
            const double xyz[3] = {v.x, v.y, v.z};
            out.write(reinterpret_cast<const char*>(xyz), sizeof xyz);
        }
    }
    if (!out) {
        throw std::runtime_error("write_states: write failed for " + path);
    }
}

std::vector<ParticleState> read_states(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("read_states: cannot open " + path);
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "KACS", 4) != 0) {
        throw std::runtime_error("read_states: bad magic in " + path);
    }
    const std::uint32_t n = get_u32(in);
    const std::uint32_t count = get_u32(in);
    get_u32(in);
    std::vector<ParticleState> states(count);
    for (auto& s : states) {
        s.v.resize(n);
        for (auto& v : s.v) {
            double xyz[3];
            in.read(reinterpret_cast<char*>(xyz), sizeof xyz);
            v = {xyz[0], xyz[1], xyz[2]};
        }
    }
    if (!in) {
        throw std::runtime_error("read_states: truncated file " + path);
    }
    return states;
}

} // namespace kac
