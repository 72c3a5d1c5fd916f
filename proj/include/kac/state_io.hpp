#pragma once

#include <string>
#include <vector>

#include "kac/core.hpp"

namespace kac {

/// Binary state dump. Header: "KACS", u32 N, u32 count, u32 zero padding
/// (16 bytes); then count*N*3 little-endian doubles, row-major by particle.
void write_states(const std::string& path, const std::vector<ParticleState>& states);
std::vector<ParticleState> read_states(const std::string& path);

} // namespace kac
