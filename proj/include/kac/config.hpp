#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "kac/kernel.hpp"

namespace kac {

inline const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"sample", "simulate", "gap", "spectrum", "chaos", "verify-all"};
    return names;
}

struct ExperimentConfig {
    std::string experiment;
    std::vector<int> n_list{3, 4, 8};
    double alpha = 1.0;
    std::string kernel = "uniform"; // "uniform" or "table:b0,b1,...,bm"
    std::int64_t n_samples = 1'000'000;
    int replicas = 16;
    std::uint64_t seed = 0x5eed;
    std::string output = "kac-gap-out";
    std::string process = "kac"; // simulate / gap: "kac" or "conjugate"
    std::int64_t max_events = 100'000;
    double t_max = 0.0; // 0: stop on max_events only
    std::map<std::string, double> tolerances; // keys without the "tol_" prefix

    double tol(const std::string& name, double fallback) const;
};

/// All validation failures, each prefixed with its field path.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> messages);
    const std::vector<std::string>& messages() const { return messages_; }

  private:
    std::vector<std::string> messages_;
};

/// Flat key = value text; '#' starts a comment; keys before the first
/// [section] header are defaults for every experiment. Reads the defaults
/// and the [experiment] section. Throws ConfigError.
ExperimentConfig parse_config(std::istream& in, const std::string& experiment);
ExperimentConfig default_config(const std::string& experiment);

/// Field-path messages for every violated invariant; empty when valid.
std::vector<std::string> validate(const ExperimentConfig& cfg);

KernelSpec make_kernel(const ExperimentConfig& cfg);

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

} // namespace kac
