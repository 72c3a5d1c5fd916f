#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace kac {

/// One statistical or exact check. `pass` is decided by the producer; checks
/// marked informational are reported but do not affect the exit status.
struct Check {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double reference = 0.0;
    std::string provenance;
    bool pass = false;
    bool informational = false;
    std::string note;
    std::vector<std::string> detail_header;
    std::vector<std::vector<double>> detail_rows;
};

struct RunReport {
    std::string run_id;
    nlohmann::ordered_json config_echo;
    std::vector<Check> checks;
    double wall_time = 0.0;
};

/// True when every non-informational check passed.
bool all_pass(const std::vector<Check>& checks);

nlohmann::ordered_json to_json(const Check& c);
std::string summary_json(const RunReport& report);

/// Writes <dir>/summary.json, <dir>/checks.csv and one <dir>/checks/<name>.csv
/// per check. Throws on an empty check list or an unwritable directory.
void emit_report(const RunReport& report, const std::string& dir);

/// Fresh identifier from the wall clock and process id.
std::string make_run_id();

} // namespace kac
