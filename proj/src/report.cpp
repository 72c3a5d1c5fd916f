#include "kac/report.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace kac {

namespace {

std::string file_safe(const std::string& name)
{
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

nlohmann::ordered_json number(double x)
{
    if (std::isfinite(x)) {
        return x;
    }
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

} // namespace

bool all_pass(const std::vector<Check>& checks)
{
    for (const auto& c : checks) {
        if (!c.informational && !c.pass) {
            return false;
        }
    }
    return true;
}

nlohmann::ordered_json to_json(const Check& c)
{
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["estimate"] = number(c.estimate);
    j["stderr"] = number(c.std_error);
    j["reference"] = number(c.reference);
    j["provenance"] = c.provenance;
    j["pass"] = c.pass;
    if (c.informational) {
        j["informational"] = true;
    }
    if (!c.note.empty()) {
        j["note"] = c.note;
    }
    return j;
}

std::string summary_json(const RunReport& report)
{
    nlohmann::ordered_json j;
    j["run_id"] = report.run_id;
    j["config_echo"] = report.config_echo;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        j["checks"].push_back(to_json(c));
    }
    j["wall_time"] = report.wall_time;
    return j.dump(2) + "\n";
}

void emit_report(const RunReport& report, const std::string& dir)
{
    if (report.checks.empty()) {
        throw std::invalid_argument("emit_report: no checks to report");
    }
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "checks", ec);
    if (ec) {
        throw std::runtime_error("emit_report: cannot create " + dir + ": " + ec.message());
    }
    {
        std::ofstream out(fs::path(dir) / "summary.json");
        if (!out) {
            throw std::runtime_error("emit_report: cannot write summary.json in " + dir);
        }
        out << summary_json(report);
    }
    std::ofstream table(fs::path(dir) / "checks.csv");
    if (!table) {
        throw std::runtime_error("emit_report: cannot write checks.csv in " + dir);
    }
    table.precision(17);
    table << "name,estimate,stderr,reference,provenance,pass,informational,note\n";
    for (const auto& c : report.checks) {
        table << csv_field(c.name) << ',' << c.estimate << ',' << c.std_error << ',' << c.reference << ','
              << csv_field(c.provenance) << ',' << (c.pass ? "pass" : "fail") << ',' << (c.informational ? 1 : 0)
              << ',' << csv_field(c.note) << '\n';
        std::ofstream detail(fs::path(dir) / "checks" / (file_safe(c.name) + ".csv"));
        if (!detail) {
            throw std::runtime_error("emit_report: cannot write detail file for " + c.name);
        }
        detail.precision(17);
        if (c.detail_header.empty()) {
            detail << "estimate,stderr,reference,pass\n"
                   << c.estimate << ',' << c.std_error << ',' << c.reference << ',' << (c.pass ? "pass" : "fail")
                   << '\n';
            continue;
        }
        for (std::size_t i = 0; i < c.detail_header.size(); ++i) {
            detail << (i ? "," : "") << csv_field(c.detail_header[i]);
        }
        detail << '\n';
        for (const auto& row : c.detail_rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                detail << (i ? "," : "") << row[i];
            }
            detail << '\n';
        }
    }
}

std::string make_run_id()
{
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(now).count();
    std::ostringstream os;
    os << std::hex << us << '-' << ::getpid();
    return os.str();
}

} // namespace kac
