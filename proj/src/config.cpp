#include "kac/config.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace kac {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

template <class T>
bool parse_number(const std::string& s, T& out)
{
    std::istringstream is(s);
    if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0) {
            is.str(s.substr(2));
            is >> std::hex;
        }
    }
    is >> out;
    return !is.fail() && is.eof();
}

std::vector<double> parse_table(const std::string& spec, bool& ok)
{
    std::vector<double> out;
    ok = true;
    for (const auto& item : split(spec, ',')) {
        double x = 0.0;
        if (!parse_number(item, x)) {
            ok = false;
            return {};
        }
        out.push_back(x);
    }
    return out;
}

} // namespace

double ExperimentConfig::tol(const std::string& name, double fallback) const
{
    const auto it = tolerances.find(name);
    return it == tolerances.end() ? fallback : it->second;
}

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error([&] {
          std::string s;
          for (const auto& m : messages) {
              s += (s.empty() ? "" : "\n") + m;
          }
          return s;
      }()),
      messages_(std::move(messages))
{
}

ExperimentConfig default_config(const std::string& experiment)
{
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    return cfg;
}

ExperimentConfig parse_config(std::istream& in, const std::string& experiment)
{
    ExperimentConfig cfg = default_config(experiment);
    std::vector<std::string> errors;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (std::find(experiment_names().begin(), experiment_names().end(), section) ==
                experiment_names().end()) {
                errors.push_back("[" + section + "]: unknown experiment section");
            }
            continue;
        }
        if (!section.empty() && section != experiment) {
            continue;
        }
        const auto eq = line.find('=');
        const std::string path = section.empty() ? "" : "[" + section + "].";
        if (eq == std::string::npos) {
            errors.push_back(path + "line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string field = path + key;
        auto bad = [&](const std::string& what) { errors.push_back(field + ": " + what); };
        if (key == "N") {
            cfg.n_list.clear();
            for (const auto& item : split(value, ',')) {
                int n = 0;
                if (!parse_number(item, n)) {
                    bad("not an integer list: '" + value + "'");
                    break;
                }
                cfg.n_list.push_back(n);
            }
        } else if (key == "alpha") {
            if (!parse_number(value, cfg.alpha)) {
                bad("not a number: '" + value + "'");
            }
        } else if (key == "kernel") {
            cfg.kernel = value;
        } else if (key == "n_samples") {
            if (!parse_number(value, cfg.n_samples)) {
                bad("not an integer: '" + value + "'");
            }
        } else if (key == "replicas") {
            if (!parse_number(value, cfg.replicas)) {
                bad("not an integer: '" + value + "'");
            }
        } else if (key == "seed") {
            if (!parse_number(value, cfg.seed)) {
                bad("not an unsigned integer: '" + value + "'");
            }
        } else if (key == "output") {
            cfg.output = value;
        } else if (key == "process") {
            cfg.process = value;
        } else if (key == "max_events") {
            if (!parse_number(value, cfg.max_events)) {
                bad("not an integer: '" + value + "'");
            }
        } else if (key == "t_max") {
            if (!parse_number(value, cfg.t_max)) {
                bad("not a number: '" + value + "'");
            }
        } else if (key.rfind("tol_", 0) == 0) {
            double t = 0.0;
            if (!parse_number(value, t)) {
                bad("not a number: '" + value + "'");
            } else {
                cfg.tolerances[key.substr(4)] = t;
            }
        } else {
            bad("unknown key");
        }
    }
    auto more = validate(cfg);
    errors.insert(errors.end(), more.begin(), more.end());
    if (!errors.empty()) {
        throw ConfigError(std::move(errors));
    }
    return cfg;
}

std::vector<std::string> validate(const ExperimentConfig& cfg)
{
    std::vector<std::string> errors;
    const std::string p = "[" + cfg.experiment + "].";
    if (std::find(experiment_names().begin(), experiment_names().end(), cfg.experiment) == experiment_names().end()) {
        errors.push_back("experiment: unknown experiment '" + cfg.experiment + "'");
    }
    if (cfg.n_list.empty()) {
        errors.push_back(p + "N: empty list");
    }
    for (int n : cfg.n_list) {
        if (n < 2) {
            errors.push_back(p + "N: N must be at least 2, got " + std::to_string(n));
        }
    }
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 2.0)) {
        std::ostringstream os;
        os << p << "alpha: alpha out of [0,2] (got " << cfg.alpha << ")";
        errors.push_back(os.str());
    }
    if (cfg.replicas < 1) {
        errors.push_back(p + "replicas: must be at least 1");
    }
    if (cfg.n_samples < 1) {
        errors.push_back(p + "n_samples: must be at least 1");
    }
    if (cfg.process != "kac" && cfg.process != "conjugate") {
        errors.push_back(p + "process: expected 'kac' or 'conjugate'");
    }
    if (cfg.max_events < 0) {
        errors.push_back(p + "max_events: must be non-negative");
    }
    if (cfg.t_max < 0.0) {
        errors.push_back(p + "t_max: must be non-negative");
    }
    if (cfg.kernel != "uniform") {
        if (cfg.kernel.rfind("table:", 0) != 0) {
            errors.push_back(p + "kernel: expected 'uniform' or 'table:<values>'");
        } else {
            bool ok = false;
            const auto values = parse_table(cfg.kernel.substr(6), ok);
            if (!ok) {
                errors.push_back(p + "kernel: table values must be numbers");
            } else {
                try {
                    TabulatedDensity t(values);
                } catch (const std::exception& e) {
                    errors.push_back(p + "kernel: " + e.what());
                }
            }
        }
    }
    for (const auto& [k, v] : cfg.tolerances) {
        if (!(v > 0.0)) {
            errors.push_back(p + "tol_" + k + ": must be positive");
        }
    }
    return errors;
}

KernelSpec make_kernel(const ExperimentConfig& cfg)
{
    KernelSpec k;
    k.alpha = cfg.alpha;
    if (cfg.kernel != "uniform") {
        bool ok = false;
        k.table.emplace(parse_table(cfg.kernel.substr(6), ok));
    }
    return k;
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg)
{
    nlohmann::ordered_json j;
    j["experiment"] = cfg.experiment;
    j["N"] = cfg.n_list;
    j["alpha"] = cfg.alpha;
    j["kernel"] = cfg.kernel;
    j["n_samples"] = cfg.n_samples;
    j["replicas"] = cfg.replicas;
    j["seed"] = cfg.seed;
    j["output"] = cfg.output;
    j["process"] = cfg.process;
    j["max_events"] = cfg.max_events;
    j["t_max"] = cfg.t_max;
    nlohmann::ordered_json tol = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.tolerances) {
        tol[k] = v;
    }
    j["tolerances"] = tol;
    return j;
}

} // namespace kac
