#include "rsweep/run_config.hpp"

#include <charconv>
#include <sstream>

#include "json.hpp"

namespace rsweep {

using ordered_json = nlohmann::ordered_json;

double RunConfig::param_or(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

bool RunConfig::flag(const std::string& key) const {
    auto it = params.find(key);
    return it != params.end() && it->second != 0.0;
}

std::string RunConfig::to_json_text() const {
    ordered_json j;
    j["scenario"] = scenario;
    j["formulation"] = formulation;
    ordered_json jp = ordered_json::object();
    for (const auto& [k, v] : params) jp[k] = v;  // std::map iterates sorted
    j["params"] = jp;
    j["grid"] = grid;
    j["format"] = format;
    j["out"] = out;
    j["tol"] = tol;
    j["seed"] = seed;
    if (epsilon_damp) j["epsilon_damp"] = *epsilon_damp;
    return j.dump(2);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    RunConfig c;
    try {
        c.scenario = j.value("scenario", std::string{});
        c.formulation = j.value("formulation", std::string{"both"});
        if (j.contains("params"))
            for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
                c.params[it.key()] = it.value().get<double>();
        c.grid = j.value("grid", std::string{"1e-2:1e2:400:log"});
        c.format = j.value("format", std::string{"csv"});
        c.out = j.value("out", std::string{});
        c.tol = j.value("tol", 1e-6);
        c.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("epsilon_damp")) c.epsilon_damp = j["epsilon_damp"].get<double>();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    return c;
}

void RunConfig::parse_grid(double* lo, double* hi, int* n, bool* log_spaced) const {
    std::istringstream in(grid);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(in, tok, ':')) parts.push_back(tok);
    if (parts.size() < 3 || parts.size() > 4)
        throw ConfigError("grid must be lo:hi:n[:log|lin], got '" + grid + "'");
    try {
        *lo = std::stod(parts[0]);
        *hi = std::stod(parts[1]);
        *n = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw ConfigError("grid must be numeric lo:hi:n[:log|lin], got '" + grid + "'");
    }
    *log_spaced = true;
    if (parts.size() == 4) {
        if (parts[3] == "log") *log_spaced = true;
        else if (parts[3] == "lin") *log_spaced = false;
        else throw ConfigError("grid spacing must be log or lin, got '" + parts[3] + "'");
    }
    if (*n < 2 || !(*hi > *lo) || (*log_spaced && !(*lo > 0)))
        throw ConfigError("grid bounds invalid: '" + grid + "'");
}

}  // namespace rsweep
