#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "rsweep/types.hpp"

namespace rsweep {

/// Fully serializable description of one CLI run; a run is reproducible from
/// its config alone. Defaults match the bundled benchmark parameters.
struct RunConfig {
    std::string scenario;                  // smd-k1|smd-k2|smd-b1|smd-b2|smd-none|qubit-gamma|qubit-J|qubit-Delta
    std::string formulation = "both";      // unperturbed|perturbed|both
    std::map<std::string, double> params;  // model parameters and channel switches (sc, z0)
    std::string grid = "1e-2:1e2:400:log";
    std::string format = "csv";            // csv|json
    std::string out;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    std::optional<double> epsilon_damp;

    double param_or(const std::string& key, double fallback) const;
    bool flag(const std::string& key) const;  // param != 0 when present

    std::string to_json_text() const;  // stable key order
    static RunConfig from_json_text(const std::string& text);

    /// Parses "lo:hi:n[:log|lin]".
    void parse_grid(double* lo, double* hi, int* n, bool* log_spaced) const;
};

}  // namespace rsweep
