#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rsweep/commands.hpp"
#include "rsweep/fixed_point.hpp"
#include "rsweep/hinf.hpp"
#include "rsweep/interconnection.hpp"
#include "rsweep/models.hpp"
#include "rsweep/mu.hpp"
#include "rsweep/run_config.hpp"
#include "rsweep/state_space.hpp"

namespace py = pybind11;
using namespace rsweep;

namespace {

// Structure spec from python: list of ("real", size, label) / ("full", rows, cols).
BlockStructure structure_from_spec(const std::vector<std::tuple<std::string, int, py::object>>& spec) {
    BlockStructure st;
    for (const auto& [kind, a, b] : spec) {
        if (kind == "real") {
            st.blocks.push_back(Block::repeated_real(a, py::cast<std::string>(b)));
        } else if (kind == "full") {
            st.blocks.push_back(Block::full_complex(a, py::cast<int>(b)));
        } else {
            throw StructureMismatch("block kind must be 'real' or 'full'");
        }
    }
    return st;
}

std::string stability_name(Stability s) {
    switch (s) {
        case Stability::StrictlyHurwitz: return "strictly-hurwitz";
        case Stability::MarginallyStable: return "marginally-stable";
        case Stability::Unstable: return "unstable";
    }
    return "?";
}

}  // namespace

PYBIND11_MODULE(_rsweep, m) {
    m.doc() = "Robust performance margins for uncertain LTI systems";

    py::register_exception<SingularResolvent>(m, "SingularResolventError");
    py::register_exception<SingularLftLoop>(m, "SingularLftLoopError");
    py::register_exception<StructureMismatch>(m, "StructureMismatchError");
    py::register_exception<UnstableSystem>(m, "UnstableSystemError");
    py::register_exception<InvalidDelta>(m, "InvalidDeltaError");

    py::class_<StateSpaceModel>(m, "StateSpaceModel")
        .def(py::init<Matrix, Matrix, Matrix, Matrix>(), py::arg("A"), py::arg("B"),
             py::arg("C"), py::arg("D"))
        .def(py::init<Matrix, Matrix, Matrix>(), py::arg("A"), py::arg("B"), py::arg("C"))
        .def_readonly("A", &StateSpaceModel::A)
        .def_readonly("B", &StateSpaceModel::B)
        .def_readonly("C", &StateSpaceModel::C)
        .def_readonly("D", &StateSpaceModel::D)
        .def_property_readonly(
            "stability", [](const StateSpaceModel& s) { return stability_name(s.stability); })
        .def("transfer", &transfer_eval, py::arg("s"));

    m.def("resolvent", &resolvent, py::arg("A"), py::arg("s"));
    m.def("transfer_eval", &transfer_eval, py::arg("model"), py::arg("s"));
    m.def("eigenfrequencies", &eigenfrequencies, py::arg("A"));

    m.def(
        "error_system_unperturbed",
        [](const Matrix& A, const Matrix& S, double delta, const Matrix& C_u, const Matrix& C_p) {
            return error_system_unperturbed(A, StructuredPerturbation{S, delta, std::nullopt, 0.0},
                                            C_u, C_p);
        },
        py::arg("A"), py::arg("S"), py::arg("delta"), py::arg("C_u"), py::arg("C_p"));
    m.def(
        "error_system_perturbed",
        [](const Matrix& A, const Matrix& S, double delta, const Matrix& C_u, const Matrix& C_p) {
            return error_system_perturbed(A, StructuredPerturbation{S, delta, std::nullopt, 0.0},
                                          C_u, C_p);
        },
        py::arg("A"), py::arg("S"), py::arg("delta"), py::arg("C_u"), py::arg("C_p"));
    m.def(
        "scaling_identity_residual",
        [](const Matrix& A, const Matrix& S, double delta, const Matrix& C_u, const Matrix& C_p,
           double omega) {
            return scaling_identity_residual(A, StructuredPerturbation{S, delta, std::nullopt, 0.0},
                                             C_u, C_p, omega);
        },
        py::arg("A"), py::arg("S"), py::arg("delta"), py::arg("C_u"), py::arg("C_p"),
        py::arg("omega"));

    // Benchmark models.
    py::class_<SmdParams>(m, "SmdParams")
        .def(py::init([](double m1, double m2, double k1, double k2, double b1, double b2) {
                 return SmdParams{m1, m2, k1, k2, b1, b2};
             }),
             py::arg("m1") = 3.0, py::arg("m2") = 1.0, py::arg("k1") = 1.0, py::arg("k2") = 1.0,
             py::arg("b1") = 0.1, py::arg("b2") = 0.1)
        .def_readwrite("m1", &SmdParams::m1)
        .def_readwrite("m2", &SmdParams::m2)
        .def_readwrite("k1", &SmdParams::k1)
        .def_readwrite("k2", &SmdParams::k2)
        .def_readwrite("b1", &SmdParams::b1)
        .def_readwrite("b2", &SmdParams::b2);
    m.def("smd_model", &smd_model, py::arg("params"));
    m.def(
        "smd_structure",
        [](const SmdParams& p, const std::string& which) {
            return smd_structure(p, smd_structure_from_name(which));
        },
        py::arg("params"), py::arg("which"));
    m.def("smd_colocation_Sc", &smd_colocation_Sc, py::arg("params"));

    py::class_<QubitParams>(m, "QubitParams")
        .def(py::init([](double Delta, double J, double gamma) {
                 return QubitParams{Delta, J, gamma};
             }),
             py::arg("Delta") = 0.0, py::arg("J") = 1.0, py::arg("gamma") = 0.01)
        .def_readwrite("Delta", &QubitParams::Delta)
        .def_readwrite("J", &QubitParams::J)
        .def_readwrite("gamma", &QubitParams::gamma)
        .def_property_readonly("J_eff", &QubitParams::J_eff);
    py::class_<BlochModel>(m, "BlochModel")
        .def_readonly("A_H", &BlochModel::A_H)
        .def_readonly("A_L", &BlochModel::A_L)
        .def_readonly("A", &BlochModel::A)
        .def_readonly("C_u", &BlochModel::C_u)
        .def_readonly("r_L", &BlochModel::r_L)
        .def_readonly("r_R", &BlochModel::r_R);
    m.def("two_qubit_bloch", &two_qubit_bloch, py::arg("params"));
    m.def("gamma_structure", &gamma_structure, py::arg("params"));
    m.def("fidelity_analytic", &fidelity_analytic, py::arg("t"), py::arg("params"));
    m.def("fidelity_simulate", &fidelity_simulate, py::arg("t"), py::arg("params"), py::arg("r0"));

    // Interconnections and mu.
    py::class_<Interconnection>(m, "Interconnection")
        .def("eval", [](const Interconnection& G, Complex s) { return G.eval(s); }, py::arg("s"))
        .def_property_readonly("uncertainty_dim", &Interconnection::uncertainty_dim)
        .def_readonly("dist", &Interconnection::dist)
        .def_readonly("err", &Interconnection::err)
        .def_readonly("scenario", &Interconnection::scenario);
    m.def("g_unperturbed_basic", &g_unperturbed_basic, py::arg("A"), py::arg("S"), py::arg("C_u"),
          py::arg("C_p"));
    m.def("g_unperturbed_general", &g_unperturbed_general, py::arg("A"), py::arg("S"),
          py::arg("S_c"), py::arg("C_u"), py::arg("include_z0"), py::arg("include_Sc"));
    m.def("g_perturbed_basic", &g_perturbed_basic, py::arg("A"), py::arg("S"), py::arg("S_c"),
          py::arg("C_u"));
    m.def("g_perturbed_z0", &g_perturbed_z0, py::arg("A"), py::arg("S"), py::arg("S_c"),
          py::arg("C_u"));
    m.def(
        "lft_upper",
        [](const Interconnection& G, Complex s, const ComplexMatrix& Delta) {
            return lft_upper(G, s, Delta);
        },
        py::arg("G"), py::arg("s"), py::arg("Delta"));
    m.def("direct_bound_perturbed", &direct_bound_perturbed, py::arg("A"), py::arg("S"),
          py::arg("S_c"), py::arg("C_u"), py::arg("omega"), py::arg("delta"), py::arg("delta_c"),
          py::arg("include_z0"));

    m.def(
        "mu_upper",
        [](const ComplexMatrix& M,
           const std::vector<std::tuple<std::string, int, py::object>>& spec,
           const std::string& mode) {
            MuUpperResult r = mu_upper(M, structure_from_spec(spec),
                                       mode == "complex" ? MuMode::ComplexRelaxation
                                                         : MuMode::Mixed);
            return r.upper;
        },
        py::arg("M"), py::arg("structure"), py::arg("mode") = "mixed");
    m.def(
        "mu_lower",
        [](const ComplexMatrix& M,
           const std::vector<std::tuple<std::string, int, py::object>>& spec, int restarts,
           std::uint64_t seed) {
            MuLowerResult r = mu_lower(M, structure_from_spec(spec), restarts, seed);
            return py::make_tuple(r.lower, r.destabilizing);
        },
        py::arg("M"), py::arg("structure"), py::arg("restarts") = 8, py::arg("seed") = 0);
    m.def(
        "mu_bounds_at",
        [](const Interconnection& G, double omega) {
            ComplexMatrix M = G.eval(Complex(0, omega));
            double up = mu_upper(M, G.structure, MuMode::Mixed).upper;
            MuLowerResult lo = mu_lower(M, G.structure);
            return py::make_tuple(std::max(up, lo.lower), lo.lower);
        },
        py::arg("G"), py::arg("omega"), "Mixed upper and lower bounds at one frequency");
    m.def(
        "mu_sweep",
        [](const Interconnection& G, const std::vector<double>& omegas) {
            FrequencyGrid grid;
            grid.points = omegas;
            MuSweepResult res = mu_sweep(G, grid);
            std::vector<py::dict> rows;
            for (const auto& b : res.points) {
                py::dict d;
                d["omega"] = b.omega;
                d["upper"] = b.upper;
                d["lower"] = b.lower;
                d["skipped"] = b.skipped;
                rows.push_back(d);
            }
            py::dict out;
            out["points"] = rows;
            out["peak_omega"] = res.peak_omega;
            out["peak_upper"] = res.peak_upper;
            return out;
        },
        py::arg("G"), py::arg("omegas"));

    // H-infinity.
    py::class_<HinfResult>(m, "HinfResult")
        .def_readonly("norm", &HinfResult::norm)
        .def_readonly("peak_frequency", &HinfResult::peak_frequency)
        .def_readonly("iterations", &HinfResult::iterations)
        .def_readonly("marginal_fallback", &HinfResult::marginal_fallback)
        .def_property_readonly("method", [](const HinfResult& r) {
            return r.method == HinfMethod::Bisection ? "bisection" : "grid";
        });
    m.def("hinf_norm", &hinf_norm, py::arg("model"), py::arg("tol") = 1e-6);
    m.def(
        "hinf_norm_grid",
        [](const StateSpaceModel& ss, const std::vector<double>& omegas) {
            FrequencyGrid grid;
            grid.points = omegas;
            return hinf_norm_grid(ss, grid);
        },
        py::arg("model"), py::arg("omegas"));

    // Fixed-point margins.
    py::class_<PerturbationFamily>(m, "PerturbationFamily")
        .def("realize", [](const PerturbationFamily& f, double d) { return f.realize(d); },
             py::arg("delta"))
        .def("admits", &PerturbationFamily::admits, py::arg("delta"))
        .def_readonly("label", &PerturbationFamily::label);
    m.def(
        "gamma_family",
        [](const QubitParams& q, const std::string& form) {
            return gamma_family(q, formulation_from_name(form));
        },
        py::arg("params"), py::arg("formulation"));
    m.def(
        "nonlinear_family",
        [](const QubitParams& q, const std::string& which, const std::string& form) {
            QubitParameter p = which == "J" ? QubitParameter::J : QubitParameter::Delta;
            if (which != "J" && which != "Delta")
                throw InvalidDelta("parameter selector must be 'Delta' or 'J'");
            return nonlinear_family(q, p, formulation_from_name(form));
        },
        py::arg("params"), py::arg("which"), py::arg("formulation"));
    m.def(
        "margin_gap",
        [](const PerturbationFamily& f, double d) { return margin_gap(f, d); },
        py::arg("family"), py::arg("delta"),
        "Return |delta| * hinf_norm(T(delta)); the margin holds while this stays below one");
    m.def(
        "delta_bounds",
        [](const PerturbationFamily& f) {
            FixedPointResult r = delta_bounds(f);
            py::dict d;
            d["delta_min"] = r.delta_min();
            d["delta_max"] = r.delta_max();
            d["mu_inf"] = r.mu_inf;
            d["converged"] = r.converged;
            d["residual_max"] = r.upper.residual;
            d["residual_min"] = r.lower.residual;
            d["range_limited_max"] = r.upper.range_limited;
            d["range_limited_min"] = r.lower.range_limited;
            return d;
        },
        py::arg("family"));
}
