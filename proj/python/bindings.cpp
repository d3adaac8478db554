// SPDX-License-Identifier: MIT
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "mfstop/errors.hpp"
#include "mfstop/fpt.hpp"
#include "mfstop/inverse_design.hpp"
#include "mfstop/nce1.hpp"
#include "mfstop/nce2.hpp"
#include "mfstop/population.hpp"
#include "mfstop/rng.hpp"

namespace py = pybind11;
using namespace mfstop;

namespace {

std::vector<double> sample_many(const HittingLaw& law, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    Stream rng(seed, stream);
    std::vector<double> out(n);
    for (auto& v : out) v = sample_tau(law, rng);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Mean-field optimal stopping: equilibrium solvers, population simulation and fee design";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<FeasibilityError>(m, "FeasibilityError", base.ptr());
    py::register_exception<InteriorStartViolation>(m, "InteriorStartViolation", base.ptr());
    py::register_exception<MultipleRoots>(m, "MultipleRoots", base.ptr());
    py::register_exception<UnboundedBelow>(m, "UnboundedBelow", base.ptr());
    py::register_exception<DegenerateSample>(m, "DegenerateSample", base.ptr());
    py::register_exception<SimulationError>(m, "SimulationError", base.ptr());

    py::class_<MarketParams>(m, "MarketParams")
        .def(py::init([](double alpha, double sigma, double beta, double x0, double K, double theta, double l1,
                         double l2) { return MarketParams{alpha, sigma, beta, x0, K, theta, l1, l2}; }),
             py::kw_only(), py::arg("alpha") = 0.0, py::arg("sigma") = 1.0, py::arg("beta") = 1.0,
             py::arg("x0") = 1.0, py::arg("K") = 1.0, py::arg("theta") = 0.0, py::arg("l1") = 0.0,
             py::arg("l2") = 1.0)
        .def_readwrite("alpha", &MarketParams::alpha)
        .def_readwrite("sigma", &MarketParams::sigma)
        .def_readwrite("beta", &MarketParams::beta)
        .def_readwrite("x0", &MarketParams::x0)
        .def_readwrite("K", &MarketParams::K)
        .def_readwrite("theta", &MarketParams::theta)
        .def_readwrite("l1", &MarketParams::l1)
        .def_readwrite("l2", &MarketParams::l2);

    py::class_<CharacteristicRoots>(m, "CharacteristicRoots")
        .def_readonly("k1", &CharacteristicRoots::k1)
        .def_readonly("k2", &CharacteristicRoots::k2);
    m.def("characteristic_roots", &characteristic_roots, py::arg("params"));

    py::enum_<Direction>(m, "Direction").value("up", Direction::up).value("down", Direction::down);
    py::class_<HittingLaw>(m, "HittingLaw")
        .def(py::init([](double a, double b) { return HittingLaw{a, b}; }), py::arg("a_prime"), py::arg("b_prime"))
        .def_readonly("a_prime", &HittingLaw::a_prime)
        .def_readonly("b_prime", &HittingLaw::b_prime)
        .def_property_readonly("hit_prob", &HittingLaw::hit_prob);
    py::class_<IgParams>(m, "IgParams").def_readonly("mu", &IgParams::mu).def_readonly("rho", &IgParams::rho);
    m.def("hitting_law_from_threshold", &hitting_law_from_threshold, py::arg("params"), py::arg("x_star"),
          py::arg("direction") = Direction::up);
    m.def("discounted_factor", &discounted_factor, py::arg("law"), py::arg("s"));
    m.def("tau_mean", &tau_mean, py::arg("law"));
    m.def("tau_var", &tau_var, py::arg("law"));
    m.def("ig_params", &ig_params, py::arg("law"));
    m.def("hitting_pdf", &hitting_pdf, py::arg("law"), py::arg("t"));
    m.def("hitting_cdf", &hitting_cdf, py::arg("law"), py::arg("t"));
    m.def("sample_tau", &sample_many, py::arg("law"), py::arg("n"), py::arg("seed") = 0, py::arg("stream") = 0,
          "Draws n first-passage times from one counter-based stream; +inf marks no hit.");

    py::class_<NceSolution1>(m, "NceSolution1")
        .def_readonly("theta_bar", &NceSolution1::theta_bar)
        .def_readonly("k_bar", &NceSolution1::k_bar)
        .def_readonly("x_star", &NceSolution1::x_star)
        .def_readonly("value_coeff_B", &NceSolution1::value_coeff_B)
        .def_readonly("residual", &NceSolution1::residual)
        .def_readonly("limit_payoff", &NceSolution1::limit_payoff)
        .def_readonly("k2", &NceSolution1::k2)
        .def_readonly("closed_form", &NceSolution1::closed_form);
    m.def("solve_nce1", &solve_theta_bar, py::arg("params"));
    m.def("value_function1", &value_function1, py::arg("solution"), py::arg("x"));

    py::enum_<ProfitKind>(m, "ProfitKind").value("affine", ProfitKind::affine).value("power", ProfitKind::power);
    py::class_<ProfitFunction>(m, "ProfitFunction")
        .def(py::init([](ProfitKind kind, double c0, double c1, double gamma) {
                 return ProfitFunction{kind, c0, c1, gamma};
             }),
             py::arg("kind") = ProfitKind::affine, py::arg("c0") = 0.0, py::arg("c1") = 1.0, py::arg("gamma") = 1.0);
    py::class_<NceSolution2>(m, "NceSolution2")
        .def_readonly("x_star", &NceSolution2::x_star)
        .def_readonly("coeff_A", &NceSolution2::coeff_A)
        .def_readonly("theta_bar2", &NceSolution2::theta_bar2)
        .def_readonly("k_bar2", &NceSolution2::k_bar2)
        .def_readonly("residuals", &NceSolution2::residuals)
        .def_readonly("no_stopping", &NceSolution2::no_stopping)
        .def_readonly("brackets", &NceSolution2::brackets);
    m.def("solve_nce2", &solve_system2, py::arg("profit"), py::arg("params"));

    py::class_<Estimate>(m, "Estimate").def_readonly("mean", &Estimate::mean).def_readonly("se", &Estimate::se);
    py::class_<SimReport>(m, "SimReport")
        .def_readonly("j_finite", &SimReport::j_finite)
        .def_readonly("j_limit", &SimReport::j_limit)
        .def_readonly("abs_error", &SimReport::abs_error)
        .def_readonly("gap", &SimReport::gap)
        .def_readonly("gap_computed", &SimReport::gap_computed)
        .def_readonly("ks_distance", &SimReport::ks_distance)
        .def_readonly("se_reliable", &SimReport::se_reliable);
    m.def(
        "simulate_population",
        [](const MarketParams& p, std::size_t n_agents, std::size_t n_reps, std::uint64_t seed,
           std::vector<double> grid, unsigned workers) {
            const NceSolution1 sol = solve_theta_bar(p);
            SimConfig cfg;
            cfg.n_agents = n_agents;
            cfg.n_reps = n_reps;
            cfg.seed = seed;
            cfg.deviation_grid = std::move(grid);
            cfg.workers = workers;
            return simulate_population_I(p, sol, cfg);
        },
        py::arg("params"), py::arg("n_agents"), py::arg("n_reps"), py::arg("seed") = 0,
        py::arg("deviation_grid") = std::vector<double>{}, py::arg("workers") = 1);
    m.def("default_deviation_grid", &default_deviation_grid, py::arg("params"), py::arg("solution"),
          py::arg("points") = 50);

    py::class_<DesignContext>(m, "DesignContext")
        .def_readonly("a_prime", &DesignContext::a_prime)
        .def_readonly("k2", &DesignContext::k2)
        .def_readonly("k_min", &DesignContext::k_min)
        .def_readonly("k_max", &DesignContext::k_max);
    m.def("make_design_context", &make_design_context, py::arg("params"), py::arg("log_span") = 50.0);
    m.def("law_from_fee", &law_from_fee, py::arg("context"), py::arg("K"));
    m.def("fee_for_target_mean", &fee_for_target_mean, py::arg("context"), py::arg("mu0"));
    m.def("fee_for_target_variance", &fee_for_target_variance, py::arg("context"), py::arg("kappa0"));
    m.def("fee_for_l2", &fee_for_l2, py::arg("context"), py::arg("t0"));
    m.def("l2_deviation", &l2_deviation, py::arg("context"), py::arg("K"), py::arg("t0"));

    py::class_<KlFitResult>(m, "KlFitResult")
        .def_readonly("k_hat", &KlFitResult::k_hat)
        .def_readonly("b_prime", &KlFitResult::b_prime)
        .def_readonly("divergence", &KlFitResult::divergence)
        .def_readonly("risk", &KlFitResult::risk)
        .def_readonly("l1_bound", &KlFitResult::l1_bound);
    m.def("fit_fee_mle", &fit_fee_mle, py::arg("context"), py::arg("samples"));
}
