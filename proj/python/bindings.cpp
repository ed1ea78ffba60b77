#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "diffsched/metrics.hpp"
#include "diffsched/oracle.hpp"
#include "diffsched/samplers.hpp"
#include "diffsched/scheduler.hpp"
#include "diffsched/studies.hpp"
#include "diffsched/verify/criteria.hpp"

namespace py = pybind11;
using namespace diffsched;

namespace {

SamplerKind kind_of(const std::string& name) {
    const auto k = parse_sampler_name(name);
    if (!k) throw py::value_error("unknown sampler '" + name + "'");
    return *k;
}

ScheduleOptions schedule_options(double sigma_min, double sigma_max, double rho, const std::string& mode,
                                 bool append_zero) {
    ScheduleOptions o;
    o.sigma_min = sigma_min;
    o.sigma_max = sigma_max;
    o.rho = rho;
    o.mode = parse_schedule_mode(mode);
    o.append_zero = append_zero;
    return o;
}

DenoiserOracle oracle_from(const py::object& oracle) {
    if (py::isinstance<py::str>(oracle)) return make_oracle(parse_oracle_flag(oracle.cast<std::string>()));
    if (py::isinstance<DenoiserOracle>(oracle)) return oracle.cast<DenoiserOracle>();
    if (PyCallable_Check(oracle.ptr())) {
        auto fn = oracle;
        return DenoiserOracle(
            [fn](const Vector& x, double sigma) {
                py::gil_scoped_acquire gil;
                return fn(x, sigma).cast<Vector>();
            },
            "python");
    }
    throw py::type_error("oracle must be a flag string, a Denoiser or a callable (x, sigma) -> x0");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Unified diffusion samplers and sampler scheduling";

    py::register_exception<ParseError>(m, "SpecParseError", PyExc_ValueError);
    py::register_exception<PresetNotFound>(m, "PresetNotFound", PyExc_KeyError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);

    py::class_<DenoiserOracle>(m, "Denoiser")
        .def("__call__", &DenoiserOracle::operator(), py::arg("x"), py::arg("sigma"))
        .def_property_readonly("description", &DenoiserOracle::description)
        .def("__repr__", [](const DenoiserOracle& d) { return "<Denoiser " + d.description() + ">"; });

    m.def("gaussian_denoiser", &gaussian_denoiser, py::arg("sigma_data"));
    m.def(
        "gmm_denoiser", [](const std::string& text) { return gmm_denoiser(GmmSpec::parse(text)); }, py::arg("spec_text"),
        "Mixture given as lines of `weight mean... std`.");
    m.def("make_oracle", [](const std::string& flag) { return make_oracle(parse_oracle_flag(flag)); }, py::arg("flag"));
    m.def("exact_gaussian_ode_endpoint", &exact_gaussian_ode_endpoint, py::arg("x"), py::arg("sigma_start"),
          py::arg("sigma_end"), py::arg("sigma_data"));

    m.def(
        "karras_schedule",
        [](int n, double sigma_min, double sigma_max, double rho, bool append_zero) {
            const auto s = karras_schedule(n, sigma_min, sigma_max, rho, append_zero);
            return std::vector<double>(s.sigmas().begin(), s.sigmas().end());
        },
        py::arg("n"), py::arg("sigma_min"), py::arg("sigma_max"), py::arg("rho") = 7.0, py::arg("append_zero") = false);
    m.def("sigma_interpolate", &sigma_interpolate, py::arg("sigma_i"), py::arg("sigma_next"), py::arg("k"));

    m.def("sampler_names", [] {
        std::vector<std::string> out;
        for (auto k : kAllSamplerKinds) out.emplace_back(canonical_name(k));
        return out;
    });
    m.def(
        "nfe_cost", [](const std::string& name, bool final_zero) { return nfe_cost(kind_of(name), final_zero); },
        py::arg("sampler"), py::arg("final_zero_step") = false);
    m.def(
        "coefficient_vector",
        [](const std::string& name, std::int64_t i, double sigma, double sigma_next, std::optional<double> sigma_prev,
           double correction_scale, const std::string& variant) {
            CoefficientOptions opt;
            opt.correction_scale = correction_scale;
            opt.dpm2a_variant = parse_dpm2a_variant(variant);
            const auto c =
                coefficient_vector(kind_of(name), i, SigmaWindow{sigma_prev, sigma, sigma_next}, sigma_prev.has_value(), opt);
            std::vector<std::tuple<double, double>> out;
            for (const auto& [node, w] : c) out.emplace_back(static_cast<double>(node.base) + node.frac, w);
            return out;
        },
        py::arg("sampler"), py::arg("i"), py::arg("sigma"), py::arg("sigma_next"), py::arg("sigma_prev") = py::none(),
        py::arg("correction_scale") = 1.0, py::arg("dpm2a_variant") = "literal",
        "List of (node position, weight); half nodes appear as i + 0.5.");
    m.def(
        "step",
        [](const std::string& name, const Vector& x, double sigma, double sigma_next, const py::object& oracle,
           std::optional<Vector> eps, double correction_scale) {
            const DenoiserOracle D = oracle_from(oracle);
            StepOptions opt;
            opt.correction_scale = correction_scale;
            std::optional<NoiseDraw> noise;
            if (eps) noise = NoiseDraw{*eps};
            else if (sampler_class(kind_of(name)) == SamplerClass::Sde) noise = NoiseDraw::zeros(x.size());
            py::gil_scoped_release release;
            const auto r = take_step(kind_of(name), SampleState{x, 0, sigma}, sigma_next, D, {},
                                     noise ? &*noise : nullptr, opt);
            return r.state.x;
        },
        py::arg("sampler"), py::arg("x"), py::arg("sigma"), py::arg("sigma_next"), py::arg("oracle") = "gaussian:1",
        py::arg("eps") = py::none(), py::arg("correction_scale") = 1.0, "One cold-start step from sigma to sigma_next.");

    m.def(
        "parse_spec",
        [](const std::string& text) {
            std::vector<std::tuple<std::string, int>> out;
            for (const auto& s : parse_schedule_spec(text).segments) out.emplace_back(canonical_name(s.kind), s.steps);
            return out;
        },
        py::arg("text"));
    m.def(
        "nfe_total",
        [](const std::string& text, bool append_zero) {
            ScheduleOptions o;
            o.append_zero = append_zero;
            return nfe_total(parse_schedule_spec(text, o));
        },
        py::arg("spec"), py::arg("append_zero") = false);
    m.def("preset", [](const std::string& name, int n) { return preset(name, n).text(); }, py::arg("name"),
          py::arg("n"));
    m.def("preset_names", &preset_names);
    m.def("best_preset_names", &best_preset_names);

    m.def(
        "run",
        [](const std::string& spec_text, const py::object& oracle, std::uint64_t seed, int dim, double sigma_min,
           double sigma_max, double rho, const std::string& mode, bool append_zero, bool carry_history,
           const std::string& variant) {
            const auto spec = parse_schedule_spec(spec_text, schedule_options(sigma_min, sigma_max, rho, mode, append_zero));
            const DenoiserOracle D = oracle_from(oracle);
            RunOptions run;
            run.carry_history = carry_history;
            run.dpm2a_variant = parse_dpm2a_variant(variant);
            Trajectory t;
            {
                py::gil_scoped_release release;
                t = run_scheduler(spec, D, seed, dim, run);
            }
            Eigen::MatrixXd states(static_cast<Eigen::Index>(t.states.size()), dim);
            for (std::size_t i = 0; i < t.states.size(); ++i) states.row(static_cast<Eigen::Index>(i)) = t.states[i].x;
            py::dict out;
            out["states"] = states;
            out["sigmas"] = t.sigma_trace;
            out["nfe"] = t.nfe;
            out["segment"] = t.segment_of_state;
            out["spec"] = spec.text();
            return out;
        },
        py::arg("spec"), py::arg("oracle") = "gaussian:1", py::arg("seed") = 0, py::arg("dim") = 2,
        py::arg("sigma_min") = 0.002, py::arg("sigma_max") = 80.0, py::arg("rho") = 7.0,
        py::arg("schedule_mode") = "regenerate", py::arg("append_zero") = false, py::arg("carry_history") = false,
        py::arg("dpm2a_variant") = "literal");
    m.def(
        "sample",
        [](const std::string& spec_text, const std::string& oracle, std::uint64_t seed, int count, int dim) {
            const auto spec = parse_schedule_spec(spec_text);
            const DenoiserOracle D = make_oracle(parse_oracle_flag(oracle));
            Eigen::MatrixXd out(count, dim);
            py::gil_scoped_release release;
            for (int j = 0; j < count; ++j) out.row(j) = sample_final(spec, D, derive_seed(seed, j), dim);
            return out;
        },
        py::arg("spec"), py::arg("oracle") = "gaussian:1", py::arg("seed") = 0, py::arg("count") = 100,
        py::arg("dim") = 2, "Final states of `count` trajectories with child seeds of `seed`.");

    m.def(
        "sliced_w2",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int n_projections, std::uint64_t seed) {
            return sliced_w2(SampleBatch{a, {0, 0}}, SampleBatch{b, {0, 0}}, n_projections, seed);
        },
        py::arg("a"), py::arg("b"), py::arg("n_projections") = 64, py::arg("seed") = 0);
    m.def("w2_gaussian", &w2_gaussian, py::arg("mean_a"), py::arg("std_a"), py::arg("mean_b"), py::arg("std_b"));
    m.def(
        "fit_convergence_order",
        [](const std::vector<int>& n, const std::vector<double>& e) { return fit_convergence_order(n, e); },
        py::arg("step_counts"), py::arg("errors"));
    m.def(
        "convergence",
        [](const std::string& name, std::vector<int> steps, double sigma_data, bool warm_start) {
            ConvergenceConfig cfg;
            cfg.step_counts = std::move(steps);
            cfg.sigma_data = sigma_data;
            cfg.warm_start = warm_start;
            const auto r = convergence_study(kind_of(name), cfg);
            py::dict out;
            std::vector<double> errors;
            std::vector<int> nfe;
            for (const auto& p : r.points) {
                errors.push_back(p.error);
                nfe.push_back(p.nfe);
            }
            out["order"] = r.order;
            out["errors"] = errors;
            out["nfe"] = nfe;
            return out;
        },
        py::arg("sampler"), py::arg("step_counts") = std::vector<int>{8, 16, 32, 64, 128, 256},
        py::arg("sigma_data") = 1.0, py::arg("warm_start") = true);

    m.def(
        "gaussians",
        [](std::uint64_t seed, std::uint64_t purpose, std::uint64_t index, int count) {
            if (purpose > 3) throw py::value_error("purpose must be 0..3");
            auto s = derive_stream(seed, static_cast<StreamPurpose>(purpose), index);
            std::vector<double> out(static_cast<std::size_t>(count));
            for (auto& v : out) v = s.next_gaussian();
            return out;
        },
        py::arg("seed"), py::arg("purpose"), py::arg("index"), py::arg("count"));

    m.def(
        "selfcheck",
        [](bool full, const std::string& gmm_path) {
            verify::SuiteOptions opts;
            opts.include_trend = full;
            opts.trend.gmm_path = gmm_path;
            std::vector<std::tuple<std::string, bool, std::string>> out;
            py::gil_scoped_release release;
            for (const auto& r : verify::run_suite(opts)) out.emplace_back(r.id, r.passed, r.detail);
            return out;
        },
        py::arg("full") = false, py::arg("gmm_path") = "");
}
