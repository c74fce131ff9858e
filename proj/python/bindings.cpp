// Python extension: thin wrappers over the C++ library. Structured results
// cross the boundary as JSON text; the Python package decodes them.

#include "sslsurv/dataset.hpp"
#include "sslsurv/error.hpp"
#include "sslsurv/inference.hpp"
#include "sslsurv/json_io.hpp"
#include "sslsurv/pipeline.hpp"
#include "sslsurv/scores.hpp"
#include "sslsurv/simulate.hpp"
#include "sslsurv/study.hpp"
#include "sslsurv/supervised.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace sslsurv;

namespace {

Dataset make_dataset(const std::vector<bool>& labeled, const std::vector<int>& delta,
                     const Vector& C, const Matrix& Z, const Matrix& X, const IntMatrix& D,
                     std::optional<std::vector<std::string>> ids)
{
    const std::size_t N = labeled.size();
    std::vector<std::string> names;
    if (ids) {
        names = std::move(*ids);
    } else {
        for (std::size_t i = 0; i < N; ++i) {
            names.push_back(std::to_string(i + 1));
        }
    }
    std::vector<std::uint8_t> lab(labeled.begin(), labeled.end());
    return Dataset(std::move(names), std::move(lab), delta, C, Z, X, D);
}

std::vector<bool> labeled_mask(const Dataset& d)
{
    std::vector<bool> out(d.N());
    for (std::size_t i = 0; i < d.N(); ++i) {
        out[i] = d.labeled(i);
    }
    return out;
}

std::vector<int> delta_column(const Dataset& d)
{
    std::vector<int> out(d.N());
    for (std::size_t i = 0; i < d.N(); ++i) {
        out[i] = d.delta(i);
    }
    return out;
}

std::optional<BandwidthConfig> bandwidths(std::optional<double> h,
                                          std::optional<std::vector<double>> h_score)
{
    if (!h && !h_score) {
        return std::nullopt;
    }
    require(h.has_value() && h_score.has_value(), ErrorKind::invalid_argument,
            "bandwidth and score_bandwidths must be given together");
    BandwidthConfig bw;
    bw.h_supervised = *h;
    bw.h_score = *h_score;
    bw.rule = BandwidthRule::manual;
    return bw;
}

} // namespace

PYBIND11_MODULE(_sslsurv, m)
{
    m.doc() = "Semi-supervised estimation for current-status data with surrogate times";

    // the module keeps the exception types alive; plain pointers suffice
    static PyObject* data_error = nullptr;
    static PyObject* numerical_error = nullptr;
    const py::exception<Error> base(m, "SslsurvError", PyExc_RuntimeError);
    data_error = py::exception<Error>(m, "DataError", base).ptr();
    numerical_error = py::exception<Error>(m, "NumericalError", base).ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            PyErr_SetString(e.is_data_error() ? data_error : numerical_error, e.what());
        }
    });

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&make_dataset), py::arg("labeled"), py::arg("delta"), py::arg("C"),
             py::arg("Z"), py::arg("X"), py::arg("D"), py::arg("ids") = py::none())
        .def_static("from_csv", &load_dataset, py::arg("path"))
        .def_static("from_csv_text", &parse_dataset, py::arg("text"))
        .def("to_csv", &save_dataset, py::arg("path"))
        .def("to_csv_text", &format_dataset)
        .def_property_readonly("N", &Dataset::N)
        .def_property_readonly("n", &Dataset::n)
        .def_property_readonly("p", &Dataset::p)
        .def_property_readonly("K", &Dataset::K)
        .def_property_readonly("C", &Dataset::C)
        .def_property_readonly("Z", &Dataset::Z)
        .def_property_readonly("X", &Dataset::X)
        .def_property_readonly("D", &Dataset::D)
        .def_property_readonly("ids",
                               [](const Dataset& d) {
                                   std::vector<std::string> ids;
                                   for (std::size_t i = 0; i < d.N(); ++i) {
                                       ids.push_back(d.id(i));
                                   }
                                   return ids;
                               })
        .def_property_readonly("labeled", &labeled_mask)
        .def_property_readonly("delta", &delta_column)
        .def("__eq__", &Dataset::operator==)
        .def("__repr__", [](const Dataset& d) {
            return "Dataset(N=" + std::to_string(d.N()) + ", n=" + std::to_string(d.n()) +
                   ", p=" + std::to_string(d.p()) + ", K=" + std::to_string(d.K()) + ")";
        });

    m.def(
        "simulate",
        [](std::size_t n, std::size_t N, const std::string& scenario, std::uint64_t seed,
           std::optional<double> a) {
            SimulationSpec spec;
            spec.n = n;
            spec.N = N;
            spec.scenario = scenario_from_string(scenario);
            spec.seed = seed;
            auto [data, truth] = generate(spec, a);
            return std::make_pair(std::move(data), to_json(truth).dump());
        },
        py::arg("n") = 500, py::arg("N") = 1000, py::arg("scenario") = "A",
        py::arg("seed") = 1, py::arg("a") = py::none());

    m.def(
        "fit_supervised",
        [](const Dataset& data, const std::string& link, std::optional<double> h) {
            Vector e1 = Vector::Zero(static_cast<Eigen::Index>(data.p()));
            e1(0) = 1.0;
            BandwidthConfig bw = auto_bandwidths(data, e1);
            if (h) {
                bw.h_supervised = *h;
            }
            return to_json(fit_supervised(data, Link(link_from_string(link)), Kernel(), bw))
                .dump();
        },
        py::arg("data"), py::arg("link") = "probit", py::arg("bandwidth") = py::none());

    m.def(
        "fit",
        [](const Dataset& data, std::size_t B, std::uint64_t seed, const std::string& link,
           const std::string& regime, double rho, double alpha,
           std::optional<double> lambda_delta, std::optional<double> h,
           std::optional<std::vector<double>> h_score) {
            FitConfig fc;
            fc.B = B;
            fc.seed = seed;
            fc.link = link_from_string(link);
            fc.regime.regime = regime_from_string(regime);
            fc.regime.rho_threshold = rho;
            fc.alpha = alpha;
            fc.threshold.lambda_delta = lambda_delta;
            fc.bandwidths = bandwidths(h, h_score);
            FitResult result;
            {
                py::gil_scoped_release release;
                result = fit_ssl(data, fc);
            }
            return to_json(result).dump();
        },
        py::arg("data"), py::arg("B") = 200, py::arg("seed") = 1, py::arg("link") = "probit",
        py::arg("regime") = "auto", py::arg("rho") = 0.1, py::arg("alpha") = 0.05,
        py::arg("lambda_delta") = py::none(), py::arg("bandwidth") = py::none(),
        py::arg("score_bandwidths") = py::none());

    m.def(
        "infer",
        [](const std::string& fit_json, std::optional<std::string> regime, double alpha,
           std::optional<double> lambda_soft) {
            const Json doc = Json::parse(fit_json);
            SslFit fit = ssl_fit_from_json(doc.contains("ssl") ? doc["ssl"] : doc);
            const Regime r = regime ? regime_from_string(*regime) : fit.regime;
            require(r != Regime::automatic, ErrorKind::invalid_argument,
                    "infer needs an explicit regime");
            if (lambda_soft) {
                fit.lambda_soft_used = lambda_soft;
            }
            return to_json(infer(fit, r, alpha)).dump();
        },
        py::arg("fit_json"), py::arg("regime") = py::none(), py::arg("alpha") = 0.05,
        py::arg("lambda_soft") = py::none());

    m.def(
        "stacked_score",
        [](const Dataset& data, const Vector& direction, std::optional<double> h,
           std::optional<std::vector<double>> h_score) {
            const Vector dir = direction.normalized();
            BandwidthConfig bw = auto_bandwidths(data, dir);
            if (auto manual = bandwidths(h, h_score)) {
                bw = *manual;
            }
            const ScoreBundle b = stacked_score(data, dir, Kernel(), bw);
            return std::make_pair(b.S, b.Q);
        },
        py::arg("data"), py::arg("direction"), py::arg("bandwidth") = py::none(),
        py::arg("score_bandwidths") = py::none());

    m.def(
        "rank_correlation",
        [](const Dataset& data, std::size_t k, const Vector& beta) {
            const RankCorrelation q = rank_correlation(data, k, beta, fit_censoring(data));
            return std::make_pair(q.raw, q.normalized);
        },
        py::arg("data"), py::arg("k"), py::arg("beta"));

    m.def(
        "run_study",
        [](const std::string& scenario, std::size_t n, std::size_t N, std::size_t reps,
           std::size_t B, std::uint64_t seed, const std::string& regime,
           std::optional<std::filesystem::path> output_dir) {
            StudyConfig cfg;
            cfg.scenario = scenario_from_string(scenario);
            cfg.n = n;
            cfg.N = N;
            cfg.reps = reps;
            cfg.B = B;
            cfg.seed = seed;
            cfg.regime.regime = regime_from_string(regime);
            cfg.output_dir = std::move(output_dir);
            MetricsTable table;
            {
                py::gil_scoped_release release;
                table = run_study(cfg);
            }
            return to_json(table).dump();
        },
        py::arg("scenario") = "A", py::arg("n") = 500, py::arg("N") = 1000,
        py::arg("reps") = 100, py::arg("B") = 200, py::arg("seed") = 1,
        py::arg("regime") = "auto", py::arg("output_dir") = py::none());
}
