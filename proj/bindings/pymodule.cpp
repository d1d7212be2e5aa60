#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uneval/cli.hpp"
#include "uneval/propagation.hpp"
#include "uneval/ranking.hpp"
#include "uneval/stats.hpp"
#include "uneval/uncertainty.hpp"
#include "uneval/version.hpp"

namespace py = pybind11;

namespace {

std::vector<uneval::UncertainRating> make_ratings(const std::vector<double>& means,
                                                  const std::vector<double>& sigmas,
                                                  const std::vector<double>& predictions) {
  if (means.size() != sigmas.size() || means.size() != predictions.size()) {
    throw std::invalid_argument("means, sigmas, and predictions must have equal length");
  }
  std::vector<uneval::UncertainRating> out;
  out.reserve(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    uneval::UncertainRating r;
    r.user = "u" + std::to_string(i + 1);
    r.item = "i1";
    r.density = uneval::Gaussian{means[i], sigmas[i] * sigmas[i]};
    r.predictor = predictions[i];
    out.push_back(std::move(r));
  }
  return out;
}

py::dict dist_dict(const uneval::MetricDistribution& d) {
  py::dict out;
  out["method"] = uneval::to_string(d.method);
  out["n"] = d.n;
  out["mean"] = d.gaussian.mean;
  out["variance"] = d.gaussian.variance;
  out["mc_samples"] = d.mc_samples;
  out["degenerate"] = d.degenerate;
  out["clt_approx"] = d.clt_approx;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rating-uncertainty evaluation: analytic metric distributions, "
            "ranking-error probabilities, and the RNG behind them.";
  m.attr("__version__") = uneval::kVersion;

  py::class_<uneval::Gaussian>(m, "Gaussian")
      .def(py::init<double, double>(), py::arg("mean"), py::arg("variance"))
      .def_readwrite("mean", &uneval::Gaussian::mean)
      .def_readwrite("variance", &uneval::Gaussian::variance)
      .def("__repr__", [](const uneval::Gaussian& g) {
        return "Gaussian(mean=" + std::to_string(g.mean) +
               ", variance=" + std::to_string(g.variance) + ")";
      });

  m.def("std_normal_cdf", &uneval::std_normal_cdf, py::arg("x"),
        "Standard normal CDF, accurate over the full double range.");
  m.def("std_normal_quantile", &uneval::std_normal_quantile, py::arg("p"),
        "Inverse of std_normal_cdf on (0, 1).");

  m.def(
      "fit_gaussian_ml",
      [](const std::vector<double>& values) {
        const uneval::Gaussian g = uneval::fit_gaussian_ml(values);
        return std::make_pair(g.mean, g.variance);
      },
      py::arg("values"), "Maximum-likelihood (mean, variance) of a sample.");

  py::class_<uneval::RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("substream", &uneval::RngStream::substream, py::arg("index"),
           "Independent child stream; deterministic in (seed, index).")
      .def("uniform01", &uneval::RngStream::uniform01)
      .def("normal", py::overload_cast<>(&uneval::RngStream::normal))
      .def("normal", py::overload_cast<double, double>(&uneval::RngStream::normal),
           py::arg("mean"), py::arg("stddev"));

  m.def(
      "point_rmse",
      [](const std::vector<double>& means, const std::vector<double>& predictions) {
        if (means.size() != predictions.size()) {
          throw std::invalid_argument("means and predictions must have equal length");
        }
        std::vector<double> deltas(means.size());
        for (std::size_t i = 0; i < means.size(); ++i) deltas[i] = means[i] - predictions[i];
        return uneval::point_rmse(deltas);
      },
      py::arg("means"), py::arg("predictions"),
      "Classical RMSE of point ratings against predictions.");

  m.def(
      "rmse_distribution",
      [](const std::vector<double>& means, const std::vector<double>& sigmas,
         const std::vector<double>& predictions) {
        return dist_dict(uneval::rmse_distribution(make_ratings(means, sigmas, predictions)));
      },
      py::arg("means"), py::arg("sigmas"), py::arg("predictions"),
      "Analytic RMSE distribution when each rating nu is N(mean, sigma^2).");

  m.def(
      "mse_distribution",
      [](const std::vector<double>& means, const std::vector<double>& sigmas,
         const std::vector<double>& predictions) {
        return dist_dict(uneval::mse_distribution(make_ratings(means, sigmas, predictions)));
      },
      py::arg("means"), py::arg("sigmas"), py::arg("predictions"),
      "Exact-moment MSE distribution when each rating nu is N(mean, sigma^2).");

  m.def(
      "error_probability",
      [](const uneval::Gaussian& a, const uneval::Gaussian& b) {
        return uneval::error_probability(a, b);
      },
      py::arg("winner"), py::arg("runner_up"),
      "P(score of `winner` >= score of `runner_up`) for independent Gaussian scores "
      "(lower scores are better).");

  m.def(
      "error_matrix",
      [](const std::vector<std::pair<std::string, uneval::Gaussian>>& systems, bool merge_ties) {
        const uneval::ErrorMatrix mat = uneval::error_matrix(systems, merge_ties);
        std::vector<std::vector<double>> rows(mat.size(), std::vector<double>(mat.size()));
        for (std::size_t i = 0; i < mat.size(); ++i) {
          for (std::size_t j = 0; j < mat.size(); ++j) rows[i][j] = mat.at(i, j);
        }
        py::dict out;
        out["labels"] = mat.labels;
        out["p"] = rows;
        return out;
      },
      py::arg("systems"), py::arg("merge_ties") = false,
      "Pairwise ranking-error matrix over (label, Gaussian) systems.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) { return uneval::run_cli(args); },
      py::arg("args"),
      "Run the command-line interface; args[0] is the program name. Returns the exit code.");
}
