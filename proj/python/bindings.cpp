#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "noisylab/bounds.hpp"
#include "noisylab/config.hpp"
#include "noisylab/freqmodel.hpp"
#include "noisylab/mcsim.hpp"
#include "noisylab/memorize.hpp"
#include "noisylab/treatments.hpp"

namespace py = pybind11;
using namespace noisylab;

namespace {

InstanceScenario make_scenario(std::uint64_t l, double e_plus, double e_minus, int y,
                               double p_plus, double smoothing_a) {
  InstanceScenario s;
  s.l = l;
  s.y = label_from_int(y);
  s.e_plus = e_plus;
  s.e_minus = e_minus;
  s.p_plus = p_plus;
  s.p_minus = 1.0 - p_plus;
  s.smoothing_a = smoothing_a;
  s.validate();
  return s;
}

py::dict tally_dict(const TrialTally& t) {
  py::dict d;
  d["trials"] = t.trials;
  d["success"] = t.success;
  d["failure"] = t.failure;
  d["tie"] = t.tie;
  d["wrong_labels"] = t.wrong_labels;
  d["estimate"] = t.estimate;
  d["ci"] = py::make_tuple(t.wilson_ci.lo, t.wilson_ci.hi);
  return d;
}

}  // namespace

PYBIND11_MODULE(_noisylab, m) {
  m.doc() = "Noisy-label memorization lab: exact tails, bounds and Monte-Carlo checks.";
  m.attr("__version__") = std::string(cli::kToolVersion);

  m.def("binom_tail", &binom_tail, py::arg("l"), py::arg("p"), py::arg("k"),
        "P[Bin(l, p) >= k].");
  m.def("bernoulli_kl", &bernoulli_kl, py::arg("a"), py::arg("b"));
  m.def("lc_success_lower", &lc_success_lower, py::arg("l"), py::arg("e"));
  m.def("lc_failure_lower", &lc_failure_lower, py::arg("l"), py::arg("e"));
  m.def("peer_failure_lower", &peer_failure_lower, py::arg("l"), py::arg("e"));
  m.def("min_l_for_delta", &min_l_for_delta, py::arg("delta"), py::arg("e"));
  m.def("max_l_for_failure", &max_l_for_failure, py::arg("delta"), py::arg("e"));

  m.def(
      "tau_exact",
      [](const std::vector<double>& values, std::uint64_t n, std::uint64_t l) {
        return tau_exact(values, n, l);
      },
      py::arg("values"), py::arg("n"), py::arg("l"),
      "Exact tau_l on raw (unnormalized) prior values.");

  m.def(
      "corrected_label",
      [](double p_positive, double e_plus, double e_minus) {
        const CorrectedLabel c =
            corrected_label(LabelDist::binary(p_positive), BinaryNoiseRates{e_plus, e_minus});
        return py::make_tuple(c.raw.probs(), c.capped.probs(), c.was_capped);
      },
      py::arg("p_positive"), py::arg("e_plus"), py::arg("e_minus"),
      "Returns (raw, capped, was_capped); entries ordered [-1, +1].");

  m.def(
      "run_trials",
      [](const std::string& treatment, std::uint64_t l, double e_plus, double e_minus,
         std::uint64_t trials, std::uint64_t seed, int y, double p_plus, double smoothing_a,
         std::size_t workers) {
        const InstanceScenario s = make_scenario(l, e_plus, e_minus, y, p_plus, smoothing_a);
        const Treatment t = treatment_from_string(treatment);
        TrialTally tally;
        {
          py::gil_scoped_release release;
          tally = run_trials(s, t, trials, seed, workers);
        }
        return tally_dict(tally);
      },
      py::arg("treatment"), py::arg("l"), py::arg("e_plus"), py::arg("e_minus"),
      py::arg("trials"), py::arg("seed"), py::arg("y") = 1, py::arg("p_plus") = 0.5,
      py::arg("smoothing_a") = 0.1, py::arg("workers") = 1);

  m.def(
      "exact_outcome",
      [](const std::string& treatment, std::uint64_t l, double e_plus, double e_minus, int y,
         double p_plus, double smoothing_a) {
        const ExactOutcome o = exact_outcome(
            make_scenario(l, e_plus, e_minus, y, p_plus, smoothing_a),
            treatment_from_string(treatment));
        py::dict d;
        d["success"] = o.success;
        d["failure"] = o.failure;
        d["tie"] = o.tie;
        d["mean_error"] = o.mean_error;
        return d;
      },
      py::arg("treatment"), py::arg("l"), py::arg("e_plus"), py::arg("e_minus"),
      py::arg("y") = 1, py::arg("p_plus") = 0.5, py::arg("smoothing_a") = 0.1);

  m.def(
      "bound_report_csv",
      [](std::uint64_t l, double e_plus, double e_minus, std::uint64_t trials,
         std::uint64_t seed, int y, double p_plus, double smoothing_a) {
        const InstanceScenario s = make_scenario(l, e_plus, e_minus, y, p_plus, smoothing_a);
        std::ostringstream os;
        {
          py::gil_scoped_release release;
          const BoundReport rep = bound_report(s, trials, seed);
          write_report_csv(os, std::span(&rep, 1));
        }
        return os.str();
      },
      py::arg("l"), py::arg("e_plus"), py::arg("e_minus"), py::arg("trials"), py::arg("seed"),
      py::arg("y") = 1, py::arg("p_plus") = 0.5, py::arg("smoothing_a") = 0.1,
      "CSV text in the same column layout as the command-line tool.");

  m.def(
      "validate_config",
      [](const std::string& text) {
        std::vector<std::string> out;
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
          out.push_back(std::string("malformed config: ") + e.what());
          return out;
        }
        for (const cli::Violation& v : cli::validate_document(doc).violations) {
          out.push_back(v.str());
        }
        return out;
      },
      py::arg("text"), "Violations for a JSON config document; empty when valid.");

  m.def(
      "run_config",
      [](const std::string& text) {
        const cli::Validation v = cli::validate_document(nlohmann::json::parse(text));
        if (!v.ok()) {
          std::string msg = "invalid config";
          for (const cli::Violation& x : v.violations) msg += "\n  " + x.str();
          throw py::value_error(msg);
        }
        std::ostringstream os;
        {
          py::gil_scoped_release release;
          cli::write_csv(*v.config, os);
        }
        return os.str();
      },
      py::arg("text"), "Runs a config document and returns its CSV without writing files.");
}
