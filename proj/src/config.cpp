#include "noisylab/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

namespace noisylab::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kCommonKeys = {"command", "seed", "trials", "workers", "output",
                                           "description"};
const std::set<std::string> kScenarioKeys = {"l",       "y",           "e_plus", "e_minus",
                                             "p_plus",  "p_minus",     "smoothing_a", "n",
                                             "prior",   "tie_rule",    "global_rate"};

std::string join(const std::string& prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

class Checker {
 public:
  explicit Checker(std::vector<Violation>& out) : out_(out) {}

  void fail(std::string path, std::string message) {
    out_.push_back({std::move(path), std::move(message)});
  }
  std::size_t count() const noexcept { return out_.size(); }

  std::optional<std::uint64_t> as_uint(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
      fail(path, "must be >= 0");
      return std::nullopt;
    }
    fail(path, "must be a non-negative integer");
    return std::nullopt;
  }

  std::optional<double> as_real(const json& v, const std::string& path) {
    if (!v.is_number()) {
      fail(path, "must be a number");
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(path, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<std::string> as_string(const json& v, const std::string& path) {
    if (!v.is_string()) {
      fail(path, "must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

 private:
  std::vector<Violation>& out_;
};

/// Field lookup in `obj`, falling back to `base` (sweep defaults).
struct Fields {
  const json& obj;
  const json* base;
  std::string prefix;

  const json* find(std::string_view key) const {
    const std::string k(key);
    if (obj.is_object() && obj.contains(k)) return &obj.at(k);
    if (base && base->is_object() && base->contains(k)) return &base->at(k);
    return nullptr;
  }
  std::string path(std::string_view key) const {
    const std::string k(key);
    if (!(obj.is_object() && obj.contains(k)) && base) return k;
    return join(prefix, key);
  }
};

std::optional<std::uint64_t> read_uint(const Fields& f, std::string_view key, Checker& c,
                                       std::optional<std::uint64_t> fallback,
                                       std::uint64_t min_value = 0) {
  const json* v = f.find(key);
  if (!v) {
    if (!fallback) c.fail(f.path(key), std::string(key) + " required");
    return fallback;
  }
  auto r = c.as_uint(*v, f.path(key));
  if (r && *r < min_value) {
    c.fail(f.path(key), "must be >= " + std::to_string(min_value));
    return std::nullopt;
  }
  return r;
}

std::optional<double> read_real(const Fields& f, std::string_view key, Checker& c,
                                std::optional<double> fallback,
                                const std::function<const char*(double)>& check = {}) {
  const json* v = f.find(key);
  if (!v) {
    if (!fallback) c.fail(f.path(key), std::string(key) + " required");
    return fallback;
  }
  auto r = c.as_real(*v, f.path(key));
  if (r && check) {
    if (const char* msg = check(*r)) {
      c.fail(f.path(key), msg);
      return std::nullopt;
    }
  }
  return r;
}

const char* in_unit_open_right(double v) {
  return v >= 0.0 && v < 1.0 ? nullptr : "must lie in [0, 1)";
}
const char* in_unit_open(double v) {
  return v > 0.0 && v < 1.0 ? nullptr : "must lie in (0, 1)";
}
const char* in_unit_closed(double v) {
  return v >= 0.0 && v <= 1.0 ? nullptr : "must lie in [0, 1]";
}
const char* positive(double v) { return v > 0.0 ? nullptr : "must be > 0"; }
const char* non_negative(double v) { return v >= 0.0 ? nullptr : "must be >= 0"; }

void check_keys(const json& obj, const std::string& prefix, const std::set<std::string>& a,
                const std::set<std::string>& b, Checker& c) {
  if (!obj.is_object()) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!a.count(it.key()) && !b.count(it.key())) c.fail(join(prefix, it.key()), "unknown field");
  }
}

struct ParsedPrior {
  std::vector<double> raw;
  PriorSpec spec;
};

std::optional<ParsedPrior> parse_prior(const json& v, const std::string& path, Checker& c) {
  if (!v.is_object()) {
    c.fail(path, "must be an object");
    return std::nullopt;
  }
  const std::size_t before = c.count();
  check_keys(v, path, {"generator", "N", "values", "exponent", "offset", "pi_max"}, {}, c);
  Fields f{v, nullptr, path};
  std::string gen = v.contains("values") ? "explicit" : "uniform";
  if (v.contains("generator")) {
    if (auto g = c.as_string(v.at("generator"), join(path, "generator"))) gen = *g;
  }
  PriorInput in;
  if (gen == "explicit") {
    in.generator = PriorGenerator::Explicit;
    const json* vals = f.find("values");
    if (!vals || !vals->is_array() || vals->empty()) {
      c.fail(join(path, "values"), "values required: nonempty array of numbers");
    } else {
      for (std::size_t i = 0; i < vals->size(); ++i) {
        auto d = c.as_real((*vals)[i], indexed(join(path, "values"), i));
        if (d && *d <= 0.0) c.fail(indexed(join(path, "values"), i), "must be > 0");
        if (d) in.values.push_back(*d);
      }
    }
  } else if (gen == "uniform" || gen == "zipf") {
    in.generator = gen == "uniform" ? PriorGenerator::Uniform : PriorGenerator::Zipf;
    auto n = read_uint(f, "N", c, std::nullopt, 1);
    if (n) in.slots = static_cast<std::size_t>(*n);
    if (gen == "zipf") {
      in.exponent = read_real(f, "exponent", c, 1.0, positive).value_or(1.0);
      if (v.contains("offset") && v.contains("pi_max")) {
        c.fail(join(path, "offset"), "give either offset or pi_max, not both");
      } else if (v.contains("pi_max")) {
        auto target = read_real(f, "pi_max", c, std::nullopt, in_unit_closed);
        if (target && n && c.count() == before) {
          try {
            in.offset = zipf_offset_for_pi_max(in.slots, in.exponent, *target);
          } catch (const std::exception& e) {
            c.fail(join(path, "pi_max"), e.what());
          }
        }
      } else {
        in.offset = read_real(f, "offset", c, 0.0, non_negative).value_or(0.0);
      }
    }
  } else {
    c.fail(join(path, "generator"), "must be one of explicit, uniform, zipf");
  }
  if (c.count() != before) return std::nullopt;
  try {
    ParsedPrior out{{}, build_prior(in)};
    out.raw = gen == "explicit" ? in.values : out.spec.values();
    return out;
  } catch (const std::exception& e) {
    c.fail(path, e.what());
    return std::nullopt;
  }
}

struct ScenarioNeeds {
  bool l = true;
  bool rates = true;
};

std::optional<InstanceScenario> parse_scenario(const Fields& f, Checker& c, ScenarioNeeds needs) {
  const std::size_t before = c.count();
  InstanceScenario s;
  if (needs.l) {
    if (auto l = read_uint(f, "l", c, std::nullopt, 1)) s.l = *l;
  }
  if (const json* y = f.find("y")) {
    if (y->is_number_integer() && (y->get<std::int64_t>() == 1 || y->get<std::int64_t>() == -1)) {
      s.y = label_from_int(static_cast<int>(y->get<std::int64_t>()));
    } else {
      c.fail(f.path("y"), "must be 1 or -1");
    }
  }
  if (needs.rates) {
    auto ep = read_real(f, "e_plus", c, std::nullopt, in_unit_open_right);
    auto em = read_real(f, "e_minus", c, std::nullopt, in_unit_open_right);
    if (ep) s.e_plus = *ep;
    if (em) s.e_minus = *em;
    if (ep && em && !(*ep + *em < 1.0)) {
      c.fail(f.path("e_plus"), "e_plus + e_minus must be < 1");
    }
  }
  auto pp = read_real(f, "p_plus", c, 0.5, in_unit_open);
  if (pp) s.p_plus = *pp;
  if (f.find("p_minus")) {
    auto pm = read_real(f, "p_minus", c, std::nullopt, in_unit_open);
    if (pm) {
      s.p_minus = *pm;
      if (pp && std::abs(*pp + *pm - 1.0) > 1e-12) {
        c.fail(f.path("p_minus"), "p_plus + p_minus must equal 1");
      }
    }
  } else if (pp) {
    s.p_minus = 1.0 - *pp;
  }
  if (auto a = read_real(f, "smoothing_a", c, 0.1, in_unit_closed)) s.smoothing_a = *a;
  if (auto n = read_uint(f, "n", c, 10000, 1)) s.n = *n;
  if (const json* p = f.find("prior")) {
    if (auto prior = parse_prior(*p, f.path("prior"), c)) {
      s.prior = prior->spec;
      if (needs.l && s.l > s.n) c.fail(f.path("l"), "must be <= n when a prior is given");
    }
  }
  if (const json* t = f.find("tie_rule")) {
    auto name = c.as_string(*t, f.path("tie_rule"));
    if (name == "larger_prior") s.tie_rule = TieRule::LargerPrior;
    else if (name == "positive") s.tie_rule = TieRule::Positive;
    else if (name == "negative") s.tie_rule = TieRule::Negative;
    else if (name) c.fail(f.path("tie_rule"), "must be one of larger_prior, positive, negative");
  }
  if (const json* g = f.find("global_rate")) {
    auto name = c.as_string(*g, f.path("global_rate"));
    if (name == "population") s.global_rate_mode = GlobalRateMode::PopulationLimit;
    else if (name == "finite_sample") s.global_rate_mode = GlobalRateMode::FiniteSample;
    else if (name) c.fail(f.path("global_rate"), "must be one of population, finite_sample");
  }
  if (c.count() != before) return std::nullopt;
  return s;
}

template <class T, class Read>
std::vector<T> read_array(const json& doc, const std::string& key, Checker& c, Read read) {
  std::vector<T> out;
  if (!doc.contains(key)) {
    c.fail(key, key + " required");
    return out;
  }
  const json& arr = doc.at(key);
  if (!arr.is_array() || arr.empty()) {
    c.fail(key, "must be a nonempty array");
    return out;
  }
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (auto v = read(arr[i], indexed(key, i))) out.push_back(*v);
  }
  return out;
}

std::optional<Job> parse_job(Command cmd, const json& doc, Checker& c) {
  const std::size_t before = c.count();
  const Fields top{doc, nullptr, ""};
  switch (cmd) {
    case Command::Tau: {
      check_keys(doc, "", kCommonKeys, {"prior", "n", "l", "l_range", "replicates", "weight_replicates"}, c);
      TauJob job;
      std::optional<ParsedPrior> prior;
      if (!doc.contains("prior")) c.fail("prior", "prior required");
      else prior = parse_prior(doc.at("prior"), "prior", c);
      auto n = read_uint(top, "n", c, std::nullopt, 1);
      if (doc.contains("l") && doc.contains("l_range")) {
        c.fail("l", "give either l or l_range, not both");
      } else if (doc.contains("l_range")) {
        const json& r = doc.at("l_range");
        if (!r.is_array() || r.size() != 2) {
          c.fail("l_range", "must be [first, last]");
        } else {
          auto a = c.as_uint(r[0], "l_range[0]");
          auto b = c.as_uint(r[1], "l_range[1]");
          if (a && b) {
            if (*a < 1 || *b < *a) c.fail("l_range", "need 1 <= first <= last");
            else if (*b - *a >= 1000000) c.fail("l_range", "at most 10^6 values");
            else for (std::uint64_t l = *a; l <= *b; ++l) job.ls.push_back(l);
          }
        }
      } else if (doc.contains("l") && doc.at("l").is_array()) {
        job.ls = read_array<std::uint64_t>(doc, "l", c, [&](const json& v, const std::string& p) {
          auto l = c.as_uint(v, p);
          if (l && *l < 1) {
            c.fail(p, "must be >= 1");
            return std::optional<std::uint64_t>{};
          }
          return l;
        });
      } else if (auto l = read_uint(top, "l", c, std::nullopt, 1)) {
        job.ls.push_back(*l);
      }
      if (n) {
        job.n = *n;
        for (std::uint64_t l : job.ls) {
          if (l > *n) {
            c.fail("l", "every l must be <= n");
            break;
          }
        }
      }
      job.replicates = read_uint(top, "replicates", c, 0).value_or(0);
      job.weight_replicates = read_uint(top, "weight_replicates", c, 1000, 1).value_or(1000);
      if (c.count() != before || !prior) return std::nullopt;
      job.raw_values = prior->raw;
      job.prior = prior->spec;
      return job;
    }
    case Command::Weight: {
      check_keys(doc, "", kCommonKeys, {"prior", "interval", "intervals", "replicates"}, c);
      WeightJob job;
      std::optional<ParsedPrior> prior;
      if (!doc.contains("prior")) c.fail("prior", "prior required");
      else prior = parse_prior(doc.at("prior"), "prior", c);
      auto parse_interval = [&](const json& v, const std::string& p) -> std::optional<Interval> {
        if (!v.is_array() || v.size() != 2) {
          c.fail(p, "must be [lo, hi]");
          return std::nullopt;
        }
        auto lo = c.as_real(v[0], indexed(p, 0));
        auto hi = c.as_real(v[1], indexed(p, 1));
        if (!lo || !hi) return std::nullopt;
        if (!(*lo >= 0.0 && *hi <= 1.0 && *lo <= *hi)) {
          c.fail(p, "need 0 <= lo <= hi <= 1");
          return std::nullopt;
        }
        return Interval{*lo, *hi};
      };
      if (doc.contains("interval") && doc.contains("intervals")) {
        c.fail("interval", "give either interval or intervals, not both");
      } else if (doc.contains("interval")) {
        if (auto iv = parse_interval(doc.at("interval"), "interval")) job.intervals.push_back(*iv);
      } else {
        job.intervals = read_array<Interval>(doc, "intervals", c, parse_interval);
      }
      job.replicates = read_uint(top, "replicates", c, 1000, 1).value_or(1000);
      if (c.count() != before || !prior) return std::nullopt;
      job.prior = prior->spec;
      return job;
    }
    case Command::Simulate: {
      std::set<std::string> allowed = kScenarioKeys;
      allowed.insert("treatments");
      check_keys(doc, "", kCommonKeys, allowed, c);
      SimulateJob job;
      auto s = parse_scenario(top, c, {});
      if (doc.contains("treatments")) {
        job.treatments = read_array<Treatment>(doc, "treatments", c, [&](const json& v, const std::string& p) {
          auto name = c.as_string(v, p);
          if (!name) return std::optional<Treatment>{};
          try {
            return std::optional<Treatment>{treatment_from_string(*name)};
          } catch (const std::exception&) {
            c.fail(p, "must be one of memorize, loss_correction, label_smoothing, peer_loss");
            return std::optional<Treatment>{};
          }
        });
      } else {
        job.treatments.assign(kAllTreatments.begin(), kAllTreatments.end());
      }
      if (c.count() != before || !s) return std::nullopt;
      job.scenario = *s;
      return job;
    }
    case Command::Bounds: {
      check_keys(doc, "", kCommonKeys, kScenarioKeys, c);
      auto s = parse_scenario(top, c, {});
      if (!s) return std::nullopt;
      return BoundsJob{*s};
    }
    case Command::Sweep: {
      std::set<std::string> allowed = kScenarioKeys;
      allowed.insert({"grid", "scenarios"});
      check_keys(doc, "", kCommonKeys, allowed, c);
      SweepJob job;
      if (doc.contains("grid") == doc.contains("scenarios")) {
        c.fail("grid", "give exactly one of grid or scenarios");
        return std::nullopt;
      }
      if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        if (!g.is_object()) {
          c.fail("grid", "must be an object with l and e arrays");
          return std::nullopt;
        }
        check_keys(g, "grid", {"l", "e"}, {}, c);
        for (const char* k : {"l", "e_plus", "e_minus"}) {
          if (doc.contains(k)) c.fail(k, "set by grid; remove it");
        }
        auto ls = read_array<std::uint64_t>(g, "l", c, [&](const json& v, const std::string& p) {
          auto l = c.as_uint(v, "grid." + p);
          if (l && *l < 1) {
            c.fail("grid." + p, "must be >= 1");
            return std::optional<std::uint64_t>{};
          }
          return l;
        });
        auto es = read_array<double>(g, "e", c, [&](const json& v, const std::string& p) {
          auto e = c.as_real(v, "grid." + p);
          if (e && !(*e >= 0.0 && *e < 0.5)) {
            c.fail("grid." + p, "must lie in [0, 1/2)");
            return std::optional<double>{};
          }
          return e;
        });
        auto base = parse_scenario(top, c, {false, false});
        if (c.count() != before || !base) return std::nullopt;
        job.scenarios = scenario_grid(ls, es, *base);
        if (base->prior) {
          for (const InstanceScenario& s : job.scenarios) {
            if (s.l > s.n) {
              c.fail("grid.l", "every l must be <= n when a prior is given");
              return std::nullopt;
            }
          }
        }
      } else {
        const json& list = doc.at("scenarios");
        if (!list.is_array() || list.empty()) {
          c.fail("scenarios", "must be a nonempty array");
          return std::nullopt;
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
          const std::string p = indexed("scenarios", i);
          check_keys(list[i], p, kScenarioKeys, {}, c);
          if (!list[i].is_object()) {
            c.fail(p, "must be an object");
            continue;
          }
          if (auto s = parse_scenario(Fields{list[i], &doc, p}, c, {})) job.scenarios.push_back(*s);
        }
      }
      if (c.count() != before) return std::nullopt;
      return job;
    }
    case Command::NoiseSynth: {
      check_keys(doc, "", kCommonKeys, {"epsilon", "sigma", "dim", "samples", "combiner"}, c);
      NoiseSynthJob job;
      job.epsilon = read_real(top, "epsilon", c, std::nullopt, in_unit_closed).value_or(0.0);
      job.sigma = read_real(top, "sigma", c, std::nullopt, positive).value_or(1.0);
      job.dim = read_uint(top, "dim", c, 8, 1).value_or(8);
      job.samples = read_uint(top, "samples", c, 1000, 1).value_or(1000);
      if (doc.contains("combiner")) {
        auto name = c.as_string(doc.at("combiner"), "combiner");
        if (name == "scaled_logistic_v1") job.combiner = RateCombiner::ScaledLogisticV1;
        else if (name == "q_only") job.combiner = RateCombiner::QOnly;
        else if (name) c.fail("combiner", "must be one of scaled_logistic_v1, q_only");
      }
      if (c.count() != before) return std::nullopt;
      return job;
    }
  }
  return std::nullopt;
}

std::size_t report_rows(std::span<const BoundReport> reports) {
  std::size_t rows = 0;
  for (const BoundReport& r : reports) {
    for (const TreatmentReport& t : r.treatments) rows += t.events.size();
  }
  return rows;
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::Tau: return "tau";
    case Command::Weight: return "weight";
    case Command::Simulate: return "simulate";
    case Command::Bounds: return "bounds";
    case Command::Sweep: return "sweep";
    case Command::NoiseSynth: return "noise-synth";
  }
  return "unknown";
}

std::optional<Command> command_from_string(std::string_view name) {
  for (Command c : {Command::Tau, Command::Weight, Command::Simulate, Command::Bounds,
                    Command::Sweep, Command::NoiseSynth}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string Violation::str() const { return path.empty() ? message : path + ": " + message; }

Validation validate_document(const json& input, const Overrides& overrides) {
  Validation result;
  Checker c(result.violations);
  if (!input.is_object()) {
    c.fail("", "config must be a JSON object");
    return result;
  }
  json doc = input;

  if (overrides.command) {
    if (doc.contains("command") && doc.at("command") != *overrides.command) {
      c.fail("command", "config is for '" +
                            (doc.at("command").is_string() ? doc.at("command").get<std::string>()
                                                           : doc.at("command").dump()) +
                            "' but the command line asked for '" + *overrides.command + "'");
    }
    doc["command"] = *overrides.command;
  }
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.trials) doc["trials"] = *overrides.trials;
  if (overrides.out) doc["output"] = *overrides.out;
  if (overrides.workers) doc["workers"] = *overrides.workers;

  RunConfig cfg;
  std::optional<Command> cmd;
  if (!doc.contains("command")) {
    c.fail("command", "command required");
  } else if (auto name = c.as_string(doc.at("command"), "command")) {
    cmd = command_from_string(*name);
    if (!cmd) c.fail("command", "must be one of tau, weight, simulate, bounds, sweep, noise-synth");
  }

  const Fields top{doc, nullptr, ""};
  if (!doc.contains("seed")) {
    c.fail("seed", "seed required");
  } else if (auto seed = c.as_uint(doc.at("seed"), "seed")) {
    cfg.seed = *seed;
  }
  if (auto t = read_uint(top, "trials", c, 10000, 1)) cfg.trials = *t;
  if (auto w = read_uint(top, "workers", c, 1, 1)) {
    if (*w > 1024) c.fail("workers", "must be <= 1024");
    else cfg.workers = static_cast<std::size_t>(*w);
  }
  if (doc.contains("output")) {
    if (auto o = c.as_string(doc.at("output"), "output")) {
      if (o->empty()) c.fail("output", "must not be empty");
      cfg.output = *o;
    }
  }
  if (doc.contains("description") && !doc.at("description").is_string()) {
    c.fail("description", "must be a string");
  }

  if (!cmd) return result;
  cfg.command = *cmd;
  if (cfg.output.empty()) cfg.output = "noisylab_" + std::string(to_string(*cmd)) + ".csv";

  auto job = parse_job(*cmd, doc, c);
  if (!result.violations.empty() || !job) return result;

  doc["seed"] = cfg.seed;
  doc["trials"] = cfg.trials;
  doc["workers"] = cfg.workers;
  doc["output"] = cfg.output;
  cfg.document = std::move(doc);
  cfg.job = std::move(*job);
  result.config = std::move(cfg);
  return result;
}

Validation validate_file(const std::string& path, const Overrides& overrides) {
  Validation result;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    result.violations.push_back({"", "cannot read config file '" + path + "'"});
    return result;
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    result.violations.push_back({"", std::string("malformed config: ") + e.what()});
    return result;
  }
  return validate_document(doc, overrides);
}

std::size_t write_csv(const RunConfig& cfg, std::ostream& out) {
  return std::visit(
      [&](const auto& job) -> std::size_t {
        using J = std::decay_t<decltype(job)>;
        if constexpr (std::is_same_v<J, TauJob>) {
          out << "l,n,exact,mc_estimate,mc_std_error,weight_large,weight_large_std_error,"
                 "lower_large,weight_small,weight_small_std_error,lower_small,regime_ok\n";
          for (std::size_t i = 0; i < job.ls.size(); ++i) {
            CounterRng rng(cfg.seed, i);
            const std::uint64_t l = job.ls[i];
            const TauEstimate est =
                estimate_tau(job.prior, job.n, l, job.replicates, job.weight_replicates, rng);
            out << l << ',' << job.n << ',' << format_double(tau_exact(job.raw_values, job.n, l))
                << ',' << optional_field(est.mc ? std::optional(est.mc->value) : std::nullopt)
                << ',' << optional_field(est.mc ? std::optional(est.mc->std_error) : std::nullopt)
                << ',' << format_double(est.weight_large.value) << ','
                << format_double(est.weight_large.std_error) << ','
                << format_double(est.lower_large) << ',' << format_double(est.weight_small.value)
                << ',' << format_double(est.weight_small.std_error) << ','
                << format_double(est.lower_small) << ',' << (est.regime_ok ? "true" : "false")
                << '\n';
          }
          return job.ls.size();
        } else if constexpr (std::is_same_v<J, WeightJob>) {
          out << "lo,hi,estimate,std_error,replicates\n";
          for (std::size_t i = 0; i < job.intervals.size(); ++i) {
            CounterRng rng(cfg.seed, i);
            const McEstimate est = weight_estimate(job.prior, job.intervals[i], job.replicates, rng);
            out << format_double(job.intervals[i].lo) << ',' << format_double(job.intervals[i].hi)
                << ',' << format_double(est.value) << ',' << format_double(est.std_error) << ','
                << est.replicates << '\n';
          }
          return job.intervals.size();
        } else if constexpr (std::is_same_v<J, SimulateJob>) {
          BoundReport rep = bound_report(job.scenario, cfg.trials, cfg.seed, cfg.workers);
          std::vector<TreatmentReport> kept;
          for (Treatment t : job.treatments) kept.push_back(rep.at(t));
          rep.treatments = std::move(kept);
          write_report_csv(out, std::span(&rep, 1));
          return report_rows(std::span(&rep, 1));
        } else if constexpr (std::is_same_v<J, BoundsJob>) {
          const BoundReport rep = bound_report(job.scenario, cfg.trials, cfg.seed, cfg.workers);
          write_report_csv(out, std::span(&rep, 1));
          return report_rows(std::span(&rep, 1));
        } else if constexpr (std::is_same_v<J, SweepJob>) {
          const auto reports = sweep(job.scenarios, cfg.trials, cfg.seed, cfg.workers);
          write_report_csv(out, reports);
          return report_rows(reports);
        } else {
          out << "index,q,projection,rate\n";
          CounterRng wrng(cfg.seed, 0);
          const InstanceNoiseSynth synth(job.epsilon, job.sigma, job.dim, wrng, job.combiner);
          std::vector<double> x(job.dim);
          for (std::size_t i = 0; i < job.samples; ++i) {
            CounterRng rng(cfg.seed, i + 1);
            for (double& v : x) v = rng.normal();
            const InstanceNoiseDraw d = synth.draw(x, rng);
            out << i << ',' << format_double(d.q) << ',' << format_double(d.projection) << ','
                << format_double(d.rate) << '\n';
          }
          return job.samples;
        }
      },
      cfg.job);
}

json make_manifest(const RunConfig& cfg, const RunResult& result) {
  json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["command"] = to_string(cfg.command);
  m["seed"] = cfg.seed;
  m["trials"] = cfg.trials;
  m["workers"] = cfg.workers;
  m["config"] = cfg.document;
  m["output"] = result.csv_path;
  m["rows"] = result.rows;
  m["wall_time_seconds"] = result.wall_time_seconds;
  return m;
}

RunResult execute(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  RunResult result;
  result.csv_path = cfg.output;
  result.manifest_path = cfg.output + ".manifest.json";

  const fs::path parent = fs::path(cfg.output).parent_path();
  if (!parent.empty()) fs::create_directories(parent);

  const auto start = std::chrono::steady_clock::now();
  std::ostringstream buffer;
  result.rows = write_csv(cfg, buffer);
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ofstream csv(cfg.output, std::ios::binary | std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + cfg.output);
  csv << buffer.str();
  if (!csv.flush()) throw std::runtime_error("failed writing " + cfg.output);

  std::ofstream manifest(result.manifest_path, std::ios::binary | std::ios::trunc);
  if (!manifest) throw std::runtime_error("cannot write " + result.manifest_path);
  manifest << make_manifest(cfg, result).dump(2) << '\n';
  if (!manifest.flush()) throw std::runtime_error("failed writing " + result.manifest_path);
  return result;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noisy-label memorization lab", std::string(kToolName)};
  std::string command;
  std::string config_path;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  app.add_option("command", command,
                 "tau | weight | simulate | bounds | sweep | noise-synth | validate")
      ->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_path, "CSV output path (manifest goes to <out>.manifest.json)");
  app.add_option("--trials", trials, "Monte-Carlo trials");
  app.add_option("--seed", seed, "64-bit seed");
  app.add_option("--workers", workers, "worker threads for the Monte-Carlo engine");
  app.set_version_flag("--version", std::string(kToolVersion));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  Overrides ov;
  ov.out = out_path;
  ov.trials = trials;
  ov.seed = seed;
  ov.workers = workers;
  const bool validate_only = command == "validate";
  if (!validate_only) {
    if (!command_from_string(command)) {
      err << "unknown command '" << command << "'\n";
      return kExitInvalid;
    }
    ov.command = command;
  }

  const Validation v = validate_file(config_path, ov);
  if (!v.ok()) {
    for (const Violation& x : v.violations) err << x.str() << '\n';
    if (v.violations.empty()) err << "invalid config\n";
    return kExitInvalid;
  }
  if (validate_only) {
    out << "valid: " << to_string(v.config->command) << '\n';
    return kExitOk;
  }

  try {
    const RunResult r = execute(*v.config);
    out << "wrote " << r.rows << " rows to " << r.csv_path << " (manifest " << r.manifest_path
        << ")\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace noisylab::cli
