#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "lattice/errors.hpp"
#include "lattice/experiments.hpp"

namespace lattice {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Parser {
  std::string origin;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }

  double number(const std::string& s) const {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail("expected a finite number, got '" + s + "'");
    return v;
  }

  long long integer(const std::string& s) const {
    long long v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) fail("expected an integer, got '" + s + "'");
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& s) const {
    std::uint64_t v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) fail("expected a nonnegative integer, got '" + s + "'");
    return v;
  }

  int positive_int(const std::string& s) const {
    const long long v = integer(s);
    if (v < 1 || v > 1'000'000'000) fail("expected a positive integer, got '" + s + "'");
    return static_cast<int>(v);
  }

  double positive(const std::string& s) const {
    const double v = number(s);
    if (!(v > 0.0)) fail("expected a positive number, got '" + s + "'");
    return v;
  }

  double nonnegative(const std::string& s) const {
    const double v = number(s);
    if (v < 0.0) fail("expected a nonnegative number, got '" + s + "'");
    return v;
  }

  std::vector<double> numbers(const std::string& s) const {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(number(item));
    return out;
  }
};

using Setter = std::function<void(ExperimentConfig&, const std::string&, const Parser&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto pos = [](double ModelParams::*field) {
      return [field](ExperimentConfig& c, const std::string& v, const Parser& p) { c.params.*field = p.positive(v); };
    };
    t["model.d1"] = pos(&ModelParams::d1);
    t["model.d2"] = pos(&ModelParams::d2);
    t["model.d3"] = pos(&ModelParams::d3);
    t["model.k"] = pos(&ModelParams::k);
    t["model.alpha"] = pos(&ModelParams::alpha);
    t["model.beta"] = pos(&ModelParams::beta);
    t["model.lambda"] = pos(&ModelParams::lambda);
    t["model.c1"] = pos(&ModelParams::c1);
    t["model.c2"] = pos(&ModelParams::c2);
    t["model.c3"] = pos(&ModelParams::c3);
    t["model.kappa"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      c.params.kappa = p.positive_int(v);
    };
    t["model.frequencies"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      const auto x = p.numbers(v);
      try {
        c.params.frequencies = FrequencyVector(x);
      } catch (const ConfigError& e) {
        p.fail(e.what());
      }
    };
    t["model.forcing_profile"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      try {
        c.params.forcing_profile = parse_forcing_profile(v);
      } catch (const ConfigError& e) {
        p.fail(e.what());
      }
    };
    auto amp = [](double ExperimentConfig::*field) {
      return [field](ExperimentConfig& c, const std::string& v, const Parser& p) { c.*field = p.nonnegative(v); };
    };
    t["model.a0"] = amp(&ExperimentConfig::a0);
    t["model.b1_0"] = amp(&ExperimentConfig::b1_0);
    t["model.b2_0"] = amp(&ExperimentConfig::b2_0);
    t["model.b3_0"] = amp(&ExperimentConfig::b3_0);

    t["lattice.window_radius"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      const long long r = p.integer(v);
      if (r < 0 || r > 1'000'000) p.fail("window_radius must be in [0, 1000000]");
      c.params.a = LatticeField(static_cast<int>(r));
    };
    t["lattice.boundary"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      if (v == "dirichlet") {
        c.params.boundary = Boundary::dirichlet;
      } else if (v == "periodic") {
        c.params.boundary = Boundary::periodic;
      } else {
        p.fail("boundary must be dirichlet or periodic");
      }
    };

    t["integrator.h"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      c.integrator.h = p.positive(v);
    };
    t["integrator.method"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      if (v != "rk4") p.fail("unknown integrator method '" + v + "' (valid: rk4)");
      c.integrator.method = Method::rk4;
    };
    t["integrator.record_stride"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      c.integrator.record_stride = p.positive_int(v);
    };

    t["tolerances.energy_abs"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      c.tolerances.energy_abs = p.nonnegative(v);
    };
    t["tolerances.tail_rel"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      c.tolerances.tail_rel = p.nonnegative(v);
    };

    t["experiment.output_dir"] = [](ExperimentConfig& c, const std::string& v, const Parser&) { c.output_dir = v; };
    t["experiment.seed"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      c.experiment.seed = p.unsigned_integer(v);
    };
    auto count = [](int ExperimentSettings::*field) {
      return [field](ExperimentConfig& c, const std::string& v, const Parser& p) {
        c.experiment.*field = p.positive_int(v);
      };
    };
    auto positive = [](double ExperimentSettings::*field) {
      return [field](ExperimentConfig& c, const std::string& v, const Parser& p) {
        c.experiment.*field = p.positive(v);
      };
    };
    auto nonneg = [](double ExperimentSettings::*field) {
      return [field](ExperimentConfig& c, const std::string& v, const Parser& p) {
        c.experiment.*field = p.nonnegative(v);
      };
    };
    auto times = [](std::vector<double> ExperimentSettings::*field) {
      return [field](ExperimentConfig& c, const std::string& v, const Parser& p) {
        auto xs = p.numbers(v);
        for (double x : xs) {
          if (x < 0.0) p.fail("times must be nonnegative");
        }
        c.experiment.*field = xs;
      };
    };
    using S = ExperimentSettings;
    t["experiment.absorbing_samples"] = count(&S::absorbing_samples);
    t["experiment.absorbing_symbols"] = count(&S::absorbing_symbols);
    t["experiment.absorbing_radius"] = nonneg(&S::absorbing_radius);
    t["experiment.absorbing_horizon"] = positive(&S::absorbing_horizon);
    t["experiment.absorbing_dt"] = positive(&S::absorbing_dt);
    t["experiment.tail_samples"] = count(&S::tail_samples);
    t["experiment.tail_epsilon"] = positive(&S::tail_epsilon);
    t["experiment.tail_times"] = times(&S::tail_times);
    t["experiment.tail_radii"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      std::vector<long long> radii;
      for (const auto& item : split_list(v)) {
        const long long r = p.integer(item);
        if (r < 1) p.fail("tail radii must be at least 1");
        radii.push_back(r);
      }
      c.experiment.tail_radii = radii;
    };
    t["experiment.lipschitz_pairs"] = count(&S::lipschitz_pairs);
    t["experiment.lipschitz_times"] = times(&S::lipschitz_times);
    t["experiment.squeeze_pairs"] = count(&S::squeeze_pairs);
    t["experiment.squeeze_T_span"] = nonneg(&S::squeeze_T_span);
    t["experiment.squeeze_T_step"] = positive(&S::squeeze_T_step);
    t["experiment.squeeze_max_log2_N3"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      const long long e = p.integer(v);
      if (e < 0 || e > 61) p.fail("squeeze_max_log2_N3 must be in [0, 61]");
      c.experiment.squeeze_max_log2_N3 = static_cast<int>(e);
    };
    t["experiment.t2_offset"] = nonneg(&S::t2_offset);
    t["experiment.burn_in"] = positive(&S::burn_in);
    t["experiment.attractor_symbols"] = count(&S::attractor_symbols);
    t["experiment.attractor_samples"] = count(&S::attractor_samples);
    t["experiment.symbol_grid"] = [](ExperimentConfig& c, const std::string& v, const Parser& p) {
      const int n = p.positive_int(v);
      if (n < 4 || n % 2 != 0) p.fail("symbol_grid must be an even integer >= 4");
      c.experiment.symbol_grid = n;
    };
    t["experiment.section_depths"] = count(&S::section_depths);
    t["experiment.section_depth_step"] = nonneg(&S::section_depth_step);
    t["experiment.invariance_times"] = times(&S::invariance_times);
    t["experiment.forward_samples"] = count(&S::forward_samples);
    t["experiment.forward_radius"] = nonneg(&S::forward_radius);
    t["experiment.forward_symbols"] = count(&S::forward_symbols);
    t["experiment.forward_horizon"] = positive(&S::forward_horizon);
    t["experiment.forward_dt"] = positive(&S::forward_dt);
    return t;
  }();
  return table;
}

// sqrt(1), sqrt(2), sqrt(3), sqrt(5), ... : square roots of 1 and the primes.
FrequencyVector default_frequencies(int kappa) {
  std::vector<double> x;
  x.push_back(1.0);
  for (int n = 2; static_cast<int>(x.size()) < kappa; ++n) {
    bool prime = true;
    for (int d = 2; d * d <= n; ++d) prime = prime && n % d != 0;
    if (prime) x.push_back(std::sqrt(static_cast<double>(n)));
  }
  x.resize(static_cast<std::size_t>(kappa));
  return FrequencyVector(x);
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.params = default_params(50, c.a0, c.b1_0);
  c.rebuild();
  return c;
}

void ExperimentConfig::rebuild() {
  const int radius = params.a.window_radius();
  params.a = inverse_square_profile(radius, a0);
  params.b1 = inverse_square_profile(radius, b1_0);
  params.b2 = inverse_square_profile(radius, b2_0);
  params.b3 = inverse_square_profile(radius, b3_0);
  if (params.frequencies.dimension() == 0) params.frequencies = default_frequencies(params.kappa);
  validate(params);
  derive_constants(params);
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  auto num = [&](const char* key, double v) { os << key << '=' << format_number(v) << '\n'; };
  auto list = [&](const char* key, const auto& xs) {
    os << key << '=';
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << format_number(static_cast<double>(xs[i]));
    os << '\n';
  };
  num("model.d1", params.d1);
  num("model.d2", params.d2);
  num("model.d3", params.d3);
  num("model.k", params.k);
  num("model.alpha", params.alpha);
  num("model.beta", params.beta);
  num("model.lambda", params.lambda);
  num("model.c1", params.c1);
  num("model.c2", params.c2);
  num("model.c3", params.c3);
  num("model.kappa", params.kappa);
  std::vector<double> freq(params.frequencies.values().begin(), params.frequencies.values().end());
  list("model.frequencies", freq);
  os << "model.forcing_profile=" << to_string(params.forcing_profile) << '\n';
  num("model.a0", a0);
  num("model.b1_0", b1_0);
  num("model.b2_0", b2_0);
  num("model.b3_0", b3_0);
  num("lattice.window_radius", params.window_radius());
  os << "lattice.boundary=" << (params.boundary == Boundary::dirichlet ? "dirichlet" : "periodic") << '\n';
  num("integrator.h", integrator.h);
  os << "integrator.method=rk4\n";
  num("integrator.record_stride", static_cast<double>(integrator.record_stride));
  num("tolerances.energy_abs", tolerances.energy_abs);
  num("tolerances.tail_rel", tolerances.tail_rel);
  const ExperimentSettings& e = experiment;
  os << "experiment.seed=" << e.seed << '\n';
  num("experiment.absorbing_samples", e.absorbing_samples);
  num("experiment.absorbing_symbols", e.absorbing_symbols);
  num("experiment.absorbing_radius", e.absorbing_radius);
  num("experiment.absorbing_horizon", e.absorbing_horizon);
  num("experiment.absorbing_dt", e.absorbing_dt);
  num("experiment.tail_samples", e.tail_samples);
  num("experiment.tail_epsilon", e.tail_epsilon);
  list("experiment.tail_times", e.tail_times);
  list("experiment.tail_radii", e.tail_radii);
  num("experiment.lipschitz_pairs", e.lipschitz_pairs);
  list("experiment.lipschitz_times", e.lipschitz_times);
  num("experiment.squeeze_pairs", e.squeeze_pairs);
  num("experiment.squeeze_T_span", e.squeeze_T_span);
  num("experiment.squeeze_T_step", e.squeeze_T_step);
  num("experiment.squeeze_max_log2_N3", e.squeeze_max_log2_N3);
  num("experiment.t2_offset", e.t2_offset);
  num("experiment.burn_in", e.burn_in);
  num("experiment.attractor_symbols", e.attractor_symbols);
  num("experiment.attractor_samples", e.attractor_samples);
  num("experiment.symbol_grid", e.symbol_grid);
  num("experiment.section_depths", e.section_depths);
  num("experiment.section_depth_step", e.section_depth_step);
  list("experiment.invariance_times", e.invariance_times);
  num("experiment.forward_samples", e.forward_samples);
  num("experiment.forward_radius", e.forward_radius);
  num("experiment.forward_symbols", e.forward_symbols);
  num("experiment.forward_horizon", e.forward_horizon);
  num("experiment.forward_dt", e.forward_dt);
  return os.str();
}

ExperimentConfig parse_config(std::string_view text, std::string_view origin) {
  ExperimentConfig cfg;
  cfg.params = default_params(50, cfg.a0, cfg.b1_0);
  cfg.params.frequencies = FrequencyVector();  // filled from kappa unless given

  Parser p{std::string(origin), 0};
  std::set<std::string> seen;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++p.line;
    const auto hash = raw.find_first_of("#;");
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') p.fail("unterminated section header");
      section = trim(content.substr(1, content.size() - 2));
      static const std::set<std::string> known = {"model", "lattice", "integrator", "experiment", "tolerances"};
      if (!known.count(section)) p.fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) p.fail("expected 'key = value'");
    if (section.empty()) p.fail("key outside of any section");
    const std::string key = section + "." + trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) p.fail("unknown key '" + key + "'");
    if (!seen.insert(key).second) p.fail("duplicate key '" + key + "'");
    if (value.empty()) p.fail("empty value for '" + key + "'");
    it->second(cfg, value, p);
  }

  for (const auto& [key, setter] : setters()) {
    if (!seen.count(key)) cfg.defaults_applied.push_back(key);
  }
  if (cfg.params.frequencies.dimension() != 0 &&
      cfg.params.frequencies.dimension() != static_cast<std::size_t>(cfg.params.kappa)) {
    if (seen.count("model.kappa")) {
      throw ConfigError(std::string(origin) + ": frequencies has " +
                        std::to_string(cfg.params.frequencies.dimension()) + " entries but kappa = " +
                        std::to_string(cfg.params.kappa));
    }
    cfg.params.kappa = static_cast<int>(cfg.params.frequencies.dimension());
  }
  try {
    cfg.rebuild();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  } catch (const InconsistentParameters& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string config_hash(const ExperimentConfig& config) {
  // FNV-1a 64 over the canonical text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.canonical()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lattice
