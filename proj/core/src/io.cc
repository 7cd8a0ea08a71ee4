// Copyright 2026 The fiberq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fiberq/io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fiberq/array_model.h"
#include "fiberq/circuit.h"
#include "fiberq/presets.h"

namespace fiberq {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

ConfigError::ConfigError(const std::string& path, const std::string& message)
    : std::runtime_error(path.empty() ? message : path + ": " + message), path_(path) {}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Object reader that remembers which keys were consumed so the rest can be
// rejected as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) {
    known_.insert(key);
    return j_.contains(key);
  }
  const json& raw(const std::string& key) {
    known_.insert(key);
    return j_.at(key);
  }
  std::string path(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return as_number(j_.at(key), path(key));
  }
  double angle(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return as_angle(j_.at(key), path(key));
  }
  long integer(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    return as_integer(j_.at(key), path(key));
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<int> int_list(const std::string& key, const std::vector<int>& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected a list of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(static_cast<int>(as_integer(v[i], index_path(path(key), i))));
    }
    return out;
  }
  std::vector<double> number_list(const std::string& key, const std::vector<double>& fallback,
                                  bool angles = false) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = index_path(path(key), i);
      out.push_back(angles ? as_angle(v[i], p) : as_number(v[i], p));
    }
    return out;
  }
  // A list of numbers or {"start", "stop", "points"} (inclusive, evenly spaced).
  std::vector<double> grid(const std::string& key, const std::vector<double>& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (v.is_array()) return number_list(key, fallback);
    Section g(v, path(key));
    const double start = g.number("start", 0.0);
    if (!g.has("stop")) throw ConfigError(g.path("stop"), "required");
    const double stop = g.number("stop", 0.0);
    const long points = g.integer("points", 2);
    g.finish();
    if (points < 2) throw ConfigError(g.path("points"), "must be >= 2");
    std::vector<double> out(points);
    for (long k = 0; k < points; ++k) {
      out[k] = start + (stop - start) * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!known_.count(k)) throw ConfigError(path(k), "unknown field");
    }
  }

  static double as_number(const json& v, const std::string& p) {
    if (!v.is_number()) throw ConfigError(p, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(p, "must be finite");
    return d;
  }
  static double as_angle(const json& v, const std::string& p) {
    if (v.is_string()) {
      const auto a = parse_angle_expression(v.get<std::string>());
      if (!a) throw ConfigError(p, "not an angle expression like 'pi/2'");
      return *a;
    }
    return as_number(v, p);
  }
  static long as_integer(const json& v, const std::string& p) {
    if (!v.is_number_integer()) throw ConfigError(p, "expected an integer");
    return v.get<long>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

void check_version(const json& doc, const std::string& what) {
  if (!doc.contains("format_version")) return;
  const json& v = doc.at("format_version");
  if (!v.is_string()) throw FormatError(what + ": format_version must be a string");
  const std::string s = v.get<std::string>();
  int major = -1;
  if (std::sscanf(s.c_str(), "%d", &major) != 1 || major != kFormatMajor) {
    throw FormatError(what + ": unsupported format_version '" + s + "'");
  }
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(what + ": " + e.what());
  }
}

void check_probability(double v, const std::string& path) {
  require(v >= 0.0 && v <= 1.0, path, "must lie in [0, 1]");
}

void check_site_list(const std::vector<int>& sites, int n, const std::string& path) {
  std::set<int> seen;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    require(sites[i] >= 1 && sites[i] <= n, index_path(path, i),
            "site " + std::to_string(sites[i]) + " is not in 1.." + std::to_string(n));
    require(seen.insert(sites[i]).second, index_path(path, i), "duplicate site");
  }
}

void check_nonnegative(const std::vector<double>& v, const std::string& path) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i] >= 0.0, index_path(path, i), "must be >= 0");
  }
}

std::vector<int> every_site(int n) {
  std::vector<int> s(n);
  for (int i = 0; i < n; ++i) s[i] = i + 1;
  return s;
}

NoiseParams parse_noise(Section& s, std::string& preset) {
  preset = s.string("preset", "none");
  NoiseParams n;
  try {
    n = noise_preset(preset);
  } catch (const std::invalid_argument&) {
    throw ConfigError(s.path("preset"), "unknown preset '" + preset + "'");
  }
  n.sigma_detuning = s.number("sigma_detuning", n.sigma_detuning);
  require(n.sigma_detuning >= 0.0, s.path("sigma_detuning"), "must be >= 0");
  n.amp_mod_depth = s.number("amp_mod_depth", n.amp_mod_depth);
  require(n.amp_mod_depth >= 0.0 && n.amp_mod_depth < 1.0, s.path("amp_mod_depth"),
          "must lie in [0, 1)");
  n.rabi_jitter = s.number("rabi_jitter", n.rabi_jitter);
  require(n.rabi_jitter >= 0.0, s.path("rabi_jitter"), "must be >= 0");
  n.d_if = s.number("d_if", n.d_if);
  check_probability(n.d_if, s.path("d_if"));
  n.readout_eps0 = s.number("readout_eps0", n.readout_eps0);
  check_probability(n.readout_eps0, s.path("readout_eps0"));
  n.readout_eps1 = s.number("readout_eps1", n.readout_eps1);
  check_probability(n.readout_eps1, s.path("readout_eps1"));
  n.gate_depolarization = s.number("gate_depolarization", n.gate_depolarization);
  check_probability(n.gate_depolarization, s.path("gate_depolarization"));
  n.interference_enabled = s.boolean("interference_enabled", n.interference_enabled);
  s.finish();
  return n;
}

json noise_json(const NoiseParams& n, const std::string& preset) {
  return json{{"preset", preset},
              {"sigma_detuning", n.sigma_detuning},
              {"amp_mod_depth", n.amp_mod_depth},
              {"rabi_jitter", n.rabi_jitter},
              {"d_if", n.d_if},
              {"readout_eps0", n.readout_eps0},
              {"readout_eps1", n.readout_eps1},
              {"gate_depolarization", n.gate_depolarization},
              {"interference_enabled", n.interference_enabled}};
}

const std::set<std::string> kExperiments{"rabi", "ramsey", "rb", "crosstalk_scan"};

}  // namespace

void RunConfig::set_analytic(bool analytic) {
  if (experiment == "rabi") rabi.analytic = analytic;
  if (experiment == "ramsey") ramsey.analytic = analytic;
  if (experiment == "rb") rb.analytic = analytic;
  if (experiment == "crosstalk_scan") crosstalk_scan.analytic = analytic;
}

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("not valid JSON: ") + e.what());
  }
  Section top(doc, "");
  RunConfig c;

  if (top.has("format_version")) {
    const json& v = top.raw("format_version");
    int major = -1;
    require(v.is_string() && std::sscanf(v.get<std::string>().c_str(), "%d", &major) == 1 &&
                major == kFormatMajor,
            "format_version", "unsupported version");
  }
  require(top.has("experiment"), "experiment", "required");
  c.experiment = top.string("experiment", "");
  require(kExperiments.count(c.experiment) > 0, "experiment",
          "must be one of rabi, ramsey, rb, crosstalk_scan");
  if (top.has("seed")) {
    const json& v = top.raw("seed");
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
            "seed", "expected a non-negative 64-bit integer");
    c.seed = v.get<std::uint64_t>();
  }
  c.output_dir = top.string("output_dir", c.output_dir);

  if (top.has("geometry")) {
    Section g(top.raw("geometry"), "geometry");
    const std::string layout = g.string("layout", "hex");
    require(layout == "hex", g.path("layout"), "only 'hex' is supported");
    c.sites = static_cast<int>(g.integer("sites", c.sites));
    require(c.sites >= 1, g.path("sites"), "must be >= 1");
    c.pitch_um = g.number("pitch_um", c.pitch_um);
    require(c.pitch_um > 0.0, g.path("pitch_um"), "must be > 0");
    g.finish();
  }
  const int n = c.sites;
  c.model.geometry = hex_positions(n, c.pitch_um);

  if (top.has("crosstalk")) {
    Section x(top.raw("crosstalk"), "crosstalk");
    c.crosstalk.kind = x.string("source", c.crosstalk.kind);
    if (c.crosstalk.kind == "paper_preset") {
      c.crosstalk.floor = x.number("floor", c.crosstalk.floor);
      require(c.crosstalk.floor >= 0.0 && c.crosstalk.floor <= 1.0, x.path("floor"),
              "must lie in [0, 1]");
    } else if (c.crosstalk.kind == "gaussian") {
      c.crosstalk.waist_um = x.number("waist_um", c.crosstalk.waist_um);
      require(c.crosstalk.waist_um > 0.0, x.path("waist_um"), "must be > 0");
    } else if (c.crosstalk.kind == "explicit") {
      require(x.has("matrix"), x.path("matrix"), "required for an explicit source");
      const json& m = x.raw("matrix");
      require(m.is_array() && static_cast<int>(m.size()) == n, x.path("matrix"),
              "expected " + std::to_string(n) + " rows");
      for (std::size_t r = 0; r < m.size(); ++r) {
        const std::string rp = index_path(x.path("matrix"), r);
        require(m[r].is_array() && static_cast<int>(m[r].size()) == n, rp,
                "expected " + std::to_string(n) + " entries");
        std::vector<double> row;
        for (std::size_t k = 0; k < m[r].size(); ++k) {
          const std::string ep = index_path(rp, k);
          const double v = Section::as_number(m[r][k], ep);
          if (r == k) {
            require(v == 1.0, ep, "diagonal entries must be 1");
          } else {
            require(v >= 0.0 && v <= 1.0, ep, "must lie in [0, 1]");
          }
          row.push_back(v);
        }
        c.crosstalk.matrix.push_back(std::move(row));
      }
    } else if (c.crosstalk.kind != "none") {
      throw ConfigError(x.path("source"),
                        "must be one of paper_preset, gaussian, explicit, none");
    }
    x.finish();
  }
  if (c.crosstalk.kind == "paper_preset") {
    require(n == kPaperSites, "crosstalk.source", "paper_preset needs a 10-site array");
    c.model.crosstalk = paper_crosstalk_preset(c.crosstalk.floor);
  } else if (c.crosstalk.kind == "gaussian") {
    c.model.crosstalk = gaussian_crosstalk(c.model.geometry, c.crosstalk.waist_um);
  } else if (c.crosstalk.kind == "explicit") {
    c.model.crosstalk = CrosstalkMatrix::from_rows(c.crosstalk.matrix);
  } else {
    c.model.crosstalk = CrosstalkMatrix(n);
  }

  if (top.has("noise")) {
    Section s(top.raw("noise"), "noise");
    c.model.noise = parse_noise(s, c.noise_preset);
  }
  c.model.noise_label = c.noise_preset;

  if (top.has("loading")) {
    Section l(top.raw("loading"), "loading");
    c.model.loading.p_load = l.number("p_load", 1.0);
    check_probability(c.model.loading.p_load, l.path("p_load"));
    l.finish();
  }

  if (top.has("raman")) {
    Section r(top.raw("raman"), "raman");
    RamanConfig& rc = c.model.raman;
    rc.f_eom = r.number("f_eom", rc.f_eom);
    rc.f_aom_carrier = r.number("f_aom_carrier", rc.f_aom_carrier);
    require(rc.f_aom_carrier > 0.0, r.path("f_aom_carrier"), "must be > 0");
    rc.fine_detuning = r.number_list("fine_detuning", {});
    require(static_cast<int>(rc.fine_detuning.size()) <= n, r.path("fine_detuning"),
            "more entries than sites");
    rc.single_photon_detuning = r.number("single_photon_detuning", rc.single_photon_detuning);
    rc.phase_shift_duration = r.number("phase_shift_duration", rc.phase_shift_duration);
    require(rc.phase_shift_duration > 0.0, r.path("phase_shift_duration"), "must be > 0");
    r.finish();
  }
  c.model.raman.fine_detuning.resize(n, 0.0);

  c.model.rabi_freq.assign(n, kPaperRabiFreq);
  if (top.has("rabi_freq")) {
    const json& v = top.raw("rabi_freq");
    if (v.is_array()) {
      require(static_cast<int>(v.size()) == n, "rabi_freq",
              "expected " + std::to_string(n) + " entries");
      for (std::size_t i = 0; i < v.size(); ++i) {
        c.model.rabi_freq[i] = Section::as_number(v[i], index_path("rabi_freq", i));
        require(c.model.rabi_freq[i] >= 0.0, index_path("rabi_freq", i), "must be >= 0");
      }
    } else {
      const double f = Section::as_number(v, "rabi_freq");
      require(f >= 0.0, "rabi_freq", "must be >= 0");
      c.model.rabi_freq.assign(n, f);
    }
  }

  for (const auto& name : kExperiments) {
    if (name != c.experiment && top.has(name)) {
      throw ConfigError(name, "section does not match experiment '" + c.experiment + "'");
    }
  }

  if (c.experiment == "rabi") {
    RabiScanSpec& r = c.rabi;
    r.addressed = {1};
    r.durations.clear();
    if (top.has("rabi")) {
      Section s(top.raw("rabi"), "rabi");
      r.addressed = s.int_list("addressed", r.addressed);
      check_site_list(r.addressed, n, s.path("addressed"));
      r.durations = s.grid("durations", {});
      check_nonnegative(r.durations, s.path("durations"));
      r.measured = s.int_list("measured", {});
      check_site_list(r.measured, n, s.path("measured"));
      r.shots = static_cast<int>(s.integer("shots", r.shots));
      r.analytic = s.boolean("analytic", r.analytic);
      require(r.shots >= 1, s.path("shots"), "must be >= 1");
      s.finish();
    }
    require(!r.durations.empty(), "rabi.durations", "required");
    if (r.measured.empty()) r.measured = every_site(n);
    for (std::size_t i = 0; i < r.addressed.size(); ++i) {
      require(c.model.rabi_freq[r.addressed[i] - 1] > 0.0, index_path("rabi.addressed", i),
              "addressed site has zero Rabi frequency");
    }
  } else if (c.experiment == "ramsey") {
    RamseySpec& r = c.ramsey;
    if (n == kPaperSites) {
      r.sites = every_site(n);
      r.detunings = paper_ramsey_detunings();
      r.phases = paper_ramsey_phases();
    }
    if (top.has("ramsey")) {
      Section s(top.raw("ramsey"), "ramsey");
      r.sites = s.int_list("sites", r.sites);
      check_site_list(r.sites, n, s.path("sites"));
      r.detunings = s.number_list("detunings", r.detunings);
      r.phases = s.number_list("phases", r.phases, true);
      r.gaps = s.grid("gaps", {});
      check_nonnegative(r.gaps, s.path("gaps"));
      r.shots = static_cast<int>(s.integer("shots", r.shots));
      r.analytic = s.boolean("analytic", r.analytic);
      require(r.shots >= 1, s.path("shots"), "must be >= 1");
      s.finish();
    }
    require(!r.sites.empty(), "ramsey.sites", "required");
    require(r.detunings.size() == r.sites.size(), "ramsey.detunings", "one entry per site");
    require(r.phases.size() == r.sites.size(), "ramsey.phases", "one entry per site");
    require(!r.gaps.empty(), "ramsey.gaps", "required");
  } else if (c.experiment == "rb") {
    RBSpec& r = c.rb;
    r.targets = {7};
    if (top.has("rb")) {
      Section s(top.raw("rb"), "rb");
      r.targets = s.int_list("targets", r.targets);
      check_site_list(r.targets, n, s.path("targets"));
      r.lengths = s.int_list("lengths", r.lengths);
      for (std::size_t i = 0; i < r.lengths.size(); ++i) {
        require(r.lengths[i] >= 0, index_path(s.path("lengths"), i), "must be >= 0");
      }
      r.sequences = static_cast<int>(s.integer("sequences", r.sequences));
      require(r.sequences >= 1, s.path("sequences"), "must be >= 1");
      r.shots = static_cast<int>(s.integer("shots", r.shots));
      require(r.shots >= 1, s.path("shots"), "must be >= 1");
      r.parallel = s.boolean("parallel", r.parallel);
      r.analytic = s.boolean("analytic", r.analytic);
      s.finish();
    }
    require(!r.targets.empty(), "rb.targets", "required");
    require(!r.lengths.empty(), "rb.lengths", "required");
    for (std::size_t i = 0; i < r.targets.size(); ++i) {
      require(c.model.rabi_freq[r.targets[i] - 1] > 0.0, index_path("rb.targets", i),
              "target site has zero Rabi frequency");
    }
  } else {
    CrosstalkScanSpec& r = c.crosstalk_scan;
    if (top.has("crosstalk_scan")) {
      Section s(top.raw("crosstalk_scan"), "crosstalk_scan");
      r.addressed = s.int_list("addressed", {});
      check_site_list(r.addressed, n, s.path("addressed"));
      r.budget = s.number("budget", r.budget);
      require(r.budget > 0.0, s.path("budget"), "must be > 0");
      r.points = static_cast<int>(s.integer("points", r.points));
      require(r.points >= 6, s.path("points"), "must be >= 6");
      r.shots = static_cast<int>(s.integer("shots", r.shots));
      require(r.shots >= 1, s.path("shots"), "must be >= 1");
      r.analytic = s.boolean("analytic", r.analytic);
      s.finish();
    }
    if (r.addressed.empty()) r.addressed = every_site(n);
  }
  top.finish();

  try {
    c.model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return c;
}

std::string resolved_config_json(const RunConfig& c) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["experiment"] = c.experiment;
  doc["seed"] = c.seed;
  doc["output_dir"] = c.output_dir;
  doc["geometry"] = {{"layout", "hex"}, {"sites", c.sites}, {"pitch_um", c.pitch_um}};
  json x{{"source", c.crosstalk.kind}};
  if (c.crosstalk.kind == "paper_preset") x["floor"] = c.crosstalk.floor;
  if (c.crosstalk.kind == "gaussian") x["waist_um"] = c.crosstalk.waist_um;
  if (c.crosstalk.kind == "explicit") x["matrix"] = c.crosstalk.matrix;
  doc["crosstalk"] = x;
  doc["noise"] = noise_json(c.model.noise, c.noise_preset);
  doc["loading"] = {{"p_load", c.model.loading.p_load}};
  const RamanConfig& r = c.model.raman;
  doc["raman"] = {{"f_eom", r.f_eom},
                  {"f_aom_carrier", r.f_aom_carrier},
                  {"fine_detuning", r.fine_detuning},
                  {"single_photon_detuning", r.single_photon_detuning},
                  {"phase_shift_duration", r.phase_shift_duration}};
  doc["rabi_freq"] = c.model.rabi_freq;
  if (c.experiment == "rabi") {
    doc["rabi"] = {{"addressed", c.rabi.addressed}, {"durations", c.rabi.durations},
                   {"measured", c.rabi.measured},   {"shots", c.rabi.shots},
                   {"analytic", c.rabi.analytic}};
  } else if (c.experiment == "ramsey") {
    doc["ramsey"] = {{"sites", c.ramsey.sites}, {"detunings", c.ramsey.detunings},
                     {"phases", c.ramsey.phases}, {"gaps", c.ramsey.gaps},
                     {"shots", c.ramsey.shots}, {"analytic", c.ramsey.analytic}};
  } else if (c.experiment == "rb") {
    doc["rb"] = {{"targets", c.rb.targets},     {"lengths", c.rb.lengths},
                 {"sequences", c.rb.sequences}, {"shots", c.rb.shots},
                 {"parallel", c.rb.parallel},   {"analytic", c.rb.analytic}};
  } else {
    doc["crosstalk_scan"] = {{"addressed", c.crosstalk_scan.addressed},
                             {"budget", c.crosstalk_scan.budget},
                             {"points", c.crosstalk_scan.points},
                             {"shots", c.crosstalk_scan.shots},
                             {"analytic", c.crosstalk_scan.analytic}};
  }
  return doc.dump(2) + "\n";
}

namespace {

json table_json(const ResultTable& t) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "results";
  doc["experiment"] = t.experiment;
  doc["control_name"] = t.control_name;
  doc["control"] = t.control;
  json series = json::array();
  for (const auto& s : t.series) {
    series.push_back({{"site", s.site},
                      {"mean", s.mean},
                      {"std_error", s.std_error},
                      {"shots", s.shots}});
  }
  doc["series"] = series;
  const ResultMetadata& m = t.metadata;
  doc["metadata"] = {{"seed", m.seed},
                     {"noise_preset", m.noise_preset},
                     {"schedule_digest", m.schedule_digest},
                     {"load_attempts", m.load_attempts},
                     {"load_accepted", m.load_accepted},
                     {"analytic", m.analytic}};
  if (!t.rb_records.empty()) {
    json recs = json::array();
    for (const auto& r : t.rb_records) {
      recs.push_back({{"site", r.site},
                      {"length", r.length},
                      {"sequence", r.sequence},
                      {"cliffords", r.cliffords},
                      {"correction", r.correction},
                      {"mean", r.mean}});
    }
    doc["rb_records"] = recs;
  }
  return doc;
}

template <typename T>
T field(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw FormatError(what + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(what + ": bad '" + key + "': " + e.what());
  }
}

}  // namespace

std::string results_to_json(const ResultTable& table) {
  return table_json(table).dump(2) + "\n";
}

ResultTable results_from_json(const std::string& text) {
  const json doc = parse_json(text, "results");
  check_version(doc, "results");
  if (!doc.contains("format_version")) throw FormatError("results: missing format_version");
  if (field<std::string>(doc, "kind", "results") != "results") {
    throw FormatError("results: document is not a results table");
  }
  ResultTable t;
  t.experiment = field<std::string>(doc, "experiment", "results");
  t.control_name = field<std::string>(doc, "control_name", "results");
  t.control = field<std::vector<double>>(doc, "control", "results");
  for (const auto& s : field<json>(doc, "series", "results")) {
    SiteSeries ss;
    ss.site = field<int>(s, "site", "series");
    ss.mean = field<std::vector<double>>(s, "mean", "series");
    ss.std_error = field<std::vector<double>>(s, "std_error", "series");
    ss.shots = field<std::vector<long>>(s, "shots", "series");
    if (ss.mean.size() != t.control.size() || ss.std_error.size() != t.control.size() ||
        ss.shots.size() != t.control.size()) {
      throw FormatError("results: series length does not match control grid");
    }
    t.series.push_back(std::move(ss));
  }
  const json m = field<json>(doc, "metadata", "results");
  t.metadata.seed = field<std::uint64_t>(m, "seed", "metadata");
  t.metadata.noise_preset = field<std::string>(m, "noise_preset", "metadata");
  t.metadata.schedule_digest = field<std::string>(m, "schedule_digest", "metadata");
  t.metadata.load_attempts = field<long>(m, "load_attempts", "metadata");
  t.metadata.load_accepted = field<long>(m, "load_accepted", "metadata");
  t.metadata.analytic = field<bool>(m, "analytic", "metadata");
  if (doc.contains("rb_records")) {
    for (const auto& r : doc.at("rb_records")) {
      RBRecord rec;
      rec.site = field<int>(r, "site", "rb_records");
      rec.length = field<int>(r, "length", "rb_records");
      rec.sequence = field<int>(r, "sequence", "rb_records");
      rec.cliffords = field<std::vector<int>>(r, "cliffords", "rb_records");
      rec.correction = field<int>(r, "correction", "rb_records");
      rec.mean = field<double>(r, "mean", "rb_records");
      t.rb_records.push_back(std::move(rec));
    }
  }
  return t;
}

std::string crosstalk_to_json(const CrosstalkScanResult& result, double budget) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "crosstalk_scan";
  doc["budget"] = budget;
  doc["ratio"] = result.ratio.rows();
  json bounds = json::array();
  for (const auto& row : result.upper_bound) {
    json r = json::array();
    for (bool b : row) r.push_back(b);
    bounds.push_back(r);
  }
  doc["upper_bound"] = bounds;
  doc["addressed_rabi"] = result.addressed_rabi;
  json scans = json::array();
  for (const auto& t : result.scans) scans.push_back(table_json(t));
  doc["scans"] = scans;
  return doc.dump(2) + "\n";
}

std::string fit_report_json(const std::string& model, const std::vector<SiteFit>& fits) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "fit_report";
  doc["model"] = model;
  json arr = json::array();
  for (const auto& sf : fits) {
    json params = json::array();
    for (const auto& p : sf.fit.parameters) {
      params.push_back({{"name", p.name}, {"value", num(p.value)}, {"std_error", num(p.std_error)}});
    }
    arr.push_back({{"site", sf.site},
                   {"model", sf.fit.model},
                   {"parameters", params},
                   {"residual_rms", num(sf.fit.residual_rms)},
                   {"converged", sf.fit.converged},
                   {"iterations", sf.fit.iterations},
                   {"identifiable", sf.fit.identifiable},
                   {"physical", sf.fit.physical}});
  }
  doc["fits"] = arr;
  return doc.dump(2) + "\n";
}

std::vector<SiteFit> fit_table(const ResultTable& table, const std::string& model) {
  const bool rb_model = model == "rb" || model == "rb_decay_base";
  if (rb_model && table.experiment != "rb") {
    throw FormatError("model '" + model + "' needs an rb results table, got '" +
                      table.experiment + "'");
  }
  if (model == "damped_cosine" && table.experiment != "rabi" && table.experiment != "ramsey") {
    throw FormatError("model 'damped_cosine' needs a rabi or ramsey table, got '" +
                      table.experiment + "'");
  }
  if (!rb_model && model != "damped_cosine") {
    throw FormatError("unknown fit model '" + model + "' (rb, rb_decay_base, damped_cosine)");
  }
  std::vector<SiteFit> out;
  for (const auto& s : table.series) {
    const std::vector<double> shots(s.shots.begin(), s.shots.end());
    std::vector<double> w = binomial_weights(s.mean, shots);
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) {
      std::fill(w.begin(), w.end(), 1.0);
    }
    FitResult f;
    if (model == "rb") {
      f = fit_rb(table.control, s.mean, w);
    } else if (model == "rb_decay_base") {
      f = fit_rb_decay_base(table.control, s.mean, w);
    } else {
      f = fit_damped_cosine(table.control, s.mean, w);
    }
    out.push_back({s.site, std::move(f)});
  }
  return out;
}

std::string schedule_to_json(const ChannelSchedule& s) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "schedule";
  doc["channel"] = s.channel;
  doc["carrier"] = s.carrier;
  doc["frame_phase"] = s.frame_phase;
  doc["total_duration"] = s.total_duration();
  doc["light_on_time"] = s.light_on_time();
  doc["gate_ends"] = s.gate_ends;
  json segs = json::array();
  for (const auto& seg : s.segments) {
    segs.push_back({{"kind", to_string(seg.kind)},
                    {"rf_frequency", seg.rf_frequency},
                    {"rf_phase", seg.rf_phase},
                    {"amplitude", seg.amplitude},
                    {"duration", seg.duration},
                    {"light_on", seg.light_on}});
  }
  doc["segments"] = segs;
  return doc.dump(2) + "\n";
}

ChannelSchedule schedule_from_json(const std::string& text) {
  const json doc = parse_json(text, "schedule");
  check_version(doc, "schedule");
  if (field<std::string>(doc, "kind", "schedule") != "schedule") {
    throw FormatError("schedule: document is not a schedule");
  }
  ChannelSchedule s;
  s.channel = field<int>(doc, "channel", "schedule");
  s.carrier = field<double>(doc, "carrier", "schedule");
  s.frame_phase = field<double>(doc, "frame_phase", "schedule");
  s.gate_ends = field<std::vector<std::size_t>>(doc, "gate_ends", "schedule");
  for (const auto& j : field<json>(doc, "segments", "schedule")) {
    Segment seg;
    try {
      seg.kind = segment_kind_from_string(field<std::string>(j, "kind", "segment"));
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("schedule: ") + e.what());
    }
    seg.rf_frequency = field<double>(j, "rf_frequency", "segment");
    seg.rf_phase = field<double>(j, "rf_phase", "segment");
    seg.amplitude = field<double>(j, "amplitude", "segment");
    seg.duration = field<double>(j, "duration", "segment");
    seg.light_on = field<bool>(j, "light_on", "segment");
    s.segments.push_back(seg);
  }
  return s;
}

void write_waveform(const Waveform& wf, const fs::path& dir, const std::string& stem) {
  std::string samples(wf.samples.size() * 4, '\0');
  for (std::size_t i = 0; i < wf.samples.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(wf.samples[i]);
    for (int b = 0; b < 4; ++b) samples[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  const std::string ttl(wf.ttl.begin(), wf.ttl.end());

  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "waveform";
  doc["channel"] = wf.channel;
  doc["sample_rate"] = wf.sample_rate;
  doc["carrier"] = wf.carrier;
  doc["sample_count"] = wf.samples.size();
  doc["sample_format"] = "float32le";
  doc["samples_file"] = stem + ".f32";
  doc["ttl_format"] = "packed_lsb_first";
  doc["ttl_file"] = stem + ".ttl";
  json map = json::array();
  for (const auto& span : wf.segment_map) {
    map.push_back({{"kind", to_string(span.kind)},
                   {"first_sample", span.first_sample},
                   {"sample_count", span.sample_count}});
  }
  doc["segment_map"] = map;

  write_file_atomic(dir / (stem + ".f32"), samples);
  write_file_atomic(dir / (stem + ".ttl"), ttl);
  write_file_atomic(dir / (stem + ".json"), doc.dump(2) + "\n");
}

Waveform read_waveform(const fs::path& header) {
  const json doc = parse_json(read_file(header), "waveform");
  check_version(doc, "waveform");
  if (field<std::string>(doc, "kind", "waveform") != "waveform") {
    throw FormatError("waveform: document is not a waveform header");
  }
  Waveform wf;
  wf.channel = field<int>(doc, "channel", "waveform");
  wf.sample_rate = field<double>(doc, "sample_rate", "waveform");
  wf.carrier = field<double>(doc, "carrier", "waveform");
  const auto count = field<std::size_t>(doc, "sample_count", "waveform");
  const fs::path dir = header.parent_path();
  const std::string raw = read_file(dir / field<std::string>(doc, "samples_file", "waveform"));
  if (raw.size() != count * 4) throw FormatError("waveform: sample file has the wrong size");
  wf.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * i + b])) << (8 * b);
    }
    wf.samples[i] = std::bit_cast<float>(bits);
  }
  const std::string ttl = read_file(dir / field<std::string>(doc, "ttl_file", "waveform"));
  if (ttl.size() != (count + 7) / 8) throw FormatError("waveform: TTL file has the wrong size");
  wf.ttl.assign(ttl.begin(), ttl.end());
  for (const auto& j : field<json>(doc, "segment_map", "waveform")) {
    SegmentSpan span;
    span.kind = segment_kind_from_string(field<std::string>(j, "kind", "segment_map"));
    span.first_sample = field<std::size_t>(j, "first_sample", "segment_map");
    span.sample_count = field<std::size_t>(j, "sample_count", "segment_map");
    wf.segment_map.push_back(span);
  }
  return wf;
}

namespace {

std::vector<std::string> plot_columns(const ResultTable& t) {
  const std::string value = t.experiment == "rb" ? "F_bar" : "P1";
  return {"site", t.control_name, value, "err"};
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string plotdata_tsv(const ResultTable& table) {
  std::ostringstream os;
  os << "# fiberq plotdata format_version=" << kFormatVersion
     << " experiment=" << table.experiment << "\n";
  const auto cols = plot_columns(table);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "\t" : "") << cols[i];
  os << "\n";
  for (const auto& s : table.series) {
    for (std::size_t k = 0; k < table.control.size(); ++k) {
      os << s.site << "\t" << g17(table.control[k]) << "\t" << g17(s.mean[k]) << "\t"
         << g17(s.std_error[k]) << "\n";
    }
  }
  return os.str();
}

PlotData read_plotdata(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("# fiberq plotdata ", 0) != 0) {
    throw FormatError("plotdata: missing header line");
  }
  PlotData out;
  int major = -1;
  const auto vpos = line.find("format_version=");
  if (vpos == std::string::npos ||
      std::sscanf(line.c_str() + vpos + 15, "%d", &major) != 1 || major != kFormatMajor) {
    throw FormatError("plotdata: unsupported format_version");
  }
  const auto epos = line.find("experiment=");
  if (epos != std::string::npos) out.experiment = line.substr(epos + 11);
  if (!std::getline(is, line)) throw FormatError("plotdata: missing column line");
  std::istringstream header(line);
  for (std::string c; std::getline(header, c, '\t');) out.columns.push_back(c);
  if (out.columns.size() != 4) throw FormatError("plotdata: expected 4 columns");
  int row = 2;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    PlotRow r;
    char* end = nullptr;
    const char* p = line.c_str();
    r.site = static_cast<int>(std::strtol(p, &end, 10));
    double* dst[3] = {&r.control, &r.value, &r.error};
    for (double* d : dst) {
      if (*end != '\t') throw FormatError("plotdata: malformed row " + std::to_string(row));
      p = end + 1;
      *d = std::strtod(p, &end);
      if (end == p) throw FormatError("plotdata: malformed row " + std::to_string(row));
    }
    if (*end != '\0') throw FormatError("plotdata: malformed row " + std::to_string(row));
    out.rows.push_back(r);
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace fiberq
