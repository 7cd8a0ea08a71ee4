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

#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "fiberq/io.h"
#include "json.hpp"
#include "fiberq/presets.h"

namespace fiberq {
namespace {

namespace fs = std::filesystem;

const char* kRbConfig = R"({
  "format_version": "1.0",
  "experiment": "rb",
  "seed": 11,
  "crosstalk": {"source": "none"},
  "noise": {"preset": "none"},
  "rb": {"targets": [7], "lengths": [0, 2, 4], "sequences": 2, "analytic": true}
})";

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fiberq_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

TEST(RunConfigParse, ReadsFieldsAndDefaults) {
  const RunConfig c = parse_run_config(kRbConfig);
  EXPECT_EQ(c.experiment, "rb");
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.rb.lengths, (std::vector<int>{0, 2, 4}));
  EXPECT_EQ(c.rb.sequences, 2);
  EXPECT_TRUE(c.rb.analytic);
  EXPECT_EQ(c.model.site_count(), 10);
  EXPECT_EQ(c.model.rabi_freq[6], kPaperRabiFreq);
  EXPECT_EQ(c.model.crosstalk, CrosstalkMatrix(10));
}

TEST(RunConfigParse, ResolvedConfigRoundTrips) {
  const RunConfig c = parse_run_config(kRbConfig);
  const std::string resolved = resolved_config_json(c);
  EXPECT_EQ(resolved_config_json(parse_run_config(resolved)), resolved);
}

TEST(RunConfigParse, UnknownFieldsAreRejectedWithTheirPath) {
  try {
    parse_run_config(replace(kRbConfig, "\"sequences\"", "\"sequence\""));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "rb.sequence");
  }
  try {
    parse_run_config(replace(kRbConfig, "[0, 2, 4]", "[0, 2, -4]"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "rb.lengths[2]");
  }
  EXPECT_THROW(parse_run_config(replace(kRbConfig, "\"rb\"", "\"rabi\"")), ConfigError);
  EXPECT_THROW(parse_run_config(replace(kRbConfig, "\"none\"}", "\"loud\"}")), ConfigError);
  EXPECT_THROW(parse_run_config("{not json"), ConfigError);
}

TEST(RunConfigParse, RejectsForeignMajorVersion) {
  EXPECT_THROW(parse_run_config(replace(kRbConfig, "\"1.0\"", "\"2.0\"")), ConfigError);
  EXPECT_NO_THROW(parse_run_config(replace(kRbConfig, "\"1.0\"", "\"1.3\"")));
}

TEST(RunConfigParse, GridsAndAngleStrings) {
  const RunConfig c = parse_run_config(R"({
    "experiment": "ramsey",
    "ramsey": {"sites": [1, 2], "detunings": [1000, 2000], "phases": ["pi/2", "-pi/4"],
               "gaps": {"start": 0, "stop": 1e-3, "points": 11}}
  })");
  ASSERT_EQ(c.ramsey.gaps.size(), 11u);
  EXPECT_DOUBLE_EQ(c.ramsey.gaps[10], 1e-3);
  EXPECT_DOUBLE_EQ(c.ramsey.phases[0], std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(c.ramsey.phases[1], -std::numbers::pi / 4);
}

TEST(Results, JsonRoundTrip) {
  const RunConfig c = parse_run_config(kRbConfig);
  const ResultTable t = run_rb(c.rb, c.model, {.seed = c.seed});
  const std::string json = results_to_json(t);
  const ResultTable back = results_from_json(json);
  EXPECT_EQ(results_to_json(back), json);
  EXPECT_EQ(back.site(7).mean, t.site(7).mean);
  EXPECT_EQ(back.rb_records.size(), t.rb_records.size());
  EXPECT_THROW(results_from_json(replace(json, "\"1.0\"", "\"9.0\"")), FormatError);
}

TEST(Results, FitTableRejectsWrongModel) {
  const RunConfig c = parse_run_config(kRbConfig);
  const ResultTable t = run_rb(c.rb, c.model, {});
  EXPECT_EQ(fit_table(t, "rb").size(), 1u);
  EXPECT_THROW(fit_table(t, "damped_cosine"), FormatError);
  EXPECT_THROW(fit_table(t, "nonsense"), FormatError);
}

TEST(PlotData, RoundTripIsExact) {
  ResultTable t;
  t.experiment = "ramsey";
  t.control_name = "T";
  t.control = {0.0, 1e-4, 1.0 / 3.0};
  t.series = {{3, {0.1, 0.2, 2.0 / 3.0}, {0.01, 0.02, 1e-17}, {10, 10, 10}}};
  const PlotData d = read_plotdata(plotdata_tsv(t));
  EXPECT_EQ(d.experiment, "ramsey");
  ASSERT_EQ(d.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(d.rows[i].site, 3);
    EXPECT_EQ(d.rows[i].control, t.control[i]);
    EXPECT_EQ(d.rows[i].value, t.series[0].mean[i]);
    EXPECT_EQ(d.rows[i].error, t.series[0].std_error[i]);
  }
  EXPECT_THROW(read_plotdata("site\tT\n"), FormatError);
}

TEST(Schedules, JsonRoundTrip) {
  Circuit c;
  c.add(4, GateOp::clifford(16));
  c.add(4, GateOp::virtual_z(0.3));
  c.add(4, GateOp::idle(2e-6));
  const ScheduleSet s = compile_circuit(c, RamanConfig{}, std::vector<double>(10, 47.2e3));
  const ChannelSchedule back = schedule_from_json(schedule_to_json(s.at(4)));
  EXPECT_EQ(back.segments, s.at(4).segments);
  EXPECT_EQ(back.carrier, s.at(4).carrier);
  EXPECT_EQ(back.frame_phase, s.at(4).frame_phase);
}

TEST(Waveforms, BinaryRoundTrip) {
  Circuit c;
  c.add(2, GateOp::clifford(9));
  c.add(2, GateOp::virtual_z(1.0));
  const ScheduleSet s = compile_circuit(c, RamanConfig{}, std::vector<double>(10, 47.2e3));
  const Waveform wf = render_waveform(s.at(2), 1e9);
  const fs::path dir = scratch_dir("waveform");
  write_waveform(wf, dir, "channel_02");
  EXPECT_EQ(fs::file_size(dir / "channel_02.f32"), 4 * wf.sample_count());
  const Waveform back = read_waveform(dir / "channel_02.json");
  EXPECT_EQ(back.samples, wf.samples);
  EXPECT_EQ(back.ttl, wf.ttl);
  EXPECT_EQ(back.sample_rate, wf.sample_rate);
  ASSERT_EQ(back.segment_map.size(), wf.segment_map.size());
  fs::remove_all(dir);
}

TEST(Files, AtomicWriteReplacesContent) {
  const fs::path dir = scratch_dir("atomic");
  const fs::path p = dir / "out.txt";
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  EXPECT_EQ(read_file(p), "second");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1);
  EXPECT_THROW(read_file(dir / "missing"), std::runtime_error);
  fs::remove_all(dir);
}

// Structural subset of JSON Schema: type, enum/const, bounds, properties with
// additionalProperties false, required, items and oneOf.
bool conforms(const nlohmann::json& v, const nlohmann::json& schema, std::string* where,
              const std::string& path = "") {
  auto fail = [&](const std::string& why) {
    if (where) *where = path + ": " + why;
    return false;
  };
  if (schema.contains("oneOf")) {
    for (const auto& alt : schema["oneOf"]) {
      if (conforms(v, alt, nullptr, path)) return true;
    }
    return fail("matches no alternative");
  }
  if (schema.contains("enum") &&
      std::find(schema["enum"].begin(), schema["enum"].end(), v) == schema["enum"].end()) {
    return fail("not in enum");
  }
  if (schema.contains("const") && schema["const"] != v) return fail("not the constant");
  const std::string type = schema.value("type", "");
  if (type == "object") {
    if (!v.is_object()) return fail("expected object");
    for (const auto& r : schema.value("required", nlohmann::json::array())) {
      if (!v.contains(r.get<std::string>())) return fail("missing " + r.get<std::string>());
    }
    for (const auto& [k, sub] : v.items()) {
      if (!schema["properties"].contains(k)) return fail("unknown key " + k);
      if (!conforms(sub, schema["properties"][k], where, path + "." + k)) return false;
    }
  } else if (type == "array") {
    if (!v.is_array()) return fail("expected array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!conforms(v[i], schema["items"], where, path + "[" + std::to_string(i) + "]")) {
        return false;
      }
    }
  } else if (type == "integer" || type == "number") {
    if (type == "integer" ? !v.is_number_integer() : !v.is_number()) return fail("expected " + type);
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) return fail("below minimum");
    if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>()) {
      return fail("not above minimum");
    }
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) return fail("above maximum");
  } else if (type == "string" && !v.is_string()) {
    return fail("expected string");
  } else if (type == "boolean" && !v.is_boolean()) {
    return fail("expected boolean");
  }
  return true;
}

TEST(ConfigSchema, BundledAndResolvedConfigsConform) {
  const fs::path dir = FIBERQ_CONFIG_DIR;
  const auto schema = nlohmann::json::parse(read_file(dir / "run_config.schema.json"));
  int checked = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().filename() == "run_config.schema.json") continue;
    const std::string text = read_file(entry.path());
    std::string where;
    EXPECT_TRUE(conforms(nlohmann::json::parse(text), schema, &where))
        << entry.path().filename() << where;
    // The resolved form spells out every field the parser accepts.
    const std::string resolved = resolved_config_json(parse_run_config(text));
    EXPECT_TRUE(conforms(nlohmann::json::parse(resolved), schema, &where))
        << "resolved " << entry.path().filename() << where;
    ++checked;
  }
  EXPECT_GE(checked, 7);
  std::string where;
  EXPECT_FALSE(conforms(nlohmann::json::parse(R"({"experiment": "rb", "rb": {"seqs": 3}})"),
                        schema, &where));
  EXPECT_EQ(where, ".rb: unknown key seqs");
}

}  // namespace
}  // namespace fiberq
