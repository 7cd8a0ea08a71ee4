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

#ifndef FIBERQ_IO_H_
#define FIBERQ_IO_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiberq/compiler.h"
#include "fiberq/experiments.h"
#include "fiberq/fitting.h"
#include "fiberq/waveform.h"

namespace fiberq {

// Stamped into every document; readers accept any 1.x.
inline constexpr const char* kFormatVersion = "1.0";
inline constexpr int kFormatMajor = 1;

// Schema violation in a config document. `path` is the dotted field path,
// e.g. "noise.d_if" or "rb.lengths[3]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Document that cannot be read: bad syntax, wrong kind, unknown version.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CrosstalkSource {
  std::string kind = "paper_preset";  // paper_preset | gaussian | explicit | none
  double floor = kDefaultCrosstalkFloor;
  double waist_um = 2.0;
  std::vector<std::vector<double>> matrix;
};

struct RunConfig {
  std::string experiment;  // rabi | ramsey | rb | crosstalk_scan
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int sites = 10;
  double pitch_um = 5.6;
  CrosstalkSource crosstalk;
  std::string noise_preset = "none";
  ExperimentModel model;  // resolved from the fields above
  RabiScanSpec rabi;
  RamseySpec ramsey;
  RBSpec rb;
  CrosstalkScanSpec crosstalk_scan;

  // Sets the analytic flag of the selected experiment.
  void set_analytic(bool analytic);
};

// Parses and validates a config document. Unknown fields are rejected.
RunConfig parse_run_config(const std::string& text);
// The same config with every default written out. Parsing it back yields an
// identical RunConfig.
std::string resolved_config_json(const RunConfig& config);

std::string results_to_json(const ResultTable& table);
ResultTable results_from_json(const std::string& text);

std::string crosstalk_to_json(const CrosstalkScanResult& result, double budget);

struct SiteFit {
  int site = 0;
  FitResult fit;
};
std::string fit_report_json(const std::string& model, const std::vector<SiteFit>& fits);

// Fits `model` (rb | rb_decay_base | damped_cosine | gaussian_decay) to each
// site of `table`. Throws FormatError when the table has the wrong shape.
std::vector<SiteFit> fit_table(const ResultTable& table, const std::string& model);

std::string schedule_to_json(const ChannelSchedule& schedule);
ChannelSchedule schedule_from_json(const std::string& text);

// Writes <stem>.json (header), <stem>.f32 (little-endian float32 samples)
// and <stem>.ttl (packed bits, least significant first).
void write_waveform(const Waveform& wf, const std::filesystem::path& dir,
                    const std::string& stem);
Waveform read_waveform(const std::filesystem::path& header);

// Tab-separated rows (site, control, value, err) after a version line.
std::string plotdata_tsv(const ResultTable& table);
struct PlotRow {
  int site = 0;
  double control = 0.0;
  double value = 0.0;
  double error = 0.0;
};
struct PlotData {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<PlotRow> rows;
};
PlotData read_plotdata(const std::string& text);

// Temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace fiberq

#endif  // FIBERQ_IO_H_
