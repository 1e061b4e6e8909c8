// SPDX-License-Identifier: Apache-2.0
/**
 * @file   export.hpp
 * @brief  Schedule CSV and metrics log serialization.
 *
 * Schedule CSV: header `step,lr,momentum,resolution,aug_magnitude`, one row
 * per step t = 0..L inclusive, reals printed with 9 significant digits.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fastssl/config.hpp"
#include "fastssl/curriculum.hpp"
#include "fastssl/schedule.hpp"

namespace fastssl {

struct ScheduleRow {
  std::int64_t step = 0;
  double lr = 0.0;
  double momentum = 0.0;
  int resolution = 0;
  double aug_magnitude = 0.0;

  friend bool operator==(const ScheduleRow &, const ScheduleRow &) = default;
};

/// Rows for t = 0..L. Both configs must agree on L.
std::vector<ScheduleRow> schedule_rows(const ScheduleConfig &schedule,
                                       const ProgressivePlan &plan);
std::vector<ScheduleRow> schedule_rows(const ExperimentConfig &cfg);

/// `%.9g`, the format of every real in exported CSV files.
std::string format_real(double v);

void write_schedule_csv(std::ostream &out, const std::vector<ScheduleRow> &rows);

/// Throws IoError on malformed input.
std::vector<ScheduleRow> read_schedule_csv(std::istream &in);

/// Writes the CSV to `path`; IoError when the path is not writable.
void emit_schedule(const ScheduleConfig &schedule, const ProgressivePlan &plan,
                   const std::string &path);
void emit_schedule(const ExperimentConfig &cfg, const std::string &path);

/// Truncates `path` and writes `text`; IoError on failure.
void write_text_file(const std::string &path, const std::string &text);
std::string read_text_file(const std::string &path);

} // namespace fastssl
