// SPDX-License-Identifier: Apache-2.0
#include "fastssl/export.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fastssl/error.hpp"

namespace fastssl {

std::vector<ScheduleRow> schedule_rows(const ScheduleConfig &schedule,
                                       const ProgressivePlan &plan) {
  schedule.validate();
  plan.validate();
  if (schedule.total_steps != plan.total_steps)
    throw ConfigError("schedule has " + std::to_string(schedule.total_steps) +
                      " steps but the curriculum has " +
                      std::to_string(plan.total_steps));
  std::vector<ScheduleRow> rows;
  rows.reserve(static_cast<std::size_t>(schedule.total_steps) + 1);
  for (std::int64_t t = 0; t <= schedule.total_steps; ++t) {
    const auto sp = evaluate_schedule(t, schedule);
    const auto cp = curriculum_at(t, plan);
    rows.push_back({t, sp.lr, sp.momentum, cp.resolution, cp.magnitude});
  }
  return rows;
}

std::vector<ScheduleRow> schedule_rows(const ExperimentConfig &cfg) {
  cfg.validate();
  return schedule_rows(cfg.schedule_config(), cfg.progressive_plan());
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_schedule_csv(std::ostream &out, const std::vector<ScheduleRow> &rows) {
  out << "step,lr,momentum,resolution,aug_magnitude\n";
  for (const auto &r : rows)
    out << r.step << ',' << format_real(r.lr) << ',' << format_real(r.momentum)
        << ',' << r.resolution << ',' << format_real(r.aug_magnitude) << '\n';
}

namespace {

double parse_real(const std::string &s, int line) {
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw IoError("line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

long long parse_int(const std::string &s, int line) {
  char *end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw IoError("line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

} // namespace

std::vector<ScheduleRow> read_schedule_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != "step,lr,momentum,resolution,aug_magnitude")
    throw IoError("line 1: unexpected schedule header");
  std::vector<ScheduleRow> rows;
  int no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    if (cells.size() != 5)
      throw IoError("line " + std::to_string(no) + ": expected 5 fields");
    ScheduleRow r;
    r.step = parse_int(cells[0], no);
    r.lr = parse_real(cells[1], no);
    r.momentum = parse_real(cells[2], no);
    r.resolution = static_cast<int>(parse_int(cells[3], no));
    r.aug_magnitude = parse_real(cells[4], no);
    if (r.step != static_cast<std::int64_t>(rows.size()))
      throw IoError("line " + std::to_string(no) + ": steps must count up from 0");
    rows.push_back(r);
  }
  return rows;
}

void emit_schedule(const ScheduleConfig &schedule, const ProgressivePlan &plan,
                   const std::string &path) {
  const auto rows = schedule_rows(schedule, plan);
  std::ostringstream os;
  write_schedule_csv(os, rows);
  write_text_file(path, os.str());
}

void emit_schedule(const ExperimentConfig &cfg, const std::string &path) {
  cfg.validate();
  emit_schedule(cfg.schedule_config(), cfg.progressive_plan(), path);
}

void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out.flush())
    throw IoError("failed writing " + path);
}

std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

} // namespace fastssl
