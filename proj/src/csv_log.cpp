#include "ecbf/csv_log.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ecbf {

namespace {

void put(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g,", v);
  line += buf;
}

SolveStatus parse_status(const std::string& s) {
  for (SolveStatus st : {SolveStatus::optimal, SolveStatus::infeasible, SolveStatus::max_iterations}) {
    if (s == to_string(st)) return st;
  }
  throw std::runtime_error("unknown status '" + s + "'");
}

}  // namespace

std::string format_csv(const SimLog& log, const CsvOptions& options) {
  std::string out;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    out += kCsvColumns[i];
    out += (i + 1 < kCsvColumns.size()) ? ',' : '\n';
  }
  std::string line;
  for (const StepRecord& r : log.steps) {
    line.clear();
    put(line, r.t);
    for (double v : {r.ego.X, r.ego.Y, r.ego.psi, r.ego.v}) put(line, v);
    for (double v : {r.obstacle.X, r.obstacle.Y, r.obstacle.psi, r.obstacle.v}) put(line, v);
    for (int i = 0; i < 3; ++i) put(line, r.measurement(i));
    for (int i = 0; i < 4; ++i) put(line, r.estimate(i));
    put(line, r.e_dot_hat(0));
    put(line, r.e_dot_hat(1));
    for (double v : {r.eps1, r.eps2, r.H_true, r.H_est, r.a, r.beta, r.delta_f}) put(line, v);
    for (int i = 0; i < 3; ++i) put(line, r.slacks(i));
    put(line, r.margin);
    line += r.sign_ok ? "1," : "0,";
    put(line, options.record_timing ? r.solve_us : 0.0);
    line += to_string(r.status);
    line += '\n';
    out += line;
  }
  return out;
}

void write_csv(const SimLog& log, const std::filesystem::path& path, const CsvOptions& options) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write CSV '" + path.string() + "'");
  f << format_csv(log, options);
  if (!f) throw std::runtime_error("error while writing CSV '" + path.string() + "'");
}

SimLog read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read CSV '" + path.string() + "'");
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty CSV '" + path.string() + "'");

  SimLog log;
  int row = 1;
  while (std::getline(f, line)) {
    ++row;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != kCsvColumns.size()) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " columns");
    }
    std::vector<double> v(cells.size() - 1);
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) v[i] = std::stod(cells[i]);

    StepRecord r;
    r.t = v[0];
    r.ego = {v[1], v[2], v[3], v[4]};
    r.obstacle = {v[5], v[6], v[7], v[8]};
    r.measurement << v[9], v[10], v[11];
    r.estimate << v[12], v[13], v[14], v[15];
    r.e_dot_hat << v[16], v[17];
    r.eps1 = v[18];
    r.eps2 = v[19];
    r.H_true = v[20];
    r.H_est = v[21];
    r.a = v[22];
    r.beta = v[23];
    r.delta_f = v[24];
    r.slacks << v[25], v[26], v[27];
    r.margin = v[28];
    r.sign_ok = v[29] != 0.0;
    r.solve_us = v[30];
    r.status = parse_status(cells.back());
    log.steps.push_back(r);
  }
  return log;
}

}  // namespace ecbf
