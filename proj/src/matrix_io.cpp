#include "ecbf/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ecbf {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& token) {
  std::size_t used = 0;
  const double v = std::stod(token, &used);
  if (used != token.size()) throw std::runtime_error("bad number '" + token + "'");
  return v;
}

void expect_scalar(std::istream& in, const std::string& name, double& value) {
  std::string key, token;
  if (!(in >> key >> token) || key != name) {
    throw std::runtime_error("expected scalar '" + name + "'");
  }
  value = parse_double(token);
}

}  // namespace

void write_matrix(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? " " : "") << format_double(m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix(std::istream& in, const std::string& name) {
  std::string key;
  long rows = 0, cols = 0;
  if (!(in >> key >> rows >> cols) || key != name || rows < 0 || cols < 0) {
    throw std::runtime_error("expected matrix header '" + name + " <rows> <cols>'");
  }
  Eigen::MatrixXd m(rows, cols);
  std::string token;
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      if (!(in >> token)) throw std::runtime_error("truncated matrix '" + name + "'");
      m(i, j) = parse_double(token);
    }
  }
  return m;
}

void save_gains(const std::filesystem::path& path, const ObserverGains& gains) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gains file " + path.string());
  out << "theta " << format_double(gains.theta) << '\n';
  out << "lambda " << format_double(gains.lambda) << '\n';
  out << "gamma " << format_double(gains.gamma_obj) << '\n';
  write_matrix(out, "P", gains.P);
  write_matrix(out, "R", gains.R);
  write_matrix(out, "L", gains.L);
  if (!out) throw std::runtime_error("error writing gains file " + path.string());
}

ObserverGains load_gains(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gains file " + path.string());
  try {
    ObserverGains gains;
    expect_scalar(in, "theta", gains.theta);
    expect_scalar(in, "lambda", gains.lambda);
    expect_scalar(in, "gamma", gains.gamma_obj);
    gains.P = read_matrix(in, "P");
    gains.R = read_matrix(in, "R");
    gains.L = read_matrix(in, "L");
    return gains;
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace ecbf
