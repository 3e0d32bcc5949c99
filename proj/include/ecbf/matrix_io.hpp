#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "ecbf/observer.hpp"

namespace ecbf {

// Plain-text matrices: a "<name> <rows> <cols>" header followed by rows of whitespace-separated
// values written with 17 significant digits, so a reload reproduces every bit.

void write_matrix(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m);

/// Reads the next matrix and checks its name. Throws std::runtime_error on malformed input.
Eigen::MatrixXd read_matrix(std::istream& in, const std::string& name);

void save_gains(const std::filesystem::path& path, const ObserverGains& gains);
ObserverGains load_gains(const std::filesystem::path& path);

}  // namespace ecbf
