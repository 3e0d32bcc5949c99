#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include "ecbf/simulation.hpp"

namespace ecbf {

inline constexpr std::array<std::string_view, 32> kCsvColumns = {
    "t",       "ego_X",   "ego_Y",   "ego_psi", "ego_v",   "obs_X",    "obs_Y",   "obs_psi",
    "obs_v",   "meas_X",  "meas_Y",  "meas_v",  "est_X",   "est_Y",    "est_psi", "est_v",
    "ehat_dx", "ehat_dy", "eps1",    "eps2",    "H_true",  "H_est",    "a",       "beta",
    "delta_f", "rho_v",   "rho_y",   "rho_psi", "margin",  "sign_ok",  "solve_us", "status"};

struct CsvOptions {
  // Wall-clock solve times differ between runs; they are written as 0 unless requested so
  // that identical inputs give identical files.
  bool record_timing = false;
};

std::string format_csv(const SimLog& log, const CsvOptions& options = {});

/// Throws std::runtime_error naming the path when the file cannot be written.
void write_csv(const SimLog& log, const std::filesystem::path& path,
               const CsvOptions& options = {});

/// Inverse of write_csv. Mode, seed and e_hat are not stored in the file and keep their
/// defaults; ehat_dx/ehat_dy hold the rate estimate e_dot_hat.
SimLog read_csv(const std::filesystem::path& path);

}  // namespace ecbf
