#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ecbf/barrier.hpp"
#include "ecbf/simulation.hpp"

namespace ecbf {

struct PlotBounds {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

/// Box around every logged ego and obstacle position, padded by r_a along X and r_b along Y
/// so ellipse outlines stay inside.
PlotBounds trajectory_bounds(const std::vector<SimLog>& logs, const EllipseParams& ellipse);

/// Writes <prefix>_trajectories.svg, <prefix>_barrier.svg, <prefix>_steering.svg and, with two
/// or more logs, <prefix>_solve_time.svg. Returns the written paths. Throws
/// std::invalid_argument for an empty log set and std::runtime_error on I/O failure.
std::vector<std::filesystem::path> render_plots(const std::vector<SimLog>& logs,
                                                const EllipseParams& ellipse,
                                                const std::filesystem::path& prefix);

}  // namespace ecbf
