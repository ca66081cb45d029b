#pragma once

#include <vector>

#include "mgap/sim.hpp"

namespace mgap {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct StiffnessResult {
    double k = 0.0;   // N/m
    double r2 = 0.0;
    std::vector<double> eps;    // |mismatch| per ramp point
    std::vector<double> force;  // |F_ext| per ramp point
};

// Indentation sweep against the calibration wall (axis 0) or floor (axis 1).
// Each offset is held until steady state (|v| < 1e-5 m/s for 30 steps),
// then (|eps|, |F_ext|) is recorded and a line is fitted through the points.
StiffnessResult characterize_stiffness(const EnvParams& params, const TaskSpec& task, int axis,
                                       const std::vector<double>& ramp_offsets);

}  // namespace mgap
