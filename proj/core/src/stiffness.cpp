#include "mgap/stiffness.hpp"

#include <cmath>

#include "mgap/errors.hpp"

namespace mgap {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ContractError("fit_line: need >= 2 points");
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-18) throw ContractError("fit_line: degenerate x values");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ym = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += e * e;
        ss_tot += (y[i] - ym) * (y[i] - ym);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

StiffnessResult characterize_stiffness(const EnvParams& params, const TaskSpec& task, int axis,
                                       const std::vector<double>& ramp_offsets) {
    if (task.kind != TaskKind::kCalibrationWall)
        throw ContractError("characterize_stiffness: needs the calibration_wall task");
    if (axis < 0 || axis >= kDim) throw ContractError("characterize_stiffness: bad axis");
    for (double d : ramp_offsets)
        if (d <= 0.0 || d > params.delta_max)
            throw ConfigError("characterize_stiffness: ramp offsets must be in (0, delta_max]");

    EnvState env = init_env(params, task, 0);
    StiffnessResult out;

    double surface = axis == 0 ? task.wall_x : task.floor_z;
    double dir = axis == 0 ? 1.0 : -1.0;  // push +x into the wall, -z into the floor

    MasterCommand cmd;
    cmd.pos = task.start_pos;
    cmd.grip = task.start_grip;

    for (double offset : ramp_offsets) {
        cmd.pos[axis] = surface + dir * offset;
        int quiet = 0;
        int steps = 0;
        while (quiet < 30) {
            step(env, cmd);
            if (env.robot.vel.cwiseAbs().maxCoeff() < 1e-5)
                quiet++;
            else
                quiet = 0;
            if (++steps > 5000)
                throw SimDivergedError("characterize_stiffness: no steady state within 5000 steps");
        }
        out.eps.push_back(std::abs(mismatch(env)[axis]));
        out.force.push_back(std::abs(interaction_force(env)[axis]));
    }

    LineFit f = fit_line(out.eps, out.force);
    out.k = f.slope;
    out.r2 = f.r2;
    return out;
}

}  // namespace mgap
