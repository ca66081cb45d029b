#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgap/types.hpp"

namespace mgap {

enum class TaskKind {
    kButton,
    kBlindSlot,
    kWipe,
    kConveyorSort,
    kToss,
    kCalibrationWall,
};

const char* to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

// Concrete world geometry and success parameters for one episode.
// Construct via defaults(kind), then randomized(seed) for per-episode jitter.
struct TaskSpec {
    TaskKind kind = TaskKind::kButton;

    Vec2 start_pos = Vec2(0.0, 0.2);
    double start_grip = 0.06;
    int max_t = 600;
    double geom_jitter = 0.02;  // +/- range applied by randomized()

    // button / calibration wall
    double wall_x = 0.5;
    double press_z = 0.2;
    double f_trig = 10.0;
    int n_trig = 5;
    double button_stiffness_jitter = 0.3;  // +/- fraction on contact stiffness
    double button_stiffness_scale = 1.0;   // set by randomized()
    double floor_z = 0.1;                  // calibration z-axis surface

    // wipe
    double surf_z = 0.1;
    double path_x0 = 0.2;
    double path_x1 = 0.6;
    int n_waypoints = 21;
    double wipe_tol = 0.012;
    double f_lo = 10.0;
    double f_hi = 25.0;
    double strict_frac = 0.9;
    double effective_frac = 0.5;

    // blind slot
    double plate_x = 0.6;
    double plate_z_lo = 0.10;
    double plate_z_hi = 0.50;
    double slot_z = 0.30;           // set by randomized(); occluded from vision
    double slot_half_width = 0.006;
    double insert_depth = 0.04;
    int n_dimples = 3;
    std::vector<double> dimple_z;      // set by randomized()
    std::vector<double> dimple_depth;  // set by randomized()
    double f_jam = 15.0;
    int jam_steps = 60;

    // conveyor sort
    double belt_z = 0.1;
    double belt_speed = 0.15;
    double spawn_x = 0.10;
    double belt_end = 0.75;
    double obj_width = 0.03;
    double obj_height = 0.03;
    double mass_light = 0.05;
    double mass_heavy = 0.35;
    double grasp_tol = 0.02;
    double lift_z = 0.32;
    double zone_x_lo = 0.78;      // light zone [zone_x_lo, zone_divider]
    double zone_divider = 0.98;   // heavy zone [zone_divider, zone_x_hi]
    double zone_x_hi = 1.18;
    double place_z = 0.20;
    bool object_is_heavy = false;        // set by randomized()
    bool expose_mass_in_visual = false;  // diagnostic mode: leak mass into vision

    // toss
    Vec2 pickup = Vec2(0.30, 0.165);
    Vec2 windup = Vec2(0.18, 0.25);
    double toss_mass = 0.05;
    double reach_x = 0.8;   // robot workspace stop; <= 0 disables
    double bin_x0 = 0.82;
    double bin_x1 = 1.02;
    double obj_rest_z = 0.015;

    double object_mass() const;
    bool has_object() const;
    void validate() const;

    // Per-episode geometry draw; deterministic in (defaults, seed).
    TaskSpec randomized(std::uint64_t seed) const;

    static TaskSpec defaults(TaskKind kind);
};

// Width of the visual feature vector for a task (noise-free layout).
int visual_dim(TaskKind kind);
int visual_dim(const TaskSpec& task);

}  // namespace mgap
