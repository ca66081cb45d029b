#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mgap/task.hpp"
#include "mgap/types.hpp"

namespace mgap {

// Lifecycle of the (single) task object.
enum class ObjectMode { kNone, kOnBelt, kResting, kHeld, kFlying, kLanded };

struct ObjectState {
    ObjectMode mode = ObjectMode::kNone;
    Vec2 pos = Vec2::Zero();
    Vec2 vel = Vec2::Zero();
    double mass = 0.0;
    double width = 0.0;
    double landed_x = 0.0;
    bool was_attached = false;  // grasp happened at least once
};

struct EnvState {
    EnvParams params;
    TaskSpec task;
    RobotState robot;
    ObjectState object;

    long step_count = 0;
    Vec3 last_clamped_cmd = Vec3::Zero();  // newest command, post safety clamp
    Vec3 last_delayed_cmd = Vec3::Zero();  // command acting on the controller
    StepEvents last_events;

    // button
    int trig_counter = 0;
    bool button_latched = false;

    // wipe bookkeeping, one flag per waypoint
    std::vector<bool> wiped_in_band;

    // blind slot
    bool inserted = false;
    int jam_counter = 0;
    bool jammed = false;

    std::mt19937_64 rng;  // visual noise stream

    double payload_mass() const {
        return object.mode == ObjectMode::kHeld ? object.mass : 0.0;
    }
    double wipe_coverage() const;
    std::vector<double> wipe_waypoints() const;
    bool task_done() const;  // terminal success/failure latched
};

EnvState init_env(const EnvParams& params, const TaskSpec& task, std::uint64_t seed);

// One control tick. Implements, in order: safety clamp, latency queue,
// PD + contact + payload gravity, Karnopp stiction, semi-implicit Euler,
// gripper tracking and grasp logic, object kinematics, task events.
StepEvents step(EnvState& env, const MasterCommand& cmd);

// Ground-truth external wrench on the robot: contact + held-payload gravity.
// Analysis/oracle only; never visible to policies.
Vec2 interaction_force(const EnvState& env);

// epsilon_t = last clamped master command minus measured state, gripper included.
Vec3 mismatch(const EnvState& env);

// Task-specific low-dimensional stand-in for cameras. Carries geometry with
// additive Gaussian noise; never mass, forces, or mismatch.
VecX visual_features(EnvState& env);
VecX visual_features(const EnvState& env, std::mt19937_64& noise_rng);

}  // namespace mgap
