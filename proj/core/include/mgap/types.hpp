#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <string>

namespace mgap {

// Planar world: axis 0 = x (lateral), axis 1 = z (vertical).
inline constexpr int kDim = 2;
inline constexpr int kAxisX = 0;
inline constexpr int kAxisZ = 1;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;  // pos + gripper
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Intent command: target pose + gripper aperture, all meters.
struct MasterCommand {
    Vec2 pos = Vec2::Zero();
    double grip = 0.0;

    Vec3 as_vec() const { return Vec3(pos.x(), pos.y(), grip); }
    static MasterCommand from_vec(const Vec3& v) { return {Vec2(v[0], v[1]), v[2]}; }
};

// Measured robot state plus the delayed-command FIFO.
struct RobotState {
    Vec2 pos = Vec2::Zero();
    Vec2 vel = Vec2::Zero();
    double grip_cmd = 0.0;   // last aperture command acting on the gripper
    double grip_meas = 0.0;  // realized aperture
    std::deque<Vec3> cmd_queue;  // length L; front = next command to act

    Vec3 measured() const { return Vec3(pos.x(), pos.y(), grip_meas); }
};

// All physics knobs.
struct EnvParams {
    Vec2 kp = Vec2(200.0, 200.0);       // N/m, per axis
    Vec2 kd = Vec2(20.0, 20.0);         // N*s/m
    double robot_mass = 1.0;            // kg
    int latency_steps = 3;              // L
    double coulomb_f = 0.5;             // N
    double stiction_f = 0.8;            // N
    double stiction_v_eps = 1e-3;       // m/s
    double dt = 1.0 / 60.0;             // s
    double gravity = 9.81;              // m/s^2, z axis
    double contact_stiffness = 2000.0;  // N/m
    double contact_damping = 20.0;      // N*s/m
    double grip_gain = 2000.0;          // N/m
    double grip_stiction_f = 1.2;       // N, static friction floor of the finger pads
    double grip_tau = 0.05;             // s, aperture first-order time constant
    double hold_coeff = 2.0;            // c_h
    double delta_max = 0.10;            // m, per-axis safety clamp
    double v_max = 2.0;                 // m/s saturation
    double grip_max = 0.08;             // m, aperture range
    double sigma_vis = 0.002;           // m, visual feature noise

    void validate() const;  // throws ConfigError naming the violated invariant
    std::uint64_t digest() const;
};

// Per-step environment feedback.
struct StepEvents {
    Vec2 contact_force = Vec2::Zero();  // force on robot from environment
    double grip_force = 0.0;            // N
    bool button_triggered = false;      // latched
    bool object_attached = false;
    bool object_dropped = false;   // grip force fell below the hold threshold
    bool object_released = false;  // aperture command opened past the object
    bool clamp_active = false;     // safety clamp engaged this step
    Vec2 object_pos = Vec2::Zero();
};

}  // namespace mgap
