#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "mgap/sim.hpp"

namespace mgap {

// Knobs of the scripted operator. khat is its belief about the effective
// stiffness; by default beta = 1 (perfect calibration against true Kp).
struct OperatorParams {
    double lead_gain = 0.05;        // s; feedforward ~ L*dt
    double khat_beta = 1.0;         // khat = beta * Kp
    double mass_prior = 0.0;        // kg; privileged object mass, set per episode
    double intervention_prob = 0.3;
    int intervention_lo = 60;  // step window
    int intervention_hi = 240;

    double approach_speed = 0.35;  // m/s free-space hand motion
    double lift_speed = 0.25;
    double descend_speed = 0.15;
    double wipe_speed = 0.12;
    double scan_speed = 0.06;
    double grip_speed = 0.30;

    double button_press_f = 12.0;  // N; > f_trig = 10
    double wipe_f = 17.0;          // mid of [10, 25]
    double slot_preload_f = 4.0;
    double slot_insert_f = 6.0;
    double squeeze_safety = 1.5;  // grip force margin over c_h*m*g

    double stiction_escape_growth = 0.10;  // offset growth per stalled step

    void validate() const;
    std::uint64_t digest() const;
    Vec2 khat(const EnvParams& p) const { return khat_beta * p.kp; }
};

enum class Phase {
    kApproach,
    kPress,
    kSearch,
    kInsert,
    kWipe,
    kLift,
    kRoute,
    kTossWindup,
    kRelease,
    kRetreat,
    kTrack,
    kDescend,
    kClose,
    kLower,
    kDone,
};

const char* to_string(Phase p);

// Goal of the current phase; desired_force < 0 means "no force target".
struct TaskGoal {
    Phase phase = Phase::kApproach;
    Vec2 waypoint = Vec2::Zero();
    double desired_force = -1.0;
    double grip_target = 0.06;
};

// Stateless core of the oracle: compensatory command for one goal.
// Free space: waypoint tracking with latency feedforward. Contact phases:
// virtual penetration desired_force / khat past the measured state.
// Lifting: + mass_prior * g / khat_z. Stall: grow the offset until motion.
MasterCommand oracle_command(const EnvState& env, const TaskGoal& goal, const OperatorParams& op);

// Scripted demonstrator: runs the per-task finite-state graph and emits
// master commands through oracle_command-style primitives.
class OracleController {
  public:
    OracleController(const TaskSpec& task, const OperatorParams& op, std::uint64_t seed);

    MasterCommand command(const EnvState& env);

    Phase phase() const { return phase_; }
    TaskGoal goal(const EnvState& env) const;

  private:
    MasterCommand command_button(const EnvState& env);
    MasterCommand command_wipe(const EnvState& env);
    MasterCommand command_blind_slot(const EnvState& env);
    MasterCommand command_conveyor(const EnvState& env);
    MasterCommand command_toss(const EnvState& env);

    void move_hand(const Vec2& target, double speed);
    MasterCommand emit(double grip);
    bool hand_at(const Vec2& target, double tol = 1e-4) const;
    // Low-passed contact servo; a human cannot re-reference at 60 Hz, and the
    // raw rebased command couples with latency into a contact limit cycle.
    double servo_lp(double& state, double target, double alpha = 0.25);

    OperatorParams op_;
    TaskKind kind_;
    Phase phase_ = Phase::kApproach;
    int phase_steps_ = 0;

    Vec2 hand_;       // the operator's own commanded pose (master side)
    Vec2 hand_vel_ = Vec2::Zero();
    double hand_grip_;

    // task scratch
    double scan_dir_ = -1.0;
    int confirm_count_ = 0;
    double insert_entry_x_ = 0.0;
    double insert_max_x_ = 0.0;
    double frozen_press_x_ = 0.0;
    int backout_stage_ = 0;  // 1: pull the tip out, 2: skip past the recess
    int stall_steps_ = 0;
    double filt_x_ = 0.0;  // servo filter states; NaN = uninitialized
    double filt_z_ = 0.0;
    double comp_level_ = 0.0;  // gravity feedforward ramp state
    int wipe_pass_ = 0;
    Vec2 toss_dir_ = Vec2::Zero();
    bool release_open_ = false;
    double prev_speed_ = 0.0;
    std::mt19937_64 rng_;

    void set_phase(Phase p);
};

// With probability op.intervention_prob (decided by rng), teleports the task
// object/target by a collision-free uniform offset; returns the shift applied.
std::optional<double> apply_intervention(EnvState& env, std::mt19937_64& rng,
                                         const OperatorParams& op);

}  // namespace mgap
