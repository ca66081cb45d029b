#include "mgap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "mgap/errors.hpp"
#include "mgap/seeding.hpp"

namespace mgap {

namespace {
constexpr double kCompRampSteps = 6.0;  // gravity feedforward ramp on grasp/release
}

void OperatorParams::validate() const {
    if (intervention_prob < 0.0 || intervention_prob > 1.0)
        throw ConfigError("OperatorParams: intervention_prob must be in [0, 1]");
    if (khat_beta <= 0.0) throw ConfigError("OperatorParams: khat must be > 0");
    if (lead_gain < 0.0) throw ConfigError("OperatorParams: lead_gain must be >= 0");
}

std::uint64_t OperatorParams::digest() const {
    const double vals[] = {lead_gain, khat_beta, mass_prior, intervention_prob,
                           static_cast<double>(intervention_lo),
                           static_cast<double>(intervention_hi), approach_speed, lift_speed,
                           descend_speed, wipe_speed, scan_speed, grip_speed, button_press_f,
                           wipe_f, slot_preload_f, slot_insert_f, squeeze_safety,
                           stiction_escape_growth};
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : vals) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

const char* to_string(Phase p) {
    switch (p) {
        case Phase::kApproach: return "approach";
        case Phase::kPress: return "press";
        case Phase::kSearch: return "search";
        case Phase::kInsert: return "insert";
        case Phase::kWipe: return "wipe";
        case Phase::kLift: return "lift";
        case Phase::kRoute: return "route";
        case Phase::kTossWindup: return "toss_windup";
        case Phase::kRelease: return "release";
        case Phase::kRetreat: return "retreat";
        case Phase::kTrack: return "track";
        case Phase::kDescend: return "descend";
        case Phase::kClose: return "close";
        case Phase::kLower: return "lower";
        case Phase::kDone: return "done";
    }
    return "?";
}

MasterCommand oracle_command(const EnvState& env, const TaskGoal& goal, const OperatorParams& op) {
    Vec2 khat = op.khat(env.params);
    MasterCommand cmd;
    cmd.grip = goal.grip_target;
    switch (goal.phase) {
        case Phase::kApproach:
        case Phase::kTrack:
        case Phase::kRoute:
        case Phase::kRetreat: {
            Vec2 to = goal.waypoint - env.robot.pos;
            double dist = to.norm();
            Vec2 v_des = Vec2::Zero();
            if (dist > 1e-9) v_des = to.normalized() * op.approach_speed;
            if (dist < 1e-6) v_des = Vec2::Zero();
            cmd.pos = goal.waypoint + op.lead_gain * v_des;
            break;
        }
        case Phase::kPress: {
            if (goal.desired_force < 0.0)
                throw ContractError("oracle_command: press phase needs desired_force");
            // virtual penetration along the task's contact normal
            Vec2 normal = env.task.kind == TaskKind::kWipe ? Vec2(0.0, -1.0) : Vec2(1.0, 0.0);
            cmd.pos = env.robot.pos;
            for (int a = 0; a < kDim; ++a)
                if (normal[a] != 0.0) cmd.pos[a] += normal[a] * goal.desired_force / khat[a];
            // off-normal axis stays at the goal waypoint
            for (int a = 0; a < kDim; ++a)
                if (normal[a] == 0.0) cmd.pos[a] = goal.waypoint[a];
            break;
        }
        case Phase::kLift: {
            cmd.pos = goal.waypoint;
            cmd.pos.y() += op.mass_prior * env.params.gravity / khat.y();
            break;
        }
        default:
            throw ContractError(std::string("oracle_command: unhandled phase ") +
                                to_string(goal.phase));
    }
    return cmd;
}

OracleController::OracleController(const TaskSpec& task, const OperatorParams& op,
                                   std::uint64_t seed)
    : op_(op), kind_(task.kind), rng_(sub_seed(seed, "oracle")) {
    hand_ = task.start_pos;
    hand_grip_ = task.start_grip;
    filt_x_ = std::numeric_limits<double>::quiet_NaN();
    filt_z_ = std::numeric_limits<double>::quiet_NaN();
    phase_ = (kind_ == TaskKind::kConveyorSort) ? Phase::kTrack : Phase::kApproach;
}

void OracleController::set_phase(Phase p) {
    phase_ = p;
    phase_steps_ = 0;
    confirm_count_ = 0;
    stall_steps_ = 0;
    filt_x_ = std::numeric_limits<double>::quiet_NaN();
    filt_z_ = std::numeric_limits<double>::quiet_NaN();
}

double OracleController::servo_lp(double& state, double target, double alpha) {
    if (std::isnan(state)) state = target;
    state += alpha * (target - state);
    return state;
}

void OracleController::move_hand(const Vec2& target, double speed) {
    Vec2 to = target - hand_;
    double dist = to.norm();
    double step = speed / 60.0;  // hand motion per tick; env dt is the clock
    if (dist <= step) {
        hand_vel_ = to * 60.0;
        hand_ = target;
    } else {
        Vec2 dir = to / dist;
        hand_ += dir * step;
        hand_vel_ = dir * speed;
    }
}

bool OracleController::hand_at(const Vec2& target, double tol) const {
    return (hand_ - target).norm() <= tol;
}

MasterCommand OracleController::emit(double grip) {
    double gstep = op_.grip_speed / 60.0;
    if (std::abs(grip - hand_grip_) <= gstep)
        hand_grip_ = grip;
    else
        hand_grip_ += gstep * (grip > hand_grip_ ? 1.0 : -1.0);
    MasterCommand cmd;
    cmd.pos = hand_ + op_.lead_gain * hand_vel_;
    cmd.grip = hand_grip_;
    return cmd;
}

MasterCommand OracleController::command(const EnvState& env) {
    phase_steps_++;
    MasterCommand cmd;
    switch (kind_) {
        case TaskKind::kButton: cmd = command_button(env); break;
        case TaskKind::kWipe: cmd = command_wipe(env); break;
        case TaskKind::kBlindSlot: cmd = command_blind_slot(env); break;
        case TaskKind::kConveyorSort: cmd = command_conveyor(env); break;
        case TaskKind::kToss: cmd = command_toss(env); break;
        case TaskKind::kCalibrationWall:
            throw ContractError("oracle: calibration task has no scripted operator");
    }

    // gravity feedforward while holding a payload, ramped to keep commands smooth
    if (env.object.mode == ObjectMode::kHeld) {
        comp_level_ = std::min(1.0, comp_level_ + 1.0 / kCompRampSteps);
    } else {
        comp_level_ = std::max(0.0, comp_level_ - 1.0 / kCompRampSteps);
    }
    cmd.pos.y() += comp_level_ * op_.mass_prior * env.params.gravity / op_.khat(env.params).y();

    // stiction escape: stationary slave with a sub-breakaway offset
    if (phase_ == Phase::kApproach || phase_ == Phase::kRetreat || phase_ == Phase::kRoute ||
        phase_ == Phase::kLower || phase_ == Phase::kTossWindup) {
        Vec2 khat = op_.khat(env.params);
        double break_eps = env.params.stiction_f / khat.minCoeff();
        bool stationary = env.robot.vel.norm() < env.params.stiction_v_eps;
        Vec2 offs = cmd.pos - env.robot.pos;
        bool wants_motion = hand_vel_.norm() > 1e-6 || offs.norm() > 1e-4;
        if (stationary && wants_motion && offs.norm() < break_eps) {
            stall_steps_++;
            double growth = std::pow(1.0 + op_.stiction_escape_growth, stall_steps_);
            cmd.pos = env.robot.pos + offs * growth;
        } else if (!stationary) {
            stall_steps_ = 0;
        }
    }
    return cmd;
}

TaskGoal OracleController::goal(const EnvState& env) const {
    TaskGoal g;
    g.phase = phase_;
    g.waypoint = hand_;
    g.grip_target = hand_grip_;
    if (phase_ == Phase::kPress) {
        g.desired_force = kind_ == TaskKind::kWipe      ? op_.wipe_f
                          : kind_ == TaskKind::kButton  ? op_.button_press_f
                                                        : op_.slot_preload_f;
    }
    (void)env;
    return g;
}

MasterCommand OracleController::command_button(const EnvState& env) {
    const TaskSpec& t = env.task;
    Vec2 khat = op_.khat(env.params);
    switch (phase_) {
        case Phase::kApproach: {
            Vec2 target(t.wall_x - 0.03, t.press_z);
            move_hand(target, op_.approach_speed);
            if (hand_at(target) && (env.robot.pos - target).norm() < 0.02)
                set_phase(Phase::kPress);
            return emit(hand_grip_);
        }
        case Phase::kPress: {
            hand_.x() = servo_lp(filt_x_, env.robot.pos.x() + op_.button_press_f / khat.x());
            hand_.y() = t.press_z;
            hand_vel_ = Vec2::Zero();
            if (env.button_latched) set_phase(Phase::kRetreat);
            return emit(hand_grip_);
        }
        case Phase::kRetreat: {
            Vec2 target(t.wall_x - 0.15, t.press_z);
            move_hand(target, op_.approach_speed);
            if (hand_at(target) && (env.robot.pos - target).norm() < 0.02) set_phase(Phase::kDone);
            return emit(hand_grip_);
        }
        default:
            move_hand(hand_, 0.0);
            return emit(hand_grip_);
    }
}

MasterCommand OracleController::command_wipe(const EnvState& env) {
    const TaskSpec& t = env.task;
    Vec2 khat = op_.khat(env.params);
    switch (phase_) {
        case Phase::kApproach: {
            Vec2 target(t.path_x0, t.surf_z + 0.08);
            move_hand(target, op_.approach_speed);
            if (hand_at(target) && (env.robot.pos - target).norm() < 0.02) {
                set_phase(Phase::kPress);
                wipe_pass_ = 0;
            }
            return emit(hand_grip_);
        }
        case Phase::kPress: {
            hand_.y() = servo_lp(filt_z_, env.robot.pos.y() - op_.wipe_f / khat.y());
            hand_.x() = t.path_x0;
            hand_vel_ = Vec2::Zero();
            double eps_z = mismatch(env)[1];
            if (-eps_z >= 0.8 * t.f_lo / khat.y()) set_phase(Phase::kWipe);
            return emit(hand_grip_);
        }
        case Phase::kWipe: {
            double target_x = (wipe_pass_ % 2 == 0) ? t.path_x1 : t.path_x0;
            hand_.y() = servo_lp(filt_z_, env.robot.pos.y() - op_.wipe_f / khat.y());
            double step = op_.wipe_speed / 60.0;
            double dx = target_x - hand_.x();
            if (std::abs(dx) <= step) {
                hand_.x() = target_x;
                hand_vel_ = Vec2::Zero();
                if (env.wipe_coverage() >= 1.0 || wipe_pass_ >= 3)
                    set_phase(Phase::kRetreat);
                else
                    wipe_pass_++;
            } else {
                hand_.x() += step * (dx > 0 ? 1.0 : -1.0);
                hand_vel_ = Vec2(op_.wipe_speed * (dx > 0 ? 1.0 : -1.0), 0.0);
            }
            return emit(hand_grip_);
        }
        case Phase::kRetreat: {
            Vec2 target(hand_.x(), t.surf_z + 0.10);
            move_hand(target, op_.approach_speed);
            if (hand_at(target)) set_phase(Phase::kDone);
            return emit(hand_grip_);
        }
        default:
            move_hand(hand_, 0.0);
            return emit(hand_grip_);
    }
}

MasterCommand OracleController::command_blind_slot(const EnvState& env) {
    const TaskSpec& t = env.task;
    Vec2 khat = op_.khat(env.params);
    double preload_off = op_.slot_preload_f / khat.x();
    switch (phase_) {
        case Phase::kApproach: {
            Vec2 target(t.plate_x - 0.035, t.plate_z_hi - 0.03);
            move_hand(target, op_.approach_speed);
            if (hand_at(target) && (env.robot.pos - target).norm() < 0.02) {
                set_phase(Phase::kPress);
                scan_dir_ = -1.0;
            }
            return emit(hand_grip_);
        }
        case Phase::kPress: {
            hand_.x() = servo_lp(filt_x_, env.robot.pos.x() + preload_off);
            hand_vel_ = Vec2::Zero();
            // engage, then wait for the transient to die before trusting eps
            if (mismatch(env)[0] >= 0.8 * preload_off && env.robot.vel.norm() < 0.01) {
                if (++confirm_count_ >= 5) {
                    frozen_press_x_ = env.robot.pos.x() + preload_off;
                    set_phase(Phase::kSearch);
                }
            } else {
                confirm_count_ = 0;
            }
            return emit(hand_grip_);
        }
        case Phase::kSearch: {
            // recovery from a decoy recess: pull out, hop past it, re-engage
            if (backout_stage_ == 1) {
                hand_.x() = t.plate_x - 0.012;
                hand_.y() = env.robot.pos.y();
                hand_vel_ = Vec2::Zero();
                if (env.robot.pos.x() < t.plate_x - 0.002) {
                    backout_stage_ = 2;
                    hand_.y() += scan_dir_ * (2.2 * t.slot_half_width + 0.006);
                }
                return emit(hand_grip_);
            }
            if (backout_stage_ == 2) {
                hand_.x() = t.plate_x - 0.012;
                hand_vel_ = Vec2::Zero();
                if (std::abs(env.robot.pos.y() - hand_.y()) < 0.004) {
                    backout_stage_ = 0;
                    set_phase(Phase::kPress);
                }
                return emit(hand_grip_);
            }
            // frozen press base; a compliance event collapses the mismatch
            hand_.x() = frozen_press_x_;
            double zstep = op_.scan_speed / 60.0;
            hand_.y() += scan_dir_ * zstep;
            hand_vel_ = Vec2(0.0, scan_dir_ * op_.scan_speed);
            if (hand_.y() < t.plate_z_lo + 0.02) scan_dir_ = 1.0;
            if (hand_.y() > t.plate_z_hi - 0.02) scan_dir_ = -1.0;
            // keep the press engaged as the face drifts (friction, noise)
            if (mismatch(env)[0] > 1.5 * preload_off)
                frozen_press_x_ = env.robot.pos.x() + preload_off;
            if (phase_steps_ > 10 && mismatch(env)[0] <= 0.5 * preload_off) {
                if (++confirm_count_ >= 2) {
                    insert_entry_x_ = env.robot.pos.x();
                    insert_max_x_ = env.robot.pos.x();
                    hand_vel_ = Vec2::Zero();
                    set_phase(Phase::kInsert);
                }
            } else {
                confirm_count_ = 0;
            }
            // tip captured by a shallow recess: the hand drags away in z
            // while the tip stays put behind the face plane
            if (env.robot.pos.x() > t.plate_x + 0.004 &&
                std::abs(hand_.y() - env.robot.pos.y()) > 0.012) {
                backout_stage_ = 1;
            }
            return emit(hand_grip_);
        }
        case Phase::kInsert: {
            // ratcheted push: the command only deepens, so contact chatter
            // cannot feed back into it
            insert_max_x_ = std::max(insert_max_x_, env.robot.pos.x());
            hand_.x() = std::max(hand_.x(), insert_max_x_ + op_.slot_insert_f / khat.x());
            hand_vel_ = Vec2::Zero();
            if (env.inserted) {
                set_phase(Phase::kDone);
                return emit(hand_grip_);
            }
            // blocked with no progress: that was a decoy recess, resume the scan
            if (phase_steps_ > 15 && insert_max_x_ - insert_entry_x_ < 0.02 &&
                env.robot.pos.x() < t.plate_x + t.insert_depth - 0.01) {
                backout_stage_ = 1;
                set_phase(Phase::kSearch);
            }
            return emit(hand_grip_);
        }
        default:
            move_hand(hand_, 0.0);
            return emit(hand_grip_);
    }
}

MasterCommand OracleController::command_conveyor(const EnvState& env) {
    const TaskSpec& t = env.task;
    const EnvParams& p = env.params;
    Vec2 khat = op_.khat(p);
    const ObjectState& o = env.object;
    double v = t.belt_speed;
    // steady-state tracking lead so the slave rides exactly over the object:
    // latency lag + damping/friction drag, minus the lead emit() already adds
    double track_lead = p.latency_steps * p.dt * v + (p.kd.x() * v + p.coulomb_f) / khat.x() -
                        op_.lead_gain * v;
    double hover_z = o.pos.y() + 0.07;
    double grasp_margin =
        std::max(0.0008, op_.squeeze_safety * p.hold_coeff * op_.mass_prior * p.gravity / p.grip_gain);

    switch (phase_) {
        case Phase::kTrack: {
            Vec2 target(o.pos.x() + track_lead, hover_z);
            move_hand(target, op_.approach_speed + v);
            if (std::abs(env.robot.pos.x() - o.pos.x()) < 0.006 &&
                std::abs(env.robot.pos.y() - hover_z) < 0.02)
                set_phase(Phase::kDescend);
            return emit(t.start_grip);
        }
        case Phase::kDescend: {
            Vec2 target(o.pos.x() + track_lead, o.pos.y());
            move_hand(target, op_.descend_speed + v);
            if (std::abs(env.robot.pos.y() - o.pos.y()) < 0.006 &&
                std::abs(env.robot.pos.x() - o.pos.x()) < 0.008)
                set_phase(Phase::kClose);
            if (std::abs(env.robot.pos.x() - o.pos.x()) > 0.05) set_phase(Phase::kTrack);
            return emit(t.start_grip);
        }
        case Phase::kClose: {
            Vec2 target(o.pos.x() + track_lead, o.pos.y());
            move_hand(target, op_.descend_speed + v);
            if (o.mode == ObjectMode::kHeld) set_phase(Phase::kLift);
            if (std::abs(env.robot.pos.x() - o.pos.x()) > t.grasp_tol) set_phase(Phase::kTrack);
            return emit(o.width - grasp_margin);
        }
        case Phase::kLift: {
            Vec2 target(hand_.x(), t.lift_z);
            move_hand(target, op_.lift_speed);
            if (env.robot.pos.y() >= t.lift_z - 0.01) set_phase(Phase::kRoute);
            if (o.mode != ObjectMode::kHeld) set_phase(Phase::kTrack);
            return emit(o.width - grasp_margin);
        }
        case Phase::kRoute: {
            bool heavy = op_.mass_prior >= 0.5 * (t.mass_light + t.mass_heavy);
            double zone_cx = heavy ? 0.5 * (t.zone_divider + t.zone_x_hi)
                                   : 0.5 * (t.zone_x_lo + t.zone_divider);
            Vec2 target(zone_cx, t.lift_z);
            move_hand(target, op_.approach_speed);
            if (std::abs(env.robot.pos.x() - zone_cx) <= 0.01) set_phase(Phase::kLower);
            return emit(o.width - grasp_margin);
        }
        case Phase::kLower: {
            Vec2 target(hand_.x(), t.place_z);
            move_hand(target, op_.descend_speed);
            if (std::abs(env.robot.pos.y() - t.place_z) <= 0.01) set_phase(Phase::kRelease);
            return emit(o.width - grasp_margin);
        }
        case Phase::kRelease: {
            move_hand(hand_, 0.0);
            if (o.mode != ObjectMode::kHeld && phase_steps_ > 10) set_phase(Phase::kRetreat);
            return emit(o.width + 0.03);
        }
        case Phase::kRetreat: {
            Vec2 target(hand_.x(), t.lift_z);
            move_hand(target, op_.approach_speed);
            if (hand_at(target)) set_phase(Phase::kDone);
            return emit(t.start_grip);
        }
        default:
            move_hand(hand_, 0.0);
            return emit(hand_grip_);
    }
}

MasterCommand OracleController::command_toss(const EnvState& env) {
    const TaskSpec& t = env.task;
    const EnvParams& p = env.params;
    const ObjectState& o = env.object;
    double grasp_margin =
        std::max(0.0008, op_.squeeze_safety * p.hold_coeff * op_.mass_prior * p.gravity / p.grip_gain);
    switch (phase_) {
        case Phase::kApproach: {
            Vec2 target(o.pos.x(), o.pos.y() + 0.07);
            move_hand(target, op_.approach_speed);
            if (hand_at(target, 1e-3) && (env.robot.pos - target).norm() < 0.02)
                set_phase(Phase::kDescend);
            return emit(t.start_grip);
        }
        case Phase::kDescend: {
            Vec2 target = o.pos;
            move_hand(target, op_.descend_speed);
            if ((env.robot.pos - o.pos).norm() < 0.006) set_phase(Phase::kClose);
            return emit(t.start_grip);
        }
        case Phase::kClose: {
            move_hand(o.pos, op_.descend_speed);
            if (o.mode == ObjectMode::kHeld) set_phase(Phase::kTossWindup);
            return emit(o.width - grasp_margin);
        }
        case Phase::kTossWindup: {
            move_hand(t.windup, op_.approach_speed);
            if (hand_at(t.windup) && (env.robot.pos - t.windup).norm() < 0.015 &&
                env.robot.vel.norm() < 0.03) {
                toss_dir_ = Vec2(std::cos(35.0 * M_PI / 180.0), std::sin(35.0 * M_PI / 180.0));
                set_phase(Phase::kRelease);
            }
            return emit(o.width - grasp_margin);
        }
        case Phase::kRelease: {
            // push along the throw direction; open so the gripper actually
            // lets go (latency + threshold) right when the launch speed from
            // the predicted release state is met
            auto vneed_at = [&](const Vec2& pos) {
                double bin_c = 0.5 * (t.bin_x0 + t.bin_x1);
                double dx = bin_c - pos.x();
                double dz = pos.y() - t.obj_rest_z;
                if (dx <= 0.0) return 0.0;
                double cx = toss_dir_.x(), cz = toss_dir_.y();
                double denom = dz + (cz / cx) * dx;
                if (denom <= 0.0) return 1e9;
                double tf = std::sqrt(2.0 * denom / p.gravity);
                return dx / (cx * tf);
            };
            double speed = env.robot.vel.dot(toss_dir_);
            double accel = std::max(0.0, (speed - prev_speed_) / p.dt);
            prev_speed_ = speed;
            if (!release_open_) {
                double horizon = (p.latency_steps + 1) * p.dt;
                Vec2 pos_pred = env.robot.pos + env.robot.vel * horizon;
                double v_pred = speed + accel * horizon;
                bool failsafe = env.robot.pos.x() > t.reach_x - 0.03;
                if (v_pred >= vneed_at(pos_pred) || failsafe) release_open_ = true;
            }
            if (o.mode != ObjectMode::kHeld) {
                hand_ = env.robot.pos;
                hand_vel_ = Vec2::Zero();
                set_phase(Phase::kRetreat);
                return emit(t.start_grip);
            }
            // keep pushing while the opening command propagates
            hand_ = env.robot.pos + 0.095 * toss_dir_;
            hand_vel_ = env.robot.vel;
            if (release_open_) {
                hand_grip_ = o.width + 0.03;  // human lets go fast; no ramp
                return emit(o.width + 0.03);
            }
            return emit(o.width - grasp_margin);
        }
        case Phase::kRetreat: {
            Vec2 target(t.windup.x() + 0.1, t.windup.y() + 0.05);
            move_hand(target, op_.approach_speed);
            if (hand_at(target)) set_phase(Phase::kDone);
            return emit(t.start_grip);
        }
        default:
            move_hand(hand_, 0.0);
            return emit(hand_grip_);
    }
}

std::optional<double> apply_intervention(EnvState& env, std::mt19937_64& rng,
                                         const OperatorParams& op) {
    std::bernoulli_distribution fire(op.intervention_prob);
    if (!fire(rng)) return std::nullopt;
    TaskSpec& t = env.task;
    std::uniform_real_distribution<double> shift(-0.05, 0.05);
    for (int attempt = 0; attempt < 20; ++attempt) {
        double d = shift(rng);
        switch (t.kind) {
            case TaskKind::kConveyorSort: {
                if (env.object.mode != ObjectMode::kOnBelt) return std::nullopt;
                double nx = env.object.pos.x() + d;
                if (nx < 0.02 || nx > t.belt_end - 0.25) continue;
                env.object.pos.x() = nx;
                return d;
            }
            case TaskKind::kButton: {
                double nx = t.wall_x + 0.6 * d;
                if (env.robot.pos.x() > nx - 0.01) continue;
                t.wall_x = nx;
                return 0.6 * d;
            }
            case TaskKind::kWipe: {
                t.path_x0 += d;
                t.path_x1 += d;
                std::fill(env.wiped_in_band.begin(), env.wiped_in_band.end(), false);
                return d;
            }
            case TaskKind::kBlindSlot: {
                if (env.robot.pos.x() > t.plate_x - 0.002) return std::nullopt;
                double center = 0.5 * (t.plate_z_lo + t.plate_z_hi);
                double nz = center + 1.6 * d;
                bool ok = true;
                for (double dzk : t.dimple_z)
                    if (std::abs(nz - dzk) < 0.03) ok = false;
                if (!ok || nz - t.slot_half_width < t.plate_z_lo ||
                    nz + t.slot_half_width > t.plate_z_hi)
                    continue;
                t.slot_z = nz;
                return nz;
            }
            case TaskKind::kToss: {
                double n0 = t.bin_x0 + 0.6 * d;
                if (n0 < t.reach_x + 0.02) continue;
                t.bin_x0 = n0;
                t.bin_x1 += 0.6 * d;
                return 0.6 * d;
            }
            case TaskKind::kCalibrationWall:
                return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace mgap
