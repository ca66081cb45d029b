#include "mgap/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "mgap/errors.hpp"
#include "mgap/seeding.hpp"

namespace mgap {

namespace {

constexpr double kTouchEps = 0.002;    // finger pads engage within this of the object
constexpr double kReleaseEps = 0.004;  // commanded opening that lets go

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// One-sided penalty contact, repulsive only.
// pen > 0 means penetration, v_pen = d(pen)/dt.
double contact_mag(const EnvParams& p, double pen, double v_pen, double stiffness_scale = 1.0) {
    if (pen <= 0.0) return 0.0;
    double f = p.contact_stiffness * stiffness_scale * pen + p.contact_damping * v_pen;
    return std::max(0.0, f);
}

// For blind-slot: x position of the face the tip sees at height z.
// Returns the face plane and whether z lies inside a pass-through window.
struct FaceInfo {
    double face_x;
    bool in_window;      // slot or dimple opening
    bool is_slot;        // through-hole, not a decoy
    double window_z;     // center of the containing window
};

FaceInfo slot_face(const TaskSpec& t, double z) {
    FaceInfo fi{t.plate_x, false, false, 0.0};
    if (std::abs(z - t.slot_z) <= t.slot_half_width) {
        fi.face_x = std::numeric_limits<double>::infinity();
        fi.in_window = true;
        fi.is_slot = true;
        fi.window_z = t.slot_z;
        return fi;
    }
    for (std::size_t i = 0; i < t.dimple_z.size(); ++i) {
        if (std::abs(z - t.dimple_z[i]) <= t.slot_half_width) {
            fi.face_x = t.plate_x + t.dimple_depth[i];
            fi.in_window = true;
            fi.window_z = t.dimple_z[i];
            return fi;
        }
    }
    return fi;
}

// Contact force on the robot at (pos, vel); pure function of state.
Vec2 robot_contact(const EnvState& env, const Vec2& pos, const Vec2& vel) {
    const EnvParams& p = env.params;
    const TaskSpec& t = env.task;
    Vec2 f = Vec2::Zero();

    switch (t.kind) {
        case TaskKind::kButton: {
            double pen = pos.x() - t.wall_x;
            f.x() -= contact_mag(p, pen, vel.x(), t.button_stiffness_scale);
            break;
        }
        case TaskKind::kCalibrationWall: {
            f.x() -= contact_mag(p, pos.x() - t.wall_x, vel.x());
            f.y() += contact_mag(p, t.floor_z - pos.y(), -vel.y());
            break;
        }
        case TaskKind::kWipe: {
            f.y() += contact_mag(p, t.surf_z - pos.y(), -vel.y());
            break;
        }
        case TaskKind::kBlindSlot: {
            FaceInfo fi = slot_face(t, pos.y());
            if (std::isfinite(fi.face_x)) {
                f.x() -= contact_mag(p, pos.x() - fi.face_x, vel.x());
            }
            if (pos.x() > t.plate_x) {
                if (fi.in_window) {
                    double lo = fi.window_z - t.slot_half_width;
                    double hi = fi.window_z + t.slot_half_width;
                    f.y() += contact_mag(p, lo - pos.y(), -vel.y());
                    f.y() -= contact_mag(p, pos.y() - hi, vel.y());
                } else {
                    // inside the plate body (should not happen): push back out
                    f.x() -= contact_mag(p, pos.x() - t.plate_x, vel.x());
                }
            }
            break;
        }
        case TaskKind::kConveyorSort: {
            f.y() += contact_mag(p, t.belt_z - pos.y(), -vel.y());
            break;
        }
        case TaskKind::kToss:
            break;
    }
    // ground plane
    f.y() += contact_mag(p, 0.0 - pos.y(), -vel.y());
    return f;
}

void spawn_object(EnvState& env) {
    const TaskSpec& t = env.task;
    ObjectState& o = env.object;
    switch (t.kind) {
        case TaskKind::kConveyorSort:
            o.mode = ObjectMode::kOnBelt;
            o.pos = Vec2(t.spawn_x, t.belt_z + 0.5 * t.obj_height);
            o.mass = t.object_mass();
            o.width = t.obj_width;
            break;
        case TaskKind::kToss:
            o.mode = ObjectMode::kResting;
            o.pos = t.pickup;
            o.mass = t.toss_mass;
            o.width = t.obj_width;
            break;
        default:
            o.mode = ObjectMode::kNone;
            break;
    }
}

}  // namespace

void EnvParams::validate() const {
    if (!(kp.x() > 0.0 && kp.y() > 0.0)) throw ConfigError("EnvParams: Kp must be > 0");
    if (!(contact_stiffness > 0.0)) throw ConfigError("EnvParams: contact stiffness must be > 0");
    if (!(dt > 0.0)) throw ConfigError("EnvParams: dt must be > 0");
    if (latency_steps < 0) throw ConfigError("EnvParams: latency_steps must be >= 0");
    if (coulomb_f < 0.0) throw ConfigError("EnvParams: coulomb_f must be >= 0");
    if (stiction_f < coulomb_f) throw ConfigError("EnvParams: stiction_f must be >= coulomb_f");
    if (robot_mass <= 0.0) throw ConfigError("EnvParams: robot_mass must be > 0");
    if (delta_max <= 0.0) throw ConfigError("EnvParams: delta_max must be > 0");
    if (grip_tau <= 0.0) throw ConfigError("EnvParams: grip_tau must be > 0");
    if (kd.x() < 0.0 || kd.y() < 0.0) throw ConfigError("EnvParams: Kd must be >= 0");
}

std::uint64_t EnvParams::digest() const {
    // order-sensitive hash of every physical knob
    const double vals[] = {kp.x(), kp.y(), kd.x(), kd.y(), robot_mass,
                           static_cast<double>(latency_steps), coulomb_f, stiction_f,
                           stiction_v_eps, dt, gravity, contact_stiffness, contact_damping,
                           grip_gain, grip_stiction_f, grip_tau, hold_coeff, delta_max,
                           v_max, grip_max, sigma_vis};
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : vals) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

double EnvState::wipe_coverage() const {
    if (wiped_in_band.empty()) return 0.0;
    int n = 0;
    for (bool b : wiped_in_band) n += b ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(wiped_in_band.size());
}

std::vector<double> EnvState::wipe_waypoints() const {
    std::vector<double> w(task.n_waypoints);
    for (int i = 0; i < task.n_waypoints; ++i)
        w[i] = task.path_x0 + (task.path_x1 - task.path_x0) * i / (task.n_waypoints - 1);
    return w;
}

bool EnvState::task_done() const {
    switch (task.kind) {
        case TaskKind::kButton:
            return button_latched && robot.pos.x() < task.wall_x - 0.08;
        case TaskKind::kWipe:
            return wipe_coverage() >= 1.0 && robot.pos.y() > task.surf_z + 0.05;
        case TaskKind::kBlindSlot:
            return inserted || jammed;
        case TaskKind::kConveyorSort:
        case TaskKind::kToss:
            return object.mode == ObjectMode::kLanded;
        case TaskKind::kCalibrationWall:
            return false;
    }
    return false;
}

EnvState init_env(const EnvParams& params, const TaskSpec& task, std::uint64_t seed) {
    params.validate();
    task.validate();
    EnvState env;
    env.params = params;
    env.task = task;
    env.robot.pos = task.start_pos;
    env.robot.vel = Vec2::Zero();
    env.robot.grip_cmd = task.start_grip;
    env.robot.grip_meas = task.start_grip;
    Vec3 start(task.start_pos.x(), task.start_pos.y(), task.start_grip);
    env.robot.cmd_queue.assign(static_cast<std::size_t>(params.latency_steps), start);
    env.last_clamped_cmd = start;
    env.last_delayed_cmd = start;
    env.rng.seed(sub_seed(seed, "env_noise"));
    if (task.kind == TaskKind::kWipe)
        env.wiped_in_band.assign(static_cast<std::size_t>(task.n_waypoints), false);
    spawn_object(env);
    return env;
}

StepEvents step(EnvState& env, const MasterCommand& cmd) {
    const EnvParams& p = env.params;
    const TaskSpec& t = env.task;
    RobotState& r = env.robot;
    ObjectState& o = env.object;
    StepEvents ev;

    if (!cmd.pos.allFinite() || !std::isfinite(cmd.grip))
        throw ContractError("step: non-finite master command");

    // (1) safety clamp
    Vec3 clamped;
    bool clamp_hit = false;
    for (int a = 0; a < kDim; ++a) {
        double lo = r.pos[a] - p.delta_max, hi = r.pos[a] + p.delta_max;
        clamped[a] = std::clamp(cmd.pos[a], lo, hi);
        if (clamped[a] != cmd.pos[a]) clamp_hit = true;
    }
    clamped[2] = std::clamp(cmd.grip, 0.0, p.grip_max);
    env.last_clamped_cmd = clamped;
    ev.clamp_active = clamp_hit;

    // (2) latency queue
    Vec3 delayed;
    if (p.latency_steps == 0) {
        delayed = clamped;
    } else {
        r.cmd_queue.push_back(clamped);
        delayed = r.cmd_queue.front();
        r.cmd_queue.pop_front();
    }
    env.last_delayed_cmd = delayed;

    // (3) per-axis net force
    double prev_x = r.pos.x();
    Vec2 f_contact = robot_contact(env, r.pos, r.vel);
    double payload = env.payload_mass();
    Vec2 force;
    for (int a = 0; a < kDim; ++a)
        force[a] = p.kp[a] * (delayed[a] - r.pos[a]) - p.kd[a] * r.vel[a] + f_contact[a];
    force[kAxisZ] -= payload * p.gravity;

    // (4) Karnopp stiction + semi-implicit Euler
    for (int a = 0; a < kDim; ++a) {
        double mass = p.robot_mass + (a == kAxisZ ? payload : 0.0);
        double v = r.vel[a];
        if (std::abs(v) < p.stiction_v_eps) {
            if (std::abs(force[a]) <= p.stiction_f) {
                r.vel[a] = 0.0;
                continue;
            }
            force[a] -= p.coulomb_f * sgn(force[a]);
            r.vel[a] += p.dt * force[a] / mass;
        } else {
            double v_nofric = v + p.dt * force[a] / mass;
            double v_new = v_nofric - p.dt * p.coulomb_f * sgn(v) / mass;
            // friction can stop motion within a step but never reverse it
            if (v_new * v < 0.0 && v_nofric * v >= 0.0) v_new = 0.0;
            r.vel[a] = v_new;
        }
        r.vel[a] = std::clamp(r.vel[a], -p.v_max, p.v_max);
    }
    r.pos += p.dt * r.vel;

    // workspace reach stop (toss)
    if (t.kind == TaskKind::kToss && t.reach_x > 0.0 && r.pos.x() > t.reach_x) {
        r.pos.x() = t.reach_x;
        if (r.vel.x() > 0.0) r.vel.x() = 0.0;
    }

    if (!r.pos.allFinite() || !r.vel.allFinite())
        throw SimDivergedError("simulation diverged: non-finite state (unstable gains/dt?)");

    // (6) gripper first-order tracking
    double g_cmd = delayed[2];
    r.grip_cmd = g_cmd;
    r.grip_meas += (p.dt / p.grip_tau) * (g_cmd - r.grip_meas);
    r.grip_meas = std::clamp(r.grip_meas, 0.0, p.grip_max);

    bool near_object = o.mode != ObjectMode::kNone && o.mode != ObjectMode::kFlying &&
                       o.mode != ObjectMode::kLanded &&
                       (r.pos - o.pos).norm() <= t.grasp_tol;
    bool holding = o.mode == ObjectMode::kHeld;
    if (near_object || holding) {
        // fingers cannot penetrate the object
        if (r.grip_meas < o.width) r.grip_meas = o.width;
        if (g_cmd <= o.width + kTouchEps)
            ev.grip_force = p.grip_gain * std::max(0.0, o.width - g_cmd);
    }

    // (7) grasp / drop
    if (o.mode != ObjectMode::kNone) {
        double hold_needed = p.hold_coeff * o.mass * p.gravity;
        bool engaged = g_cmd <= o.width + kTouchEps && r.grip_meas <= o.width + kTouchEps;
        if (!holding && near_object && engaged &&
            ev.grip_force + p.grip_stiction_f >= hold_needed) {
            o.mode = ObjectMode::kHeld;
            o.was_attached = true;
            o.pos = r.pos;
            o.vel = r.vel;
            holding = true;
        } else if (holding) {
            if (g_cmd > o.width + kReleaseEps) {
                o.mode = ObjectMode::kFlying;
                o.vel = r.vel;
                ev.object_released = true;
                holding = false;
            } else if (ev.grip_force + p.grip_stiction_f < hold_needed) {
                o.mode = ObjectMode::kFlying;
                o.vel = r.vel;
                ev.object_dropped = true;
                holding = false;
            }
        }
    }

    // (8) object kinematics and task events
    switch (o.mode) {
        case ObjectMode::kOnBelt:
            o.pos.x() += t.belt_speed * p.dt;
            o.vel = Vec2(t.belt_speed, 0.0);
            if (o.pos.x() > t.belt_end) o.mode = ObjectMode::kFlying;  // slides off the end
            break;
        case ObjectMode::kHeld:
            o.pos = r.pos;
            o.vel = r.vel;
            break;
        case ObjectMode::kFlying: {
            o.vel.y() -= p.gravity * p.dt;
            o.pos += o.vel * p.dt;
            double belt_top = t.belt_z + 0.5 * t.obj_height;
            if (t.kind == TaskKind::kConveyorSort && o.pos.x() <= t.belt_end &&
                o.pos.y() <= belt_top && o.vel.y() <= 0.0) {
                o.pos.y() = belt_top;
                o.mode = ObjectMode::kOnBelt;
            } else if (o.pos.y() <= t.obj_rest_z) {
                o.pos.y() = t.obj_rest_z;
                o.vel = Vec2::Zero();
                o.mode = ObjectMode::kLanded;
                o.landed_x = o.pos.x();
            }
            break;
        }
        default:
            break;
    }

    // button trigger counter
    if (t.kind == TaskKind::kButton) {
        Vec2 fc = robot_contact(env, r.pos, r.vel);
        if (std::abs(fc.x()) >= t.f_trig)
            env.trig_counter++;
        else
            env.trig_counter = 0;
        if (env.trig_counter >= t.n_trig) env.button_latched = true;
    }

    // wipe coverage
    if (t.kind == TaskKind::kWipe) {
        Vec2 fc = robot_contact(env, r.pos, r.vel);
        double fn = fc.y();
        if (fn > 0.0) {
            auto wps = env.wipe_waypoints();
            for (std::size_t i = 0; i < wps.size(); ++i) {
                if (std::abs(r.pos.x() - wps[i]) <= t.wipe_tol && fn >= t.f_lo && fn <= t.f_hi)
                    env.wiped_in_band[i] = true;
            }
        }
    }

    // blind slot: insertion success and jamming
    if (t.kind == TaskKind::kBlindSlot) {
        if (r.pos.x() >= t.plate_x + t.insert_depth) env.inserted = true;
        Vec2 fc = robot_contact(env, r.pos, r.vel);
        bool lateral_load = r.pos.x() > t.plate_x && std::abs(fc.y()) > t.f_jam;
        bool no_progress = r.pos.x() - prev_x < 5e-4;
        if (lateral_load && no_progress)
            env.jam_counter++;
        else
            env.jam_counter = 0;
        if (env.jam_counter >= t.jam_steps) env.jammed = true;
    }

    ev.contact_force = robot_contact(env, r.pos, r.vel);
    ev.button_triggered = env.button_latched;
    ev.object_attached = o.mode == ObjectMode::kHeld;
    ev.object_pos = o.pos;
    env.last_events = ev;
    env.step_count++;
    return ev;
}

Vec2 interaction_force(const EnvState& env) {
    Vec2 f = robot_contact(env, env.robot.pos, env.robot.vel);
    f.y() -= env.payload_mass() * env.params.gravity;
    return f;
}

Vec3 mismatch(const EnvState& env) {
    Vec3 eps;
    eps.head<2>() = env.last_clamped_cmd.head<2>() - env.robot.pos;
    eps[2] = env.last_clamped_cmd[2] - env.robot.grip_meas;
    return eps;
}

VecX visual_features(EnvState& env) { return visual_features(env, env.rng); }

VecX visual_features(const EnvState& env, std::mt19937_64& noise_rng) {
    const TaskSpec& t = env.task;
    std::normal_distribution<double> noise(0.0, env.params.sigma_vis);
    auto n = [&] { return env.params.sigma_vis > 0.0 ? noise(noise_rng) : 0.0; };
    VecX v(visual_dim(t));
    switch (t.kind) {
        case TaskKind::kButton:
            v << t.wall_x + n(), t.press_z + n(), env.button_latched ? 1.0 : 0.0;
            break;
        case TaskKind::kCalibrationWall:
            v << t.wall_x + n(), t.floor_z + n();
            break;
        case TaskKind::kWipe: {
            auto wps = env.wipe_waypoints();
            double next_dirty = t.path_x1;
            for (std::size_t i = 0; i < wps.size(); ++i) {
                if (!env.wiped_in_band[i]) {
                    next_dirty = wps[i];
                    break;
                }
            }
            v << t.surf_z + n(), t.path_x0 + n(), t.path_x1 + n(), next_dirty + n(),
                env.wipe_coverage();
            break;
        }
        case TaskKind::kBlindSlot:
            v << t.plate_x + n(), 0.5 * (t.plate_z_lo + t.plate_z_hi) + n();
            break;
        case TaskKind::kConveyorSort:
            v[0] = env.object.pos.x() + n();
            v[1] = env.object.pos.y() + n();
            v[2] = 0.5 * (t.zone_x_lo + t.zone_divider) + n();
            v[3] = 0.5 * (t.zone_divider + t.zone_x_hi) + n();
            v[4] = env.object.mode == ObjectMode::kHeld ? 1.0 : 0.0;
            if (t.expose_mass_in_visual) v[5] = env.object.mass;
            break;
        case TaskKind::kToss:
            v << env.object.pos.x() + n(), env.object.pos.y() + n(), t.bin_x0 + n(),
                t.bin_x1 + n(), env.object.mode == ObjectMode::kHeld ? 1.0 : 0.0;
            break;
    }
    return v;
}

}  // namespace mgap
