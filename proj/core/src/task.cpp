#include "mgap/task.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mgap/errors.hpp"
#include "mgap/seeding.hpp"

namespace mgap {

const char* to_string(TaskKind k) {
    switch (k) {
        case TaskKind::kButton: return "button";
        case TaskKind::kBlindSlot: return "blind_slot";
        case TaskKind::kWipe: return "wipe";
        case TaskKind::kConveyorSort: return "conveyor_sort";
        case TaskKind::kToss: return "toss";
        case TaskKind::kCalibrationWall: return "calibration_wall";
    }
    return "?";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "button") return TaskKind::kButton;
    if (s == "blind_slot") return TaskKind::kBlindSlot;
    if (s == "wipe") return TaskKind::kWipe;
    if (s == "conveyor_sort") return TaskKind::kConveyorSort;
    if (s == "toss") return TaskKind::kToss;
    if (s == "calibration_wall") return TaskKind::kCalibrationWall;
    throw ConfigError("unknown task kind: " + s);
}

double TaskSpec::object_mass() const {
    switch (kind) {
        case TaskKind::kConveyorSort: return object_is_heavy ? mass_heavy : mass_light;
        case TaskKind::kToss: return toss_mass;
        default: return 0.0;
    }
}

bool TaskSpec::has_object() const {
    return kind == TaskKind::kConveyorSort || kind == TaskKind::kToss;
}

void TaskSpec::validate() const {
    switch (kind) {
        case TaskKind::kButton:
            if (f_trig <= 0.0) throw ConfigError("button: f_trig must be > 0");
            if (n_trig < 1) throw ConfigError("button: n_trig must be >= 1");
            if (wall_x <= start_pos.x()) throw ConfigError("button: wall must be ahead of start");
            break;
        case TaskKind::kBlindSlot:
            if (slot_half_width <= 0.0) throw ConfigError("blind_slot: slot width must be > 0");
            if (plate_z_hi <= plate_z_lo) throw ConfigError("blind_slot: empty plate z range");
            if (slot_z - slot_half_width < plate_z_lo || slot_z + slot_half_width > plate_z_hi)
                throw ConfigError("blind_slot: slot outside plate");
            break;
        case TaskKind::kWipe:
            if (path_x1 <= path_x0) throw ConfigError("wipe: empty path");
            if (f_hi <= f_lo || f_lo <= 0.0) throw ConfigError("wipe: bad force band");
            if (n_waypoints < 2) throw ConfigError("wipe: need >= 2 waypoints");
            break;
        case TaskKind::kConveyorSort:
            if (belt_speed <= 0.0) throw ConfigError("conveyor: belt speed must be > 0");
            if (belt_end <= spawn_x) throw ConfigError("conveyor: belt end before spawn");
            if (zone_divider <= zone_x_lo || zone_x_hi <= zone_divider)
                throw ConfigError("conveyor: zones empty");
            if (mass_heavy <= mass_light) throw ConfigError("conveyor: masses not ordered");
            break;
        case TaskKind::kToss:
            if (bin_x1 <= bin_x0) throw ConfigError("toss: empty bin interval");
            if (reach_x > 0.0 && bin_x0 <= reach_x)
                throw ConfigError("toss: bin must start beyond reach");
            break;
        case TaskKind::kCalibrationWall:
            break;
    }
    if (max_t < 1) throw ConfigError("task: max_t must be >= 1");
}

TaskSpec TaskSpec::randomized(std::uint64_t seed) const {
    TaskSpec t = *this;
    std::mt19937_64 rng(sub_seed(seed, "task_geom", static_cast<std::uint64_t>(kind)));
    std::uniform_real_distribution<double> jit(-geom_jitter, geom_jitter);
    switch (kind) {
        case TaskKind::kButton: {
            t.wall_x += jit(rng);
            t.press_z += jit(rng);
            std::uniform_real_distribution<double> st(1.0 - button_stiffness_jitter,
                                                      1.0 + button_stiffness_jitter);
            t.button_stiffness_scale = st(rng);
            break;
        }
        case TaskKind::kBlindSlot: {
            t.plate_x += jit(rng);
            double center = 0.5 * (plate_z_lo + plate_z_hi);
            std::uniform_real_distribution<double> sz(center - 0.08, center + 0.08);
            t.slot_z = sz(rng);
            t.dimple_z.clear();
            t.dimple_depth.clear();
            std::uniform_real_distribution<double> dz(plate_z_lo + 0.03, plate_z_hi - 0.03);
            std::uniform_real_distribution<double> dd(0.010, 0.020);
            int guard = 0;
            while (static_cast<int>(t.dimple_z.size()) < n_dimples && guard++ < 200) {
                double z = dz(rng);
                bool ok = std::abs(z - t.slot_z) > 0.03;
                for (double prev : t.dimple_z)
                    if (std::abs(z - prev) < 0.03) ok = false;
                if (ok) {
                    t.dimple_z.push_back(z);
                    t.dimple_depth.push_back(dd(rng));
                }
            }
            break;
        }
        case TaskKind::kWipe: {
            double shift = jit(rng);
            t.path_x0 += shift;
            t.path_x1 += shift;
            t.surf_z += jit(rng);
            break;
        }
        case TaskKind::kConveyorSort: {
            t.spawn_x += jit(rng);
            std::bernoulli_distribution heavy(0.5);
            t.object_is_heavy = heavy(rng);
            break;
        }
        case TaskKind::kToss: {
            double shift = jit(rng);
            t.bin_x0 += shift;
            t.bin_x1 += shift;
            t.pickup.x() += jit(rng);
            break;
        }
        case TaskKind::kCalibrationWall:
            break;
    }
    t.validate();
    return t;
}

TaskSpec TaskSpec::defaults(TaskKind kind) {
    TaskSpec t;
    t.kind = kind;
    switch (kind) {
        case TaskKind::kButton:
            t.start_pos = Vec2(0.0, 0.2);
            t.max_t = 600;
            break;
        case TaskKind::kBlindSlot:
            t.start_pos = Vec2(0.35, 0.45);
            t.max_t = 1500;
            break;
        case TaskKind::kWipe:
            t.start_pos = Vec2(0.15, 0.25);
            t.max_t = 1200;
            break;
        case TaskKind::kConveyorSort:
            t.start_pos = Vec2(0.25, 0.30);
            t.max_t = 1000;
            break;
        case TaskKind::kToss:
            t.start_pos = Vec2(0.25, 0.30);
            t.max_t = 700;
            break;
        case TaskKind::kCalibrationWall:
            t.start_pos = Vec2(0.3, 0.3);
            t.wall_x = 0.5;
            t.floor_z = 0.1;
            t.max_t = 6000;
            break;
    }
    return t;
}

int visual_dim(TaskKind kind) {
    switch (kind) {
        case TaskKind::kButton: return 3;           // wall_x, press_z, triggered
        case TaskKind::kBlindSlot: return 2;        // plate_x, plate_center_z
        case TaskKind::kWipe: return 5;             // surf_z, x0, x1, next_dirty_x, cleaned_frac
        case TaskKind::kConveyorSort: return 5;     // obj_x, obj_z, light_cx, heavy_cx, held
        case TaskKind::kToss: return 5;             // obj_x, obj_z, bin_x0, bin_x1, held
        case TaskKind::kCalibrationWall: return 2;  // wall_x, floor_z
    }
    return 0;
}

int visual_dim(const TaskSpec& task) {
    int n = visual_dim(task.kind);
    if (task.kind == TaskKind::kConveyorSort && task.expose_mass_in_visual) n += 1;
    return n;
}

}  // namespace mgap
