#include "mgap/config.hpp"

#include <set>
#include <sstream>

#include "mgap/errors.hpp"
#include "mgap/seeding.hpp"

namespace mgap {

namespace {

const std::set<std::string> kTaskNames = {"button",        "blind_slot", "wipe",
                                          "conveyor_sort", "toss",       "calibration_wall"};

Vec2 to_vec2(const std::vector<double>& v, const std::string& key) {
    if (v.size() != 2) throw ConfigError("config key '" + key + "' must have 2 entries");
    return Vec2(v[0], v[1]);
}

}  // namespace

bool task_is_dynamic(TaskKind kind) {
    return kind == TaskKind::kConveyorSort || kind == TaskKind::kToss;
}

const TaskSpec& RunConfig::task(const std::string& name) const {
    auto it = tasks.find(name);
    if (it == tasks.end()) throw ConfigError("unknown task: " + name);
    return it->second;
}

PolicyConfig RunConfig::policy_for(TaskKind kind, PolicyMode mode) const {
    PolicyConfig cfg = policy;
    cfg.mode = mode;
    cfg.visual_dim = visual_dim(kind);
    if (task_is_dynamic(kind)) {
        cfg.t_obs = 9;
        // conditioning on one's own committed intent stream only makes sense
        // for the dual-state mode; the baselines deploy without it
        cfg.use_inpainting = mode == PolicyMode::kSM2M;
    } else {
        cfg.t_obs = 1;
        cfg.use_inpainting = false;
    }
    cfg.seed = sub_seed(master_seed, std::string("train/") + to_string(kind), static_cast<std::uint64_t>(mode));
    return cfg;
}

RunConfig RunConfig::defaults() {
    RunConfig c;
    for (const std::string& name : kTaskNames)
        c.tasks.emplace(name, TaskSpec::defaults(task_kind_from_string(name)));
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    return from_toml(toml::parse_file(path));
}

RunConfig RunConfig::from_toml(const toml::Table& t) {
    RunConfig c = defaults();
    std::set<std::string> seen;
    auto mark = [&](const std::string& k) { seen.insert(k); };

    auto d = [&](const std::string& k, double def) {
        mark(k);
        return t.get_double(k, def);
    };
    auto i = [&](const std::string& k, std::int64_t def) {
        mark(k);
        return static_cast<int>(t.get_int(k, def));
    };
    auto b = [&](const std::string& k, bool def) {
        mark(k);
        return t.get_bool(k, def);
    };
    auto s = [&](const std::string& k, const std::string& def) {
        mark(k);
        return t.get_string(k, def);
    };
    auto v2 = [&](const std::string& k, const Vec2& def) {
        mark(k);
        if (!t.has(k)) return def;
        return to_vec2(t.get_double_array(k), k);
    };

    c.data_dir = s("run.data_dir", c.data_dir);
    c.model_dir = s("run.model_dir", c.model_dir);
    c.report_dir = s("run.report_dir", c.report_dir);
    mark("run.master_seed");
    c.master_seed = static_cast<std::uint64_t>(t.get_int("run.master_seed", 1234));
    c.episodes_per_task = i("run.episodes_per_task", c.episodes_per_task);
    c.eval_seeds = i("run.eval_seeds", c.eval_seeds);
    c.threads = i("run.threads", c.threads);
    c.include_failed_episodes = b("run.include_failed_episodes", c.include_failed_episodes);
    c.inject_mass_visual = b("run.inject_mass_visual", c.inject_mass_visual);

    EnvParams& e = c.env;
    e.kp = v2("env.kp", e.kp);
    e.kd = v2("env.kd", e.kd);
    e.robot_mass = d("env.robot_mass", e.robot_mass);
    e.latency_steps = i("env.latency_steps", e.latency_steps);
    e.coulomb_f = d("env.coulomb_f", e.coulomb_f);
    e.stiction_f = d("env.stiction_f", e.stiction_f);
    e.stiction_v_eps = d("env.stiction_v_eps", e.stiction_v_eps);
    e.dt = d("env.dt", e.dt);
    e.gravity = d("env.gravity", e.gravity);
    e.contact_stiffness = d("env.contact_stiffness", e.contact_stiffness);
    e.contact_damping = d("env.contact_damping", e.contact_damping);
    e.grip_gain = d("env.grip_gain", e.grip_gain);
    e.grip_stiction_f = d("env.grip_stiction_f", e.grip_stiction_f);
    e.grip_tau = d("env.grip_tau", e.grip_tau);
    e.hold_coeff = d("env.hold_coeff", e.hold_coeff);
    e.delta_max = d("env.delta_max", e.delta_max);
    e.v_max = d("env.v_max", e.v_max);
    e.grip_max = d("env.grip_max", e.grip_max);
    e.sigma_vis = d("env.sigma_vis", e.sigma_vis);
    e.validate();

    OperatorParams& o = c.op;
    o.lead_gain = d("operator.lead_gain", o.lead_gain);
    o.khat_beta = d("operator.khat_beta", o.khat_beta);
    o.intervention_prob = d("operator.intervention_prob", o.intervention_prob);
    o.intervention_lo = i("operator.intervention_lo", o.intervention_lo);
    o.intervention_hi = i("operator.intervention_hi", o.intervention_hi);
    o.approach_speed = d("operator.approach_speed", o.approach_speed);
    o.lift_speed = d("operator.lift_speed", o.lift_speed);
    o.descend_speed = d("operator.descend_speed", o.descend_speed);
    o.wipe_speed = d("operator.wipe_speed", o.wipe_speed);
    o.scan_speed = d("operator.scan_speed", o.scan_speed);
    o.grip_speed = d("operator.grip_speed", o.grip_speed);
    o.button_press_f = d("operator.button_press_f", o.button_press_f);
    o.wipe_f = d("operator.wipe_f", o.wipe_f);
    o.slot_preload_f = d("operator.slot_preload_f", o.slot_preload_f);
    o.slot_insert_f = d("operator.slot_insert_f", o.slot_insert_f);
    o.squeeze_safety = d("operator.squeeze_safety", o.squeeze_safety);
    o.stiction_escape_growth = d("operator.stiction_escape_growth", o.stiction_escape_growth);
    o.validate();

    PolicyConfig& p = c.policy;
    p.horizon = i("policy.horizon", p.horizon);
    p.t_exec = i("policy.t_exec", p.t_exec);
    p.k_max = i("policy.k_max", p.k_max);
    {
        mark("policy.hidden");
        if (t.has("policy.hidden")) {
            p.hidden.clear();
            for (double hv : t.get_double_array("policy.hidden"))
                p.hidden.push_back(static_cast<int>(hv));
        }
    }
    p.lr = d("policy.lr", p.lr);
    p.adam_beta1 = d("policy.adam_beta1", p.adam_beta1);
    p.adam_beta2 = d("policy.adam_beta2", p.adam_beta2);
    p.weight_decay = d("policy.weight_decay", p.weight_decay);
    p.epochs = i("policy.epochs", p.epochs);
    p.batch = i("policy.batch", p.batch);
    p.max_samples = i("policy.max_samples", p.max_samples);
    {
        std::string head = s("policy.head", "regression");
        if (head == "regression")
            p.head = HeadKind::kRegression;
        else if (head == "refinement")
            p.head = HeadKind::kRefinement;
        else
            throw ConfigError("policy.head must be regression or refinement");
    }
    p.refine_steps = i("policy.refine_steps", p.refine_steps);

    {
        std::string m = s("latency.mode", "fixed");
        if (m == "fixed")
            c.latency.mode = LatencyModel::Mode::kFixed;
        else if (m == "jitter")
            c.latency.mode = LatencyModel::Mode::kJitter;
        else
            throw ConfigError("latency.mode must be fixed or jitter");
    }
    c.latency.k = i("latency.k", c.latency.k);
    c.latency.jitter_lo = i("latency.jitter_lo", c.latency.jitter_lo);
    c.latency.jitter_hi = i("latency.jitter_hi", c.latency.jitter_hi);
    c.latency.validate();
    c.strategy = strategy_from_string(s("latency.strategy", "inpaint"));

    for (auto& [name, spec] : c.tasks) {
        const std::string pre = "tasks." + name + ".";
        auto td = [&](const std::string& k, double def) { return d(pre + k, def); };
        auto ti = [&](const std::string& k, int def) { return i(pre + k, def); };
        spec.start_pos = v2(pre + "start", spec.start_pos);
        spec.start_grip = td("start_grip", spec.start_grip);
        spec.max_t = ti("max_t", spec.max_t);
        spec.geom_jitter = td("geom_jitter", spec.geom_jitter);
        spec.wall_x = td("wall_x", spec.wall_x);
        spec.press_z = td("press_z", spec.press_z);
        spec.f_trig = td("f_trig", spec.f_trig);
        spec.n_trig = ti("n_trig", spec.n_trig);
        spec.button_stiffness_jitter = td("stiffness_jitter", spec.button_stiffness_jitter);
        spec.floor_z = td("floor_z", spec.floor_z);
        spec.surf_z = td("surf_z", spec.surf_z);
        spec.path_x0 = td("path_x0", spec.path_x0);
        spec.path_x1 = td("path_x1", spec.path_x1);
        spec.n_waypoints = ti("n_waypoints", spec.n_waypoints);
        spec.wipe_tol = td("wipe_tol", spec.wipe_tol);
        spec.f_lo = td("f_lo", spec.f_lo);
        spec.f_hi = td("f_hi", spec.f_hi);
        spec.strict_frac = td("strict_frac", spec.strict_frac);
        spec.effective_frac = td("effective_frac", spec.effective_frac);
        spec.plate_x = td("plate_x", spec.plate_x);
        spec.plate_z_lo = td("plate_z_lo", spec.plate_z_lo);
        spec.plate_z_hi = td("plate_z_hi", spec.plate_z_hi);
        spec.slot_half_width = td("slot_half_width", spec.slot_half_width);
        spec.insert_depth = td("insert_depth", spec.insert_depth);
        spec.n_dimples = ti("n_dimples", spec.n_dimples);
        spec.f_jam = td("f_jam", spec.f_jam);
        spec.jam_steps = ti("jam_steps", spec.jam_steps);
        spec.belt_z = td("belt_z", spec.belt_z);
        spec.belt_speed = td("belt_speed", spec.belt_speed);
        spec.spawn_x = td("spawn_x", spec.spawn_x);
        spec.belt_end = td("belt_end", spec.belt_end);
        spec.obj_width = td("obj_width", spec.obj_width);
        spec.obj_height = td("obj_height", spec.obj_height);
        spec.mass_light = td("mass_light", spec.mass_light);
        spec.mass_heavy = td("mass_heavy", spec.mass_heavy);
        spec.grasp_tol = td("grasp_tol", spec.grasp_tol);
        spec.lift_z = td("lift_z", spec.lift_z);
        spec.zone_x_lo = td("zone_x_lo", spec.zone_x_lo);
        spec.zone_divider = td("zone_divider", spec.zone_divider);
        spec.zone_x_hi = td("zone_x_hi", spec.zone_x_hi);
        spec.place_z = td("place_z", spec.place_z);
        spec.pickup = v2(pre + "pickup", spec.pickup);
        spec.windup = v2(pre + "windup", spec.windup);
        spec.toss_mass = td("toss_mass", spec.toss_mass);
        spec.reach_x = td("reach_x", spec.reach_x);
        spec.bin_x0 = td("bin_x0", spec.bin_x0);
        spec.bin_x1 = td("bin_x1", spec.bin_x1);
        spec.validate();
    }

    // strict: anything we did not consume is an error
    for (const auto& [key, unused] : t.values) {
        (void)unused;
        if (!seen.count(key)) throw ConfigError("unknown config key: " + key);
    }
    return c;
}

std::string default_config_toml() {
    RunConfig c = RunConfig::defaults();
    std::ostringstream o;
    o << "# mismatch-gap defaults; SI units throughout\n\n";
    o << "[run]\n";
    o << "data_dir = \"data\"\nmodel_dir = \"models\"\nreport_dir = \"report\"\n";
    o << "master_seed = 1234\nepisodes_per_task = 200\neval_seeds = 50\nthreads = 0\n";
    o << "include_failed_episodes = false\ninject_mass_visual = false\n\n";
    o << "[env]\n";
    o << "kp = [200.0, 200.0]          # N/m\n";
    o << "kd = [20.0, 20.0]            # N*s/m\n";
    o << "robot_mass = 1.0             # kg\n";
    o << "latency_steps = 3\n";
    o << "coulomb_f = 0.5              # N\n";
    o << "stiction_f = 0.8             # N\n";
    o << "stiction_v_eps = 0.001       # m/s\n";
    o << "dt = 0.016666666666666666    # 60 Hz\n";
    o << "gravity = 9.81\n";
    o << "contact_stiffness = 2000.0   # N/m\n";
    o << "contact_damping = 20.0\n";
    o << "grip_gain = 2000.0\n";
    o << "grip_stiction_f = 1.2        # N, finger-pad static friction\n";
    o << "grip_tau = 0.05\n";
    o << "hold_coeff = 2.0\n";
    o << "delta_max = 0.1              # m, per-axis safety clamp\n";
    o << "v_max = 2.0\n";
    o << "grip_max = 0.08\n";
    o << "sigma_vis = 0.002            # m, visual noise\n\n";
    o << "[operator]\n";
    o << "lead_gain = 0.05\nkhat_beta = 1.0\n";
    o << "intervention_prob = 0.3\nintervention_lo = 60\nintervention_hi = 240\n";
    o << "approach_speed = 0.35\nlift_speed = 0.25\ndescend_speed = 0.15\n";
    o << "wipe_speed = 0.12\nscan_speed = 0.06\ngrip_speed = 0.3\n";
    o << "button_press_f = 12.0        # N; trigger needs 10\n";
    o << "wipe_f = 17.0                # N; band is [10, 25]\n";
    o << "slot_preload_f = 4.0\nslot_insert_f = 6.0\nsqueeze_safety = 1.5\n";
    o << "stiction_escape_growth = 0.1\n\n";
    o << "[policy]\n";
    o << "horizon = 30\nt_exec = 15\nk_max = 24\nhidden = [256, 256]\n";
    o << "lr = 0.001\nadam_beta1 = 0.9\nadam_beta2 = 0.95\nweight_decay = 1e-10\n";
    o << "epochs = 12\nbatch = 256\nmax_samples = 48000\n";
    o << "head = \"regression\"\nrefine_steps = 10\n\n";
    o << "[latency]\n";
    o << "mode = \"fixed\"\nk = 0\njitter_lo = 0\njitter_hi = 0\nstrategy = \"inpaint\"\n\n";
    auto emit_task = [&](const char* name, const TaskSpec& tsk) {
        o << "[tasks." << name << "]\n";
        o << "start = [" << tsk.start_pos.x() << ", " << tsk.start_pos.y() << "]\n";
        o << "max_t = " << tsk.max_t << "\n";
        switch (tsk.kind) {
            case TaskKind::kButton:
                o << "wall_x = " << tsk.wall_x << "\npress_z = " << tsk.press_z << "\n";
                o << "f_trig = " << tsk.f_trig << "\nn_trig = " << tsk.n_trig << "\n";
                o << "stiffness_jitter = " << tsk.button_stiffness_jitter << "\n";
                break;
            case TaskKind::kWipe:
                o << "surf_z = " << tsk.surf_z << "\npath_x0 = " << tsk.path_x0
                  << "\npath_x1 = " << tsk.path_x1 << "\n";
                o << "f_lo = " << tsk.f_lo << "\nf_hi = " << tsk.f_hi << "\n";
                break;
            case TaskKind::kBlindSlot:
                o << "plate_x = " << tsk.plate_x << "\ninsert_depth = " << tsk.insert_depth
                  << "\nn_dimples = " << tsk.n_dimples << "\nf_jam = " << tsk.f_jam << "\n";
                break;
            case TaskKind::kConveyorSort:
                o << "belt_speed = " << tsk.belt_speed << "\nmass_light = " << tsk.mass_light
                  << "\nmass_heavy = " << tsk.mass_heavy << "\n";
                o << "zone_x_lo = " << tsk.zone_x_lo << "\nzone_divider = " << tsk.zone_divider
                  << "\nzone_x_hi = " << tsk.zone_x_hi << "\n";
                break;
            case TaskKind::kToss:
                o << "bin_x0 = " << tsk.bin_x0 << "\nbin_x1 = " << tsk.bin_x1
                  << "\nreach_x = " << tsk.reach_x << "\n";
                break;
            case TaskKind::kCalibrationWall:
                o << "wall_x = " << tsk.wall_x << "\nfloor_z = " << tsk.floor_z << "\n";
                break;
        }
        o << "\n";
    };
    for (const auto& [name, tsk] : c.tasks) emit_task(name.c_str(), tsk);
    return o.str();
}

}  // namespace mgap
