#include "mgap/episode.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "mgap/errors.hpp"
#include "mgap/seeding.hpp"

namespace mgap {

using json = nlohmann::json;

namespace {

json vec_to_json(const Eigen::Ref<const VecX>& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

VecX vec_from_json(const json& a) {
    VecX v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

}  // namespace

Episode record_episode(const EnvParams& params, const TaskSpec& task, const OperatorParams& op,
                       std::uint64_t seed, int max_t, bool interventions_enabled) {
    if (max_t <= 0) throw ContractError("record_episode: max_t must be > 0");
    op.validate();

    OperatorParams op_run = op;
    op_run.mass_prior = task.object_mass();  // privileged weight knowledge

    EnvState env = init_env(params, task, seed);
    OracleController oracle(task, op_run, seed);

    std::mt19937_64 irng = make_rng(seed, "intervention");
    int sched = -1;
    if (interventions_enabled && op.intervention_hi > op.intervention_lo) {
        std::uniform_int_distribution<int> pick(op.intervention_lo, op.intervention_hi);
        sched = pick(irng);
    }

    Episode ep;
    ep.header.task = to_string(task.kind);
    ep.header.seed = seed;
    ep.header.env_params_digest = params.digest();
    ep.header.operator_params_digest = op.digest();
    ep.header.dt = params.dt;

    int settle = 0;
    for (int t = 0; t < max_t; ++t) {
        if (t == sched) {
            if (apply_intervention(env, irng, op_run)) ep.header.intervention_step = t;
        }
        MasterCommand cmd = oracle.command(env);
        StepEvents ev = step(env, cmd);

        EpisodeStep s;
        s.t = t;
        s.master_cmd = env.last_clamped_cmd;
        s.slave_state = env.robot.measured();
        s.slave_vel = env.robot.vel;
        s.visual = visual_features(env);
        s.ground_truth_force = interaction_force(env);
        s.object_pos = ev.object_pos;
        s.flags = static_cast<std::uint8_t>((ev.contact_force.norm() > 1e-9 ? 1 : 0) |
                                            (ev.object_attached ? 2 : 0) |
                                            (ev.object_dropped ? 4 : 0) |
                                            (ev.object_released ? 8 : 0) |
                                            (ev.clamp_active ? 16 : 0) |
                                            (ev.button_triggered ? 32 : 0));
        ep.steps.push_back(std::move(s));

        if (env.task_done()) {
            if (++settle >= 5) break;
        }
    }
    ep.header.length = static_cast<int>(ep.steps.size());

    switch (task.kind) {
        case TaskKind::kButton: ep.header.success = env.button_latched; break;
        case TaskKind::kWipe: ep.header.success = env.wipe_coverage() >= task.strict_frac; break;
        case TaskKind::kBlindSlot: ep.header.success = env.inserted && !env.jammed; break;
        case TaskKind::kConveyorSort: {
            const ObjectState& o = env.object;
            bool placed = o.mode == ObjectMode::kLanded && o.landed_x >= task.zone_x_lo &&
                          o.landed_x <= task.zone_x_hi;
            bool correct = task.object_is_heavy ? o.landed_x >= task.zone_divider
                                                : o.landed_x < task.zone_divider;
            ep.header.success = o.was_attached && placed && correct;
            break;
        }
        case TaskKind::kToss:
            ep.header.success = env.object.mode == ObjectMode::kLanded &&
                                env.object.landed_x >= task.bin_x0 &&
                                env.object.landed_x <= task.bin_x1;
            break;
        case TaskKind::kCalibrationWall: ep.header.success = true; break;
    }
    return ep;
}

void save_episodes(const std::string& path, const std::vector<Episode>& episodes) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    for (const Episode& ep : episodes) {
        json j;
        j["task"] = ep.header.task;
        j["seed"] = ep.header.seed;
        j["env_digest"] = ep.header.env_params_digest;
        j["op_digest"] = ep.header.operator_params_digest;
        j["length"] = ep.header.length;
        j["dt"] = ep.header.dt;
        j["success"] = ep.header.success;
        j["intervention_step"] = ep.header.intervention_step;
        json steps = json::array();
        for (const EpisodeStep& s : ep.steps) {
            json js;
            js["t"] = s.t;
            js["m"] = vec_to_json(s.master_cmd);
            js["s"] = vec_to_json(s.slave_state);
            js["v"] = vec_to_json(s.slave_vel);
            js["vis"] = vec_to_json(s.visual);
            js["f"] = vec_to_json(s.ground_truth_force);
            js["fl"] = s.flags;
            js["o"] = vec_to_json(s.object_pos);
            steps.push_back(std::move(js));
        }
        j["steps"] = std::move(steps);
        out << j.dump() << "\n";
    }
}

std::vector<Episode> load_episodes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    std::vector<Episode> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed episode line");
        try {
            Episode ep;
            ep.header.task = j.at("task").get<std::string>();
            ep.header.seed = j.at("seed").get<std::uint64_t>();
            ep.header.env_params_digest = j.at("env_digest").get<std::uint64_t>();
            ep.header.operator_params_digest = j.at("op_digest").get<std::uint64_t>();
            ep.header.length = j.at("length").get<int>();
            ep.header.dt = j.at("dt").get<double>();
            ep.header.success = j.at("success").get<bool>();
            ep.header.intervention_step = j.at("intervention_step").get<int>();
            for (const json& js : j.at("steps")) {
                EpisodeStep s;
                s.t = js.at("t").get<int>();
                s.master_cmd = vec_from_json(js.at("m"));
                s.slave_state = vec_from_json(js.at("s"));
                VecX v = vec_from_json(js.at("v"));
                s.slave_vel = Vec2(v[0], v[1]);
                s.visual = vec_from_json(js.at("vis"));
                VecX f = vec_from_json(js.at("f"));
                s.ground_truth_force = Vec2(f[0], f[1]);
                s.flags = static_cast<std::uint8_t>(js.at("fl").get<int>());
                VecX o = vec_from_json(js.at("o"));
                s.object_pos = Vec2(o[0], o[1]);
                ep.steps.push_back(std::move(s));
            }
            out.push_back(std::move(ep));
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace mgap
