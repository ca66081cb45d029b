#include "mgap/evaluate.hpp"

#include <cmath>

#include "mgap/parallel.hpp"
#include "mgap/seeding.hpp"
#include "mgap/stiffness.hpp"

namespace mgap {

namespace {

std::uint64_t eval_seed(const RunConfig& cfg, TaskKind kind, const char* what, int i) {
    return sub_seed(cfg.master_seed, std::string(what) + "/" + to_string(kind),
                    static_cast<std::uint64_t>(i));
}

}  // namespace

Metrics evaluate(const RunConfig& cfg, TaskKind kind, const PolicyModel& model, Strategy strategy,
                 const LatencyModel& latency, int n_seeds) {
    const TaskSpec& base = cfg.task(to_string(kind));
    std::vector<EpisodeResult> results(static_cast<std::size_t>(n_seeds));
    parallel_for(n_seeds, cfg.threads, [&](int i) {
        std::uint64_t seed = eval_seed(cfg, kind, "eval", i);
        TaskSpec task = base.randomized(seed);
        if (cfg.inject_mass_visual) task.expose_mass_in_visual = true;
        Rollout ro = run_episode(cfg.env, task, model, strategy, latency, seed);
        results[static_cast<std::size_t>(i)] = score_rollout(task, ro, cfg.env.dt);
    });
    Metrics m;
    for (const auto& r : results) m.add(r);
    m.validate();
    return m;
}

Metrics oracle_competence(const RunConfig& cfg, TaskKind kind, int n_seeds, bool interventions) {
    const TaskSpec& base = cfg.task(to_string(kind));
    std::vector<EpisodeResult> results(static_cast<std::size_t>(n_seeds));
    parallel_for(n_seeds, cfg.threads, [&](int i) {
        std::uint64_t seed = eval_seed(cfg, kind, "oracle", i);
        TaskSpec task = base.randomized(seed);
        Episode ep = record_episode(cfg.env, task, cfg.op, seed, task.max_t, interventions);
        EpisodeResult r;
        r.success = ep.header.success;
        // staged flags for the dynamic tasks
        for (const auto& s : ep.steps) {
            if (s.attached()) r.grasp = true;
        }
        r.place = r.sort = r.success && kind == TaskKind::kConveyorSort;
        results[static_cast<std::size_t>(i)] = r;
    });
    Metrics m;
    for (const auto& r : results) m.add(r);
    return m;
}

std::vector<Episode> gen_task_episodes(const RunConfig& cfg, TaskKind kind, int n_episodes,
                                       bool interventions) {
    const TaskSpec& base = cfg.task(to_string(kind));
    std::vector<Episode> eps(static_cast<std::size_t>(n_episodes));
    parallel_for(n_episodes, cfg.threads, [&](int i) {
        std::uint64_t seed = eval_seed(cfg, kind, "demo", i);
        TaskSpec task = base.randomized(seed);
        if (cfg.inject_mass_visual) task.expose_mass_in_visual = true;
        eps[static_cast<std::size_t>(i)] =
            record_episode(cfg.env, task, cfg.op, seed, task.max_t, interventions);
    });
    return eps;
}

PolicyModel train_task_model(const RunConfig& cfg, TaskKind kind, PolicyMode mode,
                             const std::vector<Episode>& episodes) {
    PolicyConfig pcfg = cfg.policy_for(kind, mode);
    if (cfg.inject_mass_visual) pcfg.visual_dim += 1;
    std::vector<Episode> usable;
    for (const Episode& e : episodes)
        if (e.header.success || cfg.include_failed_episodes) usable.push_back(e);
    PolicyModel model = init_policy(pcfg);
    train_on_episodes(model, usable);
    return model;
}

std::vector<SweepRow> latency_sweep(const RunConfig& cfg, TaskKind kind, const PolicyModel& model,
                                    const std::vector<Strategy>& strategies,
                                    const std::vector<int>& ks, int n_seeds) {
    std::vector<SweepRow> rows;
    for (Strategy s : strategies) {
        for (int k : ks) {
            LatencyModel lat;
            lat.mode = LatencyModel::Mode::kFixed;
            lat.k = k;
            SweepRow row;
            row.strategy = s;
            row.k = k;
            row.metrics = evaluate(cfg, kind, model, s, lat, n_seeds);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<AblationRow> ablate_history(const RunConfig& cfg, TaskKind kind,
                                        const std::vector<int>& t_obs_values,
                                        const std::vector<Episode>& episodes, int n_seeds) {
    std::vector<AblationRow> rows;
    for (int t_obs : t_obs_values) {
        RunConfig c = cfg;
        PolicyConfig pcfg = c.policy_for(kind, PolicyMode::kSM2M);
        pcfg.t_obs = t_obs;
        std::vector<Episode> usable;
        for (const Episode& e : episodes)
            if (e.header.success || cfg.include_failed_episodes) usable.push_back(e);
        PolicyModel model = init_policy(pcfg);
        train_on_episodes(model, usable);
        LatencyModel lat;  // k = 0: isolate perception from latency effects
        AblationRow row;
        row.t_obs = t_obs;
        row.metrics = evaluate(cfg, kind, model, Strategy::kInpaint, lat, n_seeds);
        rows.push_back(std::move(row));
    }
    return rows;
}

AlignmentAudit directional_alignment_audit(const RunConfig& cfg, long min_samples) {
    AlignmentAudit audit;
    audit.worst = -1e300;

    // a contact step counts when the acting command engages the constraint;
    // payload-hold steps always count (the wrench is the hanging weight)
    auto check_step = [&](const EnvState& env) {
        Vec2 f = interaction_force(env);
        if (f.norm() <= 1e-9) return;
        Vec3 eps = mismatch(env);
        bool engaged = env.payload_mass() > 0.0;
        const TaskSpec& t = env.task;
        const Vec3& cmd = env.last_delayed_cmd;
        switch (t.kind) {
            case TaskKind::kButton:
            case TaskKind::kCalibrationWall:
                if (std::abs(f.x()) > 1e-9 && cmd[0] >= t.wall_x) engaged = true;
                if (t.kind == TaskKind::kCalibrationWall && std::abs(f.y()) > 1e-9 &&
                    cmd[1] <= t.floor_z)
                    engaged = true;
                break;
            case TaskKind::kWipe:
                if (std::abs(f.y()) > 1e-9 && cmd[1] <= t.surf_z) engaged = true;
                break;
            case TaskKind::kBlindSlot:
                if (std::abs(f.x()) > 1e-9 && cmd[0] >= t.plate_x) engaged = true;
                break;
            default:
                break;
        }
        if (!engaged) return;
        double dot = eps.head<2>().dot(f);
        audit.checked++;
        if (dot > 1e-12) audit.violations++;
        audit.worst = std::max(audit.worst, dot);
    };

    // oracle episodes across all five tasks
    const TaskKind kinds[] = {TaskKind::kButton, TaskKind::kWipe, TaskKind::kBlindSlot,
                              TaskKind::kConveyorSort, TaskKind::kToss};
    int per_task_seed = 0;
    while (audit.checked < min_samples && per_task_seed < 200) {
        for (TaskKind kind : kinds) {
            std::uint64_t seed = eval_seed(cfg, kind, "align", per_task_seed);
            TaskSpec task = cfg.task(to_string(kind)).randomized(seed);
            OperatorParams op = cfg.op;
            op.mass_prior = task.object_mass();
            EnvState env = init_env(cfg.env, task, seed);
            OracleController oracle(task, op, seed);
            for (int t = 0; t < task.max_t; ++t) {
                MasterCommand cmd = oracle.command(env);
                step(env, cmd);
                check_step(env);
                if (env.task_done()) break;
            }
        }
        per_task_seed++;
    }

    // quasi-static indentation holds on both axes
    TaskSpec cal = cfg.task("calibration_wall");
    for (int axis = 0; axis < kDim; ++axis) {
        EnvState env = init_env(cfg.env, cal, 7);
        double surface = axis == 0 ? cal.wall_x : cal.floor_z;
        double dir = axis == 0 ? 1.0 : -1.0;
        MasterCommand cmd;
        cmd.pos = cal.start_pos;
        cmd.grip = cal.start_grip;
        for (double offset : {0.02, 0.04, 0.06, 0.08}) {
            cmd.pos[axis] = surface + dir * offset;
            for (int i = 0; i < 400; ++i) {
                step(env, cmd);
                if (i > 50) check_step(env);
            }
        }
    }
    return audit;
}

LiftPeaks oracle_lift_peaks(const RunConfig& cfg, int n_seeds) {
    LiftPeaks out;
    const TaskSpec& base = cfg.task("conveyor_sort");
    std::vector<double> peaks(static_cast<std::size_t>(n_seeds), 0.0);
    std::vector<int> heavy(static_cast<std::size_t>(n_seeds), 0);
    parallel_for(n_seeds, cfg.threads, [&](int i) {
        std::uint64_t seed = eval_seed(cfg, TaskKind::kConveyorSort, "liftpeak", i);
        TaskSpec task = base.randomized(seed);
        Episode ep = record_episode(cfg.env, task, cfg.op, seed, task.max_t, false);
        double peak = 0.0;
        for (const auto& s : ep.steps)
            if (s.attached()) peak = std::max(peak, std::abs(s.master_cmd[1] - s.slave_state[1]));
        peaks[static_cast<std::size_t>(i)] = peak;
        heavy[static_cast<std::size_t>(i)] = task.object_is_heavy ? 1 : 0;
    });
    for (int i = 0; i < n_seeds; ++i) {
        if (heavy[static_cast<std::size_t>(i)]) {
            out.heavy_mean += peaks[static_cast<std::size_t>(i)];
            out.heavy_n++;
        } else {
            out.light_mean += peaks[static_cast<std::size_t>(i)];
            out.light_n++;
        }
    }
    if (out.heavy_n) out.heavy_mean /= out.heavy_n;
    if (out.light_n) out.light_mean /= out.light_n;
    return out;
}

}  // namespace mgap
