#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgap/config.hpp"
#include "mgap/metrics.hpp"

namespace mgap {

// Policy evaluation over randomized task geometry; deterministic in the
// config's master seed, parallel over seeds.
Metrics evaluate(const RunConfig& cfg, TaskKind kind, const PolicyModel& model, Strategy strategy,
                 const LatencyModel& latency, int n_seeds);

// Scripted-operator benchmark run (interventions on by default).
Metrics oracle_competence(const RunConfig& cfg, TaskKind kind, int n_seeds,
                          bool interventions = true);

// Demonstration dataset for one task.
std::vector<Episode> gen_task_episodes(const RunConfig& cfg, TaskKind kind, int n_episodes,
                                       bool interventions = true);

// Data -> model for one (task, mode); uses the task-appropriate policy config.
PolicyModel train_task_model(const RunConfig& cfg, TaskKind kind, PolicyMode mode,
                             const std::vector<Episode>& episodes);

struct SweepRow {
    Strategy strategy;
    int k = 0;
    Metrics metrics;
};

std::vector<SweepRow> latency_sweep(const RunConfig& cfg, TaskKind kind, const PolicyModel& model,
                                    const std::vector<Strategy>& strategies,
                                    const std::vector<int>& ks, int n_seeds);

struct AblationRow {
    int t_obs = 0;
    Metrics metrics;
};

// Trains one dual-state model per history length and evaluates it.
std::vector<AblationRow> ablate_history(const RunConfig& cfg, TaskKind kind,
                                        const std::vector<int>& t_obs_values,
                                        const std::vector<Episode>& episodes, int n_seeds);

struct AlignmentAudit {
    long checked = 0;
    long violations = 0;
    double worst = 0.0;  // most positive eps . F observed
};

// Directional-alignment audit over loaded-contact steps: while the commanded
// intent engages a constraint (or a payload hangs from the gripper), the
// mismatch must oppose the external wrench. Samples oracle episodes from
// every task plus calibration indentation holds.
AlignmentAudit directional_alignment_audit(const RunConfig& cfg, long min_samples);

struct LiftPeaks {
    double heavy_mean = 0.0;
    double light_mean = 0.0;
    int heavy_n = 0;
    int light_n = 0;
};

// Peak |eps_z| during the holding phase of oracle conveyor episodes.
LiftPeaks oracle_lift_peaks(const RunConfig& cfg, int n_seeds);

}  // namespace mgap
