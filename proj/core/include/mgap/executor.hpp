#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mgap/policy.hpp"
#include "mgap/sim.hpp"

namespace mgap {

enum class Strategy { kSync, kNaiveAsync, kEnsemble, kInpaint };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct LatencyModel {
    enum class Mode { kFixed, kJitter };
    Mode mode = Mode::kFixed;
    int k = 0;          // fixed latency in control steps
    int jitter_lo = 0;  // inclusive bounds for jitter mode
    int jitter_hi = 0;

    int draw(std::mt19937_64& rng) const;
    int nominal() const { return mode == Mode::kFixed ? k : jitter_hi; }
    void validate() const;
};

// k = ceil(delta_inf / dt), with a tolerance so exact multiples stay exact.
int committed_horizon(double delta_inf, double dt);

// Contiguous future-intent store indexed by absolute step.
struct IntentBuffer {
    long base = 1;  // absolute index of entries[0]
    std::vector<Vec3> entries;

    long horizon_end() const { return base + static_cast<long>(entries.size()) - 1; }
    bool covers(long t) const { return t >= base && t <= horizon_end(); }
    const Vec3& at(long t) const;
    void append(const Vec3& v) { entries.push_back(v); }
    void drop_before(long t);  // forget executed entries (keeps base <= t)
};

// Splices a freshly generated chunk (observation anchor t0, mask length k)
// into the buffer: steps t0+1..t0+k stay bit-identical, t0+k+1..t0+H come
// from the chunk tail. The buffer must already cover the committed region.
IntentBuffer splice(const IntentBuffer& buffer, const MatX& new_chunk, long t0, int k);

struct RolloutStep {
    Vec3 intent = Vec3::Zero();  // post-clamp executed command
    Vec3 slave = Vec3::Zero();
    Vec3 eps = Vec3::Zero();
    Vec2 contact_force = Vec2::Zero();
    bool clamp = false;
    bool starved = false;
    bool attached = false;
};

struct SpliceRecord {
    long t0 = 0;
    int k = 0;
    long delivered_at = 0;
    bool committed_region_intact = true;  // bit-exact audit result
};

struct Rollout {
    std::vector<RolloutStep> steps;
    std::vector<SpliceRecord> splices;
    int starvation_events = 0;
    int clamp_events = 0;
    int inference_jobs = 0;
    EnvState final_env;  // snapshot for success predicates
    bool audit_ok = true;

    std::vector<Vec3> executed_master() const;
    std::vector<Vec3> slave_trace() const;
};

struct ExecutorOptions {
    int max_t = 0;              // 0: use task.max_t
    bool adaptive_cadence = true;  // shrink the launch period to H - k when needed
    int chunk_stride = 1;       // >1: model grid coarser than ticks, linear upsample
};

// Closed-loop deployment of a trained policy under simulated inference
// latency. The virtual clock advances one sim step per tick; a job observes
// at t0 and its chunk arrives at t0 + k.
Rollout run_episode(const EnvParams& params, const TaskSpec& task, const PolicyModel& model,
                    Strategy strategy, const LatencyModel& latency, std::uint64_t seed,
                    const ExecutorOptions& opts = {});

// Wall-clock variant: one sim ticker plus one inference worker thread.
// Nondeterministic by nature; the sim thread never blocks on inference.
Rollout run_episode_wallclock(const EnvParams& params, const TaskSpec& task,
                              const PolicyModel& model, Strategy strategy, std::uint64_t seed,
                              int max_t = 0);

// RMS of the third-order central difference of executed slave position over
// dt^3, summed over axes.
double jerk_metric(const Rollout& rollout, double dt);
double jerk_metric(const std::vector<Vec3>& slave_trace, double dt);

// Piecewise-linear upsampling of a chunk by an integer factor.
MatX upsample_chunk(const MatX& chunk, int factor);

}  // namespace mgap
