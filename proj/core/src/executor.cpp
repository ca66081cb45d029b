#include "mgap/executor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <limits>
#include <mutex>
#include <thread>

#include "mgap/errors.hpp"
#include "mgap/seeding.hpp"

namespace mgap {

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::kSync: return "sync";
        case Strategy::kNaiveAsync: return "naive_async";
        case Strategy::kEnsemble: return "ensemble";
        case Strategy::kInpaint: return "inpaint";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "sync") return Strategy::kSync;
    if (s == "naive_async") return Strategy::kNaiveAsync;
    if (s == "ensemble") return Strategy::kEnsemble;
    if (s == "inpaint") return Strategy::kInpaint;
    throw ConfigError("unknown strategy: " + s);
}

void LatencyModel::validate() const {
    if (mode == Mode::kFixed) {
        if (k < 0) throw ConfigError("latency: k must be >= 0");
    } else {
        if (jitter_lo < 0 || jitter_hi < jitter_lo)
            throw ConfigError("latency: bad jitter bounds");
    }
}

int LatencyModel::draw(std::mt19937_64& rng) const {
    if (mode == Mode::kFixed) return k;
    std::uniform_int_distribution<int> d(jitter_lo, jitter_hi);
    return d(rng);
}

int committed_horizon(double delta_inf, double dt) {
    if (delta_inf < 0.0 || dt <= 0.0) throw ContractError("committed_horizon: bad arguments");
    return static_cast<int>(std::ceil(delta_inf / dt - 1e-9));
}

const Vec3& IntentBuffer::at(long t) const {
    if (!covers(t)) throw ContractError("IntentBuffer: index outside buffer");
    return entries[static_cast<std::size_t>(t - base)];
}

void IntentBuffer::drop_before(long t) {
    long n = std::min<long>(t - base, static_cast<long>(entries.size()));
    if (n <= 0) return;
    entries.erase(entries.begin(), entries.begin() + n);
    base += n;
}

IntentBuffer splice(const IntentBuffer& buffer, const MatX& new_chunk, long t0, int k) {
    const int h = static_cast<int>(new_chunk.rows());
    if (k < 0 || k > h) throw ContractError("splice: k out of range");
    if (k > 0 && (!buffer.covers(t0 + 1) || !buffer.covers(t0 + k)))
        throw ContractError("splice: buffer does not cover the committed region");

    IntentBuffer out;
    out.base = buffer.base;
    // keep everything up to and including t0 + k bit-identical
    long keep_end = t0 + k;
    for (long t = buffer.base; t <= std::min(keep_end, buffer.horizon_end()); ++t)
        out.entries.push_back(buffer.at(t));
    if (out.entries.empty()) out.base = t0 + k + 1;
    for (int i = k; i < h; ++i) out.entries.push_back(new_chunk.row(i).transpose());
    return out;
}

MatX upsample_chunk(const MatX& chunk, int factor) {
    if (factor <= 1) return chunk;
    const int h = static_cast<int>(chunk.rows());
    MatX out(h * factor, chunk.cols());
    for (int i = 0; i < h; ++i) {
        Eigen::RowVectorXd prev = i == 0 ? chunk.row(0) : chunk.row(i - 1);
        for (int f = 1; f <= factor; ++f) {
            double a = static_cast<double>(f) / factor;
            out.row(i * factor + f - 1) = (1.0 - a) * prev + a * chunk.row(i);
        }
    }
    return out;
}

std::vector<Vec3> Rollout::executed_master() const {
    std::vector<Vec3> v;
    v.reserve(steps.size());
    for (const auto& s : steps) v.push_back(s.intent);
    return v;
}

std::vector<Vec3> Rollout::slave_trace() const {
    std::vector<Vec3> v;
    v.reserve(steps.size());
    for (const auto& s : steps) v.push_back(s.slave);
    return v;
}

namespace {

struct Job {
    long t0 = 0;
    long deliver_at = 0;
    int k_mask = 0;
    MatX chunk;
};

// Rolling observation state shared by all strategies.
struct ObsState {
    std::deque<Vec3> slave_hist;
    std::deque<Vec3> master_hist;

    void push(const Vec3& slave, const Vec3& master, int t_obs) {
        slave_hist.push_back(slave);
        master_hist.push_back(master);
        while (static_cast<int>(slave_hist.size()) > t_obs) slave_hist.pop_front();
        while (static_cast<int>(master_hist.size()) > t_obs) master_hist.pop_front();
    }

    MatX slave_mat(int t_obs) const {
        MatX m(t_obs, kDim + 1);
        for (int i = 0; i < t_obs; ++i) m.row(i) = slave_hist[static_cast<std::size_t>(i)].transpose();
        return m;
    }
    MatX master_mat(int t_obs) const {
        MatX m(t_obs, kDim + 1);
        for (int i = 0; i < t_obs; ++i)
            m.row(i) = master_hist[static_cast<std::size_t>(i)].transpose();
        return m;
    }
};

MatX query_model(const PolicyModel& model, EnvState& env, const ObsState& obs, int k_mask,
                 const IntentBuffer& buffer, long t0, const Vec3& last_intent,
                 std::uint64_t refine_seed, int stride) {
    const PolicyConfig& cfg = model.config;
    const int h = cfg.horizon;
    MatX prefix(h, kDim + 1);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(h), 0);
    Vec3 pad = last_intent;
    for (int i = 0; i < h; ++i) {
        long t = t0 + static_cast<long>(i + 1) * stride;
        if (i < k_mask && buffer.covers(t)) {
            prefix.row(i) = buffer.at(t).transpose();
            pad = buffer.at(t);
        } else {
            prefix.row(i) = pad.transpose();
        }
        if (i < k_mask) mask[static_cast<std::size_t>(i)] = 1;
    }
    VecX v = visual_features(env);
    VecX o = build_observation(cfg.mode, obs.slave_mat(cfg.t_obs), obs.master_mat(cfg.t_obs), v,
                               prefix, mask, cfg.use_inpainting);
    return predict_chunk(model, o, refine_seed);
}

}  // namespace

Rollout run_episode(const EnvParams& params, const TaskSpec& task, const PolicyModel& model,
                    Strategy strategy, const LatencyModel& latency, std::uint64_t seed,
                    const ExecutorOptions& opts) {
    latency.validate();
    const PolicyConfig& cfg = model.config;
    const int h_model = cfg.horizon;
    const int h = h_model * std::max(1, opts.chunk_stride);
    const int t_exec = cfg.t_exec * std::max(1, opts.chunk_stride);
    const int max_t = opts.max_t > 0 ? opts.max_t : task.max_t;

    EnvState env = init_env(params, task, seed);
    std::mt19937_64 lat_rng = make_rng(seed, "latency");

    Rollout ro;
    ObsState obs;
    Vec3 start(task.start_pos.x(), task.start_pos.y(), task.start_grip);
    for (int i = 0; i < cfg.t_obs; ++i) obs.push(start, start, cfg.t_obs);

    IntentBuffer buffer;
    std::vector<Job> inflight;
    std::vector<std::pair<long, MatX>> delivered_chunks;  // ensemble: (t0, chunk)
    Vec3 last_intent = start;
    long last_launch = std::numeric_limits<long>::min();
    long sync_play_until = 0;  // sync: last step covered by the active chunk
    long sync_resume_at = 0;   // sync: first step the fresh chunk plays
    MatX sync_chunk;
    int job_idx = 0;

    int launch_period = t_exec;
    if (opts.adaptive_cadence && strategy != Strategy::kSync) {
        int deficit_free = h - latency.nominal();
        launch_period = std::max(1, std::min(t_exec, deficit_free));
    }

    auto launch = [&](long now) {
        int k_real = latency.draw(lat_rng);
        int stride = std::max(1, opts.chunk_stride);
        int k_mask = 0;
        if (strategy == Strategy::kInpaint)
            k_mask = std::min({(k_real + stride - 1) / stride, cfg.k_max, h_model - 1});
        MatX chunk = query_model(model, env, obs, k_mask, buffer, now, last_intent,
                                 sub_seed(seed, "refine", static_cast<std::uint64_t>(job_idx)),
                                 stride);
        if (stride > 1) chunk = upsample_chunk(chunk, stride);
        Job j{now, now + k_real, k_mask, std::move(chunk)};
        inflight.push_back(std::move(j));
        last_launch = now;
        job_idx++;
        ro.inference_jobs++;
    };

    auto deliver_due = [&](long now) {
        for (auto it = inflight.begin(); it != inflight.end();) {
            if (it->deliver_at > now) {
                ++it;
                continue;
            }
            if (strategy == Strategy::kEnsemble || strategy == Strategy::kNaiveAsync ||
                strategy == Strategy::kInpaint) {
                if (strategy == Strategy::kEnsemble) {
                    delivered_chunks.emplace_back(it->t0, it->chunk);
                } else {
                    // elapsed steps are immutable; splice only the live tail
                    long elapsed = now - it->t0;
                    int k_commit = static_cast<int>(std::min<long>(elapsed, h));
                    if (k_commit < h) {
                        // ensure the committed region exists in the buffer
                        // (starved steps were extended with holds below)
                        bool intact = true;
                        std::vector<Vec3> before;
                        for (long t = it->t0 + 1; t <= it->t0 + k_commit; ++t) {
                            if (!buffer.covers(t)) {
                                buffer.append(last_intent);  // defensive; normally covered
                                if (buffer.entries.size() == 1) buffer.base = t;
                            }
                            before.push_back(buffer.at(t));
                        }
                        IntentBuffer next = splice(buffer, it->chunk, it->t0, k_commit);
                        for (long t = it->t0 + 1; t <= it->t0 + k_commit; ++t) {
                            const Vec3& a = next.at(t);
                            const Vec3& b = before[static_cast<std::size_t>(t - it->t0 - 1)];
                            if (std::memcmp(a.data(), b.data(), sizeof(double) * 3) != 0)
                                intact = false;
                        }
                        SpliceRecord rec{it->t0, k_commit, now, intact};
                        if (!intact) ro.audit_ok = false;
                        ro.splices.push_back(rec);
                        buffer = std::move(next);
                    }
                }
            } else if (strategy == Strategy::kSync) {
                sync_chunk = it->chunk;
                sync_resume_at = now + 1;
                sync_play_until = now + t_exec;
            }
            it = inflight.erase(it);
        }
    };

    // first job observes the initial state
    launch(0);
    deliver_due(0);

    int settle = 0;
    for (long t = 1; t <= max_t; ++t) {
        deliver_due(t - 1);

        // launch cadence (sync launches only after its play window)
        if (strategy == Strategy::kSync) {
            if (inflight.empty() && t > sync_play_until) launch(t - 1);
        } else if (t - 1 - last_launch >= launch_period) {
            launch(t - 1);
        }
        deliver_due(t - 1);

        Vec3 intent;
        bool starved = false;
        switch (strategy) {
            case Strategy::kSync: {
                if (t < sync_resume_at || sync_chunk.rows() == 0) {
                    intent = last_intent;  // frozen while inference runs
                } else {
                    long idx = t - sync_resume_at;
                    if (idx >= sync_chunk.rows()) {
                        intent = last_intent;
                        starved = true;
                    } else {
                        intent = sync_chunk.row(idx).transpose();
                    }
                }
                break;
            }
            case Strategy::kEnsemble: {
                double wsum = 0.0;
                Vec3 acc = Vec3::Zero();
                for (const auto& [t0, chunk] : delivered_chunks) {
                    long idx = t - t0 - 1;
                    if (idx < 0 || idx >= chunk.rows()) continue;
                    double w = std::exp(-0.1 * static_cast<double>(t - t0));
                    acc += w * Vec3(chunk.row(idx).transpose());
                    wsum += w;
                }
                if (wsum > 0.0) {
                    intent = acc / wsum;
                } else {
                    intent = last_intent;
                    starved = true;
                }
                break;
            }
            default: {
                if (buffer.covers(t)) {
                    intent = buffer.at(t);
                } else {
                    intent = last_intent;
                    starved = true;
                    buffer.append(intent);  // extend with the hold so splices stay coherent
                    if (buffer.entries.size() == 1) buffer.base = t;
                }
                break;
            }
        }
        if (starved) ro.starvation_events++;

        StepEvents ev = step(env, MasterCommand::from_vec(intent));
        last_intent = env.last_clamped_cmd;

        RolloutStep rs;
        rs.intent = env.last_clamped_cmd;
        rs.slave = env.robot.measured();
        rs.eps = mismatch(env);
        rs.contact_force = ev.contact_force;
        rs.clamp = ev.clamp_active;
        rs.starved = starved;
        rs.attached = ev.object_attached;
        if (ev.clamp_active) ro.clamp_events++;
        ro.steps.push_back(rs);

        obs.push(rs.slave, rs.intent, cfg.t_obs);
        if (!delivered_chunks.empty() && delivered_chunks.size() > 8)
            delivered_chunks.erase(delivered_chunks.begin(),
                                   delivered_chunks.end() - 8);
        buffer.drop_before(t - 1);

        if (env.task_done() && ++settle >= 5) break;
    }
    ro.final_env = env;
    return ro;
}

double jerk_metric(const std::vector<Vec3>& slave_trace, double dt) {
    if (slave_trace.size() < 4) throw ContractError("jerk_metric: trace too short");
    double total = 0.0;
    const double denom = dt * dt * dt;
    for (int a = 0; a < kDim; ++a) {
        double acc = 0.0;
        int n = 0;
        // third difference centered between i and i+1; exact for cubics
        for (std::size_t i = 1; i + 2 < slave_trace.size(); ++i) {
            double j = (-slave_trace[i - 1][a] + 3.0 * slave_trace[i][a] -
                        3.0 * slave_trace[i + 1][a] + slave_trace[i + 2][a]) /
                       denom;
            acc += j * j;
            n++;
        }
        total += std::sqrt(acc / std::max(1, n));
    }
    return total;
}

double jerk_metric(const Rollout& rollout, double dt) {
    return jerk_metric(rollout.slave_trace(), dt);
}

Rollout run_episode_wallclock(const EnvParams& params, const TaskSpec& task,
                              const PolicyModel& model, Strategy strategy, std::uint64_t seed,
                              int max_t) {
    // One sim ticker + one inference worker; splices land between ticks
    // through a single-producer single-consumer slot.
    const PolicyConfig& cfg = model.config;
    const int h = cfg.horizon;
    if (max_t <= 0) max_t = task.max_t;

    EnvState env = init_env(params, task, seed);
    Rollout ro;
    ObsState obs;
    Vec3 start(task.start_pos.x(), task.start_pos.y(), task.start_grip);
    for (int i = 0; i < cfg.t_obs; ++i) obs.push(start, start, cfg.t_obs);

    IntentBuffer buffer;
    Vec3 last_intent = start;

    struct Request {
        long t0;
        int k_mask;
        VecX obs_vec;
        std::uint64_t refine_seed;
    };
    struct Result {
        long t0;
        int k_mask;
        MatX chunk;
    };
    std::mutex mu;
    std::condition_variable cv;
    std::optional<Request> req;
    std::optional<Result> res;
    std::atomic<bool> stop{false};

    std::thread worker([&] {
        while (true) {
            Request r;
            {
                std::unique_lock<std::mutex> lk(mu);
                cv.wait(lk, [&] { return stop.load() || req.has_value(); });
                if (stop.load()) return;
                r = *req;
                req.reset();
            }
            MatX chunk = predict_chunk(model, r.obs_vec, r.refine_seed);
            {
                std::lock_guard<std::mutex> lk(mu);
                res = Result{r.t0, r.k_mask, std::move(chunk)};
            }
        }
    });

    auto make_request = [&](long now) {
        int k_mask = strategy == Strategy::kInpaint ? std::min(cfg.k_max, h - 1) : 0;
        MatX prefix(h, kDim + 1);
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(h), 0);
        Vec3 pad = last_intent;
        for (int i = 0; i < h; ++i) {
            long t = now + 1 + i;
            if (i < k_mask && buffer.covers(t)) {
                prefix.row(i) = buffer.at(t).transpose();
                pad = buffer.at(t);
            } else {
                prefix.row(i) = pad.transpose();
            }
            if (i < k_mask) mask[static_cast<std::size_t>(i)] = 1;
        }
        VecX v = visual_features(env);
        VecX o = build_observation(cfg.mode, obs.slave_mat(cfg.t_obs), obs.master_mat(cfg.t_obs),
                                   v, prefix, mask, cfg.use_inpainting);
        std::lock_guard<std::mutex> lk(mu);
        req = Request{now, k_mask, std::move(o),
                      sub_seed(seed, "refine", static_cast<std::uint64_t>(ro.inference_jobs))};
        cv.notify_one();
        ro.inference_jobs++;
    };

    make_request(0);
    int settle = 0;
    for (long t = 1; t <= max_t; ++t) {
        // collect a finished chunk, if any, at the tick boundary
        {
            std::lock_guard<std::mutex> lk(mu);
            if (res.has_value()) {
                long elapsed = t - 1 - res->t0;
                int k_commit = static_cast<int>(std::clamp<long>(elapsed, 0, h));
                if (k_commit < h) {
                    for (long s = res->t0 + 1; s <= res->t0 + k_commit; ++s)
                        if (!buffer.covers(s)) {
                            buffer.append(last_intent);
                            if (buffer.entries.size() == 1) buffer.base = s;
                        }
                    buffer = splice(buffer, res->chunk, res->t0, k_commit);
                    ro.splices.push_back({res->t0, k_commit, t - 1, true});
                }
                res.reset();
            }
        }
        bool idle;
        {
            std::lock_guard<std::mutex> lk(mu);
            idle = !req.has_value();
        }
        if (idle && !buffer.covers(t + cfg.t_exec)) make_request(t - 1);

        Vec3 intent;
        if (buffer.covers(t)) {
            intent = buffer.at(t);
        } else {
            intent = last_intent;
            ro.starvation_events++;
            buffer.append(intent);
            if (buffer.entries.size() == 1) buffer.base = t;
        }
        StepEvents ev = step(env, MasterCommand::from_vec(intent));
        last_intent = env.last_clamped_cmd;
        RolloutStep rs;
        rs.intent = env.last_clamped_cmd;
        rs.slave = env.robot.measured();
        rs.eps = mismatch(env);
        rs.contact_force = ev.contact_force;
        ro.steps.push_back(rs);
        obs.push(rs.slave, rs.intent, cfg.t_obs);
        buffer.drop_before(t - 1);
        if (env.task_done() && ++settle >= 5) break;
    }
    stop.store(true);
    cv.notify_all();
    worker.join();
    ro.final_env = env;
    return ro;
}

}  // namespace mgap
