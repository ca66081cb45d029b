#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mgap/nn.hpp"
#include "mgap/sampling.hpp"

namespace mgap {

enum class HeadKind { kRegression, kRefinement };

struct PolicyConfig {
    PolicyMode mode = PolicyMode::kSM2M;
    int horizon = 30;  // H, prediction steps
    int t_exec = 15;   // steps executed per inference
    int t_obs = 1;     // proprioceptive history length
    int k_max = 24;    // randomized-context upper bound
    bool use_inpainting = true;
    std::vector<int> hidden = {256, 256};
    double lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.95;
    double weight_decay = 1e-10;
    int epochs = 12;
    int batch = 256;
    std::uint64_t seed = 0;
    HeadKind head = HeadKind::kRegression;
    int refine_steps = 10;  // Euler steps of the refinement head
    int max_samples = 48000;  // cap on anchors drawn per epoch
    int visual_dim = 0;       // set from the task

    int chunk_dim() const { return horizon * (kDim + 1); }
    int obs_dim() const;
    void validate() const;

    SamplingConfig sampling() const {
        return {mode, horizon, t_obs, k_max, use_inpainting};
    }
};

struct NormStats {
    VecX obs_mean, obs_std;
    VecX tgt_mean, tgt_std;

    VecX norm_obs(const VecX& o) const { return (o - obs_mean).cwiseQuotient(obs_std); }
    VecX denorm_tgt(const VecX& t) const { return t.cwiseProduct(tgt_std) + tgt_mean; }
    VecX norm_tgt(const VecX& t) const { return (t - tgt_mean).cwiseQuotient(tgt_std); }
};

struct PolicyModel {
    PolicyConfig config;
    NormStats norm;
    Mlp net;
    // Largest consecutive-step intent delta seen in training; the executor's
    // handover-continuity audit is measured against this.
    double max_step_delta = 0.0;

    void save(const std::string& path) const;
    static PolicyModel load(const std::string& path);
};

// Mode-dependent observation vector. Histories are T_obs x (D+1), most
// recent last. When inpainting is enabled, each committed-prefix step is
// paired with the current slave state, then the 0/1 mask is appended.
VecX build_observation(PolicyMode mode, const MatX& slave_hist, const MatX& master_hist,
                       const VecX& visual, const MatX& committed_prefix,
                       const std::vector<std::uint8_t>& mask, bool use_inpainting);

// Masked MSE: mean over inpainted steps (mask == 0) and dimensions; 0 when
// every step is committed. Operates in normalized units during training.
double chunk_loss(const MatX& pred, const MatX& target, const std::vector<std::uint8_t>& mask);

// Forward pass (regression) or N-step Euler refinement from a seeded
// standard-normal draw. Output is de-normalized, H x (D+1).
MatX predict_chunk(const PolicyModel& model, const VecX& obs, std::uint64_t refine_seed = 0);

struct TrainReport {
    std::vector<double> loss_curve;  // per epoch
    int samples_used = 0;
    int skipped_episodes = 0;
};

// Gradient-descent training with analytic backprop. Norm stats come from the
// training set before optimization; deterministic given config.seed.
TrainReport train(PolicyModel& model, const std::vector<TrainingSample>& samples);

// Episode-backed training: anchors are re-drawn (fresh k) every epoch.
TrainReport train_on_episodes(PolicyModel& model, const std::vector<Episode>& episodes);

// Initializes net and norm stats for the observation/chunk dimensionality.
PolicyModel init_policy(const PolicyConfig& cfg);

// True when the curve trends down (first-quartile mean > last-quartile mean).
bool loss_trend_ok(const std::vector<double>& curve);

}  // namespace mgap
