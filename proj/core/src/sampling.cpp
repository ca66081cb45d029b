#include "mgap/sampling.hpp"

#include "mgap/errors.hpp"
#include "mgap/policy.hpp"

namespace mgap {

const char* to_string(PolicyMode m) {
    switch (m) {
        case PolicyMode::kS2S: return "S2S";
        case PolicyMode::kS2M: return "S2M";
        case PolicyMode::kSM2M: return "SM2M";
    }
    return "?";
}

PolicyMode policy_mode_from_string(const std::string& s) {
    if (s == "S2S" || s == "s2s") return PolicyMode::kS2S;
    if (s == "S2M" || s == "s2m") return PolicyMode::kS2M;
    if (s == "SM2M" || s == "sm2m") return PolicyMode::kSM2M;
    throw ConfigError("unknown policy mode: " + s);
}

int anchor_count(const Episode& episode, const SamplingConfig& cfg) {
    int t = static_cast<int>(episode.steps.size());
    return std::max(0, t - cfg.t_obs - cfg.horizon + 1);
}

TrainingSample make_sample_at(const Episode& ep, int anchor, int k, const SamplingConfig& cfg) {
    const int h = cfg.horizon;
    const int t_obs = cfg.t_obs;
    const int dim = kDim + 1;
    if (anchor < t_obs - 1 || anchor + h >= static_cast<int>(ep.steps.size()))
        throw ContractError("make_sample_at: anchor out of range");
    if (k < 0 || k > h) throw ContractError("make_sample_at: k out of range");

    TrainingSample s;
    s.k = k;
    MatX slave_hist(t_obs, dim), master_hist(t_obs, dim);
    for (int i = 0; i < t_obs; ++i) {
        const EpisodeStep& st = ep.steps[anchor - t_obs + 1 + i];
        slave_hist.row(i) = st.slave_state.transpose();
        master_hist.row(i) = st.master_cmd.transpose();
    }
    s.target_chunk.resize(h, dim);
    for (int i = 0; i < h; ++i) {
        const EpisodeStep& st = ep.steps[anchor + 1 + i];
        s.target_chunk.row(i) = (cfg.mode == PolicyMode::kS2S ? st.slave_state : st.master_cmd)
                                    .transpose();
    }
    s.committed_prefix.resize(h, dim);
    Vec3 pad = k > 0 ? ep.steps[anchor + k].master_cmd : ep.steps[anchor].master_cmd;
    for (int i = 0; i < h; ++i) {
        if (i < k)
            s.committed_prefix.row(i) = ep.steps[anchor + 1 + i].master_cmd.transpose();
        else
            s.committed_prefix.row(i) = pad.transpose();
    }
    s.mask.assign(static_cast<std::size_t>(h), 0);
    for (int i = 0; i < k; ++i) s.mask[static_cast<std::size_t>(i)] = 1;

    s.obs = build_observation(cfg.mode, slave_hist, master_hist, ep.steps[anchor].visual,
                              s.committed_prefix, s.mask, cfg.use_inpainting);
    return s;
}

std::vector<TrainingSample> make_training_samples(const Episode& episode,
                                                  const SamplingConfig& cfg,
                                                  std::mt19937_64& rng) {
    if (cfg.k_max < 0 || cfg.k_max >= cfg.horizon)
        throw ContractError("make_training_samples: need 0 <= K_max < H");
    std::vector<TrainingSample> out;
    int n = anchor_count(episode, cfg);
    if (n <= 0) return out;  // too short; caller counts the skip
    out.reserve(static_cast<std::size_t>(n));
    std::uniform_int_distribution<int> kdist(0, cfg.k_max);
    for (int a = cfg.t_obs - 1; a + cfg.horizon < static_cast<int>(episode.steps.size()); ++a)
        out.push_back(make_sample_at(episode, a, kdist(rng), cfg));
    return out;
}

}  // namespace mgap
