#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mgap/episode.hpp"

namespace mgap {

// Conditioning modes: execution cloning, intent cloning, dual-state.
enum class PolicyMode { kS2S, kS2M, kSM2M };

const char* to_string(PolicyMode m);
PolicyMode policy_mode_from_string(const std::string& s);

// One supervised example. mask has exactly k leading ones; the committed
// prefix equals the target's first k steps, then repeats the k-th value.
struct TrainingSample {
    VecX obs;
    MatX target_chunk;      // H x (D+1)
    MatX committed_prefix;  // H x (D+1)
    std::vector<std::uint8_t> mask;
    int k = 0;
};

struct SamplingConfig {
    PolicyMode mode = PolicyMode::kSM2M;
    int horizon = 30;   // H
    int t_obs = 1;
    int k_max = 24;
    bool use_inpainting = true;  // append committed prefix + mask to obs
};

// All stride-1 anchors of one episode; k ~ U{0..K_max} per sample.
// Episodes shorter than T_obs + H yield an empty list.
std::vector<TrainingSample> make_training_samples(const Episode& episode, const SamplingConfig& cfg,
                                                  std::mt19937_64& rng);

// Builds the sample at one (episode, anchor) pair.
TrainingSample make_sample_at(const Episode& episode, int anchor, int k, const SamplingConfig& cfg);

// Number of stride-1 anchors an episode contributes.
int anchor_count(const Episode& episode, const SamplingConfig& cfg);

}  // namespace mgap
