#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgap/oracle.hpp"
#include "mgap/sim.hpp"

namespace mgap {

// One recorded control tick. master_cmd is the post-clamp issued intent;
// slave_state is the measured pose after the same tick. ground_truth_force
// is analysis-only and never enters policy observations.
struct EpisodeStep {
    int t = 0;
    Vec3 master_cmd = Vec3::Zero();
    Vec3 slave_state = Vec3::Zero();
    Vec2 slave_vel = Vec2::Zero();
    VecX visual;
    Vec2 ground_truth_force = Vec2::Zero();
    std::uint8_t flags = 0;  // bit 0 contact, 1 attached, 2 dropped, 3 released,
                             // 4 clamp, 5 button latched
    Vec2 object_pos = Vec2::Zero();

    bool contact() const { return flags & 1; }
    bool attached() const { return flags & 2; }
};

struct EpisodeHeader {
    std::string task;
    std::uint64_t seed = 0;
    std::uint64_t env_params_digest = 0;
    std::uint64_t operator_params_digest = 0;
    int length = 0;
    double dt = 1.0 / 60.0;
    bool success = false;
    int intervention_step = -1;  // -1 when none fired
};

struct Episode {
    EpisodeHeader header;
    std::vector<EpisodeStep> steps;
};

// Rolls the scripted operator closed loop until success or max_t.
// An intervention step is scheduled inside the operator window and applied
// through apply_intervention (which may decline).
Episode record_episode(const EnvParams& params, const TaskSpec& task, const OperatorParams& op,
                       std::uint64_t seed, int max_t, bool interventions_enabled = true);

// JSONL, one episode per line; floating values round-trip bit-exact.
void save_episodes(const std::string& path, const std::vector<Episode>& episodes);
std::vector<Episode> load_episodes(const std::string& path);

}  // namespace mgap
