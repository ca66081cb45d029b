#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mgap/executor.hpp"
#include "mgap/oracle.hpp"
#include "mgap/policy.hpp"
#include "mgap/task.hpp"
#include "mgap/toml.hpp"

namespace mgap {

// Everything a pipeline run needs. Parsing is strict: unknown keys are
// rejected so a typo cannot silently change the physics.
struct RunConfig {
    std::string data_dir = "data";
    std::string model_dir = "models";
    std::string report_dir = "report";
    std::uint64_t master_seed = 1234;
    int episodes_per_task = 200;
    int eval_seeds = 50;
    int threads = 0;  // 0 = hardware concurrency
    bool include_failed_episodes = false;
    bool inject_mass_visual = false;  // diagnostic: leak mass into vision

    EnvParams env;
    OperatorParams op;
    PolicyConfig policy;  // task-independent base; per-task fields set later
    LatencyModel latency;
    Strategy strategy = Strategy::kInpaint;

    std::map<std::string, TaskSpec> tasks;  // by kind name

    const TaskSpec& task(const std::string& name) const;

    // Task-appropriate policy config: quasi-static tasks observe one step and
    // skip inpainting features; dynamic tasks take the 9-step history and the
    // randomized-context mask.
    PolicyConfig policy_for(TaskKind kind, PolicyMode mode) const;

    static RunConfig defaults();
    static RunConfig from_toml(const toml::Table& t);
    static RunConfig from_file(const std::string& path);
};

bool task_is_dynamic(TaskKind kind);

// Writes the documented defaults as a TOML file.
std::string default_config_toml();

}  // namespace mgap
