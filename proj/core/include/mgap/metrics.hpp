#pragma once

#include <map>
#include <string>
#include <vector>

#include "mgap/executor.hpp"

namespace mgap {

// Failure taxonomy used by the evaluation tables.
enum class FailureTag {
    kNone,
    kSteadyStateError,  // contact reached but force shy of the requirement
    kZeroMarginSlip,    // grasped, then lost under load
    kMissedGrasp,
    kJam,
    kWrongZone,
    kOutOfBand,  // wipe force/coverage shortfall
    kMissedBin,
    kTimeout,
};

const char* to_string(FailureTag t);

struct EpisodeResult {
    bool success = false;
    bool grasp = false;
    bool place = false;
    bool sort = false;
    double coverage = 0.0;  // wipe: in-band waypoint fraction
    bool strict_ok = false;
    bool effective_ok = false;
    FailureTag tag = FailureTag::kNone;
    double jerk = 0.0;
    int clamp_events = 0;
    int starvation_events = 0;
    double mean_eps_contact = 0.0;
    double mean_eps_free = 0.0;
    bool audit_ok = true;
    double peak_eps_z_lift = 0.0;  // conveyor: |eps_z| peak while holding
};

struct Metrics {
    int n = 0;
    int success = 0;
    int grasp = 0, place = 0, sort = 0;  // staged counts, sort <= place <= grasp
    int strict = 0, effective = 0;       // wipe
    double mean_jerk = 0.0;
    int clamp_events = 0;
    int starvation_events = 0;
    double mean_eps_contact = 0.0;
    double mean_eps_free = 0.0;
    bool audit_ok = true;
    std::map<std::string, int> failure_tags;

    double success_rate() const { return n ? static_cast<double>(success) / n : 0.0; }
    double sort_accuracy() const { return place ? static_cast<double>(sort) / place : 0.0; }
    void add(const EpisodeResult& r);
    void validate() const;  // stage nesting
};

// Task success predicates applied to a finished rollout.
EpisodeResult score_rollout(const TaskSpec& task, const Rollout& rollout, double dt);

}  // namespace mgap
