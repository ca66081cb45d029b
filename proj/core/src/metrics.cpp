#include "mgap/metrics.hpp"

#include <cmath>

#include "mgap/errors.hpp"

namespace mgap {

const char* to_string(FailureTag t) {
    switch (t) {
        case FailureTag::kNone: return "none";
        case FailureTag::kSteadyStateError: return "steady_state_error";
        case FailureTag::kZeroMarginSlip: return "zero_margin_slip";
        case FailureTag::kMissedGrasp: return "missed_grasp";
        case FailureTag::kJam: return "jam";
        case FailureTag::kWrongZone: return "wrong_zone";
        case FailureTag::kOutOfBand: return "out_of_band";
        case FailureTag::kMissedBin: return "missed_bin";
        case FailureTag::kTimeout: return "timeout";
    }
    return "?";
}

void Metrics::add(const EpisodeResult& r) {
    n++;
    success += r.success ? 1 : 0;
    grasp += r.grasp ? 1 : 0;
    place += r.place ? 1 : 0;
    sort += r.sort ? 1 : 0;
    strict += r.strict_ok ? 1 : 0;
    effective += r.effective_ok ? 1 : 0;
    mean_jerk += (r.jerk - mean_jerk) / n;
    clamp_events += r.clamp_events;
    starvation_events += r.starvation_events;
    mean_eps_contact += (r.mean_eps_contact - mean_eps_contact) / n;
    mean_eps_free += (r.mean_eps_free - mean_eps_free) / n;
    audit_ok = audit_ok && r.audit_ok;
    if (r.tag != FailureTag::kNone) failure_tags[to_string(r.tag)]++;
}

void Metrics::validate() const {
    if (!(sort <= place && place <= grasp))
        throw ContractError("Metrics: stage counts must nest (sort <= place <= grasp)");
}

EpisodeResult score_rollout(const TaskSpec& task, const Rollout& ro, double dt) {
    EpisodeResult r;
    const EnvState& env = ro.final_env;
    r.clamp_events = ro.clamp_events;
    r.starvation_events = ro.starvation_events;
    r.audit_ok = ro.audit_ok;
    if (ro.steps.size() >= 4) r.jerk = jerk_metric(ro, dt);

    double eps_c = 0.0, eps_f = 0.0;
    int nc = 0, nf = 0;
    for (const auto& s : ro.steps) {
        double e = s.eps.head<2>().norm();
        if (s.contact_force.norm() > 1e-9) {
            eps_c += e;
            nc++;
        } else {
            eps_f += e;
            nf++;
        }
    }
    r.mean_eps_contact = nc ? eps_c / nc : 0.0;
    r.mean_eps_free = nf ? eps_f / nf : 0.0;

    switch (task.kind) {
        case TaskKind::kButton: {
            r.success = env.button_latched;
            if (!r.success) {
                // pressed against the wall but never latched: steady-state error
                bool touched = false;
                for (const auto& s : ro.steps)
                    if (std::abs(s.contact_force.x()) > 0.5) touched = true;
                r.tag = touched ? FailureTag::kSteadyStateError : FailureTag::kTimeout;
            }
            break;
        }
        case TaskKind::kWipe: {
            r.coverage = env.wipe_coverage();
            r.strict_ok = r.coverage >= task.strict_frac;
            r.effective_ok = r.coverage >= task.effective_frac;
            r.success = r.strict_ok;
            if (!r.success)
                r.tag = r.coverage > 0.05 ? FailureTag::kOutOfBand : FailureTag::kTimeout;
            break;
        }
        case TaskKind::kBlindSlot: {
            r.success = env.inserted && !env.jammed;
            if (!r.success) r.tag = env.jammed ? FailureTag::kJam : FailureTag::kTimeout;
            break;
        }
        case TaskKind::kConveyorSort: {
            const ObjectState& o = env.object;
            r.grasp = o.was_attached;
            bool landed = o.mode == ObjectMode::kLanded;
            r.place = r.grasp && landed && o.landed_x >= task.zone_x_lo &&
                      o.landed_x <= task.zone_x_hi;
            bool correct = task.object_is_heavy ? o.landed_x >= task.zone_divider
                                                : o.landed_x < task.zone_divider;
            r.sort = r.place && correct;
            r.success = r.sort;
            if (!r.grasp)
                r.tag = FailureTag::kMissedGrasp;
            else if (!r.place) {
                bool dropped_early = landed && o.landed_x < task.zone_x_lo;
                r.tag = dropped_early ? FailureTag::kZeroMarginSlip : FailureTag::kTimeout;
            } else if (!r.sort)
                r.tag = FailureTag::kWrongZone;
            // while holding, vertical mismatch encodes the payload
            double peak = 0.0;
            for (const auto& s : ro.steps)
                if (s.attached) peak = std::max(peak, std::abs(s.eps[kAxisZ]));
            r.peak_eps_z_lift = peak;
            break;
        }
        case TaskKind::kToss: {
            const ObjectState& o = env.object;
            r.grasp = o.was_attached;
            bool landed = o.mode == ObjectMode::kLanded;
            r.success = landed && o.landed_x >= task.bin_x0 && o.landed_x <= task.bin_x1;
            if (!r.success)
                r.tag = !r.grasp ? FailureTag::kMissedGrasp
                                 : (landed ? FailureTag::kMissedBin : FailureTag::kTimeout);
            break;
        }
        case TaskKind::kCalibrationWall:
            r.success = true;
            break;
    }
    return r;
}

}  // namespace mgap
