#pragma once

#include <string>

#include "minadv/attacks.hpp"
#include "minadv/verifier.hpp"

namespace minadv {

struct CertifiedResult {
    int target = -1;
    double delta_lo = 0.0;
    double delta_hi = kInf;
    Vec witness;
    enum class Status { Certified, Timeout } status = Status::Timeout;
    long queries = 0;
    double wall_time_s = 0.0;
    bool lo_attested = false;  // a verifier Robust verdict backs delta_lo
};

// Bisection between a verified-robust lower radius and the best adversarial
// witness, shrinking until the bracket is below the threshold.
CertifiedResult certify(const Network& net, const Vec& x, int target, Norm norm,
                        const Vec& x_init, double threshold, double timeout_s);

struct InstanceTargetResult {
    CertifiedResult cert;
    double seed_distance = kInf;  // distance of the attack seed (cw or fallback)
    bool seeded = false;
    std::string note;  // why the target was skipped, when unseeded
};

// cw-seed one target, falling back to an all-0/all-1 corner that reaches the
// target; unseeded targets are skipped with a reason
InstanceTargetResult certify_one_target(const Network& net, const Vec& x, int target, Norm norm,
                                        const AttackConfig& cw_cfg, double threshold,
                                        double timeout_s);

// all wrong labels of a correctly classified sample, in ascending label order
std::vector<InstanceTargetResult> certify_instance(const Network& net, const Sample& sample,
                                                   Norm norm, const AttackConfig& cw_cfg,
                                                   double threshold, double per_target_timeout_s);

}  // namespace minadv
