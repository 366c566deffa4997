#pragma once

#include <functional>

#include "minadv/certifier.hpp"
#include "minadv/data_io.hpp"
#include "minadv/report.hpp"

namespace minadv {

struct SuiteConfig {
    std::string net_id;
    Norm norm = Norm::LINF;
    double threshold = 1e-3;
    double per_target_timeout_s = 600.0;
    int workers = 1;
    AttackConfig cw;
};

// first n test-set indices whose prediction matches the label
std::vector<int> select_correct_images(const Network& net, const Dataset& test, int n);

// Certifies every (image, target) pair not already present in `existing`.
// Tasks run on a worker pool; the returned records are merged with the
// existing ones and ordered by key, independent of completion order. The
// sink, when set, receives each fresh record as it completes.
std::vector<ExperimentRecord> run_certification_suite(
    const Network& net, const Dataset& test, const std::vector<int>& image_ids,
    const SuiteConfig& cfg, const std::vector<ExperimentRecord>& existing,
    const std::function<void(const ExperimentRecord&)>& sink = {});

}  // namespace minadv
