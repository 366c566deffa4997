#include "minadv/runner.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

namespace minadv {

std::vector<int> select_correct_images(const Network& net, const Dataset& test, int n) {
    std::vector<int> ids;
    for (int i = 0; i < static_cast<int>(test.samples.size()) && static_cast<int>(ids.size()) < n;
         ++i) {
        const Sample& s = test.samples[i];
        if (forward(net, s.pixels).label == s.label) ids.push_back(i);
    }
    return ids;
}

std::vector<ExperimentRecord> run_certification_suite(
    const Network& net, const Dataset& test, const std::vector<int>& image_ids,
    const SuiteConfig& cfg, const std::vector<ExperimentRecord>& existing,
    const std::function<void(const ExperimentRecord&)>& sink) {
    std::set<std::pair<int, int>> done;
    for (const ExperimentRecord& r : existing) {
        if (r.net_id == cfg.net_id && r.norm == cfg.norm) {
            done.insert({r.image_id, r.target_label});
        }
    }

    struct Task {
        int image_id;
        int target;
    };
    std::vector<Task> tasks;
    for (int id : image_ids) {
        const Sample& s = test.samples[id];
        for (int t = 0; t < net.num_classes(); ++t) {
            if (t == s.label) continue;
            if (done.count({id, t})) continue;
            tasks.push_back({id, t});
        }
    }

    std::vector<ExperimentRecord> fresh(tasks.size());
    std::atomic<size_t> next{0};
    std::mutex sink_mu;
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            const Sample& s = test.samples[task.image_id];
            InstanceTargetResult r =
                certify_one_target(net, s.pixels, task.target, cfg.norm, cfg.cw, cfg.threshold,
                                   cfg.per_target_timeout_s);
            ExperimentRecord rec;
            rec.net_id = cfg.net_id;
            rec.norm = cfg.norm;
            rec.image_id = task.image_id;
            rec.source_label = s.label;
            rec.target_label = task.target;
            if (r.seeded) {
                rec.cw_distance = r.seed_distance;
                rec.delta_lo = r.cert.delta_lo;
                rec.delta_hi = r.cert.delta_hi;
                rec.status = r.cert.status == CertifiedResult::Status::Certified ? "certified"
                                                                                 : "timeout";
                rec.wall_time_s = r.cert.wall_time_s;
                rec.verifier_queries = r.cert.queries;
            } else {
                rec.status = "unseeded";
            }
            fresh[i] = rec;
            if (sink) {
                std::lock_guard<std::mutex> lock(sink_mu);
                sink(rec);
            }
        }
    };

    int workers = std::max(1, cfg.workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::vector<ExperimentRecord> all = existing;
    all.insert(all.end(), fresh.begin(), fresh.end());
    std::stable_sort(all.begin(), all.end(),
                     [](const ExperimentRecord& a, const ExperimentRecord& b) {
                         return std::tie(a.net_id, a.image_id, a.target_label) <
                                std::tie(b.net_id, b.image_id, b.target_label);
                     });
    return all;
}

}  // namespace minadv
