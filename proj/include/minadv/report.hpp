#pragma once

#include <iosfwd>
#include <string>

#include "minadv/nn.hpp"

namespace minadv {

struct ExperimentRecord {
    std::string net_id;
    Norm norm = Norm::LINF;
    int image_id = 0;
    int source_label = 0;
    int target_label = 0;
    double cw_distance = kInf;
    double delta_lo = 0.0;
    double delta_hi = kInf;
    std::string status;  // certified | timeout | unseeded
    double wall_time_s = 0.0;
    long verifier_queries = 0;
};

struct GapStats {
    double mean_cw = 0.0;
    double mean_min = 0.0;
    double mean_gap_percent = 0.0;       // mean of per-record 100*(cw-min)/min
    double mean_gap_percent_alt = 0.0;   // mean of per-record 100*(cw-min)/cw
    int count = 0;
};

// terminated_only keeps certified records; otherwise every seeded record
// counts with its last delta_hi
GapStats attack_gap_stats(const std::vector<ExperimentRecord>& records, bool terminated_only);

struct DegradedInstance {
    int image_id = 0;
    int target_label = 0;
    double base = 0.0;
    double hardened = 0.0;
    double percent = 0.0;  // 100*(base-hardened)/base
};

struct DefenseGain {
    double mean_base = 0.0;
    double mean_hardened = 0.0;
    double gain_percent = 0.0;  // 100*mean_hardened/mean_base
    std::vector<DegradedInstance> degraded;
    int count = 0;
};

// comparison on the (image, target) keys certified in both record sets
DefenseGain defense_gain(const std::vector<ExperimentRecord>& base,
                         const std::vector<ExperimentRecord>& hardened);

// hidden units whose pre-activation region (>=0 linear vs <0 saturated)
// differs between the two inputs
int nonlinearity(const Network& net, const Vec& x, const Vec& x2);

// per-(net,norm) blocks with certified-only and all-experiment sub-rows
std::string emit_tables(const std::vector<ExperimentRecord>& records);
std::string emit_defense_table(const std::vector<ExperimentRecord>& base,
                               const std::vector<ExperimentRecord>& hardened);

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records);
void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records);
std::string record_csv_line(const ExperimentRecord& r);
const char* records_csv_header();
std::vector<ExperimentRecord> read_records_csv(const std::string& path);

// 8-bit binary PGM debug dump of a pixel vector
void write_pgm(const std::string& path, const Vec& pixels, int width, int height);

}  // namespace minadv
