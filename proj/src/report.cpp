#include "minadv/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace minadv {

GapStats attack_gap_stats(const std::vector<ExperimentRecord>& records, bool terminated_only) {
    GapStats s;
    for (const ExperimentRecord& r : records) {
        if (r.status == "unseeded") continue;
        if (terminated_only && r.status != "certified") continue;
        s.mean_cw += r.cw_distance;
        s.mean_min += r.delta_hi;
        s.mean_gap_percent += 100.0 * (r.cw_distance - r.delta_hi) / r.delta_hi;
        s.mean_gap_percent_alt += 100.0 * (r.cw_distance - r.delta_hi) / r.cw_distance;
        ++s.count;
    }
    if (s.count == 0) throw std::invalid_argument("attack_gap_stats: empty selection");
    s.mean_cw /= s.count;
    s.mean_min /= s.count;
    s.mean_gap_percent /= s.count;
    s.mean_gap_percent_alt /= s.count;
    return s;
}

DefenseGain defense_gain(const std::vector<ExperimentRecord>& base,
                         const std::vector<ExperimentRecord>& hardened) {
    std::map<std::pair<int, int>, const ExperimentRecord*> base_keys, hard_keys;
    for (const ExperimentRecord& r : base) base_keys[{r.image_id, r.target_label}] = &r;
    for (const ExperimentRecord& r : hardened) hard_keys[{r.image_id, r.target_label}] = &r;

    bool any_shared = false;
    for (const auto& [k, v] : base_keys) {
        if (hard_keys.count(k)) {
            any_shared = true;
            break;
        }
    }
    if (!any_shared) throw std::invalid_argument("defense_gain: record sets share no keys");

    DefenseGain g;
    for (const auto& [k, b] : base_keys) {
        auto it = hard_keys.find(k);
        if (it == hard_keys.end()) continue;
        const ExperimentRecord* h = it->second;
        if (b->status != "certified" || h->status != "certified") continue;
        g.mean_base += b->delta_hi;
        g.mean_hardened += h->delta_hi;
        ++g.count;
        if (h->delta_hi < b->delta_hi) {
            g.degraded.push_back({k.first, k.second, b->delta_hi, h->delta_hi,
                                  100.0 * (b->delta_hi - h->delta_hi) / b->delta_hi});
        }
    }
    if (g.count == 0) throw std::invalid_argument("defense_gain: no instance certified on both");
    g.mean_base /= g.count;
    g.mean_hardened /= g.count;
    g.gain_percent = 100.0 * g.mean_hardened / g.mean_base;
    return g;
}

int nonlinearity(const Network& net, const Vec& x, const Vec& x2) {
    Trace a = eval_trace(net, x);
    Trace b = eval_trace(net, x2);
    int flips = 0;
    for (int l = 0; l < net.num_hidden_layers(); ++l) {
        for (size_t i = 0; i < a.pre[l].size(); ++i) {
            bool la = a.pre[l][i] >= 0.0;  // linear region, 0 included
            bool lb = b.pre[l][i] >= 0.0;
            if (la != lb) ++flips;
        }
    }
    return flips;
}

static std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

static void emit_group(std::ostringstream& out, const std::string& net_id, Norm norm,
                       const std::vector<ExperimentRecord>& group) {
    int total = 0, certified = 0, unseeded = 0;
    for (const ExperimentRecord& r : group) {
        if (r.status == "unseeded") {
            ++unseeded;
            continue;
        }
        ++total;
        if (r.status == "certified") ++certified;
    }
    out << "== net " << net_id << ", " << norm_name(norm) << " ==\n";
    out << "  points      cw-mean    min-mean   gap%       gap%(alt)\n";
    if (certified > 0) {
        GapStats s = attack_gap_stats(group, true);
        out << "  " << certified << "/" << total + unseeded << "      " << fmt(s.mean_cw)
            << "    " << fmt(s.mean_min) << "    " << fmt(s.mean_gap_percent) << "    "
            << fmt(s.mean_gap_percent_alt) << "\n";
    } else {
        out << "  0/" << total + unseeded << "      -\n";
    }
    if (total > 0) {
        GapStats s = attack_gap_stats(group, false);
        out << "  " << total << "/" << total + unseeded << "      " << fmt(s.mean_cw) << "    "
            << fmt(s.mean_min) << "    " << fmt(s.mean_gap_percent) << "    "
            << fmt(s.mean_gap_percent_alt) << "\n";
    }
    if (unseeded > 0) out << "  unseeded: " << unseeded << "\n";
}

std::string emit_tables(const std::vector<ExperimentRecord>& records) {
    std::map<std::pair<std::string, int>, std::vector<ExperimentRecord>> groups;
    for (const ExperimentRecord& r : records) {
        groups[{r.net_id, static_cast<int>(r.norm)}].push_back(r);
    }
    std::ostringstream out;
    for (auto& [key, group] : groups) {
        std::stable_sort(group.begin(), group.end(),
                         [](const ExperimentRecord& a, const ExperimentRecord& b) {
                             return std::tie(a.image_id, a.target_label) <
                                    std::tie(b.image_id, b.target_label);
                         });
        emit_group(out, key.first, static_cast<Norm>(key.second), group);
    }
    return out.str();
}

std::string emit_defense_table(const std::vector<ExperimentRecord>& base,
                               const std::vector<ExperimentRecord>& hardened) {
    DefenseGain g = defense_gain(base, hardened);
    std::ostringstream out;
    out << "== defense comparison (instances certified on both nets) ==\n";
    out << "  points    base-mean   hardened-mean   gain%\n";
    out << "  " << g.count << "/" << g.count << "     " << fmt(g.mean_base) << "      "
        << fmt(g.mean_hardened) << "          " << fmt(g.gain_percent) << "\n";
    out << "  degraded: " << g.degraded.size() << "\n";
    for (const DegradedInstance& d : g.degraded) {
        out << "    image " << d.image_id << " target " << d.target_label << ": "
            << fmt(d.base) << " -> " << fmt(d.hardened) << " (" << fmt(d.percent) << "%)\n";
    }
    return out.str();
}

const char* records_csv_header() {
    return "net_id,norm,image_id,source_label,target_label,cw_distance,delta_lo,delta_hi,"
           "status,wall_time_s,verifier_queries";
}

static std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string record_csv_line(const ExperimentRecord& r) {
    std::ostringstream out;
    out << r.net_id << ',' << norm_name(r.norm) << ',' << r.image_id << ',' << r.source_label
        << ',' << r.target_label << ',' << fmt17(r.cw_distance) << ',' << fmt17(r.delta_lo)
        << ',' << fmt17(r.delta_hi) << ',' << r.status << ',' << fmt17(r.wall_time_s) << ','
        << r.verifier_queries;
    return out.str();
}

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
    out << records_csv_header() << '\n';
    for (const ExperimentRecord& r : records) out << record_csv_line(r) << '\n';
}

void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot write " + path);
    write_records_csv(f, records);
}

std::vector<ExperimentRecord> read_records_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != records_csv_header()) {
        throw FormatError(path + ": bad records header");
    }
    std::vector<ExperimentRecord> records;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        ExperimentRecord r;
        auto next = [&]() {
            if (!std::getline(ss, field, ',')) {
                throw FormatError(path + ": truncated record line");
            }
            return field;
        };
        r.net_id = next();
        r.norm = parse_norm(next());
        r.image_id = std::stoi(next());
        r.source_label = std::stoi(next());
        r.target_label = std::stoi(next());
        r.cw_distance = std::stod(next());
        r.delta_lo = std::stod(next());
        r.delta_hi = std::stod(next());
        r.status = next();
        r.wall_time_s = std::stod(next());
        r.verifier_queries = std::stol(next());
        records.push_back(std::move(r));
    }
    return records;
}

void write_pgm(const std::string& path, const Vec& pixels, int width, int height) {
    if (static_cast<int>(pixels.size()) != width * height) {
        throw std::invalid_argument("write_pgm: size mismatch");
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot write " + path);
    f << "P5\n" << width << ' ' << height << "\n255\n";
    for (double p : pixels) {
        int v = static_cast<int>(std::lround(std::clamp(p, 0.0, 1.0) * 255.0));
        f.put(static_cast<char>(v));
    }
}

}  // namespace minadv
