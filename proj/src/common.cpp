#include "minadv/common.hpp"

namespace minadv {

const char* norm_name(Norm n) {
    return n == Norm::LINF ? "linf" : "l1";
}

Norm parse_norm(const std::string& s) {
    if (s == "linf" || s == "Linf" || s == "LINF") return Norm::LINF;
    if (s == "l1" || s == "L1") return Norm::L1;
    throw std::invalid_argument("unknown norm '" + s + "' (want linf or l1)");
}

double distance(Norm norm, const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
    double d = 0.0;
    if (norm == Norm::LINF) {
        for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
    } else {
        for (size_t i = 0; i < a.size(); ++i) d += std::fabs(a[i] - b[i]);
    }
    return d;
}

}  // namespace minadv
