#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace minadv {

using Vec = std::vector<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Row-major dense matrix.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
    double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
    int epoch;
    TrainingError(const std::string& msg, int at_epoch)
        : std::runtime_error(msg), epoch(at_epoch) {}
};

enum class Norm { LINF, L1 };

const char* norm_name(Norm n);
Norm parse_norm(const std::string& s);

double distance(Norm norm, const Vec& a, const Vec& b);

// mt19937_64 with hand-rolled draws so the stream does not depend on the
// standard library's distribution implementations.
struct Rng {
    std::mt19937_64 gen;

    explicit Rng(uint64_t seed) : gen(seed) {}

    // [0,1)
    double unit() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    uint64_t below(uint64_t n) { return gen() % n; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }
};

}  // namespace minadv
