#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>

#include "minadv/lp.hpp"
#include "minadv/nn.hpp"

namespace minadv {

enum class ReluPhase : uint8_t { Active, Inactive, Unstable };

// out = ReLU(in) for a linear expression over already-declared variables
struct ReluConstraint {
    LinExpr in;
    int out_var;
};

struct ConstraintSystem {
    LpProblem lp;
    std::vector<ReluConstraint> relus;
    std::vector<std::string> names;

    int add_var(const std::string& name, double lo, double hi) {
        names.push_back(name);
        return lp.add_var(lo, hi);
    }
};

// r = ReLU(a-b); returns r + b
LinExpr encode_max(ConstraintSystem& cs, const LinExpr& a, const LinExpr& b);
// r = ReLU(2a); returns r - a
LinExpr encode_abs(ConstraintSystem& cs, const LinExpr& a);

// evaluate an expression after resolving the ReLU constraints in declaration
// order from the given values of the non-ReLU-output variables
double eval_with_relus(const ConstraintSystem& cs, Vec point, const LinExpr& e);

struct VerifyQuery {
    const Network* net = nullptr;
    Vec center;
    int target = 0;
    double radius = 0.0;
    Norm norm = Norm::LINF;
    double timeout_s = 600.0;
};

// full constraint encoding of a query: one variable per neuron pre/post
// activation, input box or L1 budget, and the targeted condition
struct QuerySystem {
    ConstraintSystem sys;
    std::vector<int> input_vars;
    std::vector<std::vector<int>> pre_vars;   // hidden layers
    std::vector<std::vector<int>> post_vars;  // hidden layers
    std::vector<int> logit_vars;
    int network_relus = 0;  // == net.hidden_count()
};

QuerySystem build_query(const VerifyQuery& q, double margin = 0.0);

// one constraint per line, for external cross-checking
void dump_system(const ConstraintSystem& cs, std::ostream& out);

// all ReLUs fixed to a phase; returns a point over the system's variables
std::optional<Vec> lp_feasible(const ConstraintSystem& cs, const std::vector<ReluPhase>& phases);

struct NeuronBounds {
    double lo = 0.0, hi = 0.0;
    ReluPhase phase = ReluPhase::Unstable;
};

struct BoundsMap {
    std::vector<std::vector<NeuronBounds>> layers;  // hidden layers only
};

// interval arithmetic through the affine layers over an input box
BoundsMap propagate_bounds(const Network& net, const Vec& in_lo, const Vec& in_hi);

enum class VerifyStatus { Counterexample, Robust, Timeout };

struct VerifyOutcome {
    VerifyStatus status = VerifyStatus::Timeout;
    Vec witness;  // set for Counterexample
    long nodes = 0;
    long lp_calls = 0;
};

// complete branch-and-bound search for a targeted adversarial example within
// the query radius
VerifyOutcome verify_targeted(const VerifyQuery& q);

// brute-force reference: enumerate every ReLU phase assignment and minimize
// the distance by LP; +inf when the target is unreachable. Refuses networks
// with more than 16 hidden units.
double oracle_min_distortion(const Network& net, const Vec& x, int target, Norm norm);

}  // namespace minadv
