#pragma once

#include "minadv/nn.hpp"

namespace minadv {

struct AttackConfig {
    double epsilon = 0.01;      // FGM/BIM step size
    double alpha = 0.3;         // BIM ball radius
    int iters = 40;             // BIM iterations
    double cw_c_init = 1e-3;
    int cw_c_search_steps = 9;
    double cw_lr = 0.01;
    int cw_iters = 1000;
    Norm norm = Norm::LINF;
};

struct AttackResult {
    Vec adversarial;
    double distance = kInf;
    int target = -1;
    bool succeeded = false;
};

// one signed gradient step, clipped to [0,1]; sign(0) = 0
Vec fgm(const Network& net, const Vec& x, int y, double epsilon);

// iterated FGM kept inside the alpha-ball of x
Vec bim(const Network& net, const Vec& x, int y, double epsilon, double alpha, int iters);

// targeted attack minimizing d(x,x') + c*g(x') with a box change of variable
// and an outer search over c; success is validated by a forward pass
AttackResult cw(const Network& net, const Vec& x, int target, Norm norm,
                const AttackConfig& cfg);

}  // namespace minadv
