#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

namespace fbalf {

using FactorVector = Eigen::VectorXd;
using FactorMatrix = Eigen::MatrixXd;  // one row per item

enum class ScheduleMode { kSequential, kParallelRound };

struct HyperParams {
    int factors = 20;          // f
    double eta = 0.002;        // learning rate
    double lambda = 0.06;      // Tikhonov coefficient
    int rho = 1;               // filling multiplier
    int rounds = 300;          // T
    int t_hf = 10;             // hybrid-filling switch round
    int t_local = 10;          // local passes per round
    std::uint64_t seed = 42;
    bool bias_enabled = true;
    bool filling_enabled = true;
    ScheduleMode mode = ScheduleMode::kSequential;
    bool clamp_predictions = true;
    int patience = 0;          // early stop on test RMSE; 0 disables

    void validate() const {
        if (factors < 1) throw std::invalid_argument("factors must be >= 1");
        if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
        if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
        if (rho < 0) throw std::invalid_argument("rho must be >= 0");
        if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
        if (t_local < 1) throw std::invalid_argument("t_local must be >= 1");
        if (t_hf < 0) throw std::invalid_argument("t_hf must be >= 0");
    }

    int effective_rho() const { return filling_enabled ? rho : 0; }
};

inline double clamp(double value, double r_min, double r_max) {
    return value < r_min ? r_min : (value > r_max ? r_max : value);
}

/// r_hat = a_u + b_i + <c_u, s_i>; without bias the plain inner product.
inline double predict(const FactorVector& user_factors, double user_bias,
                      const FactorVector& item_factors, double item_bias,
                      bool bias_enabled = true) {
    if (user_factors.size() != item_factors.size())
        throw std::invalid_argument("factor length mismatch");
    const double dot = user_factors.dot(item_factors);
    return bias_enabled ? user_bias + item_bias + dot : dot;
}

inline double residual(double target, double prediction) { return target - prediction; }

/// Single-element regularized loss:
/// 0.5*delta^2 + lambda/2*(a^2 + b^2 + |c|^2 + |s|^2).
inline double element_loss(double target, const FactorVector& user_factors, double user_bias,
                           const FactorVector& item_factors, double item_bias, double lambda) {
    const double delta = residual(target, predict(user_factors, user_bias, item_factors, item_bias));
    const double reg = user_bias * user_bias + item_bias * item_bias +
                       user_factors.squaredNorm() + item_factors.squaredNorm();
    return 0.5 * delta * delta + 0.5 * lambda * reg;
}

struct UserGradients {
    FactorVector factors;  // eta-scaled; apply as c -= factors
    double bias;
};

struct ItemGradients {
    FactorVector factors;  // eta-scaled; apply as s -= factors
    double bias;
};

/// Eta-scaled gradients of the element loss w.r.t. (c_u, a_u). The learning
/// rate is folded in, so the update is plain subtraction.
inline UserGradients user_side_gradients(double delta, const FactorVector& user_factors,
                                         double user_bias, const FactorVector& item_factors,
                                         double lambda, double eta) {
    UserGradients g;
    g.factors = eta * (-delta * item_factors + lambda * user_factors);
    g.bias = eta * (-delta + lambda * user_bias);
    return g;
}

/// Mirror of user_side_gradients with the roles of c and s swapped.
inline ItemGradients item_side_gradients(double delta, const FactorVector& item_factors,
                                         double item_bias, const FactorVector& user_factors,
                                         double lambda, double eta) {
    ItemGradients g;
    g.factors = eta * (-delta * user_factors + lambda * item_factors);
    g.bias = eta * (-delta + lambda * item_bias);
    return g;
}

}  // namespace fbalf
