#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "starcco/common.hpp"
#include "starcco/random.hpp"

namespace starcco {

using Preference = Objective2;

/// n-step advantage over a window of T steps, one objective:
/// A_t = sum_{k=t}^{T-1} gamma^{k-t} r_k + gamma^{T-t} V(S_T) - V(S_t).
/// `values` holds V(S_0..S_{T-1}); `bootstrap` is V(S_T) (zero after an absorbing end).
std::vector<double> advantage(std::span<const double> rewards, std::span<const double> values, double bootstrap,
                              double gamma);

/// Probability ratio exp(new - old), exponent clamped to [-50, 50].
double ratio(double new_log_prob, double old_log_prob);

/// Surrogates in the maximization convention.
double surrogate_ncp(std::span<const double> ratios, std::span<const double> adv);
double surrogate_clip(std::span<const double> ratios, std::span<const double> adv, double eps);
double surrogate_kl(std::span<const double> ratios, std::span<const double> adv, double beta,
                    std::span<const double> kl);

enum class SurrogateKind { Ncp = 0, Clip = 1, Kl = 2 };
std::string_view to_string(SurrogateKind k);

struct SelectedLoss {
    double value{0.0};
    SurrogateKind tag{SurrogateKind::Ncp};
};

/// Largest of the three values. Ties go to the later entry in the order NCP, CLIP, KL.
SelectedLoss select_optimal_loss(double ncp, double clip, double kl);

/// Uniform draw on the 2-simplex.
Preference sample_preference(Rng& rng);
void validate_preference(const Preference& w);

/// varpi * (l[0] + l[1]) + (1 - varpi) * w . l. When `trajectory_pref` is given
/// it must equal `pref`.
double avus_loss(const Objective2& per_objective, const Preference& pref, double varpi,
                 std::optional<Preference> trajectory_pref = std::nullopt);

/// grad / initial_loss; an initial loss of zero leaves the gradient unchanged (with a warning).
Eigen::VectorXd grad_normalize(const Eigen::VectorXd& grad, double initial_loss);

/// Minimizer over [0,1] of |nu g1 + (1 - nu) g2|^2; 0.5 when g1 == g2.
double min_norm_nu(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2);

struct LfusCombination {
    double nu{0.5};
    double loss{0.0};
    Eigen::VectorXd grad;
};

/// Combines two objective losses and their (already normalized) gradients with the min-norm weight.
LfusCombination lfus_combine(double loss1, double loss2, const Eigen::VectorXd& g1, const Eigen::VectorXd& g2);

} // namespace starcco
