#include "starcco/moppo.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

namespace starcco {

std::vector<double> advantage(std::span<const double> rewards, std::span<const double> values, double bootstrap,
                              double gamma) {
    if (rewards.size() != values.size()) throw InvalidArgument("advantage: rewards and values differ in length");
    const std::size_t n = rewards.size();
    std::vector<double> out(n);
    double ret = bootstrap;
    for (std::size_t t = n; t-- > 0;) {
        ret = rewards[t] + gamma * ret;
        out[t] = ret - values[t];
    }
    return out;
}

double ratio(double new_log_prob, double old_log_prob) {
    if (!std::isfinite(new_log_prob) || !std::isfinite(old_log_prob))
        throw InvalidArgument("ratio: log-probabilities must be finite");
    return std::exp(std::clamp(new_log_prob - old_log_prob, -50.0, 50.0));
}

namespace {

void same_size(std::size_t a, std::size_t b) {
    if (a != b) throw InvalidArgument("surrogate: length mismatch");
    if (a == 0) throw InvalidArgument("surrogate: empty batch");
}

} // namespace

double surrogate_ncp(std::span<const double> ratios, std::span<const double> adv) {
    same_size(ratios.size(), adv.size());
    double s = 0.0;
    for (std::size_t i = 0; i < adv.size(); ++i) s += ratios[i] * adv[i];
    return s / static_cast<double>(adv.size());
}

double surrogate_clip(std::span<const double> ratios, std::span<const double> adv, double eps) {
    same_size(ratios.size(), adv.size());
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("clip epsilon must lie in (0, 1)");
    double s = 0.0;
    for (std::size_t i = 0; i < adv.size(); ++i) {
        const double clipped = std::clamp(ratios[i], 1.0 - eps, 1.0 + eps);
        s += std::min(ratios[i] * adv[i], clipped * adv[i]);
    }
    return s / static_cast<double>(adv.size());
}

double surrogate_kl(std::span<const double> ratios, std::span<const double> adv, double beta,
                    std::span<const double> kl) {
    same_size(ratios.size(), adv.size());
    same_size(kl.size(), adv.size());
    double s = 0.0;
    for (std::size_t i = 0; i < adv.size(); ++i) s += ratios[i] * adv[i] - beta * kl[i];
    return s / static_cast<double>(adv.size());
}

std::string_view to_string(SurrogateKind k) {
    switch (k) {
    case SurrogateKind::Ncp: return "NCP";
    case SurrogateKind::Clip: return "CLIP";
    case SurrogateKind::Kl: return "KL";
    }
    return "?";
}

SelectedLoss select_optimal_loss(double ncp, double clip, double kl) {
    if (!std::isfinite(ncp) || !std::isfinite(clip) || !std::isfinite(kl))
        throw InvalidArgument("select_optimal_loss: non-finite input");
    SelectedLoss s{ncp, SurrogateKind::Ncp};
    if (clip >= s.value) s = {clip, SurrogateKind::Clip};
    if (kl >= s.value) s = {kl, SurrogateKind::Kl};
    return s;
}

Preference sample_preference(Rng& rng) {
    const double u = uniform01(rng);
    return {u, 1.0 - u};
}

void validate_preference(const Preference& w) {
    if (!(w[0] >= 0.0 && w[1] >= 0.0) || std::abs(w[0] + w[1] - 1.0) > 1e-9)
        throw InvalidArgument("preference must be non-negative and sum to 1");
}

double avus_loss(const Objective2& l, const Preference& pref, double varpi, std::optional<Preference> trajectory_pref) {
    validate_preference(pref);
    if (!(varpi >= 0.0 && varpi <= 1.0)) throw InvalidArgument("homotopy coefficient must lie in [0, 1]");
    if (trajectory_pref && ((*trajectory_pref)[0] != pref[0] || (*trajectory_pref)[1] != pref[1]))
        throw InvalidArgument("trajectory was collected under a different preference");
    return varpi * (l[0] + l[1]) + (1.0 - varpi) * (pref[0] * l[0] + pref[1] * l[1]);
}

Eigen::VectorXd grad_normalize(const Eigen::VectorXd& grad, double initial_loss) {
    if (initial_loss == 0.0 || !std::isfinite(initial_loss)) {
        spdlog::warn("grad_normalize: initial loss {} unusable, gradient left unnormalized", initial_loss);
        return grad;
    }
    return grad / initial_loss;
}

double min_norm_nu(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2) {
    if (g1.size() != g2.size()) throw InvalidArgument("min_norm_nu: gradient lengths differ");
    const Eigen::VectorXd d = g1 - g2;
    const double den = d.squaredNorm();
    if (den == 0.0) return 0.5;
    const double nu = (g2 - g1).dot(g2) / den;
    return std::clamp(nu, 0.0, 1.0);
}

LfusCombination lfus_combine(double loss1, double loss2, const Eigen::VectorXd& g1, const Eigen::VectorXd& g2) {
    LfusCombination c;
    c.nu = min_norm_nu(g1, g2);
    c.loss = c.nu * loss1 + (1.0 - c.nu) * loss2;
    c.grad = c.nu * g1 + (1.0 - c.nu) * g2;
    return c;
}

} // namespace starcco
