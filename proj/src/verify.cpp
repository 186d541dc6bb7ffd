#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>

#include "starcco/env.hpp"
#include "starcco/harness.hpp"
#include "starcco/moppo.hpp"
#include "starcco/nn.hpp"
#include "starcco/pareto.hpp"
#include "starcco/tabular.hpp"

namespace starcco {

namespace {

struct Outcome {
    bool ok{true};
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail << what;
        }
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

Eigen::VectorXd random_vector(Rng& rng, std::size_t n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng);
    return v;
}

void suite_min_norm(Outcome& out, double perturbation) {
    Rng rng = make_stream(101, {});
    std::uniform_int_distribution<int> dim(2, 12);
    double worst_nu = 0.0, worst_norm = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto n = static_cast<std::size_t>(dim(rng));
        const Eigen::VectorXd g1 = random_vector(rng, n), g2 = random_vector(rng, n);
        const double nu = min_norm_nu(g1, g2) + perturbation;
        // |nu g1 + (1-nu) g2|^2 as a quadratic in nu, scanned on a 1e-6 grid
        const double a = g1.squaredNorm(), b = g1.dot(g2), c = g2.squaredNorm();
        auto q = [&](double v) { return v * v * a + 2.0 * v * (1.0 - v) * b + (1.0 - v) * (1.0 - v) * c; };
        double best = INFINITY, best_nu = 0.0;
        for (int k = 0; k <= 1000000; ++k) {
            const double v = k * 1e-6;
            const double val = q(v);
            if (val < best) best = val, best_nu = v;
        }
        worst_nu = std::max(worst_nu, std::abs(nu - best_nu));
        worst_norm = std::max(worst_norm, q(nu) - best);
        if (nu > 0.0 && nu < 1.0) {
            const Eigen::VectorXd comb = nu * g1 + (1.0 - nu) * g2;
            out.require(std::abs((g1 - g2).dot(comb)) <= 1e-6, "KKT residual too large");
            out.require(comb.norm() <= std::min(g1.norm(), g2.norm()) + 1e-12, "combined norm exceeds both inputs");
        }
    }
    out.require(worst_nu <= 1e-6, "nu deviates from grid search by " + num(worst_nu));
    out.require(worst_norm <= 1e-9, "combined norm exceeds grid minimum by " + num(worst_norm));
    const Eigen::Vector2d e1(2, 0), e2(0, 1), c1(1, 0), c2(3, 0);
    out.require(std::abs(min_norm_nu(e1, e2) + perturbation - 0.2) < 1e-12, "g1=(2,0), g2=(0,1) should give 0.2");
    out.require(min_norm_nu(c1, c2) + perturbation == 1.0, "colinear case should clip to 1");
    if (out.ok) out.detail << "max |nu - grid| " << num(worst_nu) << ", norm excess " << num(worst_norm);
}

void suite_gradient_check(Outcome& out) {
    Rng rng = make_stream(102, {});
    std::uniform_int_distribution<int> width(1, 6);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        std::vector<std::size_t> widths;
        const int layers = 2 + t % 3;
        for (int l = 0; l < layers; ++l) widths.push_back(static_cast<std::size_t>(width(rng)));
        Mlp net(widths);
        net.init(rng);
        const Eigen::MatrixXd x = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(widths.front()), 3);
        const Eigen::MatrixXd dy = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(widths.back()), 3);
        Mlp::Cache cache;
        net.forward(x, &cache);
        const Eigen::VectorXd g = net.backward(cache, dy);
        const double h = 1e-5;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            const double p = net.params()[i];
            net.params()[i] = p + h;
            const double fp = net.forward(x).cwiseProduct(dy).sum();
            net.params()[i] = p - h;
            const double fm = net.forward(x).cwiseProduct(dy).sum();
            net.params()[i] = p;
            const double fd = (fp - fm) / (2.0 * h);
            const double scale = std::max({std::abs(fd), std::abs(g[i]), 1e-6});
            worst = std::max(worst, std::abs(fd - g[i]) / scale);
        }
    }
    out.require(worst < 1e-4, "max relative error " + num(worst));
    if (out.ok) out.detail << "max relative error " << num(worst);
}

void suite_channel_normalization(Outcome& out) {
    Rng rng = make_stream(103, {});
    const double gain = 0.37;
    const cplx los = std::polar(1.0, 0.7);
    for (double alpha : {0.0, 2.0, 1e12}) {
        double sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) sum += std::norm(rician_sample(los, alpha, gain, rng));
        const double rel = std::abs(sum / n / gain - 1.0);
        out.require(rel <= 0.02, "alpha=" + num(alpha) + " mean power off by " + num(rel));
    }
    const double d = 3.7, gamma = 2.8;
    out.require(std::abs(path_loss(d, gamma, 1.0) - std::exp(-gamma * std::log(d))) < 1e-15, "path loss oracle");
    if (out.ok) out.detail << "E|h|^2 within 2% for alpha in {0, 2, 1e12}";
}

void suite_constraint_safety(Outcome& out) {
    Scenario s = scenario_preset("desk");
    s.env.episode_length = 1000;
    StarRisEnv env(s, 7);
    Rng rng = make_stream(104, {});
    std::size_t steps = 0;
    for (std::uint64_t ep = 0; steps < 10000; ++ep) {
        env.reset(ep);
        for (std::size_t t = 0; t < s.env.episode_length && steps < 10000; ++t, ++steps) {
            std::vector<int> a;
            for (auto b : env.action_blocks()) a.push_back(std::uniform_int_distribution<int>(0, static_cast<int>(b) - 1)(rng));
            env.step(a);
            for (const auto& r : env.state().ris) {
                const double e = static_cast<double>(r.k_re) * r.beta_re + static_cast<double>(r.k_tr) * r.beta_tr;
                out.require(std::abs(e - 1.0) <= 1e-9, "energy identity broken at step " + std::to_string(steps));
                out.require(r.beta_re >= 0.0 && r.beta_tr >= 0.0, "negative amplitude share");
            }
            const double p = env.state().tx_power;
            out.require(p >= 0.0 && p <= s.env.p_max, "power out of range at step " + std::to_string(steps));
        }
    }
    if (out.ok) out.detail << steps << " random steps";
}

void suite_telescoping(Outcome& out) {
    Scenario s = scenario_preset("desk");
    s.env.radio.bandwidth = 1.0;
    s.env.episode_length = 200;
    StarRisEnv env(s, 8);
    Rng rng = make_stream(105, {});
    double worst = 0.0;
    for (std::uint64_t ep = 0; ep < 5; ++ep) {
        env.reset(ep);
        const Objective2 start = env.objectives();
        Objective2 sum{0.0, 0.0};
        for (;;) {
            std::vector<int> a;
            for (auto b : env.action_blocks()) a.push_back(std::uniform_int_distribution<int>(0, static_cast<int>(b) - 1)(rng));
            const auto r = env.step(a);
            sum[0] += r.reward[0];
            sum[1] += r.reward[1];
            if (r.done) break;
        }
        const Objective2 end = env.objectives();
        worst = std::max({worst, std::abs(sum[0] - (end[0] - start[0])), std::abs(sum[1] - (end[1] - start[1]))});
    }
    out.require(worst <= 1e-10, "episode reward sum deviates by " + num(worst));
    // the advantage estimator telescopes the same way with gamma = 1 and V = 0
    const std::vector<double> r = {0.3, -0.1, 0.25, 0.05}, v(4, 0.0);
    const auto adv = advantage(r, v, 0.0, 1.0);
    out.require(std::abs(adv[0] - (0.3 - 0.1 + 0.25 + 0.05)) < 1e-12, "advantage telescoping");
    if (out.ok) out.detail << "max deviation " << num(worst);
}

void suite_advantage(Outcome& out) {
    Rng rng = make_stream(106, {});
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        std::vector<double> r(6), v(6);
        for (auto& x : r) x = g(rng);
        for (auto& x : v) x = g(rng);
        const double boot = g(rng), gamma = 0.99;
        const auto a = advantage(r, v, boot, gamma);
        for (std::size_t s = 0; s < 6; ++s) {
            double ret = 0.0;
            for (std::size_t k = s; k < 6; ++k) ret += std::pow(gamma, static_cast<double>(k - s)) * r[k];
            ret += std::pow(gamma, static_cast<double>(6 - s)) * boot;
            worst = std::max(worst, std::abs(a[s] - (ret - v[s])));
        }
    }
    out.require(worst <= 1e-12, "advantage differs from double loop by " + num(worst));
    const double rr = 0.3, ro = -0.9;
    out.require(std::abs(ratio(rr, ro) - std::exp(rr - ro)) < 1e-15, "ratio oracle");
    if (out.ok) out.detail << "max deviation " << num(worst);
}

void suite_surrogates(Outcome& out) {
    Rng rng = make_stream(107, {});
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> ru(0.2, 3.0);
    for (int t = 0; t < 200; ++t) {
        const double r = ru(rng), a = g(rng);
        const std::vector<double> rs{r}, as{a};
        out.require(surrogate_clip(rs, as, 0.2) <= surrogate_ncp(rs, as) + 1e-15, "CLIP above NCP");
        const double x = g(rng), y = g(rng), z = g(rng);
        const auto sel = select_optimal_loss(x, y, z);
        out.require(sel.value == std::max({x, y, z}), "selection is not the max");
    }
    const std::vector<double> two{2.0}, one{1.0};
    out.require(std::abs(surrogate_clip(two, one, 0.2) - 1.2) < 1e-15, "clip arithmetic");
    out.require(select_optimal_loss(1, 2, 3).tag == SurrogateKind::Kl, "tag of (1,2,3)");
    out.require(std::abs(avus_loss({2, 4}, {0.5, 0.5}, 0.3) - 3.9) < 1e-12, "homotopy arithmetic");
    Eigen::VectorXd gv = random_vector(rng, 5);
    out.require((grad_normalize(gv, 4.0) - gv / 4.0).norm() < 1e-15, "gradient normalization");
    if (out.ok) out.detail << "200 random cases";
}

void suite_monte_carlo(Outcome& out) {
    Rng rng = make_stream(108, {});
    double m0 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto w = sample_preference(rng);
        m0 += w[0];
        out.require(w[0] >= 0.0 && w[1] >= 0.0 && std::abs(w[0] + w[1] - 1.0) < 1e-12, "preference off simplex");
    }
    out.require(std::abs(m0 / n - 0.5) <= 0.01, "preference mean " + num(m0 / n));
    const std::vector<std::size_t> blocks{4};
    const Eigen::VectorXd logp = categorical::log_softmax(Eigen::VectorXd::Zero(4), blocks);
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(categorical::sample(logp, blocks, rng)[0])];
    for (int c : counts) out.require(std::abs(static_cast<double>(c) / n - 0.25) <= 0.01, "categorical frequency");
    if (out.ok) out.detail << "preference mean " << num(m0 / n);
}

void suite_pareto(Outcome& out) {
    Rng rng = make_stream(109, {});
    std::uniform_int_distribution<int> coord(0, 9), size(1, 30);
    for (int t = 0; t < 200; ++t) {
        std::vector<Objective2> pts(static_cast<std::size_t>(size(rng)));
        for (auto& p : pts) p = {static_cast<double>(coord(rng)), static_cast<double>(coord(rng))};
        const auto idx = pareto_front_indices(pts);
        std::vector<bool> kept(pts.size(), false);
        for (auto i : idx) kept[i] = true;
        for (auto i : idx)
            for (auto j : idx) out.require(!dominates(pts[i], pts[j]), "front not mutually non-dominated");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (kept[i]) continue;
            bool covered = false;
            for (auto j : idx) covered = covered || dominates(pts[j], pts[i]);
            out.require(covered, "excluded point not dominated by the front");
        }
        ParetoArchive arch;
        for (const auto& p : pts) arch.insert({p[0], p[1], "", 0, "", ""});
        out.require(arch.mutually_non_dominated(), "archive holds dominated entries");
        const auto front = pareto_front(pts);
        out.require(pareto_front(front) == front, "front is not idempotent");
    }
    if (out.ok) out.detail << "200 random sets";
}

void suite_optimality_filter(Outcome& out) {
    Rng rng = make_stream(110, {});
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<Objective2> prefs = {{1, 0}, {0.7, 0.3}, {0.5, 0.5}, {0.2, 0.8}, {0, 1}};
    for (int t = 0; t < 100; ++t) {
        TabularQ q(2, 2, prefs), q2(2, 2, prefs);
        for (std::size_t i = 0; i < q.values.size(); ++i) {
            q.values[i] = {u(rng), u(rng)};
            q2.values[i] = {q.values[i][0] + std::abs(u(rng)), q.values[i][1] + std::abs(u(rng))};
        }
        for (std::size_t s = 0; s < 2; ++s) {
            const double w = (u(rng) + 1.0) / 2.0, w2 = (u(rng) + 1.0) / 2.0;
            const Objective2 p{w, 1 - w}, p2{w2, 1 - w2}, mid{(w + w2) / 2, 1 - (w + w2) / 2};
            double brute = -INFINITY;
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t k = 0; k < prefs.size(); ++k)
                    brute = std::max(brute, p[0] * q.at(s, a, k)[0] + p[1] * q.at(s, a, k)[1]);
            const double h = toy_optimality_filter(q, s, p).value;
            out.require(std::abs(h - brute) < 1e-12, "filter differs from enumeration");
            const double hm = toy_optimality_filter(q, s, mid).value;
            const double h2 = toy_optimality_filter(q, s, p2).value;
            out.require(hm <= 0.5 * (h + h2) + 1e-12, "filter not convex in the preference");
            out.require(toy_optimality_filter(q2, s, p).value >= h - 1e-12, "filter not monotone");
        }
    }
    if (out.ok) out.detail << "100 random tables";
}

void suite_checkpoint(Outcome& out) {
    Rng rng = make_stream(111, {});
    Mlp net({4, 7, 3});
    net.init(rng);
    Adam opt(net.n_params(), 1e-3);
    opt.step(net.params(), random_vector(rng, net.n_params()));
    Checkpoint c{{net}, {opt}, "verify"};
    std::stringstream ss;
    save_checkpoint(ss, c);
    const Checkpoint back = load_checkpoint(ss);
    out.require(back.nets.size() == 1 && back.nets[0].params() == net.params(), "parameters not bit-exact");
    out.require(back.optimizers.size() == 1 && back.optimizers[0].m == opt.m && back.optimizers[0].v == opt.v &&
                    back.optimizers[0].t == opt.t,
                "optimizer moments not bit-exact");
    if (out.ok) out.detail << net.n_params() << " parameters";
}

void suite_signal_oracle(Outcome& out) {
    Rng rng = make_stream(112, {});
    for (int t = 0; t < 50; ++t) {
        std::vector<cplx> hr(2), hb(2), co(2);
        for (int k = 0; k < 2; ++k) {
            hr[static_cast<std::size_t>(k)] = complex_normal(rng);
            hb[static_cast<std::size_t>(k)] = complex_normal(rng);
            co[static_cast<std::size_t>(k)] = std::polar(std::sqrt(0.25), uniform01(rng) * kTwoPi);
        }
        const cplx hd = complex_normal(rng), x = complex_normal(rng);
        cplx cas{0.0, 0.0};
        for (int k = 0; k < 2; ++k)
            cas += std::conj(hr[static_cast<std::size_t>(k)]) * co[static_cast<std::size_t>(k)] * hb[static_cast<std::size_t>(k)];
        const cplx c1 = received_signal(hr, hb, co, hd, {true, false, true}, false, x);
        const cplx c3 = received_signal(hr, hb, co, hd, {false, false, false}, true, x);
        const cplx c2 = received_signal(hr, hb, co, hd, {false, true, true}, false, x);
        out.require(std::abs(c1 - (cas + hd) * x) < 1e-12, "case I_h");
        out.require(std::abs(c3 - cas * x) < 1e-12, "case without link");
        out.require(std::abs(c2 - cas * x) < 1e-12, "case I_w with blocked direct path");
    }
    const std::vector<double> p{4, 1, 1};
    out.require(std::abs(sinr(p, 0, 2.0) - 1.0) < 1e-15, "SINR hand sum");
    const std::vector<double> w = poisson_weights(2.0, std::vector<int>{0, 1, 2});
    out.require(std::abs(w[0] - 0.2) < 1e-12 && std::abs(w[1] - 0.4) < 1e-12 && std::abs(w[2] - 0.4) < 1e-12,
                "Poisson weights");
    if (out.ok) out.detail << "50 random links";
}

void suite_toy_training(Outcome& out) {
    const TabularMomdp m = make_branch_toy();
    TrainConfig c;
    c.episodes = 10000;
    c.steps_per_episode = 0;
    c.update_every = 8;
    c.n_actors = 8;
    c.hidden = 64;
    c.lr_actor = 3e-3;
    c.entropy_coef = 0.1;
    c.normalize_advantages = false;
    const TrainResult r = train(Strategy::avus(), [&](std::size_t a) { return std::make_unique<TabularMomdpEnv>(m, 100 + a); },
                                c, 1);
    PolicyHandle policy(r.checkpoint.nets[0], {m.n_actions}, true);
    TabularMomdpEnv env(m, 99);
    Rng rng = make_stream(113, {});
    double worst = INFINITY;
    for (double w : {1.0, 0.75, 0.5, 0.25, 0.0}) {
        const Preference p{w, 1 - w};
        const auto got = evaluate_policy(policy, env, p, 1, true, 0, rng);
        const double opt = value_iteration(m, p, 1.0).value[static_cast<std::size_t>(m.start)];
        worst = std::min(worst, (p[0] * got[0] + p[1] * got[1]) / opt);
    }
    out.require(worst >= 0.95, "worst ratio to optimum " + num(worst));
    if (out.ok) out.detail << "worst ratio to optimum " << num(worst);
}

} // namespace

std::vector<SuiteResult> verify_suite(const VerifyOptions& options) {
    std::vector<std::pair<std::string, std::function<void(Outcome&)>>> suites = {
        {"min_norm", [&](Outcome& o) { suite_min_norm(o, options.nu_perturbation); }},
        {"gradient_check", suite_gradient_check},
        {"channel_normalization", suite_channel_normalization},
        {"constraint_safety", suite_constraint_safety},
        {"telescoping", suite_telescoping},
        {"advantage", suite_advantage},
        {"surrogates", suite_surrogates},
        {"monte_carlo", suite_monte_carlo},
        {"pareto", suite_pareto},
        {"optimality_filter", suite_optimality_filter},
        {"checkpoint", suite_checkpoint},
        {"signal_oracle", suite_signal_oracle},
    };
    if (options.include_training) suites.emplace_back("toy_training", suite_toy_training);

    std::vector<SuiteResult> results;
    for (auto& [name, fn] : suites) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail << "exception: " << e.what();
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        results.push_back({name, o.ok, dt, o.detail.str()});
    }
    return results;
}

void print_report(std::ostream& os, const std::vector<SuiteResult>& results) {
    std::size_t failed = 0;
    for (const auto& r : results) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%8.3fs", r.seconds);
        os << (r.passed ? "PASS " : "FAIL ") << buf << "  " << r.name << "  " << r.detail << '\n';
        failed += r.passed ? 0 : 1;
    }
    os << results.size() - failed << '/' << results.size() << " suites passed\n";
}

} // namespace starcco
