#include "starcco/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

namespace starcco {

using nlohmann::json;

void TrainConfig::validate() const {
    if (update_every < 1) throw InvalidArgument("update window must be at least one step");
    if (epochs < 1) throw InvalidArgument("need at least one epoch");
    if (n_actors < 1) throw InvalidArgument("need at least one actor");
    if (hidden < 1) throw InvalidArgument("hidden width must be positive");
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw InvalidArgument("clip epsilon must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("discount must lie in (0, 1]");
    if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) throw InvalidArgument("learning rates must be positive");
    if (!(varpi_initial >= 0.0 && varpi_initial <= 1.0)) throw InvalidArgument("initial varpi must lie in [0, 1]");
    if (!(varpi_step >= 0.0)) throw InvalidArgument("varpi step must be non-negative");
    if (!(kl_beta >= 0.0) || !(value_coef >= 0.0) || !(entropy_coef >= 0.0))
        throw InvalidArgument("loss coefficients must be non-negative");
    if (!(max_grad_norm > 0.0)) throw InvalidArgument("gradient clip norm must be positive");
    if (eval_preferences < 2) throw InvalidArgument("need at least two evaluation preferences");
}

json to_json(const TrainConfig& c) {
    return {
        {"episodes", c.episodes},
        {"steps_per_episode", c.steps_per_episode},
        {"update_frequency", c.update_every},
        {"epochs", c.epochs},
        {"minibatch", c.minibatch},
        {"actors", c.n_actors},
        {"hidden", c.hidden},
        {"clip", c.clip_eps},
        {"gamma", c.gamma},
        {"lr_actor", c.lr_actor},
        {"lr_critic", c.lr_critic},
        {"varpi", c.varpi_initial},
        {"varpi_step", c.varpi_step},
        {"kl_beta", c.kl_beta},
        {"value_coef", c.value_coef},
        {"entropy_coef", c.entropy_coef},
        {"max_grad_norm", c.max_grad_norm},
        {"normalize_advantages", c.normalize_advantages},
        {"eval_episodes", c.eval_episodes},
        {"eval_preferences", c.eval_preferences},
        {"eval_reruns", c.eval_reruns},
    };
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    if (!j.is_object()) throw InvalidArgument("training config must be a JSON object");
    const json known = to_json(c);
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw InvalidArgument("unknown training config key '" + key + "'");
    c.episodes = j.value("episodes", c.episodes);
    c.steps_per_episode = j.value("steps_per_episode", c.steps_per_episode);
    c.update_every = j.value("update_frequency", c.update_every);
    c.epochs = j.value("epochs", c.epochs);
    c.minibatch = j.value("minibatch", c.minibatch);
    c.n_actors = j.value("actors", c.n_actors);
    c.hidden = j.value("hidden", c.hidden);
    c.clip_eps = j.value("clip", c.clip_eps);
    c.gamma = j.value("gamma", c.gamma);
    c.lr_actor = j.value("lr_actor", c.lr_actor);
    c.lr_critic = j.value("lr_critic", c.lr_critic);
    c.varpi_initial = j.value("varpi", c.varpi_initial);
    c.varpi_step = j.value("varpi_step", c.varpi_step);
    c.kl_beta = j.value("kl_beta", c.kl_beta);
    c.value_coef = j.value("value_coef", c.value_coef);
    c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
    c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
    c.normalize_advantages = j.value("normalize_advantages", c.normalize_advantages);
    c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
    c.eval_preferences = j.value("eval_preferences", c.eval_preferences);
    c.eval_reruns = j.value("eval_reruns", c.eval_reruns);
    c.validate();
    return c;
}

Strategy Strategy::avus() { return {Kind::Avus, {0.5, 0.5}, "AVUS"}; }
Strategy Strategy::lfus() { return {Kind::Lfus, {0.5, 0.5}, "LFUS"}; }
Strategy Strategy::fixed(const std::string& name, Objective2 w) {
    validate_preference(w);
    return {Kind::Fixed, w, name};
}

Strategy Strategy::by_name(const std::string& name) {
    if (name == "AVUS") return avus();
    if (name == "LFUS") return lfus();
    if (name == "BM1") return fixed("BM1", {0.3, 0.7});
    if (name == "BM2") return fixed("BM2", {0.6, 0.4});
    if (name == "NoRIS") {
        Strategy s = avus();
        s.name = "NoRIS";
        return s;
    }
    throw InvalidArgument("unknown strategy '" + name + "'");
}

void write_curves_csv(std::ostream& os, const std::vector<CurveRow>& rows) {
    os << "episode,strategy,seed,cum_coverage,cum_capacity,scalarized_reward\n";
    for (const auto& r : rows)
        os << r.episode << ',' << r.strategy << ',' << r.seed << ',' << format_number(r.cum_coverage) << ','
           << format_number(r.cum_capacity) << ',' << format_number(r.scalarized_reward) << '\n';
}

std::vector<CurveRow> read_curves_csv(std::istream& is) {
    std::vector<CurveRow> rows;
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[6];
        for (auto& x : f) std::getline(ss, x, ',');
        rows.push_back({std::stoul(f[0]), f[1], std::stoull(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5])});
    }
    return rows;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PolicyHandle::PolicyHandle(const Mlp& actor, std::vector<std::size_t> blocks, bool conditioned)
    : actor_(actor), blocks_(std::move(blocks)), conditioned_(conditioned) {}

namespace {

Eigen::VectorXd make_input(std::span<const double> obs, const Preference& pref, bool conditioned) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(obs.size() + (conditioned ? 2 : 0)));
    for (std::size_t i = 0; i < obs.size(); ++i) x[static_cast<Eigen::Index>(i)] = obs[i];
    if (conditioned) {
        x[static_cast<Eigen::Index>(obs.size())] = pref[0];
        x[static_cast<Eigen::Index>(obs.size() + 1)] = pref[1];
    }
    return x;
}

std::string pref_label(const Preference& w) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f:%.2f", w[0], w[1]);
    return buf;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

} // namespace

std::vector<int> PolicyHandle::act(std::span<const double> obs, const Preference& pref, bool greedy, Rng& rng) const {
    const Eigen::VectorXd logits = actor_.forward(make_input(obs, pref, conditioned_));
    const Eigen::VectorXd logp = categorical::log_softmax(logits, blocks_);
    return greedy ? categorical::argmax(logp, blocks_) : categorical::sample(logp, blocks_, rng);
}

Objective2 evaluate_policy(const PolicyHandle& policy, MoEnvironment& env, const Preference& pref,
                           std::size_t episodes, bool greedy, std::uint64_t first_episode, Rng& rng) {
    Objective2 total{0.0, 0.0};
    if (episodes == 0) return total;
    for (std::size_t e = 0; e < episodes; ++e) {
        auto obs = env.reset(first_episode + e);
        for (;;) {
            const auto a = policy.act(obs, pref, greedy, rng);
            auto r = env.step(a);
            total[0] += r.tally[0];
            total[1] += r.tally[1];
            if (r.done) break;
            obs = std::move(r.observation);
        }
    }
    return {total[0] / static_cast<double>(episodes), total[1] / static_cast<double>(episodes)};
}

namespace {

struct Transition {
    Eigen::VectorXd input;
    std::vector<int> action;
    Eigen::VectorXd logp_old;
    double lp_old{0.0};
    Objective2 reward{};
    Preference pref{};
};

struct ActorSlot {
    std::unique_ptr<MoEnvironment> env;
    std::vector<double> obs;
    std::size_t steps{0};
    Objective2 tally{};
    double scalarized{0.0};
    bool active{true};
    Rng rng;
};

class Trainer {
public:
    Trainer(const Strategy& s, const EnvFactory& f, const TrainConfig& c, std::uint64_t seed)
        : strat_(s), make_env_(f), cfg_(c), seed_(seed) {}

    TrainResult run(const std::string& config_text);

private:
    bool conditioned() const { return strat_.kind == Strategy::Kind::Avus; }
    std::size_t n_obj() const { return strat_.kind == Strategy::Kind::Fixed ? 1 : 2; }

    void setup();
    void start_episode(ActorSlot& a);
    void collect();
    void update();
    void finish_episode(ActorSlot& a);
    void evaluate(TrainResult& out);
    [[noreturn]] void fail(const std::string& what) const;

    Strategy strat_;
    const EnvFactory& make_env_;
    TrainConfig cfg_;
    std::uint64_t seed_;

    std::vector<std::size_t> blocks_;
    Objective2 scale_{1.0, 1.0};
    Mlp actor_, critic_;
    Adam opt_actor_, opt_critic_;
    std::vector<ActorSlot> slots_;
    std::uint64_t next_episode_{0};
    std::size_t episodes_done_{0};
    double varpi_{0.0};
    double last_nu_{0.5};
    Objective2 initial_loss_{0.0, 0.0};
    bool have_initial_loss_{false};
    Rng pref_rng_, batch_rng_;
    TrainDiagnostics diag_;
    std::vector<CurveRow> curves_;

    // current batch
    std::vector<Transition> batch_;
    Eigen::MatrixXd adv_, target_;  // n_obj x B
    Eigen::MatrixXd policy_adv_;     // rows fed to the surrogate losses
};

void Trainer::fail(const std::string& what) const {
    std::ostringstream os;
    os << "training aborted: " << what << " (strategy=" << strat_.name << " seed=" << seed_
       << " iteration=" << diag_.iterations << " episodes_done=" << episodes_done_ << " varpi=" << varpi_
       << " nu=" << last_nu_ << " actor_norm=" << actor_.params().norm() << " critic_norm=" << critic_.params().norm()
       << ")";
    throw TrainingError(os.str());
}

void Trainer::setup() {
    cfg_.validate();
    for (std::size_t k = 0; k < cfg_.n_actors; ++k) {
        ActorSlot s;
        s.env = make_env_(k);
        s.rng = make_stream(seed_, {kStreamPolicy, k});
        slots_.push_back(std::move(s));
    }
    auto& env0 = *slots_.front().env;
    blocks_ = env0.action_blocks();
    scale_ = env0.reward_scale();
    const std::size_t in = env0.observation_size() + (conditioned() ? 2 : 0);
    const std::size_t out = std::accumulate(blocks_.begin(), blocks_.end(), std::size_t{0});
    actor_ = Mlp({in, cfg_.hidden, out});
    critic_ = Mlp({in, cfg_.hidden, n_obj()});
    Rng init = make_stream(seed_, {kStreamNetInit});
    actor_.init(init);
    critic_.init(init);
    opt_actor_ = Adam(actor_.n_params(), cfg_.lr_actor);
    opt_critic_ = Adam(critic_.n_params(), cfg_.lr_critic);
    varpi_ = cfg_.varpi_initial;
    pref_rng_ = make_stream(seed_, {kStreamPreference});
    batch_rng_ = make_stream(seed_, {kStreamMinibatch});
}

void Trainer::start_episode(ActorSlot& a) {
    a.obs = a.env->reset(next_episode_++);
    a.steps = 0;
    a.tally = {0.0, 0.0};
    a.scalarized = 0.0;
}

void Trainer::finish_episode(ActorSlot& a) {
    curves_.push_back({episodes_done_, strat_.name, seed_, a.tally[0], a.tally[1], a.scalarized});
    ++episodes_done_;
    if (episodes_done_ < cfg_.episodes)
        start_episode(a);
    else
        a.active = false;
}

void Trainer::collect() {
    batch_.clear();
    std::vector<std::pair<std::size_t, std::size_t>> windows;  // [begin, end) into batch_
    std::vector<Eigen::VectorXd> boot_inputs;
    std::vector<bool> boot_zero;

    for (auto& slot : slots_) {
        if (!slot.active || episodes_done_ >= cfg_.episodes) continue;
        // one preference per rollout window
        const Preference pref = conditioned() ? sample_preference(pref_rng_) : strat_.weight;
        const std::size_t begin = batch_.size();
        Eigen::VectorXd boot;
        bool terminal = false;
        for (std::size_t k = 0; k < cfg_.update_every; ++k) {
            Transition tr;
            tr.input = make_input(slot.obs, pref, conditioned());
            tr.pref = pref;
            const Eigen::VectorXd logits = actor_.forward(tr.input);
            tr.logp_old = categorical::log_softmax(logits, blocks_);
            tr.action = categorical::sample(tr.logp_old, blocks_, slot.rng);
            tr.lp_old = categorical::log_prob(tr.logp_old, blocks_, tr.action);
            auto r = slot.env->step(tr.action);
            tr.reward = {r.reward[0] * scale_[0], r.reward[1] * scale_[1]};
            slot.tally[0] += r.tally[0];
            slot.tally[1] += r.tally[1];
            slot.scalarized += strat_.weight[0] * tr.reward[0] + strat_.weight[1] * tr.reward[1];
            ++slot.steps;
            batch_.push_back(std::move(tr));
            const bool limit = cfg_.steps_per_episode > 0 && slot.steps >= cfg_.steps_per_episode;
            if (r.done || limit) {
                terminal = r.terminal;
                if (!terminal) boot = make_input(r.observation, pref, conditioned());
                finish_episode(slot);
                break;
            }
            slot.obs = std::move(r.observation);
            if (k + 1 == cfg_.update_every) boot = make_input(slot.obs, pref, conditioned());
        }
        windows.emplace_back(begin, batch_.size());
        boot_zero.push_back(terminal);
        boot_inputs.push_back(terminal ? Eigen::VectorXd() : boot);
    }

    const std::size_t B = batch_.size();
    const std::size_t M = n_obj();
    adv_.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(B));
    target_.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(B));
    if (B == 0) return;

    Eigen::MatrixXd x(batch_.front().input.size(), static_cast<Eigen::Index>(B));
    for (std::size_t i = 0; i < B; ++i) x.col(static_cast<Eigen::Index>(i)) = batch_[i].input;
    const Eigen::MatrixXd v = critic_.forward(x);

    for (std::size_t w = 0; w < windows.size(); ++w) {
        const auto [b, e] = windows[w];
        Eigen::VectorXd vb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
        if (!boot_zero[w]) vb = critic_.forward(boot_inputs[w]);
        for (std::size_t m = 0; m < M; ++m) {
            std::vector<double> rew, val;
            for (std::size_t i = b; i < e; ++i) {
                const auto& rr = batch_[i].reward;
                rew.push_back(M == 1 ? strat_.weight[0] * rr[0] + strat_.weight[1] * rr[1] : rr[m]);
                val.push_back(v(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)));
            }
            const auto a = advantage(rew, val, vb[static_cast<Eigen::Index>(m)], cfg_.gamma);
            for (std::size_t i = b; i < e; ++i) {
                adv_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = a[i - b];
                target_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = a[i - b] + val[i - b];
            }
        }
    }

    // AVUS and fixed weights optimize one scalarized advantage; LFUS keeps one row per objective
    if (strat_.kind == Strategy::Kind::Lfus) {
        policy_adv_ = adv_;
    } else {
        policy_adv_.resize(1, static_cast<Eigen::Index>(B));
        for (std::size_t i = 0; i < B; ++i) {
            const auto c = static_cast<Eigen::Index>(i);
            const auto& w = batch_[i].pref;
            policy_adv_(0, c) = M == 1 ? adv_(0, c) : w[0] * adv_(0, c) + w[1] * adv_(1, c);
        }
    }
    if (cfg_.normalize_advantages && B > 1) {
        // centre each row, then divide by one pooled scale so the relative
        // size of the objectives survives
        for (Eigen::Index m = 0; m < policy_adv_.rows(); ++m)
            policy_adv_.row(m).array() -= policy_adv_.row(m).mean();
        const double sd = std::sqrt(policy_adv_.squaredNorm() / static_cast<double>(policy_adv_.size()));
        if (sd > 1e-12) policy_adv_ /= sd;
    }
}

void Trainer::update() {
    const std::size_t B = batch_.size();
    if (B == 0) return;
    const bool lfus = strat_.kind == Strategy::Kind::Lfus;
    if (lfus && !have_initial_loss_) {
        for (Eigen::Index m = 0; m < 2; ++m)
            initial_loss_[static_cast<std::size_t>(m)] = policy_adv_.row(m).cwiseAbs().mean();
        have_initial_loss_ = true;
    }
    const std::size_t mb = cfg_.minibatch == 0 ? B : std::min(cfg_.minibatch, B);
    std::vector<std::size_t> perm(B);
    const auto out_rows = static_cast<Eigen::Index>(actor_.output_size());

    for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), batch_rng_);
        for (std::size_t start = 0; start < B; start += mb) {
            const std::size_t n = std::min(mb, B - start);
            const double inv_n = 1.0 / static_cast<double>(n);
            Eigen::MatrixXd x(batch_.front().input.size(), static_cast<Eigen::Index>(n));
            for (std::size_t j = 0; j < n; ++j) x.col(static_cast<Eigen::Index>(j)) = batch_[perm[start + j]].input;

            Mlp::Cache cache;
            const Eigen::MatrixXd logits = actor_.forward(x, &cache);
            std::vector<Eigen::VectorXd> logp(n), glp(n), gkl(n);
            std::vector<double> ratios(n), kls(n);
            Eigen::MatrixXd d_entropy(out_rows, static_cast<Eigen::Index>(n));
            for (std::size_t j = 0; j < n; ++j) {
                const auto& tr = batch_[perm[start + j]];
                logp[j] = categorical::log_softmax(logits.col(static_cast<Eigen::Index>(j)), blocks_);
                const double lp = categorical::log_prob(logp[j], blocks_, tr.action);
                ratios[j] = ratio(lp, tr.lp_old);
                kls[j] = categorical::kl(logp[j], tr.logp_old, blocks_);
                glp[j] = categorical::grad_log_prob(logp[j], blocks_, tr.action);
                gkl[j] = categorical::grad_kl(logp[j], tr.logp_old, blocks_);
                d_entropy.col(static_cast<Eigen::Index>(j)) =
                    -cfg_.entropy_coef * inv_n * categorical::grad_entropy(logp[j], blocks_);
            }

            // Loss-gradient w.r.t. logits for the selected (largest) loss of one advantage row.
            auto objective_grad = [&](const std::vector<double>& adv, SelectedLoss& sel) {
                const double ncp = surrogate_ncp(ratios, adv);
                const double clip = surrogate_clip(ratios, adv, cfg_.clip_eps);
                const double klv = surrogate_kl(ratios, adv, cfg_.kl_beta, kls);
                sel = select_optimal_loss(-ncp, -clip, -klv);
                if (!std::isfinite(sel.value)) fail("non-finite policy loss");
                ++diag_.selected[static_cast<int>(sel.tag)];
                Eigen::MatrixXd dy(out_rows, static_cast<Eigen::Index>(n));
                for (std::size_t j = 0; j < n; ++j) {
                    const double ra = ratios[j] * adv[j];
                    double coef = ra;
                    if (sel.tag == SurrogateKind::Clip) {
                        const double rc = std::clamp(ratios[j], 1.0 - cfg_.clip_eps, 1.0 + cfg_.clip_eps) * adv[j];
                        coef = ra <= rc ? ra : 0.0;
                    }
                    Eigen::VectorXd g = -inv_n * coef * glp[j];
                    if (sel.tag == SurrogateKind::Kl) g += inv_n * cfg_.kl_beta * gkl[j];
                    dy.col(static_cast<Eigen::Index>(j)) = g;
                }
                return dy;
            };

            Eigen::VectorXd grad;
            if (!lfus) {
                std::vector<double> a(n);
                for (std::size_t j = 0; j < n; ++j) {
                    a[j] = policy_adv_(0, static_cast<Eigen::Index>(perm[start + j]));
                }
                SelectedLoss sel;
                Eigen::MatrixXd dy = objective_grad(a, sel);
                dy += d_entropy;
                grad = actor_.backward(cache, dy);
            } else {
                Eigen::VectorXd g[2];
                double l[2];
                for (Eigen::Index m = 0; m < 2; ++m) {
                    std::vector<double> a(n);
                    for (std::size_t j = 0; j < n; ++j) a[j] = policy_adv_(m, static_cast<Eigen::Index>(perm[start + j]));
                    SelectedLoss sel;
                    const Eigen::MatrixXd dy = objective_grad(a, sel);
                    const double l0 = initial_loss_[static_cast<std::size_t>(m)];
                    g[m] = grad_normalize(actor_.backward(cache, dy), l0);
                    l[m] = l0 != 0.0 ? sel.value / l0 : sel.value;
                }
                const auto comb = lfus_combine(l[0], l[1], g[0], g[1]);
                last_nu_ = comb.nu;
                grad = comb.grad + actor_.backward(cache, d_entropy);
            }
            if (!all_finite(grad)) fail("non-finite actor gradient");
            clip_grad_norm(grad, cfg_.max_grad_norm);
            opt_actor_.step(actor_.params(), grad);

            Mlp::Cache vcache;
            const Eigen::MatrixXd v = critic_.forward(x, &vcache);
            Eigen::MatrixXd resid(v.rows(), v.cols());
            for (std::size_t j = 0; j < n; ++j)
                resid.col(static_cast<Eigen::Index>(j)) =
                    v.col(static_cast<Eigen::Index>(j)) - target_.col(static_cast<Eigen::Index>(perm[start + j]));
            Eigen::MatrixXd coef = Eigen::MatrixXd::Constant(v.rows(), v.cols(), cfg_.value_coef);
            if (strat_.kind == Strategy::Kind::Avus) {
                // homotopy mix of the summed and the preference-weighted squared errors
                double vloss = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const auto jj = static_cast<Eigen::Index>(j);
                    const auto& w = batch_[perm[start + j]].pref;
                    const Objective2 se{resid(0, jj) * resid(0, jj), resid(1, jj) * resid(1, jj)};
                    vloss += inv_n * cfg_.value_coef * avus_loss(se, w, varpi_);
                    coef(0, jj) *= varpi_ + (1.0 - varpi_) * w[0];
                    coef(1, jj) *= varpi_ + (1.0 - varpi_) * w[1];
                }
                if (!std::isfinite(vloss)) fail("non-finite value loss");
            } else if (!resid.allFinite()) {
                fail("non-finite value loss");
            }
            Eigen::MatrixXd dv = 2.0 * inv_n * coef.cwiseProduct(resid);
            Eigen::VectorXd gc = critic_.backward(vcache, dv);
            if (!all_finite(gc)) fail("non-finite critic gradient");
            clip_grad_norm(gc, cfg_.max_grad_norm);
            opt_critic_.step(critic_.params(), gc);
        }
    }
    if (strat_.kind == Strategy::Kind::Avus) varpi_ = std::min(1.0, varpi_ + cfg_.varpi_step);
}

void Trainer::evaluate(TrainResult& out) {
    auto env = make_env_(cfg_.n_actors);
    PolicyHandle policy(actor_, blocks_, conditioned());
    Rng rng = make_stream(seed_, {kStreamEval});
    const std::size_t n_eval = std::max<std::size_t>(1, cfg_.eval_episodes);
    auto add = [&](const Objective2& p, const std::string& pref) {
        out.archive.insert({p[0], p[1], strat_.name, seed_, pref, out.config_hash});
    };
    if (conditioned()) {
        for (std::size_t i = 0; i < cfg_.eval_preferences; ++i) {
            const double w = static_cast<double>(i) / static_cast<double>(cfg_.eval_preferences - 1);
            const Preference p{w, 1.0 - w};
            add(evaluate_policy(policy, *env, p, n_eval, true, kEvalEpisodeBase, rng), pref_label(p));
        }
        out.final_point = evaluate_policy(policy, *env, {0.5, 0.5}, n_eval, true, kEvalEpisodeBase, rng);
    } else {
        out.final_point = evaluate_policy(policy, *env, strat_.weight, n_eval, true, kEvalEpisodeBase, rng);
        add(out.final_point, pref_label(strat_.weight));
        for (std::size_t r = 0; r < cfg_.eval_reruns; ++r) {
            Rng rr = make_stream(seed_, {kStreamEval, r + 1});
            add(evaluate_policy(policy, *env, strat_.weight, n_eval, false, kEvalEpisodeBase, rr),
                pref_label(strat_.weight));
        }
    }
}

TrainResult Trainer::run(const std::string& config_text) {
    setup();
    TrainResult out;
    json h = {{"config", to_json(cfg_)},
              {"strategy", strat_.name},
              {"weight", {strat_.weight[0], strat_.weight[1]}},
              {"extra", config_text}};
    out.config_hash = fnv1a_hex(h.dump());

    for (auto& s : slots_) {
        if (episodes_done_ + 0 < cfg_.episodes) start_episode(s);
        else s.active = false;
    }
    while (episodes_done_ < cfg_.episodes) {
        collect();
        if (batch_.empty()) break;
        update();
        ++diag_.iterations;
    }

    diag_.final_varpi = varpi_;
    diag_.last_nu = last_nu_;
    out.diagnostics = diag_;
    out.curves = std::move(curves_);
    evaluate(out);
    out.checkpoint.nets = {actor_, critic_};
    out.checkpoint.optimizers = {opt_actor_, opt_critic_};
    out.checkpoint.meta = "strategy=" + strat_.name + " seed=" + std::to_string(seed_) + " hash=" + out.config_hash;
    return out;
}

} // namespace

TrainResult train(const Strategy& strategy, const EnvFactory& make_env, const TrainConfig& config, std::uint64_t seed,
                  const std::string& config_text) {
    Trainer t(strategy, make_env, config, seed);
    return t.run(config_text);
}

} // namespace starcco
