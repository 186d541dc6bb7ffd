#include "starcco/nn.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "starcco/common.hpp"

namespace starcco {

Mlp::Mlp(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw InvalidArgument("an MLP needs at least input and output widths");
    for (auto w : widths_)
        if (w == 0) throw InvalidArgument("layer widths must be positive");
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        offsets_.push_back(off);
        off += widths_[l + 1] * widths_[l] + widths_[l + 1];
    }
    params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(off));
}

void Mlp::init(Rng& rng) {
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
        std::uniform_real_distribution<double> u(-bound, bound);
        const std::size_t n = widths_[l + 1] * widths_[l] + widths_[l + 1];
        for (std::size_t k = 0; k < n; ++k) params_[static_cast<Eigen::Index>(offsets_[l] + k)] = u(rng);
    }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
    if (static_cast<std::size_t>(x.rows()) != input_size())
        throw InvalidArgument("input width " + std::to_string(x.rows()) + " does not match network input " +
                              std::to_string(input_size()));
    if (cache) cache->activations.clear();
    Eigen::MatrixXd h = x;
    const std::size_t n_layers = widths_.size() - 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto in = static_cast<Eigen::Index>(widths_[l]);
        const auto out = static_cast<Eigen::Index>(widths_[l + 1]);
        Eigen::Map<const Eigen::MatrixXd> w(params_.data() + offsets_[l], out, in);
        Eigen::Map<const Eigen::VectorXd> b(params_.data() + offsets_[l] + static_cast<std::size_t>(out * in), out);
        if (cache) cache->activations.push_back(h);
        Eigen::MatrixXd z = w * h;
        z.colwise() += b;
        if (l + 1 < n_layers)
            h = z.array().tanh().matrix();
        else
            h = std::move(z);
    }
    if (cache) cache->activations.push_back(h);
    return h;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd m = x;
    return forward(m, nullptr).col(0);
}

Eigen::VectorXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dy) const {
    const std::size_t n_layers = widths_.size() - 1;
    if (cache.activations.size() != n_layers + 1) throw InvalidArgument("backward needs a forward cache");
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
    Eigen::MatrixXd delta = dy;
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto in = static_cast<Eigen::Index>(widths_[l]);
        const auto out = static_cast<Eigen::Index>(widths_[l + 1]);
        const Eigen::MatrixXd& a = cache.activations[l];
        Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], out, in);
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + static_cast<std::size_t>(out * in), out);
        gw.noalias() = delta * a.transpose();
        gb = delta.rowwise().sum();
        if (l > 0) {
            Eigen::Map<const Eigen::MatrixXd> w(params_.data() + offsets_[l], out, in);
            Eigen::MatrixXd back = w.transpose() * delta;
            // a = tanh(z) for hidden layers
            delta = (back.array() * (1.0 - a.array().square())).matrix();
        }
    }
    return grad;
}

namespace categorical {

namespace {

void check_blocks(Eigen::Index n, std::span<const std::size_t> blocks) {
    std::size_t total = 0;
    for (auto b : blocks) total += b;
    if (total != static_cast<std::size_t>(n)) throw InvalidArgument("logit count does not match action blocks");
}

} // namespace

Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits, std::span<const std::size_t> blocks) {
    check_blocks(logits.size(), blocks);
    Eigen::VectorXd out(logits.size());
    Eigen::Index off = 0;
    for (auto b : blocks) {
        const auto n = static_cast<Eigen::Index>(b);
        const auto seg = logits.segment(off, n);
        const double mx = seg.maxCoeff();
        const double lse = mx + std::log((seg.array() - mx).exp().sum());
        out.segment(off, n) = seg.array() - lse;
        off += n;
    }
    return out;
}

double log_prob(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks,
                std::span<const int> action) {
    if (action.size() != blocks.size()) throw InvalidArgument("action length does not match action blocks");
    double lp = 0.0;
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        lp += logp[off + action[i]];
        off += static_cast<Eigen::Index>(blocks[i]);
    }
    return lp;
}

double entropy(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks) {
    check_blocks(logp.size(), blocks);
    return -(logp.array().exp() * logp.array()).sum();
}

double kl(const Eigen::Ref<const Eigen::VectorXd>& logp_new, const Eigen::Ref<const Eigen::VectorXd>& logp_old,
          std::span<const std::size_t> blocks) {
    check_blocks(logp_new.size(), blocks);
    return (logp_new.array().exp() * (logp_new - logp_old).array()).sum();
}

std::vector<int> sample(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks, Rng& rng) {
    check_blocks(logp.size(), blocks);
    std::vector<int> a;
    a.reserve(blocks.size());
    Eigen::Index off = 0;
    for (auto b : blocks) {
        double u = uniform01(rng);
        int pick = static_cast<int>(b) - 1;
        for (std::size_t j = 0; j < b; ++j) {
            u -= std::exp(logp[off + static_cast<Eigen::Index>(j)]);
            if (u < 0.0) {
                pick = static_cast<int>(j);
                break;
            }
        }
        a.push_back(pick);
        off += static_cast<Eigen::Index>(b);
    }
    return a;
}

std::vector<int> argmax(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks) {
    check_blocks(logp.size(), blocks);
    std::vector<int> a;
    a.reserve(blocks.size());
    Eigen::Index off = 0;
    for (auto b : blocks) {
        Eigen::Index idx = 0;
        logp.segment(off, static_cast<Eigen::Index>(b)).maxCoeff(&idx);
        a.push_back(static_cast<int>(idx));
        off += static_cast<Eigen::Index>(b);
    }
    return a;
}

Eigen::VectorXd grad_log_prob(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks,
                              std::span<const int> action) {
    check_blocks(logp.size(), blocks);
    Eigen::VectorXd g = -logp.array().exp().matrix();
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        g[off + action[i]] += 1.0;
        off += static_cast<Eigen::Index>(blocks[i]);
    }
    return g;
}

Eigen::VectorXd grad_entropy(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks) {
    check_blocks(logp.size(), blocks);
    Eigen::VectorXd g(logp.size());
    Eigen::Index off = 0;
    for (auto b : blocks) {
        const auto n = static_cast<Eigen::Index>(b);
        const Eigen::ArrayXd lp = logp.segment(off, n).array();
        const Eigen::ArrayXd p = lp.exp();
        const double h = -(p * lp).sum();
        g.segment(off, n) = (-p * (lp + h)).matrix();
        off += n;
    }
    return g;
}

Eigen::VectorXd grad_kl(const Eigen::Ref<const Eigen::VectorXd>& logp_new,
                        const Eigen::Ref<const Eigen::VectorXd>& logp_old, std::span<const std::size_t> blocks) {
    check_blocks(logp_new.size(), blocks);
    Eigen::VectorXd g(logp_new.size());
    Eigen::Index off = 0;
    for (auto b : blocks) {
        const auto n = static_cast<Eigen::Index>(b);
        const Eigen::ArrayXd d = (logp_new.segment(off, n) - logp_old.segment(off, n)).array();
        const Eigen::ArrayXd p = logp_new.segment(off, n).array().exp();
        const double k = (p * d).sum();
        g.segment(off, n) = (p * (d - k)).matrix();
        off += n;
    }
    return g;
}

} // namespace categorical

Adam::Adam(std::size_t n, double learning_rate)
    : lr(learning_rate),
      m(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
      v(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (params.size() != grad.size() || params.size() != m.size())
        throw InvalidArgument("Adam: parameter, gradient and moment sizes differ");
    ++t;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

double clip_grad_norm(Eigen::VectorXd& g, double max_norm) {
    const double n = g.norm();
    if (n > max_norm && n > 0.0) g *= max_norm / n;
    return n;
}

namespace {

void write_vec(std::ostream& os, const char* tag, const Eigen::VectorXd& v) {
    os << tag << ' ' << v.size();
    char buf[64];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, " %a", v[i]);
        os << buf;
    }
    os << '\n';
}

Eigen::VectorXd read_vec(std::istream& is, const char* tag) {
    std::string t;
    Eigen::Index n = 0;
    if (!(is >> t >> n) || t != tag) throw InvalidArgument(std::string("checkpoint: expected '") + tag + "'");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::string tok;
        if (!(is >> tok)) throw InvalidArgument("checkpoint: truncated vector");
        v[i] = std::strtod(tok.c_str(), nullptr);
    }
    return v;
}

} // namespace

void save_checkpoint(std::ostream& os, const Checkpoint& c) {
    os << "starcco-checkpoint 1\n";
    os << "meta " << c.meta << '\n';
    os << "nets " << c.nets.size() << '\n';
    for (const auto& n : c.nets) {
        os << "widths " << n.widths().size();
        for (auto w : n.widths()) os << ' ' << w;
        os << '\n';
        write_vec(os, "params", n.params());
    }
    os << "optimizers " << c.optimizers.size() << '\n';
    char buf[160];
    for (const auto& a : c.optimizers) {
        std::snprintf(buf, sizeof buf, "adam %a %a %a %a %lld\n", a.lr, a.beta1, a.beta2, a.eps,
                      static_cast<long long>(a.t));
        os << buf;
        write_vec(os, "m", a.m);
        write_vec(os, "v", a.v);
    }
}

Checkpoint load_checkpoint(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "starcco-checkpoint" || version != 1)
        throw InvalidArgument("not a version 1 checkpoint");
    Checkpoint c;
    std::string tag;
    is >> tag;
    if (tag != "meta") throw InvalidArgument("checkpoint: expected 'meta'");
    std::getline(is, c.meta);
    if (!c.meta.empty() && c.meta.front() == ' ') c.meta.erase(0, 1);
    std::size_t n = 0;
    if (!(is >> tag >> n) || tag != "nets") throw InvalidArgument("checkpoint: expected 'nets'");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t nw = 0;
        if (!(is >> tag >> nw) || tag != "widths") throw InvalidArgument("checkpoint: expected 'widths'");
        std::vector<std::size_t> w(nw);
        for (auto& x : w) is >> x;
        Mlp net(w);
        Eigen::VectorXd p = read_vec(is, "params");
        if (p.size() != net.params().size()) throw InvalidArgument("checkpoint: parameter count mismatch");
        net.params() = p;
        c.nets.push_back(std::move(net));
    }
    if (!(is >> tag >> n) || tag != "optimizers") throw InvalidArgument("checkpoint: expected 'optimizers'");
    for (std::size_t k = 0; k < n; ++k) {
        std::string lr, b1, b2, eps;
        long long t = 0;
        if (!(is >> tag >> lr >> b1 >> b2 >> eps >> t) || tag != "adam")
            throw InvalidArgument("checkpoint: expected 'adam'");
        Adam a;
        a.lr = std::strtod(lr.c_str(), nullptr);
        a.beta1 = std::strtod(b1.c_str(), nullptr);
        a.beta2 = std::strtod(b2.c_str(), nullptr);
        a.eps = std::strtod(eps.c_str(), nullptr);
        a.t = t;
        a.m = read_vec(is, "m");
        a.v = read_vec(is, "v");
        c.optimizers.push_back(std::move(a));
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write checkpoint " + path.string());
    save_checkpoint(os, c);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw InvalidArgument("cannot read checkpoint " + path.string());
    return load_checkpoint(is);
}

} // namespace starcco
