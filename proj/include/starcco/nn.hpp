#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "starcco/random.hpp"

namespace starcco {

/// Fully connected network with tanh hidden layers and a linear output.
/// Parameters live in one flat vector: for each layer, W (out x in, column-major) then b.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(std::vector<std::size_t> widths);

    /// Uniform in +-1/sqrt(fan_in) for weights and biases.
    void init(Rng& rng);

    const std::vector<std::size_t>& widths() const { return widths_; }
    std::size_t input_size() const { return widths_.front(); }
    std::size_t output_size() const { return widths_.back(); }
    std::size_t n_params() const { return static_cast<std::size_t>(params_.size()); }
    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }

    struct Cache {
        std::vector<Eigen::MatrixXd> activations;  // layer inputs, then final output
    };

    /// X is (input x batch); returns (output x batch).
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;
    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    /// Gradient of sum(dY .* Y) with respect to the flat parameters.
    Eigen::VectorXd backward(const Cache& cache, const Eigen::MatrixXd& dy) const;

private:
    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

    std::vector<std::size_t> widths_;
    std::vector<std::size_t> offsets_;
    Eigen::VectorXd params_;
};

/// Helpers for a factored categorical distribution whose logits are the
/// concatenation of one block per action component.
namespace categorical {

/// Per-block log-softmax with max subtraction.
Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits, std::span<const std::size_t> blocks);
double log_prob(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks,
                std::span<const int> action);
/// Sum of block entropies.
double entropy(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks);
/// Sum of block KL(new || old).
double kl(const Eigen::Ref<const Eigen::VectorXd>& logp_new, const Eigen::Ref<const Eigen::VectorXd>& logp_old,
          std::span<const std::size_t> blocks);

std::vector<int> sample(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks, Rng& rng);
std::vector<int> argmax(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks);

/// Gradients with respect to the logits.
Eigen::VectorXd grad_log_prob(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks,
                              std::span<const int> action);
Eigen::VectorXd grad_entropy(const Eigen::Ref<const Eigen::VectorXd>& logp, std::span<const std::size_t> blocks);
Eigen::VectorXd grad_kl(const Eigen::Ref<const Eigen::VectorXd>& logp_new,
                        const Eigen::Ref<const Eigen::VectorXd>& logp_old, std::span<const std::size_t> blocks);

} // namespace categorical

struct Adam {
    double lr{1e-3};
    double beta1{0.9};
    double beta2{0.999};
    double eps{1e-8};
    std::int64_t t{0};
    Eigen::VectorXd m;
    Eigen::VectorXd v;

    Adam() = default;
    Adam(std::size_t n, double learning_rate);
    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
};

/// Scales g in place so its Euclidean norm is at most max_norm; returns the original norm.
double clip_grad_norm(Eigen::VectorXd& g, double max_norm);

/// Textual checkpoint of networks and optimizer moments. Values are written as
/// hexadecimal floating point so a load reproduces every bit.
struct Checkpoint {
    std::vector<Mlp> nets;
    std::vector<Adam> optimizers;
    std::string meta;  // free-form single line
};

void save_checkpoint(std::ostream& os, const Checkpoint& c);
Checkpoint load_checkpoint(std::istream& is);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace starcco
