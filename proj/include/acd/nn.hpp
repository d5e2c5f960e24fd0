#pragma once

// Dense feedforward network (rectifier hidden layers, identity output) with
// reverse-mode gradients and an Adam optimizer. Batches are column-major:
// one sample per column.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace acd {

struct DenseLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;     // out
};

struct ForwardCache {
    std::vector<Eigen::MatrixXd> inputs;       // input to each layer
    std::vector<Eigen::MatrixXd> pre_activation;
    Eigen::MatrixXd output;
    std::uint64_t version = 0;
};

struct Gradients {
    std::vector<DenseLayer> layers;

    double norm() const;
    void scale(double factor);
    bool all_zero() const;
};

class Mlp {
public:
    Mlp() = default;
    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init; the last layer is
    // multiplied by `output_scale`.
    Mlp(std::vector<std::size_t> dims, std::mt19937_64& rng, double output_scale = 1.0);
    static Mlp zeros(std::vector<std::size_t> dims);

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t input_size() const { return dims_.front(); }
    std::size_t output_size() const { return dims_.back(); }
    std::size_t parameter_count() const;

    const std::vector<DenseLayer>& layers() const { return layers_; }
    // Every mutable access invalidates outstanding caches.
    std::vector<DenseLayer>& mutable_layers();
    std::uint64_t version() const { return version_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::VectorXd forward(const std::vector<double>& x) const;
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;
    ForwardCache forward_cached(const Eigen::MatrixXd& x) const;
    // Parameter gradients summed over the batch columns.
    Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& d_output) const;
    Gradients zero_gradients() const;

    void copy_parameters_from(const Mlp& other);
    bool same_architecture(const Mlp& other) const { return dims_ == other.dims_; }

private:
    void touch();

    std::vector<std::size_t> dims_;
    std::vector<DenseLayer> layers_;
    std::uint64_t version_ = 0;
};

// Rescales in place so the global norm is at most `max_norm`; returns the
// norm before clipping.
double clip_grad_norm(Gradients& grads, double max_norm);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class Adam {
public:
    Adam() = default;
    Adam(const Mlp& net, AdamConfig config);

    void step(Mlp& net, const Gradients& grads);
    const AdamConfig& config() const { return config_; }
    std::uint64_t steps() const { return t_; }

private:
    AdamConfig config_;
    std::vector<DenseLayer> m_;
    std::vector<DenseLayer> v_;
    std::uint64_t t_ = 0;
};

// Optional global-norm clip followed by one Adam update. Returns the applied
// (post-clip) gradient norm.
double adam_step(Mlp& net, Gradients grads, Adam& opt, std::optional<double> clip_norm = std::nullopt);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);
// Column-wise over a batch of logits.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& columns);

void to_json(nlohmann::json& j, const Mlp& net);
void from_json(const nlohmann::json& j, Mlp& net);

// On-disk model: networks plus the fingerprints that tie them to an
// observation layout and an action encoding.
struct ModelFile {
    std::string algorithm;
    std::string feature_layout;
    std::string action_encoding;
    std::map<std::string, Mlp> networks;
    nlohmann::json metadata = nlohmann::json::object();
};

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);
// Throws InputError if either fingerprint disagrees.
void check_model_compatible(const ModelFile& model, const std::string& feature_layout,
                            const std::string& action_encoding);

}  // namespace acd
