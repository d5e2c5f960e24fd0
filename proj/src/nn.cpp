#include "acd/nn.hpp"

#include <atomic>
#include <cmath>
#include <fstream>

#include "acd/errors.hpp"

namespace acd {

namespace {

std::uint64_t next_version() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
}

std::vector<DenseLayer> zero_like(const std::vector<DenseLayer>& layers) {
    std::vector<DenseLayer> out;
    out.reserve(layers.size());
    for (const auto& l : layers)
        out.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::VectorXd::Zero(l.bias.size())});
    return out;
}

void check_dims(const std::vector<std::size_t>& dims) {
    if (dims.size() < 2) throw InputError("an MLP needs at least input and output dimensions");
    for (auto d : dims)
        if (d == 0) throw InputError("MLP layer dimensions must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------
// Gradients

double Gradients::norm() const {
    double sq = 0.0;
    for (const auto& l : layers) sq += l.weights.squaredNorm() + l.bias.squaredNorm();
    return std::sqrt(sq);
}

void Gradients::scale(double factor) {
    for (auto& l : layers) {
        l.weights *= factor;
        l.bias *= factor;
    }
}

bool Gradients::all_zero() const {
    for (const auto& l : layers)
        if (!l.weights.isZero(0.0) || !l.bias.isZero(0.0)) return false;
    return true;
}

double clip_grad_norm(Gradients& grads, double max_norm) {
    const double n = grads.norm();
    if (n > max_norm && n > 0.0) grads.scale(max_norm / n);
    return n;
}

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(std::vector<std::size_t> dims, std::mt19937_64& rng, double output_scale) : dims_(std::move(dims)) {
    check_dims(dims_);
    for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
        const auto in = static_cast<Eigen::Index>(dims_[i]);
        const auto out = static_cast<Eigen::Index>(dims_[i + 1]);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> u(-bound, bound);
        DenseLayer l{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index c = 0; c < in; ++c) l.weights(r, c) = u(rng);
        for (Eigen::Index r = 0; r < out; ++r) l.bias(r) = u(rng);
        layers_.push_back(std::move(l));
    }
    layers_.back().weights *= output_scale;
    layers_.back().bias *= output_scale;
    touch();
}

Mlp Mlp::zeros(std::vector<std::size_t> dims) {
    check_dims(dims);
    Mlp m;
    m.dims_ = std::move(dims);
    for (std::size_t i = 0; i + 1 < m.dims_.size(); ++i)
        m.layers_.push_back({Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.dims_[i + 1]),
                                                   static_cast<Eigen::Index>(m.dims_[i])),
                             Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.dims_[i + 1]))});
    m.touch();
    return m;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

std::vector<DenseLayer>& Mlp::mutable_layers() {
    touch();
    return layers_;
}

void Mlp::touch() { version_ = next_version(); }

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    return forward_batch(x);
}

Eigen::VectorXd Mlp::forward(const std::vector<double>& x) const {
    return forward(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x) const {
    if (layers_.empty()) throw StateError("forward on an empty network");
    if (static_cast<std::size_t>(x.rows()) != input_size())
        throw InputError("input has " + std::to_string(x.rows()) + " rows, network expects " +
                         std::to_string(input_size()));
    Eigen::MatrixXd a = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Eigen::MatrixXd z = layers_[i].weights * a;
        z.colwise() += layers_[i].bias;
        a = (i + 1 < layers_.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : std::move(z);
    }
    return a;
}

ForwardCache Mlp::forward_cached(const Eigen::MatrixXd& x) const {
    if (layers_.empty()) throw StateError("forward on an empty network");
    if (static_cast<std::size_t>(x.rows()) != input_size())
        throw InputError("input has " + std::to_string(x.rows()) + " rows, network expects " +
                         std::to_string(input_size()));
    ForwardCache cache;
    cache.version = version_;
    Eigen::MatrixXd a = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        cache.inputs.push_back(a);
        Eigen::MatrixXd z = layers_[i].weights * a;
        z.colwise() += layers_[i].bias;
        cache.pre_activation.push_back(z);
        a = (i + 1 < layers_.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : std::move(z);
    }
    cache.output = std::move(a);
    return cache;
}

Gradients Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& d_output) const {
    if (cache.version != version_ || cache.inputs.size() != layers_.size())
        throw StateError("backward with a cache from a different or since-modified network");
    if (d_output.rows() != cache.output.rows() || d_output.cols() != cache.output.cols())
        throw InputError("upstream gradient shape does not match the network output");

    Gradients g;
    g.layers.resize(layers_.size());
    Eigen::MatrixXd delta = d_output;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        if (i + 1 < layers_.size())
            delta = delta.cwiseProduct((cache.pre_activation[i].array() > 0.0).cast<double>().matrix());
        g.layers[i].weights = delta * cache.inputs[i].transpose();
        g.layers[i].bias = delta.rowwise().sum();
        if (i > 0) delta = layers_[i].weights.transpose() * delta;
    }
    return g;
}

Gradients Mlp::zero_gradients() const { return {zero_like(layers_)}; }

void Mlp::copy_parameters_from(const Mlp& other) {
    if (!same_architecture(other)) throw InputError("cannot copy parameters between different architectures");
    layers_ = other.layers_;
    touch();
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(const Mlp& net, AdamConfig config)
    : config_(config), m_(zero_like(net.layers())), v_(zero_like(net.layers())) {}

void Adam::step(Mlp& net, const Gradients& grads) {
    auto& layers = net.mutable_layers();
    if (grads.layers.size() != layers.size() || m_.size() != layers.size())
        throw InputError("gradient/optimizer shapes do not match the network");
    ++t_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    const double lr = config_.learning_rate, eps = config_.epsilon;

    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        if (param.size() != g.size()) throw InputError("gradient shape mismatch");
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t i = 0; i < layers.size(); ++i) {
        update(layers[i].weights, m_[i].weights, v_[i].weights, grads.layers[i].weights);
        update(layers[i].bias, m_[i].bias, v_[i].bias, grads.layers[i].bias);
    }
}

double adam_step(Mlp& net, Gradients grads, Adam& opt, std::optional<double> clip_norm) {
    if (clip_norm) clip_grad_norm(grads, *clip_norm);
    const double applied = grads.norm();
    opt.step(net, grads);
    return applied;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    if (logits.size() == 0) throw InputError("softmax of an empty vector");
    Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
    return e / e.sum();
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
    if (logits.size() == 0) throw InputError("log_softmax of an empty vector");
    const double m = logits.maxCoeff();
    const double lse = m + std::log((logits.array() - m).exp().sum());
    return logits.array() - lse;
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) out.col(c) = softmax(logits.col(c));
    return out;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& columns) {
    if (columns.empty()) return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(columns.front().size()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != columns.front().size()) throw InputError("ragged batch");
        m.col(static_cast<Eigen::Index>(c)) =
            Eigen::Map<const Eigen::VectorXd>(columns[c].data(), static_cast<Eigen::Index>(columns[c].size()));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Persistence

void to_json(nlohmann::json& j, const Mlp& net) {
    j = nlohmann::json::object();
    j["dims"] = net.dims();
    auto layers = nlohmann::json::array();
    for (const auto& l : net.layers()) {
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(l.weights.size()));
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
        layers.push_back({{"weights", w}, {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
    }
    j["layers"] = layers;
}

void from_json(const nlohmann::json& j, Mlp& net) {
    net = Mlp::zeros(j.at("dims").get<std::vector<std::size_t>>());
    const auto& jl = j.at("layers");
    auto& layers = net.mutable_layers();
    if (jl.size() != layers.size()) throw InputError("layer count does not match dims");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto w = jl[i].at("weights").get<std::vector<double>>();
        const auto b = jl[i].at("bias").get<std::vector<double>>();
        auto& l = layers[i];
        if (w.size() != static_cast<std::size_t>(l.weights.size()) || b.size() != static_cast<std::size_t>(l.bias.size()))
            throw InputError("layer " + std::to_string(i) + " parameter count does not match dims");
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = w[k++];
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = b[static_cast<std::size_t>(r)];
    }
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
    nlohmann::json j;
    j["algorithm"] = model.algorithm;
    j["feature_layout"] = model.feature_layout;
    j["action_encoding"] = model.action_encoding;
    j["networks"] = nlohmann::json::object();
    for (const auto& [name, net] : model.networks) j["networks"][name] = net;
    j["metadata"] = model.metadata;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file " + path.string());
    out << j.dump() << '\n';
    if (!out) throw std::runtime_error("failed writing model file " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed model file " + path.string() + ": " + e.what());
    }
    ModelFile m;
    m.algorithm = j.at("algorithm").get<std::string>();
    m.feature_layout = j.at("feature_layout").get<std::string>();
    m.action_encoding = j.at("action_encoding").get<std::string>();
    for (const auto& [name, jn] : j.at("networks").items()) m.networks[name] = jn.get<Mlp>();
    m.metadata = j.value("metadata", nlohmann::json::object());
    return m;
}

void check_model_compatible(const ModelFile& model, const std::string& feature_layout,
                            const std::string& action_encoding) {
    if (model.feature_layout != feature_layout)
        throw InputError("model feature layout '" + model.feature_layout + "' does not match environment '" +
                         feature_layout + "'");
    if (model.action_encoding != action_encoding)
        throw InputError("model action encoding '" + model.action_encoding + "' does not match environment '" +
                         action_encoding + "'");
}

}  // namespace acd
