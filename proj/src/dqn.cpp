#include "acd/dqn.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "acd/errors.hpp"

namespace acd {

void DqnConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("dqn learning_rate must be > 0");
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError("dqn gamma must lie in [0,1]");
    if (epsilon_start < 0.0 || epsilon_start > 1.0) throw ConfigError("dqn epsilon must lie in [0,1]");
    if (epsilon_decay < 0.0 || epsilon_decay > 1.0) throw ConfigError("dqn epsilon_decay must lie in [0,1]");
    if (batch_size == 0) throw ConfigError("dqn batch_size must be > 0");
    if (batch_size > queue_size) throw ConfigError("dqn batch_size must not exceed queue_size");
    if (target_sync_interval == 0) throw ConfigError("dqn target_sync_interval must be > 0");
}

DqnConfig DqnConfig::best_grid_preset() { return DqnConfig{}; }

void to_json(nlohmann::json& j, const DqnConfig& c) {
    j = {{"learning_rate", c.learning_rate},     {"gamma", c.gamma},
         {"epsilon", c.epsilon_start},           {"epsilon_decay", c.epsilon_decay},
         {"batch_size", c.batch_size},           {"queue_size", c.queue_size},
         {"target_sync_interval", c.target_sync_interval}, {"hidden", c.hidden}};
}

void from_json(const nlohmann::json& j, DqnConfig& c) {
    c = DqnConfig{};
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.gamma = j.value("gamma", c.gamma);
    c.epsilon_start = j.value("epsilon", c.epsilon_start);
    c.epsilon_decay = j.value("epsilon_decay", c.epsilon_decay);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.queue_size = j.value("queue_size", c.queue_size);
    c.target_sync_interval = j.value("target_sync_interval", c.target_sync_interval);
    c.hidden = j.value("hidden", c.hidden);
    c.validate();
}

// ---------------------------------------------------------------------------

ReplayQueue::ReplayQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay queue capacity must be > 0");
}

void ReplayQueue::push(Transition t) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(t));
}

std::vector<std::size_t> ReplayQueue::sample_indices(std::size_t n, Rng& rng) const {
    if (n > items_.size()) throw InputError("sample larger than the replay queue");
    // Partial Fisher-Yates.
    std::vector<std::size_t> idx(items_.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n);
    return idx;
}

std::size_t argmax(const Eigen::VectorXd& values) {
    if (values.size() == 0) throw InputError("argmax of an empty vector");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i)
        if (values(i) > values(best)) best = i;
    return static_cast<std::size_t>(best);
}

std::size_t select_action(const Mlp& net, const FeatureVector& obs, double epsilon, Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0) throw InputError("epsilon must lie in [0,1]");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, net.output_size() - 1);
        return pick(rng);
    }
    return argmax(net.forward(obs));
}

double decay_epsilon(double epsilon, double decay) { return epsilon * decay; }

std::vector<double> td_targets(const Mlp& target_net, const std::vector<const Transition*>& batch, double gamma) {
    if (batch.empty()) throw InputError("td_targets on an empty batch");
    std::vector<FeatureVector> next;
    next.reserve(batch.size());
    for (const auto* t : batch) next.push_back(t->next_state);
    const Eigen::MatrixXd q_next = target_net.forward_batch(to_matrix(next));
    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& t = *batch[i];
        y[i] = t.done ? t.reward : t.reward + gamma * q_next.col(static_cast<Eigen::Index>(i)).maxCoeff();
    }
    return y;
}

std::optional<double> train_batch(Mlp& net, const Mlp& target_net, const ReplayQueue& queue,
                                  const DqnConfig& config, Adam& opt, Rng& rng) {
    if (queue.size() < config.batch_size) return std::nullopt;
    const auto idx = queue.sample_indices(config.batch_size, rng);
    std::vector<const Transition*> batch;
    std::vector<FeatureVector> states;
    for (auto i : idx) {
        batch.push_back(&queue.at(i));
        states.push_back(queue.at(i).state);
    }
    const auto y = td_targets(target_net, batch, config.gamma);
    const auto cache = net.forward_cached(to_matrix(states));

    const double n = static_cast<double>(batch.size());
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(cache.output.rows(), cache.output.cols());
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        const auto row = static_cast<Eigen::Index>(batch[i]->action);
        const double err = cache.output(row, col) - y[i];
        loss += err * err;
        d_out(row, col) = 2.0 * err / n;
    }
    opt.step(net, net.backward(cache, d_out));
    return loss / n;
}

void sync_target(const Mlp& net, Mlp& target_net) { target_net.copy_parameters_from(net); }

// ---------------------------------------------------------------------------

namespace {
std::vector<std::size_t> layer_dims(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    std::vector<std::size_t> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}
}  // namespace

DqnAgent::DqnAgent(std::size_t obs_size, std::size_t action_count, DqnConfig config, Rng& init_rng)
    : config_((config.validate(), std::move(config))),
      net_(layer_dims(obs_size, config_.hidden, action_count), init_rng),
      target_(net_),
      opt_(net_, AdamConfig{config_.learning_rate}),
      queue_(config_.queue_size),
      epsilon_(config_.epsilon_start) {}

std::size_t DqnAgent::act(const FeatureVector& obs, Rng& rng) const {
    return select_action(net_, obs, epsilon_, rng);
}

std::size_t DqnAgent::greedy(const FeatureVector& obs) const { return argmax(net_.forward(obs)); }

std::optional<double> DqnAgent::observe(Transition t, Rng& rng) {
    queue_.push(std::move(t));
    auto loss = train_batch(net_, target_, queue_, config_, opt_, rng);
    if (loss) {
        ++train_steps_;
        if (train_steps_ % config_.target_sync_interval == 0) {
            sync_target(net_, target_);
            ++target_syncs_;
        }
    }
    return loss;
}

void DqnAgent::end_episode() { epsilon_ = decay_epsilon(epsilon_, config_.epsilon_decay); }

}  // namespace acd
