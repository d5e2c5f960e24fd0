#pragma once

// Deep Q-learning: epsilon-greedy acting, bounded FIFO replay, TD targets
// from a periodically synchronized target network, MSE on the taken action.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "acd/actions.hpp"
#include "acd/features.hpp"
#include "acd/nn.hpp"

namespace acd {

struct DqnConfig {
    double learning_rate = 1e-3;
    double gamma = 0.9;
    double epsilon_start = 0.95;
    double epsilon_decay = 0.995;
    std::size_t batch_size = 8;
    std::size_t queue_size = 300;
    std::size_t target_sync_interval = 64;
    std::vector<std::size_t> hidden = {64, 64};

    void validate() const;
    // Best cell of the built-in DQN grid (batch 8, queue 300, lr 1e-3, gamma 0.9, eps 0.95/0.995).
    static DqnConfig best_grid_preset();
};

void to_json(nlohmann::json& j, const DqnConfig& c);
void from_json(const nlohmann::json& j, DqnConfig& c);

struct Transition {
    FeatureVector state;
    std::size_t action = 0;
    double reward = 0.0;
    FeatureVector next_state;
    bool done = false;
};

class ReplayQueue {
public:
    explicit ReplayQueue(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return items_.at(i); }
    // Uniform sample of `n` distinct indices.
    std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
};

// Lowest index wins ties.
std::size_t argmax(const Eigen::VectorXd& values);
std::size_t select_action(const Mlp& net, const FeatureVector& obs, double epsilon, Rng& rng);
double decay_epsilon(double epsilon, double decay);
std::vector<double> td_targets(const Mlp& target_net, const std::vector<const Transition*>& batch, double gamma);

// nullopt when the queue holds fewer than batch_size transitions.
std::optional<double> train_batch(Mlp& net, const Mlp& target_net, const ReplayQueue& queue,
                                  const DqnConfig& config, Adam& opt, Rng& rng);
void sync_target(const Mlp& net, Mlp& target_net);

class DqnAgent {
public:
    DqnAgent(std::size_t obs_size, std::size_t action_count, DqnConfig config, Rng& init_rng);

    std::size_t act(const FeatureVector& obs, Rng& rng) const;
    std::size_t greedy(const FeatureVector& obs) const;
    // Stores the transition and runs one training step if the queue allows.
    std::optional<double> observe(Transition t, Rng& rng);
    void end_episode();

    double epsilon() const { return epsilon_; }
    std::uint64_t train_steps() const { return train_steps_; }
    std::uint64_t target_syncs() const { return target_syncs_; }
    const Mlp& network() const { return net_; }
    const Mlp& target_network() const { return target_; }
    const ReplayQueue& queue() const { return queue_; }
    const DqnConfig& config() const { return config_; }

private:
    DqnConfig config_;
    Mlp net_;
    Mlp target_;
    Adam opt_;
    ReplayQueue queue_;
    double epsilon_;
    std::uint64_t train_steps_ = 0;
    std::uint64_t target_syncs_ = 0;
};

}  // namespace acd
