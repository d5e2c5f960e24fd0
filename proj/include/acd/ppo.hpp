#pragma once

// Proximal policy optimization with separate actor and critic networks,
// generalized advantage estimation, the clipped surrogate objective, an
// entropy bonus with per-update decay and per-network gradient clipping.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "acd/actions.hpp"
#include "acd/features.hpp"
#include "acd/nn.hpp"

namespace acd {

struct PpoConfig {
    std::size_t episode_size = 32;
    std::size_t batch_size = 256;
    std::size_t training_interval = 256;  // timesteps between updates
    double critic_lr = 0.0016;
    double policy_lr = 0.0016;
    std::size_t epochs = 30;
    double policy_clip = 0.2;
    double entropy_coef = 0.005;
    double entropy_decay = 0.99;
    std::optional<double> critic_grad_clip = 0.1;
    std::optional<double> policy_grad_clip = 0.5;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    std::vector<std::size_t> hidden = {64, 64};

    void validate() const;
    static PpoConfig optimized();  // tuned: batch 256, entropy bonus, gradient clipping
    static PpoConfig original();   // batch 16, no entropy bonus, no clipping
};

void to_json(nlohmann::json& j, const PpoConfig& c);
// Accepts a "preset" key ("ppo-optimized" | "ppo-original") as the base.
void from_json(const nlohmann::json& j, PpoConfig& c);

struct RolloutRecord {
    FeatureVector state;
    std::size_t action = 0;
    double log_prob = 0.0;
    double value = 0.0;
    double reward = 0.0;
    bool done = false;
};

class RolloutBuffer {
public:
    explicit RolloutBuffer(std::size_t capacity);

    void push(RolloutRecord r);
    bool full() const { return records_.size() >= capacity_; }
    std::size_t size() const { return records_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::vector<RolloutRecord>& records() const { return records_; }
    void clear() { records_.clear(); }

private:
    std::size_t capacity_;
    std::vector<RolloutRecord> records_;
};

struct ActionSample {
    std::size_t action = 0;
    double log_prob = 0.0;
    double value = 0.0;
};

ActionSample sample_action(const Mlp& actor, const Mlp& critic, const FeatureVector& obs, Rng& rng);
// Inverse-CDF draw from a probability vector.
std::size_t sample_categorical(const Eigen::VectorXd& probs, Rng& rng);

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

// `values` carries one trailing bootstrap entry beyond `rewards`.
GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<bool>& dones, double gamma, double lambda);

// Per-sample clipped surrogate min(r*A, clip(r, 1-eps, 1+eps)*A).
double clipped_surrogate(double ratio, double advantage, double clip);
double actor_loss(const std::vector<double>& new_log_probs, const std::vector<double>& old_log_probs,
                  const std::vector<double>& advantages, double clip, double entropy_coef,
                  const std::vector<double>& entropies);
double critic_loss(const std::vector<double>& old_values, const std::vector<double>& advantages,
                   const std::vector<double>& new_values);

void normalize_advantages(std::vector<double>& advantages);

// Minibatch actor loss (mean over columns) and its gradient with respect to
// the logits, one sample per column.
struct ActorObjective {
    double loss = 0.0;
    Eigen::MatrixXd d_logits;
    double max_ratio_deviation = 0.0;
};
ActorObjective actor_objective(const Eigen::MatrixXd& logits, const std::vector<std::size_t>& actions,
                               const std::vector<double>& old_log_probs, const std::vector<double>& advantages,
                               double clip, double entropy_coef);

struct UpdateStats {
    double mean_actor_loss = 0.0;
    double mean_critic_loss = 0.0;
    std::size_t minibatches = 0;
    // |ratio - 1| maximum over the very first minibatch of the first epoch.
    double first_minibatch_ratio_deviation = 0.0;
    double max_actor_grad_norm_applied = 0.0;
    double max_critic_grad_norm_applied = 0.0;
};

struct PpoNetworks {
    Mlp actor;
    Mlp critic;
    Adam actor_opt;
    Adam critic_opt;
};

// One PPO update over a full buffer. `bootstrap_value` is V(s) of the state
// following the last record (ignored when that record is terminal).
// Decays config.entropy_coef in place and clears the buffer.
UpdateStats update(PpoNetworks& nets, RolloutBuffer& buffer, PpoConfig& config, double bootstrap_value, Rng& rng);

class PpoAgent {
public:
    PpoAgent(std::size_t obs_size, std::size_t action_count, PpoConfig config, Rng& init_rng);

    ActionSample act(const FeatureVector& obs, Rng& rng) const;
    std::size_t greedy(const FeatureVector& obs) const;
    // Records the step; runs an update when the buffer fills.
    std::optional<UpdateStats> observe(const FeatureVector& obs, const ActionSample& s, double reward, bool done,
                                       const FeatureVector& next_obs, Rng& rng);

    const PpoConfig& config() const { return config_; }
    double entropy_coef() const { return config_.entropy_coef; }
    std::size_t updates() const { return updates_; }
    const Mlp& actor() const { return nets_.actor; }
    const Mlp& critic() const { return nets_.critic; }
    const RolloutBuffer& buffer() const { return buffer_; }

private:
    PpoConfig config_;
    PpoNetworks nets_;
    RolloutBuffer buffer_;
    std::size_t updates_ = 0;
};

}  // namespace acd
