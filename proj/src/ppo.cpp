#include "acd/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "acd/errors.hpp"

namespace acd {

void PpoConfig::validate() const {
    if (episode_size == 0) throw ConfigError("ppo episode_size must be > 0");
    if (batch_size == 0) throw ConfigError("ppo batch_size must be > 0");
    if (training_interval == 0) throw ConfigError("ppo training_interval must be > 0");
    if (batch_size > training_interval) throw ConfigError("ppo batch_size must not exceed training_interval");
    if (!(critic_lr > 0.0) || !(policy_lr > 0.0)) throw ConfigError("ppo learning rates must be > 0");
    if (epochs == 0) throw ConfigError("ppo epochs must be > 0");
    if (!(policy_clip > 0.0 && policy_clip < 1.0)) throw ConfigError("ppo policy_clip must lie in (0,1)");
    if (entropy_coef < 0.0) throw ConfigError("ppo entropy_coef must be >= 0");
    if (entropy_decay < 0.0) throw ConfigError("ppo entropy_decay must be >= 0");
    if (critic_grad_clip && !(*critic_grad_clip > 0.0)) throw ConfigError("ppo critic_grad_clip must be > 0");
    if (policy_grad_clip && !(*policy_grad_clip > 0.0)) throw ConfigError("ppo policy_grad_clip must be > 0");
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError("ppo gamma must lie in [0,1]");
    if (gae_lambda < 0.0 || gae_lambda > 1.0) throw ConfigError("ppo gae_lambda must lie in [0,1]");
}

PpoConfig PpoConfig::optimized() { return PpoConfig{}; }

PpoConfig PpoConfig::original() {
    PpoConfig c;
    c.batch_size = 16;
    c.training_interval = 16;
    c.critic_lr = 0.001;
    c.policy_lr = 0.001;
    c.policy_clip = 0.15;
    c.entropy_coef = 0.0;
    c.entropy_decay = 0.0;
    c.critic_grad_clip.reset();
    c.policy_grad_clip.reset();
    return c;
}

void to_json(nlohmann::json& j, const PpoConfig& c) {
    j = {{"episode_size", c.episode_size},   {"batch_size", c.batch_size},
         {"training_interval", c.training_interval}, {"critic_lr", c.critic_lr},
         {"policy_lr", c.policy_lr},         {"epochs", c.epochs},
         {"policy_clip", c.policy_clip},     {"entropy_coef", c.entropy_coef},
         {"entropy_decay", c.entropy_decay}, {"gamma", c.gamma},
         {"gae_lambda", c.gae_lambda},       {"hidden", c.hidden}};
    j["critic_grad_clip"] = c.critic_grad_clip ? nlohmann::json(*c.critic_grad_clip) : nlohmann::json(nullptr);
    j["policy_grad_clip"] = c.policy_grad_clip ? nlohmann::json(*c.policy_grad_clip) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, PpoConfig& c) {
    const auto preset = j.value("preset", std::string("ppo-optimized"));
    if (preset == "ppo-optimized") c = PpoConfig::optimized();
    else if (preset == "ppo-original") c = PpoConfig::original();
    else throw ConfigError("unknown ppo preset '" + preset + "'");

    c.episode_size = j.value("episode_size", c.episode_size);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.training_interval = j.value("training_interval", c.training_interval);
    c.critic_lr = j.value("critic_lr", c.critic_lr);
    c.policy_lr = j.value("policy_lr", c.policy_lr);
    c.epochs = j.value("epochs", c.epochs);
    c.policy_clip = j.value("policy_clip", c.policy_clip);
    c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
    c.entropy_decay = j.value("entropy_decay", c.entropy_decay);
    c.gamma = j.value("gamma", c.gamma);
    c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
    c.hidden = j.value("hidden", c.hidden);
    for (auto [key, field] : {std::pair{"critic_grad_clip", &c.critic_grad_clip},
                              std::pair{"policy_grad_clip", &c.policy_grad_clip}}) {
        if (!j.contains(key)) continue;
        if (j.at(key).is_null()) field->reset();
        else *field = j.at(key).get<double>();
    }
    c.validate();
}

// ---------------------------------------------------------------------------

RolloutBuffer::RolloutBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("rollout buffer capacity must be > 0");
    records_.reserve(capacity);
}

void RolloutBuffer::push(RolloutRecord r) {
    if (full()) throw StateError("rollout buffer is full; run an update first");
    records_.push_back(std::move(r));
}

std::size_t sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double cum = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        cum += probs(i);
        if (u < cum) return static_cast<std::size_t>(i);
    }
    // Rounding left u above the final cumulative sum: take the last non-zero entry.
    for (Eigen::Index i = probs.size(); i-- > 0;)
        if (probs(i) > 0.0) return static_cast<std::size_t>(i);
    return 0;
}

ActionSample sample_action(const Mlp& actor, const Mlp& critic, const FeatureVector& obs, Rng& rng) {
    const Eigen::VectorXd logits = actor.forward(obs);
    const Eigen::VectorXd logp = log_softmax(logits);
    const std::size_t a = sample_categorical(logp.array().exp().matrix(), rng);
    return {a, logp(static_cast<Eigen::Index>(a)), critic.forward(obs)(0)};
}

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<bool>& dones, double gamma, double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n + 1 || dones.size() != n)
        throw InputError("compute_gae needs |values| = |rewards| + 1 and |dones| = |rewards|");
    GaeResult out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double next_adv = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        const double not_done = dones[t] ? 0.0 : 1.0;
        const double delta = rewards[t] + gamma * values[t + 1] * not_done - values[t];
        next_adv = delta + gamma * lambda * not_done * next_adv;
        out.advantages[t] = next_adv;
        out.returns[t] = next_adv + values[t];
    }
    return out;
}

double clipped_surrogate(double ratio, double advantage, double clip) {
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    return std::min(ratio * advantage, clipped * advantage);
}

double actor_loss(const std::vector<double>& new_log_probs, const std::vector<double>& old_log_probs,
                  const std::vector<double>& advantages, double clip, double entropy_coef,
                  const std::vector<double>& entropies) {
    const std::size_t n = new_log_probs.size();
    if (old_log_probs.size() != n || advantages.size() != n || entropies.size() != n || n == 0)
        throw InputError("actor_loss inputs must be non-empty and of equal length");
    double surrogate = 0.0, entropy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        surrogate += clipped_surrogate(std::exp(new_log_probs[i] - old_log_probs[i]), advantages[i], clip);
        entropy += entropies[i];
    }
    return -surrogate / static_cast<double>(n) - entropy_coef * entropy / static_cast<double>(n);
}

double critic_loss(const std::vector<double>& old_values, const std::vector<double>& advantages,
                   const std::vector<double>& new_values) {
    const std::size_t n = old_values.size();
    if (advantages.size() != n || new_values.size() != n || n == 0)
        throw InputError("critic_loss inputs must be non-empty and of equal length");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = old_values[i] + advantages[i] - new_values[i];
        sum += e * e;
    }
    return sum / static_cast<double>(n);
}

void normalize_advantages(std::vector<double>& advantages) {
    if (advantages.size() < 2) return;
    const double n = static_cast<double>(advantages.size());
    const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / n);
    for (double& a : advantages) a = (a - mean) / (sd + 1e-8);
}

// ---------------------------------------------------------------------------

ActorObjective actor_objective(const Eigen::MatrixXd& logits, const std::vector<std::size_t>& actions,
                               const std::vector<double>& old_log_probs, const std::vector<double>& advantages,
                               double clip, double entropy_coef) {
    const auto m = logits.cols();
    if (m == 0 || actions.size() != static_cast<std::size_t>(m) || old_log_probs.size() != actions.size() ||
        advantages.size() != actions.size())
        throw InputError("actor_objective inputs must be non-empty and match the logits batch");
    const double inv_m = 1.0 / static_cast<double>(m);
    ActorObjective out;
    out.d_logits.resize(logits.rows(), m);
    for (Eigen::Index c = 0; c < m; ++c) {
        const auto k = static_cast<std::size_t>(c);
        const Eigen::VectorXd logp = log_softmax(logits.col(c));
        const Eigen::VectorXd p = logp.array().exp();
        const double entropy = -(p.array() * logp.array()).sum();
        const auto a = static_cast<Eigen::Index>(actions[k]);
        if (a >= logits.rows()) throw InputError("action index out of range");
        const double ratio = std::exp(logp(a) - old_log_probs[k]);
        out.max_ratio_deviation = std::max(out.max_ratio_deviation, std::abs(ratio - 1.0));

        const double unclipped = ratio * advantages[k];
        const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * advantages[k];
        const double d_surrogate_d_logp = unclipped <= clipped ? unclipped : 0.0;
        out.loss += (-std::min(unclipped, clipped) - entropy_coef * entropy) * inv_m;

        // d(-surrogate)/dlogits = -g * (onehot - p); d(-c*H)/dlogits = c * p * (logp + H).
        Eigen::VectorXd g = d_surrogate_d_logp * p;
        g(a) -= d_surrogate_d_logp;
        g += entropy_coef * (p.array() * (logp.array() + entropy)).matrix();
        out.d_logits.col(c) = g * inv_m;
    }
    return out;
}

UpdateStats update(PpoNetworks& nets, RolloutBuffer& buffer, PpoConfig& config, double bootstrap_value, Rng& rng) {
    if (!buffer.full()) throw StateError("PPO update requires a full rollout buffer");
    const auto& recs = buffer.records();
    const std::size_t n = recs.size();

    std::vector<double> rewards(n), values(n + 1);
    std::vector<bool> dones(n);
    for (std::size_t i = 0; i < n; ++i) {
        rewards[i] = recs[i].reward;
        values[i] = recs[i].value;
        dones[i] = recs[i].done;
    }
    values[n] = recs.back().done ? 0.0 : bootstrap_value;
    const auto gae = compute_gae(rewards, values, dones, config.gamma, config.gae_lambda);
    std::vector<double> norm_adv = gae.advantages;
    normalize_advantages(norm_adv);

    UpdateStats stats;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const double coef = config.entropy_coef;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t end = std::min(n, start + config.batch_size);
            const auto m = static_cast<Eigen::Index>(end - start);
            const double inv_m = 1.0 / static_cast<double>(m);

            Eigen::MatrixXd x(static_cast<Eigen::Index>(recs.front().state.size()), m);
            for (Eigen::Index c = 0; c < m; ++c) {
                const auto& s = recs[order[start + static_cast<std::size_t>(c)]].state;
                x.col(c) = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
            }

            // Actor.
            const auto actor_cache = nets.actor.forward_cached(x);
            std::vector<std::size_t> actions(static_cast<std::size_t>(m));
            std::vector<double> old_logp(actions.size()), adv(actions.size());
            for (std::size_t c = 0; c < actions.size(); ++c) {
                const std::size_t i = order[start + c];
                actions[c] = recs[i].action;
                old_logp[c] = recs[i].log_prob;
                adv[c] = norm_adv[i];
            }
            const auto obj = actor_objective(actor_cache.output, actions, old_logp, adv, config.policy_clip, coef);
            if (epoch == 0 && start == 0) stats.first_minibatch_ratio_deviation = obj.max_ratio_deviation;
            const auto& d_logits = obj.d_logits;
            const double actor_norm =
                adam_step(nets.actor, nets.actor.backward(actor_cache, d_logits), nets.actor_opt, config.policy_grad_clip);

            // Critic.
            const auto critic_cache = nets.critic.forward_cached(x);
            Eigen::MatrixXd d_value(1, m);
            double critic_loss_sum = 0.0;
            for (Eigen::Index c = 0; c < m; ++c) {
                const std::size_t i = order[start + static_cast<std::size_t>(c)];
                const double target = values[i] + gae.advantages[i];
                const double err = target - critic_cache.output(0, c);
                critic_loss_sum += err * err;
                d_value(0, c) = -2.0 * err * inv_m;
            }
            const double critic_norm = adam_step(nets.critic, nets.critic.backward(critic_cache, d_value),
                                                 nets.critic_opt, config.critic_grad_clip);

            stats.mean_actor_loss += obj.loss;
            stats.mean_critic_loss += critic_loss_sum * inv_m;
            stats.max_actor_grad_norm_applied = std::max(stats.max_actor_grad_norm_applied, actor_norm);
            stats.max_critic_grad_norm_applied = std::max(stats.max_critic_grad_norm_applied, critic_norm);
            ++stats.minibatches;
        }
    }
    if (stats.minibatches > 0) {
        stats.mean_actor_loss /= static_cast<double>(stats.minibatches);
        stats.mean_critic_loss /= static_cast<double>(stats.minibatches);
    }
    config.entropy_coef *= config.entropy_decay;
    buffer.clear();
    return stats;
}

// ---------------------------------------------------------------------------

namespace {
std::vector<std::size_t> layer_dims(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    std::vector<std::size_t> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

PpoNetworks make_networks(std::size_t obs_size, std::size_t action_count, const PpoConfig& c, Rng& rng) {
    Mlp actor(layer_dims(obs_size, c.hidden, action_count), rng, 0.01);
    Mlp critic(layer_dims(obs_size, c.hidden, 1), rng);
    Adam actor_opt(actor, AdamConfig{c.policy_lr});
    Adam critic_opt(critic, AdamConfig{c.critic_lr});
    return {std::move(actor), std::move(critic), std::move(actor_opt), std::move(critic_opt)};
}
}  // namespace

PpoAgent::PpoAgent(std::size_t obs_size, std::size_t action_count, PpoConfig config, Rng& init_rng)
    : config_((config.validate(), std::move(config))),
      nets_(make_networks(obs_size, action_count, config_, init_rng)),
      buffer_(config_.training_interval) {}

ActionSample PpoAgent::act(const FeatureVector& obs, Rng& rng) const {
    return sample_action(nets_.actor, nets_.critic, obs, rng);
}

std::size_t PpoAgent::greedy(const FeatureVector& obs) const {
    const Eigen::VectorXd logits = nets_.actor.forward(obs);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < logits.size(); ++i)
        if (logits(i) > logits(best)) best = i;
    return static_cast<std::size_t>(best);
}

std::optional<UpdateStats> PpoAgent::observe(const FeatureVector& obs, const ActionSample& s, double reward,
                                             bool done, const FeatureVector& next_obs, Rng& rng) {
    buffer_.push({obs, s.action, s.log_prob, s.value, reward, done});
    if (!buffer_.full()) return std::nullopt;
    const double bootstrap = done ? 0.0 : nets_.critic.forward(next_obs)(0);
    ++updates_;
    return update(nets_, buffer_, config_, bootstrap, rng);
}

}  // namespace acd
