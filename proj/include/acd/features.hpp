#pragma once

// Blue observation encoding. Per host, in roster order:
//   [activity, compromise belief, isolated bit, patch score]
// followed by [isolated count / H, believed-compromised count / H].

#include <cstddef>
#include <string>
#include <vector>

#include "acd/netmodel.hpp"

namespace acd {

using FeatureVector = std::vector<double>;

inline constexpr std::size_t kFeaturesPerHost = 4;
inline constexpr std::size_t kGlobalFeatures = 2;

constexpr std::size_t feature_length(std::size_t host_count) {
    return kFeaturesPerHost * host_count + kGlobalFeatures;
}

double activity_to_value(Activity a);
double belief_to_value(BlueBelief b);

FeatureVector encode(const NetworkState& state);

// Layout descriptor persisted with model weights; loading rejects a mismatch.
std::string feature_layout_fingerprint(const NetworkState& state);

}  // namespace acd
