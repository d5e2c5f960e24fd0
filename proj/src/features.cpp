#include "acd/features.hpp"

namespace acd {

double activity_to_value(Activity a) {
    switch (a) {
        case Activity::NoActivity: return 0.0;
        case Activity::Scan: return 0.3;
        case Activity::Exploit: return 1.0;
    }
    return 0.0;
}

double belief_to_value(BlueBelief b) {
    switch (b) {
        case BlueBelief::BelievedClean: return 0.0;
        case BlueBelief::Unknown: return 0.25;
        case BlueBelief::BelievedUser: return 0.5;
        case BlueBelief::BelievedPrivileged: return 1.0;
    }
    return 0.0;
}

FeatureVector encode(const NetworkState& state) {
    const std::size_t n = state.host_count();
    FeatureVector out;
    out.reserve(feature_length(n));
    for (std::size_t i = 0; i < n; ++i) {
        const Host& h = state.hosts[i];
        out.push_back(activity_to_value(h.activity));
        out.push_back(belief_to_value(h.blue_belief));
        out.push_back(state.isolation_bits[i] ? 1.0 : 0.0);
        out.push_back(h.patch_score);
    }
    const double denom = n == 0 ? 1.0 : static_cast<double>(n);
    out.push_back(static_cast<double>(count_isolated(state)) / denom);
    out.push_back(static_cast<double>(count_believed_compromised(state)) / denom);
    return out;
}

std::string feature_layout_fingerprint(const NetworkState& state) {
    std::string fp = "per-host[activity,compromise,isolated,patch];hosts=";
    for (std::size_t i = 0; i < state.host_count(); ++i) {
        if (i) fp += ',';
        fp += state.hosts[i].name;
    }
    fp += ";global[isolated/H,compromised/H]";
    return fp;
}

}  // namespace acd
