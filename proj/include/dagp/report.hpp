#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "dagp/errors.hpp"

namespace dagp {

/// One convergence-log record as read from disk.
struct SeriesEntry {
    double t = 0.0;
    double cut = 0.0;
    std::string instance;
    std::uint64_t seed = 0; // identifies the repetition
    std::uint32_t island = 0;

    bool operator==(const SeriesEntry&) const = default;
};

struct TimedCut {
    double t = 0.0;
    double cut = 0.0;

    bool operator==(const TimedCut&) const = default;
};

/// Sorts by time and replaces every cut with the prefix minimum, so the
/// result answers "best cut seen up to time t". Idempotent.
inline std::vector<TimedCut> running_min(std::vector<TimedCut> events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const TimedCut& a, const TimedCut& b) { return a.t < b.t; });
    double best = std::numeric_limits<double>::infinity();
    for (auto& e : events) {
        best = std::min(best, e.cut);
        e.cut = best;
    }
    return events;
}

/// Averages repetitions of the same instance entry-by-entry: the j-th output
/// is the mean time and mean cut of every repetition's j-th event. A shorter
/// repetition keeps contributing its final event, which preserves the
/// "best so far" reading and keeps the average cut nonincreasing.
inline std::vector<TimedCut> average_repetitions(const std::vector<std::vector<TimedCut>>& reps) {
    std::size_t longest = 0;
    for (const auto& r : reps) longest = std::max(longest, r.size());
    if (longest == 0 || reps.empty()) return {};
    for (const auto& r : reps)
        if (r.empty()) throw EmptyInstance("a repetition contributed no events");

    std::vector<TimedCut> out(longest);
    for (std::size_t j = 0; j < longest; ++j) {
        double t = 0.0, cut = 0.0;
        for (const auto& r : reps) {
            const TimedCut& e = j < r.size() ? r[j] : r.back();
            t += e.t;
            cut += e.cut;
        }
        out[j] = {t / reps.size(), cut / reps.size()};
    }
    return out;
}

/// Rescales times into normalized units t_n = t / t_norm (t_norm is typically
/// the instance's average multi-level running time).
inline std::vector<TimedCut> normalize_series(std::vector<TimedCut> series, double t_norm) {
    if (t_norm <= 0.0) throw std::invalid_argument("normalization time must be positive");
    for (auto& e : series) e.t /= t_norm;
    return series;
}

struct MergedPoint {
    double t_n = 0.0;
    double geo_mean = 0.0;

    bool operator==(const MergedPoint&) const = default;
};

/// Event-based geometric mean across instances. Each instance contributes its
/// current minimum, initialized with its first value; sweeping all entries in
/// time order replaces that instance's contribution and reports the updated
/// mean. Zero cuts are legal and force the mean to zero while present.
inline std::vector<MergedPoint> merge_geometric(
    const std::map<std::string, std::vector<TimedCut>>& per_instance) {
    if (per_instance.empty()) throw EmptyInstance("no instances to merge");
    for (const auto& [name, series] : per_instance)
        if (series.empty()) throw EmptyInstance("instance '" + name + "' has no events");

    struct Tagged {
        double t_n;
        double cut;
        std::size_t instance;
    };
    std::vector<Tagged> all;
    std::vector<double> current;
    current.reserve(per_instance.size());
    std::size_t idx = 0;
    for (const auto& [name, series] : per_instance) {
        current.push_back(series.front().cut);
        for (const auto& e : series) all.push_back({e.t, e.cut, idx});
        ++idx;
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const Tagged& a, const Tagged& b) { return a.t_n < b.t_n; });

    const double n = static_cast<double>(current.size());
    std::size_t zeros = 0;
    double log_sum = 0.0;
    for (double c : current) {
        if (c <= 0.0)
            ++zeros;
        else
            log_sum += std::log(c);
    }
    auto mean = [&] { return zeros > 0 ? 0.0 : std::exp(log_sum / n); };

    std::vector<MergedPoint> out;
    out.reserve(all.size());
    for (const auto& e : all) {
        double& cur = current[e.instance];
        if (cur <= 0.0)
            --zeros;
        else
            log_sum -= std::log(cur);
        cur = e.cut;
        if (cur <= 0.0)
            ++zeros;
        else
            log_sum += std::log(cur);
        out.push_back({e.t_n, mean()});
    }
    return out;
}

struct RatioEntry {
    std::string algorithm;
    std::uint32_t rank = 0; // 1-based after descending sort
    double ratio = 0.0;

    bool operator==(const RatioEntry&) const = default;
};

/// Performance-profile data: for every algorithm and instance, the ratio of
/// the overall best cut to that algorithm's cut (1 when the algorithm is the
/// best). Per algorithm the ratios are sorted descending and ranked.
inline std::vector<RatioEntry> performance_ratios(
    const std::map<std::string, std::map<std::string, double>>& cut_per_algorithm) {
    std::map<std::string, double> best;
    for (const auto& [algo, cuts] : cut_per_algorithm)
        for (const auto& [instance, cut] : cuts) {
            auto it = best.find(instance);
            if (it == best.end())
                best.emplace(instance, cut);
            else
                it->second = std::min(it->second, cut);
        }

    std::vector<RatioEntry> out;
    for (const auto& [algo, cuts] : cut_per_algorithm) {
        std::vector<double> ratios;
        ratios.reserve(best.size());
        for (const auto& [instance, b] : best) {
            auto it = cuts.find(instance);
            if (it == cuts.end())
                throw MissingValue("algorithm '" + algo + "' has no result for instance '" +
                                   instance + "'");
            ratios.push_back(it->second == b ? 1.0 : b / it->second);
        }
        std::sort(ratios.rbegin(), ratios.rend());
        for (std::size_t i = 0; i < ratios.size(); ++i)
            out.push_back({algo, static_cast<std::uint32_t>(i + 1), ratios[i]});
    }
    return out;
}

/// Full per-algorithm convergence pipeline: group raw log entries by instance
/// and seed, take per-repetition running minima, average the repetitions per
/// instance, normalize by t_norm, then merge geometrically across instances.
inline std::vector<MergedPoint> convergence_profile(const std::vector<SeriesEntry>& entries,
                                                    double t_norm) {
    std::map<std::string, std::map<std::uint64_t, std::vector<TimedCut>>> grouped;
    for (const auto& e : entries) grouped[e.instance][e.seed].push_back({e.t, e.cut});

    std::map<std::string, std::vector<TimedCut>> per_instance;
    for (auto& [instance, reps] : grouped) {
        std::vector<std::vector<TimedCut>> mins;
        mins.reserve(reps.size());
        for (auto& [seed, events] : reps) mins.push_back(running_min(std::move(events)));
        per_instance[instance] = normalize_series(average_repetitions(mins), t_norm);
    }
    return merge_geometric(per_instance);
}

} // namespace dagp
