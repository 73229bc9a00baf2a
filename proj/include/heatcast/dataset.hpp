#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "heatcast/numerics.hpp"
#include "heatcast/timeseries.hpp"

namespace heatcast {

enum class Channel { demand, temp, solar, wind };

const char* channel_name(Channel c);
Channel channel_from_name(const std::string& name);
double channel_value(const HourlyRecord& r, Channel c);

/// Input-factor combinations. Temperature is always included; B adds solar,
/// C adds wind, D adds both.
enum class DatasetVariant { A, B, C, D };

char variant_name(DatasetVariant v);
DatasetVariant variant_from_name(const std::string& name);

/// Factor channels a variant feeds to the model, in the fixed order
/// temp, solar, wind.
std::vector<Channel> variant_factors(DatasetVariant v);

struct ChannelStats {
    double mean = 0.0;
    double variance = 0.0; // unbiased, divisor N-1
    bool operator==(const ChannelStats&) const = default;
};

struct NormalizationStats {
    std::map<Channel, ChannelStats> channels;

    bool has(Channel c) const { return channels.contains(c); }
    const ChannelStats& at(Channel c) const;
    bool operator==(const NormalizationStats&) const = default;
};

/// Per-channel mean and unbiased variance over every record in the table.
/// Throws DegenerateDataError for a constant channel.
NormalizationStats compute_stats(const TimeSeriesTable& table, const std::vector<Channel>& channels);

inline double normalize(double value, const ChannelStats& s) {
    return (value - s.mean) / std::sqrt(s.variance);
}

inline double denormalize(double value, const ChannelStats& s) {
    return value * std::sqrt(s.variance) + s.mean;
}

/// Windowed model inputs with aligned targets. Each input is
/// [normalized demand over `window_length` consecutive hours] followed by the
/// normalized factor values at the target hour; the target is the normalized
/// demand one hour past the window.
struct SuperVectorSet {
    int window_length = 0;
    int stride = 0;
    std::vector<Vector> inputs;
    std::vector<double> targets;             // normalized demand
    std::vector<double> target_demand_mw;    // same targets on the megawatt scale
    std::vector<HourStamp> target_hours;
    std::vector<std::size_t> segment_starts; // index of the first sample of each source segment
    NormalizationStats stats;

    std::size_t size() const { return inputs.size(); }
};

/// Builds super-vectors per segment with the given stride; windows never cross
/// a segment boundary. Segments too short for one (window+1)-hour span are
/// skipped; an empty result overall raises EmptyDatasetError.
SuperVectorSet build_supervectors(const TimeSeriesTable& table, DatasetVariant variant, int window,
                                  int stride, const NormalizationStats& stats);

} // namespace heatcast
