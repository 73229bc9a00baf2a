#include "heatcast/dataset.hpp"

#include <cmath>

#include "heatcast/errors.hpp"

namespace heatcast {

const char* channel_name(Channel c) {
    switch (c) {
    case Channel::demand: return "demand";
    case Channel::temp: return "temp";
    case Channel::solar: return "solar";
    case Channel::wind: return "wind";
    }
    throw ConfigError("unknown channel");
}

Channel channel_from_name(const std::string& name) {
    if (name == "demand") return Channel::demand;
    if (name == "temp") return Channel::temp;
    if (name == "solar") return Channel::solar;
    if (name == "wind") return Channel::wind;
    throw ConfigError("unknown channel '" + name + "'");
}

double channel_value(const HourlyRecord& r, Channel c) {
    switch (c) {
    case Channel::demand: return r.demand_mw;
    case Channel::temp: return r.temp_c;
    case Channel::solar: return r.solar_wm2;
    case Channel::wind: return r.wind_ms;
    }
    throw ConfigError("unknown channel");
}

char variant_name(DatasetVariant v) {
    switch (v) {
    case DatasetVariant::A: return 'A';
    case DatasetVariant::B: return 'B';
    case DatasetVariant::C: return 'C';
    case DatasetVariant::D: return 'D';
    }
    throw ConfigError("unknown dataset variant");
}

DatasetVariant variant_from_name(const std::string& name) {
    if (name == "A" || name == "a") return DatasetVariant::A;
    if (name == "B" || name == "b") return DatasetVariant::B;
    if (name == "C" || name == "c") return DatasetVariant::C;
    if (name == "D" || name == "d") return DatasetVariant::D;
    throw ConfigError("unknown dataset variant '" + name + "' (expected A, B, C or D)");
}

std::vector<Channel> variant_factors(DatasetVariant v) {
    std::vector<Channel> factors{Channel::temp};
    if (v == DatasetVariant::B || v == DatasetVariant::D) {
        factors.push_back(Channel::solar);
    }
    if (v == DatasetVariant::C || v == DatasetVariant::D) {
        factors.push_back(Channel::wind);
    }
    return factors;
}

const ChannelStats& NormalizationStats::at(Channel c) const {
    const auto it = channels.find(c);
    if (it == channels.end()) {
        throw ConfigError(std::string("no normalization stats for channel '") + channel_name(c) + "'");
    }
    return it->second;
}

NormalizationStats compute_stats(const TimeSeriesTable& table, const std::vector<Channel>& channels) {
    if (table.record_count() < 2) {
        throw ValidationError("need at least 2 records to compute normalization stats");
    }
    NormalizationStats stats;
    for (const Channel ch : channels) {
        // Welford's online update; the unit tests cross-check it against a
        // two-pass computation.
        double mean = 0.0;
        double m2 = 0.0;
        std::size_t n = 0;
        for (const auto& seg : table.segments) {
            for (const auto& rec : seg) {
                const double x = channel_value(rec, ch);
                ++n;
                const double delta = x - mean;
                mean += delta / static_cast<double>(n);
                m2 += delta * (x - mean);
            }
        }
        const double variance = m2 / static_cast<double>(n - 1);
        if (!(variance > 0.0)) {
            throw DegenerateDataError(std::string("channel '") + channel_name(ch) +
                                      "' is constant, cannot be normalized");
        }
        stats.channels[ch] = ChannelStats{mean, variance};
    }
    return stats;
}

SuperVectorSet build_supervectors(const TimeSeriesTable& table, DatasetVariant variant, int window,
                                  int stride, const NormalizationStats& stats) {
    if (window != 2 && window != 4 && window != 8) {
        throw ConfigError("window length must be 2, 4 or 8 hours");
    }
    if (stride < 1) {
        throw ConfigError("stride must be at least 1 hour");
    }
    const std::vector<Channel> factors = variant_factors(variant);
    const ChannelStats& demand_stats = stats.at(Channel::demand);
    for (const Channel f : factors) {
        stats.at(f); // fail early if a factor channel is missing
    }

    SuperVectorSet set;
    set.window_length = window;
    set.stride = stride;
    set.stats = stats;

    const std::size_t input_len = static_cast<std::size_t>(window) + factors.size();
    for (const auto& seg : table.segments) {
        if (seg.size() < static_cast<std::size_t>(window) + 1) {
            continue; // too short for a single window plus target
        }
        set.segment_starts.push_back(set.inputs.size());
        const std::size_t last_start = seg.size() - 1 - static_cast<std::size_t>(window);
        for (std::size_t k = 0; k <= last_start; k += static_cast<std::size_t>(stride)) {
            Vector input;
            input.reserve(input_len);
            for (int h = 0; h < window; ++h) {
                input.push_back(normalize(seg[k + h].demand_mw, demand_stats));
            }
            const HourlyRecord& target_rec = seg[k + static_cast<std::size_t>(window)];
            for (const Channel f : factors) {
                input.push_back(normalize(channel_value(target_rec, f), stats.at(f)));
            }
            set.inputs.push_back(std::move(input));
            set.targets.push_back(normalize(target_rec.demand_mw, demand_stats));
            set.target_demand_mw.push_back(target_rec.demand_mw);
            set.target_hours.push_back(target_rec.hour);
        }
    }
    if (set.inputs.empty()) {
        throw EmptyDatasetError("no segment is long enough for a " + std::to_string(window) +
                                "-hour window plus target");
    }
    return set;
}

} // namespace heatcast
