#pragma once

#include <cstddef>
#include <vector>

#include "heatcast/timeseries.hpp"

namespace heatcast {

/// Actual and predicted demand aligned by hour. Metrics that divide by the
/// actual value require every actual to be strictly positive.
struct PredictionPairs {
    std::vector<double> actual_mw;
    std::vector<double> predicted_mw;
    std::vector<HourStamp> hours;

    std::size_t size() const { return actual_mw.size(); }
};

struct RangeRow {
    double lower_mw = 0.0;
    /// Upper edge, exclusive; infinity for the open top range.
    double upper_mw = 0.0;
    std::size_t count = 0;
    double mape_pct = 0.0;
    double rmse_mw = 0.0;
    double mad_mw = 0.0;
};

/// Metrics per demand range, bucketed by actual demand. Only populated
/// ranges appear.
struct RangeBreakdown {
    std::vector<RangeRow> rows;
    std::size_t total_count = 0;
};

struct DailyMape {
    Date date;
    double mape_pct = 0.0;
};

struct HistogramBin {
    /// Bin k covers [k*width, (k+1)*width) percent signed error.
    long long index = 0;
    double lower_pct = 0.0;
    double upper_pct = 0.0;
    std::size_t count = 0;
    double fraction = 0.0;
};

struct BoxplotStats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double iqr = 0.0;
    double midrange = 0.0;
};

struct TTestResult {
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool significant = false;
};

/// Mean absolute percentage error, in percent.
double mape(const PredictionPairs& p);

/// Root mean squared error, MW.
double rmse(const PredictionPairs& p);

/// Maximum absolute deviation, MW.
double mad(const PredictionPairs& p);

/// MAPE per calendar day, in date order. Every covered day must have
/// exactly 24 predictions.
std::vector<DailyMape> dmape(const PredictionPairs& p);

/// Bucket pairs by actual demand into [0,150), [150,300), [300,450),
/// [450,inf) MW and compute the metrics per bucket.
RangeBreakdown range_breakdown(const PredictionPairs& p);

/// Signed percentage errors (predicted - actual)/actual * 100 binned into
/// half-open bins of the given width. Negative errors are under-estimates.
std::vector<HistogramBin> error_histogram(const PredictionPairs& p, double bin_width_pct = 5.0);

/// Quantile by linear interpolation at position (N-1)*q of the sorted values.
double quantile(std::vector<double> values, double q);

BoxplotStats boxplot_stats(const std::vector<double>& values);

/// Two-sample two-tailed t-test. Pooled-variance Student form by default;
/// the Welch form drops the equal-variance assumption and uses fractional
/// degrees of freedom.
TTestResult t_test(const std::vector<double>& sample_a, const std::vector<double>& sample_b,
                   double alpha = 0.05, bool welch = false);

/// Drop every pair whose calendar day is not fully covered by 24
/// predictions. Output order follows the input.
PredictionPairs restrict_to_complete_days(const PredictionPairs& p);

} // namespace heatcast
