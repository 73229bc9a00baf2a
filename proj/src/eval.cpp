#include "heatcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "heatcast/errors.hpp"

namespace heatcast {

namespace {

void require_pairs(const PredictionPairs& p, bool need_positive_actual, bool need_hours) {
    if (p.actual_mw.size() != p.predicted_mw.size() ||
        (need_hours && p.hours.size() != p.actual_mw.size())) {
        throw DimensionError("prediction pair lists differ in length");
    }
    if (p.actual_mw.empty()) {
        throw EmptyDatasetError("no prediction pairs");
    }
    if (need_positive_actual) {
        for (const double a : p.actual_mw) {
            if (!(a > 0.0)) {
                throw ValidationError("actual demand must be strictly positive");
            }
        }
    }
}

/// Continued fraction for the incomplete beta function, evaluated with the
/// modified Lentz method.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 300;
    constexpr double kEps = 3.0e-16;
    constexpr double kTiny = 1.0e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

/// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_prefactor = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x);
    const double prefactor = std::exp(ln_prefactor);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return prefactor * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - prefactor * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double sample_mean(const std::vector<double>& v) {
    double sum = 0.0;
    for (const double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
    double sum = 0.0;
    for (const double x : v) {
        const double d = x - mean;
        sum += d * d;
    }
    return sum / static_cast<double>(v.size() - 1);
}

} // namespace

double mape(const PredictionPairs& p) {
    require_pairs(p, true, false);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sum += std::abs(p.actual_mw[i] - p.predicted_mw[i]) / p.actual_mw[i];
    }
    return sum / static_cast<double>(p.size()) * 100.0;
}

double rmse(const PredictionPairs& p) {
    require_pairs(p, false, false);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double e = p.actual_mw[i] - p.predicted_mw[i];
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(p.size()));
}

double mad(const PredictionPairs& p) {
    require_pairs(p, false, false);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        worst = std::max(worst, std::abs(p.actual_mw[i] - p.predicted_mw[i]));
    }
    return worst;
}

std::vector<DailyMape> dmape(const PredictionPairs& p) {
    require_pairs(p, true, true);
    std::map<Date, std::pair<double, int>> days;
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto& [ape_sum, count] = days[date_of(p.hours[i])];
        ape_sum += std::abs(p.actual_mw[i] - p.predicted_mw[i]) / p.actual_mw[i];
        ++count;
    }
    std::vector<DailyMape> out;
    out.reserve(days.size());
    for (const auto& [date, acc] : days) {
        if (acc.second != 24) {
            throw PartialDayError("day " + format_date(date) + " has " +
                                  std::to_string(acc.second) + " predictions, expected 24");
        }
        out.push_back({date, acc.first / 24.0 * 100.0});
    }
    return out;
}

RangeBreakdown range_breakdown(const PredictionPairs& p) {
    require_pairs(p, true, false);
    constexpr double kEdges[] = {0.0, 150.0, 300.0, 450.0,
                                 std::numeric_limits<double>::infinity()};
    constexpr std::size_t kRanges = 4;

    struct Accumulator {
        std::size_t count = 0;
        double ape_sum = 0.0;
        double sq_sum = 0.0;
        double mad = 0.0;
    };
    Accumulator acc[kRanges];
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double a = p.actual_mw[i];
        std::size_t bucket = kRanges - 1;
        for (std::size_t r = 0; r + 1 < kRanges; ++r) {
            if (a < kEdges[r + 1]) {
                bucket = r;
                break;
            }
        }
        const double err = std::abs(a - p.predicted_mw[i]);
        Accumulator& b = acc[bucket];
        ++b.count;
        b.ape_sum += err / a;
        b.sq_sum += err * err;
        b.mad = std::max(b.mad, err);
    }

    RangeBreakdown out;
    out.total_count = p.size();
    for (std::size_t r = 0; r < kRanges; ++r) {
        if (acc[r].count == 0) {
            continue;
        }
        const double n = static_cast<double>(acc[r].count);
        out.rows.push_back({kEdges[r], kEdges[r + 1], acc[r].count,
                            acc[r].ape_sum / n * 100.0, std::sqrt(acc[r].sq_sum / n),
                            acc[r].mad});
    }
    return out;
}

std::vector<HistogramBin> error_histogram(const PredictionPairs& p, double bin_width_pct) {
    require_pairs(p, true, false);
    if (!(bin_width_pct > 0.0)) {
        throw ConfigError("histogram bin width must be positive");
    }
    std::map<long long, std::size_t> counts;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double err_pct = (p.predicted_mw[i] - p.actual_mw[i]) / p.actual_mw[i] * 100.0;
        const long long k = static_cast<long long>(std::floor(err_pct / bin_width_pct));
        ++counts[k];
    }
    std::vector<HistogramBin> out;
    out.reserve(counts.size());
    const double total = static_cast<double>(p.size());
    for (const auto& [k, count] : counts) {
        out.push_back({k, static_cast<double>(k) * bin_width_pct,
                       static_cast<double>(k + 1) * bin_width_pct, count,
                       static_cast<double>(count) / total});
    }
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw EmptyDatasetError("quantile of an empty sample");
    }
    if (q < 0.0 || q > 1.0) {
        throw ConfigError("quantile level must lie in [0, 1]");
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) {
        return values.back();
    }
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

BoxplotStats boxplot_stats(const std::vector<double>& values) {
    if (values.empty()) {
        throw EmptyDatasetError("boxplot of an empty sample");
    }
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());

    const auto at = [&sorted](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        if (lo + 1 >= sorted.size()) {
            return sorted.back();
        }
        const double frac = pos - static_cast<double>(lo);
        return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    };

    BoxplotStats s;
    s.min = sorted.front();
    s.q1 = at(0.25);
    s.median = at(0.5);
    s.q3 = at(0.75);
    s.max = sorted.back();
    s.iqr = s.q3 - s.q1;
    s.midrange = (s.min + s.max) / 2.0;
    return s;
}

TTestResult t_test(const std::vector<double>& sample_a, const std::vector<double>& sample_b,
                   double alpha, bool welch) {
    if (sample_a.size() < 2 || sample_b.size() < 2) {
        throw ValidationError("each t-test sample needs at least 2 values");
    }
    const double n1 = static_cast<double>(sample_a.size());
    const double n2 = static_cast<double>(sample_b.size());
    const double mean1 = sample_mean(sample_a);
    const double mean2 = sample_mean(sample_b);
    const double var1 = sample_variance(sample_a, mean1);
    const double var2 = sample_variance(sample_b, mean2);

    double se_sq;
    double df;
    if (welch) {
        const double t1 = var1 / n1;
        const double t2 = var2 / n2;
        se_sq = t1 + t2;
        if (!(se_sq > 0.0)) {
            throw DegenerateDataError("both t-test samples have zero variance");
        }
        df = se_sq * se_sq / (t1 * t1 / (n1 - 1.0) + t2 * t2 / (n2 - 1.0));
    } else {
        const double pooled =
            ((n1 - 1.0) * var1 + (n2 - 1.0) * var2) / (n1 + n2 - 2.0);
        if (!(pooled > 0.0)) {
            throw DegenerateDataError("pooled variance of the t-test samples is zero");
        }
        se_sq = pooled * (1.0 / n1 + 1.0 / n2);
        df = n1 + n2 - 2.0;
    }

    TTestResult r;
    r.t_statistic = (mean1 - mean2) / std::sqrt(se_sq);
    r.degrees_of_freedom = df;
    r.p_value = regularized_incomplete_beta(df / 2.0, 0.5,
                                            df / (df + r.t_statistic * r.t_statistic));
    r.alpha = alpha;
    r.significant = r.p_value < alpha;
    return r;
}

PredictionPairs restrict_to_complete_days(const PredictionPairs& p) {
    if (p.actual_mw.size() != p.predicted_mw.size() || p.hours.size() != p.actual_mw.size()) {
        throw DimensionError("prediction pair lists differ in length");
    }
    std::map<Date, int> counts;
    for (const HourStamp h : p.hours) {
        ++counts[date_of(h)];
    }
    PredictionPairs out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (counts[date_of(p.hours[i])] == 24) {
            out.actual_mw.push_back(p.actual_mw[i]);
            out.predicted_mw.push_back(p.predicted_mw[i]);
            out.hours.push_back(p.hours[i]);
        }
    }
    return out;
}

} // namespace heatcast
