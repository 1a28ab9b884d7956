#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cocite/csv.hpp"
#include "cocite/errors.hpp"
#include "cocite/kinetics.hpp"

namespace cocite {

// Doubling frequency classes: class 0 holds f <= 2, class k holds
// (2^k, 2^(k+1)]. A trailing open-ended bucket keeps the row set covering
// [1, inf).
struct HistogramBucket {
    long long lower = 0;           // inclusive for the first bucket, exclusive after
    std::optional<long long> upper; // inclusive; absent for the open-ended tail
    long long count = 0;
    double percentage = 0.0;
};

struct FrequencyHistogram {
    std::vector<HistogramBucket> buckets;
    long long total = 0;

    void write_csv(std::ostream& out) const {
        out << "lower,upper,count,percentage\n";
        for (const auto& b : buckets) {
            out << b.lower << ',';
            if (b.upper)
                out << *b.upper;
            else
                out << "inf";
            out << ',' << b.count << ',' << csv::format_double(b.percentage) << '\n';
        }
    }
};

namespace detail {
inline std::size_t frequency_class(long long f) {
    std::size_t k = 0;
    long long upper = 2;
    while (f > upper) {
        upper *= 2;
        ++k;
    }
    return k;
}
} // namespace detail

// Single streaming pass; values must be >= 1.
class HistogramAccumulator {
public:
    void add(long long value) {
        if (value < 1)
            throw data_error("frequency must be >= 1, got " + std::to_string(value));
        std::size_t k = detail::frequency_class(value);
        if (k >= class_counts_.size()) class_counts_.resize(k + 1, 0);
        ++class_counts_[k];
        ++total_;
    }

    // Mergeable partials allow parallel reduction.
    void merge(const HistogramAccumulator& other) {
        if (other.class_counts_.size() > class_counts_.size())
            class_counts_.resize(other.class_counts_.size(), 0);
        for (std::size_t k = 0; k < other.class_counts_.size(); ++k)
            class_counts_[k] += other.class_counts_[k];
        total_ += other.total_;
    }

    FrequencyHistogram finish() const {
        FrequencyHistogram h;
        h.total = total_;
        long long lower = 1, upper = 2;
        for (std::size_t k = 0; k < class_counts_.size(); ++k) {
            HistogramBucket b;
            b.lower = k == 0 ? 1 : lower;
            b.upper = upper;
            b.count = class_counts_[k];
            b.percentage = total_ > 0 ? 100.0 * static_cast<double>(b.count) / total_ : 0.0;
            h.buckets.push_back(b);
            lower = upper;
            upper *= 2;
        }
        HistogramBucket tail;
        tail.lower = class_counts_.empty() ? 1 : lower;
        tail.upper = std::nullopt;
        tail.count = 0;
        tail.percentage = 0.0;
        h.buckets.push_back(tail);
        return h;
    }

private:
    std::vector<long long> class_counts_;
    long long total_ = 0;
};

inline FrequencyHistogram histogram(std::span<const long long> frequencies) {
    HistogramAccumulator acc;
    for (long long f : frequencies) acc.add(f);
    return acc.finish();
}

struct EcdfPoint {
    long long value = 0;
    double cumulative_fraction = 0.0;
};

// One point per distinct value; fraction = rank / total.
inline std::vector<EcdfPoint> ecdf(std::vector<long long> values) {
    if (values.empty())
        throw data_error("ecdf of empty input");
    std::sort(values.begin(), values.end());
    std::vector<EcdfPoint> points;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 == values.size() || values[i + 1] != values[i])
            points.push_back({values[i], static_cast<double>(i + 1) / n});
    }
    return points;
}

// Nearest-rank percentile: the value at index ceil(p/100 * n) of the
// ascending sort. p must lie in (0, 100].
inline std::vector<long long> percentiles(std::vector<long long> values,
                                          std::span<const double> requested) {
    if (values.empty())
        throw data_error("percentiles of empty input");
    for (double p : requested)
        if (!(p > 0.0 && p <= 100.0))
            throw config_error("percentile must be in (0, 100], got " + csv::format_double(p));
    std::sort(values.begin(), values.end());
    std::vector<long long> out;
    out.reserve(requested.size());
    const auto n = static_cast<double>(values.size());
    for (double p : requested) {
        auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
        rank = std::clamp<std::size_t>(rank, 1, values.size());
        out.push_back(values[rank - 1]);
    }
    return out;
}

struct ColumnSummary {
    double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;
};

namespace detail {
// Quartiles by linear interpolation between closest ranks.
inline double interpolated_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}
} // namespace detail

inline ColumnSummary summarize_column(std::vector<double> values) {
    if (values.empty())
        throw data_error("summary of empty column");
    std::sort(values.begin(), values.end());
    ColumnSummary s;
    s.min = values.front();
    s.max = values.back();
    s.q1 = detail::interpolated_quantile(values, 0.25);
    s.median = detail::interpolated_quantile(values, 0.50);
    s.q3 = detail::interpolated_quantile(values, 0.75);
    double sum = 0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

// Summary statistics of a detection cohort. Undefined (NA) slopes are left
// out of the slope column; the exclusion count is reported alongside. The
// peak column accompanies the total column so both readings of recognition
// strength are available.
struct SummaryTable {
    ColumnSummary total;
    ColumnSummary peak;
    ColumnSummary sleep_duration;
    ColumnSummary slope;
    ColumnSummary beauty;
    std::size_t slope_na_excluded = 0;
    bool slope_defined = false; // false when every slope was NA

    void write_csv(std::ostream& out) const {
        out << "statistic,total,peak,sleep_duration,slope,beauty\n";
        auto row = [&](const char* name, auto get) {
            out << name << ',' << csv::format_double(get(total)) << ','
                << csv::format_double(get(peak)) << ','
                << csv::format_double(get(sleep_duration)) << ',';
            if (slope_defined)
                out << csv::format_double(get(slope));
            else
                out << "NA";
            out << ',' << csv::format_double(get(beauty)) << '\n';
        };
        row("min", [](const ColumnSummary& c) { return c.min; });
        row("q1", [](const ColumnSummary& c) { return c.q1; });
        row("median", [](const ColumnSummary& c) { return c.median; });
        row("mean", [](const ColumnSummary& c) { return c.mean; });
        row("q3", [](const ColumnSummary& c) { return c.q3; });
        row("max", [](const ColumnSummary& c) { return c.max; });
        out << "slope_na_excluded," << slope_na_excluded << ",,,,\n";
    }
};

inline SummaryTable summarize_cohort(std::span<const DetectionRecord> records) {
    if (records.empty())
        throw data_error("summary of empty cohort");
    std::vector<double> totals, peaks, sleeps, slopes, beauties;
    SummaryTable table;
    for (const DetectionRecord& r : records) {
        totals.push_back(static_cast<double>(r.summary.total));
        peaks.push_back(static_cast<double>(r.summary.peak_count));
        sleeps.push_back(static_cast<double>(r.summary.sleep_duration.value_or(0)));
        beauties.push_back(r.summary.beauty);
        if (r.summary.slope)
            slopes.push_back(*r.summary.slope);
        else
            ++table.slope_na_excluded;
    }
    table.total = summarize_column(std::move(totals));
    table.peak = summarize_column(std::move(peaks));
    table.sleep_duration = summarize_column(std::move(sleeps));
    table.beauty = summarize_column(std::move(beauties));
    if (!slopes.empty()) {
        table.slope = summarize_column(std::move(slopes));
        table.slope_defined = true;
    }
    return table;
}

} // namespace cocite
