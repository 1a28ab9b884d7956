#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cocite/errors.hpp"

namespace cocite {

// Exact decimal threshold. Criteria like "average at most 1" are compared by
// cross-multiplication so no float rounding can flip a boundary case.
struct Ratio {
    long long num = 0;
    long long den = 1;

    static Ratio of(long long n, long long d = 1) {
        Ratio r{n, d};
        r.normalize();
        return r;
    }

    static Ratio from_decimal(const std::string& text) {
        std::size_t dot = text.find('.');
        std::string digits = dot == std::string::npos ? text : text.substr(0, dot) + text.substr(dot + 1);
        if (digits.empty() || digits == "-")
            throw config_error("not a decimal number: '" + text + "'");
        for (std::size_t i = digits[0] == '-' ? 1 : 0; i < digits.size(); ++i)
            if (digits[i] < '0' || digits[i] > '9')
                throw config_error("not a decimal number: '" + text + "'");
        long long den = 1;
        if (dot != std::string::npos)
            for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
        Ratio r{std::stoll(digits), den};
        r.normalize();
        return r;
    }

    void normalize() {
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    // Denominators originate from decimal strings, so expansion terminates.
    std::string to_decimal() const {
        long long ip = num / den;
        long long rem = num % den;
        if (rem < 0) { rem += den; ip -= 1; }
        std::string s = std::to_string(ip);
        if (rem != 0) {
            s += '.';
            for (int guard = 0; rem != 0 && guard < 18; ++guard) {
                rem *= 10;
                s += static_cast<char>('0' + rem / den);
                rem %= den;
            }
        }
        return s;
    }

    bool operator==(const Ratio& o) const { return num == o.num && den == o.den; }
};

// sum/count <= limit, exactly.
inline bool avg_at_most(long long sum, long long count, Ratio limit) {
    return static_cast<__int128>(sum) * limit.den <= static_cast<__int128>(limit.num) * count;
}

// sum/count >= limit, exactly.
inline bool avg_at_least(long long sum, long long count, Ratio limit) {
    return static_cast<__int128>(sum) * limit.den >= static_cast<__int128>(limit.num) * count;
}

// Contiguous zero-filled annual counts. start_year is the first possible year
// of co-citation for a pair, or the publication year for a single article.
struct YearSeries {
    int start_year = 0;
    std::vector<int> counts;

    int year_at(std::size_t offset) const { return start_year + static_cast<int>(offset); }
    int last_year() const { return start_year + static_cast<int>(counts.size()) - 1; }
    long long total() const { return std::accumulate(counts.begin(), counts.end(), 0LL); }

    bool operator==(const YearSeries&) const = default;
};

struct KineticsSummary {
    long long total = 0;
    int peak_year = 0;  // earliest year attaining the maximum
    int peak_count = 0;
    std::optional<int> awakening_year;
    std::optional<int> sleep_duration;     // awakening_year - start_year
    std::optional<long long> sleep_sum;    // co-citations during [start, awakening)
    std::optional<int> sleep_max;
    std::optional<double> slope;           // absent when peak year == awakening year
    bool slope_undefined = false;          // awakening exists but peak == awakening (the NA case)
    double beauty = 0.0;

    std::optional<double> sleep_avg() const {
        if (!sleep_sum || !sleep_duration || *sleep_duration == 0) return std::nullopt;
        return static_cast<double>(*sleep_sum) / *sleep_duration;
    }
};

// B for the reference line drawn from the first-year count to the peak count.
// Zero by definition when the peak is in the first year.
inline double beauty_coefficient(const YearSeries& series) {
    if (series.counts.empty())
        throw data_error("beauty_coefficient: empty series");
    const auto& c = series.counts;
    std::size_t tm = static_cast<std::size_t>(
        std::max_element(c.begin(), c.end()) - c.begin());
    if (tm == 0) return 0.0;
    const double c0 = c[0];
    const double ctm = c[tm];
    double b = 0.0;
    for (std::size_t t = 0; t <= tm; ++t) {
        double reference = (ctm - c0) / static_cast<double>(tm) * static_cast<double>(t) + c0;
        b += (reference - c[t]) / std::max(1, c[t]);
    }
    return b;
}

inline std::optional<double> slope(int awakening_year, int awakening_count, int peak_year,
                                   int peak_count) {
    if (peak_year == awakening_year) return std::nullopt;
    return static_cast<double>(peak_count - awakening_count) /
           static_cast<double>(peak_year - awakening_year);
}

// Peak is the earliest maximum. Awakening is the first year whose count
// exceeds sleep_threshold; sleep statistics cover the years strictly before
// it.
inline KineticsSummary summarize(const YearSeries& series, int sleep_threshold = 2) {
    if (series.counts.empty())
        throw data_error("summarize: empty series");
    const auto& c = series.counts;

    KineticsSummary s;
    s.total = series.total();
    std::size_t tm = static_cast<std::size_t>(
        std::max_element(c.begin(), c.end()) - c.begin());
    s.peak_year = series.year_at(tm);
    s.peak_count = c[tm];

    for (std::size_t t = 0; t < c.size(); ++t) {
        if (c[t] > sleep_threshold) {
            s.awakening_year = series.year_at(t);
            s.sleep_duration = static_cast<int>(t);
            if (t > 0) {
                s.sleep_sum = std::accumulate(c.begin(), c.begin() + t, 0LL);
                s.sleep_max = *std::max_element(c.begin(), c.begin() + t);
            }
            s.slope = slope(*s.awakening_year, c[t], s.peak_year, s.peak_count);
            s.slope_undefined = !s.slope.has_value();
            break;
        }
    }
    s.beauty = beauty_coefficient(series);
    return s;
}

struct DetectionCriteria {
    long long min_total = 100;
    int min_peak = 20;
    int min_member_year = 1970;
    int min_sleep_years = 10;
    int sleep_max_per_year = 2;
    Ratio sleep_avg_max = Ratio::of(1);

    void validate() const {
        if (min_total <= 0 || min_peak <= 0 || min_member_year <= 0 || min_sleep_years <= 0 ||
            sleep_max_per_year <= 0 || sleep_avg_max.num <= 0)
            throw config_error("detection thresholds must be strictly positive");
        if (!avg_at_most(sleep_avg_max.num, sleep_avg_max.den,
                         Ratio::of(sleep_max_per_year)))
            throw config_error("sleep_avg_max must not exceed sleep_max_per_year");
    }
};

struct VanRaanCriteria {
    int min_sleep_years = 10;
    Ratio sleep_avg_max = Ratio::of(1);
    int awakening_window = 5;
    Ratio min_awakening_intensity = Ratio::of(5);

    void validate() const {
        if (min_sleep_years <= 0 || sleep_avg_max.num <= 0 || awakening_window <= 0 ||
            min_awakening_intensity.num <= 0)
            throw config_error("van Raan thresholds must be strictly positive");
    }
};

enum class Verdict { delayed, sleeping_beauty, flash_in_pan, none };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::delayed: return "delayed";
        case Verdict::sleeping_beauty: return "sleeping_beauty";
        case Verdict::flash_in_pan: return "flash_in_pan";
        case Verdict::none: return "none";
    }
    return "none";
}

struct DetectionRecord {
    std::string key; // "a,b" for pairs, the publication id for singles
    KineticsSummary summary;
    Verdict verdict = Verdict::none;
};

// Delayed co-citation: both members recent enough, recognition high enough
// (total and peak), and a sleeping period of at least min_sleep_years whose
// yearly counts stay at or below sleep_max_per_year with an exact average of
// at most sleep_avg_max.
inline std::optional<DetectionRecord> detect_delayed(const std::string& key,
                                                     const YearSeries& series, int year_a,
                                                     int year_b,
                                                     const DetectionCriteria& criteria) {
    KineticsSummary s = summarize(series, criteria.sleep_max_per_year);
    if (year_a < criteria.min_member_year || year_b < criteria.min_member_year)
        return std::nullopt;
    if (s.total < criteria.min_total) return std::nullopt;
    if (s.peak_count < criteria.min_peak) return std::nullopt;
    if (!s.awakening_year || *s.sleep_duration < criteria.min_sleep_years) return std::nullopt;
    if (s.sleep_max && *s.sleep_max > criteria.sleep_max_per_year) return std::nullopt;
    if (!avg_at_most(s.sleep_sum.value_or(0), *s.sleep_duration, criteria.sleep_avg_max))
        return std::nullopt;
    return DetectionRecord{key, std::move(s), Verdict::delayed};
}

enum class VanRaanStatus { accepted, rejected, inconclusive };

struct VanRaanOutcome {
    VanRaanStatus status = VanRaanStatus::rejected;
    std::optional<DetectionRecord> record;
    KineticsSummary summary;
};

// Single-publication Sleeping Beauty test over the first sleeping period.
// Sleep conditions are decided first; a series that passes them but ends
// before the awakening window completes is inconclusive rather than rejected.
inline VanRaanOutcome detect_vanraan(const std::string& id, const YearSeries& series,
                                     const VanRaanCriteria& criteria, int sleep_threshold = 2) {
    VanRaanOutcome out;
    out.summary = summarize(series, sleep_threshold);
    const KineticsSummary& s = out.summary;

    if (!s.awakening_year) return out;                               // never woke
    if (*s.sleep_duration < criteria.min_sleep_years) return out;
    if (!avg_at_most(s.sleep_sum.value_or(0), *s.sleep_duration, criteria.sleep_avg_max))
        return out;

    std::size_t awake_off = static_cast<std::size_t>(*s.awakening_year - series.start_year);
    if (awake_off + criteria.awakening_window > series.counts.size()) {
        out.status = VanRaanStatus::inconclusive;
        return out;
    }
    long long awake_sum = 0;
    for (std::size_t t = awake_off; t < awake_off + criteria.awakening_window; ++t)
        awake_sum += series.counts[t];
    if (!avg_at_least(awake_sum, criteria.awakening_window, criteria.min_awakening_intensity))
        return out;

    out.status = VanRaanStatus::accepted;
    out.record = DetectionRecord{id, s, Verdict::sleeping_beauty};
    return out;
}

struct FlashScreenCriteria {
    long long band_min = 20;  // inclusive
    long long band_max = 100; // exclusive
    int min_span_years = 10;  // start year to peak year
    int peak_threshold = 20;
};

enum class BandClass {
    removed_short_span,
    removed_negative_beauty,
    removed_below_peak,
    flash_in_pan, // survivor with exactly one year at or above the peak threshold
    multi_peak,   // survivor with several such years
};

inline const char* to_string(BandClass c) {
    switch (c) {
        case BandClass::removed_short_span: return "removed_short_span";
        case BandClass::removed_negative_beauty: return "removed_negative_beauty";
        case BandClass::removed_below_peak: return "removed_below_peak";
        case BandClass::flash_in_pan: return "flash_in_pan";
        case BandClass::multi_peak: return "multi_peak";
    }
    return "removed_below_peak";
}

struct BandRecord {
    std::string key;
    KineticsSummary summary;
    int years_at_threshold = 0;
    BandClass cls = BandClass::removed_below_peak;
};

// Screens one series from the [band_min, band_max) frequency band. Removal
// rules run in order: short span, negative Beauty Coefficient, no year at the
// peak threshold. Survivors split by how many years reach the threshold.
inline BandRecord screen_flash_in_pan(const std::string& key, const YearSeries& series,
                                      const FlashScreenCriteria& criteria) {
    BandRecord rec;
    rec.key = key;
    rec.summary = summarize(series);
    for (int c : series.counts)
        if (c >= criteria.peak_threshold) ++rec.years_at_threshold;

    if (rec.summary.peak_year - series.start_year < criteria.min_span_years)
        rec.cls = BandClass::removed_short_span;
    else if (rec.summary.beauty < 0.0)
        rec.cls = BandClass::removed_negative_beauty;
    else if (rec.years_at_threshold == 0)
        rec.cls = BandClass::removed_below_peak;
    else if (rec.years_at_threshold == 1)
        rec.cls = BandClass::flash_in_pan;
    else
        rec.cls = BandClass::multi_peak;
    return rec;
}

} // namespace cocite
