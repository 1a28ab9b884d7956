#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "cocite/config.hpp"
#include "cocite/ingest.hpp"
#include "cocite/kinetics.hpp"

namespace cocite {

struct PlantedPair {
    std::string a;
    std::string b;
    std::string kind; // delayed | flash | ordinary
    long long total = 0;
    int peak = 0;
};

struct GeneratedCorpus {
    std::vector<Publication> publications; // sorted by id
    std::vector<RawEdge> edges;            // sorted by (citing, cited)
    std::vector<PlantedPair> planted;      // sorted by (a, b)

    void write_nodelist(std::ostream& out) const {
        out << "id,year,type,subjects\n";
        for (const Publication& p : publications) {
            out << p.id << ',';
            if (p.year) out << *p.year;
            out << ',' << p.pub_type << ',';
            for (std::size_t i = 0; i < p.subject_codes.size(); ++i) {
                if (i) out << '|';
                out << p.subject_codes[i];
            }
            out << '\n';
        }
    }

    void write_edgelist(std::ostream& out) const {
        out << "citing_id,cited_id\n";
        for (const RawEdge& e : edges) out << e.citing << ',' << e.cited << '\n';
    }

    void write_manifest(std::ostream& out) const {
        out << "a,b,kind,total,peak\n";
        for (const PlantedPair& p : planted)
            out << p.a << ',' << p.b << ',' << p.kind << ',' << p.total << ',' << p.peak << '\n';
    }
};

namespace gen_detail {

// All randomness flows through these helpers so corpora are reproducible for
// a given seed on any platform.
inline std::uint64_t next(std::mt19937_64& rng) { return rng(); }

inline int rand_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(next(rng) % static_cast<std::uint64_t>(hi - lo + 1));
}

// Weighted draw of a sleep-year count: mostly zeros, never above 2.
inline int rand_sleep_count(std::mt19937_64& rng) {
    int roll = rand_int(rng, 0, 99);
    if (roll < 55) return 0;
    if (roll < 90) return 1;
    return 2;
}

inline std::string make_id(char prefix, int n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%07d", prefix, n);
    return buf;
}

inline const std::vector<std::string>& subject_pool() {
    static const std::vector<std::string> codes = {
        "ABS", "BGMB", "BMA", "CEN", "CHE", "CS",  "DCS", "EEF", "EGY", "ENG", "ENS", "EPS",
        "GEN", "HP",   "IMM", "MAT", "MED", "MTH", "NEU", "PHY", "PSY", "PTP", "SS"};
    return codes;
}

// One planted series as year -> count, plus the window year hosting the
// enumerating source article.
struct SeriesPlan {
    int year_a = 0;
    int year_b = 0;
    int start_year = 0;
    int sleep_end = 0; // first year past the planted sleep phase; 0 = unconstrained
    std::map<int, int> counts;
    int source_year = 0;

    YearSeries to_series(int end_year) const {
        YearSeries s;
        s.start_year = start_year;
        s.counts.assign(static_cast<std::size_t>(end_year - start_year) + 1, 0);
        for (auto [year, count] : counts)
            s.counts.at(static_cast<std::size_t>(year - start_year)) = count;
        return s;
    }

    long long total() const {
        long long t = 0;
        for (auto [year, count] : counts) t += count;
        return t;
    }
};

// The source article must co-cite the pair in some window year, contributing
// one event there; pick the first planted event inside the window or force a
// single event into a window year. When the forced year falls inside a
// planted sleep phase, an event is moved rather than added so the sleep
// average stays intact.
inline void place_source_year(std::mt19937_64& rng, SeriesPlan& plan, YearWindow window) {
    for (auto [year, count] : plan.counts)
        if (count > 0 && year >= window.start && year <= window.end) {
            plan.source_year = year;
            return;
        }
    int lo = std::max(plan.start_year, window.start);
    int year = rand_int(rng, lo, window.end);
    if (plan.sleep_end > year) {
        long long sleep_sum = 0;
        for (auto [y, c] : plan.counts)
            if (y < plan.sleep_end) sleep_sum += c;
        const long long budget = plan.sleep_end - plan.start_year;
        if (sleep_sum + 1 > budget) {
            for (auto& [y, c] : plan.counts)
                if (y < plan.sleep_end && c > 0 && y != year) {
                    --c;
                    break;
                }
        }
    }
    plan.counts[year] += 1;
    plan.source_year = year;
}

inline SeriesPlan plan_delayed(std::mt19937_64& rng, const PipelineConfig& config) {
    SeriesPlan plan;
    plan.year_a = rand_int(rng, 1972, 1982);
    plan.year_b = rand_int(rng, 1972, 1982);
    plan.start_year = std::max(plan.year_a, plan.year_b);

    const int sleep_years = rand_int(rng, 10, 14);
    const int awakening = plan.start_year + sleep_years;
    plan.sleep_end = awakening;
    long long sleep_sum = 0;
    for (int y = plan.start_year; y < awakening; ++y) {
        int c = rand_sleep_count(rng);
        if (sleep_sum + c > sleep_years) c = 0; // keep the sleep average at most 1
        if (c > 0) plan.counts[y] = c;
        sleep_sum += c;
    }

    const int peak = rand_int(rng, 20, 32);
    const bool peak_at_awakening = rand_int(rng, 0, 9) == 0; // the NA-slope shape
    int last_ramp_year = awakening;
    if (peak_at_awakening) {
        plan.counts[awakening] = peak;
    } else {
        const int awake_count = rand_int(rng, 3, 6);
        const int ramp_years = rand_int(rng, 4, 8);
        for (int i = 0; i <= ramp_years; ++i) {
            int c = awake_count + (peak - awake_count) * i / ramp_years;
            plan.counts[awakening + i] = std::min(c, i == ramp_years ? peak : peak - 1);
        }
        last_ramp_year = awakening + ramp_years;
    }

    const long long target = rand_int(rng, 110, 160);
    int year = last_ramp_year;
    while (plan.total() < target && year < config.end_year) {
        ++year;
        plan.counts[year] = rand_int(rng, 4, std::min(15, peak - 1));
    }
    return plan;
}

inline SeriesPlan plan_flash(std::mt19937_64& rng, const PipelineConfig& config) {
    SeriesPlan plan;
    plan.year_a = rand_int(rng, 1972, 1984);
    plan.year_b = rand_int(rng, 1972, 1984);
    plan.start_year = std::max(plan.year_a, plan.year_b);

    const int quiet_years = rand_int(rng, 10, 13);
    for (int y = plan.start_year; y < plan.start_year + quiet_years; ++y) {
        int c = rand_sleep_count(rng);
        if (c > 0) plan.counts[y] = c;
    }
    const int spike_year = plan.start_year + quiet_years;
    plan.counts[spike_year] = rand_int(rng, 20, 28);
    const int tail = rand_int(rng, 0, 5);
    for (int i = 1; i <= tail && spike_year + i <= config.end_year; ++i) {
        int c = rand_int(rng, 0, 2);
        if (c > 0) plan.counts[spike_year + i] = c;
    }
    return plan;
}

inline SeriesPlan plan_ordinary(std::mt19937_64& rng, const PipelineConfig& config,
                                YearWindow window) {
    SeriesPlan plan;
    plan.year_a = rand_int(rng, 1972, 1988);
    plan.year_b = rand_int(rng, 1972, 1988);
    plan.start_year = std::max(plan.year_a, plan.year_b);

    const int events = rand_int(rng, 1, 15);
    const int span_end = std::min(config.end_year, plan.start_year + rand_int(rng, 5, 25));
    // First event goes into the selection window so a source article exists.
    plan.source_year = rand_int(rng, std::max(plan.start_year, window.start), window.end);
    plan.counts[plan.source_year] += 1;
    for (int i = 1; i < events; ++i)
        plan.counts[rand_int(rng, plan.start_year, span_end)] += 1;
    return plan;
}

} // namespace gen_detail

// Builds a corpus that plants three pair populations: delayed co-citations,
// flash-in-the-pan band pairs, and ordinary low-frequency pairs. Each planted
// pair owns two fresh member publications, one window source article with
// filler references (so the pair is enumerated), and one two-reference citing
// publication per remaining co-citation event. Optional bulk source articles
// over a shared reference pool add dedup and counting load without touching
// the planted truth.
inline GeneratedCorpus generate_corpus(const PipelineConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    GeneratedCorpus corpus;

    int next_member = 0, next_filler = 0, next_source = 0, next_citer = 0;

    auto add_pub = [&](std::string id, int year, std::vector<std::string> codes) {
        Publication p;
        p.id = std::move(id);
        p.year = year;
        p.pub_type = "article";
        p.subject_codes = std::move(codes);
        corpus.publications.push_back(std::move(p));
    };

    auto random_codes = [&](std::mt19937_64& r) {
        std::vector<std::string> codes;
        if (gen_detail::rand_int(r, 0, 9) == 0) return codes; // some members unlabeled
        const auto& pool = gen_detail::subject_pool();
        codes.push_back(pool[gen_detail::rand_int(r, 0, static_cast<int>(pool.size()) - 1)]);
        if (gen_detail::rand_int(r, 0, 2) == 0) {
            std::string extra = pool[gen_detail::rand_int(r, 0, static_cast<int>(pool.size()) - 1)];
            if (extra != codes[0]) codes.push_back(extra);
        }
        std::sort(codes.begin(), codes.end());
        return codes;
    };

    auto realize_pair = [&](const gen_detail::SeriesPlan& plan, const std::string& kind) {
        std::string a = gen_detail::make_id('M', next_member++);
        std::string b = gen_detail::make_id('M', next_member++);
        add_pub(a, plan.year_a, random_codes(rng));
        add_pub(b, plan.year_b, random_codes(rng));

        // Window source article: cites both members plus fillers up to min_refs.
        std::string src = gen_detail::make_id('S', next_source++);
        add_pub(src, plan.source_year, {});
        corpus.edges.push_back({src, a});
        corpus.edges.push_back({src, b});
        for (int i = 2; i < config.min_refs; ++i) {
            std::string filler = gen_detail::make_id('F', next_filler++);
            add_pub(filler, gen_detail::rand_int(rng, 1970, plan.source_year), {});
            corpus.edges.push_back({src, filler});
        }

        // Remaining events become two-reference citing publications; their
        // out-degree keeps them out of the source-article selection.
        for (auto [year, count] : plan.counts) {
            int remaining = year == plan.source_year ? count - 1 : count;
            for (int i = 0; i < remaining; ++i) {
                std::string citer = gen_detail::make_id('C', next_citer++);
                add_pub(citer, year, {});
                corpus.edges.push_back({citer, a});
                corpus.edges.push_back({citer, b});
            }
        }

        PlantedPair planted;
        planted.a = std::min(a, b);
        planted.b = std::max(a, b);
        planted.kind = kind;
        planted.total = plan.total();
        YearSeries series = plan.to_series(config.end_year);
        planted.peak = *std::max_element(series.counts.begin(), series.counts.end());
        corpus.planted.push_back(std::move(planted));
    };

    for (int i = 0; i < config.gen_delayed; ++i) {
        for (int attempt = 0;; ++attempt) {
            gen_detail::SeriesPlan plan = gen_detail::plan_delayed(rng, config);
            gen_detail::place_source_year(rng, plan, config.window);
            YearSeries series = plan.to_series(config.end_year);
            auto rec = detect_delayed("", series, plan.year_a, plan.year_b, config.detection);
            if (rec && rec->summary.total >= config.flash.band_max) {
                realize_pair(plan, "delayed");
                break;
            }
            if (attempt > 200)
                throw error("generator failed to plant a delayed pair; criteria too narrow");
        }
    }

    for (int i = 0; i < config.gen_flash; ++i) {
        for (int attempt = 0;; ++attempt) {
            gen_detail::SeriesPlan plan = gen_detail::plan_flash(rng, config);
            gen_detail::place_source_year(rng, plan, config.window);
            YearSeries series = plan.to_series(config.end_year);
            long long total = plan.total();
            BandRecord band = screen_flash_in_pan("", series, config.flash);
            if (total >= config.flash.band_min && total < config.flash.band_max &&
                band.cls == BandClass::flash_in_pan) {
                realize_pair(plan, "flash");
                break;
            }
            if (attempt > 200)
                throw error("generator failed to plant a flash pair; criteria too narrow");
        }
    }

    for (int i = 0; i < config.gen_ordinary; ++i) {
        for (int attempt = 0;; ++attempt) {
            gen_detail::SeriesPlan plan = gen_detail::plan_ordinary(rng, config, config.window);
            if (plan.total() < config.flash.band_min) {
                realize_pair(plan, "ordinary");
                break;
            }
            if (attempt > 200)
                throw error("generator failed to plant an ordinary pair");
        }
    }

    // Bulk load: source articles citing a shared pool of references.
    if (config.gen_bulk_sources > 0) {
        if (config.gen_bulk_pool < config.gen_bulk_refs_max)
            throw config_error("gen_bulk_pool must be at least gen_bulk_refs_max");
        for (int i = 0; i < config.gen_bulk_pool; ++i)
            add_pub(gen_detail::make_id('P', i), gen_detail::rand_int(rng, 1970, 1984), {});
        std::unordered_set<int> picks;
        for (int i = 0; i < config.gen_bulk_sources; ++i) {
            std::string src = gen_detail::make_id('B', i);
            add_pub(src, gen_detail::rand_int(rng, config.window.start, config.window.end), {});
            int refs = gen_detail::rand_int(rng, config.gen_bulk_refs_min, config.gen_bulk_refs_max);
            picks.clear();
            while (static_cast<int>(picks.size()) < refs)
                picks.insert(gen_detail::rand_int(rng, 0, config.gen_bulk_pool - 1));
            std::vector<int> sorted_picks(picks.begin(), picks.end());
            std::sort(sorted_picks.begin(), sorted_picks.end());
            for (int p : sorted_picks)
                corpus.edges.push_back({src, gen_detail::make_id('P', p)});
        }
    }

    std::sort(corpus.publications.begin(), corpus.publications.end(),
              [](const Publication& x, const Publication& y) { return x.id < y.id; });
    std::sort(corpus.edges.begin(), corpus.edges.end(), [](const RawEdge& x, const RawEdge& y) {
        return x.citing != y.citing ? x.citing < y.citing : x.cited < y.cited;
    });
    std::sort(corpus.planted.begin(), corpus.planted.end(),
              [](const PlantedPair& x, const PlantedPair& y) {
                  return x.a != y.a ? x.a < y.a : x.b < y.b;
              });
    return corpus;
}

} // namespace cocite
