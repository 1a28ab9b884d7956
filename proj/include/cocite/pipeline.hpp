#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cocite/config.hpp"
#include "cocite/generate.hpp"
#include "cocite/ingest.hpp"
#include "cocite/kinetics.hpp"
#include "cocite/pairgen.hpp"
#include "cocite/stats.hpp"
#include "cocite/subjects.hpp"

namespace cocite::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kManifest = "manifest.txt";
inline constexpr const char* kCurationReport = "curation_report.csv";
inline constexpr const char* kSelectedSources = "selected_sources.csv";
inline constexpr const char* kUniquePairs = "unique_pairs.csv";
inline constexpr const char* kFrequencies = "frequencies.csv";
inline constexpr const char* kKinetics = "kinetics.csv";
inline constexpr const char* kDelayed = "delayed.csv";
inline constexpr const char* kVanRaan = "vanraan.csv";
inline constexpr const char* kFlash = "flash.csv";
inline constexpr const char* kDetectReport = "detect_report.csv";
inline constexpr const char* kHistogram = "histogram.csv";
inline constexpr const char* kEcdf = "ecdf.csv";
inline constexpr const char* kPercentiles = "percentiles.csv";
inline constexpr const char* kCohortSummary = "cohort_summary.csv";
inline constexpr const char* kSubjectsDot = "subjects.dot";
inline constexpr const char* kSubjectsGraphml = "subjects.graphml";
inline constexpr const char* kGenNodelist = "nodelist.csv";
inline constexpr const char* kGenEdgelist = "edgelist.csv";
inline constexpr const char* kPlantedManifest = "planted_manifest.csv";
inline constexpr const char* kGenManifest = "gen_manifest.txt";

namespace detail {

inline std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw resource_error("cannot create '" + path.string() + "'");
    return out;
}

inline std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path.string() + "'");
    return in;
}

inline void close_checked(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw resource_error("failed writing '" + path.string() + "' (disk full?)");
}

// Refuses to clobber artifacts from an earlier run unless forced; a manifest
// written with a different configuration counts as partial state too.
inline void guard_outputs(const PipelineConfig& config, const std::vector<const char*>& names,
                          bool force) {
    fs::create_directories(config.workdir);
    if (force) return;
    for (const char* name : names) {
        fs::path p = fs::path(config.workdir) / name;
        if (fs::exists(p))
            throw config_error("output '" + p.string() +
                               "' already exists; re-run with --force to overwrite");
    }
    fs::path manifest = fs::path(config.workdir) / kManifest;
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        PipelineConfig prior;
        try {
            load_config(in, prior);
        } catch (const error&) {
            throw config_error("existing manifest '" + manifest.string() +
                               "' is unreadable; re-run with --force");
        }
        if (!config_equal_semantic(prior, config))
            throw config_error("workdir holds artifacts from a different configuration; "
                               "re-run with --force to overwrite");
    }
}

inline void write_run_manifest(const PipelineConfig& config) {
    fs::path path = fs::path(config.workdir) / kManifest;
    auto out = open_out(path);
    write_manifest(config, out);
    close_checked(out, path);
}

struct LoadedGraph {
    CitationGraph graph;
    CurationReport report;
};

inline LoadedGraph load_graph(const PipelineConfig& config) {
    if (config.nodelist.empty() || config.edgelist.empty())
        throw config_error("nodelist and edgelist paths are required");
    auto nodes_in = open_in(config.nodelist);
    Catalog catalog = parse_nodelist(nodes_in);
    auto edges_in = open_in(config.edgelist);
    std::vector<RawEdge> edges = parse_edgelist(edges_in);
    auto [graph, report] = curate(edges, std::move(catalog));
    return {std::move(graph), report};
}

inline std::string pair_key(const CoCitedPair& p) { return p.a + "," + p.b; }

inline void write_summary_fields(std::ostream& out, const KineticsSummary& s) {
    out << s.total << ',' << s.peak_year << ',' << s.peak_count << ',';
    if (s.awakening_year) out << *s.awakening_year;
    out << ',';
    if (s.sleep_duration) out << *s.sleep_duration;
    out << ',';
    if (auto avg = s.sleep_avg()) out << csv::format_double(*avg);
    out << ',';
    if (s.sleep_max) out << *s.sleep_max;
    out << ',';
    if (s.slope)
        out << csv::format_double(*s.slope);
    else if (s.slope_undefined)
        out << "NA";
    out << ',' << csv::format_double(s.beauty);
}

// Streams kinetics.csv groups back into series. Long rows are sorted by pair
// and zero-filled over each pair's span, so a group is contiguous and
// gapless; wide rows carry one series per line.
template <typename Fn>
void for_each_kinetics_long(std::istream& in, Fn&& fn) {
    std::optional<CoCitedPair> current;
    YearSeries series;
    csv::for_each_row(in, "a,b,year,count", [&](const std::vector<std::string_view>& f,
                                                std::size_t line_no) {
        int year = csv::parse_int(f[2], line_no, "year");
        int count = csv::parse_int(f[3], line_no, "count");
        if (!current || current->a != f[0] || current->b != f[1]) {
            if (current) fn(*current, series);
            current = CoCitedPair{std::string(f[0]), std::string(f[1]), year};
            series.start_year = year;
            series.counts.clear();
        } else if (year != series.start_year + static_cast<int>(series.counts.size())) {
            throw data_error("kinetics rows for pair (" + std::string(f[0]) + ", " +
                             std::string(f[1]) + ") are not contiguous at line " +
                             std::to_string(line_no));
        }
        series.counts.push_back(count);
    });
    if (current) fn(*current, series);
}

template <typename Fn>
void for_each_kinetics_wide(std::istream& in, Fn&& fn) {
    csv::for_each_row(in, "a,b,start_year,counts", [&](const std::vector<std::string_view>& f,
                                                       std::size_t line_no) {
        YearSeries series;
        series.start_year = csv::parse_int(f[2], line_no, "start_year");
        std::vector<std::string_view> cells;
        csv::split(f[3], '|', cells);
        for (auto cell : cells) series.counts.push_back(csv::parse_int(cell, line_no, "count"));
        CoCitedPair pair{std::string(f[0]), std::string(f[1]), series.start_year};
        fn(pair, series);
    });
}

// Dispatches on the header so detect accepts either kinetics layout.
template <typename Fn>
void for_each_kinetics_series(const fs::path& path, Fn&& fn) {
    std::string header;
    {
        auto probe = open_in(path);
        std::getline(probe, header);
    }
    auto in = open_in(path);
    if (csv::strip_cr(header) == "a,b,start_year,counts")
        for_each_kinetics_wide(in, fn);
    else
        for_each_kinetics_long(in, fn);
}

} // namespace detail

// gen: seeded synthetic corpus plus the planting manifest. The generator's
// own configuration snapshot goes to a separate manifest file because its
// outputs are pipeline inputs, not derived artifacts.
inline void run_gen(const PipelineConfig& config, bool force = false) {
    config.validate();
    fs::path node_path = config.nodelist.empty() ? fs::path(config.workdir) / kGenNodelist
                                                 : fs::path(config.nodelist);
    fs::path edge_path = config.edgelist.empty() ? fs::path(config.workdir) / kGenEdgelist
                                                 : fs::path(config.edgelist);
    fs::create_directories(config.workdir);
    if (!force) {
        for (const fs::path& p :
             {node_path, edge_path, fs::path(config.workdir) / kPlantedManifest})
            if (fs::exists(p))
                throw config_error("output '" + p.string() +
                                   "' already exists; re-run with --force to overwrite");
    }
    GeneratedCorpus corpus = generate_corpus(config);
    {
        auto out = detail::open_out(node_path);
        corpus.write_nodelist(out);
        detail::close_checked(out, node_path);
    }
    {
        auto out = detail::open_out(edge_path);
        corpus.write_edgelist(out);
        detail::close_checked(out, edge_path);
    }
    {
        fs::path p = fs::path(config.workdir) / kPlantedManifest;
        auto out = detail::open_out(p);
        corpus.write_manifest(out);
        detail::close_checked(out, p);
    }
    {
        PipelineConfig recorded = config;
        recorded.nodelist = node_path.string();
        recorded.edgelist = edge_path.string();
        fs::path p = fs::path(config.workdir) / kGenManifest;
        auto out = detail::open_out(p);
        write_manifest(recorded, out);
        detail::close_checked(out, p);
    }
    std::cerr << "gen: " << corpus.publications.size() << " publications, "
              << corpus.edges.size() << " edges, " << corpus.planted.size()
              << " planted pairs\n";
}

// ingest: validate inputs, emit the curation report and the selected source
// articles.
inline void run_ingest(const PipelineConfig& config, bool force = false) {
    config.validate();
    detail::guard_outputs(config, {kCurationReport, kSelectedSources}, force);
    detail::LoadedGraph loaded = detail::load_graph(config);
    {
        fs::path p = fs::path(config.workdir) / kCurationReport;
        auto out = detail::open_out(p);
        loaded.report.write_csv(out);
        detail::close_checked(out, p);
    }
    std::vector<std::string> selected =
        select_source_articles(loaded.graph, config.window, config.min_refs, config.pub_type);
    {
        fs::path p = fs::path(config.workdir) / kSelectedSources;
        auto out = detail::open_out(p);
        out << "id\n";
        for (const std::string& id : selected) out << id << '\n';
        detail::close_checked(out, p);
    }
    detail::write_run_manifest(config);
    std::cerr << "ingest: " << loaded.report.retained_edges << " curated edges, "
              << selected.size() << " source articles\n";
}

// pairs: enumerate all reference combinations of the selected articles and
// deduplicate them under the memory budget.
inline void run_pairs(const PipelineConfig& config, bool force = false) {
    config.validate();
    detail::guard_outputs(config, {kUniquePairs}, force);
    detail::LoadedGraph loaded = detail::load_graph(config);
    std::vector<std::string> selected =
        select_source_articles(loaded.graph, config.window, config.min_refs, config.pub_type);

    PairDeduper dedup(config.memory_budget, config.effective_spill_dir());
    for (const std::string& id : selected)
        enumerate_pairs(loaded.graph, id, [&](const CoCitedPair& p) { dedup.add(p); });

    fs::path p = fs::path(config.workdir) / kUniquePairs;
    auto out = detail::open_out(p);
    out << "a,b,first_possible_year\n";
    std::size_t unique = 0;
    dedup.finish([&](const CoCitedPair& pair) {
        out << pair.a << ',' << pair.b << ',' << pair.first_possible_year << '\n';
        ++unique;
    });
    detail::close_checked(out, p);
    detail::write_run_manifest(config);
    std::cerr << "pairs: " << dedup.added_count() << " enumerated, " << unique << " unique ("
              << dedup.run_count() << " spill runs)\n";
}

struct CountStats {
    std::size_t pairs = 0;
    std::size_t with_series = 0;
    double counting_seconds = 0.0;
};

// count: total and per-year frequencies for every unique pair, partitioned
// deterministically. Yearly series are materialized for pairs whose total is
// at least kinetics_min_total.
inline CountStats run_count(const PipelineConfig& config, bool force = false) {
    config.validate();
    detail::guard_outputs(config, {kFrequencies, kKinetics}, force);
    detail::LoadedGraph loaded = detail::load_graph(config);
    CitingIndex index(loaded.graph);

    fs::path pairs_path = fs::path(config.workdir) / kUniquePairs;
    auto pairs_in = std::make_shared<std::ifstream>(pairs_path, std::ios::binary);
    if (!*pairs_in) throw data_error("cannot open '" + pairs_path.string() + "' (run pairs first)");
    {
        std::string header;
        if (!std::getline(*pairs_in, header) ||
            csv::strip_cr(header) != "a,b,first_possible_year")
            throw data_error("unexpected header in '" + pairs_path.string() + "'");
    }
    auto line_no = std::make_shared<std::size_t>(1);
    const std::size_t batch = static_cast<std::size_t>(config.batch);
    BatchSource source = [pairs_in, line_no, batch]() {
        std::vector<CoCitedPair> out;
        out.reserve(batch);
        std::string line;
        std::vector<std::string_view> f;
        while (out.size() < batch && std::getline(*pairs_in, line)) {
            ++*line_no;
            std::string_view body = csv::strip_cr(line);
            if (body.empty()) continue;
            csv::split(body, ',', f);
            if (f.size() != 3)
                throw data_error("bad unique-pairs row at line " + std::to_string(*line_no));
            out.push_back(CoCitedPair{std::string(f[0]), std::string(f[1]),
                                      csv::parse_int(f[2], *line_no, "first_possible_year")});
        }
        return out;
    };

    fs::path freq_path = fs::path(config.workdir) / kFrequencies;
    fs::path kin_path = fs::path(config.workdir) / kKinetics;
    auto freq_out = detail::open_out(freq_path);
    auto kin_out = detail::open_out(kin_path);
    const bool wide = config.kinetics_format == "wide";
    freq_out << "a,b,total\n";
    kin_out << (wide ? "a,b,start_year,counts\n" : "a,b,year,count\n");

    CountStats stats;
    auto started = std::chrono::steady_clock::now();
    count_parallel(index, source, config.end_year, config.partitions, config.kinetics_min_total,
                   [&](const PairCounts& pc) {
                       freq_out << pc.pair.a << ',' << pc.pair.b << ',' << pc.total << '\n';
                       ++stats.pairs;
                       if (!pc.series) return;
                       ++stats.with_series;
                       if (wide) {
                           kin_out << pc.pair.a << ',' << pc.pair.b << ','
                                   << pc.series->start_year << ',';
                           for (std::size_t t = 0; t < pc.series->counts.size(); ++t) {
                               if (t) kin_out << '|';
                               kin_out << pc.series->counts[t];
                           }
                           kin_out << '\n';
                       } else {
                           for (std::size_t t = 0; t < pc.series->counts.size(); ++t)
                               kin_out << pc.pair.a << ',' << pc.pair.b << ','
                                       << pc.series->year_at(t) << ',' << pc.series->counts[t]
                                       << '\n';
                       }
                   });
    stats.counting_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    detail::close_checked(freq_out, freq_path);
    detail::close_checked(kin_out, kin_path);
    detail::write_run_manifest(config);
    std::cerr << "count: " << stats.pairs << " pairs, " << stats.with_series
              << " with kinetics, " << csv::format_double(stats.counting_seconds) << "s with "
              << config.partitions << " partition(s)\n";
    return stats;
}

struct DetectStats {
    std::size_t delayed = 0;
    std::size_t band_pairs = 0;
    std::size_t band_flash = 0;
    std::size_t band_multi_peak = 0;
    std::size_t vanraan_accepted = 0;
    std::size_t vanraan_rejected = 0;
    std::size_t vanraan_inconclusive = 0;
    std::size_t both_member_sb_pairs = 0;
};

// detect: delayed co-citations, the flash-in-the-pan band screen, and the
// van Raan Sleeping Beauty test over the publications contributing to the
// delayed pairs.
inline DetectStats run_detect(const PipelineConfig& config, bool force = false) {
    config.validate();
    detail::guard_outputs(config, {kDelayed, kVanRaan, kFlash, kDetectReport}, force);
    if (config.kinetics_min_total > config.flash.band_min)
        std::cerr << "detect: warning: kinetics_min_total (" << config.kinetics_min_total
                  << ") exceeds band_min (" << config.flash.band_min
                  << "); band pairs below it were never materialized and cannot be screened\n";
    detail::LoadedGraph loaded = detail::load_graph(config);
    CitingIndex index(loaded.graph);

    fs::path delayed_path = fs::path(config.workdir) / kDelayed;
    fs::path flash_path = fs::path(config.workdir) / kFlash;
    auto delayed_out = detail::open_out(delayed_path);
    auto flash_out = detail::open_out(flash_path);
    delayed_out << "a,b,total,peak_year,peak_count,awakening_year,sleep_duration,sleep_avg,"
                   "sleep_max,slope,beauty,verdict\n";
    flash_out << "a,b,total,peak_year,peak_count,beauty,years_at_peak_threshold,classification\n";

    DetectStats stats;
    std::vector<std::pair<std::string, std::string>> delayed_pairs;
    std::set<std::string> members;

    fs::path kin_path = fs::path(config.workdir) / kKinetics;
    detail::for_each_kinetics_series(kin_path, [&](const CoCitedPair& pair, const YearSeries& series) {
        long long total = series.total();
        auto year_of = [&](const std::string& id) {
            auto it = loaded.graph.catalog.find(id);
            if (it == loaded.graph.catalog.end() || !it->second.year)
                throw integrity_error("pair member '" + id + "' lacks a publication year");
            return *it->second.year;
        };
        if (total >= config.detection.min_total) {
            auto rec = detect_delayed(detail::pair_key(pair), series, year_of(pair.a),
                                      year_of(pair.b), config.detection);
            if (rec) {
                delayed_out << pair.a << ',' << pair.b << ',';
                detail::write_summary_fields(delayed_out, rec->summary);
                delayed_out << ',' << to_string(rec->verdict) << '\n';
                ++stats.delayed;
                delayed_pairs.emplace_back(pair.a, pair.b);
                members.insert(pair.a);
                members.insert(pair.b);
            }
        } else if (total >= config.flash.band_min && total < config.flash.band_max) {
            ++stats.band_pairs;
            BandRecord band = screen_flash_in_pan(detail::pair_key(pair), series, config.flash);
            if (band.cls == BandClass::flash_in_pan) ++stats.band_flash;
            if (band.cls == BandClass::multi_peak) ++stats.band_multi_peak;
            flash_out << pair.a << ',' << pair.b << ',' << band.summary.total << ','
                      << band.summary.peak_year << ',' << band.summary.peak_count << ','
                      << csv::format_double(band.summary.beauty) << ',' << band.years_at_threshold
                      << ',' << to_string(band.cls) << '\n';
        }
    });
    detail::close_checked(delayed_out, delayed_path);
    detail::close_checked(flash_out, flash_path);

    // van Raan screen over the contributing publications.
    std::map<std::string, VanRaanStatus> vanraan_status;
    fs::path vr_path = fs::path(config.workdir) / kVanRaan;
    auto vr_out = detail::open_out(vr_path);
    vr_out << "id,total,peak_year,peak_count,awakening_year,sleep_duration,sleep_avg,sleep_max,"
              "slope,beauty,outcome\n";
    for (const std::string& id : members) {
        int pub_year = loaded.graph.catalog.at(id).year.value();
        YearSeries series = index.citation_series(id, pub_year, config.end_year);
        VanRaanOutcome outcome = detect_vanraan(id, series, config.vanraan, config.sleep_threshold);
        vanraan_status[id] = outcome.status;
        switch (outcome.status) {
            case VanRaanStatus::accepted: ++stats.vanraan_accepted; break;
            case VanRaanStatus::rejected: ++stats.vanraan_rejected; break;
            case VanRaanStatus::inconclusive: ++stats.vanraan_inconclusive; break;
        }
        vr_out << id << ',';
        detail::write_summary_fields(vr_out, outcome.summary);
        const char* label = outcome.status == VanRaanStatus::accepted     ? "accepted"
                            : outcome.status == VanRaanStatus::rejected   ? "rejected"
                                                                          : "inconclusive";
        vr_out << ',' << label << '\n';
    }
    detail::close_checked(vr_out, vr_path);

    for (const auto& [a, b] : delayed_pairs)
        if (vanraan_status[a] == VanRaanStatus::accepted &&
            vanraan_status[b] == VanRaanStatus::accepted)
            ++stats.both_member_sb_pairs;

    fs::path report_path = fs::path(config.workdir) / kDetectReport;
    auto report_out = detail::open_out(report_path);
    report_out << "metric,count\n";
    report_out << "delayed_pairs," << stats.delayed << '\n';
    report_out << "band_pairs," << stats.band_pairs << '\n';
    report_out << "band_flash_in_pan," << stats.band_flash << '\n';
    report_out << "band_multi_peak," << stats.band_multi_peak << '\n';
    report_out << "contributing_publications," << members.size() << '\n';
    report_out << "vanraan_accepted," << stats.vanraan_accepted << '\n';
    report_out << "vanraan_rejected," << stats.vanraan_rejected << '\n';
    report_out << "vanraan_inconclusive," << stats.vanraan_inconclusive << '\n';
    report_out << "both_member_sleeping_beauty_pairs," << stats.both_member_sb_pairs << '\n';
    detail::close_checked(report_out, report_path);
    detail::write_run_manifest(config);
    std::cerr << "detect: " << stats.delayed << " delayed, " << stats.band_flash
              << " flash-in-the-pan candidates, " << stats.vanraan_accepted
              << " sleeping beauties\n";
    return stats;
}

// Reads delayed.csv back into records (enough of each record for the cohort
// summary and the subjects graph).
inline std::vector<DetectionRecord> load_delayed_records(const fs::path& path) {
    std::vector<DetectionRecord> records;
    auto in = detail::open_in(path);
    csv::for_each_row(
        in,
        "a,b,total,peak_year,peak_count,awakening_year,sleep_duration,sleep_avg,sleep_max,slope,"
        "beauty,verdict",
        [&](const std::vector<std::string_view>& f, std::size_t line_no) {
            DetectionRecord rec;
            rec.key = std::string(f[0]) + "," + std::string(f[1]);
            rec.summary.total = csv::parse_int64(f[2], line_no, "total");
            rec.summary.peak_year = csv::parse_int(f[3], line_no, "peak_year");
            rec.summary.peak_count = csv::parse_int(f[4], line_no, "peak_count");
            if (!f[5].empty())
                rec.summary.awakening_year = csv::parse_int(f[5], line_no, "awakening_year");
            if (!f[6].empty())
                rec.summary.sleep_duration = csv::parse_int(f[6], line_no, "sleep_duration");
            if (!f[8].empty()) rec.summary.sleep_max = csv::parse_int(f[8], line_no, "sleep_max");
            if (f[9] == "NA")
                rec.summary.slope_undefined = true;
            else if (!f[9].empty())
                rec.summary.slope = std::stod(std::string(f[9]));
            rec.summary.beauty = std::stod(std::string(f[10]));
            rec.verdict = Verdict::delayed;
            // sleep_sum is recoverable from avg * duration when present.
            if (!f[7].empty() && rec.summary.sleep_duration)
                rec.summary.sleep_sum = static_cast<long long>(
                    std::stod(std::string(f[7])) * *rec.summary.sleep_duration + 0.5);
            records.push_back(std::move(rec));
        });
    return records;
}

// stats: distribution artifacts over all pair totals plus the delayed-cohort
// summary table.
inline void run_stats(const PipelineConfig& config, bool force = false) {
    config.validate();
    detail::guard_outputs(config, {kHistogram, kEcdf, kPercentiles, kCohortSummary}, force);

    std::vector<long long> totals;
    {
        fs::path p = fs::path(config.workdir) / kFrequencies;
        auto in = detail::open_in(p);
        csv::for_each_row(in, "a,b,total", [&](const std::vector<std::string_view>& f,
                                               std::size_t line_no) {
            totals.push_back(csv::parse_int64(f[2], line_no, "total"));
        });
    }
    // Zero-frequency pairs cannot occur (every unique pair was co-cited at
    // least once by construction), but guard anyway.
    std::vector<long long> positive;
    positive.reserve(totals.size());
    for (long long t : totals)
        if (t >= 1) positive.push_back(t);
    if (positive.empty())
        throw data_error("no pair frequencies to summarize; run count on a non-empty corpus");

    {
        fs::path p = fs::path(config.workdir) / kHistogram;
        auto out = detail::open_out(p);
        histogram(positive).write_csv(out);
        detail::close_checked(out, p);
    }
    {
        fs::path p = fs::path(config.workdir) / kEcdf;
        auto out = detail::open_out(p);
        out << "frequency,cumulative_fraction\n";
        for (const EcdfPoint& pt : ecdf(positive))
            out << pt.value << ',' << csv::format_double(pt.cumulative_fraction) << '\n';
        detail::close_checked(out, p);
    }
    {
        fs::path p = fs::path(config.workdir) / kPercentiles;
        auto out = detail::open_out(p);
        out << "percentile,value\n";
        std::vector<long long> values = percentiles(positive, config.percentiles);
        for (std::size_t i = 0; i < values.size(); ++i)
            out << csv::format_double(config.percentiles[i]) << ',' << values[i] << '\n';
        detail::close_checked(out, p);
    }
    {
        std::vector<DetectionRecord> cohort =
            load_delayed_records(fs::path(config.workdir) / kDelayed);
        fs::path p = fs::path(config.workdir) / kCohortSummary;
        auto out = detail::open_out(p);
        if (cohort.empty())
            out << "statistic,total,peak,sleep_duration,slope,beauty\n";
        else
            summarize_cohort(cohort).write_csv(out);
        detail::close_checked(out, p);
    }
    detail::write_run_manifest(config);
    std::cerr << "stats: " << positive.size() << " pair totals summarized\n";
}

// subjects: weighted subject-area co-occurrence graph of the delayed cohort.
inline void run_subjects(const PipelineConfig& config, bool force = false) {
    config.validate();
    detail::guard_outputs(config, {kSubjectsDot, kSubjectsGraphml}, force);

    auto nodes_in = detail::open_in(config.nodelist);
    Catalog catalog = parse_nodelist(nodes_in);
    if (!config.subjects_override.empty()) {
        auto in = detail::open_in(config.subjects_override);
        csv::for_each_row(in, "id,subjects", [&](const std::vector<std::string_view>& f,
                                                 std::size_t) {
            auto it = catalog.find(std::string(f[0]));
            if (it == catalog.end()) return;
            it->second.subject_codes.clear();
            std::vector<std::string_view> codes;
            csv::split(f[1], '|', codes);
            for (auto c : codes)
                if (!c.empty()) it->second.subject_codes.emplace_back(c);
            std::sort(it->second.subject_codes.begin(), it->second.subject_codes.end());
        });
    }

    std::vector<std::pair<std::string, std::string>> cohort;
    for (const DetectionRecord& rec : load_delayed_records(fs::path(config.workdir) / kDelayed)) {
        std::size_t comma = rec.key.find(',');
        cohort.emplace_back(rec.key.substr(0, comma), rec.key.substr(comma + 1));
    }
    if (cohort.empty()) {
        std::cerr << "subjects: no delayed pairs; nothing to export\n";
        detail::write_run_manifest(config);
        return;
    }
    SubjectGraph graph = build_subject_graph(cohort, catalog);
    {
        fs::path p = fs::path(config.workdir) / kSubjectsDot;
        auto out = detail::open_out(p);
        export_dot(graph, out);
        detail::close_checked(out, p);
    }
    {
        fs::path p = fs::path(config.workdir) / kSubjectsGraphml;
        auto out = detail::open_out(p);
        export_graphml(graph, out);
        detail::close_checked(out, p);
    }
    detail::write_run_manifest(config);
    std::cerr << "subjects: " << graph.nodes.size() << " subject nodes, " << graph.edges.size()
              << " edges (" << graph.unlabeled_articles << " unlabeled articles)\n";
}

// all: the full pipeline, ingest through subjects, over existing inputs.
inline void run_all(const PipelineConfig& config, bool force = false) {
    run_ingest(config, force);
    run_pairs(config, force);
    run_count(config, force);
    run_detect(config, force);
    run_stats(config, force);
    run_subjects(config, force);
}

} // namespace cocite::pipeline
