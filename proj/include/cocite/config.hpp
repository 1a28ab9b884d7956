#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cocite/errors.hpp"
#include "cocite/ingest.hpp"
#include "cocite/kinetics.hpp"

namespace cocite {

// Flat key=value configuration. Every run writes its resolved configuration
// back out as a manifest, so any artifact can be reproduced from its manifest
// alone.
struct PipelineConfig {
    std::string nodelist;
    std::string edgelist;
    std::string workdir = "work";

    YearWindow window{1985, 1995};
    int min_refs = 5;
    std::string pub_type = "article";
    int end_year = 0; // required; no default is baked in

    std::size_t memory_budget = 1'000'000; // dedup records held in memory
    std::string spill_dir;                 // defaults to <workdir>/spill
    int partitions = 1;
    int batch = 1000;
    long long kinetics_min_total = 20;  // yearly series kept from this total up
    std::string kinetics_format = "long"; // long (canonical) or wide

    int sleep_threshold = 2;
    DetectionCriteria detection;
    VanRaanCriteria vanraan;
    FlashScreenCriteria flash;
    std::vector<double> percentiles{90, 95, 99};
    std::string subjects_override; // optional id,subjects CSV replacing nodelist codes

    std::uint64_t seed = 0;
    int gen_delayed = 50;
    int gen_flash = 50;
    int gen_ordinary = 500;
    int gen_bulk_sources = 0;
    int gen_bulk_pool = 0;
    int gen_bulk_refs_min = 10;
    int gen_bulk_refs_max = 15;

    void validate() const {
        if (window.start > window.end)
            throw config_error("window_start must be <= window_end");
        if (end_year <= window.end)
            throw config_error("end_year must be set and exceed window_end");
        if (min_refs < 2) throw config_error("min_refs must be >= 2");
        if (partitions < 1) throw config_error("partitions must be >= 1");
        if (batch < 1) throw config_error("batch must be >= 1");
        if (memory_budget == 0) throw config_error("memory_budget must be >= 1");
        if (sleep_threshold < 1) throw config_error("sleep_threshold must be >= 1");
        if (gen_bulk_refs_min < 2 || gen_bulk_refs_max < gen_bulk_refs_min)
            throw config_error("gen_bulk_refs range is invalid");
        if (kinetics_format != "long" && kinetics_format != "wide")
            throw config_error("kinetics_format must be 'long' or 'wide'");
        detection.validate();
        vanraan.validate();
        if (flash.band_min <= 0 || flash.band_max <= flash.band_min)
            throw config_error("flash band must satisfy 0 < band_min < band_max");
        for (double p : percentiles)
            if (!(p > 0.0 && p <= 100.0))
                throw config_error("percentiles must lie in (0, 100]");
    }

    std::string effective_spill_dir() const {
        return spill_dir.empty() ? workdir + "/spill" : spill_dir;
    }
};

namespace config_detail {

struct KeySpec {
    std::string name;
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, const std::string&)> set;
    // Semantic keys change what the artifacts contain. Execution knobs
    // (partitions, batch, budgets, paths of the workdir itself) do not, by
    // the determinism guarantees, and may vary between steps of one run.
    bool semantic = true;
};

inline std::string join_percentiles(const std::vector<double>& ps) {
    std::string s;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (i) s += ',';
        s += csv::format_double(ps[i]);
    }
    return s;
}

inline long long parse_ll(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long long out = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "' expects an integer, got '" + v + "'");
    }
}

inline const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = [] {
        std::vector<KeySpec> k;
        auto add = [&](std::string name, auto get, auto set, bool semantic = true) {
            k.push_back({std::move(name), get, set, semantic});
        };
        add("nodelist", [](const PipelineConfig& c) { return c.nodelist; },
            [](PipelineConfig& c, const std::string& v) { c.nodelist = v; });
        add("edgelist", [](const PipelineConfig& c) { return c.edgelist; },
            [](PipelineConfig& c, const std::string& v) { c.edgelist = v; });
        add("workdir", [](const PipelineConfig& c) { return c.workdir; },
            [](PipelineConfig& c, const std::string& v) { c.workdir = v; }, /*semantic=*/false);
        add("window_start", [](const PipelineConfig& c) { return std::to_string(c.window.start); },
            [](PipelineConfig& c, const std::string& v) { c.window.start = static_cast<int>(parse_ll("window_start", v)); });
        add("window_end", [](const PipelineConfig& c) { return std::to_string(c.window.end); },
            [](PipelineConfig& c, const std::string& v) { c.window.end = static_cast<int>(parse_ll("window_end", v)); });
        add("min_refs", [](const PipelineConfig& c) { return std::to_string(c.min_refs); },
            [](PipelineConfig& c, const std::string& v) { c.min_refs = static_cast<int>(parse_ll("min_refs", v)); });
        add("pub_type", [](const PipelineConfig& c) { return c.pub_type; },
            [](PipelineConfig& c, const std::string& v) { c.pub_type = v; });
        add("end_year", [](const PipelineConfig& c) { return std::to_string(c.end_year); },
            [](PipelineConfig& c, const std::string& v) { c.end_year = static_cast<int>(parse_ll("end_year", v)); });
        add("memory_budget", [](const PipelineConfig& c) { return std::to_string(c.memory_budget); },
            [](PipelineConfig& c, const std::string& v) {
                long long budget = parse_ll("memory_budget", v);
                if (budget <= 0) throw config_error("memory_budget must be positive");
                c.memory_budget = static_cast<std::size_t>(budget);
            }, /*semantic=*/false);
        add("spill_dir", [](const PipelineConfig& c) { return c.spill_dir; },
            [](PipelineConfig& c, const std::string& v) { c.spill_dir = v; }, /*semantic=*/false);
        add("partitions", [](const PipelineConfig& c) { return std::to_string(c.partitions); },
            [](PipelineConfig& c, const std::string& v) { c.partitions = static_cast<int>(parse_ll("partitions", v)); }, /*semantic=*/false);
        add("batch", [](const PipelineConfig& c) { return std::to_string(c.batch); },
            [](PipelineConfig& c, const std::string& v) { c.batch = static_cast<int>(parse_ll("batch", v)); }, /*semantic=*/false);
        add("kinetics_min_total", [](const PipelineConfig& c) { return std::to_string(c.kinetics_min_total); },
            [](PipelineConfig& c, const std::string& v) { c.kinetics_min_total = parse_ll("kinetics_min_total", v); });
        add("kinetics_format", [](const PipelineConfig& c) { return c.kinetics_format; },
            [](PipelineConfig& c, const std::string& v) { c.kinetics_format = v; }, /*semantic=*/false);
        add("sleep_threshold", [](const PipelineConfig& c) { return std::to_string(c.sleep_threshold); },
            [](PipelineConfig& c, const std::string& v) { c.sleep_threshold = static_cast<int>(parse_ll("sleep_threshold", v)); });
        add("min_total", [](const PipelineConfig& c) { return std::to_string(c.detection.min_total); },
            [](PipelineConfig& c, const std::string& v) { c.detection.min_total = parse_ll("min_total", v); });
        add("min_peak", [](const PipelineConfig& c) { return std::to_string(c.detection.min_peak); },
            [](PipelineConfig& c, const std::string& v) { c.detection.min_peak = static_cast<int>(parse_ll("min_peak", v)); });
        add("min_member_year", [](const PipelineConfig& c) { return std::to_string(c.detection.min_member_year); },
            [](PipelineConfig& c, const std::string& v) { c.detection.min_member_year = static_cast<int>(parse_ll("min_member_year", v)); });
        add("min_sleep_years", [](const PipelineConfig& c) { return std::to_string(c.detection.min_sleep_years); },
            [](PipelineConfig& c, const std::string& v) { c.detection.min_sleep_years = static_cast<int>(parse_ll("min_sleep_years", v)); });
        add("sleep_max_per_year", [](const PipelineConfig& c) { return std::to_string(c.detection.sleep_max_per_year); },
            [](PipelineConfig& c, const std::string& v) { c.detection.sleep_max_per_year = static_cast<int>(parse_ll("sleep_max_per_year", v)); });
        add("sleep_avg_max", [](const PipelineConfig& c) { return c.detection.sleep_avg_max.to_decimal(); },
            [](PipelineConfig& c, const std::string& v) { c.detection.sleep_avg_max = Ratio::from_decimal(v); });
        add("vr_min_sleep_years", [](const PipelineConfig& c) { return std::to_string(c.vanraan.min_sleep_years); },
            [](PipelineConfig& c, const std::string& v) { c.vanraan.min_sleep_years = static_cast<int>(parse_ll("vr_min_sleep_years", v)); });
        add("vr_sleep_avg_max", [](const PipelineConfig& c) { return c.vanraan.sleep_avg_max.to_decimal(); },
            [](PipelineConfig& c, const std::string& v) { c.vanraan.sleep_avg_max = Ratio::from_decimal(v); });
        add("vr_awakening_window", [](const PipelineConfig& c) { return std::to_string(c.vanraan.awakening_window); },
            [](PipelineConfig& c, const std::string& v) { c.vanraan.awakening_window = static_cast<int>(parse_ll("vr_awakening_window", v)); });
        add("vr_min_awakening_intensity", [](const PipelineConfig& c) { return c.vanraan.min_awakening_intensity.to_decimal(); },
            [](PipelineConfig& c, const std::string& v) { c.vanraan.min_awakening_intensity = Ratio::from_decimal(v); });
        add("band_min", [](const PipelineConfig& c) { return std::to_string(c.flash.band_min); },
            [](PipelineConfig& c, const std::string& v) { c.flash.band_min = parse_ll("band_min", v); });
        add("band_max", [](const PipelineConfig& c) { return std::to_string(c.flash.band_max); },
            [](PipelineConfig& c, const std::string& v) { c.flash.band_max = parse_ll("band_max", v); });
        add("flash_min_span_years", [](const PipelineConfig& c) { return std::to_string(c.flash.min_span_years); },
            [](PipelineConfig& c, const std::string& v) { c.flash.min_span_years = static_cast<int>(parse_ll("flash_min_span_years", v)); });
        add("flash_peak_threshold", [](const PipelineConfig& c) { return std::to_string(c.flash.peak_threshold); },
            [](PipelineConfig& c, const std::string& v) { c.flash.peak_threshold = static_cast<int>(parse_ll("flash_peak_threshold", v)); });
        add("subjects_override", [](const PipelineConfig& c) { return c.subjects_override; },
            [](PipelineConfig& c, const std::string& v) { c.subjects_override = v; });
        add("percentiles", [](const PipelineConfig& c) { return join_percentiles(c.percentiles); },
            [](PipelineConfig& c, const std::string& v) {
                c.percentiles.clear();
                std::stringstream ss(v);
                std::string item;
                while (std::getline(ss, item, ','))
                    if (!item.empty()) c.percentiles.push_back(std::stod(item));
            });
        add("seed", [](const PipelineConfig& c) { return std::to_string(c.seed); },
            [](PipelineConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_ll("seed", v)); }, /*semantic=*/false);
        add("gen_delayed", [](const PipelineConfig& c) { return std::to_string(c.gen_delayed); },
            [](PipelineConfig& c, const std::string& v) { c.gen_delayed = static_cast<int>(parse_ll("gen_delayed", v)); }, /*semantic=*/false);
        add("gen_flash", [](const PipelineConfig& c) { return std::to_string(c.gen_flash); },
            [](PipelineConfig& c, const std::string& v) { c.gen_flash = static_cast<int>(parse_ll("gen_flash", v)); }, /*semantic=*/false);
        add("gen_ordinary", [](const PipelineConfig& c) { return std::to_string(c.gen_ordinary); },
            [](PipelineConfig& c, const std::string& v) { c.gen_ordinary = static_cast<int>(parse_ll("gen_ordinary", v)); }, /*semantic=*/false);
        add("gen_bulk_sources", [](const PipelineConfig& c) { return std::to_string(c.gen_bulk_sources); },
            [](PipelineConfig& c, const std::string& v) { c.gen_bulk_sources = static_cast<int>(parse_ll("gen_bulk_sources", v)); }, /*semantic=*/false);
        add("gen_bulk_pool", [](const PipelineConfig& c) { return std::to_string(c.gen_bulk_pool); },
            [](PipelineConfig& c, const std::string& v) { c.gen_bulk_pool = static_cast<int>(parse_ll("gen_bulk_pool", v)); }, /*semantic=*/false);
        add("gen_bulk_refs_min", [](const PipelineConfig& c) { return std::to_string(c.gen_bulk_refs_min); },
            [](PipelineConfig& c, const std::string& v) { c.gen_bulk_refs_min = static_cast<int>(parse_ll("gen_bulk_refs_min", v)); }, /*semantic=*/false);
        add("gen_bulk_refs_max", [](const PipelineConfig& c) { return std::to_string(c.gen_bulk_refs_max); },
            [](PipelineConfig& c, const std::string& v) { c.gen_bulk_refs_max = static_cast<int>(parse_ll("gen_bulk_refs_max", v)); }, /*semantic=*/false);
        return k;
    }();
    return specs;
}

} // namespace config_detail

inline void apply_config_entry(PipelineConfig& config, const std::string& key,
                               const std::string& value) {
    for (const auto& spec : config_detail::key_specs()) {
        if (spec.name == key) {
            spec.set(config, value);
            return;
        }
    }
    throw config_error("unknown config key '" + key + "'");
}

// key = value lines; '#' starts a comment; blank lines ignored.
inline void load_config(std::istream& in, PipelineConfig& config) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = csv::strip_cr(line);
        std::size_t hash = body.find('#');
        if (hash != std::string_view::npos) body = body.substr(0, hash);
        std::size_t first = body.find_first_not_of(" \t");
        if (first == std::string_view::npos) continue;
        std::size_t eq = body.find('=');
        if (eq == std::string_view::npos)
            throw config_error("config line " + std::to_string(line_no) +
                               " is not of the form key = value");
        auto trim = [](std::string_view s) {
            std::size_t b = s.find_first_not_of(" \t");
            std::size_t e = s.find_last_not_of(" \t");
            return b == std::string_view::npos ? std::string()
                                               : std::string(s.substr(b, e - b + 1));
        };
        apply_config_entry(config, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    }
}

inline PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    PipelineConfig config;
    load_config(in, config);
    return config;
}

inline std::string serialize_config(const PipelineConfig& config) {
    std::string out;
    for (const auto& spec : config_detail::key_specs()) {
        out += spec.name;
        out += " = ";
        out += spec.get(config);
        out += '\n';
    }
    return out;
}

// Only the keys that determine artifact contents; see KeySpec::semantic.
inline std::string serialize_semantic_config(const PipelineConfig& config) {
    std::string out;
    for (const auto& spec : config_detail::key_specs()) {
        if (!spec.semantic) continue;
        out += spec.name;
        out += " = ";
        out += spec.get(config);
        out += '\n';
    }
    return out;
}

inline std::uint64_t config_hash(const PipelineConfig& config) {
    // FNV-1a over the canonical serialization; an identity stamp, not a MAC.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : serialize_config(config)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline void write_manifest(const PipelineConfig& config, std::ostream& out) {
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(config_hash(config)));
    out << "# cocite run manifest\n";
    out << "# config_hash = " << hex << "\n";
    out << serialize_config(config);
}

inline bool config_equal(const PipelineConfig& x, const PipelineConfig& y) {
    return serialize_config(x) == serialize_config(y);
}

inline bool config_equal_semantic(const PipelineConfig& x, const PipelineConfig& y) {
    return serialize_semantic_config(x) == serialize_semantic_config(y);
}

} // namespace cocite
