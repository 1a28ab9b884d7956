#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cocite/csv.hpp"
#include "cocite/errors.hpp"

namespace cocite {

struct Publication {
    std::string id;
    std::optional<int> year;
    std::string pub_type;
    std::vector<std::string> subject_codes; // sorted, unique
};

using Catalog = std::unordered_map<std::string, Publication>;

struct RawEdge {
    std::string citing;
    std::string cited;
};

// Curated graph: every retained edge resolves, has no self loop, and satisfies
// cited.year <= citing.year. Immutable once built; safe to share across
// counting workers.
struct CitationGraph {
    Catalog catalog;
    std::unordered_map<std::string, std::vector<std::string>> out_edges; // sorted, unique

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (const auto& [id, refs] : out_edges) n += refs.size();
        return n;
    }
};

struct CurationReport {
    std::size_t input_edges = 0;
    std::size_t dropped_unresolved_refs = 0;
    std::size_t dropped_self_citations = 0;
    std::size_t dropped_missing_year = 0;
    std::size_t dropped_future_refs = 0;
    std::size_t collapsed_duplicates = 0;
    std::size_t retained_edges = 0;

    std::size_t dropped_total() const {
        return dropped_unresolved_refs + dropped_self_citations + dropped_missing_year +
               dropped_future_refs + collapsed_duplicates;
    }

    void write_csv(std::ostream& out) const {
        out << "metric,count\n";
        out << "input_edges," << input_edges << '\n';
        out << "dropped_unresolved_refs," << dropped_unresolved_refs << '\n';
        out << "dropped_self_citations," << dropped_self_citations << '\n';
        out << "dropped_missing_year," << dropped_missing_year << '\n';
        out << "dropped_future_refs," << dropped_future_refs << '\n';
        out << "collapsed_duplicates," << collapsed_duplicates << '\n';
        out << "retained_edges," << retained_edges << '\n';
    }
};

// Nodelist rows: id,year,type,subjects with subjects pipe-separated (may be
// empty). Year may be empty for publications with unknown date; such
// publications stay in the catalog but curation drops every edge touching
// them.
inline Catalog parse_nodelist(std::istream& in) {
    Catalog catalog;
    csv::for_each_row(in, "id,year,type,subjects", [&](const std::vector<std::string_view>& f, std::size_t line_no) {
        if (f[0].empty())
            throw parse_error("empty id", line_no);
        if (csv::has_control_chars(f[0]))
            throw parse_error("id contains control characters", line_no);
        Publication pub;
        pub.id = std::string(f[0]);
        if (!f[1].empty()) {
            int year = csv::parse_int(f[1], line_no, "year");
            if (year <= 0)
                throw parse_error("year must be positive, got " + std::to_string(year), line_no);
            pub.year = year;
        }
        pub.pub_type = std::string(f[2]);
        if (!f[3].empty()) {
            std::vector<std::string_view> codes;
            csv::split(f[3], '|', codes);
            for (auto c : codes)
                if (!c.empty()) pub.subject_codes.emplace_back(c);
            std::sort(pub.subject_codes.begin(), pub.subject_codes.end());
            pub.subject_codes.erase(std::unique(pub.subject_codes.begin(), pub.subject_codes.end()),
                                    pub.subject_codes.end());
        }
        auto [it, inserted] = catalog.emplace(pub.id, std::move(pub));
        if (!inserted)
            throw integrity_error("duplicate publication id '" + it->first + "' in nodelist");
    });
    return catalog;
}

// Edgelist rows: citing_id,cited_id. Unresolved endpoints are kept here and
// flagged later by curate().
inline std::vector<RawEdge> parse_edgelist(std::istream& in) {
    std::vector<RawEdge> edges;
    csv::for_each_row(in, "citing_id,cited_id", [&](const std::vector<std::string_view>& f, std::size_t line_no) {
        if (f[0].empty() || f[1].empty())
            throw parse_error("empty edge endpoint", line_no);
        if (csv::has_control_chars(f[0]) || csv::has_control_chars(f[1]))
            throw parse_error("edge endpoint contains control characters", line_no);
        edges.push_back({std::string(f[0]), std::string(f[1])});
    });
    return edges;
}

// Drop rules applied in order, so each edge lands in exactly one bucket:
// unresolved endpoint -> self citation -> missing year (either endpoint) ->
// cited newer than citing -> duplicate of an already retained edge.
inline std::pair<CitationGraph, CurationReport> curate(const std::vector<RawEdge>& edges,
                                                       Catalog catalog) {
    CitationGraph graph;
    CurationReport report;
    report.input_edges = edges.size();

    std::unordered_map<std::string, std::unordered_set<std::string>> seen;
    for (const RawEdge& e : edges) {
        auto citing_it = catalog.find(e.citing);
        auto cited_it = catalog.find(e.cited);
        if (citing_it == catalog.end() || cited_it == catalog.end()) {
            ++report.dropped_unresolved_refs;
            continue;
        }
        if (e.citing == e.cited) {
            ++report.dropped_self_citations;
            continue;
        }
        if (!citing_it->second.year || !cited_it->second.year) {
            ++report.dropped_missing_year;
            continue;
        }
        if (*cited_it->second.year > *citing_it->second.year) {
            ++report.dropped_future_refs;
            continue;
        }
        if (!seen[e.citing].insert(e.cited).second) {
            ++report.collapsed_duplicates;
            continue;
        }
        ++report.retained_edges;
    }
    for (auto& [citing, cited_set] : seen) {
        std::vector<std::string> refs(cited_set.begin(), cited_set.end());
        std::sort(refs.begin(), refs.end());
        graph.out_edges.emplace(citing, std::move(refs));
    }
    graph.catalog = std::move(catalog);
    return {std::move(graph), report};
}

inline std::vector<RawEdge> edges_of(const CitationGraph& graph) {
    std::vector<RawEdge> edges;
    for (const auto& [citing, refs] : graph.out_edges)
        for (const auto& cited : refs) edges.push_back({citing, cited});
    return edges;
}

struct YearWindow {
    int start = 0;
    int end = 0;
};

// Source articles: matching type, year inside the window (inclusive), and at
// least min_refs curated references.
inline std::vector<std::string> select_source_articles(const CitationGraph& graph,
                                                       YearWindow window, int min_refs,
                                                       const std::string& pub_type) {
    if (window.start > window.end)
        throw config_error("selection window is empty: " + std::to_string(window.start) + " > " +
                           std::to_string(window.end));
    if (min_refs < 2)
        throw config_error("min_refs must be at least 2, got " + std::to_string(min_refs));

    std::vector<std::string> selected;
    for (const auto& [id, refs] : graph.out_edges) {
        if (static_cast<int>(refs.size()) < min_refs) continue;
        const Publication& pub = graph.catalog.at(id);
        if (pub.pub_type != pub_type) continue;
        if (!pub.year || *pub.year < window.start || *pub.year > window.end) continue;
        selected.push_back(id);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

} // namespace cocite
