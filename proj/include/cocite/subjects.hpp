#pragma once

#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cocite/errors.hpp"
#include "cocite/ingest.hpp"

namespace cocite {

inline constexpr const char* kUnknownSubject = "UNK";

// Weighted subject co-occurrence graph. Node weight counts distinct cohort
// articles carrying the code; edge weight counts one increment per pair per
// code combination, self edges included.
struct SubjectGraph {
    std::map<std::string, long long> nodes;
    std::map<std::pair<std::string, std::string>, long long> edges; // key.first <= key.second
    long long unlabeled_articles = 0;
};

inline SubjectGraph build_subject_graph(
    std::span<const std::pair<std::string, std::string>> pairs, const Catalog& catalog) {
    SubjectGraph graph;

    auto codes_of = [&](const std::string& id) -> std::vector<std::string> {
        auto it = catalog.find(id);
        if (it == catalog.end())
            throw integrity_error("pair member '" + id + "' is not in the catalog");
        if (it->second.subject_codes.empty()) return {kUnknownSubject};
        return it->second.subject_codes;
    };

    std::set<std::string> articles;
    for (const auto& [a, b] : pairs) {
        articles.insert(a);
        articles.insert(b);
        for (const std::string& x : codes_of(a))
            for (const std::string& y : codes_of(b)) {
                auto key = x <= y ? std::make_pair(x, y) : std::make_pair(y, x);
                ++graph.edges[key];
            }
    }
    for (const std::string& id : articles) {
        const auto& codes = catalog.at(id).subject_codes;
        if (codes.empty()) {
            ++graph.nodes[kUnknownSubject];
            ++graph.unlabeled_articles;
        } else {
            for (const std::string& code : codes) ++graph.nodes[code];
        }
    }
    return graph;
}

namespace detail {
inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}
} // namespace detail

inline void export_dot(const SubjectGraph& graph, std::ostream& out) {
    if (graph.nodes.empty())
        throw data_error("cannot export an empty subject graph");
    out << "graph subjects {\n";
    for (const auto& [code, weight] : graph.nodes)
        out << "  " << detail::dot_quote(code) << " [weight=" << weight << "];\n";
    for (const auto& [key, weight] : graph.edges)
        out << "  " << detail::dot_quote(key.first) << " -- " << detail::dot_quote(key.second)
            << " [weight=" << weight << "];\n";
    out << "}\n";
}

inline void export_graphml(const SubjectGraph& graph, std::ostream& out) {
    if (graph.nodes.empty())
        throw data_error("cannot export an empty subject graph");
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
    out << "  <key id=\"d0\" for=\"node\" attr.name=\"weight\" attr.type=\"long\"/>\n";
    out << "  <key id=\"d1\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n";
    out << "  <graph id=\"subjects\" edgedefault=\"undirected\">\n";
    for (const auto& [code, weight] : graph.nodes)
        out << "    <node id=\"" << detail::xml_escape(code) << "\"><data key=\"d0\">" << weight
            << "</data></node>\n";
    for (const auto& [key, weight] : graph.edges)
        out << "    <edge source=\"" << detail::xml_escape(key.first) << "\" target=\""
            << detail::xml_escape(key.second) << "\"><data key=\"d1\">" << weight
            << "</data></edge>\n";
    out << "  </graph>\n";
    out << "</graphml>\n";
}

inline void export_graph(const SubjectGraph& graph, const std::string& format,
                         std::ostream& out) {
    if (format == "dot")
        export_dot(graph, out);
    else if (format == "graphml")
        export_graphml(graph, out);
    else
        throw config_error("unsupported graph format '" + format + "' (use dot or graphml)");
}

} // namespace cocite
