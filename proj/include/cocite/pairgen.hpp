#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cocite/ingest.hpp"
#include "cocite/kinetics.hpp"

namespace cocite {

// Canonically ordered pair of publication ids. first_possible_year is the
// more recent of the two publication years.
struct CoCitedPair {
    std::string a;
    std::string b;
    int first_possible_year = 0;

    bool operator==(const CoCitedPair&) const = default;
    auto operator<=>(const CoCitedPair& o) const {
        if (auto c = a <=> o.a; c != 0) return c;
        return b <=> o.b;
    }
};

inline CoCitedPair make_cocited(std::string x, int year_x, std::string y, int year_y) {
    if (x == y)
        throw integrity_error("co-cited pair members must differ: '" + x + "'");
    CoCitedPair p;
    p.first_possible_year = std::max(year_x, year_y);
    if (x < y) {
        p.a = std::move(x);
        p.b = std::move(y);
    } else {
        p.a = std::move(y);
        p.b = std::move(x);
    }
    return p;
}

// All n-choose-2 combinations of one article's curated references, in
// canonical order. Sink receives each CoCitedPair exactly once.
template <typename Fn>
void enumerate_pairs(const CitationGraph& graph, const std::string& article_id, Fn&& sink) {
    auto it = graph.out_edges.find(article_id);
    if (it == graph.out_edges.end() || it->second.size() < 2)
        throw integrity_error("enumerate_pairs: article '" + article_id +
                              "' has fewer than 2 curated references");
    const std::vector<std::string>& refs = it->second; // sorted unique
    std::vector<int> years(refs.size());
    for (std::size_t i = 0; i < refs.size(); ++i)
        years[i] = graph.catalog.at(refs[i]).year.value();
    for (std::size_t i = 0; i < refs.size(); ++i)
        for (std::size_t j = i + 1; j < refs.size(); ++j)
            sink(CoCitedPair{refs[i], refs[j], std::max(years[i], years[j])});
}

namespace detail {

constexpr char kFieldSep = '\x1f';

inline std::string pair_record(const CoCitedPair& p) {
    std::string rec;
    rec.reserve(p.a.size() + p.b.size() + 8);
    rec += p.a;
    rec += kFieldSep;
    rec += p.b;
    rec += kFieldSep;
    rec += std::to_string(p.first_possible_year);
    return rec;
}

inline CoCitedPair record_pair(const std::string& rec) {
    std::size_t s1 = rec.find(kFieldSep);
    std::size_t s2 = rec.find(kFieldSep, s1 + 1);
    if (s1 == std::string::npos || s2 == std::string::npos)
        throw data_error("corrupt spill record: '" + rec + "'");
    CoCitedPair p;
    p.a = rec.substr(0, s1);
    p.b = rec.substr(s1 + 1, s2 - s1 - 1);
    p.first_possible_year = std::stoi(rec.substr(s2 + 1));
    return p;
}

} // namespace detail

// External-memory deduplication. Pairs are serialized as a\x1Fb\x1Fyear
// records; whenever the buffer reaches the budget, a sorted unique run is
// spilled to disk and the runs are k-way merged at the end. When the run
// count exceeds the merge fan-in, groups of runs are merged into
// intermediate runs first, so pathologically small budgets cannot exhaust
// file descriptors. Output is the globally sorted duplicate-free sequence,
// independent of input order and of the budget.
class PairDeduper {
public:
    static constexpr std::size_t kMergeFanIn = 256;

    PairDeduper(std::size_t budget_records, std::filesystem::path spill_dir)
        : budget_(budget_records), spill_dir_(std::move(spill_dir)) {
        if (budget_ == 0)
            throw config_error("dedup memory budget must be positive");
    }

    ~PairDeduper() { cleanup(); }

    void add(const CoCitedPair& pair) {
        buffer_.push_back(detail::pair_record(pair));
        ++added_;
        if (buffer_.size() >= budget_) spill();
    }

    // Emits each unique pair in canonical order, then removes spill files.
    // May be called once.
    void finish(const std::function<void(const CoCitedPair&)>& sink) {
        if (runs_.empty()) {
            sort_unique(buffer_);
            for (const std::string& rec : buffer_) sink(detail::record_pair(rec));
            buffer_.clear();
            return;
        }
        if (!buffer_.empty()) spill();
        while (runs_.size() > kMergeFanIn) {
            std::vector<std::filesystem::path> next;
            for (std::size_t at = 0; at < runs_.size(); at += kMergeFanIn) {
                std::size_t n = std::min(kMergeFanIn, runs_.size() - at);
                std::vector<std::filesystem::path> group(runs_.begin() + at,
                                                         runs_.begin() + at + n);
                std::filesystem::path merged = next_run_path();
                std::ofstream out(merged, std::ios::binary);
                if (!out)
                    throw resource_error("cannot create merge run " + merged.string());
                merge_into(group, [&](const std::string& rec) { out << rec << '\n'; });
                out.flush();
                if (!out)
                    throw resource_error("failed writing merge run " + merged.string() +
                                         " (disk full?)");
                remove_runs(group);
                next.push_back(std::move(merged));
            }
            runs_ = std::move(next);
        }
        merge_into(runs_, [&](const std::string& rec) { sink(detail::record_pair(rec)); });
        cleanup();
    }

    std::size_t run_count() const { return spilled_; }
    std::size_t added_count() const { return added_; }

private:
    static void sort_unique(std::vector<std::string>& records) {
        std::sort(records.begin(), records.end());
        records.erase(std::unique(records.begin(), records.end()), records.end());
    }

    std::filesystem::path next_run_path() {
        std::error_code ec;
        std::filesystem::create_directories(spill_dir_, ec);
        return spill_dir_ / ("run_" + std::to_string(next_run_id_++) + ".tmp");
    }

    void spill() {
        sort_unique(buffer_);
        std::filesystem::path path = next_run_path();
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw resource_error("cannot create spill run " + path.string());
        for (const std::string& rec : buffer_) out << rec << '\n';
        out.flush();
        if (!out)
            throw resource_error("failed writing spill run " + path.string() +
                                 " (disk full?)");
        runs_.push_back(path);
        ++spilled_;
        buffer_.clear();
    }

    // Merges sorted runs, suppressing duplicates, into a record sink.
    static void merge_into(const std::vector<std::filesystem::path>& runs,
                           const std::function<void(const std::string&)>& sink) {
        struct Head {
            std::string rec;
            std::size_t run;
        };
        auto cmp = [](const Head& x, const Head& y) {
            return x.rec != y.rec ? x.rec > y.rec : x.run > y.run;
        };
        std::priority_queue<Head, std::vector<Head>, decltype(cmp)> heap(cmp);

        std::vector<std::ifstream> streams;
        streams.reserve(runs.size());
        for (const auto& path : runs) {
            streams.emplace_back(path, std::ios::binary);
            if (!streams.back())
                throw resource_error("cannot reopen spill run " + path.string());
        }
        std::string line;
        for (std::size_t r = 0; r < streams.size(); ++r)
            if (std::getline(streams[r], line)) heap.push({line, r});

        std::string last;
        bool have_last = false;
        while (!heap.empty()) {
            Head head = heap.top();
            heap.pop();
            if (!have_last || head.rec != last) {
                sink(head.rec);
                last = head.rec;
                have_last = true;
            }
            if (std::getline(streams[head.run], line))
                heap.push({std::move(line), head.run});
        }
    }

    static void remove_runs(const std::vector<std::filesystem::path>& runs) {
        std::error_code ec;
        for (const auto& path : runs) std::filesystem::remove(path, ec);
    }

    void cleanup() {
        remove_runs(runs_);
        runs_.clear();
    }

    std::size_t budget_;
    std::filesystem::path spill_dir_;
    std::vector<std::string> buffer_;
    std::vector<std::filesystem::path> runs_;
    std::size_t added_ = 0;
    std::size_t spilled_ = 0;
    std::size_t next_run_id_ = 0;
};

// Convenience wrapper matching the one-shot operation shape.
inline std::vector<CoCitedPair> dedup_pairs(std::span<const CoCitedPair> pairs,
                                            std::size_t budget_records,
                                            const std::filesystem::path& spill_dir) {
    PairDeduper dedup(budget_records, spill_dir);
    for (const CoCitedPair& p : pairs) dedup.add(p);
    std::vector<CoCitedPair> out;
    dedup.finish([&](const CoCitedPair& p) { out.push_back(p); });
    return out;
}

// In-neighbor index over the curated graph: for each publication, the sorted
// list of publications citing it. Built once, then shared read-only by the
// counting workers.
class CitingIndex {
public:
    explicit CitingIndex(const CitationGraph& graph) {
        std::vector<const std::string*> ids;
        ids.reserve(graph.catalog.size());
        for (const auto& [id, pub] : graph.catalog) ids.push_back(&id);
        std::sort(ids.begin(), ids.end(), [](auto* x, auto* y) { return *x < *y; });
        years_.resize(ids.size(), 0);
        in_lists_.resize(ids.size());
        idx_of_.reserve(ids.size());
        for (std::uint32_t i = 0; i < ids.size(); ++i) {
            idx_of_.emplace(*ids[i], i);
            const auto& pub = graph.catalog.at(*ids[i]);
            years_[i] = pub.year.value_or(0);
        }
        for (const auto& [citing, refs] : graph.out_edges) {
            std::uint32_t ci = idx_of_.at(citing);
            for (const std::string& cited : refs) in_lists_[idx_of_.at(cited)].push_back(ci);
        }
        for (auto& list : in_lists_) std::sort(list.begin(), list.end());
    }

    long long citation_count(const std::string& id) const {
        return static_cast<long long>(in_list(id).size());
    }

    // Distinct citing publications citing both members, over the whole graph.
    long long count_total(const CoCitedPair& pair) const {
        const auto& la = in_list(pair.a);
        const auto& lb = in_list(pair.b);
        const auto& small = la.size() <= lb.size() ? la : lb;
        const auto& large = la.size() <= lb.size() ? lb : la;
        long long n = 0;
        for (std::uint32_t v : small)
            if (std::binary_search(large.begin(), large.end(), v)) ++n;
        return n;
    }

    // Zero-filled co-citation counts from the first possible year through
    // end_year. Citing years beyond end_year are excluded.
    YearSeries count_yearly(const CoCitedPair& pair, int end_year) const {
        if (end_year < pair.first_possible_year)
            throw config_error("end_year " + std::to_string(end_year) +
                               " precedes first possible co-citation year " +
                               std::to_string(pair.first_possible_year) + " of pair (" + pair.a +
                               ", " + pair.b + ")");
        YearSeries series;
        series.start_year = pair.first_possible_year;
        series.counts.assign(static_cast<std::size_t>(end_year - pair.first_possible_year) + 1, 0);
        const auto& la = in_list(pair.a);
        const auto& lb = in_list(pair.b);
        const auto& small = la.size() <= lb.size() ? la : lb;
        const auto& large = la.size() <= lb.size() ? lb : la;
        for (std::uint32_t v : small) {
            if (!std::binary_search(large.begin(), large.end(), v)) continue;
            int y = years_[v];
            if (y > end_year) continue;
            series.counts.at(static_cast<std::size_t>(y - series.start_year))++;
        }
        return series;
    }

    // Citations to a single publication per year, from its publication year.
    YearSeries citation_series(const std::string& id, int pub_year, int end_year) const {
        if (end_year < pub_year)
            throw config_error("end_year precedes publication year of '" + id + "'");
        YearSeries series;
        series.start_year = pub_year;
        series.counts.assign(static_cast<std::size_t>(end_year - pub_year) + 1, 0);
        for (std::uint32_t v : in_list(id)) {
            int y = years_[v];
            if (y > end_year) continue;
            series.counts.at(static_cast<std::size_t>(y - series.start_year))++;
        }
        return series;
    }

private:
    const std::vector<std::uint32_t>& in_list(const std::string& id) const {
        auto it = idx_of_.find(id);
        if (it == idx_of_.end())
            throw integrity_error("publication '" + id + "' is not in the graph");
        return in_lists_[it->second];
    }

    std::unordered_map<std::string, std::uint32_t> idx_of_;
    std::vector<int> years_;
    std::vector<std::vector<std::uint32_t>> in_lists_;
};

struct PairCounts {
    CoCitedPair pair;
    long long total = 0;
    std::optional<YearSeries> series; // present when total >= series_min_total
};

// Pulls the next batch of pairs; an empty vector signals the end of the
// stream. Called under the scheduler lock, so it need not be thread safe.
using BatchSource = std::function<std::vector<CoCitedPair>()>;

// Deterministic partition-parallel counting. Workers claim batches in input
// order and results are emitted strictly in that order, so the output is
// byte-identical for any partition count. series_min_total limits yearly
// series computation to pairs at or above the threshold (0 = always).
inline void count_parallel(const CitingIndex& index, const BatchSource& next_batch, int end_year,
                           int partitions, long long series_min_total,
                           const std::function<void(const PairCounts&)>& sink) {
    if (partitions < 1) throw config_error("partitions must be >= 1");

    struct State {
        std::mutex m;
        std::condition_variable cv_emit;
        std::condition_variable cv_space;
        std::map<std::size_t, std::vector<PairCounts>> results;
        std::size_t next_pull = 0;
        std::size_t next_emit = 0;
        bool exhausted = false;
        int running = 0;
        std::size_t failed_batch = 0;
        std::string failure;
        bool failed = false;
    } st;
    const std::size_t backlog_cap = static_cast<std::size_t>(partitions) * 4 + 4;

    auto fail = [&st](std::size_t batch_idx, const char* what) {
        std::lock_guard lock(st.m);
        if (!st.failed) {
            st.failed = true;
            st.failed_batch = batch_idx;
            st.failure = what;
        }
        st.cv_emit.notify_all();
        st.cv_space.notify_all();
    };

    auto worker = [&]() {
        while (true) {
            std::vector<CoCitedPair> batch;
            std::size_t batch_idx;
            {
                std::unique_lock lock(st.m);
                st.cv_space.wait(lock, [&] {
                    return st.failed || st.exhausted ||
                           st.next_pull - st.next_emit < backlog_cap;
                });
                if (st.failed || st.exhausted) return;
                batch_idx = st.next_pull;
                try {
                    batch = next_batch();
                } catch (const std::exception& e) {
                    lock.unlock();
                    fail(batch_idx, e.what());
                    return;
                }
                if (batch.empty()) {
                    st.exhausted = true;
                    st.cv_emit.notify_all();
                    st.cv_space.notify_all();
                    return;
                }
                ++st.next_pull;
            }
            std::vector<PairCounts> counts;
            counts.reserve(batch.size());
            try {
                for (CoCitedPair& p : batch) {
                    PairCounts pc;
                    pc.total = index.count_total(p);
                    if (pc.total >= series_min_total)
                        pc.series = index.count_yearly(p, end_year);
                    pc.pair = std::move(p);
                    counts.push_back(std::move(pc));
                }
            } catch (const std::exception& e) {
                fail(batch_idx, e.what());
                return;
            }
            {
                std::lock_guard lock(st.m);
                st.results.emplace(batch_idx, std::move(counts));
                st.cv_emit.notify_all();
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(partitions));
    {
        std::lock_guard lock(st.m);
        st.running = partitions;
    }
    for (int i = 0; i < partitions; ++i) threads.emplace_back([&] {
        worker();
        std::lock_guard lock(st.m);
        --st.running;
        st.cv_emit.notify_all();
    });

    // Emit batches in claim order as they complete.
    {
        std::unique_lock lock(st.m);
        while (true) {
            st.cv_emit.wait(lock, [&] {
                return st.failed || st.results.count(st.next_emit) > 0 ||
                       (st.exhausted && st.running == 0) || st.running == 0;
            });
            if (st.failed) break;
            auto it = st.results.find(st.next_emit);
            if (it != st.results.end()) {
                std::vector<PairCounts> counts = std::move(it->second);
                st.results.erase(it);
                ++st.next_emit;
                st.cv_space.notify_all();
                lock.unlock();
                for (const PairCounts& pc : counts) sink(pc);
                lock.lock();
                continue;
            }
            if (st.running == 0 && st.results.empty()) break;
        }
    }
    for (auto& t : threads) t.join();
    if (st.failed)
        throw resource_error("counting worker failed on batch " +
                             std::to_string(st.failed_batch) + ": " + st.failure);
}

// Serial reference path: totals plus yearly series, pair by pair.
inline void count_serial(const CitingIndex& index, std::span<const CoCitedPair> pairs,
                         int end_year, long long series_min_total,
                         const std::function<void(const PairCounts&)>& sink) {
    for (const CoCitedPair& p : pairs) {
        PairCounts pc;
        pc.pair = p;
        pc.total = index.count_total(p);
        if (pc.total >= series_min_total) pc.series = index.count_yearly(p, end_year);
        sink(pc);
    }
}

// Adapts a pair vector to a BatchSource of fixed-size chunks.
inline BatchSource chunked_source(std::span<const CoCitedPair> pairs, std::size_t batch) {
    if (batch == 0) throw config_error("batch size must be >= 1");
    auto pos = std::make_shared<std::size_t>(0);
    return [pairs, batch, pos]() {
        std::size_t start = *pos;
        std::size_t n = std::min(batch, pairs.size() - start);
        *pos += n;
        return std::vector<CoCitedPair>(pairs.begin() + start, pairs.begin() + start + n);
    };
}

} // namespace cocite
