#include "cocite/pairgen.hpp"

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>

#include "gtest/gtest.h"
#include "oracles.hpp"

using namespace cocite;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("cocite_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct GraphFixture {
    CitationGraph graph;
    CurationReport report;
};

GraphFixture build_graph(const std::string& nodes, const std::string& edges) {
    std::istringstream nodes_in(nodes);
    Catalog catalog = parse_nodelist(nodes_in);
    std::istringstream edges_in(edges);
    auto [graph, report] = curate(parse_edgelist(edges_in), catalog);
    return {std::move(graph), report};
}

std::string counts_csv(const std::vector<PairCounts>& counts) {
    std::ostringstream out;
    for (const PairCounts& pc : counts) {
        out << pc.pair.a << ',' << pc.pair.b << ',' << pc.total;
        if (pc.series) {
            out << ',' << pc.series->start_year;
            for (int c : pc.series->counts) out << ' ' << c;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace

TEST(MakeCocited, CanonicalizesMemberOrder) {
    CoCitedPair p1 = make_cocited("X9", 1990, "A1", 1985);
    CoCitedPair p2 = make_cocited("A1", 1985, "X9", 1990);
    EXPECT_EQ(p1, p2);
    EXPECT_EQ(p1.a, "A1");
    EXPECT_EQ(p1.b, "X9");
    EXPECT_EQ(p1.first_possible_year, 1990);
    EXPECT_THROW(make_cocited("A", 1990, "A", 1990), integrity_error);
}

TEST(MakeCocited, RandomPairsCanonicalizeIdentically) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        std::string x = "P" + std::to_string(rng() % 10000);
        std::string y = "Q" + std::to_string(rng() % 10000);
        int yx = 1970 + static_cast<int>(rng() % 40);
        int yy = 1970 + static_cast<int>(rng() % 40);
        EXPECT_EQ(make_cocited(x, yx, y, yy), make_cocited(y, yy, x, yx));
    }
}

TEST(EnumeratePairs, FiveRefsGiveTenPairs) {
    std::string nodes = "id,year,type,subjects\nS,1990,article,\n";
    std::string edges = "citing_id,cited_id\n";
    for (int i = 0; i < 5; ++i) {
        nodes += "R" + std::to_string(i) + ",198" + std::to_string(i) + ",article,\n";
        edges += "S,R" + std::to_string(i) + "\n";
    }
    GraphFixture fx = build_graph(nodes, edges);
    std::vector<CoCitedPair> pairs;
    enumerate_pairs(fx.graph, "S", [&](const CoCitedPair& p) { pairs.push_back(p); });
    EXPECT_EQ(pairs.size(), 10u);
    auto sorted = pairs;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_TRUE(std::unique(sorted.begin(), sorted.end()) == sorted.end());
}

TEST(EnumeratePairs, CanonicalOrderAndFirstPossibleYear) {
    GraphFixture fx = build_graph(
        "id,year,type,subjects\n"
        "S,1995,article,\nP1,1981,article,\nP2,1982,article,\nP3,1983,article,\n",
        "citing_id,cited_id\nS,P3\nS,P1\nS,P2\n");
    std::vector<CoCitedPair> pairs;
    enumerate_pairs(fx.graph, "S", [&](const CoCitedPair& p) { pairs.push_back(p); });
    ASSERT_EQ(pairs.size(), 3u);
    EXPECT_EQ(pairs[0], (CoCitedPair{"P1", "P2", 1982}));
    EXPECT_EQ(pairs[1], (CoCitedPair{"P1", "P3", 1983}));
    EXPECT_EQ(pairs[2], (CoCitedPair{"P2", "P3", 1983}));
}

TEST(EnumeratePairs, RequiresTwoReferences) {
    GraphFixture fx = build_graph(
        "id,year,type,subjects\nS,1990,article,\nR,1980,article,\n",
        "citing_id,cited_id\nS,R\n");
    EXPECT_THROW(enumerate_pairs(fx.graph, "S", [](const CoCitedPair&) {}), integrity_error);
    EXPECT_THROW(enumerate_pairs(fx.graph, "ABSENT", [](const CoCitedPair&) {}), integrity_error);
}

TEST(EnumeratePairs, CardinalityMatchesClosedForm) {
    // One article per n, citing the first n of a shared reference list.
    std::string nodes = "id,year,type,subjects\n";
    std::string edges = "citing_id,cited_id\n";
    const int max_n = 100;
    for (int i = 0; i < max_n; ++i) {
        char ref[16];
        std::snprintf(ref, sizeof ref, "R%04d", i);
        nodes += std::string(ref) + ",1980,article,\n";
    }
    for (int n = 2; n <= max_n; ++n) {
        char art[16];
        std::snprintf(art, sizeof art, "A%04d", n);
        nodes += std::string(art) + ",1990,article,\n";
        for (int i = 0; i < n; ++i) {
            char ref[16];
            std::snprintf(ref, sizeof ref, "R%04d", i);
            edges += std::string(art) + "," + ref + "\n";
        }
    }
    GraphFixture fx = build_graph(nodes, edges);
    for (int n = 2; n <= max_n; ++n) {
        char art[16];
        std::snprintf(art, sizeof art, "A%04d", n);
        std::size_t count = 0;
        enumerate_pairs(fx.graph, art, [&](const CoCitedPair&) { ++count; });
        EXPECT_EQ(count, static_cast<std::size_t>(n) * (n - 1) / 2);
    }
}

TEST(DedupPairs, CollapsesAcrossArticles) {
    CoCitedPair p{"A", "B", 1990};
    std::vector<CoCitedPair> stream{p, p, p};
    auto out = dedup_pairs(stream, 100, temp_dir("dedup1"));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0], p);
}

TEST(DedupPairs, EmptyStream) {
    EXPECT_TRUE(dedup_pairs({}, 10, temp_dir("dedup2")).empty());
}

TEST(DedupPairs, IdempotentUnderDuplication) {
    std::mt19937_64 rng(3);
    std::vector<CoCitedPair> stream;
    for (int i = 0; i < 5000; ++i)
        stream.push_back(make_cocited("P" + std::to_string(rng() % 300), 1980,
                                      "Q" + std::to_string(rng() % 300), 1985));
    std::vector<CoCitedPair> doubled = stream;
    doubled.insert(doubled.end(), stream.begin(), stream.end());
    auto dir = temp_dir("dedup3");
    EXPECT_EQ(dedup_pairs(stream, 700, dir), dedup_pairs(doubled, 700, dir));
}

TEST(DedupPairs, SpilledRunsMatchInMemoryOracle) {
    std::mt19937_64 rng(9);
    std::vector<CoCitedPair> stream;
    for (int i = 0; i < 50000; ++i) {
        // Roughly 40% duplicates via a bounded key space.
        stream.push_back(make_cocited("L" + std::to_string(rng() % 170), 1975,
                                      "R" + std::to_string(rng() % 170), 1985));
    }
    auto expected = oracle::sort_unique_dedup(stream);

    PairDeduper dedup(8000, temp_dir("dedup4"));
    for (const auto& p : stream) dedup.add(p);
    std::vector<CoCitedPair> actual;
    dedup.finish([&](const CoCitedPair& p) { actual.push_back(p); });
    EXPECT_GE(dedup.run_count(), 4u);
    EXPECT_EQ(actual, expected);
}

TEST(DedupPairs, ResultIndependentOfBudgetAndOrder) {
    std::mt19937_64 rng(10);
    std::vector<CoCitedPair> stream;
    for (int i = 0; i < 20000; ++i)
        stream.push_back(make_cocited("L" + std::to_string(rng() % 120), 1975,
                                      "R" + std::to_string(rng() % 120), 1985));
    auto dir = temp_dir("dedup5");
    auto baseline = dedup_pairs(stream, 1 << 20, dir); // fully in memory
    for (std::size_t budget : {512u, 3000u, 19999u}) {
        EXPECT_EQ(dedup_pairs(stream, budget, dir), baseline);
    }
    std::shuffle(stream.begin(), stream.end(), rng);
    EXPECT_EQ(dedup_pairs(stream, 2048, dir), baseline);
}

TEST(DedupPairs, RejectsZeroBudget) {
    EXPECT_THROW(PairDeduper(0, temp_dir("dedup6")), config_error);
}

TEST(DedupPairs, UnwritableSpillDirIsResourceError) {
    PairDeduper dedup(1, "/proc/nonexistent/spill");
    EXPECT_THROW(dedup.add(make_cocited("A", 1980, "B", 1985)), resource_error);
}

TEST(DedupPairs, TinyBudgetTriggersMultiLevelMerge) {
    // Budget 2 on 1200 records produces more runs than the merge fan-in.
    std::mt19937_64 rng(44);
    std::vector<CoCitedPair> stream;
    for (int i = 0; i < 1200; ++i)
        stream.push_back(make_cocited("L" + std::to_string(rng() % 40), 1975,
                                      "R" + std::to_string(rng() % 40), 1985));
    auto expected = oracle::sort_unique_dedup(stream);

    auto dir = temp_dir("dedup7");
    PairDeduper dedup(2, dir);
    for (const auto& p : stream) dedup.add(p);
    std::vector<CoCitedPair> actual;
    dedup.finish([&](const CoCitedPair& p) { actual.push_back(p); });
    EXPECT_GT(dedup.run_count(), PairDeduper::kMergeFanIn);
    EXPECT_EQ(actual, expected);
    // Spill files are cleaned up afterwards.
    std::size_t leftovers = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) ++leftovers;
    EXPECT_EQ(leftovers, 0u);
}

namespace {

// A small citation graph with a known co-citation pattern, reused by the
// counting tests.
GraphFixture counting_fixture() {
    std::string nodes =
        "id,year,type,subjects\n"
        "A,1980,article,\nB,1982,article,\nX,1985,article,\n";
    std::string edges = "citing_id,cited_id\n";
    // Three 1990 citers and one 1995 citer co-cite (A, B); one cites only A.
    for (int i = 0; i < 3; ++i) {
        nodes += "C" + std::to_string(i) + ",1990,article,\n";
        edges += "C" + std::to_string(i) + ",A\nC" + std::to_string(i) + ",B\n";
    }
    nodes += "C3,1995,article,\nC4,1991,article,\n";
    edges += "C3,A\nC3,B\nC4,A\n";
    return build_graph(nodes, edges);
}

} // namespace

TEST(Counting, EmptyIntersectionIsZero) {
    GraphFixture fx = counting_fixture();
    CitingIndex index(fx.graph);
    EXPECT_EQ(index.count_total(make_cocited("A", 1980, "X", 1985)), 0);
}

TEST(Counting, TotalsAndSeriesOnFixture) {
    GraphFixture fx = counting_fixture();
    CitingIndex index(fx.graph);
    CoCitedPair ab = make_cocited("A", 1980, "B", 1982);
    EXPECT_EQ(index.count_total(ab), 4);
    YearSeries series = index.count_yearly(ab, 2000);
    EXPECT_EQ(series.start_year, 1982);
    EXPECT_EQ(series.counts.size(), 19u);
    EXPECT_EQ(series.counts[1990 - 1982], 3);
    EXPECT_EQ(series.counts[1995 - 1982], 1);
    EXPECT_EQ(series.total(), 4);
    // Horizon before the late citer: the sum identity shifts accordingly.
    EXPECT_EQ(index.count_yearly(ab, 1992).total(), 3);
    EXPECT_THROW(index.count_yearly(ab, 1981), config_error);
    EXPECT_THROW(index.count_total(make_cocited("A", 1980, "GHOST", 1990)), integrity_error);
}

TEST(Counting, SinglePairSingleEventZeroFill) {
    GraphFixture fx = build_graph(
        "id,year,type,subjects\nA,1980,article,\nB,1985,article,\nC,1985,article,\n",
        "citing_id,cited_id\nC,A\nC,B\n");
    CitingIndex index(fx.graph);
    YearSeries series = index.count_yearly(make_cocited("A", 1980, "B", 1985), 1995);
    EXPECT_EQ(series.start_year, 1985);
    EXPECT_EQ(series.counts, (std::vector<int>{1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}));
}

TEST(Counting, MatchesBruteForceOracleOnRandomGraphs) {
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        oracle::RandomGraph g =
            oracle::random_graph(seed, {.nodes = 300, .edges = 4000, .year_lo = 1975});
        auto [graph, report] = curate(g.edges, g.catalog);
        oracle::BruteCounts expected = oracle::brute_force_counts(graph);
        CitingIndex index(graph);

        auto selected = select_source_articles(graph, {1975, 2015}, 5, "article");
        ASSERT_FALSE(selected.empty());
        PairDeduper dedup(1 << 20, temp_dir("count_oracle"));
        for (const auto& id : selected)
            enumerate_pairs(graph, id, [&](const CoCitedPair& p) { dedup.add(p); });
        std::size_t checked = 0;
        dedup.finish([&](const CoCitedPair& pair) {
            std::string key = pair.a + "," + pair.b;
            long long expect_total = 0;
            if (auto it = expected.totals.find(key); it != expected.totals.end())
                expect_total = it->second;
            ASSERT_EQ(index.count_total(pair), expect_total) << key;
            YearSeries series = index.count_yearly(pair, 2018);
            long long sum = 0;
            if (auto it = expected.by_year.find(key); it != expected.by_year.end())
                for (auto [year, count] : it->second) {
                    ASSERT_EQ(series.counts.at(static_cast<std::size_t>(year - series.start_year)),
                              count)
                        << key << " year " << year;
                    sum += count;
                }
            ASSERT_EQ(series.total(), sum);
            // Co-citations cannot outnumber either member's citations.
            ASSERT_LE(expect_total, std::min(index.citation_count(pair.a),
                                             index.citation_count(pair.b)));
            ++checked;
        });
        ASSERT_GT(checked, 100u);
    }
}

TEST(Counting, ParallelMatchesSerialByteForByte) {
    oracle::RandomGraph g = oracle::random_graph(31, {.nodes = 250, .edges = 3500});
    auto [graph, report] = curate(g.edges, g.catalog);
    CitingIndex index(graph);
    auto selected = select_source_articles(graph, {1970, 2015}, 5, "article");
    PairDeduper dedup(1 << 20, temp_dir("count_par"));
    for (const auto& id : selected)
        enumerate_pairs(graph, id, [&](const CoCitedPair& p) { dedup.add(p); });
    std::vector<CoCitedPair> pairs;
    dedup.finish([&](const CoCitedPair& p) { pairs.push_back(p); });
    ASSERT_GT(pairs.size(), 500u);

    std::vector<PairCounts> serial;
    count_serial(index, pairs, 2018, 0, [&](const PairCounts& pc) { serial.push_back(pc); });
    std::string baseline = counts_csv(serial);

    for (int partitions : {1, 2, 4, 8}) {
        std::vector<PairCounts> parallel;
        count_parallel(index, chunked_source(pairs, 64), 2018, partitions, 0,
                       [&](const PairCounts& pc) { parallel.push_back(pc); });
        EXPECT_EQ(counts_csv(parallel), baseline) << partitions << " partitions";
    }
    // Batch size must not matter either.
    for (std::size_t batch : {1u, 7u, 1024u}) {
        std::vector<PairCounts> parallel;
        count_parallel(index, chunked_source(pairs, batch), 2018, 3, 0,
                       [&](const PairCounts& pc) { parallel.push_back(pc); });
        EXPECT_EQ(counts_csv(parallel), baseline) << "batch " << batch;
    }
}

TEST(Counting, PerPairResultsInvariantUnderInputShuffle) {
    oracle::RandomGraph g = oracle::random_graph(32, {.nodes = 200, .edges = 2500});
    auto [graph, report] = curate(g.edges, g.catalog);
    CitingIndex index(graph);
    auto selected = select_source_articles(graph, {1970, 2015}, 5, "article");
    PairDeduper dedup(1 << 20, temp_dir("count_shuffle"));
    for (const auto& id : selected)
        enumerate_pairs(graph, id, [&](const CoCitedPair& p) { dedup.add(p); });
    std::vector<CoCitedPair> pairs;
    dedup.finish([&](const CoCitedPair& p) { pairs.push_back(p); });

    std::unordered_map<std::string, std::string> by_key;
    count_parallel(index, chunked_source(pairs, 32), 2018, 2, 0, [&](const PairCounts& pc) {
        by_key[pc.pair.a + "," + pc.pair.b] = counts_csv({pc});
    });
    std::mt19937_64 rng(1);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    count_parallel(index, chunked_source(pairs, 55), 2018, 2, 0, [&](const PairCounts& pc) {
        EXPECT_EQ(by_key.at(pc.pair.a + "," + pc.pair.b), counts_csv({pc}));
    });
}

TEST(Counting, WorkerFailureIdentifiesBatch) {
    GraphFixture fx = counting_fixture();
    CitingIndex index(fx.graph);
    std::vector<CoCitedPair> pairs;
    for (int i = 0; i < 10; ++i) pairs.push_back(make_cocited("A", 1980, "B", 1982));
    pairs.push_back(make_cocited("A", 1980, "GHOST", 1990));
    try {
        count_parallel(index, chunked_source(pairs, 2), 2018, 2, 0, [](const PairCounts&) {});
        FAIL() << "expected resource_error";
    } catch (const resource_error& e) {
        EXPECT_NE(std::string(e.what()).find("batch 5"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("GHOST"), std::string::npos);
    }
}

TEST(Counting, SourceFailureIdentifiesBatch) {
    GraphFixture fx = counting_fixture();
    CitingIndex index(fx.graph);
    auto calls = std::make_shared<int>(0);
    BatchSource flaky = [calls]() -> std::vector<CoCitedPair> {
        if (++*calls == 3) throw data_error("bad row in pair stream");
        return {make_cocited("A", 1980, "B", 1982)};
    };
    try {
        count_parallel(index, flaky, 2018, 2, 0, [](const PairCounts&) {});
        FAIL() << "expected resource_error";
    } catch (const resource_error& e) {
        EXPECT_NE(std::string(e.what()).find("bad row"), std::string::npos);
    }
}

TEST(Counting, SeriesThresholdLimitsMaterialization) {
    GraphFixture fx = counting_fixture();
    CitingIndex index(fx.graph);
    std::vector<CoCitedPair> pairs{make_cocited("A", 1980, "B", 1982),
                                   make_cocited("A", 1980, "X", 1985)};
    std::vector<PairCounts> out;
    count_parallel(index, chunked_source(pairs, 10), 2018, 1, 2,
                   [&](const PairCounts& pc) { out.push_back(pc); });
    ASSERT_EQ(out.size(), 2u);
    EXPECT_TRUE(out[0].series.has_value());  // total 4 >= 2
    EXPECT_FALSE(out[1].series.has_value()); // total 0 < 2
}
