#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "boga/rng.hpp"
#include "boga/seqcore.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace boga;

TEST_CASE("parse_sequence validates and normalizes") {
    const Sequence s = parse_sequence("EMAL");
    CHECK(s.str() == "EMAL");
    CHECK(s.length() == 4);

    CHECK(parse_sequence("emal").str() == "EMAL");

    CHECK_THROWS_AS(parse_sequence(""), EmptySequenceError);
    try {
        parse_sequence("EM1L");
        FAIL("expected InvalidResidueError");
    } catch (const InvalidResidueError& e) {
        CHECK(e.position() == 2);
        CHECK(e.residue() == '1');
    }
}

TEST_CASE("alphabet is the fixed 20-letter set") {
    CHECK(Alphabet::size() == 20);
    CHECK(Alphabet::residues() == "ACDEFGHIKLMNPQRSTVWY");
    CHECK(Alphabet::index_of('A') == 0);
    CHECK(Alphabet::index_of('Y') == 19);
    CHECK(Alphabet::index_of('B') == -1);
}

TEST_CASE("mutate with zero rates is the identity") {
    MutationParams params;
    params.substitution_rate = 0.0;
    params.insertion_rate = 0.0;
    params.deletion_rate = 0.0;
    auto rng = make_stream(1, 1, StreamPurpose::pool);
    CHECK(mutate(parse_sequence("AAAA"), params, rng).str() == "AAAA");
}

TEST_CASE("mutate skips indels at the length bounds") {
    MutationParams params;
    params.substitution_rate = 0.0;
    params.insertion_rate = 1.0;
    params.deletion_rate = 0.0;
    params.min_length = 1;
    params.max_length = 4;
    auto rng = make_stream(2, 1, StreamPurpose::pool);
    CHECK(mutate(parse_sequence("AAAA"), params, rng).length() == 4);

    params.insertion_rate = 0.0;
    params.deletion_rate = 1.0;
    params.min_length = 4;
    CHECK(mutate(parse_sequence("AAAA"), params, rng).length() == 4);
}

TEST_CASE("substitution frequency matches the binomial model") {
    MutationParams params;
    params.substitution_rate = 0.05;
    params.insertion_rate = 0.0;
    params.deletion_rate = 0.0;
    const Sequence parent = parse_sequence("AAAA");
    auto rng = make_stream(3, 1, StreamPurpose::pool);

    const int trials = 100000;
    int changed = 0;
    for (int i = 0; i < trials; ++i)
        if (mutate(parent, params, rng).str() != "AAAA") ++changed;

    const double p = 1.0 - std::pow(0.95, 4); // P(any of 4 residues substituted)
    const double sigma = std::sqrt(p * (1.0 - p) / trials);
    CHECK(std::abs(static_cast<double>(changed) / trials - p) < 3.0 * sigma);
}

TEST_CASE("mutate respects bounds and alphabet under random params") {
    auto rng = make_stream(4, 1, StreamPurpose::pool);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> len_dist(1, 30);
    std::uniform_int_distribution<int> res(0, 19);

    for (int trial = 0; trial < 20000; ++trial) {
        MutationParams params;
        params.substitution_rate = unit(rng);
        params.insertion_rate = unit(rng);
        params.deletion_rate = unit(rng);
        params.min_length = len_dist(rng);
        params.max_length = params.min_length + len_dist(rng);
        std::uniform_int_distribution<std::size_t> plen(params.min_length, params.max_length);
        std::string text;
        const std::size_t n = plen(rng);
        for (std::size_t i = 0; i < n; ++i) text += Alphabet::at(res(rng));

        const Sequence child = mutate(Sequence::unchecked(text), params, rng);
        REQUIRE(child.length() >= params.min_length);
        REQUIRE(child.length() <= params.max_length);
        for (std::size_t i = 0; i < child.length(); ++i)
            REQUIRE(Alphabet::contains(child[i]));
    }
}

TEST_CASE("propose_pool degenerates to duplicates at zero rates") {
    MutationParams params;
    params.substitution_rate = 0.0;
    params.insertion_rate = 0.0;
    params.deletion_rate = 0.0;
    auto rng = make_stream(5, 1, StreamPurpose::pool);
    const auto pool =
        propose_pool({parse_sequence("AAAA")}, params, 3, {}, rng);
    REQUIRE(pool.size() == 3);
    for (const auto& s : pool) CHECK(s.str() == "AAAA");
}

TEST_CASE("propose_pool fills 500 candidates within bounds") {
    MutationParams params;
    params.substitution_rate = 0.05;
    params.insertion_rate = 0.05;
    params.deletion_rate = 0.05;
    params.min_length = 8;
    params.max_length = 25;
    std::vector<Sequence> elites;
    auto rng = make_stream(6, 1, StreamPurpose::pool);
    std::uniform_int_distribution<int> res(0, 19);
    for (int i = 0; i < 10; ++i) {
        std::string text;
        for (int j = 0; j < 12; ++j) text += Alphabet::at(res(rng));
        elites.push_back(Sequence::unchecked(text));
    }
    const auto pool = propose_pool(elites, params, 500, {}, rng);
    REQUIRE(pool.size() == 500);
    for (const auto& s : pool) {
        CHECK(s.length() >= 8);
        CHECK(s.length() <= 25);
    }
}

TEST_CASE("propose_pool falls back to duplicates when the neighborhood is exhausted") {
    // A length-1 elite under forced substitution has exactly 19 reachable
    // children; with all of them in `seen`, only the retry cap terminates.
    MutationParams params;
    params.substitution_rate = 1.0;
    params.insertion_rate = 0.0;
    params.deletion_rate = 0.0;

    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < Alphabet::size(); ++i) {
        if (Alphabet::at(i) == 'A') continue;
        seen.insert(std::string(1, Alphabet::at(i)));
    }
    CHECK(seen.size() == 19);

    auto rng = make_stream(7, 1, StreamPurpose::pool);
    const auto pool = propose_pool({parse_sequence("A")}, params, 5, seen, rng);
    REQUIRE(pool.size() == 5);
    for (const auto& s : pool) CHECK(seen.count(s.str()) == 1);
}

TEST_CASE("dataset rejects duplicates and non-finite scores") {
    EvaluationDataset ds;
    CHECK(ds.insert(parse_sequence("AAAA"), 1.0, 0));
    CHECK_FALSE(ds.insert(parse_sequence("AAAA"), 2.0, 1));
    CHECK(ds.size() == 1);
    CHECK(ds.score_of("AAAA") == 1.0);
    CHECK_THROWS_AS(ds.insert(parse_sequence("CCCC"), std::nan(""), 0), Error);
    CHECK(ds.size() == 1);
}

namespace {

EvaluationDataset three_entry_dataset() {
    EvaluationDataset ds;
    ds.insert(parse_sequence("AAAA"), 1.0, 0);
    ds.insert(parse_sequence("CCCC"), 2.0, 0);
    ds.insert(parse_sequence("DDDD"), 3.0, 0);
    return ds;
}

} // namespace

TEST_CASE("top_k ranks by score with lexicographic tie-break") {
    auto ds = three_entry_dataset();
    auto rng = make_stream(8, 1, StreamPurpose::elites);
    SelectionStrategy top_k;

    auto elites = select_elites(ds, top_k, 2, Direction::maximize, rng);
    REQUIRE(elites.size() == 2);
    CHECK(elites[0].str() == "DDDD");
    CHECK(elites[1].str() == "CCCC");

    elites = select_elites(ds, top_k, 2, Direction::minimize, rng);
    CHECK(elites[0].str() == "AAAA");
    CHECK(elites[1].str() == "CCCC");

    EvaluationDataset tie;
    tie.insert(parse_sequence("CCCC"), 1.0, 0);
    tie.insert(parse_sequence("AAAA"), 1.0, 0);
    elites = select_elites(tie, top_k, 1, Direction::maximize, rng);
    CHECK(elites[0].str() == "AAAA");

    // rng is unused for top_k: two calls agree.
    auto again = select_elites(ds, top_k, 2, Direction::maximize, rng);
    CHECK(again[0].str() == "DDDD");

    // Short dataset returns everything.
    CHECK(select_elites(ds, top_k, 10, Direction::maximize, rng).size() == 3);
}

TEST_CASE("top_fraction_uniform samples the qualifying pool uniformly") {
    EvaluationDataset ds;
    std::vector<std::string> names;
    auto rng = make_stream(9, 1, StreamPurpose::elites);
    std::uniform_int_distribution<int> res(0, 19);
    for (int i = 0; i < 200; ++i) {
        std::string text;
        for (int j = 0; j < 6; ++j) text += Alphabet::at(res(rng));
        while (ds.contains(text)) text += Alphabet::at(res(rng));
        ds.insert(Sequence::unchecked(text), static_cast<double>(i), 0);
        names.push_back(text);
    }

    SelectionStrategy strategy;
    strategy.kind = SelectionStrategy::Kind::top_fraction_uniform;
    strategy.fraction = 0.25; // ceil(0.25 * 200) = 50 entries qualify

    const std::set<std::string> top50(names.end() - 50, names.end());
    const int draws = 100000;
    const auto picks = select_elites(ds, strategy, draws, Direction::maximize, rng);
    REQUIRE(picks.size() == draws);

    std::map<std::string, int> freq;
    for (const auto& s : picks) {
        REQUIRE(top50.count(s.str()) == 1);
        ++freq[s.str()];
    }
    const double p = 1.0 / 50.0;
    const double sigma = std::sqrt(p * (1.0 - p) / draws);
    for (const auto& name : top50) {
        const double observed = freq[name] / static_cast<double>(draws);
        CHECK(std::abs(observed - p) < 3.0 * sigma);
    }
}

TEST_CASE("exponential_rank favors better ranks") {
    auto ds = three_entry_dataset();
    SelectionStrategy strategy;
    strategy.kind = SelectionStrategy::Kind::exponential_rank;
    strategy.temperature = 1.0;
    auto rng = make_stream(10, 1, StreamPurpose::elites);
    std::map<std::string, int> freq;
    const int draws = 30000;
    for (const auto& s : select_elites(ds, strategy, draws, Direction::maximize, rng))
        ++freq[s.str()];
    CHECK(freq["DDDD"] > freq["CCCC"]);
    CHECK(freq["CCCC"] > freq["AAAA"]);
}

TEST_CASE("threshold keeps only entries strictly beating the bar") {
    auto ds = three_entry_dataset();
    SelectionStrategy strategy;
    strategy.kind = SelectionStrategy::Kind::threshold;
    strategy.threshold = 1.5;
    auto rng = make_stream(11, 1, StreamPurpose::elites);

    auto elites = select_elites(ds, strategy, 10, Direction::maximize, rng);
    REQUIRE(elites.size() == 2);
    CHECK(elites[0].str() == "DDDD");

    strategy.threshold = 3.0; // nothing strictly above
    CHECK(select_elites(ds, strategy, 10, Direction::maximize, rng).empty());

    strategy.threshold = 0.0;
    CHECK(select_elites(ds, strategy, 1, Direction::maximize, rng).size() == 1);
}

TEST_CASE("invalid strategy parameters are rejected") {
    auto ds = three_entry_dataset();
    auto rng = make_stream(12, 1, StreamPurpose::elites);
    SelectionStrategy strategy;
    strategy.kind = SelectionStrategy::Kind::top_fraction_uniform;
    strategy.fraction = 0.0;
    CHECK_THROWS_AS(select_elites(ds, strategy, 1, Direction::maximize, rng),
                    InvalidStrategyParamsError);
    strategy.kind = SelectionStrategy::Kind::exponential_rank;
    strategy.temperature = -1.0;
    CHECK_THROWS_AS(select_elites(ds, strategy, 1, Direction::maximize, rng),
                    InvalidStrategyParamsError);
}

TEST_CASE("derived rng streams are reproducible and purpose-separated") {
    auto a = make_stream(42, 7, StreamPurpose::pool);
    auto b = make_stream(42, 7, StreamPurpose::pool);
    CHECK(a() == b());
    auto c = make_stream(42, 7, StreamPurpose::elites);
    auto d = make_stream(42, 8, StreamPurpose::pool);
    std::set<std::uint64_t> firsts{make_stream(42, 7, StreamPurpose::pool)(), c(), d()};
    CHECK(firsts.size() == 3);
}
