#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "rosetta/dataset.hpp"
#include "rosetta/errors.hpp"
#include "rosetta/sampling.hpp"
#include "test_support.hpp"

namespace rosetta {
namespace {

Translator key1() { return Translator(load_key(testing::data_dir() / "keys" / "key1_focused.key")); }

Corpus parse(const std::string& text) {
    std::istringstream in(text);
    return parse_source(in, Origin::training);
}

TEST(Ingest, ParsesRecords) {
    const auto corpus = parse(R"({"id": "a", "statement": "x > 1", "label": true}
{"id": 7, "statement": "y < 2", "label": "False"}

)");
    ASSERT_EQ(corpus.size(), 2u);
    EXPECT_EQ(corpus[0].id, "a");
    EXPECT_TRUE(corpus[0].truth_label);
    EXPECT_EQ(corpus[1].id, "7");
    EXPECT_FALSE(corpus[1].truth_label);
}

TEST(Ingest, EmptyFile) { EXPECT_TRUE(parse("").empty()); }

TEST(Ingest, Errors) {
    EXPECT_THROW(parse(R"({"id": "a", "statement": "x"})"), MissingLabel);
    EXPECT_THROW(parse("{\"id\": \"a\", \"statement\": \"x\", \"label\": true}\n"
                       "{\"id\": \"a\", \"statement\": \"y\", \"label\": false}\n"),
                 DuplicateId);
    EXPECT_THROW(parse("not json"), SourceParseError);
    EXPECT_THROW(parse(R"({"id": "a", "label": true})"), SourceParseError);
    EXPECT_THROW(parse(R"({"id": "a", "statement": "", "label": true})"), SourceParseError);
    EXPECT_THROW(parse(R"({"id": "a", "statement": "x", "label": 3})"), SourceParseError);
    EXPECT_THROW(ingest_source("/nonexistent.jsonl", Origin::training), IoError);
    try {
        parse("{\"id\": \"a\", \"statement\": \"x\", \"label\": true}\n{\"id\": \"b\", \"statement\": \"x\"}\n");
        FAIL();
    } catch (const MissingLabel& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Ingest, FullSizeCorpus) {
    testing::TempDir dir("ingest");
    testing::write_corpus(testing::synthetic_corpus(25214, 1, Origin::training, "lw"), dir / "train.jsonl");
    EXPECT_EQ(ingest_source(dir / "train.jsonl", Origin::training).size(), 25214u);
}

TEST(BuildRecord, LeanForm) {
    const SourceProblem p{"p1", "x + 1 > x", true, Origin::training};
    const auto r = build_record(p, "sys");
    const ConversationRecord expected{{{"system", "sys"}, {"user", "x + 1 > x"}, {"assistant", "True"}}};
    EXPECT_EQ(r, expected);
    EXPECT_TRUE(validate_record(r).empty());
}

TEST(BuildRecord, TranslatedForm) {
    const auto t = key1();
    const SourceProblem p{"p1", ">", false, Origin::training};
    const auto r = build_record(p, t);
    EXPECT_NE(record_statement(r).find(">>"), std::string::npos);
    EXPECT_EQ(r.messages.back().content, "False");
    EXPECT_EQ(t.detranslate(record_statement(r)), p.statement);
}

TEST(BuildRecord, PropagatesTranslationErrors) {
    const SourceProblem p{"p1", "(x", false, Origin::training};
    EXPECT_THROW(build_record(p, key1()), UnbalancedParens);
}

std::vector<Violation> violations(std::vector<Message> messages) {
    return validate_record(ConversationRecord{std::move(messages)});
}

TEST(Validate, WellFormed) {
    EXPECT_TRUE(violations({{"system", "s"}, {"user", "u"}, {"assistant", "True"}}).empty());
    EXPECT_TRUE(violations({{"system", "s"}, {"function", "f"}, {"user", "u"}, {"assistant", "False"}}).empty());
}

// One record per invariant, each breaking exactly that invariant.
TEST(Validate, EnumeratesViolations) {
    using V = Violation;
    EXPECT_EQ(violations({}), std::vector<V>{V::empty});
    EXPECT_EQ(violations({{"user", "u"}, {"system", "s"}, {"assistant", "True"}}), std::vector<V>{V::first_not_system});
    EXPECT_EQ(violations({{"system", "s"}, {"narrator", "n"}, {"user", "u"}, {"assistant", "True"}}),
              std::vector<V>{V::invalid_role});
    EXPECT_EQ(violations({{"system", "s"}, {"assistant", "True"}}), std::vector<V>{V::missing_user});
    EXPECT_EQ(violations({{"system", "s"}, {"user", "u"}, {"user", "u"}, {"assistant", "True"}}),
              std::vector<V>{V::multiple_user});
    EXPECT_EQ(violations({{"system", "s"}, {"user", "u"}}), std::vector<V>{V::missing_assistant});
    EXPECT_EQ(violations({{"system", "s"}, {"user", "u"}, {"assistant", "True"}, {"assistant", "True"}}),
              std::vector<V>{V::multiple_assistant});
    EXPECT_EQ(violations({{"system", "s"}, {"user", "u"}, {"assistant", "yes"}}), std::vector<V>{V::bad_label});
}

TEST(Sampling, ShufflerIsPinned) {
    // Frozen first draws: mt19937_64 output is fixed by the standard and the
    // bounded sampler is ours, so these hold on every platform.
    SeededShuffler s(42);
    std::vector<std::uint64_t> draws;
    for (int i = 0; i < 5; ++i) draws.push_back(s.below(1000));
    std::mt19937_64 reference(42);
    std::vector<std::uint64_t> expected;
    for (int i = 0; i < 5; ++i) expected.push_back(reference() % 1000);
    EXPECT_EQ(draws, expected);  // rejection is vanishingly rare for bound 1000
}

TEST(Sampling, UniformEnough) {
    SeededShuffler s(9);
    std::vector<int> counts(10);
    for (int i = 0; i < 100000; ++i) ++counts[s.below(10)];
    for (const int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Sampling, IndicesArePermutationPrefix) {
    const auto idx = sample_indices(100, 30, 5);
    EXPECT_EQ(idx.size(), 30u);
    EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 30u);
    EXPECT_EQ(idx, sample_indices(100, 30, 5));
    EXPECT_NE(idx, sample_indices(100, 30, 6));
    EXPECT_THROW(sample_indices(10, 11, 0), SizeExceedsCorpus);
}

TEST(Emit, WritesExactSizeDeterministically) {
    testing::TempDir dir("emit");
    const auto corpus = testing::synthetic_corpus(300, 2, Origin::training, "p");
    const auto t = key1();
    const auto summary = emit_dataset(corpus, {"key1", 200, 77}, &t, dir / "a.jsonl");
    EXPECT_EQ(summary.written, 200u);
    emit_dataset(corpus, {"key1", 200, 77}, &t, dir / "b.jsonl");
    const auto a = testing::read_text(dir / "a.jsonl");
    EXPECT_EQ(a, testing::read_text(dir / "b.jsonl"));
    const auto lines = testing::read_lines(dir / "a.jsonl");
    EXPECT_EQ(lines.size(), 200u);

    // Every line validates and decodes back to a corpus statement.
    std::set<std::string> statements;
    for (const auto& p : corpus) statements.insert(p.statement);
    for (const auto& line : lines) {
        const auto record = record_from_json(nlohmann::json::parse(line));
        EXPECT_TRUE(validate_record(record).empty());
        EXPECT_TRUE(statements.contains(t.detranslate(record_statement(record))));
    }
}

TEST(Emit, FullCorpusIsShuffled) {
    testing::TempDir dir("emit_full");
    const auto corpus = testing::synthetic_corpus(50, 3, Origin::training, "p");
    emit_dataset(corpus, {"lean", 50, 1}, nullptr, dir / "all.jsonl");
    const auto lines = testing::read_lines(dir / "all.jsonl");
    ASSERT_EQ(lines.size(), 50u);
    std::vector<std::string> order;
    std::multiset<std::string> seen;
    for (const auto& line : lines) {
        const auto s = record_statement(record_from_json(nlohmann::json::parse(line)));
        order.push_back(s);
        seen.insert(s);
    }
    std::multiset<std::string> all;
    std::vector<std::string> original;
    for (const auto& p : corpus) {
        all.insert(p.statement);
        original.push_back(p.statement);
    }
    EXPECT_EQ(seen, all);
    EXPECT_NE(order, original);
}

TEST(Emit, SizeExceedsCorpus) {
    testing::TempDir dir("emit_big");
    const auto corpus = testing::synthetic_corpus(10, 3, Origin::training, "p");
    EXPECT_THROW(emit_dataset(corpus, {"lean", 11, 1}, nullptr, dir / "x.jsonl"), SizeExceedsCorpus);
}

TEST(Emit, SkipsUntranslatableProblems) {
    testing::TempDir dir("emit_skip");
    auto corpus = testing::synthetic_corpus(20, 3, Origin::training, "p");
    corpus[0].statement = "(unbalanced";
    const auto t = key1();
    const auto summary = emit_dataset(corpus, {"key1", 19, 4}, &t, dir / "x.jsonl");
    EXPECT_EQ(summary.written, 19u);
    EXPECT_EQ(summary.skipped, 1u);
    EXPECT_THROW(emit_dataset(corpus, {"key1", 20, 4}, &t, dir / "y.jsonl"), SizeExceedsCorpus);
}

TEST(TestSets, ReplicasAndForms) {
    const auto corpus = testing::synthetic_corpus(1200, 4, Origin::training, "lw");
    SamplingOptions options;
    options.n = 500;
    options.replicas = 3;
    options.seed = 10;
    const auto sets = sample_test_sets(corpus, Provenance::seen, key1(), options);
    ASSERT_EQ(sets.size(), 6u);
    for (std::size_t r = 0; r < 3; ++r) {
        const auto& lean = sets[2 * r];
        const auto& translated = sets[2 * r + 1];
        EXPECT_EQ(lean.form, Form::lean);
        EXPECT_EQ(translated.form, Form::translated);
        EXPECT_EQ(lean.items.size(), 500u);
        EXPECT_EQ(lean.ids(), translated.ids());
        const auto ids = lean.ids();
        EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), 500u);
        EXPECT_EQ(lean.name, "seen_" + std::to_string(r + 1) + "_lean");
        EXPECT_EQ(translated.name, "seen_" + std::to_string(r + 1) + "_key1");
    }
    EXPECT_NE(sets[0].ids(), sets[2].ids());
}

TEST(TestSets, WholeCorpusInSeededOrder) {
    const auto corpus = testing::synthetic_corpus(200, 5, Origin::unseen, "mf");
    SamplingOptions options;
    options.n = 200;
    options.replicas = 1;
    const auto sets = sample_test_sets(corpus, Provenance::unseen, key1(), options);
    ASSERT_EQ(sets.size(), 2u);
    auto ids = sets[0].ids();
    std::sort(ids.begin(), ids.end());
    std::vector<std::string> all;
    for (const auto& p : corpus) all.push_back(p.id);
    std::sort(all.begin(), all.end());
    EXPECT_EQ(ids, all);
}

TEST(TestSets, DisjointMode) {
    const auto corpus = testing::synthetic_corpus(100, 6, Origin::training, "p");
    SamplingOptions options;
    options.n = 30;
    options.replicas = 3;
    options.mode = SamplingMode::disjoint;
    const auto sets = sample_test_sets(corpus, Provenance::seen, key1(), options);
    std::set<std::string> ids;
    for (std::size_t r = 0; r < 3; ++r) {
        for (const auto& id : sets[2 * r].ids()) EXPECT_TRUE(ids.insert(id).second);
    }
    options.n = 40;
    EXPECT_THROW(sample_test_sets(corpus, Provenance::seen, key1(), options), SizeExceedsCorpus);
}

TEST(TestSets, SizeExceedsCorpus) {
    const auto corpus = testing::synthetic_corpus(10, 6, Origin::training, "p");
    SamplingOptions options;
    options.n = 11;
    EXPECT_THROW(sample_test_sets(corpus, Provenance::seen, key1(), options), SizeExceedsCorpus);
}

TEST(TestSets, WriteReadRoundTrip) {
    testing::TempDir dir("sets");
    const auto corpus = testing::synthetic_corpus(60, 7, Origin::training, "p");
    SamplingOptions options;
    options.n = 20;
    options.replicas = 1;
    const auto sets = sample_test_sets(corpus, Provenance::seen, key1(), options);
    for (const auto& s : sets) write_test_set(s, dir.path());
    const auto manifests = list_test_sets(dir.path());
    ASSERT_EQ(manifests.size(), 2u);
    const auto back = read_test_set(dir / "seen_1_key1.manifest.json");
    EXPECT_EQ(back.ids(), sets[1].ids());
    EXPECT_EQ(back.key_name, "key1");
    for (std::size_t i = 0; i < back.items.size(); ++i) {
        EXPECT_EQ(back.items[i].record, sets[1].items[i].record);
        EXPECT_EQ(back.items[i].label, sets[1].items[i].label);
    }
}

}  // namespace
}  // namespace rosetta
