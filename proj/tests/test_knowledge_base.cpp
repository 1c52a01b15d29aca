#include <gtest/gtest.h>

#include "acldqn/knowledge_base.hpp"
#include "test_util.hpp"

namespace acldqn {
namespace {

KbRow row_with(std::initializer_list<std::pair<Slot, std::string>> values) {
  KbRow row;
  for (Slot s : kAllSlots) row[slot_index(s)] = slot_vocabulary(s).front();
  for (const auto& [slot, value] : values) row[slot_index(slot)] = value;
  return row;
}

TEST(KbQuery, EmptyConstraintsMatchEverything) {
  const KnowledgeBase& kb = testing::default_kb();
  const KbResult r = kb_query(kb, {});
  EXPECT_EQ(r.count, kb.size());
  EXPECT_EQ(r.row, 0u);
}

TEST(KbQuery, NoMatch) {
  const KbResult r = kb_query(testing::default_kb(), {{Slot::kCity, "atlantis"}});
  EXPECT_EQ(r.count, 0u);
  EXPECT_FALSE(r.row.has_value());
}

TEST(KbQuery, SingleRow) {
  const KnowledgeBase kb({row_with({{Slot::kCity, "portland"}})});
  const KbResult r = kb_query(kb, {{Slot::kCity, "portland"}});
  EXPECT_EQ(r.count, 1u);
  EXPECT_EQ(r.row, 0u);
}

TEST(KbQuery, FirstMatchInRowOrder) {
  const KnowledgeBase kb({row_with({{Slot::kCity, "seattle"}}),
                          row_with({{Slot::kCity, "portland"}, {Slot::kDate, "sunday"}}),
                          row_with({{Slot::kCity, "portland"}})});
  const KbResult r = kb_query(kb, {{Slot::kCity, "portland"}});
  EXPECT_EQ(r.count, 2u);
  EXPECT_EQ(r.row, 1u);
}

// Brute-force scan over random constraint sets.
TEST(KbQuery, MatchesScanOracle) {
  const KnowledgeBase& kb = testing::default_kb();
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::map<Slot, std::string> constraints;
    for (Slot s : kAllSlots) {
      if (rng() % 3 == 0) {
        const auto& vocab = slot_vocabulary(s);
        constraints[s] = vocab[rng() % vocab.size()];
      }
    }
    std::size_t count = 0;
    std::optional<std::size_t> first;
    for (std::size_t i = 0; i < kb.size(); ++i) {
      bool ok = true;
      for (const auto& [slot, value] : constraints) ok = ok && kb.row(i)[slot_index(slot)] == value;
      if (ok && count++ == 0) first = i;
    }
    const KbResult r = kb.query(constraints);
    ASSERT_EQ(r.count, count);
    ASSERT_EQ(r.row, first);
  }
}

TEST(GenerateKb, ShapeAndDeterminism) {
  const KnowledgeBase& kb = testing::default_kb();
  EXPECT_EQ(kb.size(), 200u);
  EXPECT_EQ(generate_kb(7), kb);
  EXPECT_NE(generate_kb(8), kb);
  for (const auto& row : kb.rows()) {
    for (Slot s : kAllSlots) {
      const auto& vocab = slot_vocabulary(s);
      EXPECT_NE(std::find(vocab.begin(), vocab.end(), row[slot_index(s)]), vocab.end());
    }
  }
}

TEST(KbFile, RoundTripAndFieldNames) {
  testing::TempDir dir;
  save_kb(testing::default_kb(), dir / "kb.jsonl");
  EXPECT_EQ(load_kb(dir / "kb.jsonl"), testing::default_kb());
  const std::string text = testing::read_file(dir / "kb.jsonl");
  EXPECT_EQ(text.rfind("{\"movie_name\":", 0), 0u);
}

TEST(KbFile, Errors) {
  testing::TempDir dir;
  testing::write_file(dir / "kb.jsonl", "{\"movie_name\":\"room\"}\n");
  EXPECT_THROW(load_kb(dir / "kb.jsonl"), CorpusError);
  testing::write_file(dir / "bad.jsonl", "not json\n");
  EXPECT_THROW(load_kb(dir / "bad.jsonl"), ParseError);
  EXPECT_THROW(KnowledgeBase({KbRow{}}), CorpusError);
}

}  // namespace
}  // namespace acldqn
