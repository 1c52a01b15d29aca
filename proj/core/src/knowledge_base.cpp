#include "acldqn/knowledge_base.hpp"

#include <fstream>

#include <json.hpp>

namespace acldqn {
namespace {

const std::array<std::vector<std::string>, kNumSlots>& vocabularies() {
  static const std::array<std::vector<std::string>, kNumSlots> kVocab = {{
      {"zootopia", "deadpool", "the witch", "creed"},
      {"amc pacific place", "regal meridian", "carmike 12"},
      {"seattle", "bellevue", "portland"},
      {"friday", "saturday", "sunday"},
      {"3:30pm", "7:00pm", "9:30pm"},
      {"1", "2", "3"},
      {"$10", "$12", "$15"},
      {"comedy", "action", "drama"},
      {"pg-13", "r", "nc-17"},
  }};
  return kVocab;
}

}  // namespace

const std::vector<std::string>& slot_vocabulary(Slot slot) {
  return vocabularies().at(slot_index(slot));
}

KnowledgeBase::KnowledgeBase(std::vector<KbRow> rows) : rows_(std::move(rows)) {
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < kNumSlots; ++i) {
      if (row[i].empty() || row[i] == kUnknownValue) {
        throw CorpusError("KB row is missing a value for " + std::string(slot_name(kAllSlots[i])));
      }
    }
  }
}

bool KnowledgeBase::matches(std::size_t row,
                            const std::map<Slot, std::string>& constraints) const {
  const KbRow& r = rows_.at(row);
  for (const auto& [slot, value] : constraints) {
    if (r[slot_index(slot)] != value) return false;
  }
  return true;
}

KbResult KnowledgeBase::query(const std::map<Slot, std::string>& constraints) const {
  KbResult result;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (matches(i, constraints)) {
      if (result.count == 0) result.row = i;
      ++result.count;
    }
  }
  return result;
}

KnowledgeBase generate_kb(std::uint64_t seed, std::size_t num_rows) {
  Rng rng(seed);
  std::vector<KbRow> rows(num_rows);
  for (auto& row : rows) {
    for (std::size_t i = 0; i < kNumSlots; ++i) {
      const auto& vocab = vocabularies()[i];
      std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
      row[i] = vocab[pick(rng)];
    }
  }
  return KnowledgeBase(std::move(rows));
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot open " + path.string() + " for writing");
  for (const auto& row : kb.rows()) {
    nlohmann::ordered_json record;
    for (Slot s : kAllSlots) record[std::string(slot_name(s))] = row[slot_index(s)];
    out << record.dump() << '\n';
  }
  if (!out) throw CorpusError("failed writing " + path.string());
}

KnowledgeBase load_kb(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open " + path.string());
  std::vector<KbRow> rows;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, std::string("malformed record: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(line, "record must be an object");
    KbRow row;
    for (Slot s : kAllSlots) {
      const std::string name(slot_name(s));
      if (!record.contains(name) || !record[name].is_string()) {
        throw ParseError(line, "missing string field '" + name + "'");
      }
      row[slot_index(s)] = record[name].get<std::string>();
    }
    for (const auto& [name, value] : record.items()) {
      if (!parse_slot(name)) throw ParseError(line, "unknown slot '" + name + "'");
    }
    rows.push_back(std::move(row));
  }
  try {
    return KnowledgeBase(std::move(rows));
  } catch (const CorpusError& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }
}

}  // namespace acldqn
