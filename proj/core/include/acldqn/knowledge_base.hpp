#ifndef ACLDQN_KNOWLEDGE_BASE_HPP_
#define ACLDQN_KNOWLEDGE_BASE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acldqn/domain.hpp"

namespace acldqn {

using KbRow = std::array<std::string, kNumSlots>;

struct KbResult {
  std::size_t count = 0;
  std::optional<std::size_t> row;  // first match in row order
};

// Synthetic movie/showtime table. Immutable once built.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(std::vector<KbRow> rows);

  const std::vector<KbRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  const KbRow& row(std::size_t i) const { return rows_.at(i); }

  KbResult query(const std::map<Slot, std::string>& constraints) const;
  bool matches(std::size_t row, const std::map<Slot, std::string>& constraints) const;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

 private:
  std::vector<KbRow> rows_;
};

inline KbResult kb_query(const KnowledgeBase& kb,
                         const std::map<Slot, std::string>& constraints) {
  return kb.query(constraints);
}

// Candidate values per slot used by the generator.
const std::vector<std::string>& slot_vocabulary(Slot slot);

KnowledgeBase generate_kb(std::uint64_t seed, std::size_t num_rows = 200);

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path);
KnowledgeBase load_kb(const std::filesystem::path& path);

}  // namespace acldqn

#endif  // ACLDQN_KNOWLEDGE_BASE_HPP_
