#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dcs/corpus.hpp"

namespace dcs {

enum class View : std::uint8_t { absolute = 0, relative = 1 };

const char* to_string(View v) noexcept;

struct EmbeddingRecord {
  std::string meeting_id;
  View view = View::absolute;
  std::uint16_t layer = 0;
  std::vector<float> vector;

  std::uint32_t dim() const noexcept { return static_cast<std::uint32_t>(vector.size()); }

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// Validated, indexed collection of embedding records.
///
/// On-disk layout (all integers little-endian):
///   "DCSE" | u32 version=1 | records...
///   record: u16 id_len | id bytes | u8 view | u16 layer | u32 dim | dim x f32
class EmbeddingStore {
 public:
  static constexpr std::uint32_t kVersion = 1;

  EmbeddingStore() = default;
  /// Throws ValidationError on non-finite values, empty vectors, duplicate
  /// (id, view, layer) keys or mixed dims within one (view, layer).
  explicit EmbeddingStore(std::vector<EmbeddingRecord> records);

  const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const EmbeddingRecord* find(const std::string& meeting_id, View view, std::uint16_t layer) const;
  /// Like find but throws a ValidationError naming the missing key.
  const EmbeddingRecord& at(const std::string& meeting_id, View view, std::uint16_t layer) const;

  std::optional<std::uint32_t> dim(View view, std::uint16_t layer) const;
  std::vector<std::uint16_t> layers() const;

  /// Records of one layer only, preserving order.
  EmbeddingStore filter_layer(std::uint16_t layer) const;

 private:
  std::vector<EmbeddingRecord> records_;
  std::map<std::tuple<std::string, View, std::uint16_t>, std::size_t> index_;
  std::map<std::pair<View, std::uint16_t>, std::uint32_t> dims_;
};

void write_store(const std::vector<EmbeddingRecord>& records, const std::filesystem::path& path);
void write_store(const EmbeddingStore& store, const std::filesystem::path& path);
void write_store(const std::vector<EmbeddingRecord>& records, std::ostream& out);

EmbeddingStore read_store(const std::filesystem::path& path);
EmbeddingStore read_store(std::istream& in);

/// Consecutive-meeting training data. `pairs[t-1]` links meeting t-1 to t.
struct MeetingPair {
  std::vector<double> h_abs_prev;
  std::vector<double> h_abs_curr;
  std::vector<double> h_rel_curr;
  std::string prev_id;
  std::string curr_id;
};

struct Singleton {
  std::string meeting_id;
  std::vector<double> h_abs;
};

struct PairDataset {
  std::vector<MeetingPair> pairs;
  std::vector<Singleton> abs_singletons;

  std::size_t dim() const noexcept {
    return abs_singletons.empty() ? 0 : abs_singletons.front().h_abs.size();
  }
};

PairDataset build_pairs(const std::vector<Statement>& corpus, const EmbeddingStore& store,
                        std::uint16_t layer);

/// Dataset whose relative inputs are replaced by the current meeting's
/// absolute embedding (the single-representation ablation).
PairDataset with_absolute_as_relative(const PairDataset& dataset);

std::vector<double> widen(std::span<const float> v);

}  // namespace dcs
