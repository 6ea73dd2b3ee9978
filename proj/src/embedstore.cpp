#include "dcs/embedstore.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "dcs/error.hpp"

namespace dcs {

namespace {

constexpr char kMagic[4] = {'D', 'C', 'S', 'E'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
bool get_le(std::istream& in, T& value) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
  value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(buf[i]) << (8 * i));
  return true;
}

std::string key_name(const std::string& id, View view, std::uint16_t layer) {
  return "meeting '" + id + "' view " + to_string(view) + " layer " + std::to_string(layer);
}

}  // namespace

const char* to_string(View v) noexcept { return v == View::absolute ? "absolute" : "relative"; }

EmbeddingStore::EmbeddingStore(std::vector<EmbeddingRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    const auto name = key_name(r.meeting_id, r.view, r.layer);
    if (r.meeting_id.size() > 0xFFFF) throw ValidationError("meeting id too long for " + name);
    if (r.view != View::absolute && r.view != View::relative)
      throw ValidationError("unknown view in record " + std::to_string(i));
    if (r.vector.empty()) throw ValidationError("empty vector for " + name);
    for (float x : r.vector)
      if (!std::isfinite(x)) throw ValidationError("non-finite value in " + name);
    auto [it, fresh] = dims_.emplace(std::pair{r.view, r.layer}, r.dim());
    if (!fresh && it->second != r.dim())
      throw ValidationError("dim mismatch for " + name + ": " + std::to_string(r.dim()) +
                            " vs " + std::to_string(it->second));
    if (!index_.emplace(std::tuple{r.meeting_id, r.view, r.layer}, i).second)
      throw ConflictError("duplicate record for " + name);
  }
}

const EmbeddingRecord* EmbeddingStore::find(const std::string& meeting_id, View view,
                                            std::uint16_t layer) const {
  auto it = index_.find(std::tuple{meeting_id, view, layer});
  return it == index_.end() ? nullptr : &records_[it->second];
}

const EmbeddingRecord& EmbeddingStore::at(const std::string& meeting_id, View view,
                                          std::uint16_t layer) const {
  if (const auto* r = find(meeting_id, view, layer)) return *r;
  throw ValidationError("missing embedding for " + key_name(meeting_id, view, layer));
}

std::optional<std::uint32_t> EmbeddingStore::dim(View view, std::uint16_t layer) const {
  auto it = dims_.find({view, layer});
  if (it == dims_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint16_t> EmbeddingStore::layers() const {
  std::set<std::uint16_t> s;
  for (const auto& [key, d] : dims_) s.insert(key.second);
  return {s.begin(), s.end()};
}

EmbeddingStore EmbeddingStore::filter_layer(std::uint16_t layer) const {
  std::vector<EmbeddingRecord> out;
  for (const auto& r : records_)
    if (r.layer == layer) out.push_back(r);
  return EmbeddingStore(std::move(out));
}

void write_store(const std::vector<EmbeddingRecord>& records, std::ostream& out) {
  if (records.empty()) throw ValidationError("refusing to write an empty store");
  EmbeddingStore validated(records);  // throws on invalid content
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, EmbeddingStore::kVersion);
  for (const auto& r : records) {
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(r.meeting_id.size()));
    out.write(r.meeting_id.data(), static_cast<std::streamsize>(r.meeting_id.size()));
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(r.view));
    put_le<std::uint16_t>(out, r.layer);
    put_le<std::uint32_t>(out, r.dim());
    for (float x : r.vector) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  }
}

void write_store(const std::vector<EmbeddingRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw ValidationError("refusing to write an empty store");
  EmbeddingStore check(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_store(records, out);
  out.flush();
  if (!out) throw IoError("short write to " + path.string());
}

void write_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  write_store(store.records(), path);
}

EmbeddingStore read_store(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw ValidationError("not a DCSE store (bad magic)");
  std::uint32_t version = 0;
  if (!get_le(in, version)) throw ValidationError("truncated DCSE header");
  if (version != EmbeddingStore::kVersion)
    throw ValidationError("unsupported DCSE version " + std::to_string(version));

  std::vector<EmbeddingRecord> records;
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto where = "record " + std::to_string(records.size());
    EmbeddingRecord r;
    std::uint16_t id_len = 0;
    if (!get_le(in, id_len)) throw ValidationError("truncated " + where);
    r.meeting_id.resize(id_len);
    if (id_len > 0 && !in.read(r.meeting_id.data(), id_len)) throw ValidationError("truncated " + where);
    std::uint8_t view = 0;
    std::uint32_t dim = 0;
    if (!get_le(in, view) || !get_le(in, r.layer) || !get_le(in, dim))
      throw ValidationError("truncated " + where);
    if (view > 1) throw ValidationError("bad view byte in " + where);
    r.view = static_cast<View>(view);
    if (dim == 0) throw ValidationError("zero dim in " + where);
    r.vector.resize(dim);
    for (auto& x : r.vector) {
      std::uint32_t bits = 0;
      if (!get_le(in, bits)) throw ValidationError("truncated " + where);
      x = std::bit_cast<float>(bits);
    }
    records.push_back(std::move(r));
  }
  return EmbeddingStore(std::move(records));
}

EmbeddingStore read_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open store " + path.string());
  return read_store(in);
}

std::vector<double> widen(std::span<const float> v) { return {v.begin(), v.end()}; }

PairDataset build_pairs(const std::vector<Statement>& corpus, const EmbeddingStore& store,
                        std::uint16_t layer) {
  PairDataset ds;
  for (std::size_t t = 0; t < corpus.size(); ++t) {
    const auto& curr = corpus[t];
    if (t > 0 && !(corpus[t - 1].date < curr.date))
      throw OrderingError("corpus not strictly ordered at " + curr.meeting_id);
    const auto& abs = store.at(curr.meeting_id, View::absolute, layer);
    ds.abs_singletons.push_back({curr.meeting_id, widen(abs.vector)});
    if (t == 0) continue;
    const auto& rel = store.at(curr.meeting_id, View::relative, layer);
    if (rel.dim() != abs.dim())
      throw ValidationError("absolute and relative dims differ for meeting '" + curr.meeting_id + "'");
    ds.pairs.push_back({ds.abs_singletons[t - 1].h_abs, ds.abs_singletons[t].h_abs,
                        widen(rel.vector), corpus[t - 1].meeting_id, curr.meeting_id});
  }
  return ds;
}

PairDataset with_absolute_as_relative(const PairDataset& dataset) {
  PairDataset out = dataset;
  for (auto& p : out.pairs) p.h_rel_curr = p.h_abs_curr;
  return out;
}

}  // namespace dcs
