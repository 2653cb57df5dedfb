#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace heaps {

enum class TagClass : std::uint8_t { Noun = 0, Verb = 1, Other = 2, Ignore = 3 };

// The three classes that contribute words; Ignore never does.
inline constexpr std::array<TagClass, 3> kWordClasses{TagClass::Noun, TagClass::Verb,
                                                      TagClass::Other};
inline constexpr std::size_t kNumWordClasses = kWordClasses.size();

constexpr std::size_t index(TagClass tag) { return static_cast<std::size_t>(tag); }

std::string_view to_string(TagClass tag);
std::optional<TagClass> parse_tag_class(std::string_view name);

template <typename T>
using PerClass = std::array<T, kNumWordClasses>;

// Total map from part-of-speech tag to TagClass. Looking up a tag that is not
// in the map is an UnknownPosTag error.
class TagMap {
 public:
  using Entries = std::map<std::string, TagClass, std::less<>>;

  TagMap(std::string name, Entries entries);

  // Penn Treebank inventory as emitted by the NLTK tagger.
  static TagMap penn_default();

  // `POSTAG = noun|verb|other|ignore`, one per line, `#` comments.
  static TagMap parse(std::string_view config, std::string name);
  static TagMap load(const std::filesystem::path& path);

  TagClass classify(std::string_view pos_tag, std::size_t line = 0) const;
  bool contains(std::string_view pos_tag) const;

  const std::string& name() const { return name_; }
  const Entries& entries() const { return entries_; }

 private:
  std::string name_;
  Entries entries_;
};

enum class Normalization { Lower, None };

std::optional<Normalization> parse_normalization(std::string_view name);
std::string_view to_string(Normalization policy);

// Simple case folding over ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic. Invalid UTF-8 bytes pass through unchanged.
std::string normalize(std::string_view surface, Normalization policy);

// One line of the interchange format before classification.
struct RawToken {
  std::string surface;
  std::string pos;
  std::size_t line = 0;
};

std::vector<RawToken> parse_interchange(std::istream& in);
std::vector<RawToken> read_interchange(const std::filesystem::path& path);

struct TaggedToken {
  std::uint32_t type = 0;      // index into TextRecord::types()
  TagClass tag = TagClass::Other;  // class of this occurrence
  std::uint32_t position = 0;  // 1-based, Ignore tokens removed
  std::uint32_t pos = 0;       // index into TextRecord::pos_tags()
};

struct VocabularyType {
  std::string surface;
  TagClass tag = TagClass::Other;  // owning class, majority of occurrences
  std::uint32_t count = 0;
  std::uint32_t first_position = 0;
};

class TextRecord {
 public:
  TextRecord() = default;
  TextRecord(std::string id, std::vector<TaggedToken> tokens, std::vector<VocabularyType> types,
             std::vector<std::string> pos_tags);

  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  std::span<const TaggedToken> tokens() const { return tokens_; }
  std::span<const VocabularyType> types() const { return types_; }
  std::span<const std::string> pos_tags() const { return pos_tags_; }

  std::size_t total_words() const { return tokens_.size(); }
  std::size_t vocabulary_size() const { return types_.size(); }
  std::size_t words_in(TagClass tag) const { return n_tag_.at(index(tag)); }
  std::size_t vocabulary_in(TagClass tag) const { return v_tag_.at(index(tag)); }
  const PerClass<std::size_t>& words_per_class() const { return n_tag_; }
  const PerClass<std::size_t>& vocabulary_per_class() const { return v_tag_; }

  const std::string& surface(const TaggedToken& token) const { return types_[token.type].surface; }

 private:
  std::string id_;
  std::vector<TaggedToken> tokens_;
  std::vector<VocabularyType> types_;
  std::vector<std::string> pos_tags_;
  PerClass<std::size_t> n_tag_{};
  PerClass<std::size_t> v_tag_{};
};

// Drops Ignore tokens, keys vocabulary on the normalized surface and assigns
// each type the majority class of its occurrences (ties: first occurrence).
TextRecord build_text(std::span<const RawToken> stream, const TagMap& tag_map,
                      Normalization policy = Normalization::Lower, std::string id = {});

// Writes `surface<TAB>pos` lines; build_text on the output reproduces the record.
void write_interchange(std::ostream& out, const TextRecord& text);

struct SpectrumEntry {
  std::uint64_t multiplicity = 0;  // m
  std::uint64_t types = 0;         // c_m

  bool operator==(const SpectrumEntry&) const = default;
};

// Count-of-counts {(m, c_m)}, sorted by increasing m.
class MultiplicitySpectrum {
 public:
  MultiplicitySpectrum() = default;

  // Entries may come in any order but m must be distinct and m, c_m >= 1.
  static MultiplicitySpectrum from_entries(std::vector<SpectrumEntry> entries);
  // One occurrence count per vocabulary type.
  static MultiplicitySpectrum from_counts(std::span<const std::uint64_t> counts);

  std::span<const SpectrumEntry> entries() const { return entries_; }
  std::size_t distinct_multiplicities() const { return entries_.size(); }
  std::uint64_t total_words() const { return total_words_; }
  std::uint64_t vocabulary_size() const { return vocabulary_size_; }
  std::uint64_t max_multiplicity() const { return entries_.empty() ? 0 : entries_.back().multiplicity; }
  std::uint64_t min_multiplicity() const { return entries_.empty() ? 0 : entries_.front().multiplicity; }

  // Occurrence counts m_1 >= m_2 >= ... >= m_V (the Zipf ordering).
  std::vector<std::uint64_t> occurrence_list() const;

  bool operator==(const MultiplicitySpectrum&) const = default;

 private:
  std::vector<SpectrumEntry> entries_;
  std::uint64_t total_words_ = 0;
  std::uint64_t vocabulary_size_ = 0;
};

MultiplicitySpectrum spectrum(const TextRecord& text);

}  // namespace heaps
