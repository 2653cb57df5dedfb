#include "heaps/text_model.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "heaps/error.hpp"

namespace heaps {

std::string_view to_string(TagClass tag) {
  switch (tag) {
    case TagClass::Noun: return "noun";
    case TagClass::Verb: return "verb";
    case TagClass::Other: return "other";
    case TagClass::Ignore: return "ignore";
  }
  return "?";
}

std::optional<TagClass> parse_tag_class(std::string_view name) {
  if (name == "noun") return TagClass::Noun;
  if (name == "verb") return TagClass::Verb;
  if (name == "other") return TagClass::Other;
  if (name == "ignore") return TagClass::Ignore;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// TagMap

TagMap::TagMap(std::string name, Entries entries)
    : name_(std::move(name)), entries_(std::move(entries)) {}

TagMap TagMap::penn_default() {
  Entries entries;
  for (const char* t : {"NN", "NNS", "NNP", "NNPS", "PRP"}) entries.emplace(t, TagClass::Noun);
  for (const char* t : {"VB", "VBD", "VBG", "VBN", "VBP", "VBZ"}) entries.emplace(t, TagClass::Verb);
  // PRP$ stays with Other: only personal pronouns join the nouns.
  for (const char* t : {"CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD",
                        "PDT", "POS", "PRP$", "RB", "RBR", "RBS", "RP", "TO", "UH", "WDT",
                        "WP", "WP$", "WRB"}) {
    entries.emplace(t, TagClass::Other);
  }
  for (const char* t : {".", ",", ":", "``", "''", "(", ")", "$", "#", "--", "-LRB-", "-RRB-",
                        "-NONE-", "SYM"}) {
    entries.emplace(t, TagClass::Ignore);
  }
  return TagMap("penn-default", std::move(entries));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TagMap TagMap::parse(std::string_view config, std::string name) {
  Entries entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= config.size()) {
    std::size_t end = config.find('\n', start);
    if (end == std::string_view::npos) end = config.size();
    std::string_view line = trim(config.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    // `#` opens a comment, except in `# = class`, the entry for the '#' tag.
    if (line.front() == '#' && trim(line.substr(1)).substr(0, 1) != "=") continue;

    // Split on the last '=' so that a tag may itself contain '='.
    const auto eq = line.rfind('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::Parse, "tag map line " + std::to_string(line_no) + ": expected 'TAG = class'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto tag_class = parse_tag_class(value);
    if (key.empty() || !tag_class) {
      fail(ErrorCode::Parse, "tag map line " + std::to_string(line_no) + ": bad entry '" +
                                 std::string(line) + "'");
    }
    entries.insert_or_assign(std::string(key), *tag_class);
  }
  if (entries.empty()) fail(ErrorCode::Parse, "tag map '" + name + "' has no entries");
  return TagMap(std::move(name), std::move(entries));
}

TagMap TagMap::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.stem().string());
}

TagClass TagMap::classify(std::string_view pos_tag, std::size_t line) const {
  const auto it = entries_.find(pos_tag);
  if (it == entries_.end()) {
    std::string message = "unknown POS tag '" + std::string(pos_tag) + "'";
    if (line != 0) message += " at line " + std::to_string(line);
    fail(ErrorCode::UnknownPosTag, message);
  }
  return it->second;
}

bool TagMap::contains(std::string_view pos_tag) const {
  return entries_.find(pos_tag) != entries_.end();
}

// ---------------------------------------------------------------------------
// Normalization

std::optional<Normalization> parse_normalization(std::string_view name) {
  if (name == "lower") return Normalization::Lower;
  if (name == "none") return Normalization::None;
  return std::nullopt;
}

std::string_view to_string(Normalization policy) {
  return policy == Normalization::Lower ? "lower" : "none";
}

namespace {

char32_t fold(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c >= 0x100 && c <= 0x137 && c != 0x130) return (c % 2 == 0) ? c + 1 : c;
  if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  return c;
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

}  // namespace

std::string normalize(std::string_view surface, Normalization policy) {
  if (policy == Normalization::None) return std::string(surface);
  std::string out;
  out.reserve(surface.size());
  std::size_t i = 0;
  while (i < surface.size()) {
    const auto b0 = static_cast<unsigned char>(surface[i]);
    std::size_t len = 0;
    char32_t c = 0;
    if (b0 < 0x80) {
      len = 1;
      c = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      c = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      c = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      c = b0 & 0x07;
    }
    bool valid = len != 0 && i + len <= surface.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      const auto b = static_cast<unsigned char>(surface[i + k]);
      if ((b & 0xC0) != 0x80) valid = false;
      c = (c << 6) | (b & 0x3F);
    }
    if (!valid) {
      out.push_back(surface[i]);
      ++i;
      continue;
    }
    append_utf8(out, fold(c));
    i += len;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interchange format

std::vector<RawToken> parse_interchange(std::istream& in) {
  std::vector<RawToken> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 'surface<TAB>pos-tag'");
    }
    tokens.push_back({line.substr(0, tab), line.substr(tab + 1), line_no});
  }
  return tokens;
}

std::vector<RawToken> read_interchange(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return parse_interchange(in);
}

// ---------------------------------------------------------------------------
// TextRecord

TextRecord::TextRecord(std::string id, std::vector<TaggedToken> tokens,
                       std::vector<VocabularyType> types, std::vector<std::string> pos_tags)
    : id_(std::move(id)),
      tokens_(std::move(tokens)),
      types_(std::move(types)),
      pos_tags_(std::move(pos_tags)) {
  for (const auto& t : tokens_) ++n_tag_[index(t.tag)];
  for (const auto& t : types_) ++v_tag_[index(t.tag)];
}

TextRecord build_text(std::span<const RawToken> stream, const TagMap& tag_map,
                      Normalization policy, std::string id) {
  std::vector<TaggedToken> tokens;
  std::vector<VocabularyType> types;
  std::vector<PerClass<std::uint32_t>> class_votes;
  std::vector<PerClass<std::uint32_t>> class_first;
  std::vector<std::string> pos_tags;
  std::unordered_map<std::string, std::uint32_t> type_index;
  std::unordered_map<std::string, std::uint32_t> pos_index;

  tokens.reserve(stream.size());
  for (const auto& raw : stream) {
    const TagClass tag = tag_map.classify(raw.pos, raw.line);
    if (tag == TagClass::Ignore) continue;
    std::string surface = normalize(raw.surface, policy);
    if (surface.empty()) continue;

    const auto position = static_cast<std::uint32_t>(tokens.size() + 1);
    auto [type_it, new_type] = type_index.try_emplace(surface, static_cast<std::uint32_t>(types.size()));
    if (new_type) {
      // Provisional owner is the first occurrence's class.
      types.push_back({std::move(surface), tag, 0, position});
      class_votes.push_back({});
      class_first.push_back({});
    }
    const std::uint32_t type = type_it->second;
    ++types[type].count;
    if (class_votes[type][index(tag)]++ == 0) class_first[type][index(tag)] = position;

    auto [pos_it, new_pos] = pos_index.try_emplace(raw.pos, static_cast<std::uint32_t>(pos_tags.size()));
    if (new_pos) pos_tags.push_back(raw.pos);

    tokens.push_back({type, tag, position, pos_it->second});
  }

  if (tokens.empty()) {
    fail(ErrorCode::EmptyText, "text '" + id + "' has no words after filtering");
  }

  for (std::size_t t = 0; t < types.size(); ++t) {
    const auto& votes = class_votes[t];
    const auto& first = class_first[t];
    TagClass owner = types[t].tag;
    for (const TagClass c : kWordClasses) {
      const auto i = index(c);
      const auto o = index(owner);
      if (votes[i] > votes[o] || (votes[i] == votes[o] && votes[i] > 0 && first[i] < first[o])) {
        owner = c;
      }
    }
    types[t].tag = owner;
  }

  return TextRecord(std::move(id), std::move(tokens), std::move(types), std::move(pos_tags));
}

void write_interchange(std::ostream& out, const TextRecord& text) {
  if (!text.id().empty()) out << "# id: " << text.id() << '\n';
  for (const auto& token : text.tokens()) {
    out << text.surface(token) << '\t' << text.pos_tags()[token.pos] << '\n';
  }
}

// ---------------------------------------------------------------------------
// MultiplicitySpectrum

MultiplicitySpectrum MultiplicitySpectrum::from_entries(std::vector<SpectrumEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const SpectrumEntry& a, const SpectrumEntry& b) { return a.multiplicity < b.multiplicity; });
  MultiplicitySpectrum s;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.multiplicity == 0 || e.types == 0) {
      fail(ErrorCode::Domain, "spectrum entries need m >= 1 and c_m >= 1");
    }
    if (i > 0 && entries[i - 1].multiplicity == e.multiplicity) {
      fail(ErrorCode::Domain, "duplicate multiplicity " + std::to_string(e.multiplicity) + " in spectrum");
    }
    s.total_words_ += e.multiplicity * e.types;
    s.vocabulary_size_ += e.types;
  }
  if (entries.empty()) fail(ErrorCode::EmptyText, "empty spectrum");
  s.entries_ = std::move(entries);
  return s;
}

MultiplicitySpectrum MultiplicitySpectrum::from_counts(std::span<const std::uint64_t> counts) {
  std::map<std::uint64_t, std::uint64_t> histogram;
  for (const auto m : counts) {
    if (m == 0) fail(ErrorCode::Domain, "occurrence counts must be positive");
    ++histogram[m];
  }
  std::vector<SpectrumEntry> entries;
  entries.reserve(histogram.size());
  for (const auto& [m, c] : histogram) entries.push_back({m, c});
  return from_entries(std::move(entries));
}

std::vector<std::uint64_t> MultiplicitySpectrum::occurrence_list() const {
  std::vector<std::uint64_t> list;
  list.reserve(vocabulary_size_);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    list.insert(list.end(), it->types, it->multiplicity);
  }
  return list;
}

MultiplicitySpectrum spectrum(const TextRecord& text) {
  if (text.total_words() == 0) fail(ErrorCode::EmptyText, "spectrum of an empty text");
  std::vector<std::uint64_t> counts;
  counts.reserve(text.vocabulary_size());
  for (const auto& t : text.types()) counts.push_back(t.count);
  return MultiplicitySpectrum::from_counts(counts);
}

}  // namespace heaps
