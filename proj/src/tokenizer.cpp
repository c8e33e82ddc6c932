#include "readability/tokenizer.hpp"

#include <algorithm>
#include <map>

#include "readability/error.hpp"

namespace readability {
namespace text {

char32_t next_code_point(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) {
    return i < s.size() && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80;
  };
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
    const char32_t cp = ((b0 & 0x1F) << 6) | (static_cast<unsigned char>(s[pos + 1]) & 0x3F);
    pos += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
    const char32_t cp = ((b0 & 0x0F) << 12) | ((static_cast<unsigned char>(s[pos + 1]) & 0x3F) << 6) |
                        (static_cast<unsigned char>(s[pos + 2]) & 0x3F);
    pos += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
    const char32_t cp = ((b0 & 0x07) << 18) | ((static_cast<unsigned char>(s[pos + 1]) & 0x3F) << 12) |
                        ((static_cast<unsigned char>(s[pos + 2]) & 0x3F) << 6) |
                        (static_cast<unsigned char>(s[pos + 3]) & 0x3F);
    pos += 4;
    return cp;
  }
  ++pos;
  return b0;
}

CharClass classify(char32_t cp) {
  if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f' || cp == 0xA0 ||
      (cp >= 0x2000 && cp <= 0x200B) || cp == 0x202F || cp == 0x3000) {
    return CharClass::Space;
  }
  if (cp < 0x80) {
    const bool alnum = (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
    return alnum ? CharClass::Word : CharClass::Punct;
  }
  if ((cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 || (cp >= 0x2010 && cp <= 0x206F) ||
      (cp >= 0x20A0 && cp <= 0x20CF)) {
    return CharClass::Punct;
  }
  return CharClass::Word;
}

std::size_t code_point_count(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size();) {
    next_code_point(s, pos);
    ++n;
  }
  return n;
}

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c >= 'A' && c <= 'Z') {
      out.push_back(static_cast<char>(c + 32));
    } else if (c == 0xC3 && i + 1 < s.size()) {
      // Latin-1 capitals U+00C0..U+00DE (minus U+00D7) map to +0x20.
      const auto c1 = static_cast<unsigned char>(s[i + 1]);
      out.push_back(static_cast<char>(c));
      out.push_back(static_cast<char>(c1 >= 0x80 && c1 <= 0x9E && c1 != 0x97 ? c1 + 0x20 : c1));
      ++i;
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

bool is_upper(char32_t cp) {
  return (cp >= 'A' && cp <= 'Z') || (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7);
}

}  // namespace text

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string word;
  for (std::size_t pos = 0; pos < s.size();) {
    const std::size_t start = pos;
    const char32_t cp = text::next_code_point(s, pos);
    const auto cls = text::classify(cp);
    if (cls == text::CharClass::Word) {
      word.append(s.substr(start, pos - start));
      continue;
    }
    if (!word.empty()) {
      tokens.push_back(std::move(word));
      word.clear();
    }
    if (cls == text::CharClass::Punct) tokens.emplace_back(s.substr(start, pos - start));
  }
  if (!word.empty()) tokens.push_back(std::move(word));
  return tokens;
}

namespace {

const std::vector<std::string>& special_tokens() {
  static const std::vector<std::string> specials = {"[PAD]", "[UNK]", "[CLS]", "[BOS]", "[EOS]"};
  return specials;
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(special_tokens()) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  const auto& specials = special_tokens();
  if (tokens_.size() < kNumSpecial || !std::equal(specials.begin(), specials.end(), tokens_.begin())) {
    throw FormatError("vocabulary must start with the special tokens [PAD] [UNK] [CLS] [BOS] [EOS]");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw FormatError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) { return Vocabulary(std::move(tokens)); }

Vocabulary Vocabulary::build(std::span<const std::string> sentences, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : sentences) {
    for (auto& t : tokenize(s)) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // counts is already lexicographic, so a stable sort on frequency keeps ties ordered.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> tokens = special_tokens();
  for (const auto& [token, count] : ranked) {
    if (tokens.size() - kNumSpecial >= max_size) break;
    tokens.push_back(token);
  }
  return Vocabulary(std::move(tokens));
}

TokenId Vocabulary::lookup(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.contains(std::string(token)); }

std::size_t TokenSequence::length() const {
  return static_cast<std::size_t>(std::count(attention_mask.begin(), attention_mask.end(), std::uint8_t{1}));
}

namespace {

TokenSequence pad_to(std::vector<TokenId> ids, std::size_t max_len) {
  TokenSequence seq;
  seq.attention_mask.assign(max_len, 0);
  std::fill_n(seq.attention_mask.begin(), ids.size(), std::uint8_t{1});
  ids.resize(max_len, Vocabulary::kPad);
  seq.ids = std::move(ids);
  return seq;
}

}  // namespace

TokenSequence encode_bert_style(std::string_view s, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 1) throw ConfigError("BERT-style encoding needs max_len >= 1");
  std::vector<TokenId> ids{Vocabulary::kCls};
  for (const auto& t : tokenize(s)) {
    if (ids.size() == max_len) break;
    ids.push_back(vocab.lookup(t));
  }
  return pad_to(std::move(ids), max_len);
}

TokenSequence encode_gpt_style(std::string_view s, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 2) throw ConfigError("GPT-style encoding needs max_len >= 2");
  std::vector<TokenId> ids{Vocabulary::kBos};
  for (const auto& t : tokenize(s)) {
    if (ids.size() == max_len - 1) break;
    ids.push_back(vocab.lookup(t));
  }
  ids.push_back(Vocabulary::kEos);
  return pad_to(std::move(ids), max_len);
}

}  // namespace readability
