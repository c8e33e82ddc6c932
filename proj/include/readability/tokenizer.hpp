#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace readability {

namespace text {

enum class CharClass { Space, Word, Punct };

/// Decodes one UTF-8 code point starting at `pos` and advances it. Invalid
/// bytes decode as themselves.
char32_t next_code_point(std::string_view s, std::size_t& pos);

CharClass classify(char32_t cp);

std::size_t code_point_count(std::string_view s);

/// ASCII and Latin-1 lowercasing (covers German umlauts).
std::string to_lower(std::string_view s);

bool is_upper(char32_t cp);

}  // namespace text

/// A token is either a maximal run of word characters or a single
/// punctuation character; whitespace separates and is dropped. Case is kept.
std::vector<std::string> tokenize(std::string_view text);

using TokenId = std::int32_t;

class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kCls = 2;
  static constexpr TokenId kBos = 3;
  static constexpr TokenId kEos = 4;
  static constexpr std::size_t kNumSpecial = 5;

  /// Only the specials.
  Vocabulary();

  /// Keeps the max_size most frequent tokens of the given (training)
  /// sentences; frequency ties resolve lexicographically.
  static Vocabulary build(std::span<const std::string> sentences, std::size_t max_size);

  /// Restores a vocabulary from its token list in id order (specials first).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  TokenId lookup(std::string_view token) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  explicit Vocabulary(std::vector<std::string> tokens);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Fixed-length token ids with a 0/1 attention mask; padding is contiguous
/// at the tail.
struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> attention_mask;

  std::size_t max_len() const { return ids.size(); }
  /// Number of unpadded positions.
  std::size_t length() const;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// [CLS, tokens..., PAD...], truncating the tail of long sentences.
TokenSequence encode_bert_style(std::string_view text, const Vocabulary& vocab, std::size_t max_len = 128);

/// [BOS, tokens..., EOS, PAD...]; EOS survives truncation.
TokenSequence encode_gpt_style(std::string_view text, const Vocabulary& vocab, std::size_t max_len = 128);

}  // namespace readability
