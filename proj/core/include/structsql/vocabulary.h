#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "structsql/schema.h"

namespace structsql {

using TokenId = std::uint32_t;

/// Lexical class of a vocabulary entry, used by the decoding constraints.
enum class TokenClass : std::uint8_t {
  Eos,
  Word,    // starts with a letter (or is a non-ASCII code point)
  Digit,   // a single decimal digit
  Space,
  Quote,   // "'"
  Symbol,  // any other single character
};

/// Tokenizer tag exchanged in the scorer handshake.
inline constexpr std::string_view kTokenizerTag = "sqlpiece-v1";
inline constexpr std::string_view kEosSurface = "</s>";

/// Splits text into vocabulary pieces: letter-initial alphanumeric runs,
/// single digits, single whitespace characters and single symbols. Pieces
/// concatenate back to the input.
std::vector<std::string> split_pieces(std::string_view text);

/// SQL keywords emitted by render_sql.
std::span<const std::string_view> sql_keywords();

/// Token id <-> surface form table plus the piece tokenizer.
class Vocabulary {
 public:
  Vocabulary();  // keywords, symbols, digits and EOS only

  /// Adds every piece of `text`; returns the number of new entries.
  std::size_t add_text(std::string_view text);
  TokenId add(std::string_view surface);

  /// Vocabulary covering SQL keywords, all schema surface forms and values,
  /// and any extra texts.
  static Vocabulary build(std::span<const DatabaseSchema> schemas, std::span<const std::string> extra_texts = {});

  /// Throws Untokenizable if a piece is missing.
  std::vector<TokenId> encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;

  std::size_t size() const { return surfaces_.size(); }
  TokenId eos_id() const { return eos_; }
  const std::string& surface(TokenId id) const { return surfaces_.at(id); }
  TokenClass token_class(TokenId id) const { return classes_.at(id); }
  std::optional<TokenId> find(std::string_view surface) const;
  bool is_keyword(TokenId id) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& doc);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> surfaces_;
  std::vector<TokenClass> classes_;
  std::map<std::string, TokenId, std::less<>> index_;
  TokenId eos_ = 0;
};

}  // namespace structsql
