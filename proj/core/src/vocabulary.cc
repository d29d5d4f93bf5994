#include "structsql/vocabulary.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>

#include "structsql/error.h"

namespace structsql {
namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

TokenClass classify(std::string_view s) {
  if (s == kEosSurface) return TokenClass::Eos;
  unsigned char c = static_cast<unsigned char>(s.front());
  if (c >= 0x80 || is_alpha(s.front())) return TokenClass::Word;
  if (is_digit(s.front())) return TokenClass::Digit;
  if (std::isspace(c)) return TokenClass::Space;
  if (s == "'") return TokenClass::Quote;
  return TokenClass::Symbol;
}

}  // namespace

std::vector<std::string> split_pieces(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (is_alpha(s[i])) {
      std::size_t j = i + 1;
      while (j < s.size() && (is_alpha(s[j]) || is_digit(s[j]))) ++j;
      out.emplace_back(s.substr(i, j - i));
      i = j;
    } else if (c >= 0x80) {
      std::size_t len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : c >= 0xC0 ? 2 : 1;
      len = std::min(len, s.size() - i);
      out.emplace_back(s.substr(i, len));
      i += len;
    } else {
      out.emplace_back(1, s[i]);
      ++i;
    }
  }
  return out;
}

std::span<const std::string_view> sql_keywords() {
  static constexpr std::array<std::string_view, 27> kWords = {
      "SELECT", "DISTINCT", "FROM", "JOIN", "ON",    "WHERE",     "GROUP",  "BY",    "HAVING",
      "ORDER",  "ASC",      "DESC", "LIMIT", "UNION", "INTERSECT", "EXCEPT", "AND",   "OR",
      "NOT",    "IN",       "LIKE", "BETWEEN", "COUNT", "SUM",     "AVG",    "MIN",   "MAX"};
  return kWords;
}

Vocabulary::Vocabulary() {
  eos_ = add(kEosSurface);
  for (auto kw : sql_keywords()) add(kw);
  for (char c : std::string_view(" ()',.*=!<>+-/_;")) add(std::string(1, c));
  for (char c = '0'; c <= '9'; ++c) add(std::string(1, c));
}

TokenId Vocabulary::add(std::string_view surface) {
  if (surface.empty()) throw Untokenizable("empty vocabulary entry");
  auto it = index_.find(surface);
  if (it != index_.end()) return it->second;
  auto id = static_cast<TokenId>(surfaces_.size());
  surfaces_.emplace_back(surface);
  classes_.push_back(classify(surface));
  index_.emplace(std::string(surface), id);
  return id;
}

std::size_t Vocabulary::add_text(std::string_view text) {
  std::size_t before = size();
  for (const auto& piece : split_pieces(text)) add(piece);
  return size() - before;
}

Vocabulary Vocabulary::build(std::span<const DatabaseSchema> schemas, std::span<const std::string> extra_texts) {
  Vocabulary v;
  for (const auto& s : schemas) {
    for (const auto& t : s.tables()) {
      v.add_text(t.name);
      for (const auto& c : t.columns) {
        v.add_text(c.name);
        if (c.sample_values)
          for (const auto& val : *c.sample_values) v.add_text(val);
      }
    }
  }
  for (const auto& text : extra_texts) v.add_text(text);
  return v;
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = index_.find(surface);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  std::vector<TokenId> out;
  for (const auto& piece : split_pieces(text)) {
    auto id = find(piece);
    if (!id) throw Untokenizable("piece '" + piece + "' of '" + std::string(text) + "' is not in the vocabulary");
    out.push_back(*id);
  }
  return out;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (auto id : ids)
    if (id != eos_) out += surfaces_.at(id);
  return out;
}

bool Vocabulary::is_keyword(TokenId id) const {
  const auto& s = surfaces_.at(id);
  auto kws = sql_keywords();
  return std::find(kws.begin(), kws.end(), s) != kws.end();
}

nlohmann::json Vocabulary::to_json() const {
  return {{"tokenizer", kTokenizerTag}, {"eos_id", eos_}, {"tokens", surfaces_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("tokens") || !doc.at("tokens").is_array())
    throw MalformedDocument("vocabulary document needs a tokens array");
  if (doc.value("tokenizer", std::string(kTokenizerTag)) != kTokenizerTag)
    throw MalformedDocument("vocabulary uses an unknown tokenizer");
  Vocabulary v;
  v.surfaces_.clear();
  v.classes_.clear();
  v.index_.clear();
  for (const auto& t : doc.at("tokens")) {
    auto before = v.size();
    v.add(t.get<std::string>());
    if (v.size() == before) throw MalformedDocument("duplicate vocabulary entry " + t.get<std::string>());
  }
  auto eos = v.find(kEosSurface);
  if (!eos) throw MalformedDocument("vocabulary has no end-of-sequence entry");
  v.eos_ = *eos;
  if (doc.contains("eos_id") && doc.at("eos_id").get<TokenId>() != v.eos_)
    throw MalformedDocument("vocabulary eos_id disagrees with token list");
  return v;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vocabulary " + path);
  out << to_json().dump() << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedDocument("cannot open vocabulary " + path);
  return from_json(nlohmann::json::parse(in));
}

}  // namespace structsql
