#include "structsql/dataset.h"

#include <fstream>

#include "structsql/error.h"

namespace structsql {

std::size_t Dataset::question_count() const {
  std::size_t n = 0;
  for (const auto& i : interactions) n += i.turns.size();
  return n;
}

namespace {

std::string string_field(const nlohmann::json& obj, const char* name, std::size_t index) {
  auto it = obj.find(name);
  if (it == obj.end() || !it->is_string())
    throw MalformedDocument("dataset entry " + std::to_string(index) + " lacks string field '" + name + "'");
  return it->get<std::string>();
}

}  // namespace

Dataset load_dataset(const nlohmann::json& doc) {
  if (!doc.is_array()) throw MalformedDocument("dataset must be a JSON array");
  Dataset out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    if (!e.is_object()) throw MalformedDocument("dataset entry " + std::to_string(i) + " is not an object");
    if (e.contains("interaction")) {
      Interaction inter;
      inter.db_id = string_field(e, "database_id", i);
      inter.id = e.contains("id") && e["id"].is_string() ? e["id"].get<std::string>() : "interaction-" + std::to_string(i);
      const auto& turns = e["interaction"];
      if (!turns.is_array() || turns.empty())
        throw MalformedDocument("dataset entry " + std::to_string(i) + " has no turns");
      for (const auto& t : turns) {
        if (!t.is_object()) throw MalformedDocument("turn in entry " + std::to_string(i) + " is not an object");
        inter.turns.push_back({string_field(t, "utterance", i), string_field(t, "query", i)});
      }
      out.interactions.push_back(std::move(inter));
      continue;
    }
    std::string db = string_field(e, "db_id", i);
    Turn turn{string_field(e, "question", i), string_field(e, "query", i)};
    std::string id = e.contains("interaction_id") && e["interaction_id"].is_string()
                         ? e["interaction_id"].get<std::string>()
                         : "q-" + std::to_string(i);
    if (!out.interactions.empty() && out.interactions.back().id == id && out.interactions.back().db_id == db) {
      out.interactions.back().turns.push_back(std::move(turn));
    } else {
      out.interactions.push_back({id, db, {std::move(turn)}});
    }
  }
  return out;
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedDocument("cannot open dataset " + path);
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw MalformedDocument("dataset " + path + " is not valid JSON");
  return load_dataset(doc);
}

nlohmann::json to_json(const Dataset& dataset) {
  auto doc = nlohmann::json::array();
  for (const auto& inter : dataset.interactions) {
    auto turns = nlohmann::json::array();
    for (const auto& t : inter.turns) turns.push_back({{"utterance", t.question}, {"query", t.sql}});
    doc.push_back({{"id", inter.id}, {"database_id", inter.db_id}, {"interaction", std::move(turns)}});
  }
  return doc;
}

}  // namespace structsql
