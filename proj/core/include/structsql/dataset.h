#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace structsql {

struct Turn {
  std::string question;
  std::string sql;
};

struct Interaction {
  std::string id;
  std::string db_id;
  std::vector<Turn> turns;
};

struct Dataset {
  std::vector<Interaction> interactions;
  std::size_t question_count() const;
};

/// Accepts two layouts:
///   single-turn: [{"db_id", "question", "query", optional "interaction_id"}]
///     (consecutive entries sharing an interaction_id form one interaction)
///   multi-turn:  [{"database_id", "interaction": [{"utterance", "query"}],
///                  optional "id"}]
/// Throws MalformedDocument.
Dataset load_dataset(const nlohmann::json& doc);
Dataset load_dataset_file(const std::string& path);

/// Multi-turn layout with explicit ids.
nlohmann::json to_json(const Dataset& dataset);

}  // namespace structsql
