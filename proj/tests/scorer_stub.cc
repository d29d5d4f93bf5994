// Line-protocol scorer used by the tests. Reads records from stdin and
// answers on stdout.
//
//   scorer_stub [--size N] [--eos E] [--target 3,4,5] [--mode MODE]
//
// MODE is one of: ok, short (one score too few), nan, text (non-JSON
// reply), wrong-id, bad-hello, silent (reads score requests but never answers).
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

int main(int argc, char** argv) {
  std::size_t size = 100;
  std::size_t eos = 0;
  std::string mode = "ok";
  std::vector<std::size_t> target;
  bool have_target = false;
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string flag = argv[i], value = argv[i + 1];
    if (flag == "--size") size = std::stoul(value);
    else if (flag == "--eos") eos = std::stoul(value);
    else if (flag == "--mode") mode = value;
    else if (flag == "--target") {
      have_target = true;
      std::stringstream ss(value);
      for (std::string part; std::getline(ss, part, ',');)
        if (!part.empty()) target.push_back(std::stoul(part));
    }
  }

  std::string line;
  while (std::getline(std::cin, line)) {
    auto req = nlohmann::json::parse(line, nullptr, false);
    if (req.is_discarded()) return 3;
    nlohmann::json reply;
    if (req.value("type", "") == "hello") {
      if (mode == "bad-hello") reply = {{"type", "vocab"}, {"size", "many"}};
      else reply = {{"type", "vocab"}, {"size", size}, {"eos_id", eos}, {"tokenizer_tag", "sqlpiece-v1"}};
    } else {
      if (mode == "silent") continue;
      if (mode == "text") {
        std::cout << "not json" << std::endl;
        continue;
      }
      const auto& cands = req.at("candidates");
      std::size_t pos = req.at("prefix").size();
      std::vector<double> scores;
      for (const auto& c : cands) {
        auto id = c.get<std::size_t>();
        if (have_target) {
          std::size_t want = pos < target.size() ? target[pos] : eos;
          scores.push_back(id == want ? 0.0 : -1.0);
        } else {
          scores.push_back(-static_cast<double>(id % 7) / 7.0);
        }
      }
      if (mode == "short" && !scores.empty()) scores.pop_back();
      reply = {{"type", "scores"}, {"example_id", mode == "wrong-id" ? "other" : req.at("example_id")}};
      if (mode == "nan") reply["scores"] = std::vector<std::string>(scores.size(), "nan");
      else reply["scores"] = scores;
    }
    std::cout << reply.dump() << std::endl;
  }
  return 0;
}
