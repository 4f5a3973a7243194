// Copyright 2026 The LEGIT Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// legit_toy_victim: a stdin/stdout victim classifier.
//
//   legit_toy_victim --train corpus.jsonl [--save model.json]
//   legit_toy_victim --model model.json
//
// Reads {"id", "text"} lines on stdin and writes {"id", "scores"} lines.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "legit/attack.h"
#include "legit/error.h"
#include "legit/image_io.h"
#include "legit/victim.h"

int main(int argc, char** argv) {
  using nlohmann::json;
  CLI::App app{"Toy n-gram victim speaking the JSONL victim protocol"};
  std::string train_path, model_path, save_path, label = "toxic";
  uint64_t seed = 0;
  auto* src = app.add_option_group("source");
  src->add_option("--train", train_path, "Labeled corpus JSONL to train on");
  src->add_option("--model", model_path, "Saved model JSON");
  src->require_option(1);
  app.add_option("--save", save_path, "Write the trained model here");
  app.add_option("--label", label, "Label to train on")->capture_default_str();
  app.add_option("--seed", seed, "Training seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<legit::ToyNgramVictim> victim;
    if (!train_path.empty()) {
      std::vector<std::string> texts;
      std::vector<bool> labels;
      for (const auto& e : legit::LoadCorpus(train_path)) {
        texts.push_back(e.text);
        auto it = e.labels.find(label);
        labels.push_back(it != e.labels.end() && it->second);
      }
      legit::ToyVictimConfig cfg;
      cfg.seed = seed;
      cfg.label = label;
      victim = legit::ToyNgramVictim::Train(texts, labels, cfg);
      if (!save_path.empty()) legit::WriteFile(save_path, victim->ToJson().dump() + "\n");
    } else {
      victim = legit::ToyNgramVictim::FromJson(json::parse(legit::ReadFile(model_path)));
    }

    std::string line;
    while (std::getline(std::cin, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json req = json::parse(line);
      const auto scores = victim->Predict({req.at("text").get<std::string>()});
      std::cout << json{{"id", req.at("id")}, {"scores", scores[0]}}.dump() << "\n";
    }
  } catch (const legit::Error& e) {
    std::cerr << "legit_toy_victim: " << legit::ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "legit_toy_victim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
