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

// legit: command line entry point for the LEGIT toolkit.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "legit/annotation_http.h"
#include "legit/annotation_service.h"
#include "legit/attack.h"
#include "legit/baselines.h"
#include "legit/config.h"
#include "legit/dataset.h"
#include "legit/error.h"
#include "legit/evaluation.h"
#include "legit/glyph_atlas.h"
#include "legit/image_io.h"
#include "legit/perturber.h"
#include "legit/recovery.h"
#include "legit/scorer.h"
#include "legit/similarity_index.h"
#include "legit/utf8.h"
#include "legit/victim.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace legit {
namespace {

// Flags that override config keys. Filled by CLI11, applied after the
// config file is read.
struct Overrides {
  std::map<std::string, std::string> values;
  void Bind(CLI::App* app, const std::string& flag, const std::string& key,
            const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
};

struct Context {
  Config config = Config::Defaults();
  bool json_errors = false;
  bool quiet = false;
  std::string command_line;

  std::unique_ptr<GlyphAtlas> atlas;
  std::unique_ptr<ImgDotSpace> imgdot;
  std::unique_ptr<CodepointSet> set;

  FontConfig Font() const {
    FontConfig f;
    f.font_file = config.GetString("font.file");
    f.glyph_px = static_cast<int>(config.GetInt("font.glyph_px"));
    f.canvas_w = static_cast<int>(config.GetInt("font.canvas_w"));
    f.canvas_h = static_cast<int>(config.GetInt("font.canvas_h"));
    return f;
  }
  const GlyphAtlas& Atlas() {
    if (!atlas) atlas = std::make_unique<GlyphAtlas>(Font());
    return *atlas;
  }
  const ImgDotSpace& ImgDot() {
    if (!imgdot) imgdot = std::make_unique<ImgDotSpace>(Atlas());
    return *imgdot;
  }
  const CodepointSet& Set() {
    if (!set) {
      set = std::make_unique<CodepointSet>(
          Atlas().BuildCodepointSet(ParseCodepoint(config.GetString("codepoints.first")),
                                    ParseCodepoint(config.GetString("codepoints.last"))));
    }
    return *set;
  }
  uint64_t Seed() const { return config.GetUint("seed"); }
  unsigned Threads() const { return static_cast<unsigned>(config.GetUint("threads")); }
  ParamPrior Prior() const {
    return {config.GetDouble("perturb.mu_k"), config.GetDouble("perturb.var_k"),
            config.GetDouble("perturb.mu_n"), config.GetDouble("perturb.var_n")};
  }

  // ImgDot table over the given query rows, or the saved table at
  // paths.table when one is configured.
  NeighborTable ImgDotTable(const std::vector<char32_t>& rows) {
    const std::string path = config.GetString("paths.table");
    if (!path.empty()) return NeighborTable::Load(path, "imgdot");
    IndexOptions options;
    options.top = config.GetUint("index.top");
    options.threads = Threads();
    for (char32_t cp : rows) {
      if (Set().Contains(cp)) options.rows.push_back(cp);
    }
    return BuildImgDotTable(Atlas(), Set(), options);
  }

  void PrintEffectiveConfig() const {
    if (quiet) return;
    std::cerr << "# effective configuration\n# command: " << command_line << "\n"
              << config.ToString() << "# end configuration\n";
  }
};

std::vector<char32_t> AsciiLetters() {
  std::vector<char32_t> out;
  for (char32_t c = 'A'; c <= 'Z'; ++c) out.push_back(c);
  for (char32_t c = 'a'; c <= 'z'; ++c) out.push_back(c);
  return out;
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::vector<std::string> out;
  std::istringstream in(ReadFile(path));
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

std::vector<double> ParseLevels(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "bad n level '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "no n levels given");
  return out;
}

Split SplitArg(const std::string& s) { return ParseSplit(s); }

void PrintJson(const json& j) { std::cout << j.dump(2) << "\n"; }

// --------------------------------------------------------------------------

struct ExtractorBundle {
  std::unique_ptr<NeighborTable> rank1;
  std::unique_ptr<EmbeddingSpace> external;
  std::unique_ptr<FeatureExtractor> extractor;
};

ExtractorBundle MakeExtractor(Context& ctx, const FeatureConfig& features,
                              const std::string& embeddings_path) {
  ExtractorBundle b;
  if (features.rank1) b.rank1 = std::make_unique<NeighborTable>(ctx.ImgDotTable(AsciiLetters()));
  if (features.external) {
    if (embeddings_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "model uses external embeddings; pass --embeddings");
    }
    b.external = std::make_unique<EmbeddingSpace>(LoadEmbeddings(embeddings_path, ctx.Set()));
  }
  b.extractor = std::make_unique<FeatureExtractor>(ctx.ImgDot(), b.rank1.get(), b.external.get());
  return b;
}

// --------------------------------------------------------------------------
// Subcommands

void CmdRender(Context& ctx, const std::string& text, const std::string& codepoint,
               const std::string& out) {
  ctx.PrintEffectiveConfig();
  GlyphBitmap bmp;
  if (!codepoint.empty()) {
    bmp = ctx.Atlas().RenderGlyph(ParseCodepoint(codepoint));
  } else {
    bmp = ctx.Atlas().RenderString(DecodeUtf8(text));
  }
  const bool pgm = fs::path(out).extension() == ".pgm";
  WriteFile(out, pgm ? EncodePgm(bmp) : EncodePng(bmp));
  PrintJson({{"width", bmp.width}, {"height", bmp.height}, {"ink", bmp.InkCount()}, {"out", out}});
}

void CmdIndexBuild(Context& ctx, const std::string& embeddings, bool ascii_rows,
                   const std::string& out) {
  ctx.PrintEffectiveConfig();
  IndexOptions options;
  options.top = ctx.config.GetUint("index.top");
  options.threads = ctx.Threads();
  if (ascii_rows) {
    for (char32_t cp : AsciiLetters()) {
      if (ctx.Set().Contains(cp)) options.rows.push_back(cp);
    }
  }
  NeighborTable table;
  if (embeddings.empty()) {
    table = BuildImgDotTable(ctx.Atlas(), ctx.Set(), options);
  } else {
    table = BuildNeighborTable(LoadEmbeddings(embeddings, ctx.Set()), ctx.Set(), options);
  }
  table.Save(out);
  PrintJson({{"model", table.model_id()}, {"rows", table.codepoints().size()},
             {"candidates", ctx.Set().size()}, {"top", options.top}, {"out", out}});
}

void CmdPerturb(Context& ctx, const std::string& word, double n, int k, const std::string& model,
                const std::string& embeddings) {
  ctx.PrintEffectiveConfig();
  const std::u32string w = DecodeUtf8(word);
  std::vector<char32_t> rows(w.begin(), w.end());
  NeighborTable table;
  if (model == "imgdot") {
    table = ctx.ImgDotTable(rows);
  } else {
    if (embeddings.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "model '" + model + "' needs --embeddings");
    }
    IndexOptions options;
    options.top = ctx.config.GetUint("index.top");
    options.rows = rows;
    const EmbeddingMatrix emb = LoadEmbeddings(embeddings, ctx.Set());
    if (emb.model_id != model) {
      throw Error(ErrorCode::kInvalidArgument,
                  "embedding file holds model '" + emb.model_id + "', not '" + model + "'");
    }
    table = BuildNeighborTable(emb, ctx.Set(), options);
  }
  PerturbParams phi{n, k, model};
  phi.Validate();
  PrintJson(ToJson(PerturbWord(w, phi, table, ctx.Seed())));
}

void CmdDatasetDerive(Context& ctx, const std::string& data, const std::string& out_dir) {
  ctx.PrintEffectiveConfig();
  const LegitDataset ds = IngestLegit(data);
  fs::create_directories(out_dir);
  std::string cls, rnk;
  for (const auto& e : ds.classification) cls += ToJson(e).dump() + "\n";
  for (const auto& e : ds.ranking) rnk += ToJson(e).dump() + "\n";
  WriteFile((fs::path(out_dir) / "classification.jsonl").string(), cls);
  WriteFile((fs::path(out_dir) / "ranking.jsonl").string(), rnk);
  PrintJson(StatsReport(ds));
}

void CmdDatasetStats(Context& ctx, const std::string& data, bool strict) {
  ctx.PrintEffectiveConfig();
  const LegitDataset ds = IngestLegit(data);
  PrintJson(StatsReport(ds));
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
  if (strict && !ds.warnings.empty()) {
    throw Error(ErrorCode::kSchemaMismatch,
                std::to_string(ds.warnings.size()) + " reference-statistic mismatches");
  }
}

void CmdDatasetHard(Context& ctx, const std::string& data, const std::string& task,
                    const std::string& split) {
  ctx.PrintEffectiveConfig();
  const LegitDataset ds = IngestLegit(data);
  const Split s = SplitArg(split);
  if (task == "classification") {
    std::vector<ClassificationExample> in;
    for (const auto& e : ds.classification) {
      if (e.split == s) in.push_back(e);
    }
    for (const auto& e : HardClassificationSubset(in)) std::cout << ToJson(e).dump() << "\n";
  } else {
    std::vector<RankingExample> in;
    for (const auto& e : ds.ranking) {
      if (e.split == s) in.push_back(e);
    }
    for (const auto& e : HardRankingSubset(in)) std::cout << ToJson(e).dump() << "\n";
  }
}

void CmdDatasetSynth(Context& ctx, const std::string& vocab_path, double threshold,
                     size_t pairs_per_word, const std::string& out) {
  ctx.PrintEffectiveConfig();
  const auto vocab = FilterVocab(ReadLines(vocab_path));
  const NeighborTable table = ctx.ImgDotTable(AsciiLetters());
  SynthConfig cfg;
  cfg.threshold = threshold;
  cfg.pairs_per_word = pairs_per_word;
  cfg.seed = ctx.Seed();
  const auto pairs = SynthesizeAnnotations(vocab, {{"imgdot", &table}}, ctx.ImgDot(), cfg);
  WriteFile(out, FormatAnnotationsJsonl(pairs));
  PrintJson(StatsReport(BuildDataset(pairs)));
}

void CmdTrain(Context& ctx, const std::string& data, const std::string& out,
              const std::string& embeddings, bool no_rank1) {
  ctx.PrintEffectiveConfig();
  const LegitDataset ds = IngestLegit(data);
  FeatureConfig features;
  features.rank1 = !no_rank1;
  features.external = !embeddings.empty();
  ExtractorBundle fx = MakeExtractor(ctx, features, embeddings);
  const auto train = MakeTrainExamples(ds, Split::kTrain, *fx.extractor);
  const auto val = MakeTrainExamples(ds, Split::kVal, *fx.extractor);
  const std::string kind = ctx.config.GetString("train.kind");
  LegibilityScorer model =
      kind == "linear"
          ? LegibilityScorer::Linear(features)
          : kind == "mlp" ? LegibilityScorer::Mlp(features, ctx.config.GetUint("train.hidden"),
                                                  ctx.config.GetDouble("train.dropout"), ctx.Seed())
                          : throw Error(ErrorCode::kInvalidArgument,
                                        "train.kind must be linear or mlp, got '" + kind + "'");
  TrainConfig tc;
  tc.learning_rate = ctx.config.GetDouble("train.learning_rate");
  tc.batch_size = ctx.config.GetUint("train.batch_size");
  tc.max_epochs = ctx.config.GetUint("train.max_epochs");
  tc.patience = ctx.config.GetUint("train.patience");
  tc.weight_decay = ctx.config.GetDouble("train.weight_decay");
  tc.seed = ctx.Seed();
  const TrainHistory h = Train(model, train, val, tc);
  model.Save(out);
  PrintJson({{"out", out},
             {"train_examples", train.size()},
             {"val_examples", val.size()},
             {"epochs", h.val_loss.size()},
             {"best_epoch", h.best_epoch},
             {"best_val_loss", h.best_val_loss},
             {"train_loss", h.train_loss},
             {"val_loss", h.val_loss}});
}

void CmdEval(Context& ctx, const std::string& model_spec, const std::string& task,
             const std::string& data, const std::string& split, const std::string& embeddings) {
  ctx.PrintEffectiveConfig();
  const LegitDataset ds = IngestLegit(data);
  std::unique_ptr<TaskModel> model;
  std::unique_ptr<EmbeddingSpace> emb;
  std::optional<LegibilityScorer> scorer;
  ExtractorBundle fx;
  if (model_spec == "baseline:majority") {
    model = MakeMajorityModel();
  } else if (model_spec == "baseline:logreg") {
    model = MakeLogRegModel(false);
  } else if (model_spec == "baseline:logreg+model") {
    model = MakeLogRegModel(true);
  } else if (model_spec == "baseline:imgdot") {
    model = MakeDistanceModel(model_spec, ctx.ImgDot());
  } else if (model_spec.rfind("baseline:embedding:", 0) == 0) {
    emb = std::make_unique<EmbeddingSpace>(
        LoadEmbeddings(model_spec.substr(std::string("baseline:embedding:").size()), ctx.Set()));
    model = MakeDistanceModel(model_spec, *emb);
  } else if (model_spec.rfind("scorer:", 0) == 0) {
    scorer = LegibilityScorer::Load(model_spec.substr(7));
    fx = MakeExtractor(ctx, scorer->features(), embeddings);
    model = MakeScorerModel(*scorer, *fx.extractor);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown model '" + model_spec +
                    "' (baseline:majority, baseline:logreg, baseline:logreg+model, "
                    "baseline:imgdot, baseline:embedding:<file>, scorer:<model.json>)");
  }
  const EvalTask t = task == "classification" ? EvalTask::kClassification
                     : task == "ranking"      ? EvalTask::kRanking
                                              : EvalTask::kBoth;
  model->Fit(ds);
  json j = ToJson(EvaluateModel(*model, ds, SplitArg(split), t));
  j["model"] = model_spec;
  j["split"] = split;
  PrintJson(j);
}

void CmdAttackRun(Context& ctx, const std::string& corpus_path, const std::string& victim_spec,
                  const std::string& scorer_path, const std::string& levels_text,
                  const std::string& out_dir, const std::string& embeddings) {
  ctx.PrintEffectiveConfig();
  const auto corpus = LoadCorpus(corpus_path);
  std::vector<std::string> texts;
  std::vector<bool> labels;
  for (const auto& e : corpus) {
    texts.push_back(e.text);
    labels.push_back(e.labels.count("toxic") ? e.labels.at("toxic") : false);
  }
  std::unique_ptr<Victim> victim;
  if (victim_spec == "toy") {
    ToyVictimConfig tc;
    tc.seed = ctx.Seed();
    victim = std::make_unique<ToyNgramVictim>(ToyNgramVictim::Train(texts, labels, tc));
  } else {
    victim = MakeVictim(victim_spec);
  }
  const LegibilityScorer scorer = LegibilityScorer::Load(scorer_path);
  ExtractorBundle fx = MakeExtractor(ctx, scorer.features(), embeddings);
  const NeighborTable table = ctx.ImgDotTable(AsciiLetters());
  const FeatureExtractor& extractor = *fx.extractor;
  LegibilityFn legibility = [&](std::u32string_view w, std::u32string_view wi) {
    return scorer.Score(extractor.Extract(w, wi));
  };

  CorpusAttackConfig cfg;
  cfg.prior = ctx.Prior();
  cfg.prior.mu_k = ctx.config.GetDouble("attack.mu_k");
  cfg.prior.var_k = ctx.config.GetDouble("attack.var_k");
  cfg.max_k = static_cast<int>(ctx.config.GetInt("attack.max_k"));
  cfg.threshold = ctx.config.GetDouble("attack.threshold");
  cfg.max_resamples = static_cast<int>(ctx.config.GetInt("attack.max_resamples"));
  cfg.seed = ctx.Seed();
  cfg.threads = std::max(1u, ctx.Threads());
  const std::vector<double> levels = ParseLevels(levels_text);
  std::vector<PerturbedCorpus> outputs;
  const std::vector<DegradationReport> reports =
      RunAttackLevels(corpus, *victim, cfg, levels, {{"imgdot", &table}}, legibility, &outputs);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    for (size_t l = 0; l < levels.size(); ++l) {
      std::string lines;
      for (size_t i = 0; i < outputs[l].texts.size(); ++i) {
        json row = {{"id", i}, {"text", outputs[l].texts[i]}};
        for (const auto& [k, v] : corpus[i].labels) row["labels"][k] = v;
        lines += row.dump() + "\n";
      }
      char name[64];
      std::snprintf(name, sizeof name, "perturbed_n%.2f.jsonl", levels[l]);
      WriteFile((fs::path(out_dir) / name).string(), lines);
    }
  }
  json out = json::array();
  for (const auto& r : reports) out.push_back(ToJson(r));
  if (!out_dir.empty()) {
    WriteFile((fs::path(out_dir) / "degradation.csv").string(), DegradationCsv(reports));
    WriteFile((fs::path(out_dir) / "degradation.json").string(), out.dump(2) + "\n");
  }
  PrintJson({{"victim", victim->name()}, {"reports", out}});
}

void CmdRecoveryRun(Context& ctx, const std::string& vocab_path, const std::string& pairs_path,
                    const std::string& recoverer_spec, const std::string& levels_text) {
  ctx.PrintEffectiveConfig();
  const auto vocab = FilterVocab(ReadLines(vocab_path));
  const auto levels = ParseLevels(levels_text);
  std::vector<RecoveryPair> pairs;
  if (!pairs_path.empty()) {
    for (const auto& line : ReadLines(pairs_path)) {
      const auto j = json::parse(line);
      pairs.push_back({j.at("w").get<std::string>(), j.at("wi").get<std::string>(),
                       j.at("n").get<double>()});
    }
  } else {
    const NeighborTable table = ctx.ImgDotTable(AsciiLetters());
    pairs = GenerateRecoveryPairs(vocab, ctx.Prior(), levels, table, ctx.Seed());
  }
  std::unique_ptr<Recoverer> recoverer;
  if (recoverer_spec == "dictionary") {
    recoverer = std::make_unique<DictionaryRecoverer>(vocab, ctx.ImgDot());
  } else if (recoverer_spec.rfind("cmd:", 0) == 0) {
    recoverer = std::make_unique<ExternalCommandRecoverer>(recoverer_spec.substr(4));
  } else {
    throw Error(ErrorCode::kInvalidArgument, "recoverer must be dictionary or cmd:<command>");
  }
  json out = json::array();
  for (const auto& r : EvaluateRecovery(pairs, *recoverer, levels)) out.push_back(ToJson(r));
  PrintJson({{"pairs", pairs.size()}, {"reports", out}});
}

AnnotationHttpServer* g_server = nullptr;

void CmdServe(Context& ctx) {
  ctx.PrintEffectiveConfig();
  ServiceConfig sc;
  const std::string vocab = ctx.config.GetString("serve.vocab");
  if (vocab.empty()) throw Error(ErrorCode::kInvalidArgument, "serve.vocab (--vocab) is required");
  sc.vocab = ReadLines(vocab);
  const std::string gold = ctx.config.GetString("serve.gold");
  if (!gold.empty()) sc.gold = ParseGoldJsonl(ReadFile(gold));
  sc.gold_rate = ctx.config.GetDouble("serve.gold_rate");
  sc.min_gold_attempts = ctx.config.GetUint("serve.min_gold_attempts");
  sc.min_gold_accuracy = ctx.config.GetDouble("serve.min_gold_accuracy");
  sc.batch_size = ctx.config.GetUint("serve.batch_size");
  sc.words_per_round = ctx.config.GetUint("serve.words_per_round");
  sc.seed = ctx.Seed();
  const NeighborTable table = ctx.ImgDotTable(AsciiLetters());
  ServiceResources res;
  res.tables = {{"imgdot", &table}};
  res.atlas = &ctx.Atlas();
  AnnotationService service(sc, res, ctx.config.GetString("serve.log"));
  AnnotationHttpServer server(service, ctx.config.GetString("serve.admin_token"));
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->Stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->Stop();
  });
  const std::string host = ctx.config.GetString("serve.host");
  const int port = static_cast<int>(ctx.config.GetInt("serve.port"));
  std::cerr << "serving on http://" << host << ":" << port << "\n";
  server.Run(host, port);
  g_server = nullptr;
}

void ReportError(const Context& ctx, std::string_view code, const std::string& message) {
  if (ctx.json_errors) {
    std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
  } else {
    std::cerr << "legit: " << code << ": " << message << "\n";
  }
}

int Main(int argc, char** argv) {
  Context ctx;
  for (int i = 0; i < argc; ++i) ctx.command_line += (i ? " " : "") + std::string(argv[i]);

  CLI::App app{"LEGIT toolkit: homoglyph perturbation, legibility scoring and annotation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  Overrides ov;
  app.add_option("--config", config_path, "Key/value config file (default: $LEGIT_CONFIG)");
  app.add_flag("--json", ctx.json_errors, "Print errors as JSON on stderr");
  app.add_flag("-q,--quiet", ctx.quiet, "Do not print the effective configuration");
  ov.Bind(&app, "--seed", "seed", "Master random seed");
  ov.Bind(&app, "--threads", "threads", "Worker threads (0 = all cores)");
  ov.Bind(&app, "--font", "font.file", "Unifont .hex file");
  ov.Bind(&app, "--glyph-px", "font.glyph_px", "Glyph size in pixels");
  ov.Bind(&app, "--table", "paths.table", "Precomputed ImgDot neighbor table (JSONL)");
  ov.Bind(&app, "--top", "index.top", "Neighbors kept per codepoint (0 = all)");
  ov.Bind(&app, "--first", "codepoints.first", "First codepoint of the candidate set");
  ov.Bind(&app, "--last", "codepoints.last", "Last codepoint of the candidate set");

  // render
  auto* render = app.add_subcommand("render", "Render a codepoint or a string to PNG/PGM");
  std::string r_text, r_cp, r_out;
  auto* r_group = render->add_option_group("input");
  r_group->add_option("--text", r_text, "UTF-8 text");
  r_group->add_option("--codepoint", r_cp, "Single codepoint, e.g. U+0041");
  r_group->require_option(1);
  render->add_option("--out", r_out, "Output file (.png or .pgm)")->required();

  // index build
  auto* index = app.add_subcommand("index", "Neighbor tables");
  index->require_subcommand(1);
  index->fallthrough();
  auto* index_build = index->add_subcommand("build", "Build a neighbor table");
  std::string ib_emb, ib_out;
  bool ib_ascii = false;
  index_build->add_option("--embeddings", ib_emb, "Embedding file (default: ImgDot)");
  index_build->add_flag("--ascii-rows", ib_ascii, "Only build rows for ASCII letters");
  index_build->add_option("--out", ib_out, "Output JSONL")->required();

  // perturb
  auto* perturb = app.add_subcommand("perturb", "Perturb one word");
  std::string p_word, p_model = "imgdot", p_emb;
  double p_n = 0.5;
  int p_k = 1;
  perturb->add_option("--word", p_word, "Word to perturb")->required();
  perturb->add_option("--n", p_n, "Fraction of characters to replace")->required();
  perturb->add_option("--k", p_k, "Neighbor rank")->required();
  perturb->add_option("--model", p_model, "Embedding model id")->capture_default_str();
  perturb->add_option("--embeddings", p_emb, "Embedding file for non-ImgDot models");
  ov.Bind(perturb, "--seed", "seed", "Random seed");

  // dataset
  auto* dataset = app.add_subcommand("dataset", "LEGIT annotation datasets");
  dataset->require_subcommand(1);
  dataset->fallthrough();
  std::string d_data, d_out, d_task = "classification", d_split = "test", d_vocab;
  bool d_strict = false;
  double d_threshold = 0.1;
  size_t d_ppw = 1;
  auto* d_derive = dataset->add_subcommand("derive", "Write classification and ranking views");
  d_derive->add_option("--data", d_data, "Annotation JSONL file or directory")->required();
  d_derive->add_option("--out-dir", d_out, "Output directory")->required();
  auto* d_stats = dataset->add_subcommand("stats", "Dataset statistics");
  d_stats->add_option("--data", d_data, "Annotation JSONL file or directory")->required();
  auto* d_ingest = dataset->add_subcommand("ingest", "Statistics checked against the reference");
  d_ingest->add_option("--data", d_data, "Annotation JSONL file or directory")->required();
  d_ingest->add_flag("--strict", d_strict, "Fail on any reference mismatch");
  auto* d_hard = dataset->add_subcommand("hard", "Print a hard subset as JSONL");
  d_hard->add_option("--data", d_data, "Annotation JSONL file or directory")->required();
  d_hard->add_option("--task", d_task, "classification or ranking")->capture_default_str()
      ->check(CLI::IsMember({"classification", "ranking"}));
  d_hard->add_option("--split", d_split, "train, val or test")->capture_default_str();
  auto* d_synth = dataset->add_subcommand("synth", "Synthetic annotations with a distance rule");
  d_synth->add_option("--vocab", d_vocab, "Word list")->required();
  d_synth->add_option("--threshold", d_threshold, "Mean-distance legibility cutoff")->capture_default_str();
  d_synth->add_option("--pairs-per-word", d_ppw, "Pairs generated per word")->capture_default_str();
  d_synth->add_option("--out", d_out, "Output JSONL")->required();
  ov.Bind(d_synth, "--seed", "seed", "Random seed");

  // train
  auto* train = app.add_subcommand("train", "Train a legibility scorer");
  std::string t_data, t_out, t_emb;
  bool t_no_rank1 = false;
  train->add_option("--data", t_data, "Annotation JSONL file or directory")->required();
  train->add_option("--out", t_out, "Model JSON")->required();
  train->add_option("--embeddings", t_emb, "External embeddings for extra features");
  train->add_flag("--no-rank1", t_no_rank1, "Drop the rank-1 substitution count feature");
  ov.Bind(train, "--kind", "train.kind", "linear or mlp");
  ov.Bind(train, "--hidden", "train.hidden", "MLP hidden units");
  ov.Bind(train, "--dropout", "train.dropout", "MLP dropout");
  ov.Bind(train, "--lr", "train.learning_rate", "Learning rate");
  ov.Bind(train, "--epochs", "train.max_epochs", "Maximum epochs");
  ov.Bind(train, "--seed", "seed", "Random seed");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a dataset split");
  std::string e_model, e_task = "both", e_data, e_split = "test", e_emb;
  eval->add_option("--model", e_model, "baseline:majority|logreg|imgdot, scorer:<file>, ...")
      ->required();
  eval->add_option("--task", e_task, "classification, ranking or both")->capture_default_str()
      ->check(CLI::IsMember({"classification", "ranking", "both"}));
  eval->add_option("--data", e_data, "Annotation JSONL file or directory")->required();
  eval->add_option("--split", e_split, "Evaluation split")->capture_default_str();
  eval->add_option("--embeddings", e_emb, "External embeddings for scorer features");

  // attack run
  auto* attack = app.add_subcommand("attack", "Attack a victim classifier");
  attack->require_subcommand(1);
  attack->fallthrough();
  auto* attack_run = attack->add_subcommand("run", "Perturb a corpus and measure degradation");
  std::string a_corpus, a_victim = "toy", a_scorer, a_levels = "0.3,0.7,1.0", a_out, a_emb;
  attack_run->add_option("--corpus", a_corpus, "Labeled corpus JSONL")->required();
  attack_run->add_option("--victim", a_victim, "toy, cmd:<command> or http:<url>")->capture_default_str();
  attack_run->add_option("--scorer", a_scorer, "Scorer model used as the legibility filter")
      ->required();
  attack_run->add_option("--n-levels", a_levels, "Comma-separated n values")->capture_default_str();
  attack_run->add_option("--out-dir", a_out, "Directory for CSV/JSON reports");
  attack_run->add_option("--embeddings", a_emb, "External embeddings for scorer features");
  ov.Bind(attack_run, "--threshold", "attack.threshold", "Legibility score threshold");
  ov.Bind(attack_run, "--seed", "seed", "Random seed");

  // recovery run
  auto* recovery = app.add_subcommand("recovery", "Perturbation recovery");
  recovery->require_subcommand(1);
  recovery->fallthrough();
  auto* recovery_run = recovery->add_subcommand("run", "Recover perturbed words");
  std::string rc_vocab, rc_pairs, rc_recoverer = "dictionary", rc_levels = "0.3,0.7,1.0";
  recovery_run->add_option("--vocab", rc_vocab, "Word list")->required();
  recovery_run->add_option("--pairs", rc_pairs, "JSONL of {w, wi, n}; default: generate");
  recovery_run->add_option("--recoverer", rc_recoverer, "dictionary or cmd:<command>")->capture_default_str();
  recovery_run->add_option("--n-levels", rc_levels, "Comma-separated n values")->capture_default_str();
  ov.Bind(recovery_run, "--seed", "seed", "Random seed");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  ov.Bind(serve, "--vocab", "serve.vocab", "Word list");
  ov.Bind(serve, "--gold", "serve.gold", "Gold pairs JSONL");
  ov.Bind(serve, "--log", "serve.log", "Event log path");
  ov.Bind(serve, "--host", "serve.host", "Bind address");
  ov.Bind(serve, "--port", "serve.port", "Port");
  ov.Bind(serve, "--admin-token", "serve.admin_token", "Token for /admin endpoints");
  ov.Bind(serve, "--gold-rate", "serve.gold_rate", "Expected gold items per batch slot");
  ov.Bind(serve, "--seed", "seed", "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (ctx.json_errors) {
      std::cerr << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
    }
    return 2;
  }

  try {
    ctx.config.Merge(Config::Load(config_path));
    for (const auto& [k, v] : ov.values) ctx.config.Set(k, v);
    for (const auto& key : ctx.config.UnknownKeys()) {
      std::cerr << "warning: unknown config key '" << key << "'\n";
    }

    if (render->parsed()) {
      CmdRender(ctx, r_text, r_cp, r_out);
    } else if (index_build->parsed()) {
      CmdIndexBuild(ctx, ib_emb, ib_ascii, ib_out);
    } else if (perturb->parsed()) {
      CmdPerturb(ctx, p_word, p_n, p_k, p_model, p_emb);
    } else if (d_derive->parsed()) {
      CmdDatasetDerive(ctx, d_data, d_out);
    } else if (d_stats->parsed()) {
      CmdDatasetStats(ctx, d_data, false);
    } else if (d_ingest->parsed()) {
      CmdDatasetStats(ctx, d_data, d_strict);
    } else if (d_hard->parsed()) {
      CmdDatasetHard(ctx, d_data, d_task, d_split);
    } else if (d_synth->parsed()) {
      CmdDatasetSynth(ctx, d_vocab, d_threshold, d_ppw, d_out);
    } else if (train->parsed()) {
      CmdTrain(ctx, t_data, t_out, t_emb, t_no_rank1);
    } else if (eval->parsed()) {
      CmdEval(ctx, e_model, e_task, e_data, e_split, e_emb);
    } else if (attack_run->parsed()) {
      CmdAttackRun(ctx, a_corpus, a_victim, a_scorer, a_levels, a_out, a_emb);
    } else if (recovery_run->parsed()) {
      CmdRecoveryRun(ctx, rc_vocab, rc_pairs, rc_recoverer, rc_levels);
    } else if (serve->parsed()) {
      CmdServe(ctx);
    }
  } catch (const Error& e) {
    ReportError(ctx, ErrorCodeName(e.code()), e.what());
    return 1;
  } catch (const json::exception& e) {
    ReportError(ctx, "FormatError", e.what());
    return 1;
  } catch (const std::exception& e) {
    ReportError(ctx, "InternalError", e.what());
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace legit

int main(int argc, char** argv) { return legit::Main(argc, argv); }
