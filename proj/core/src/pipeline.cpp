#include "spearlab/pipeline.hpp"

#include <functional>

#include <nlohmann/json.hpp>

#include "spearlab/corpus.hpp"
#include "spearlab/csv.hpp"
#include "spearlab/detector.hpp"
#include "spearlab/diversity.hpp"
#include "spearlab/ensemble.hpp"
#include "spearlab/errors.hpp"
#include "spearlab/infogain.hpp"
#include "spearlab/stats.hpp"
#include "spearlab/text.hpp"
#include "spearlab/util.hpp"
#include "spearlab/variation.hpp"

namespace spearlab::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string hash_file(const fs::path& p) { return content_hash(read_file(p)); }

class ManifestWriter {
 public:
  explicit ManifestWriter(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  fs::path write(int index, const std::string& stage, const std::vector<fs::path>& inputs,
                 const std::vector<fs::path>& outputs) {
    json j;
    j["stage"] = stage;
    j["prev_manifest"] = prev_hash_;
    json in = json::array(), out = json::array();
    for (const auto& p : inputs) {
      in.push_back({{"path", p.generic_string()}, {"hash", hash_file(p)}});
    }
    for (const auto& p : outputs) {
      out.push_back({{"path", p.generic_string()}, {"hash", hash_file(p)}});
    }
    j["inputs"] = in;
    j["outputs"] = out;
    char name[32];
    std::snprintf(name, sizeof(name), "%02d_%s.json", index, stage.c_str());
    fs::path path = dir_ / name;
    std::string body = j.dump(2) + "\n";
    write_file(path, body);
    prev_hash_ = content_hash(body);
    return path;
  }

 private:
  fs::path dir_;
  std::string prev_hash_ = "none";
};

std::vector<fs::path> collect_inputs(const fs::path& p) {
  std::vector<fs::path> files;
  if (fs::is_directory(p)) {
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(p);
  }
  return files;
}

struct PipelinePaths {
  fs::path work_dir, emails, posts, seeds, gazetteer, pricing, usage, responses, ballots;
};

PipelinePaths validate_config(const Config& cfg) {
  PipelinePaths p;
  p.work_dir = cfg.require("paths.work_dir");
  p.emails = cfg.require("paths.emails");
  p.posts = cfg.require("paths.posts");
  p.seeds = cfg.require("paths.seeds");
  p.gazetteer = cfg.require("paths.gazetteer");
  p.pricing = cfg.require("paths.pricing");
  p.usage = cfg.require("paths.usage");
  p.responses = cfg.require("paths.responses");
  p.ballots = cfg.require("paths.ballots");
  for (const auto& [label, path] :
       std::initializer_list<std::pair<const char*, fs::path>>{
           {"paths.emails", p.emails},
           {"paths.posts", p.posts},
           {"paths.seeds", p.seeds},
           {"paths.gazetteer", p.gazetteer},
           {"paths.pricing", p.pricing},
           {"paths.usage", p.usage},
           {"paths.responses", p.responses},
           {"paths.ballots", p.ballots}}) {
    if (!fs::exists(path)) {
      throw ConfigInvalidError(std::string(label) + " does not exist: " + path.string());
    }
  }
  return p;
}

}  // namespace

ExitReport run_pipeline(const Config& cfg, const RunOptions& options) {
  ExitReport report;
  PipelinePaths paths;
  try {
    paths = validate_config(cfg);
  } catch (const ConfigInvalidError&) {
    report.exit_code = kExitConfigError;
    throw;
  }

  fs::create_directories(paths.work_dir);
  ManifestWriter manifests(paths.work_dir / "manifests");
  int stage_index = 0;

  auto run_stage = [&](const std::string& name, const std::vector<fs::path>& inputs,
                       const std::function<std::vector<fs::path>()>& body) {
    StageResult result;
    result.name = name;
    try {
      auto outputs = body();
      result.manifest = manifests.write(++stage_index, name, inputs, outputs);
      result.ok = true;
    } catch (const std::exception& e) {
      result.detail = e.what();
      report.stages.push_back(result);
      report.exit_code = kExitStageFailure;
      throw StageFailedError(name, e.what());
    }
    report.stages.push_back(result);
  };

  const fs::path benign_store = paths.work_dir / "benign.jsonl";
  const fs::path posts_store = paths.work_dir / "posts.jsonl";
  const fs::path seeds_store = paths.work_dir / "seeds.jsonl";
  const fs::path variants_store = paths.work_dir / "variants.jsonl";
  const fs::path entropy_csv = paths.work_dir / "entropy_curves.csv";
  const fs::path entropy_agg_csv = paths.work_dir / "entropy_agg.csv";
  const fs::path entities_csv = paths.work_dir / "entity_gain.csv";
  const fs::path diversity_json = paths.work_dir / "diversity_report.json";
  const fs::path model_bin = paths.work_dir / "model.bin";
  const fs::path eval_json = paths.work_dir / "detector_eval.json";
  const fs::path verdicts_jsonl = paths.work_dir / "verdicts.jsonl";
  const fs::path table_csv = paths.work_dir / "dimension_table.csv";
  const fs::path user_study_json = paths.work_dir / "user_study.json";
  const fs::path cost_csv = paths.work_dir / "cost_table.csv";

  run_stage("ingest", collect_inputs(paths.emails), [&] {
    corpus::EmailIngestOptions opts;
    opts.jobs = options.jobs;
    corpus::IngestReport ingest_report;
    auto docs = corpus::ingest_email_dir(paths.emails, opts, &ingest_report);
    for (auto& d : docs) {
      d.meta["label"] = "benign";
      d = corpus::segment_sentences(std::move(d));
    }
    corpus::write_store(benign_store, docs);
    return std::vector<fs::path>{benign_store};
  });

  run_stage("ingest_posts", collect_inputs(paths.posts), [&] {
    auto docs = corpus::ingest_posts_csv(paths.posts);
    for (auto& d : docs) d = corpus::segment_sentences(std::move(d));
    corpus::write_store(posts_store, docs);
    return std::vector<fs::path>{posts_store};
  });

  run_stage("variation", collect_inputs(paths.seeds), [&] {
    auto seeds = corpus::ingest_prompts(paths.seeds);
    for (auto& s : seeds) {
      s.meta["label"] = "malicious";
      s = corpus::segment_sentences(std::move(s));
    }
    corpus::write_store(seeds_store, seeds);
    int k = static_cast<int>(cfg.get_int("variation.k", 50));
    int max_retries = static_cast<int>(cfg.get_int("variation.max_retries", 5));
    variation::OfflineRewriteBackend backend;
    auto result = variation::run(seeds, k, backend, max_retries);
    if (result.failures > 0) {
      throw Error(std::to_string(result.failures) + " variation requests failed");
    }
    for (auto& v : result.variants) v = corpus::segment_sentences(std::move(v));
    corpus::write_store(variants_store, result.variants);
    return std::vector<fs::path>{seeds_store, variants_store};
  });

  run_stage("infogain", {posts_store, paths.gazetteer / "person.txt"}, [&] {
    auto posts = corpus::read_store(posts_store);
    auto timelines = infogain::build_timelines(posts);
    std::vector<infogain::EntropyCurve> curves;
    std::string curve_rows = "user_id,k,H,H_norm,n_unique\n";
    for (const auto& tl : timelines) {
      curves.push_back(infogain::normalized_entropy_curve(tl));
      for (const auto& pt : curves.back().points) {
        curve_rows += csv::join_row({tl.user_id, std::to_string(pt.k),
                                     format_double(pt.h_bits, 6), format_double(pt.h_norm, 6),
                                     std::to_string(pt.n_unique)});
      }
    }
    write_file(entropy_csv, curve_rows);
    std::string agg_rows = "k,H_mean,N_k\n";
    for (const auto& pt : infogain::aggregate_curves(curves)) {
      agg_rows += csv::join_row(
          {std::to_string(pt.k), format_double(pt.h_mean, 6), std::to_string(pt.n_users)});
    }
    write_file(entropy_agg_csv, agg_rows);

    auto extractor = infogain::GazetteerExtractor::load(paths.gazetteer);
    std::string entity_rows = "user_id,k,new_entities";
    for (int l = 0; l < infogain::kEntityLabelCount; ++l) {
      entity_rows += ',';
      entity_rows += text::casefold(
          infogain::entity_label_name(static_cast<infogain::EntityLabel>(l)));
    }
    entity_rows += '\n';
    for (const auto& tl : timelines) {
      for (const auto& pt : infogain::entity_gain(tl, extractor)) {
        std::vector<std::string> fields{tl.user_id, std::to_string(pt.k),
                                        std::to_string(pt.new_entities)};
        for (int l = 0; l < infogain::kEntityLabelCount; ++l) {
          auto label = static_cast<infogain::EntityLabel>(l);
          auto it = pt.cumulative_by_label.find(label);
          fields.push_back(std::to_string(it == pt.cumulative_by_label.end() ? 0 : it->second));
        }
        entity_rows += csv::join_row(fields);
      }
    }
    write_file(entities_csv, entity_rows);
    return std::vector<fs::path>{entropy_csv, entropy_agg_csv, entities_csv};
  });

  run_stage("diversity", {variants_store, seeds_store}, [&] {
    auto variants = corpus::read_store(variants_store);
    auto seeds = corpus::read_store(seeds_store);
    diversity::CoarseTagger tagger;
    auto report_json = diversity::report_to_json(diversity::build_report(variants, seeds, tagger));
    write_file(diversity_json, report_json + "\n");
    return std::vector<fs::path>{diversity_json};
  });

  run_stage("detector", {variants_store, benign_store}, [&] {
    auto labeled_docs = corpus::read_store(variants_store);
    auto benign = corpus::read_store(benign_store);
    labeled_docs.insert(labeled_docs.end(), benign.begin(), benign.end());
    auto labeled = detector::labeled_from_store(labeled_docs);
    auto split = detector::split_dataset(labeled, static_cast<uint64_t>(cfg.get_int(
                                                      "detector.seed", 7)));
    detector::TrainConfig train_cfg;
    train_cfg.seed = static_cast<uint64_t>(cfg.get_int("detector.seed", 7));
    train_cfg.max_epochs = static_cast<int>(cfg.get_int("detector.max_epochs", 20));
    detector::TrainReport train_report;
    auto model = detector::train(split, train_cfg, &train_report);
    detector::save_model(model, model_bin);
    auto eval = detector::evaluate(model, split.test, /*by_category=*/true);
    json j;
    j["n"] = eval.n;
    j["accuracy"] = eval.accuracy;
    j["precision"] = eval.precision;
    j["recall"] = eval.recall;
    j["f1"] = eval.f1;
    j["threshold"] = model.threshold();
    j["epochs"] = train_report.epochs_run;
    j["degenerate_docs"] = train_report.degenerate_doc_ids;
    json cats = json::array();
    for (const auto& c : eval.per_category) {
      cats.push_back({{"category", c.category},
                      {"n", c.n},
                      {"tp", c.tp},
                      {"fn", c.fn},
                      {"precision", c.precision},
                      {"recall", c.recall},
                      {"f1", c.f1}});
    }
    j["per_category"] = cats;
    write_file(eval_json, j.dump(2) + "\n");
    return std::vector<fs::path>{model_bin, eval_json};
  });

  run_stage("ensemble", {paths.ballots}, [&] {
    auto ballots = ensemble::read_ballots(paths.ballots);
    auto verdicts = ensemble::vote_all(ballots);
    ensemble::write_verdicts(verdicts_jsonl, verdicts);
    std::map<std::string, std::string> groups;
    for (const auto& b : ballots) groups.emplace(b.doc_id, "ballots");
    write_file(table_csv, ensemble::percentages_to_csv(
                              ensemble::aggregate_percentages(verdicts, groups)));
    return std::vector<fs::path>{verdicts_jsonl, table_csv};
  });

  run_stage("stats", {paths.responses, paths.usage, paths.pricing}, [&] {
    auto responses = stats::read_responses_csv(paths.responses);
    write_file(user_study_json,
               stats::user_study_to_json(stats::analyze_user_study(responses)) + "\n");
    auto usage = stats::read_usage_csv(paths.usage);
    auto pricing = stats::read_pricing(paths.pricing);
    write_file(cost_csv, stats::usage_table_to_csv(stats::throughput_and_cost(usage, pricing)));
    return std::vector<fs::path>{user_study_json, cost_csv};
  });

  std::string error;
  report.checks_ok = verify_manifest_chain(paths.work_dir / "manifests", &error);
  if (!report.checks_ok) report.exit_code = kExitCheckFailure;
  return report;
}

bool verify_manifest_chain(const fs::path& manifest_dir, std::string* error) {
  std::vector<fs::path> files;
  if (!fs::is_directory(manifest_dir)) {
    if (error) *error = "manifest directory missing: " + manifest_dir.string();
    return false;
  }
  for (const auto& e : fs::directory_iterator(manifest_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string prev = "none";
  for (const auto& f : files) {
    std::string body = read_file(f);
    json j = json::parse(body);
    if (j.at("prev_manifest").get<std::string>() != prev) {
      if (error) *error = "manifest chain broken at " + f.string();
      return false;
    }
    for (const char* key : {"inputs", "outputs"}) {
      for (const auto& entry : j.at(key)) {
        fs::path p = entry.at("path").get<std::string>();
        if (!fs::exists(p)) {
          if (error) *error = "missing file named in manifest: " + p.string();
          return false;
        }
        if (hash_file(p) != entry.at("hash").get<std::string>()) {
          if (error) *error = "hash mismatch for " + p.string();
          return false;
        }
      }
    }
    prev = content_hash(body);
  }
  if (files.empty()) {
    if (error) *error = "no manifests found";
    return false;
  }
  return true;
}

}  // namespace spearlab::pipeline
