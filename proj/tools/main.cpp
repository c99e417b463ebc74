// spearlab: corpus analysis and prompt-screening toolkit CLI.

#include <cstdio>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spearlab/config.hpp"
#include "spearlab/corpus.hpp"
#include "spearlab/csv.hpp"
#include "spearlab/detector.hpp"
#include "spearlab/diversity.hpp"
#include "spearlab/ensemble.hpp"
#include "spearlab/errors.hpp"
#include "spearlab/gateway.hpp"
#include "spearlab/infogain.hpp"
#include "spearlab/pipeline.hpp"
#include "spearlab/stats.hpp"
#include "spearlab/text.hpp"
#include "spearlab/util.hpp"
#include "spearlab/variation.hpp"

namespace {

using namespace spearlab;
using nlohmann::json;

int g_exit = pipeline::kExitOk;

void cmd_corpus_ingest(const std::string& in, const std::string& kind, const std::string& out,
                       bool keep_replies, bool segment, int jobs) {
  corpus::IngestReport report;
  std::vector<corpus::Document> docs;
  if (kind == "email") {
    corpus::EmailIngestOptions opts;
    opts.filter_replies = !keep_replies;
    opts.jobs = jobs;
    docs = corpus::ingest_email_dir(in, opts, &report);
  } else if (kind == "prompt") {
    docs = corpus::ingest_prompts(in, &report);
  } else if (kind == "post") {
    docs = corpus::ingest_posts_csv(in, &report);
  } else {
    throw Error("unknown kind: " + kind);
  }
  if (segment) {
    for (auto& d : docs) d = corpus::segment_sentences(std::move(d));
  }
  corpus::write_store(out, docs);
  std::printf("ingested %zu documents (%zu excluded as replies, %zu rejected empty, %zu dupes)\n",
              docs.size(), report.excluded_replies, report.rejected_empty, report.duplicates);
  for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

void cmd_filter_originals(const std::string& in, const std::string& out) {
  namespace fs = std::filesystem;
  fs::create_directories(out);
  size_t kept = 0, dropped = 0;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(in)) {
    if (e.is_regular_file() && e.path().extension() == ".eml") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto email = corpus::parse_rfc5322(read_file(f));
    if (corpus::is_reply_or_forward(email)) {
      ++dropped;
      continue;
    }
    write_file(fs::path(out) / f.filename(), read_file(f));
    ++kept;
  }
  std::printf("kept %zu original emails, dropped %zu replies/forwards\n", kept, dropped);
}

void cmd_corpus_segment(const std::string& store, const std::string& out) {
  auto docs = corpus::read_store(store);
  for (auto& d : docs) d = corpus::segment_sentences(std::move(d));
  corpus::write_store(out, docs);
  size_t sentences = 0;
  for (const auto& d : docs) sentences += d.sentences.size();
  std::printf("segmented %zu documents into %zu sentences\n", docs.size(), sentences);
}

void cmd_infogain_entropy(const std::string& store, const std::string& out,
                          const std::string& agg_out) {
  auto docs = corpus::read_store(store);
  auto timelines = infogain::build_timelines(docs);
  std::vector<infogain::EntropyCurve> curves;
  std::string rows = "user_id,k,H,H_norm,n_unique\n";
  for (const auto& tl : timelines) {
    curves.push_back(infogain::normalized_entropy_curve(tl));
    for (const auto& pt : curves.back().points) {
      rows += csv::join_row({tl.user_id, std::to_string(pt.k), format_double(pt.h_bits, 6),
                             format_double(pt.h_norm, 6), std::to_string(pt.n_unique)});
    }
  }
  write_file(out, rows);
  if (!agg_out.empty()) {
    std::string agg = "k,H_mean,N_k\n";
    for (const auto& pt : infogain::aggregate_curves(curves)) {
      agg += csv::join_row(
          {std::to_string(pt.k), format_double(pt.h_mean, 6), std::to_string(pt.n_users)});
    }
    write_file(agg_out, agg);
  }
  std::printf("wrote entropy curves for %zu users\n", curves.size());
}

void cmd_infogain_entities(const std::string& store, const std::string& gazetteer,
                           const std::string& out) {
  auto docs = corpus::read_store(store);
  auto timelines = infogain::build_timelines(docs);
  auto extractor = infogain::GazetteerExtractor::load(gazetteer);
  std::string rows = "user_id,k,new_entities";
  for (int l = 0; l < infogain::kEntityLabelCount; ++l) {
    rows += ',';
    rows += text::casefold(infogain::entity_label_name(static_cast<infogain::EntityLabel>(l)));
  }
  rows += '\n';
  for (const auto& tl : timelines) {
    for (const auto& pt : infogain::entity_gain(tl, extractor)) {
      std::vector<std::string> fields{tl.user_id, std::to_string(pt.k),
                                      std::to_string(pt.new_entities)};
      for (int l = 0; l < infogain::kEntityLabelCount; ++l) {
        auto it = pt.cumulative_by_label.find(static_cast<infogain::EntityLabel>(l));
        fields.push_back(std::to_string(it == pt.cumulative_by_label.end() ? 0 : it->second));
      }
      rows += csv::join_row(fields);
    }
  }
  write_file(out, rows);
  std::printf("wrote entity gains for %zu users\n", timelines.size());
}

void cmd_diversity_report(const std::string& a, const std::string& b, const std::string& out) {
  auto group_a = corpus::read_store(a);
  auto group_b = corpus::read_store(b);
  diversity::CoarseTagger tagger;
  auto report = diversity::build_report(group_a, group_b, tagger);
  write_file(out, diversity::report_to_json(report) + "\n");
  std::printf("diversity report over %zu variations vs %zu seeds -> %s\n", group_a.size(),
              group_b.size(), out.c_str());
}

void cmd_variation_run(const std::string& seeds_path, int k, const std::string& backend_name,
                       const std::string& endpoint, int max_retries, const std::string& out) {
  auto seeds = corpus::ingest_prompts(seeds_path);
  for (auto& s : seeds) s.meta["label"] = "malicious";
  std::unique_ptr<variation::RewriteBackend> backend;
  if (backend_name == "offline") {
    backend = std::make_unique<variation::OfflineRewriteBackend>();
  } else if (backend_name == "http") {
    if (endpoint.empty()) throw Error("http backend needs --endpoint");
    backend = std::make_unique<variation::HttpRewriteBackend>(endpoint);
  } else {
    throw Error("unknown backend: " + backend_name);
  }
  auto result = variation::run(seeds, k, *backend, max_retries);
  for (auto& v : result.variants) v = corpus::segment_sentences(std::move(v));
  corpus::write_store(out, result.variants);
  std::printf("generated %zu variants from %zu seeds (%zu failures)\n", result.variants.size(),
              seeds.size(), result.failures);
  if (result.failures > 0) g_exit = pipeline::kExitStageFailure;
}

std::vector<detector::LabeledDoc> load_labeled(const std::vector<std::string>& stores) {
  std::vector<corpus::Document> docs;
  for (const auto& s : stores) {
    auto part = corpus::read_store(s);
    docs.insert(docs.end(), part.begin(), part.end());
  }
  return detector::labeled_from_store(docs);
}

void cmd_detector_train(const std::vector<std::string>& stores, uint64_t seed, int max_epochs,
                        const std::string& out) {
  auto labeled = load_labeled(stores);
  auto split = detector::split_dataset(labeled, seed);
  detector::TrainConfig cfg;
  cfg.seed = seed;
  cfg.max_epochs = max_epochs;
  detector::TrainReport report;
  auto model = detector::train(split, cfg, &report);
  detector::save_model(model, out);
  auto eval = detector::evaluate(model, split.test);
  std::printf("train=%zu val=%zu test=%zu epochs=%d val_f1=%.4f threshold=%.3f\n",
              split.train.size(), split.val.size(), split.test.size(), report.epochs_run,
              report.best_val_f1, model.threshold());
  std::printf("test accuracy=%.4f precision=%.4f recall=%.4f f1=%.4f\n", eval.accuracy,
              eval.precision, eval.recall, eval.f1);
  for (const auto& id : report.degenerate_doc_ids) {
    std::fprintf(stderr, "degenerate features: %s\n", id.c_str());
  }
  std::printf("model written to %s (%s)\n", out.c_str(),
              detector::model_fingerprint(model).c_str());
}

void cmd_detector_eval(const std::string& model_path, const std::vector<std::string>& stores,
                       uint64_t seed, const std::string& subset, bool by_category) {
  auto model = detector::load_model(model_path);
  auto labeled = load_labeled(stores);
  std::vector<detector::LabeledDoc> eval_set;
  if (subset == "all") {
    eval_set = labeled;
  } else {
    auto split = detector::split_dataset(labeled, seed);
    if (subset == "test") eval_set = split.test;
    else if (subset == "val") eval_set = split.val;
    else if (subset == "train") eval_set = split.train;
    else throw Error("unknown split: " + subset);
  }
  auto eval = detector::evaluate(model, eval_set, by_category);
  std::printf("n=%zu tp=%zu tn=%zu fp=%zu fn=%zu\n", eval.n, eval.tp, eval.tn, eval.fp, eval.fn);
  std::printf("accuracy=%.4f precision=%.4f recall=%.4f f1=%.4f\n", eval.accuracy, eval.precision,
              eval.recall, eval.f1);
  if (by_category) {
    std::printf("%-24s %5s %5s %5s %6s %6s %6s\n", "category", "n", "tp", "fn", "prec", "recall",
                "f1");
    for (const auto& c : eval.per_category) {
      std::printf("%-24s %5zu %5zu %5zu %6.2f %6.2f %6.2f\n", c.category.c_str(), c.n, c.tp,
                  c.fn, c.precision, c.recall, c.f1);
    }
  }
}

void cmd_detector_screen(const std::string& model_path, const std::string& in,
                         const std::string& mode) {
  auto model = detector::load_model(model_path);
  corpus::Document doc;
  doc.source = corpus::Source::prompt;
  doc.body = trim(normalize_lf(read_file(in)));
  auto verdict = detector::screen(
      model, doc, mode == "incremental" ? detector::ScreenMode::incremental
                                        : detector::ScreenMode::full);
  json j;
  j["malicious"] = verdict.malicious;
  j["score"] = verdict.score;
  if (verdict.flagged_prefix) j["flagged_prefix"] = *verdict.flagged_prefix;
  else j["flagged_prefix"] = nullptr;
  j["trace"] = verdict.trace;
  std::printf("%s\n", j.dump().c_str());
}

void cmd_ensemble_vote(const std::string& ballots_path, const std::string& out) {
  auto verdicts = ensemble::vote_all(ensemble::read_ballots(ballots_path));
  ensemble::write_verdicts(out, verdicts);
  std::printf("voted %zu documents -> %s\n", verdicts.size(), out.c_str());
}

void cmd_ensemble_kappa(const std::string& ballots_path) {
  auto ballots = ensemble::read_ballots(ballots_path);
  std::map<std::string, std::map<std::string, int>> by_judge;  // judge -> doc -> label
  for (const auto& b : ballots) {
    if (b.label) by_judge[b.judge_id][b.doc_id] = *b.label;
  }
  if (by_judge.size() < 2) throw Error("kappa needs label ballots from at least 2 judges");
  std::vector<std::string> judges;
  for (const auto& [j, _] : by_judge) judges.push_back(j);
  std::vector<std::string> docs;
  for (const auto& [doc, _] : by_judge.begin()->second) docs.push_back(doc);
  std::vector<std::vector<int>> sequences;
  for (const auto& j : judges) {
    std::vector<int> seq;
    for (const auto& doc : docs) {
      auto it = by_judge[j].find(doc);
      if (it == by_judge[j].end()) {
        throw MissingBallotError("judge " + j + " has no label for document " + doc);
      }
      seq.push_back(it->second);
    }
    sequences.push_back(std::move(seq));
  }
  double sum = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < judges.size(); ++i) {
    for (size_t j = i + 1; j < judges.size(); ++j) {
      double k = ensemble::cohens_kappa(sequences[i], sequences[j]);
      std::printf("kappa(%s, %s) = %.4f\n", judges[i].c_str(), judges[j].c_str(), k);
      sum += k;
      ++pairs;
    }
  }
  std::printf("mean_pairwise_kappa = %.4f over %zu docs\n", sum / static_cast<double>(pairs),
              docs.size());
}

void cmd_ensemble_table(const std::string& verdicts_path, const std::string& store_path,
                        const std::string& group_by, const std::string& out) {
  auto verdicts = ensemble::read_verdicts(verdicts_path);
  std::map<std::string, std::string> groups;
  if (!store_path.empty()) {
    for (const auto& doc : corpus::read_store(store_path)) {
      if (group_by == "source") {
        groups[doc.id] = std::string(corpus::source_name(doc.source));
      } else if (group_by.rfind("meta:", 0) == 0) {
        auto key = group_by.substr(5);
        auto it = doc.meta.find(key);
        if (it != doc.meta.end()) groups[doc.id] = it->second;
      } else {
        throw Error("--group-by must be 'source' or 'meta:<key>'");
      }
    }
  }
  write_file(out, ensemble::percentages_to_csv(
                      ensemble::aggregate_percentages(verdicts, groups)));
  std::printf("wrote dimension percentage table -> %s\n", out.c_str());
}

void cmd_stats_user_study(const std::string& in, const std::string& out) {
  auto report = stats::analyze_user_study(stats::read_responses_csv(in));
  std::string body = stats::user_study_to_json(report) + "\n";
  if (out.empty()) std::printf("%s", body.c_str());
  else write_file(out, body);
}

void cmd_stats_cost(const std::string& in, const std::string& pricing_path,
                    const std::string& out) {
  auto usage = stats::read_usage_csv(in);
  std::map<std::string, stats::Pricing> pricing;
  if (!pricing_path.empty()) pricing = stats::read_pricing(pricing_path);
  std::string body = stats::usage_table_to_csv(stats::throughput_and_cost(usage, pricing));
  if (out.empty()) std::printf("%s", body.c_str());
  else write_file(out, body);
}

void cmd_gateway_serve(const std::string& config_path) {
  Config cfg = Config::load(config_path);
  auto gw_cfg = gateway::gateway_config_from(cfg);
  if (gw_cfg.model_path.empty()) throw ConfigInvalidError("gateway.model_path is required");
  auto model = std::make_shared<detector::DetectorModel>(detector::load_model(gw_cfg.model_path));
  if (!gw_cfg.templates_dir.empty()) {
    auto templates = gateway::load_templates(gw_cfg.templates_dir);
    std::printf("loaded %zu moderation templates\n", templates.size());
  }
  gateway::GatewayServer server(model, gw_cfg);
  int port = server.start();
  std::printf("gateway listening on %s:%d (model %s)\n", gw_cfg.host.c_str(), port,
              detector::model_fingerprint(*model).c_str());
  while (server.is_running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
}

void cmd_run(const std::string& config_path, int jobs) {
  Config cfg = Config::load(config_path);
  pipeline::RunOptions options;
  options.jobs = jobs;
  try {
    auto report = pipeline::run_pipeline(cfg, options);
    for (const auto& s : report.stages) {
      std::printf("[%s] %s%s\n", s.ok ? "ok" : "FAIL", s.name.c_str(),
                  s.detail.empty() ? "" : (": " + s.detail).c_str());
    }
    std::printf("manifest chain: %s\n", report.checks_ok ? "verified" : "BROKEN");
    g_exit = report.exit_code;
  } catch (const StageFailedError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    g_exit = pipeline::kExitStageFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpus analysis and prompt-screening toolkit"};
  app.require_subcommand(1);

  // corpus
  auto* corpus_cmd = app.add_subcommand("corpus", "ingest, filter, and segment text corpora");
  corpus_cmd->require_subcommand(1);
  {
    auto* ingest = corpus_cmd->add_subcommand("ingest", "parse raw inputs into a store");
    static std::string in, kind, out;
    static bool keep_replies = false, segment = false;
    static int jobs = 1;
    ingest->add_option("--in", in, "input dir/file")->required();
    ingest->add_option("--kind", kind, "email|prompt|post")->required();
    ingest->add_option("--out", out, "output store (jsonl)")->required();
    ingest->add_flag("--keep-replies", keep_replies, "keep replies/forwards (email kind)");
    ingest->add_flag("--segment", segment, "populate sentence spans");
    ingest->add_option("--jobs", jobs, "parallel parse workers");
    ingest->callback([&] { cmd_corpus_ingest(in, kind, out, keep_replies, segment, jobs); });

    auto* filt = corpus_cmd->add_subcommand("filter-originals",
                                            "copy original emails, dropping replies/forwards");
    static std::string fin, fout;
    filt->add_option("--in", fin, ".eml directory")->required();
    filt->add_option("--out", fout, "output directory")->required();
    filt->callback([&] { cmd_filter_originals(fin, fout); });

    auto* seg = corpus_cmd->add_subcommand("segment", "populate sentence spans in a store");
    static std::string sstore, sout;
    seg->add_option("--store", sstore, "input store")->required();
    seg->add_option("--out", sout, "output store")->required();
    seg->callback([&] { cmd_corpus_segment(sstore, sout); });
  }

  // infogain
  auto* infogain_cmd = app.add_subcommand("infogain", "per-user information-gain analysis");
  infogain_cmd->require_subcommand(1);
  {
    auto* entropy = infogain_cmd->add_subcommand("entropy", "normalized entropy curves");
    static std::string store, out, agg;
    entropy->add_option("--store", store, "post store")->required();
    entropy->add_option("--out", out, "curves CSV")->required();
    entropy->add_option("--agg-out", agg, "aggregate CSV (k,H_mean,N_k)");
    entropy->callback([&] { cmd_infogain_entropy(store, out, agg); });

    auto* entities = infogain_cmd->add_subcommand("entities", "incremental entity gain");
    static std::string estore, gaz, eout;
    entities->add_option("--store", estore, "post store")->required();
    entities->add_option("--gazetteer", gaz, "gazetteer directory")->required();
    entities->add_option("--out", eout, "entity-gain CSV")->required();
    entities->callback([&] { cmd_infogain_entities(estore, gaz, eout); });
  }

  // diversity
  auto* diversity_cmd = app.add_subcommand("diversity", "corpus diversity metrics");
  diversity_cmd->require_subcommand(1);
  {
    auto* rep = diversity_cmd->add_subcommand("report", "metric battery between two stores");
    static std::string a, b, out;
    rep->add_option("--group-a", a, "variation store")->required();
    rep->add_option("--group-b", b, "seed/original store")->required();
    rep->add_option("--out", out, "report JSON")->required();
    rep->callback([&] { cmd_diversity_report(a, b, out); });
  }

  // variation
  auto* variation_cmd = app.add_subcommand("variation", "round-robin variant generation");
  variation_cmd->require_subcommand(1);
  {
    auto* runv = variation_cmd->add_subcommand("run", "generate labeled variants");
    static std::string seeds, backend = "offline", endpoint, out;
    static int k = 50, retries = 5;
    runv->add_option("--seeds", seeds, "seed file (one per line) or .txt dir")->required();
    runv->add_option("--k", k, "variants per seed");
    runv->add_option("--backend", backend, "offline|http");
    runv->add_option("--endpoint", endpoint,
                     "rewrite endpoint URL (http backend; token via SPEARLAB_HTTP_TOKEN)");
    runv->add_option("--max-retries", retries, "parse retries per request");
    runv->add_option("--out", out, "variant store")->required();
    runv->callback([&] { cmd_variation_run(seeds, k, backend, endpoint, retries, out); });
  }

  // detector
  auto* detector_cmd = app.add_subcommand("detector", "prompt-level maliciousness detection");
  detector_cmd->require_subcommand(1);
  {
    auto* train = detector_cmd->add_subcommand("train", "train the baseline classifier");
    static std::vector<std::string> stores;
    static uint64_t seed = 7;
    static int epochs = 20;
    static std::string out;
    train->add_option("--store", stores, "labeled store(s) (meta label=malicious|benign)")
        ->required();
    train->add_option("--seed", seed, "split/train seed");
    train->add_option("--max-epochs", epochs, "epoch cap");
    train->add_option("--out", out, "model file")->required();
    train->callback([&] { cmd_detector_train(stores, seed, epochs, out); });

    auto* eval = detector_cmd->add_subcommand("eval", "evaluate a trained model");
    static std::vector<std::string> estores;
    static std::string emodel, esplit = "all";
    static uint64_t eseed = 7;
    static bool by_cat = false;
    eval->add_option("--model", emodel, "model file")->required();
    eval->add_option("--store", estores, "labeled store(s)")->required();
    eval->add_option("--split", esplit, "all|test|val|train (split re-derived from --seed)");
    eval->add_option("--seed", eseed, "split seed");
    eval->add_flag("--by-category", by_cat, "per attack-category recall");
    eval->callback([&] { cmd_detector_eval(emodel, estores, eseed, esplit, by_cat); });

    auto* screen = detector_cmd->add_subcommand("screen", "screen a prompt file");
    static std::string smodel, sin, smode = "full";
    screen->add_option("--model", smodel, "model file")->required();
    screen->add_option("--in", sin, "text file")->required();
    screen->add_option("--mode", smode, "full|incremental");
    screen->callback([&] { cmd_detector_screen(smodel, sin, smode); });
  }

  // ensemble
  auto* ensemble_cmd = app.add_subcommand("ensemble", "multi-judge annotation aggregation");
  ensemble_cmd->require_subcommand(1);
  {
    auto* vote = ensemble_cmd->add_subcommand("vote", "majority vote over ballots");
    static std::string ballots, out;
    vote->add_option("--ballots", ballots, "ballots jsonl")->required();
    vote->add_option("--out", out, "verdicts jsonl")->required();
    vote->callback([&] { cmd_ensemble_vote(ballots, out); });

    auto* kappa = ensemble_cmd->add_subcommand("kappa", "pairwise Cohen's kappa");
    static std::string kballots;
    kappa->add_option("--ballots", kballots, "label ballots jsonl")->required();
    kappa->callback([&] { cmd_ensemble_kappa(kballots); });

    auto* table = ensemble_cmd->add_subcommand("table", "per-dimension percentage table");
    static std::string verdicts, store, group_by = "source", tout;
    table->add_option("--verdicts", verdicts, "verdicts jsonl")->required();
    table->add_option("--store", store, "document store for grouping metadata");
    table->add_option("--group-by", group_by, "source | meta:<key>");
    table->add_option("--out", tout, "output CSV")->required();
    table->callback([&] { cmd_ensemble_table(verdicts, store, group_by, tout); });
  }

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "user-study and cost analyses");
  stats_cmd->require_subcommand(1);
  {
    auto* study = stats_cmd->add_subcommand("user-study", "detection-gap and rank tests");
    static std::string in, out;
    study->add_option("--in", in, "responses CSV")->required();
    study->add_option("--out", out, "report JSON (stdout when omitted)");
    study->callback([&] { cmd_stats_user_study(in, out); });

    auto* cost = stats_cmd->add_subcommand("cost", "throughput and cost table");
    static std::string cin, pricing, cout_path;
    cost->add_option("--in", cin, "usage CSV")->required();
    cost->add_option("--pricing", pricing, "pricing file ([model] p_in/p_out)");
    cost->add_option("--out", cout_path, "output CSV (stdout when omitted)");
    cost->callback([&] { cmd_stats_cost(cin, pricing, cout_path); });
  }

  // gateway
  auto* gateway_cmd = app.add_subcommand("gateway", "HTTP screening service");
  gateway_cmd->require_subcommand(1);
  {
    auto* serve = gateway_cmd->add_subcommand("serve", "serve /v1/screen and /v1/health");
    static std::string config;
    serve->add_option("--config", config, "config file")->required();
    serve->callback([&] { cmd_gateway_serve(config); });
  }

  // run
  {
    auto* runp = app.add_subcommand("run", "full reproducible pipeline run");
    static std::string config;
    static int jobs = 1;
    runp->add_option("--config", config, "run config")->required();
    runp->add_option("--jobs", jobs, "intra-stage parallelism");
    runp->callback([&] { cmd_run(config, jobs); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : pipeline::kExitConfigError;
  } catch (const ConfigInvalidError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return pipeline::kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return pipeline::kExitStageFailure;
  }
  return g_exit;
}
