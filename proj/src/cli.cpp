#include "divkit/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "divkit/concepts.hpp"
#include "divkit/coreset.hpp"
#include "divkit/corpus.hpp"
#include "divkit/diversity.hpp"
#include "divkit/loo.hpp"
#include "divkit/score_matrix.hpp"
#include "divkit/semantic.hpp"
#include "divkit/splits.hpp"
#include "divkit/textproc.hpp"

namespace divkit {

namespace {

using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string cache_dir;
  std::string out;
  std::string format;  // empty: the command's natural format
  std::string split = "all";
  bool timing = false;
};

// The dataset as loaded plus the split-filtered view the command works on.
// Sidecars are keyed against the full file, so they attach to `full` and are
// then cut down to `kept`.
struct Loaded {
  CaptionDataset full;
  CaptionDataset ds;
  std::vector<std::size_t> kept;
};

Loaded load(const std::string& path, const std::string& split, bool plain_text = false) {
  Loaded l;
  l.full = plain_text ? load_plain_text_corpus(path) : load_dataset(path);
  std::optional<Split> filter;
  if (split != "all") filter = parse_split(split);
  l.ds = filter_split(l.full, filter);
  for (std::size_t i = 0; i < l.full.samples.size(); ++i)
    if (!filter || l.full.samples[i].split == *filter) l.kept.push_back(i);
  return l;
}

TokenCorpus tokens_for(const Loaded& l, const std::string& pos_sidecar, bool want_pos) {
  TokenCorpus full = tokenize_dataset(l.full);
  if (!pos_sidecar.empty()) attach_pos_sidecar(l.full, full, pos_sidecar);
  else if (want_pos) builtin_pos(full);
  TokenCorpus out;
  for (std::size_t i : l.kept) out.samples.push_back(std::move(full.samples[i]));
  return out;
}

EmbeddingStore embeddings_for(const Loaded& l, const std::string& sidecar) {
  if (sidecar.empty()) return builtin_embeddings(l.ds);
  const EmbeddingStore full = attach_embeddings(l.full, sidecar);
  std::vector<std::size_t> offsets;
  std::vector<float> data;
  for (std::size_t i : l.kept) {
    offsets.push_back(data.size() / full.dim());
    for (std::size_t k = 0; k < l.full.samples[i].references.size(); ++k) {
      const float* row = full.row(i, k);
      data.insert(data.end(), row, row + full.dim());
    }
  }
  return EmbeddingStore(full.dim(), std::move(offsets), std::move(data));
}

std::vector<Sample> samples_of(const CaptionDataset& ds, Split split) {
  std::vector<Sample> out;
  for (const auto& s : ds.samples)
    if (s.split == split) out.push_back(s);
  return out;
}

std::string resolve_cache_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("DIVKIT_CACHE_DIR"); env && *env) return env;
  return ".divkit_cache";
}

json to_json(const VocabStats& v) {
  return {{"unique", v.unique}, {"ws_unique_pct", v.ws_unique}, {"bs_unique_pct", v.bs_unique},
          {"head", v.head}, {"tokens", v.tokens}};
}

json to_json(const PosStats& p) {
  return {{"wsnu", p.wsnu}, {"bsnu", p.bsnu}, {"wsvu", p.wsvu}, {"bsvu", p.bsvu}, {"nc", p.nc},
          {"vc", p.vc},     {"nh", p.nh},     {"vh", p.vh},     {"npc", p.npc},   {"vpc", p.vpc},
          {"tpc", p.tpc}};
}

json to_json(const LooResult& r) {
  json metrics = json::object();
  for (const auto& m : r.metrics) {
    json s = {{"mean", m.mean}, {"std", m.std}, {"min", m.min}, {"max", m.max}};
    if (!m.iterations.empty()) s["iterations"] = m.iterations;
    metrics[to_string(m.metric)] = s;
  }
  return {{"samples_used", r.samples_used}, {"samples_dropped", r.samples_dropped}, {"metrics", metrics}};
}

// key,value lines for any report section tree.
void flatten(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), os);
  } else {
    os << prefix << "," << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Command line as recorded in the report: flags that only affect wall time or
// output location are left out so that reruns compare byte-identical.
std::vector<std::string> recorded_args(const std::vector<std::string>& args) {
  static const std::vector<std::string> skip = {"--jobs", "--out", "--cache-dir", "--timing"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    const auto name = a.substr(0, a.find('='));
    if (std::find(skip.begin(), skip.end(), name) == skip.end()) {
      out.push_back(a);
      continue;
    }
    if (a.find('=') == std::string::npos && name != "--timing") ++i;  // value follows
  }
  return out;
}

class Session {
 public:
  Session(const Globals& g, std::vector<std::string> argv, std::ostream& out)
      : g_(g), argv_(std::move(argv)), out_(out) {}

  void section(const std::string& name, const std::function<json()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    results_[name] = fn();
    timing_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  json& results() { return results_; }

  void emit_text(const std::string& text) {
    if (g_.out.empty()) out_ << text;
    else write_file_atomic(g_.out, text);
  }

  void emit_report(const std::string& command, const CaptionDataset& ds) {
    json report;
    report["schema_version"] = kReportSchemaVersion;
    report["tool_version"] = kToolVersion;
    report["command"] = command;
    report["argv"] = argv_;
    report["seed"] = g_.seed;
    report["dataset"] = {{"name", ds.name}, {"hash", dataset_hash(ds)}, {"split", g_.split},
                         {"samples", ds.samples.size()}, {"references", ds.reference_count()}};
    report["results"] = results_;
    if (g_.timing) report["timing"] = timing_;
    emit_text(dump_canonical(report));
  }

  void emit(const std::string& command, const CaptionDataset& ds) {
    if (g_.format == "csv") {
      std::ostringstream os;
      os << "key,value\n";
      flatten(canonicalize(results_), "", os);
      emit_text(os.str());
    } else {
      emit_report(command, ds);
    }
  }

 private:
  const Globals& g_;
  std::vector<std::string> argv_;
  std::ostream& out_;
  json results_ = json::object();
  json timing_ = json::object();
};

MetricParams metric_params(const std::string& name, const std::string& smoothing, double beta, int cider_n) {
  MetricParams p;
  p.metric = parse_metric(name);
  if (smoothing == "add_one") p.bleu_smoothing = BleuSmoothing::add_one_counts;
  else if (smoothing != "none") throw InputError("unknown BLEU smoothing '" + smoothing + "'");
  p.rouge_beta = beta;
  p.cider_max_n = cider_n;
  p.check();
  return p;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Caption dataset diversity analysis", "divkit"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random draw");
  app.add_option("--jobs", g.jobs, "Worker threads (0 = runtime default); never changes results");
  app.add_option("--cache-dir", g.cache_dir, "Score-matrix cache (default $DIVKIT_CACHE_DIR or .divkit_cache)");
  app.add_option("--out", g.out, "Output file (default stdout)");
  app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--split", g.split, "train, val, test or all")->check(CLI::IsMember({"train", "val", "test", "all"}));
  app.add_flag("--timing", g.timing, "Record per-section wall time in the report");

  std::string dataset, pos_sidecar, embeddings, labels_path;

  auto* stats = app.add_subcommand("stats", "Token, POS and n-gram diversity");
  std::string text_path;
  std::vector<int> evs_orders{2, 3, 4};
  int ed_max = 10;
  auto* stats_ds = stats->add_option("--dataset", dataset, "Dataset JSON");
  auto* stats_text = stats->add_option("--text", text_path, "Plain-text corpus split into sentences on '.'");
  stats_ds->excludes(stats_text);
  stats->add_option("--pos", pos_sidecar, "POS sidecar (default: built-in tagger)");
  stats->add_option("--evs-orders", evs_orders, "N-gram orders for EVS")->delimiter(',');
  stats->add_option("--ed-max", ed_max, "Largest N for ED@N");

  auto* loo = app.add_subcommand("loo", "Leave-one-out ground-truth estimates");
  std::vector<std::string> metric_names{"bleu4"};
  int iterations = 750;
  double rouge_beta = 1.2;
  int cider_n = 4;
  bool semantic_flag = false, keep_iterations = false;
  std::optional<double> vocab_fraction;
  std::vector<int> refcounts;
  std::optional<int> variance_bins;
  loo->add_option("--dataset", dataset, "Dataset JSON")->required();
  loo->add_option("--metric", metric_names, "bleu1..bleu4, rouge_l, cider, meteor_lite")->delimiter(',');
  loo->add_option("--iterations", iterations, "Monte-Carlo iterations");
  loo->add_option("--rouge-beta", rouge_beta);
  loo->add_option("--cider-n", cider_n);
  loo->add_flag("--semantic-mask", semantic_flag, "Also run with nouns and verbs masked");
  loo->add_option("--pos", pos_sidecar, "POS sidecar for --semantic-mask (default: built-in tagger)");
  loo->add_option("--vocab-mask", vocab_fraction, "Also run with tokens outside this head fraction masked");
  loo->add_option("--refcounts", refcounts, "Reference-count sweep, e.g. 1,2,4")->delimiter(',');
  loo->add_option("--variance-bins", variance_bins, "Quantile bins of within-sample variance");
  loo->add_option("--embeddings", embeddings, "Embedding sidecar stem (default: built-in embedder)");
  loo->add_flag("--keep-iterations", keep_iterations, "Emit every iteration's score");

  auto* semantic = app.add_subcommand("semantic", "Within-sample redundancy, mean-delta, novelty, variance");
  semantic->add_option("--dataset", dataset, "Dataset JSON")->required();
  semantic->add_option("--embeddings", embeddings, "Embedding sidecar stem (default: built-in embedder)");

  auto* coreset = app.add_subcommand("coreset", "Greedy caption core-sets");
  std::vector<double> thresholds;
  std::string metric_name = "bleu4", smoothing = "add_one", hyp_split = "train", eval_split = "test";
  coreset->add_option("--dataset", dataset, "Dataset JSON")->required();
  coreset->add_option("--thresholds", thresholds, "Ascending score thresholds")->delimiter(',')->required();
  coreset->add_option("--metric", metric_name);
  coreset->add_option("--smoothing", smoothing, "none or add_one");
  coreset->add_option("--hyp-split", hyp_split, "Split supplying candidate captions");
  coreset->add_option("--eval-split", eval_split, "Split supplying evaluation samples");

  auto* concepts = app.add_subcommand("concepts", "Label-set overlap and concept core-sets");
  std::string mode = "exact";
  int fuzzy_threshold = 90;
  bool concept_coreset = false;
  concepts->add_option("--dataset", dataset, "Dataset JSON")->required();
  concepts->add_option("--labels", labels_path, "Label-set JSON")->required();
  concepts->add_option("--mode", mode)->check(CLI::IsMember({"exact", "fuzzy"}));
  concepts->add_option("--fuzzy-threshold", fuzzy_threshold);
  concepts->add_flag("--coreset", concept_coreset, "Also evaluate concept core-sets");
  concepts->add_option("--metric", metric_name);
  concepts->add_option("--smoothing", smoothing, "none or add_one");
  concepts->add_option("--hyp-split", hyp_split, "Split supplying pool captions");
  concepts->add_option("--eval-split", eval_split, "Split supplying evaluation samples");

  auto* splits = app.add_subcommand("splits", "Diversity-stratified evaluation splits");
  std::string axis = "caption_length";
  int bins = 2;
  splits->add_option("--dataset", dataset, "Dataset JSON")->required();
  splits->add_option("--axis", axis)->check(CLI::IsMember({"caption_length", "concept_label", "sample_variance"}));
  splits->add_option("--bins", bins);
  splits->add_option("--labels", labels_path, "Label-set JSON (concept_label axis)");
  splits->add_option("--embeddings", embeddings, "Embedding sidecar stem (default: built-in embedder)");

  auto* tokenize_cmd = app.add_subcommand("tokenize", "Print tokens of every reference");
  tokenize_cmd->add_option("--dataset", dataset, "Dataset JSON")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return exit_code::usage;
  }

  set_jobs(g.jobs);
  Session session(g, recorded_args(args), out);
  int status = exit_code::ok;

  try {
    if (stats->parsed()) {
      if (dataset.empty() && text_path.empty()) throw InputError("stats needs --dataset or --text");
      const Loaded l = text_path.empty() ? load(dataset, g.split) : load(text_path, g.split, true);
      const TokenCorpus corpus = tokens_for(l, pos_sidecar, true);
      if (ed_max < 1) throw InputError("--ed-max must be at least 1");
      session.section("vocab", [&] { return to_json(vocab_stats(corpus)); });
      session.section("pos", [&] { return to_json(pos_stats(corpus)); });
      std::map<int, double> evs_by_order, weighted;
      std::vector<int> orders = evs_orders;
      for (int i = 1; i < ed_max; ++i) orders.push_back(ed_schedule_order(i));
      std::sort(orders.begin(), orders.end());
      orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
      session.section("evs", [&] {
        json j = json::object();
        for (int n : orders) {
          const auto model = build_ngram_model(corpus, n);
          evs_by_order[n] = evs(model);
          weighted[n] = evs_occurrence_weighted(model);
        }
        for (int n : evs_orders) j[std::to_string(n)] = evs_by_order[n];
        return j;
      });
      session.results()["evs_weighted"] = json::object();
      for (int n : evs_orders) session.results()["evs_weighted"][std::to_string(n)] = weighted[n];
      session.section("ed", [&] {
        json j = json::object();
        for (int n = 1; n <= ed_max; ++n) j[std::to_string(n)] = ed_at_n(evs_by_order, n);
        return j;
      });
      session.emit("stats", l.ds);

    } else if (loo->parsed()) {
      const Loaded l = load(dataset, g.split);
      LooConfig cfg;
      cfg.metrics.clear();
      for (const auto& m : metric_names) cfg.metrics.push_back(metric_params(m, "none", rouge_beta, cider_n));
      cfg.iterations = iterations;
      cfg.seed = g.seed;
      cfg.keep_iteration_scores = keep_iterations;
      cfg.variance_bins = variance_bins;
      cfg.check();
      const TokenCorpus corpus = tokens_for(l, pos_sidecar, semantic_flag);
      session.section("loo", [&] { return to_json(loo_estimate(corpus, cfg)); });
      if (semantic_flag) session.section("loo_masked", [&] { return to_json(masked_loo(corpus, cfg)); });
      if (vocab_fraction) {
        session.section("loo_vocab_masked", [&] {
          LooConfig vc = cfg;
          vc.mask = {MaskKind::vocab_tail, *vocab_fraction};
          const auto r = vocab_masked_loo(corpus, vc);
          json drop = json::object();
          for (std::size_t m = 0; m < r.relative_drop.size(); ++m)
            drop[to_string(cfg.metrics[m].metric)] = r.relative_drop[m];
          return json{{"head_fraction", *vocab_fraction}, {"masked", to_json(r.masked)}, {"relative_drop", drop}};
        });
      }
      if (!refcounts.empty()) {
        session.section("loo_refcount", [&] {
          json rows = json::array();
          for (const auto& p : refcount_sweep(corpus, cfg, refcounts)) rows.push_back({{"r", p.r}, {"result", to_json(p.result)}});
          return rows;
        });
      }
      if (variance_bins) {
        session.section("loo_variance_bins", [&] {
          const auto store = embeddings_for(l, embeddings);
          const auto r = variance_binned_loo(l.ds, corpus, store, cfg);
          json rows = json::array();
          for (const auto& b : r.bins) {
            json row = {{"name", b.name}, {"min_variance", b.min_variance}, {"max_variance", b.max_variance},
                        {"samples", b.sample_ids.size()}};
            row["result"] = b.result ? to_json(*b.result) : json(nullptr);
            rows.push_back(row);
          }
          return json{{"bins", rows}, {"degenerate_samples", r.degenerate_samples}};
        });
      }
      session.emit("loo", l.ds);

    } else if (semantic->parsed()) {
      const Loaded l = load(dataset, g.split);
      const auto store = embeddings_for(l, embeddings);
      const auto all = analyze_samples(l.ds, store);
      if (g.format == "csv") {
        std::ostringstream os;
        os << "sample_id,unique_captions,variance,mean_delta_pct,novelty_pct,min_distances\n";
        for (const auto& s : all) {
          os << csv_field(s.sample_id) << "," << s.unique_caption_count << ",";
          if (s.variance) os << canonicalize(*s.variance).dump();
          os << ",";
          if (s.mean_delta_pct) os << canonicalize(*s.mean_delta_pct).dump();
          os << "," << canonicalize(s.novelty_pct).dump() << ",";
          for (std::size_t i = 0; i < s.min_pairwise_distances.size(); ++i)
            os << (i ? ";" : "") << canonicalize(s.min_pairwise_distances[i]).dump();
          os << "\n";
        }
        session.emit_text(os.str());
      } else {
        session.section("redundancy", [&] {
          const auto r = redundancy(l.ds, store);
          json hist = json::array();
          for (std::size_t b = 0; b < kHistogramBuckets; ++b)
            hist.push_back({{"lo", static_cast<double>(b) * kHistogramWidth},
                            {"hi", static_cast<double>(b + 1) * kHistogramWidth}, {"count", r.histogram[b]}});
          json per = json::object();
          for (std::size_t i = 0; i < l.ds.samples.size(); ++i)
            if (!r.per_sample[i].empty()) per[l.ds.samples[i].id] = r.per_sample[i];
          return json{{"histogram", hist}, {"excluded", r.excluded}, {"per_sample", per}};
        });
        auto values = [&](const PerSampleValues& v) {
          json per = json::object();
          for (std::size_t i = 0; i < l.ds.samples.size(); ++i)
            if (v.per_sample[i]) per[l.ds.samples[i].id] = *v.per_sample[i];
          return json{{"mean", v.mean}, {"excluded", v.excluded}, {"per_sample", per}};
        };
        session.section("mean_delta", [&] { return values(mean_delta(l.ds, store)); });
        session.section("novelty", [&] {
          const auto n = novelty(l.ds);
          json per = json::object();
          for (std::size_t i = 0; i < l.ds.samples.size(); ++i) per[l.ds.samples[i].id] = n.per_sample[i];
          return json{{"mean", n.mean}, {"per_sample", per}};
        });
        session.section("variance", [&] { return values(sample_variance(l.ds, store)); });
        session.emit_report("semantic", l.ds);
      }

    } else if (coreset->parsed()) {
      const Loaded l = load(dataset, g.split);
      const auto params = metric_params(metric_name, smoothing, 1.2, 4);
      std::vector<std::string> hyps;
      for (const auto& s : samples_of(l.ds, parse_split(hyp_split)))
        hyps.insert(hyps.end(), s.references.begin(), s.references.end());
      const auto evals = samples_of(l.ds, parse_split(eval_split));
      if (hyps.empty()) throw InputError("no captions in split '" + hyp_split + "'");
      if (evals.empty()) throw InputError("no samples in split '" + eval_split + "'");
      MatrixBuildInfo info;
      const auto matrix = build_score_matrix(hyps, evals, params, resolve_cache_dir(g.cache_dir), &info);
      if (info.recovered_from_corruption) {
        err << "warning: score matrix cache " << info.manifest_path << " is corrupt (" << info.corruption_reason
            << "); recomputed\n";
        status = exit_code::cache_recovered;
      }
      const auto curve = coverage_curve(matrix, thresholds);
      if (g.format == "json") {
        session.section("coreset", [&] {
          json rows = json::array();
          for (const auto& p : curve)
            rows.push_back({{"threshold", p.threshold},
                            {"count", p.count},
                            {"coverage_pct", p.coverage_pct},
                            {"covered", p.cover.covered},
                            {"mean_best_score", p.cover.mean_best_score},
                            {"selected", p.cover.selected_captions},
                            {"uncoverable", p.cover.uncoverable}});
          return json{{"metric", params.canonical()}, {"hypotheses", matrix.rows()}, {"samples", matrix.cols()},
                      {"matrix", matrix.identity}, {"curve", rows}};
        });
        session.emit_report("coreset", l.ds);
      } else {
        std::ostringstream os;
        os << "threshold,count,coverage_pct\n";
        for (const auto& p : curve)
          os << canonicalize(p.threshold).dump() << "," << p.count << "," << canonicalize(p.coverage_pct).dump() << "\n";
        session.emit_text(os.str());
      }

    } else if (concepts->parsed()) {
      const Loaded l = load(dataset, g.split);
      const LabelSet labels = load_label_set(labels_path);
      const MatchMode match = mode == "fuzzy" ? MatchMode::fuzzy : MatchMode::exact;
      session.section("overlap", [&] {
        return json{{"labels", labels.name}, {"label_count", labels.labels.size()}, {"mode", mode},
                    {"fuzzy_threshold", fuzzy_threshold}, {"percent", overlap(l.ds, labels, match, fuzzy_threshold)}};
      });
      if (concept_coreset) {
        session.section("concept_coreset", [&] {
          const auto params = metric_params(metric_name, smoothing, 1.2, 4);
          const auto train = samples_of(l.ds, parse_split(hyp_split));
          const auto test = samples_of(l.ds, parse_split(eval_split));
          const auto r = concept_coreset_eval(test, build_concept_pools(train, labels), params);
          return json{{"metric", params.canonical()}, {"mean", r.mean}, {"evaluated", r.evaluated},
                      {"skipped_no_concepts", r.skipped_no_concepts}, {"skipped_no_hypotheses", r.skipped_no_hypotheses}};
        });
      }
      session.emit("concepts", l.ds);

    } else if (splits->parsed()) {
      const Loaded l = load(dataset, g.split);
      SplitSpec spec{parse_split_axis(axis), bins, g.seed};
      std::optional<LabelSet> labels;
      if (!labels_path.empty()) labels = load_label_set(labels_path);
      std::optional<EmbeddingStore> store;
      if (spec.axis == SplitAxis::sample_variance) store = embeddings_for(l, embeddings);
      const auto file = generate_splits(l.ds, spec, store ? &*store : nullptr, labels ? &*labels : nullptr);
      session.emit_text(file.to_json());

    } else if (tokenize_cmd->parsed()) {
      const Loaded l = load(dataset, g.split);
      std::ostringstream os;
      for (const auto& s : l.ds.samples)
        for (std::size_t k = 0; k < s.references.size(); ++k) {
          const auto seq = tokenize(s.references[k]);
          os << s.id << "\t" << k << "\t";
          for (std::size_t t = 0; t < seq.tokens.size(); ++t) os << (t ? " " : "") << seq.tokens[t];
          os << "\n";
        }
      session.emit_text(os.str());
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::input_error;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
  return status;
}

}  // namespace divkit
