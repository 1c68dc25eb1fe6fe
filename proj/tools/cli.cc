#include "cli.h"

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "embscore/ablation.h"
#include "embscore/dataset.h"
#include "embscore/embeddings.h"
#include "embscore/error.h"
#include "embscore/harness.h"
#include "embscore/idf.h"
#include "embscore/ngram.h"
#include "embscore/random.h"
#include "embscore/scorer.h"
#include "embscore/stats.h"
#include "embscore/synthetic.h"
#include "embscore/tokenizer.h"

namespace embscore {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kReportVersion = 1;
constexpr const char* kLogEnv = "EMBSCORE_LOG";

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel ThresholdFromEnv() {
  const char* raw = std::getenv(kLogEnv);
  if (!raw) return LogLevel::kWarn;
  const std::string v(raw);
  if (v == "error") return LogLevel::kError;
  if (v == "info") return LogLevel::kInfo;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

void Log(LogLevel level, const std::string& message) {
  static const char* const kNames[] = {"error", "warn", "info", "debug"};
  if (level > ThresholdFromEnv()) return;
  std::cerr << "embscore: " << kNames[static_cast<int>(level)] << ": " << message << '\n';
}

int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kProviderUnavailable:
    case ErrorKind::kZeroVector:
    case ErrorKind::kNotNormalized:
    case ErrorKind::kAlreadyRescaled:
    case ErrorKind::kEmptyMatrix:
    case ErrorKind::kInfeasibleMasses:
    case ErrorKind::kTooShortForOrder:
    case ErrorKind::kEmptyBag:
    case ErrorKind::kZeroVariance:
    case ErrorKind::kAllTied:
    case ErrorKind::kDegenerateInput:
    case ErrorKind::kIo:
      return 1;
    default:
      return 2;
  }
}

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorKind::kInvalidInput, message);
}

void RequireFile(const std::string& path, std::string_view what) {
  if (path.empty()) Invalid(std::string(what) + " path is empty");
  if (!fs::is_regular_file(path)) Invalid(std::string(what) + " not found: " + path);
}

std::string Hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json InputFile(const std::string& path) {
  return {{"path", path}, {"fnv1a64", Hex64(Fnv1a64(ReadAll(path)))}};
}

void WriteAtomic(const fs::path& target, const std::string& content) {
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out << content;
    out.close();
    if (!out) throw Error(ErrorKind::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot move output into place at " + target.string());
  }
}

std::vector<std::string> SplitCommas(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    parts.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::size_t ParseIndex(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-') {
    Invalid("not a layer index: '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

// Shortest text that reads back as the same double.
std::string NumberText(double v) { return json(v).dump(); }

// ---- options shared across commands

struct ProviderOptions {
  std::string spec;
  std::string vocab;
  std::string unk_policy = "hashed";
  std::vector<int> remote_layers;
  int timeout_ms = 10000;
  int retries = 2;
};

struct MetricOptions {
  int layer = -1;
  std::string pmeans;
  std::string pmeans_layers;
  std::string idf = "none";
  std::string idf_table;
  bool rm = false;
  std::string baseline;
};

void AddProviderOptions(CLI::App* cmd, ProviderOptions& o, bool required) {
  auto* spec = cmd->add_option("--provider", o.spec,
                               "static:TABLE.jsonl, precomputed:STORE.jsonl or remote:URL");
  if (required) spec->required();
  cmd->add_option("--vocab", o.vocab, "word-piece vocabulary for static tables");
  cmd->add_option("--unk-policy", o.unk_policy, "static tables: unk or hashed")
      ->check(CLI::IsMember({"unk", "hashed"}));
  cmd->add_option("--remote-layers", o.remote_layers, "layers requested from a remote provider")
      ->delimiter(',');
  cmd->add_option("--timeout-ms", o.timeout_ms, "remote request timeout");
  cmd->add_option("--retries", o.retries, "remote retries after the first attempt");
}

void AddMetricOptions(CLI::App* cmd, MetricOptions& o) {
  cmd->add_option("--layer", o.layer, "layer index (default: last)");
  cmd->add_option("--pmeans", o.pmeans, "power-mean exponents, e.g. -inf,1,inf");
  cmd->add_option("--pmeans-layers", o.pmeans_layers, "layers to aggregate (default: all)");
  cmd->add_option("--idf", o.idf, "none, IDF-S, IDF-L or SEP")
      ->check(CLI::IsMember({"none", "IDF-S", "IDF-L", "SEP"}));
  cmd->add_option("--idf-table", o.idf_table, "idf table file for IDF-L");
  cmd->add_flag("--rm", o.rm, "drop punctuation and continuation pieces");
  cmd->add_option("--baseline", o.baseline, "rescale with this baseline file");
}

std::unique_ptr<EmbeddingProvider> MakeProvider(const ProviderOptions& o) {
  const auto colon = o.spec.find(':');
  if (colon == std::string::npos) Invalid("provider must be kind:argument, got '" + o.spec + "'");
  const std::string kind = o.spec.substr(0, colon);
  const std::string arg = o.spec.substr(colon + 1);
  if (kind == "static") {
    RequireFile(arg, "static table");
    std::shared_ptr<const Vocabulary> vocab;
    if (!o.vocab.empty()) {
      RequireFile(o.vocab, "vocabulary");
      vocab = std::make_shared<const Vocabulary>(Vocabulary::FromFile(o.vocab));
    }
    const auto policy = o.unk_policy == "unk" ? StaticTable::UnknownPolicy::kUnknownVector
                                              : StaticTable::UnknownPolicy::kHashed;
    return StaticTable::FromFile(arg, policy, vocab);
  }
  if (kind == "precomputed") {
    RequireFile(arg, "precomputed store");
    return PrecomputedStore::FromFile(arg);
  }
  if (kind == "remote") {
    RemoteOptions ro;
    ro.endpoint = arg;
    ro.layers = o.remote_layers;
    ro.timeout = std::chrono::milliseconds(o.timeout_ms);
    ro.retries = o.retries;
    return std::make_unique<RemoteClient>(std::move(ro));
  }
  Invalid("unknown provider kind '" + kind + "'");
}

json ProviderConfig(const ProviderOptions& o) {
  json j = {{"spec", o.spec}, {"unk_policy", o.unk_policy}};
  j["vocab"] = o.vocab.empty() ? json(nullptr) : InputFile(o.vocab);
  if (o.spec.rfind("remote:", 0) == 0) {
    j["remote_layers"] = o.remote_layers;
    j["timeout_ms"] = o.timeout_ms;
    j["retries"] = o.retries;
  }
  return j;
}

LayerPolicy MakePowerMean(const MetricOptions& o) {
  std::vector<PowerExponent> exponents;
  for (const auto& part : SplitCommas(o.pmeans)) exponents.push_back(PowerExponent::Parse(part));
  std::vector<std::size_t> layers;
  if (!o.pmeans_layers.empty()) {
    for (const auto& part : SplitCommas(o.pmeans_layers)) layers.push_back(ParseIndex(part));
  }
  return LayerPolicy::PowerMean(std::move(layers), std::move(exponents));
}

LayerPolicy MakeSingleLayer(const MetricOptions& o) {
  if (o.layer < -1) Invalid("--layer must be a non-negative index");
  return o.layer < 0 ? LayerPolicy::Single()
                     : LayerPolicy::Single(static_cast<std::size_t>(o.layer));
}

LayerPolicy MakeLayerPolicy(const MetricOptions& o) {
  if (!o.pmeans.empty()) {
    if (o.layer >= 0) Invalid("--layer and --pmeans cannot be combined");
    return MakePowerMean(o);
  }
  if (!o.pmeans_layers.empty()) Invalid("--pmeans-layers needs --pmeans");
  return MakeSingleLayer(o);
}

// Layer, filter and baseline; idf is resolved once the tokens are known.
ScoreConfig BaseConfig(const MetricOptions& o, const std::string& provider_fingerprint) {
  ScoreConfig cfg;
  cfg.layer = MakeLayerPolicy(o);
  if (o.rm) {
    cfg.filter.punctuation = true;
    cfg.filter.continuation = true;
  }
  if (!o.baseline.empty()) {
    RequireFile(o.baseline, "baseline");
    cfg.baseline = RescaleBaseline::Load(o.baseline);
    if (cfg.baseline->provider != provider_fingerprint) {
      Log(LogLevel::kWarn, "baseline was computed with provider '" + cfg.baseline->provider +
                               "', scoring with '" + provider_fingerprint + "'");
    }
  }
  if (o.idf != "IDF-L" && !o.idf_table.empty()) Invalid("--idf-table is only used with --idf IDF-L");
  return cfg;
}

std::optional<IdfPair> ResolveIdf(const MetricOptions& o, std::span<const TokenSequence> refs,
                                  std::span<const TokenSequence> cands) {
  if (o.idf == "none") return std::nullopt;
  const IdfVariant variant = ParseIdfVariant(o.idf);
  if (variant == IdfVariant::kIdfL) {
    if (o.idf_table.empty()) Invalid("--idf IDF-L needs --idf-table");
    RequireFile(o.idf_table, "idf table");
    auto table = std::make_shared<const IdfTable>(IdfTable::Load(o.idf_table));
    return IdfPair{table, table};
  }
  return BuildIdfVariant(refs, cands, variant);
}

json MetricConfig(const MetricOptions& o, const ScoreConfig& cfg) {
  json j;
  j["layer"] = cfg.layer.Describe();
  j["idf"] = o.idf;
  j["idf_table"] = o.idf_table.empty() ? json(nullptr) : InputFile(o.idf_table);
  j["rm"] = o.rm;
  if (cfg.baseline) {
    j["baseline"] = InputFile(o.baseline);
    j["baseline_values"] = json::parse(cfg.baseline->Serialize());
  } else {
    j["baseline"] = nullptr;
  }
  j["scorer"] = cfg.Describe();
  return j;
}

json ReportHeader(std::string_view command, json config, const std::string& provider,
                  std::optional<std::uint64_t> seed) {
  json r;
  r["report_version"] = kReportVersion;
  r["command"] = command;
  r["config"] = std::move(config);
  r["provider"] = provider.empty() ? json(nullptr) : json(provider);
  r["seed"] = seed ? json(*seed) : json(nullptr);
  return r;
}

void WriteReport(const std::string& out, const json& report) {
  WriteAtomic(out, report.dump(2) + "\n");
  Log(LogLevel::kInfo, "wrote " + out);
}

// ---- dataset helpers

SegmentDataset LoadDataset(const std::string& path) {
  RequireFile(path, "segment corpus");
  SegmentDataset ds = LoadSegmentTsv(path);
  ds.Validate();
  if (ds.references.empty()) Invalid("segment corpus has no rows: " + path);
  return ds;
}

// Fetches every sentence of the dataset once and serves later lookups from
// memory. Tokens are returned for idf construction.
struct CachedDataset {
  std::unique_ptr<PrecomputedStore> store;
  std::vector<TokenSequence> reference_tokens;
  std::vector<TokenSequence> candidate_tokens;
};

CachedDataset CacheDataset(const SegmentDataset& ds, const EmbeddingProvider& provider) {
  EmbeddedDataset data = FetchDataset(ds, provider);
  CachedDataset out;
  for (const auto& [id, text] : ds.references) {
    out.reference_tokens.push_back(data.at(ReferenceKey(id)).tokens);
  }
  for (const auto& [system, outputs] : ds.systems) {
    for (const auto& [id, text] : outputs) {
      out.candidate_tokens.push_back(data.at(CandidateKey(system, id)).tokens);
    }
  }
  std::vector<EmbeddingRecord> records;
  records.reserve(data.records.size());
  for (auto& [key, rec] : data.records) {
    rec.id = key;
    records.push_back(std::move(rec));
  }
  out.store = std::make_unique<PrecomputedStore>(std::move(records));
  return out;
}

std::vector<SegmentTable> SegmentMetrics(const SegmentDataset& ds, const CachedDataset& cache,
                                         const ScoreConfig& cfg, bool include_human) {
  GreedyTables greedy = ScoreDatasetGreedy(ds, *cache.store, cfg);
  std::vector<SegmentTable> tables = {std::move(greedy.precision), std::move(greedy.recall),
                                      std::move(greedy.f1),
                                      ScoreSegments(ds, SentBleuMetric(ds))};
  if (include_human) tables.push_back(ScoreSegments(ds, HumanMetric(ds)));
  return tables;
}

// One row per (system, id) with every metric's score and the judgment.
json SegmentRows(const SegmentDataset& ds, const std::vector<SegmentTable>& tables) {
  json rows = json::array();
  for (const auto& [system, outputs] : ds.systems) {
    for (const auto& [id, text] : outputs) {
      json row = {{"system", system}, {"id", id}};
      const auto h = ds.Human(system, id);
      row["human"] = h ? json(*h) : json(nullptr);
      for (const auto& t : tables) row[t.metric] = t.at(system, id);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Judged segments in dataset order, the order CorrelateSegments uses.
std::vector<double> JudgedScores(const SegmentDataset& ds, const SegmentTable& table) {
  std::vector<double> out;
  for (const auto& [system, outputs] : ds.systems) {
    for (const auto& [id, text] : outputs) {
      if (ds.Human(system, id)) out.push_back(table.at(system, id));
    }
  }
  return out;
}

std::vector<double> JudgedHuman(const SegmentDataset& ds) {
  std::vector<double> out;
  for (const auto& [system, outputs] : ds.systems) {
    for (const auto& [id, text] : outputs) {
      if (const auto h = ds.Human(system, id)) out.push_back(*h);
    }
  }
  return out;
}

template <typename F>
json ErrorEntry(F&& compute) {
  try {
    return compute();
  } catch (const Error& e) {
    return {{"error", e.what()}};
  }
}

// ---- commands

struct ScoreArgs {
  std::string refs, cands, out, metric = "greedy";
  ProviderOptions provider;
  MetricOptions metric_opts;
};

int CmdScore(const ScoreArgs& a) {
  RequireFile(a.refs, "references");
  RequireFile(a.cands, "candidates");
  std::map<std::string, std::vector<std::string>> refs;
  for (auto& row : LoadIdTextTsv(a.refs)) refs[row.id].push_back(std::move(row.text));
  const auto cands = LoadIdTextTsv(a.cands);
  std::vector<std::string> orphans;
  std::set<std::string> seen;
  for (const auto& c : cands) {
    if (!seen.insert(c.id).second) Invalid("duplicate candidate id '" + c.id + "'");
    if (!refs.contains(c.id)) orphans.push_back(c.id);
  }
  if (!orphans.empty()) {
    std::string list;
    for (const auto& id : orphans) list += (list.empty() ? "" : ", ") + id;
    Invalid("candidate ids without a reference: " + list);
  }

  std::string lines;
  if (a.metric == "sentbleu") {
    if (!a.provider.spec.empty()) Log(LogLevel::kWarn, "--provider is ignored for sentbleu");
    for (const auto& c : cands) {
      const auto cand = SplitWhitespace(c.text);
      double best = -1.0;
      std::size_t best_index = 0;
      const auto& texts = refs.at(c.id);
      for (std::size_t k = 0; k < texts.size(); ++k) {
        const double b = SentenceBleu(cand, SplitWhitespace(texts[k]));
        if (b > best) {
          best = b;
          best_index = k;
        }
      }
      const json line = {{"id", c.id},       {"metric", "sentbleu"}, {"P", nullptr},
                         {"R", nullptr},     {"F", best},            {"rescaled", false},
                         {"ref_index", best_index}};
      lines += line.dump() + "\n";
    }
    WriteAtomic(a.out, lines);
    return 0;
  }

  if (a.provider.spec.empty()) Invalid("--provider is required for the greedy metric");
  const auto provider = MakeProvider(a.provider);
  ScoreConfig cfg = BaseConfig(a.metric_opts, provider->Fingerprint());

  std::vector<Sentence> sentences;
  std::vector<const std::string*> ref_ids;
  for (const auto& [id, texts] : refs) {
    for (std::size_t k = 0; k < texts.size(); ++k) {
      sentences.push_back({ReferenceKey(id, k), texts[k], std::nullopt});
      ref_ids.push_back(&id);
    }
  }
  const std::size_t ref_count = sentences.size();
  for (const auto& c : cands) sentences.push_back({"cand:" + c.id, c.text, std::nullopt});
  const auto records = provider->FetchBatch(sentences);

  std::vector<TokenSequence> ref_tokens, cand_tokens;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (i < ref_count ? ref_tokens : cand_tokens).push_back(records[i].tokens);
  }
  cfg.idf = ResolveIdf(a.metric_opts, ref_tokens, cand_tokens);

  std::map<std::string, std::vector<EmbeddedSentence>> ref_embedded;
  for (std::size_t i = 0; i < ref_count; ++i) {
    ref_embedded[*ref_ids[i]].push_back(EmbedRecord(records[i], cfg.layer));
  }
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto cand = EmbedRecord(records[ref_count + i], cfg.layer);
    const auto r = MultiReferenceScore(cand, ref_embedded.at(cands[i].id), cfg);
    json line = {{"id", cands[i].id},     {"P", r.score.precision},
                 {"R", r.score.recall},   {"F", r.score.f1},
                 {"rescaled", r.score.rescaled}, {"ref_index", r.reference_index}};
    if (r.score.degenerate) line["degenerate"] = true;
    lines += line.dump() + "\n";
  }
  WriteAtomic(a.out, lines);
  Log(LogLevel::kInfo, "scored " + std::to_string(cands.size()) + " candidates");
  return 0;
}

struct IdfArgs {
  std::string refs, out;
  ProviderOptions provider;
};

int CmdIdf(const IdfArgs& a) {
  RequireFile(a.refs, "references");
  const auto rows = LoadIdTextTsv(a.refs);
  const auto provider = MakeProvider(a.provider);
  std::vector<Sentence> sentences;
  std::map<std::string, std::size_t> per_id;
  for (const auto& row : rows) {
    sentences.push_back({ReferenceKey(row.id, per_id[row.id]++), row.text, std::nullopt});
  }
  std::vector<TokenSequence> tokens;
  for (auto& rec : provider->FetchBatch(sentences)) tokens.push_back(std::move(rec.tokens));
  WriteAtomic(a.out, BuildIdf(tokens).Serialize());
  return 0;
}

struct BaselineArgs {
  std::string pool, out;
  std::size_t pairs = 10000;
  std::uint64_t seed = 0;
  ProviderOptions provider;
  MetricOptions metric_opts;
};

int CmdBaseline(const BaselineArgs& a) {
  RequireFile(a.pool, "pool");
  if (!a.metric_opts.baseline.empty()) Invalid("--baseline makes no sense when computing one");
  const auto rows = LoadIdTextTsv(a.pool);
  const auto provider = MakeProvider(a.provider);
  ScoreConfig cfg = BaseConfig(a.metric_opts, provider->Fingerprint());
  std::vector<Sentence> pool;
  std::map<std::string, std::size_t> per_id;
  for (const auto& row : rows) {
    pool.push_back({"pool:" + row.id + "#" + std::to_string(per_id[row.id]++), row.text,
                    std::nullopt});
  }
  if (a.metric_opts.idf != "none") {
    std::vector<TokenSequence> tokens;
    for (auto& rec : provider->FetchBatch(pool)) tokens.push_back(std::move(rec.tokens));
    cfg.idf = ResolveIdf(a.metric_opts, tokens, tokens);
  }
  const RescaleBaseline base = ComputeBaseline(pool, a.pairs, *provider, cfg, a.seed);
  json j = json::parse(base.Serialize());
  j["report_version"] = kReportVersion;
  j["seed"] = a.seed;
  j["config"] = {{"pool", InputFile(a.pool)},
                 {"pairs", a.pairs},
                 {"provider", ProviderConfig(a.provider)},
                 {"metric", MetricConfig(a.metric_opts, cfg)}};
  WriteAtomic(a.out, j.dump() + "\n");
  return 0;
}

struct EvalArgs {
  std::string data, out, system_human;
  bool include_human = false;
  std::size_t bootstrap = 0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  ProviderOptions provider;
  MetricOptions metric_opts;
};

struct PreparedEval {
  SegmentDataset ds;
  std::unique_ptr<EmbeddingProvider> provider;
  CachedDataset cache;
  ScoreConfig cfg;
};

PreparedEval PrepareEval(const std::string& data, const ProviderOptions& popts,
                         const MetricOptions& mopts) {
  PreparedEval p;
  p.ds = LoadDataset(data);
  p.provider = MakeProvider(popts);
  p.cfg = BaseConfig(mopts, p.provider->Fingerprint());
  p.cache = CacheDataset(p.ds, *p.provider);
  p.cfg.idf = ResolveIdf(mopts, p.cache.reference_tokens, p.cache.candidate_tokens);
  return p;
}

json EvalConfig(const EvalArgs& a, const ScoreConfig& cfg) {
  return {{"data", InputFile(a.data)},
          {"provider", ProviderConfig(a.provider)},
          {"metric", MetricConfig(a.metric_opts, cfg)}};
}

int CmdEvalSegment(const EvalArgs& a) {
  if (a.bootstrap > 0 && !a.has_seed) Invalid("--bootstrap needs --seed");
  auto p = PrepareEval(a.data, a.provider, a.metric_opts);
  const auto tables = SegmentMetrics(p.ds, p.cache, p.cfg, a.include_human);
  const auto human = JudgedHuman(p.ds);
  if (human.size() < 2) Invalid("segment-level evaluation needs at least two judged segments");

  json config = EvalConfig(a, p.cfg);
  config["include_human"] = a.include_human;
  config["bootstrap"] = a.bootstrap;
  json report = ReportHeader("eval-segment", std::move(config), p.provider->Fingerprint(),
                             a.has_seed ? std::optional(a.seed) : std::nullopt);
  std::vector<std::string> names;
  std::vector<std::vector<double>> scores;
  json metrics = json::object();
  for (const auto& t : tables) {
    metrics[t.metric] = ErrorEntry([&] { return ToJson(CorrelateSegments(p.ds, t)); });
    names.push_back(t.metric);
    scores.push_back(JudgedScores(p.ds, t));
  }
  report["metrics"] = std::move(metrics);
  report["williams"] = WilliamsMatrix(names, scores, human);
  report["bootstrap"] =
      a.bootstrap > 0 ? BootstrapMatrix(names, scores, human, a.bootstrap, a.seed) : json(nullptr);
  report["segments"] = SegmentRows(p.ds, tables);
  WriteReport(a.out, report);
  return 0;
}

std::map<std::string, double> SystemHuman(const EvalArgs& a, const SegmentDataset& ds) {
  std::map<std::string, double> human;
  if (!a.system_human.empty()) {
    RequireFile(a.system_human, "system human scores");
    human = LoadSystemHumanTsv(a.system_human);
    for (const auto& s : ds.SystemNames()) {
      if (!human.contains(s)) Invalid("no system-level human score for '" + s + "'");
    }
    for (const auto& [s, v] : human) {
      if (!ds.systems.contains(s)) Invalid("system-level human score for unknown system '" + s + "'");
    }
    return human;
  }
  for (const auto& [system, outputs] : ds.systems) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [id, text] : outputs) {
      if (const auto h = ds.Human(system, id)) {
        sum += *h;
        ++n;
      }
    }
    if (n == 0) Invalid("system '" + system + "' has no judged segments");
    human[system] = sum / static_cast<double>(n);
  }
  return human;
}

int CmdEvalSystem(const EvalArgs& a) {
  auto p = PrepareEval(a.data, a.provider, a.metric_opts);
  const auto tables = SegmentMetrics(p.ds, p.cache, p.cfg, false);
  const auto human_map = SystemHuman(a, p.ds);
  const auto systems = p.ds.SystemNames();
  std::vector<double> human;
  for (const auto& s : systems) human.push_back(human_map.at(s));

  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  for (const auto& t : tables) {
    const auto metric = MetricFromTable(t.metric, t.metric, t);
    std::vector<double> col;
    for (const auto& s : systems) col.push_back(SystemScore(p.ds, s, metric));
    names.push_back(t.metric);
    columns.push_back(std::move(col));
  }
  std::vector<double> bleu;
  for (const auto& s : systems) {
    std::vector<SentencePair> pairs;
    for (const auto& [id, ref] : p.ds.references) {
      pairs.emplace_back(SplitWhitespace(p.ds.Candidate(s, id)), SplitWhitespace(ref));
    }
    bleu.push_back(CorpusBleu(pairs));
  }
  names.push_back("bleu");
  columns.push_back(std::move(bleu));

  json config = EvalConfig(a, p.cfg);
  config["system_human"] = a.system_human.empty() ? json("segment-mean")
                                                  : InputFile(a.system_human);
  json report = ReportHeader("eval-system", std::move(config), p.provider->Fingerprint(),
                             std::nullopt);
  json human_json = json::object();
  for (std::size_t i = 0; i < systems.size(); ++i) human_json[systems[i]] = human[i];
  report["human"] = std::move(human_json);
  json metrics = json::object();
  for (std::size_t m = 0; m < names.size(); ++m) {
    json entry;
    json by_system = json::object();
    for (std::size_t i = 0; i < systems.size(); ++i) by_system[systems[i]] = columns[m][i];
    entry["scores"] = std::move(by_system);
    entry["pearson"] = ErrorEntry([&] { return json(Pearson(columns[m], human)); });
    entry["kendall"] = ErrorEntry([&] { return json(Kendall(columns[m], human)); });
    metrics[names[m]] = std::move(entry);
  }
  report["metrics"] = std::move(metrics);
  report["williams"] = WilliamsMatrix(names, columns, human);
  report["segments"] = SegmentRows(p.ds, tables);
  WriteReport(a.out, report);
  return 0;
}

struct ModelSelectArgs {
  std::string data, out;
  std::size_t hybrids = 10000, sample = 100, trials = 10000;
  std::uint64_t seed = 0;
  ProviderOptions provider;
  MetricOptions metric_opts;
};

int CmdModelSelect(const ModelSelectArgs& a) {
  if (a.sample > a.hybrids) {
    throw Error(ErrorKind::kSampleTooLarge, "--sample " + std::to_string(a.sample) +
                                                " exceeds --hybrids " + std::to_string(a.hybrids));
  }
  auto p = PrepareEval(a.data, a.provider, a.metric_opts);
  const auto tables = SegmentMetrics(p.ds, p.cache, p.cfg, false);
  const auto hybrids = HybridSupersample(p.ds, a.hybrids, a.seed);
  json config = {{"data", InputFile(a.data)},
                 {"provider", ProviderConfig(a.provider)},
                 {"metric", MetricConfig(a.metric_opts, p.cfg)},
                 {"hybrids", a.hybrids},
                 {"sample", a.sample},
                 {"trials", a.trials}};
  json report = ReportHeader("model-select", std::move(config), p.provider->Fingerprint(), a.seed);
  json metrics = json::object();
  for (const auto& t : tables) {
    metrics[t.metric] = ToJson(ModelSelection(p.ds, hybrids, t, a.trials, a.sample, a.seed));
  }
  report["metrics"] = std::move(metrics);
  report["segments"] = SegmentRows(p.ds, tables);
  WriteReport(a.out, report);
  return 0;
}

struct AblationArgs {
  std::string data, out, flags = "vanilla,IDF-S,IDF-S+SEP,RM,IDF-S+RM,IDF-S+SEP+RM";
  std::string large_corpus;
  ProviderOptions provider;
  MetricOptions metric_opts;
};

int CmdAblation(const AblationArgs& a) {
  const auto& m = a.metric_opts;
  if (m.idf != "none" || !m.idf_table.empty() || m.rm || !m.baseline.empty()) {
    Invalid("ablation sets idf and filtering per row; use --flags instead");
  }
  std::vector<AblationFlags> flag_sets;
  bool wants_pmeans = false;
  for (const auto& name : SplitCommas(a.flags)) {
    flag_sets.push_back(AblationFlags::Parse(name));
    wants_pmeans = wants_pmeans || flag_sets.back().pmeans;
  }
  if (wants_pmeans && m.pmeans.empty()) Invalid("PMEANS rows need --pmeans");
  const SegmentDataset ds = LoadDataset(a.data);
  const auto provider = MakeProvider(a.provider);

  AblationSetup setup;
  setup.layer = MakeSingleLayer(m);
  setup.pmeans_layer = m.pmeans.empty() ? setup.layer : MakePowerMean(m);
  if (!a.large_corpus.empty()) {
    RequireFile(a.large_corpus, "large corpus");
    std::vector<Sentence> sentences;
    std::size_t n = 0;
    for (auto& row : LoadIdTextTsv(a.large_corpus)) {
      sentences.push_back({"corpus:" + std::to_string(n++), std::move(row.text), std::nullopt});
    }
    for (auto& rec : provider->FetchBatch(sentences)) {
      setup.large_corpus.push_back(std::move(rec.tokens));
    }
  }
  json config = {{"data", InputFile(a.data)},
                 {"provider", ProviderConfig(a.provider)},
                 {"flags", a.flags},
                 {"layer", setup.layer.Describe()},
                 {"pmeans_layer", setup.pmeans_layer.Describe()},
                 {"large_corpus",
                  a.large_corpus.empty() ? json(nullptr) : InputFile(a.large_corpus)}};
  json report = ReportHeader("ablation", std::move(config), provider->Fingerprint(), std::nullopt);
  report["rows"] = CompareMatching(ds, *provider, flag_sets, setup);
  WriteReport(a.out, report);
  return 0;
}

struct LayerSweepArgs {
  std::string data, out;
  std::size_t first = 0, last = 0;
  ProviderOptions provider;
  MetricOptions metric_opts;
};

int CmdLayerSweep(const LayerSweepArgs& a) {
  const auto& m = a.metric_opts;
  if (a.provider.spec.rfind("precomputed:", 0) != 0) {
    Invalid("layer-sweep needs a precomputed:STORE provider");
  }
  if (m.layer >= 0 || !m.pmeans.empty()) Invalid("layer-sweep chooses the layer itself");
  const SegmentDataset ds = LoadDataset(a.data);
  const std::string path = a.provider.spec.substr(std::string("precomputed:").size());
  RequireFile(path, "precomputed store");
  const auto store = PrecomputedStore::FromFile(path);
  ScoreConfig cfg = BaseConfig(m, store->Fingerprint());
  const auto tokens = [&](const std::string& key) {
    const auto* rec = store->Find(key);
    if (!rec) throw Error(ErrorKind::kIncompleteStacks, "store lacks '" + key + "'");
    return rec->tokens;
  };
  std::vector<TokenSequence> ref_tokens, cand_tokens;
  for (const auto& [id, text] : ds.references) ref_tokens.push_back(tokens(ReferenceKey(id)));
  for (const auto& [system, outputs] : ds.systems) {
    for (const auto& [id, text] : outputs) cand_tokens.push_back(tokens(CandidateKey(system, id)));
  }
  cfg.idf = ResolveIdf(m, ref_tokens, cand_tokens);
  const auto result = LayerSweep(ds, *store, a.first, a.last, cfg);
  json config = {{"data", InputFile(a.data)},
                 {"provider", ProviderConfig(a.provider)},
                 {"metric", MetricConfig(m, cfg)},
                 {"first", a.first},
                 {"last", a.last}};
  json report = ReportHeader("layer-sweep", std::move(config), store->Fingerprint(), std::nullopt);
  report["best_layer"] = result.best_layer;
  json curve = json::array();
  for (const auto& [layer, r] : result.curve) curve.push_back({{"layer", layer}, {"pearson", r}});
  report["curve"] = std::move(curve);
  WriteReport(a.out, report);
  return 0;
}

struct AucArgs {
  std::string pairs, out;
  ProviderOptions provider;
  MetricOptions metric_opts;
};

int CmdAuc(const AucArgs& a) {
  RequireFile(a.pairs, "paraphrase pairs");
  const auto pairs = LoadParaphraseTsv(a.pairs);
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    if (!ids.insert(p.id).second) Invalid("duplicate pair id '" + p.id + "'");
  }
  const auto provider = MakeProvider(a.provider);
  ScoreConfig cfg = BaseConfig(a.metric_opts, provider->Fingerprint());
  std::vector<Sentence> sentences;
  for (const auto& p : pairs) sentences.push_back({"s1:" + p.id, p.sentence1, std::nullopt});
  for (const auto& p : pairs) sentences.push_back({"s2:" + p.id, p.sentence2, std::nullopt});
  const auto records = provider->FetchBatch(sentences);
  const std::size_t n = pairs.size();
  std::vector<TokenSequence> first, second;
  for (std::size_t i = 0; i < n; ++i) {
    first.push_back(records[i].tokens);
    second.push_back(records[n + i].tokens);
  }
  cfg.idf = ResolveIdf(a.metric_opts, first, second);

  std::vector<bool> labels;
  std::vector<double> greedy, bleu;
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ref = EmbedRecord(records[i], cfg.layer);
    const auto cand = EmbedRecord(records[n + i], cfg.layer);
    labels.push_back(pairs[i].label);
    greedy.push_back(ScorePair(cand, ref, cfg).f1);
    bleu.push_back(SentenceBleu(SplitWhitespace(pairs[i].sentence2),
                                SplitWhitespace(pairs[i].sentence1)));
    rows.push_back({{"id", pairs[i].id},
                    {"label", pairs[i].label},
                    {"greedy-F", greedy.back()},
                    {"sentbleu", bleu.back()}});
  }
  json config = {{"pairs", InputFile(a.pairs)},
                 {"provider", ProviderConfig(a.provider)},
                 {"metric", MetricConfig(a.metric_opts, cfg)}};
  json report = ReportHeader("auc", std::move(config), provider->Fingerprint(), std::nullopt);
  report["metrics"] = {{"greedy-F", ErrorEntry([&] { return json(RocAuc(labels, greedy)); })},
                       {"sentbleu", ErrorEntry([&] { return json(RocAuc(labels, bleu)); })}};
  report["pairs"] = std::move(rows);
  WriteReport(a.out, report);
  return 0;
}

struct SynthArgs {
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t vocab_size = 50, dim = 32, segments = 40, systems = 5, sentences = 200;
  std::size_t max_subs = 5, min_len = 5, max_len = 12;
  double cosine = 0.95;
};

int CmdSynth(const SynthArgs& a) {
  if (a.vocab_size == 0 || a.dim < 2) Invalid("--vocab-size must be positive and --dim at least 2");
  if (!(a.cosine > -1.0 && a.cosine < 1.0)) Invalid("--cosine must lie in (-1, 1)");
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec || !fs::is_directory(a.out_dir)) Invalid("cannot create output directory " + a.out_dir);
  const fs::path dir(a.out_dir);

  const auto world = MakeSynonymWorld(a.vocab_size, a.dim, a.cosine, a.seed);
  const auto ds = MakeSyntheticDataset(world, a.segments, a.systems, a.seed);
  const auto corpus =
      MakeSubstitutionCorpus(world, a.sentences, a.max_subs, a.min_len, a.max_len, a.seed);

  std::string table;
  for (const auto& [piece, vec] : world.table) {
    table += json({{"piece", piece}, {"vector", vec}}).dump() + "\n";
  }
  std::string segments = "id\tsystem\treference\tcandidate\thuman_score\n";
  for (const auto& [id, ref] : ds.references) {
    for (const auto& system : ds.SystemNames()) {
      const auto h = ds.Human(system, id);
      segments += id + "\t" + system + "\t" + ref + "\t" + ds.Candidate(system, id) + "\t" +
                  (h ? NumberText(*h) : std::string()) + "\n";
    }
  }
  const auto id_of = [](std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%04zu", i);
    return std::string(buf);
  };
  std::string refs = "id\ttext\n", cands = "id\ttext\n", human = "id\thuman_score\n";
  std::string pairs = "id\tsentence1\tsentence2\tlabel\n";
  const std::size_t n = corpus.references.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string ref = JoinWords(corpus.references[i]);
    refs += id_of(i) + "\t" + ref + "\n";
    cands += id_of(i) + "\t" + JoinWords(corpus.candidates[i]) + "\n";
    human += id_of(i) + "\t" + NumberText(corpus.human[i]) + "\n";
    // Even ids pair a sentence with its synonym rewrite, odd ids with the next reference.
    const bool positive = i % 2 == 0;
    const std::string other = positive ? JoinWords(corpus.candidates[i])
                                       : JoinWords(corpus.references[(i + 1) % n]);
    pairs += id_of(i) + "\t" + ref + "\t" + other + "\t" + (positive ? "1" : "0") + "\n";
  }
  const std::map<std::string, const std::string*> files = {
      {"table.jsonl", &table}, {"segments.tsv", &segments}, {"refs.tsv", &refs},
      {"cands.tsv", &cands},   {"human.tsv", &human},       {"pairs.tsv", &pairs}};
  json manifest_files = json::object();
  for (const auto& [name, content] : files) {
    WriteAtomic(dir / name, *content);
    manifest_files[name] = Hex64(Fnv1a64(*content));
  }
  json config = {{"vocab_size", a.vocab_size}, {"dim", a.dim},          {"cosine", a.cosine},
                 {"segments", a.segments},     {"systems", a.systems},  {"sentences", a.sentences},
                 {"max_subs", a.max_subs},     {"min_len", a.min_len},  {"max_len", a.max_len}};
  json report = ReportHeader("synth", std::move(config), "", a.seed);
  report["files"] = std::move(manifest_files);
  WriteReport((dir / "synth.json").string(), report);
  return 0;
}

}  // namespace

int RunCli(int argc, char** argv) {
  CLI::App app{
      "embscore: embedding-matching evaluation metric and its evaluation harness.\n"
      "Inputs: segment corpora are TSV (id, system, reference, candidate, human_score);\n"
      "reference/candidate/pool files are TSV (id, text); paraphrase pairs are TSV\n"
      "(id, sentence1, sentence2, label). Static tables are JSON Lines {piece, vector};\n"
      "precomputed stores are JSON Lines {id, tokens, layers}. Store keys: ref:<id>,\n"
      "sys:<system>:<id>, cand:<id>, pool:<id>#<k>, s1:<id>, s2:<id>.\n"
      "Set EMBSCORE_LOG=error|warn|info|debug for log verbosity."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand all help");

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "score candidates against references (JSON Lines)");
  c_score->add_option("--refs", score.refs, "references TSV (id, text); ids may repeat")->required();
  c_score->add_option("--cands", score.cands, "candidates TSV (id, text)")->required();
  c_score->add_option("--out", score.out, "output JSON Lines")->required();
  c_score->add_option("--metric", score.metric, "greedy or sentbleu")
      ->check(CLI::IsMember({"greedy", "sentbleu"}));
  AddProviderOptions(c_score, score.provider, false);
  AddMetricOptions(c_score, score.metric_opts);

  IdfArgs idf;
  auto* c_idf = app.add_subcommand("idf", "build an idf table from references");
  c_idf->add_option("--refs", idf.refs, "references TSV (id, text)")->required();
  c_idf->add_option("--out", idf.out, "output idf table (JSON Lines)")->required();
  AddProviderOptions(c_idf, idf.provider, true);

  BaselineArgs base;
  auto* c_base = app.add_subcommand("baseline", "estimate the random-pair rescaling baseline");
  c_base->add_option("--pool", base.pool, "sentence pool TSV (id, text)")->required();
  c_base->add_option("--pairs", base.pairs, "random pairs to score")->capture_default_str();
  c_base->add_option("--seed", base.seed, "random seed")->required();
  c_base->add_option("--out", base.out, "output baseline JSON")->required();
  AddProviderOptions(c_base, base.provider, true);
  AddMetricOptions(c_base, base.metric_opts);

  EvalArgs seg;
  auto* c_seg = app.add_subcommand("eval-segment", "segment-level correlation report");
  c_seg->add_option("--data", seg.data, "segment corpus TSV")->required();
  c_seg->add_option("--out", seg.out, "output report JSON")->required();
  c_seg->add_flag("--include-human", seg.include_human, "add the human scores as a metric");
  c_seg->add_option("--bootstrap", seg.bootstrap, "bootstrap iterations (0 = off)");
  auto* seg_seed = c_seg->add_option("--seed", seg.seed, "random seed for the bootstrap");
  AddProviderOptions(c_seg, seg.provider, true);
  AddMetricOptions(c_seg, seg.metric_opts);

  EvalArgs sys;
  auto* c_sys = app.add_subcommand("eval-system", "system-level correlation report");
  c_sys->add_option("--data", sys.data, "segment corpus TSV")->required();
  c_sys->add_option("--system-human", sys.system_human, "TSV (system, human_score)");
  c_sys->add_option("--out", sys.out, "output report JSON")->required();
  AddProviderOptions(c_sys, sys.provider, true);
  AddMetricOptions(c_sys, sys.metric_opts);

  ModelSelectArgs ms;
  auto* c_ms = app.add_subcommand("model-select", "hybrid-system model selection report");
  c_ms->add_option("--data", ms.data, "segment corpus TSV")->required();
  c_ms->add_option("--hybrids", ms.hybrids, "hybrid systems to draw")->capture_default_str();
  c_ms->add_option("--sample", ms.sample, "hybrids per trial")->capture_default_str();
  c_ms->add_option("--trials", ms.trials, "trials")->capture_default_str();
  c_ms->add_option("--seed", ms.seed, "random seed")->required();
  c_ms->add_option("--out", ms.out, "output report JSON")->required();
  AddProviderOptions(c_ms, ms.provider, true);
  AddMetricOptions(c_ms, ms.metric_opts);

  AblationArgs abl;
  auto* c_abl = app.add_subcommand("ablation", "greedy matching vs transport under flag sets");
  c_abl->add_option("--data", abl.data, "segment corpus TSV")->required();
  c_abl->add_option("--flags", abl.flags, "comma-separated rows, e.g. vanilla,IDF-S+SEP+RM")
      ->capture_default_str();
  c_abl->add_option("--large-corpus", abl.large_corpus, "references TSV (id, text) for IDF-L");
  c_abl->add_option("--out", abl.out, "output report JSON")->required();
  AddProviderOptions(c_abl, abl.provider, true);
  AddMetricOptions(c_abl, abl.metric_opts);

  LayerSweepArgs sweep;
  auto* c_sweep = app.add_subcommand("layer-sweep", "segment-level pearson per layer");
  c_sweep->add_option("--data", sweep.data, "segment corpus TSV")->required();
  c_sweep->add_option("--first", sweep.first, "first layer")->capture_default_str();
  c_sweep->add_option("--last", sweep.last, "last layer")->required();
  c_sweep->add_option("--out", sweep.out, "output report JSON")->required();
  AddProviderOptions(c_sweep, sweep.provider, true);
  AddMetricOptions(c_sweep, sweep.metric_opts);

  AucArgs auc;
  auto* c_auc = app.add_subcommand("auc", "paraphrase detection ROC AUC");
  c_auc->add_option("--pairs", auc.pairs, "paraphrase TSV (id, sentence1, sentence2, label)")
      ->required();
  c_auc->add_option("--out", auc.out, "output report JSON")->required();
  AddProviderOptions(c_auc, auc.provider, true);
  AddMetricOptions(c_auc, auc.metric_opts);

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "write a seeded synthetic world and corpora");
  c_syn->add_option("--out-dir", syn.out_dir, "output directory")->required();
  c_syn->add_option("--seed", syn.seed, "random seed")->required();
  c_syn->add_option("--vocab-size", syn.vocab_size)->capture_default_str();
  c_syn->add_option("--dim", syn.dim)->capture_default_str();
  c_syn->add_option("--cosine", syn.cosine, "synonym cosine")->capture_default_str();
  c_syn->add_option("--segments", syn.segments)->capture_default_str();
  c_syn->add_option("--systems", syn.systems)->capture_default_str();
  c_syn->add_option("--sentences", syn.sentences, "substitution corpus size")
      ->capture_default_str();
  c_syn->add_option("--max-subs", syn.max_subs)->capture_default_str();
  c_syn->add_option("--min-len", syn.min_len)->capture_default_str();
  c_syn->add_option("--max-len", syn.max_len)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_score->parsed()) return CmdScore(score);
    if (c_idf->parsed()) return CmdIdf(idf);
    if (c_base->parsed()) return CmdBaseline(base);
    if (c_seg->parsed()) {
      seg.has_seed = seg_seed->count() > 0;
      return CmdEvalSegment(seg);
    }
    if (c_sys->parsed()) return CmdEvalSystem(sys);
    if (c_ms->parsed()) return CmdModelSelect(ms);
    if (c_abl->parsed()) return CmdAblation(abl);
    if (c_sweep->parsed()) return CmdLayerSweep(sweep);
    if (c_auc->parsed()) return CmdAuc(auc);
    if (c_syn->parsed()) return CmdSynth(syn);
  } catch (const Error& e) {
    Log(LogLevel::kError, e.what());
    return ExitCode(e.kind());
  } catch (const std::exception& e) {
    Log(LogLevel::kError, e.what());
    return 1;
  }
  return 2;
}

}  // namespace embscore
