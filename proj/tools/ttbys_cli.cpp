// ttbys: operator entry point. Knowledge-base building, single-turn
// inference, static evaluation, sweeps, ablations, corpus tooling, the
// agent HTTP service and an offline demo.
//
// Settings are layered: built-in defaults < --config file (or TTBYS_CONFIG)
// < TTBYS_* environment variables < command-line flags.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or validation error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ttbys/agent_service.hpp"
#include "ttbys/dataset.hpp"
#include "ttbys/embedding.hpp"
#include "ttbys/error.hpp"
#include "ttbys/evaluation.hpp"
#include "ttbys/fusion.hpp"
#include "ttbys/http_server.hpp"
#include "ttbys/knowledge_base.hpp"
#include "ttbys/llm_gateway.hpp"
#include "ttbys/pipeline.hpp"

namespace {

using namespace ttbys;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct ServerSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin;
  std::string data_dir;
};

struct Settings {
  BackendConfig backend;
  EmbedderConfig embedder;
  BlendConfig blend;
  ServerSettings server;
};

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
}

template <class T>
void take(const json& section, const char* key, T& into) {
  if (section.contains(key)) into = section.at(key).get<T>();
}

void apply_file(Settings& s, const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::Parse, "config file must hold an object");
  if (doc.contains("backend")) {
    const auto& b = doc.at("backend");
    if (b.contains("kind")) {
      const auto kind = b.at("kind").get<std::string>();
      if (kind == "mock") s.backend.kind = BackendConfig::Kind::Mock;
      else if (kind == "http") s.backend.kind = BackendConfig::Kind::Http;
      else fail(ErrorCode::InvalidArgument, "backend.kind must be mock or http");
    }
    take(b, "endpoint", s.backend.endpoint);
    take(b, "model", s.backend.model);
    take(b, "api_key", s.backend.api_key);
    take(b, "temperature", s.backend.temperature);
    take(b, "top_logprobs", s.backend.top_logprobs);
    take(b, "max_in_flight", s.backend.max_in_flight);
    if (b.contains("timeout_ms")) s.backend.timeout = std::chrono::milliseconds(b.at("timeout_ms").get<long>());
    if (b.contains("mock_script")) s.backend.mock_script = b.at("mock_script").get<std::string>();
  }
  if (doc.contains("embedder")) {
    const auto& e = doc.at("embedder");
    if (e.contains("kind")) {
      const auto kind = e.at("kind").get<std::string>();
      if (kind == "hashing") s.embedder.kind = EmbedderConfig::Kind::Hashing;
      else if (kind == "remote") s.embedder.kind = EmbedderConfig::Kind::Remote;
      else fail(ErrorCode::InvalidArgument, "embedder.kind must be hashing or remote");
    }
    take(e, "dimension", s.embedder.dimension);
    take(e, "endpoint", s.embedder.endpoint);
    take(e, "model", s.embedder.model);
    take(e, "api_key", s.embedder.api_key);
    take(e, "max_in_flight", s.embedder.max_in_flight);
    if (e.contains("timeout_ms")) s.embedder.timeout = std::chrono::milliseconds(e.at("timeout_ms").get<long>());
  }
  if (doc.contains("blend")) {
    json merged = encode(s.blend);
    for (const auto& [k, v] : doc.at("blend").items()) merged[k] = v;
    s.blend = decode_blend_config(merged);
  }
  if (doc.contains("server")) {
    const auto& v = doc.at("server");
    take(v, "host", s.server.host);
    take(v, "port", s.server.port);
    take(v, "cors_origin", s.server.cors_origin);
    take(v, "data_dir", s.server.data_dir);
  }
}

void apply_env(Settings& s) {
  if (auto v = env_or_empty("TTBYS_LLM_ENDPOINT"); !v.empty()) {
    s.backend.endpoint = v;
    s.backend.kind = BackendConfig::Kind::Http;
  }
  if (auto v = env_or_empty("TTBYS_LLM_MODEL"); !v.empty()) s.backend.model = v;
  if (auto v = env_or_empty("TTBYS_LLM_API_KEY"); !v.empty()) s.backend.api_key = v;
  if (auto v = env_or_empty("TTBYS_EMBED_ENDPOINT"); !v.empty()) {
    s.embedder.endpoint = v;
    s.embedder.kind = EmbedderConfig::Kind::Remote;
  }
  if (auto v = env_or_empty("TTBYS_EMBED_MODEL"); !v.empty()) s.embedder.model = v;
  if (auto v = env_or_empty("TTBYS_EMBED_API_KEY"); !v.empty()) s.embedder.api_key = v;
}

// Flags shared by most subcommands. Optional so that an absent flag never
// overrides the file or the environment.
struct CommonFlags {
  std::string config_path;
  std::optional<std::string> backend, llm_endpoint, llm_model, mock_script;
  std::optional<double> temperature;
  std::optional<std::string> embedder, embed_endpoint, embed_model;
  std::optional<std::size_t> dim;
  std::optional<double> alpha, beta, floor;
  std::optional<std::size_t> n1, n2, n3;
};

void add_backend_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config_path, "JSON config file (also TTBYS_CONFIG)");
  cmd->add_option("--backend", f.backend, "Generative backend")->check(CLI::IsMember({"mock", "http"}));
  cmd->add_option("--llm-endpoint", f.llm_endpoint, "Chat-completions URL");
  cmd->add_option("--llm-model", f.llm_model, "Model name sent to the backend");
  cmd->add_option("--mock-script", f.mock_script, "Script file for the mock backend");
  cmd->add_option("--temperature", f.temperature, "Sampling temperature");
}

void add_embedder_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--embedder", f.embedder, "Embedder kind")->check(CLI::IsMember({"hashing", "remote"}));
  cmd->add_option("--embed-endpoint", f.embed_endpoint, "Embeddings URL");
  cmd->add_option("--embed-model", f.embed_model, "Embedding model name");
  cmd->add_option("--dim", f.dim, "Hashing embedder dimension");
}

void add_blend_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-a,--alpha", f.alpha, "Desire blending coefficient");
  cmd->add_option("-b,--beta", f.beta, "Strategy blending coefficient");
  cmd->add_option("--n1", f.n1, "Experiences retrieved by the first think");
  cmd->add_option("--n2", f.n2, "Experiences retrieved by the second think");
  cmd->add_option("--n3", f.n3, "Experiences retrieved by the third think");
  cmd->add_option("--floor", f.floor, "Probability floor for labels absent from the model output");
}

Settings resolve(const CommonFlags& f) {
  Settings s;
  std::string path = f.config_path;
  if (path.empty()) path = env_or_empty("TTBYS_CONFIG");
  if (!path.empty()) apply_file(s, read_json_file(path));
  apply_env(s);

  if (f.backend) s.backend.kind = *f.backend == "http" ? BackendConfig::Kind::Http : BackendConfig::Kind::Mock;
  if (f.llm_endpoint) s.backend.endpoint = *f.llm_endpoint;
  if (f.llm_model) s.backend.model = *f.llm_model;
  if (f.mock_script) s.backend.mock_script = *f.mock_script;
  if (f.temperature) s.backend.temperature = *f.temperature;

  if (f.embedder) s.embedder.kind = *f.embedder == "remote" ? EmbedderConfig::Kind::Remote : EmbedderConfig::Kind::Hashing;
  if (f.embed_endpoint) s.embedder.endpoint = *f.embed_endpoint;
  if (f.embed_model) s.embedder.model = *f.embed_model;
  if (f.dim) s.embedder.dimension = *f.dim;

  if (f.alpha) s.blend.alpha = *f.alpha;
  if (f.beta) s.blend.beta = *f.beta;
  if (f.n1) s.blend.n_first = *f.n1;
  if (f.n2) s.blend.n_second = *f.n2;
  if (f.n3) s.blend.n_third = *f.n3;
  if (f.floor) s.blend.floor = *f.floor;

  s.backend.validate();
  s.embedder.validate();
  s.blend.validate();
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

Summarizer pick_summarizer(const std::string& name, const LlmGateway& llm) {
  if (name == "extractive") return extractive_summarizer();
  return llm_summarizer(llm);
}

std::unique_ptr<BeliefJudge> pick_judge(const std::string& name, const LlmGateway& llm) {
  if (name == "llm") return std::make_unique<LlmJudge>(llm);
  return std::make_unique<RuleJudge>();
}

DialogueHistory read_history(const std::string& path) {
  const json doc = read_json_file(path);
  if (doc.is_object() && doc.contains("utterances")) return decode_history(doc.at("utterances"));
  return decode_history(doc);
}

std::vector<std::size_t> parse_sizes(const std::string& spec) {
  std::vector<std::size_t> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad size '" + item + "' in --sizes");
    }
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "--sizes is empty");
  return out;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownLabel:
    case ErrorCode::LabelMisalignment:
    case ErrorCode::MultiPartyDialogue:
    case ErrorCode::MissingLabel:
    case ErrorCode::EmptyHistory:
    case ErrorCode::NonAlternatingRoles:
    case ErrorCode::EmptyUtterance:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::SplitOverlap:
    case ErrorCode::SizeTooLarge:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

// ---------------------------------------------------------------------------
// demo

struct DemoTurn {
  const char* persuadee;
  int desire;
  const char* belief;
  std::vector<TokenLogprob> desire_lp;
};

int run_demo(std::uint64_t seed, std::size_t n_dialogues) {
  const Corpus corpus = generate_synthetic_corpus(seed, n_dialogues);
  const HashingEmbedder embedder;
  const KnowledgeBase kb = build_knowledge_base(corpus, extractive_summarizer(), embedder);
  std::cout << "knowledge base: " << kb.size() << " experiences from " << corpus.size()
            << " synthetic dialogues (seed " << seed << ")\n";

  const std::vector<DemoTurn> turns = {
      {"I'm not sure. Giving up a free weekend sounds hard, and I doubt it makes a difference.", -1,
       "worried about giving up a free weekend. not sure the cleanup makes a difference.",
       {{"A", -0.4}, {"B", -1.3}, {"C", -2.9}}},
      {"Meeting the neighbors sounds nice, but the early start worries me.", 0,
       "meeting the neighbors sounds nice. worried about the early start.",
       {{"B", -0.5}, {"A", -1.2}, {"C", -2.0}}},
      {"Two hours is fine. The neighborhood cleanup is interesting, I will join.", 1,
       "two hours is fine. the neighborhood cleanup is interesting.",
       {{"C", -0.3}, {"B", -1.6}, {"A", -3.5}}},
  };

  auto mock = std::make_shared<MockBackend>();
  // Later turns contain earlier utterances, so the newest needle goes first.
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    mock->script_contains(PromptKind::Desire, it->persuadee, MockReply{"", it->desire_lp, false});
    mock->script_contains(PromptKind::Belief, it->persuadee, MockReply{it->belief, std::nullopt, false});
  }
  const LlmGateway llm(mock);

  ServiceConfig sc;
  sc.id_seed = seed == 0 ? 1 : seed;
  sc.now_ms = [] { return std::int64_t{0}; };
  sc.clock_factory = [] { return stepping_clock(0.001); };
  sc.summarizer = extractive_summarizer();
  AgentService service(kb, embedder, llm, sc);

  const Session s = service.create_session("Persuade the user to join a neighborhood cleanup this weekend.",
                                           "The persuadee lives nearby and is busy on weekdays.");
  std::cout << "persuader: " << s.transcript.utterances.front().text << "\n";
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const TurnResult r = service.post_utterance(s.id, turns[i].persuadee);
    std::cout << "\n--- turn " << (i + 1) << " ---\n";
    std::cout << "persuadee: " << turns[i].persuadee << "\n";
    std::cout << "inferred: desire=" << r.inference.desire.value() << " strategy="
              << name_of(r.inference.strategy) << " (" << letter_of(r.inference.strategy) << ")\n";
    std::cout << encode(r.inference).dump(2) << "\n";
    std::cout << "persuader: " << r.agent_reply << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Theory-of-mind persuasion agent: knowledge bases, inference, evaluation and serving"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ttbys 0.1.0");

  CommonFlags flags;
  std::string corpus_path, kb_path, out_path, history_path;
  std::string summarizer_name = "llm";
  std::string judge_name = "rule";
  std::string mode_name = "pipelined";
  std::size_t runs = 3;
  std::uint64_t seed = 0;
  std::optional<std::size_t> sample;
  bool traces = false;
  bool serial = false;

  // kb build
  auto* kb_cmd = app.add_subcommand("kb", "Knowledge base tools");
  kb_cmd->require_subcommand(1);
  auto* kb_build = kb_cmd->add_subcommand("build", "Decompose an annotated corpus into an experience store");
  kb_build->add_option("--corpus", corpus_path, "Training split (JSONL)")->required()->check(CLI::ExistingFile);
  kb_build->add_option("-o,--out", out_path, "Output KB file")->required();
  kb_build->add_option("--summarizer", summarizer_name, "Summary source")
      ->check(CLI::IsMember({"llm", "extractive"}))
      ->capture_default_str();
  kb_build->add_option("--sample", sample, "Keep a uniform sample of this many experiences");
  kb_build->add_option("-s,--seed", seed, "Sampling seed")->capture_default_str();
  add_backend_flags(kb_build, flags);
  add_embedder_flags(kb_build, flags);

  // infer
  auto* infer = app.add_subcommand("infer", "Run the three thinks on one dialogue history");
  infer->add_option("-k,--kb", kb_path, "KB file")->required()->check(CLI::ExistingFile);
  infer->add_option("--history", history_path, "History JSON (array of {role, text})")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--summarizer", summarizer_name, "Summary source")
      ->check(CLI::IsMember({"llm", "extractive"}))
      ->capture_default_str();
  add_backend_flags(infer, flags);
  add_embedder_flags(infer, flags);
  add_blend_flags(infer, flags);

  // eval / sweep / ablate share the evaluation inputs
  const auto add_eval_inputs = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", corpus_path, "Test split (JSONL)")->required()->check(CLI::ExistingFile);
    cmd->add_option("-k,--kb", kb_path, "KB built from the training split")->required()->check(CLI::ExistingFile);
    cmd->add_option("-r,--runs", runs, "Runs to average")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--mode", mode_name, "State fed to later stages")
        ->check(CLI::IsMember({"pipelined", "gold-state"}))
        ->capture_default_str();
    cmd->add_option("--judge", judge_name, "Belief judge")->check(CLI::IsMember({"rule", "llm"}))->capture_default_str();
    cmd->add_option("--summarizer", summarizer_name, "Summary source for queries")
        ->check(CLI::IsMember({"llm", "extractive"}))
        ->capture_default_str();
    cmd->add_option("-o,--out", out_path, "Write the JSON report here");
    cmd->add_flag("--serial", serial, "Evaluate turns one at a time");
    add_backend_flags(cmd, flags);
    add_embedder_flags(cmd, flags);
    add_blend_flags(cmd, flags);
  };

  auto* eval = app.add_subcommand("eval", "Static evaluation on a test split");
  add_eval_inputs(eval);
  eval->add_flag("--traces", traces, "Include per-turn stage traces in the report");

  std::string sweep_param = "alpha";
  std::string grid_spec = "0:1:0.1";
  auto* sweep = app.add_subcommand("sweep", "Evaluate over a grid of blending coefficients");
  add_eval_inputs(sweep);
  sweep->add_option("--param", sweep_param, "Coefficient to vary")
      ->check(CLI::IsMember({"alpha", "beta"}))
      ->capture_default_str();
  sweep->add_option("--grid", grid_spec, "lo:hi:step, inclusive")->capture_default_str();

  auto* ablate = app.add_subcommand("ablate", "Ablation studies");
  ablate->require_subcommand(1);
  std::string sizes_spec;
  auto* ablate_size = ablate->add_subcommand("kb-size", "Accuracy against knowledge-base size");
  add_eval_inputs(ablate_size);
  ablate_size->add_option("--sizes", sizes_spec, "Comma-separated KB sizes")->required();
  ablate_size->add_option("-s,--seed", seed, "Subsampling seed")->capture_default_str();
  auto* ablate_sum = ablate->add_subcommand("summary", "Summary queries against raw-history queries");
  add_eval_inputs(ablate_sum);

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Corpus tools");
  dataset->require_subcommand(1);
  bool stats_json = false;
  auto* stats = dataset->add_subcommand("stats", "Corpus statistics");
  stats->add_option("--corpus", corpus_path, "Corpus (JSONL)")->required()->check(CLI::ExistingFile);
  stats->add_flag("--json", stats_json, "Print JSON instead of the table");
  std::size_t synth_n = 20;
  std::string profile_name = "trend-positive";
  std::string id_prefix = "syn";
  auto* synth = dataset->add_subcommand("synth", "Generate a synthetic annotated corpus");
  synth->add_option("-n,--dialogues", synth_n, "Number of dialogues")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("-s,--seed", seed, "Generator seed")->capture_default_str();
  synth->add_option("--profile", profile_name, "Desire trajectory")
      ->check(CLI::IsMember({"trend-positive", "always-willing", "always-unwilling"}))
      ->capture_default_str();
  synth->add_option("--id-prefix", id_prefix, "Dialogue id prefix")->capture_default_str();
  synth->add_option("-o,--out", out_path, "Output file (stdout when omitted)");

  // serve
  std::optional<std::string> host, cors, data_dir;
  std::optional<int> port;
  auto* serve_cmd = app.add_subcommand("serve", "Run the agent HTTP service");
  serve_cmd->add_option("-k,--kb", kb_path, "KB file")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("-p,--port", port, "Port");
  serve_cmd->add_option("--cors-origin", cors, "Allowed browser origin");
  serve_cmd->add_option("--data-dir", data_dir, "Session persistence directory");
  serve_cmd->add_option("--summarizer", summarizer_name, "Summary source")
      ->check(CLI::IsMember({"llm", "extractive"}))
      ->capture_default_str();
  add_backend_flags(serve_cmd, flags);
  add_embedder_flags(serve_cmd, flags);
  add_blend_flags(serve_cmd, flags);

  // demo
  std::size_t demo_dialogues = 40;
  auto* demo = app.add_subcommand("demo", "Offline scripted dialogue on the mock backend");
  demo->add_option("-s,--seed", seed, "Synthetic corpus seed")->capture_default_str();
  demo->add_option("-n,--dialogues", demo_dialogues, "Synthetic dialogues in the KB")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (demo->parsed()) return run_demo(seed, demo_dialogues);

    if (stats->parsed()) {
      const auto st = compute_stats(load_corpus(corpus_path));
      std::cout << (stats_json ? encode(st).dump(2) + "\n" : format_stats(st));
      return kExitOk;
    }

    if (synth->parsed()) {
      SyntheticOptions opt;
      opt.profile = desire_profile_from_string(profile_name);
      opt.id_prefix = id_prefix;
      const Corpus c = generate_synthetic_corpus(seed, synth_n, opt);
      if (out_path.empty()) {
        write_corpus(c, std::cout);
      } else {
        save_corpus(c, out_path);
        std::cout << "wrote " << c.size() << " dialogues to " << out_path << "\n";
      }
      return kExitOk;
    }

    const Settings settings = resolve(flags);
    const auto embedder = make_embedder(settings.embedder);
    const LlmGateway llm(make_backend(settings.backend));

    if (kb_build->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      KbBuildOptions opt;
      opt.sample_size = sample;
      opt.seed = seed;
      const auto kb = build_knowledge_base(corpus, pick_summarizer(summarizer_name, llm), *embedder, opt);
      save_kb(kb, out_path);
      std::cout << "built " << kb.size() << " experiences\n";
      return kExitOk;
    }

    const KnowledgeBase kb = load_kb(kb_path, *embedder);

    if (infer->parsed()) {
      PipelineContext ctx{kb, *embedder, llm, settings.blend, steady_clock(), true, {}};
      if (summarizer_name == "extractive") ctx.summarizer = extractive_summarizer();
      const auto t = infer_turn(read_history(history_path), ctx);
      std::cout << encode(t).dump(2) << "\n";
      return kExitOk;
    }

    if (serve_cmd->parsed()) {
      ServiceConfig sc;
      sc.cfg = settings.blend;
      sc.data_dir = data_dir.value_or(settings.server.data_dir);
      if (summarizer_name == "extractive") sc.summarizer = extractive_summarizer();
      AgentService service(kb, *embedder, llm, sc);
      HttpOptions ho;
      ho.host = host.value_or(settings.server.host);
      ho.port = port.value_or(settings.server.port);
      ho.cors_origin = cors.value_or(settings.server.cors_origin);
      std::cerr << "listening on " << ho.host << ":" << ho.port << "\n";
      serve(service, ho);
      return kExitOk;
    }

    // evaluation family
    const Corpus test = load_corpus(corpus_path);
    const auto judge = pick_judge(judge_name, llm);
    EvalOptions eo;
    eo.cfg = settings.blend;
    eo.n_runs = runs;
    eo.mode = eval_mode_from_string(mode_name);
    eo.parallel = !serial;
    if (summarizer_name == "extractive") eo.summarizer = extractive_summarizer();

    json report;
    if (eval->parsed()) {
      std::cout << "config: " << encode(settings.blend).dump() << "\n";
      const auto r = run_static_eval(test, kb, *embedder, llm, *judge, eo);
      std::cout << format_report(r);
      std::vector<TurnInference> all;
      for (const auto& run : r.runs) all.insert(all.end(), run.begin(), run.end());
      std::cout << format_runtime(runtime_report(all));
      report = encode(r, traces);
    } else if (sweep->parsed()) {
      const auto grid = parse_grid(grid_spec);
      const auto r = sweep_blend(sweep_param, grid, test, kb, *embedder, llm, *judge, eo);
      std::cout << format_sweep(r);
      report = encode(r);
    } else if (ablate_size->parsed()) {
      const auto sizes = parse_sizes(sizes_spec);
      const auto points = ablate_kb_size(sizes, seed, test, kb, *embedder, llm, *judge, eo);
      report = json::array();
      std::cout << "KB size   Desire   Belief   Strategy\n";
      for (const auto& p : points) {
        std::ostringstream row;
        row << std::fixed << std::setprecision(2) << std::left << std::setw(10) << p.size << std::setw(9)
            << p.report.desire_accuracy.mean << std::setw(9) << p.report.belief_accuracy.mean
            << p.report.strategy_accuracy.mean << "\n";
        std::cout << row.str();
        report.push_back({{"size", p.size}, {"report", encode(p.report)}});
      }
    } else if (ablate_sum->parsed()) {
      const auto r = ablate_summary(test, kb, *embedder, llm, *judge, eo);
      std::cout << "with summary\n" << format_report(r.with_summary);
      std::cout << "without summary\n" << format_report(r.without_summary);
      report = {{"with_summary", encode(r.with_summary)}, {"without_summary", encode(r.without_summary)}};
    }
    if (!out_path.empty()) write_text(out_path, report.dump(2) + "\n");
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    std::cerr << "error [Parse]: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
