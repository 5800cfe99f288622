/*
 * Copyright 2026 The nfqa Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nfqa/app.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "nfqa/evaluation.hpp"

namespace nfqa {

namespace {

constexpr const char* kGeneratorRole = "generator";
constexpr const char* kDecomposerRole = "decomposer";

void require_path(const std::optional<std::string>& path, const char* what) {
  if (path && !std::filesystem::exists(*path)) {
    throw ConfigError(std::string(what) + " '" + *path + "' does not exist");
  }
}

EndpointConfig plain_endpoint(const std::string& url) {
  EndpointConfig e;
  e.base_url = interpolate_env(url);
  e.validate();
  return e;
}

ClassifierConfig classifier_config(const AppConfig& config) {
  ClassifierConfig c;
  if (config.classifier.mode == "remote") {
    c.mode = ClassifierMode::kRemote;
    c.endpoint = plain_endpoint(*config.classifier.endpoint);
  }
  c.rules_path = config.classifier.rules;
  return c;
}

RuleSet post_filter_rules(const AppConfig& config) {
  if (!config.classifier.rules) return RuleSet::defaults();
  Json rules;
  try {
    rules = Json::parse(read_file(*config.classifier.rules));
  } catch (const Json::exception& e) {
    throw ConfigError("classifier rules file is not JSON: " + std::string(e.what()));
  }
  return RuleSet::from_json(rules);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

Bm25Params bm25_params(const AppConfig& config) {
  Bm25Params p{config.retrieval.k1, config.retrieval.b};
  p.validate();
  return p;
}

std::optional<NfqType> answered_type(const Question& question, const Answer& answer) {
  if (question.nfq_type) return question.nfq_type;
  for (const auto& step : answer.trace) {
    if (step.name == "classify" && step.detail.contains("nfq_type")) {
      return parse_nfq_type(step.detail.at("nfq_type").get<std::string>());
    }
  }
  return std::nullopt;
}

}  // namespace

Services Services::from_config(const AppConfig& config, bool need_pipeline) {
  config.validate();
  require_path(config.retrieval.corpus, "corpus");
  require_path(config.classifier.rules, "classifier rules");
  require_path(config.pipeline.prompt_dir, "prompt directory");

  Services s;
  s.config = config;
  if (config.pipeline.prompt_dir) s.prompts = PromptSet::from_directory(*config.pipeline.prompt_dir);
  s.classifier = make_classifier(classifier_config(config));

  if (config.retrieval.index && std::filesystem::exists(*config.retrieval.index)) {
    s.index = std::make_shared<const CorpusIndex>(CorpusIndex::load(*config.retrieval.index));
  } else if (config.retrieval.corpus) {
    s.index = std::make_shared<const CorpusIndex>(
        CorpusIndex::build_from_jsonl(*config.retrieval.corpus, bm25_params(config)));
  } else if (config.retrieval.index) {
    throw ConfigError("index '" + *config.retrieval.index + "' does not exist");
  }

  if (!need_pipeline) return s;

  PipelineDeps deps;
  deps.classifier = s.classifier;
  deps.index = s.index;
  if (config.retrieval.reranker == "remote") {
    deps.reranker =
        std::make_shared<RemoteReranker>(plain_endpoint(*config.retrieval.reranker_endpoint));
  } else {
    deps.reranker = std::make_shared<LexicalReranker>();
  }
  deps.generator = make_llm_client(config.role(kGeneratorRole));
  if (config.has_role(kDecomposerRole)) {
    deps.decomposer = make_llm_client(config.role(kDecomposerRole));
  }
  deps.prompts = s.prompts;
  deps.config = config.pipeline;
  s.pipeline = std::make_unique<Pipeline>(std::move(deps));
  return s;
}

int cmd_index(const AppConfig& config, const std::string& corpus, const std::string& out_dir,
              std::ostream& out) {
  const CorpusIndex index = build_index(corpus, bm25_params(config), out_dir);
  char avg[64];
  std::snprintf(avg, sizeof avg, "%.4f", index.avg_doc_len());
  out << "docs=" << index.doc_count() << " avg_doc_len=" << avg << "\n";
  return 0;
}

int cmd_ask(const AppConfig& config, const AskOptions& options, std::ostream& out) {
  const Services s = Services::from_config(config, true);
  Question q;
  q.id = "cli";
  q.text = options.question;
  q.nfq_type = options.type;
  q.validate();
  const Answer answer = s.pipeline->answer_with(options.method, q);
  out << answer.text << "\n";
  const Json answer_json = answer;
  if (options.print_trace) out << Json(answer.trace).dump(2) << "\n";
  if (options.trace_file) write_text(*options.trace_file, answer_json.dump(2) + "\n");
  return 0;
}

int cmd_eval(const AppConfig& config, const std::string& dataset, Method method,
             const std::optional<std::string>& out_path, std::ostream& out) {
  const auto records = load_dataset(dataset);
  if (records.empty()) throw InputError("dataset '" + dataset + "' has no records");
  const Services s = Services::from_config(config, true);
  const LlmRoleConfig& scorer_role = config.role(config.eval.scorer);
  const LlmRoleConfig& generator_role = config.role(kGeneratorRole);
  if (scorer_role.model == generator_role.model && scorer_role.base_url == generator_role.base_url &&
      !scorer_role.is_mock()) {
    spdlog::warn("the scorer and the generator are the same model; rankings may be biased");
  }
  const LlmClient scorer = make_llm_client(scorer_role);

  EvalOptions options;
  options.method = method;
  options.max_parallel = config.eval.max_parallel;
  options.max_error_fraction = config.eval.max_error_fraction;
  options.enforce_error_budget = false;
  const EvalReport report = run_eval(records, dataset, *s.pipeline, scorer, s.prompts, options);
  if (out_path) write_text(*out_path, report.to_json().dump(2) + "\n");
  out << report.table();
  enforce_error_budget(report, options.max_error_fraction);
  return 0;
}

SourceSpec parse_source_spec(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) return SourceSpec{SourceFormat::kCustom, text};
  SourceSpec spec{parse_source_format(text.substr(0, eq)), text.substr(eq + 1)};
  if (spec.path.empty()) throw InputError("source '" + text + "' has no path");
  return spec;
}

int cmd_build_dataset(const AppConfig& config, const std::vector<SourceSpec>& sources,
                      const std::string& out_path, const std::optional<std::string>& stats_path,
                      std::ostream& out) {
  if (sources.empty()) throw InputError("build-dataset needs at least one --source");
  std::vector<SourceRecord> records;
  for (const auto& spec : sources) {
    auto loaded = load_source(spec.format, spec.path);
    records.insert(records.end(), std::make_move_iterator(loaded.begin()),
                   std::make_move_iterator(loaded.end()));
  }
  const Services s = Services::from_config(config, false);

  std::vector<LlmClient> writer_clients;
  for (const auto& name : config.dataset.writers) {
    writer_clients.push_back(make_llm_client(config.role(name)));
  }
  std::vector<const LlmClient*> writers;
  for (const auto& c : writer_clients) writers.push_back(&c);
  const LlmClient strong = make_llm_client(config.role(config.dataset.strong));
  const LlmClient annotator = make_llm_client(config.role(config.dataset.annotator));

  BuildOptions options;
  options.scheme = config.dataset.scheme == "diverse-three" ? ReferenceScheme::kDiverseThree
                                                            : ReferenceScheme::kRewritePlusTwo;
  options.max_parallel = config.dataset.max_parallel;
  options.post_filter = post_filter_rules(config);
  const BuildResult result =
      build_dataset(records, *s.classifier, writers, strong, annotator, s.prompts, options);
  save_dataset(out_path, result.records);

  const DatasetStats stats = compute_stats(result.records);
  if (stats_path) write_text(*stats_path, stats.to_markdown());
  out << "records=" << result.records.size() << " sources=" << records.size()
      << " non_factoid=" << result.candidates_in << "\n";
  out << stats.to_markdown();
  return 0;
}

AskService::AskService(std::shared_ptr<const Services> services)
    : services_(std::move(services)) {
  if (!services_ || !services_->pipeline) throw ConfigError("service needs a pipeline");
}

std::pair<int, std::string> AskService::handle_ask(const std::string& body) const {
  Json request;
  Question q;
  Method method = Method::kTypedRag;
  bool want_trace = false;
  try {
    request = Json::parse(body);
    if (!request.is_object() || !request.contains("question") ||
        !request.at("question").is_string()) {
      throw InputError("body needs a string 'question'");
    }
    q.id = request.value("id", std::string("http"));
    q.text = request.at("question").get<std::string>();
    q.validate();
    if (request.contains("method")) method = parse_method(request.at("method").get<std::string>());
    if (request.contains("type")) q.nfq_type = parse_nfq_type(request.at("type").get<std::string>());
    want_trace = request.value("trace", false);
  } catch (const Json::exception& e) {
    return {400, Json{{"error", "input"}, {"message", e.what()}}.dump()};
  } catch (const InputError& e) {
    return {400, Json{{"error", "input"}, {"message", e.what()}}.dump()};
  }

  try {
    const Answer answer = services_->pipeline->answer_with(method, q);
    Json out{{"answer", answer.text}, {"method", answer.method}};
    const auto type = method == Method::kTypedRag ? answered_type(q, answer) : std::nullopt;
    out["type"] = type ? Json(*type) : Json(nullptr);
    if (want_trace) out["trace"] = answer.trace;
    return {200, out.dump()};
  } catch (const Error& e) {
    const int status = e.category() == ErrorCategory::kTransport ? 502
                       : e.category() == ErrorCategory::kInput ? 400
                                                              : 500;
    return {status,
            Json{{"error", std::string(to_string(e.category()))}, {"message", e.what()}}.dump()};
  } catch (const std::exception& e) {
    return {500, Json{{"error", "internal"}, {"message", e.what()}}.dump()};
  }
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == bind.size()) {
    throw InputError("bind address must look like host:port, got '" + bind + "'");
  }
  const std::string port_text = bind.substr(colon + 1);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InputError("bad port in '" + bind + "'");
  }
  if (port < 0 || port > 65535) throw InputError("port out of range in '" + bind + "'");
  return {bind.substr(0, colon), port};
}

int cmd_serve(const AppConfig& config, const std::string& bind, std::ostream& out) {
  const auto [host, port] = parse_bind(bind);
  auto services = std::make_shared<const Services>(Services::from_config(config, true));
  const AskService service(services);

  httplib::Server server;
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
  server.Post("/ask", [&service](const httplib::Request& req, httplib::Response& res) {
    const auto [status, body] = service.handle_ask(req.body);
    res.status = status;
    res.set_content(body, "application/json");
  });
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw ConfigError("cannot bind " + bind);
  out << "listening on " << host << ":" << bound << std::endl;
  server.listen_after_bind();
  return 0;
}

namespace {

void configure_logging(const std::string& level) {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("nfqa");
    spdlog::set_default_logger(logger);
  });
  spdlog::set_level(spdlog::level::from_str(level));
}

AppConfig load_config(const std::string& path) {
  AppConfig config = path.empty() ? AppConfig{} : AppConfig::load(path);
  configure_logging(config.log_level);
  return config;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Type-aware retrieval-augmented answering for non-factoid questions", "nfqa"};
  app.require_subcommand(1);
  std::string config_path;

  auto* index_cmd = app.add_subcommand("index", "Build a BM25 index from a passage JSONL file");
  std::string corpus;
  std::string index_out;
  index_cmd->add_option("--config", config_path, "Config file");
  index_cmd->add_option("--corpus", corpus, "Passages JSONL")->required();
  index_cmd->add_option("--out", index_out, "Index directory")->required();

  auto* ask_cmd = app.add_subcommand("ask", "Answer one question");
  std::string question;
  std::string method_text = "typed";
  std::string type_text;
  bool trace = false;
  std::string trace_file;
  ask_cmd->add_option("--config", config_path, "Config file");
  ask_cmd->add_option("question", question, "Question text")->required();
  ask_cmd->add_option("--method", method_text, "llm | rag | typed");
  ask_cmd->add_option("--type", type_text, "Skip classification and use this NFQ type");
  ask_cmd->add_flag("--trace", trace, "Print the step trace");
  ask_cmd->add_option("--trace-file", trace_file, "Write answer and trace JSON here");

  auto* eval_cmd = app.add_subcommand("eval", "Rank answers against reference lists");
  std::string dataset;
  std::string eval_method = "typed";
  std::string eval_out;
  eval_cmd->add_option("--config", config_path, "Config file");
  eval_cmd->add_option("--dataset", dataset, "Dataset JSONL (defaults to eval.dataset)");
  eval_cmd->add_option("--method", eval_method, "llm | rag | typed");
  eval_cmd->add_option("--out", eval_out, "Results JSON path");

  auto* build_cmd = app.add_subcommand("build-dataset", "Build a reference-annotated dataset");
  std::vector<std::string> sources;
  std::string build_out;
  std::string stats_out;
  build_cmd->add_option("--config", config_path, "Config file");
  build_cmd->add_option("--source", sources, "FORMAT=PATH (nq, squad, triviaqa, 2wiki, hotpotqa, musique, custom)")
      ->required();
  build_cmd->add_option("--out", build_out, "Output JSONL")->required();
  build_cmd->add_option("--stats", stats_out, "Write the statistics table here");

  auto* serve_cmd = app.add_subcommand("serve", "Serve POST /ask and GET /healthz");
  std::string bind = "127.0.0.1:8080";
  serve_cmd->add_option("--config", config_path, "Config file");
  serve_cmd->add_option("--bind", bind, "host:port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return exit_code(ErrorCategory::kInput);
  }

  try {
    if (*index_cmd) {
      return cmd_index(load_config(config_path), corpus, index_out, out);
    }
    if (*ask_cmd) {
      AskOptions options;
      options.question = question;
      options.method = parse_method(method_text);
      if (!type_text.empty()) options.type = parse_nfq_type(type_text);
      options.print_trace = trace;
      if (!trace_file.empty()) options.trace_file = trace_file;
      return cmd_ask(load_config(config_path), options, out);
    }
    if (*eval_cmd) {
      const Method method = parse_method(eval_method);
      const AppConfig config = load_config(config_path);
      if (dataset.empty()) {
        if (!config.eval.dataset) throw InputError("no --dataset given and eval.dataset is unset");
        dataset = *config.eval.dataset;
      }
      return cmd_eval(config, dataset, method,
                      eval_out.empty() ? std::nullopt : std::optional<std::string>(eval_out), out);
    }
    if (*build_cmd) {
      std::vector<SourceSpec> specs;
      for (const auto& s : sources) specs.push_back(parse_source_spec(s));
      return cmd_build_dataset(
          load_config(config_path), specs, build_out,
          stats_out.empty() ? std::nullopt : std::optional<std::string>(stats_out), out);
    }
    if (*serve_cmd) {
      return cmd_serve(load_config(config_path), bind, out);
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.category()) << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return exit_code(ErrorCategory::kInternal);
  }
  return exit_code(ErrorCategory::kInternal);
}

}  // namespace nfqa
