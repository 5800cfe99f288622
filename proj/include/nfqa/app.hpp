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

#ifndef NFQA_APP_HPP_
#define NFQA_APP_HPP_

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nfqa/config.hpp"
#include "nfqa/core.hpp"
#include "nfqa/dataset.hpp"
#include "nfqa/pipeline.hpp"

namespace nfqa {

/// Everything a command needs, built once from the config. Read-only after
/// construction.
struct Services {
  AppConfig config;
  PromptSet prompts = PromptSet::defaults();
  std::shared_ptr<const Classifier> classifier;
  std::shared_ptr<const CorpusIndex> index;  // null when none is configured
  std::unique_ptr<Pipeline> pipeline;        // null when no generator role

  /// ConfigError on missing roles or paths, InputError on unreadable data.
  static Services from_config(const AppConfig& config, bool need_pipeline);
};

int cmd_index(const AppConfig& config, const std::string& corpus, const std::string& out_dir,
              std::ostream& out);

struct AskOptions {
  std::string question;
  Method method = Method::kTypedRag;
  std::optional<NfqType> type;
  bool print_trace = false;
  std::optional<std::string> trace_file;
};

int cmd_ask(const AppConfig& config, const AskOptions& options, std::ostream& out);

int cmd_eval(const AppConfig& config, const std::string& dataset, Method method,
             const std::optional<std::string>& out_path, std::ostream& out);

struct SourceSpec {
  SourceFormat format = SourceFormat::kCustom;
  std::string path;
};

/// "FORMAT=PATH"; a bare path means custom JSONL. InputError on an unknown format.
SourceSpec parse_source_spec(const std::string& text);

int cmd_build_dataset(const AppConfig& config, const std::vector<SourceSpec>& sources,
                      const std::string& out_path, const std::optional<std::string>& stats_path,
                      std::ostream& out);

/// Request handling for the HTTP service, separated from the socket layer.
class AskService {
 public:
  explicit AskService(std::shared_ptr<const Services> services);

  /// POST /ask body -> (status, JSON body). 400 on a bad body, 502 on
  /// TransportError, 500 on other failures.
  std::pair<int, std::string> handle_ask(const std::string& body) const;

 private:
  std::shared_ptr<const Services> services_;
};

/// "host:port" -> pair. InputError when malformed.
std::pair<std::string, int> parse_bind(const std::string& bind);

/// Blocks serving /ask and /healthz until the process stops.
int cmd_serve(const AppConfig& config, const std::string& bind, std::ostream& out);

/// The command-line entry point. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nfqa

#endif  // NFQA_APP_HPP_
