/*
 * Copyright 2026 The xfer Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef XFER_TOOLS_REPORT_HPP_
#define XFER_TOOLS_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace xfer::cli {

using Json = nlohmann::ordered_json;

// Serializes with two-space indentation and every floating-point number
// printed with 17 significant digits. Non-finite numbers become null.
std::string to_text(const Json& value);

// Lower-case hex SHA-256 of a file's bytes. Throws DataError when the file
// cannot be read.
std::string sha256_file(const std::filesystem::path& path);

// A command's JSON document. Results go in body(); the resolved settings in
// config(). The canonical part is everything but the trailing "metadata"
// field.
class Report {
 public:
  Report(std::string command, std::string version);

  Json& body() { return body_; }
  Json& config() { return config_; }
  void add_input(const std::string& role, const std::filesystem::path& path);
  // Logged to stderr and kept in the "warnings" array.
  void warn(const std::string& message);

  Json document(bool with_metadata = true) const;

 private:
  std::string command_;
  std::string version_;
  Json body_ = Json::object();
  Json config_ = Json::object();
  Json inputs_ = Json::array();
  Json warnings_ = Json::array();
};

// Writes text to `path`, or to stdout when `path` is empty.
void emit(const std::string& text, const std::string& path);

// Reads --config files written as JSON. Top-level keys are long option names
// of the selected subcommand; an object keyed by a subcommand name scopes its
// members to that subcommand.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App*, bool, bool,
                        std::string) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  const CLI::App* app_;
};

}  // namespace xfer::cli

#endif  // XFER_TOOLS_REPORT_HPP_
