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

#include "report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>

#include <openssl/evp.h>

#include "xfer/error.hpp"

namespace xfer::cli {
namespace {

std::string number_text(double value) {
  if (!std::isfinite(value)) return "null";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  std::string text(buffer);
  if (text.find_first_of(".eE") == std::string::npos) text += ".0";
  return text;
}

void write_value(const Json& value, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (value.type()) {
    case Json::value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = value.begin(); it != value.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        write_value(it.value(), depth + 1, out);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& element : value) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_value(element, depth + 1, out);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      out += number_text(value.get<double>());
      return;
    default:
      out += value.dump();
  }
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

std::vector<std::string> config_inputs(const Json& value) {
  std::vector<std::string> inputs;
  auto scalar = [](const Json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return number_text(v.get<double>());
    return v.dump();
  };
  if (value.is_array()) {
    for (const auto& element : value) inputs.push_back(scalar(element));
  } else {
    inputs.push_back(scalar(value));
  }
  return inputs;
}

}  // namespace

std::string to_text(const Json& value) {
  std::string out;
  write_value(value, 0, out);
  out += '\n';
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                             EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof buffer);
    EVP_DigestUpdate(ctx.get(), buffer, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &length);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

Report::Report(std::string command, std::string version)
    : command_(std::move(command)), version_(std::move(version)) {}

void Report::add_input(const std::string& role,
                       const std::filesystem::path& path) {
  inputs_.push_back(
      {{"role", role}, {"path", path.string()}, {"sha256", sha256_file(path)}});
}

void Report::warn(const std::string& message) {
  std::cerr << "warning: " << message << '\n';
  warnings_.push_back(message);
}

Json Report::document(bool with_metadata) const {
  Json doc;
  doc["command"] = command_;
  for (auto it = body_.begin(); it != body_.end(); ++it) doc[it.key()] = it.value();
  doc["warnings"] = warnings_;
  doc["provenance"] = {
      {"version", version_}, {"config", config_}, {"inputs", inputs_}};
  if (with_metadata) doc["metadata"] = {{"timestamp", utc_timestamp()}};
  return doc;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

std::string JsonConfig::to_config(const CLI::App*, bool, bool,
                                  std::string) const {
  return "{}\n";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  Json root;
  try {
    root = Json::parse(input);
  } catch (const Json::parse_error& e) {
    throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw CLI::ConfigError("config must be a JSON object");

  std::vector<std::string> selected;
  for (const CLI::App* sub : app_->get_subcommands()) {
    selected.push_back(sub->get_name());
  }
  std::vector<CLI::ConfigItem> items;
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (it.value().is_object()) {
      for (auto inner = it.value().begin(); inner != it.value().end(); ++inner) {
        items.push_back({{it.key()}, inner.key(), config_inputs(inner.value())});
      }
      continue;
    }
    for (const auto& name : selected) {
      items.push_back({{name}, it.key(), config_inputs(it.value())});
    }
  }
  return items;
}

}  // namespace xfer::cli
