/*
 * Copyright 2026 The cdnmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cdnmf/kv_file.h"

#include <istream>
#include <ostream>

#include "cdnmf/errors.h"
#include "text_util.h"

namespace cdnmf {

KvFile KvFile::parse(std::istream& in) {
  KvFile kv;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_number);
    const auto key = detail::trim(view.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_number);
    kv.set(std::string(key), std::string(detail::trim(view.substr(eq + 1))));
  }
  return kv;
}

KvFile KvFile::load(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void KvFile::set(const std::string& key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

std::optional<std::string> KvFile::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void KvFile::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

void KvFile::save(const std::filesystem::path& path) const {
  auto out = detail::open_output(path);
  write(out);
  detail::finish_output(out, path);
}

}  // namespace cdnmf
