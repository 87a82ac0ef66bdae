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

#include "cdnmf/log_ingest.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <thread>
#include <unordered_set>

#include "cdnmf/errors.h"
#include "text_util.h"

namespace cdnmf {

ContentMode parse_content_mode(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "livetv" || lower == "live") return ContentMode::kLiveTv;
  if (lower == "vod") return ContentMode::kVod;
  throw DomainError("unknown content mode '" + std::string(text) + "' (expected livetv or vod)");
}

std::string_view to_string(ContentMode mode) {
  return mode == ContentMode::kLiveTv ? "livetv" : "vod";
}

// ---------------------------------------------------------------------------
// Schema and line parsing

LogSchema::LogSchema(std::vector<std::string> columns) : columns_(std::move(columns)) {
  std::unordered_set<std::string> seen;
  bool has_timestamp = false;
  bool has_uid = false;
  for (const auto& name : columns_) {
    if (!seen.insert(name).second) throw DomainError("duplicate log column '" + name + "'");
    Field f = Field::kOther;
    if (name == "timestamp") {
      f = Field::kTimestamp;
      has_timestamp = true;
    } else if (name == "uid") {
      f = Field::kUid;
      has_uid = true;
    } else if (name == "livechannel") {
      f = Field::kLivechannel;
    } else if (name == "contentpackage") {
      f = Field::kContentpackage;
    } else if (name == "contentlength") {
      f = Field::kContentlength;
    } else if (name == "hit") {
      f = Field::kHit;
    }
    fields_.push_back(f);
  }
  if (!has_timestamp || !has_uid) {
    throw DomainError("log schema must contain 'timestamp' and 'uid' columns");
  }
}

LogSchema LogSchema::from_header(std::string_view header, char delimiter) {
  std::vector<std::string> names;
  for (auto& f : split_fields(header, delimiter)) names.emplace_back(detail::trim(f));
  return LogSchema(std::move(names));
}

std::string LogSchema::header(char delimiter) const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += delimiter;
    out += columns_[i];
  }
  return out;
}

std::vector<std::string> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"' && current.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

namespace {

std::optional<bool> parse_hit(std::string_view s, std::size_t line_number) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "1" || lower == "true" || lower == "hit" || lower == "yes") return true;
  if (lower == "0" || lower == "false" || lower == "miss" || lower == "no") return false;
  throw ParseError("malformed hit value '" + std::string(s) + "'", line_number);
}

std::string quote_if_needed(const std::string& s, char delimiter) {
  if (s.find(delimiter) == std::string::npos && s.find('"') == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::optional<LogRecord> parse_log_line(std::string_view line, const LogSchema& schema,
                                        std::size_t line_number, char delimiter) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto trimmed = detail::trim(line);
  if (trimmed.empty() || trimmed.front() == '#') return std::nullopt;

  auto fields = split_fields(line, delimiter);
  if (fields.size() != schema.columns_.size()) {
    throw ParseError("expected " + std::to_string(schema.columns_.size()) + " fields, got " +
                         std::to_string(fields.size()),
                     line_number);
  }

  LogRecord rec;
  for (std::size_t c = 0; c < fields.size(); ++c) {
    std::string& value = fields[c];
    using Field = LogSchema::Field;
    switch (schema.fields_[c]) {
      case Field::kTimestamp: {
        const auto ts = detail::parse_number<double>(value);
        if (!ts || !std::isfinite(*ts) || *ts < 0.0) {
          throw ParseError("malformed timestamp '" + value + "'", line_number);
        }
        rec.timestamp = *ts;
        break;
      }
      case Field::kUid:
        if (detail::trim(value).empty()) throw ParseError("empty uid", line_number);
        rec.uid = std::move(value);
        break;
      case Field::kLivechannel:
        if (!value.empty()) rec.livechannel = std::move(value);
        break;
      case Field::kContentpackage:
        if (!value.empty()) rec.contentpackage = std::move(value);
        break;
      case Field::kContentlength:
        if (!detail::trim(value).empty()) {
          const auto len = detail::parse_number<std::uint64_t>(value);
          if (!len) throw ParseError("malformed contentlength '" + value + "'", line_number);
          rec.contentlength = *len;
        }
        break;
      case Field::kHit:
        if (!detail::trim(value).empty()) rec.hit = parse_hit(detail::trim(value), line_number);
        break;
      case Field::kOther:
        rec.extra.emplace(schema.columns_[c], std::move(value));
        break;
    }
  }
  return rec;
}

std::string format_log_line(const LogRecord& record, const LogSchema& schema, char delimiter) {
  std::string out;
  for (std::size_t c = 0; c < schema.columns_.size(); ++c) {
    if (c) out += delimiter;
    using Field = LogSchema::Field;
    switch (schema.fields_[c]) {
      case Field::kTimestamp:
        out += detail::format_double(record.timestamp);
        break;
      case Field::kUid:
        out += quote_if_needed(record.uid, delimiter);
        break;
      case Field::kLivechannel:
        if (record.livechannel) out += quote_if_needed(*record.livechannel, delimiter);
        break;
      case Field::kContentpackage:
        if (record.contentpackage) out += quote_if_needed(*record.contentpackage, delimiter);
        break;
      case Field::kContentlength:
        if (record.contentlength) out += std::to_string(*record.contentlength);
        break;
      case Field::kHit:
        if (record.hit) out += *record.hit ? "1" : "0";
        break;
      case Field::kOther: {
        const auto it = record.extra.find(schema.columns_[c]);
        if (it != record.extra.end()) out += quote_if_needed(it->second, delimiter);
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Log files

LogReadSummary read_log_stream(std::istream& in, char delimiter, OnParseError policy,
                               const std::function<void(const LogRecord&)>& sink) {
  LogReadSummary summary;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!summary.schema) {
      if (detail::trim(line).empty()) continue;
      summary.schema = LogSchema::from_header(line, delimiter);
      continue;
    }
    ++summary.stats.lines;
    std::optional<LogRecord> rec;
    try {
      rec = parse_log_line(line, *summary.schema, line_number, delimiter);
    } catch (const ParseError&) {
      if (policy == OnParseError::kAbort) throw;
      ++summary.stats.parse_errors;
      continue;
    }
    if (!rec) {
      ++summary.stats.ignored;
      continue;
    }
    ++summary.stats.records;
    sink(*rec);
  }
  return summary;
}

LogFile read_log_file(const std::filesystem::path& path, char delimiter, OnParseError policy) {
  auto in = detail::open_input(path);
  LogFile file;
  auto summary = read_log_stream(in, delimiter, policy,
                                 [&](const LogRecord& r) { file.records.push_back(r); });
  file.schema = std::move(summary.schema);
  file.stats = summary.stats;
  return file;
}

void write_log_file(const std::filesystem::path& path, const LogSchema& schema,
                    std::span<const LogRecord> records, char delimiter) {
  auto out = detail::open_output(path);
  out << schema.header(delimiter) << '\n';
  for (const auto& r : records) out << format_log_line(r, schema, delimiter) << '\n';
  detail::finish_output(out, path);
}

// ---------------------------------------------------------------------------
// Aggregation

Index IdMap::intern(const std::string& id) {
  const auto [it, inserted] = forward_.try_emplace(id, static_cast<Index>(reverse_.size()));
  if (inserted) reverse_.push_back(id);
  return it->second;
}

std::optional<Index> IdMap::find(const std::string& id) const {
  const auto it = forward_.find(id);
  if (it == forward_.end()) return std::nullopt;
  return it->second;
}

int log_scale(std::uint64_t requests) {
  if (requests < 1) throw DomainError("log_scale requires requests >= 1");
  return static_cast<int>(std::lround(std::log(static_cast<double>(requests))));
}

RatingList InteractionSet::ratings() const {
  RatingList out;
  out.reserve(triples.size());
  for (const auto& t : triples) out.push_back({t.user, t.item, static_cast<double>(t.interaction)});
  return out;
}

InteractionAggregator::InteractionAggregator(ContentMode mode, std::uint64_t first_position)
    : mode_(mode), position_(first_position) {}

void InteractionAggregator::add(const LogRecord& record) {
  const std::uint64_t pos = position_++;
  const auto& item = record.content(mode_);
  if (!item) {
    ++skipped_;
    return;
  }
  ++accepted_;
  user_first_.try_emplace(record.uid, pos);
  item_first_.try_emplace(*item, pos);
  std::string key;
  key.reserve(record.uid.size() + 1 + item->size());
  key.append(record.uid).push_back('\0');
  key.append(*item);
  auto [it, inserted] = pairs_.try_emplace(std::move(key), PairStats{0, pos});
  ++it->second.count;
}

void InteractionAggregator::merge(const InteractionAggregator& other) {
  if (other.mode_ != mode_) throw DomainError("cannot merge aggregators of different modes");
  accepted_ += other.accepted_;
  skipped_ += other.skipped_;
  position_ = std::max(position_, other.position_);
  auto merge_first = [](auto& into, const auto& from) {
    for (const auto& [key, first] : from) {
      auto [it, inserted] = into.try_emplace(key, first);
      if (!inserted) it->second = std::min(it->second, first);
    }
  };
  merge_first(user_first_, other.user_first_);
  merge_first(item_first_, other.item_first_);
  for (const auto& [key, stats] : other.pairs_) {
    auto [it, inserted] = pairs_.try_emplace(key, stats);
    if (!inserted) {
      it->second.count += stats.count;
      it->second.first = std::min(it->second.first, stats.first);
    }
  }
}

namespace {

std::vector<const std::string*> order_by_first(
    const std::unordered_map<std::string, std::uint64_t>& firsts) {
  std::vector<std::pair<std::uint64_t, const std::string*>> order;
  order.reserve(firsts.size());
  for (const auto& [key, first] : firsts) order.emplace_back(first, &key);
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<const std::string*> out;
  out.reserve(order.size());
  for (const auto& [first, key] : order) out.push_back(key);
  return out;
}

}  // namespace

InteractionSet InteractionAggregator::finish() const {
  InteractionSet set;
  set.accepted = accepted_;
  set.skipped = skipped_;
  for (const auto* uid : order_by_first(user_first_)) set.users.intern(*uid);
  for (const auto* item : order_by_first(item_first_)) set.items.intern(*item);

  std::vector<std::pair<std::uint64_t, const std::pair<const std::string, PairStats>*>> order;
  order.reserve(pairs_.size());
  for (const auto& entry : pairs_) order.emplace_back(entry.second.first, &entry);
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  set.triples.reserve(order.size());
  for (const auto& [first, entry] : order) {
    const std::string& key = entry->first;
    const auto sep = key.find('\0');
    const auto user = set.users.find(key.substr(0, sep));
    const auto item = set.items.find(key.substr(sep + 1));
    const std::uint64_t requests = entry->second.count;
    set.triples.push_back({*user, *item, requests, log_scale(requests)});
  }
  return set;
}

InteractionSet aggregate_interactions(std::span<const LogRecord> records, ContentMode mode,
                                      unsigned shards) {
  shards = std::max(1u, std::min<unsigned>(shards, static_cast<unsigned>(records.size())));
  if (shards <= 1) {
    InteractionAggregator agg(mode);
    for (const auto& r : records) agg.add(r);
    return agg.finish();
  }
  const std::size_t chunk = (records.size() + shards - 1) / shards;
  std::vector<InteractionAggregator> parts;
  for (unsigned s = 0; s < shards; ++s) parts.emplace_back(mode, std::uint64_t{s} * chunk);
  {
    std::vector<std::jthread> workers;
    for (unsigned s = 0; s < shards; ++s) {
      workers.emplace_back([&, s] {
        const std::size_t begin = std::min(records.size(), std::size_t{s} * chunk);
        const std::size_t end = std::min(records.size(), begin + chunk);
        for (std::size_t i = begin; i < end; ++i) parts[s].add(records[i]);
      });
    }
  }
  for (unsigned s = 1; s < shards; ++s) parts[0].merge(parts[s]);
  return parts[0].finish();
}

// ---------------------------------------------------------------------------
// Interaction and id-map files

void write_interactions(std::ostream& out, std::span<const InteractionTriple> triples) {
  for (const auto& t : triples) out << t.user << ',' << t.item << ',' << t.interaction << '\n';
}

void write_interactions(std::ostream& out, std::span<const Rating> ratings) {
  for (const auto& r : ratings) {
    if (r.value != std::floor(r.value) || !std::isfinite(r.value)) {
      throw DomainError("interaction file values must be integers, got " +
                        detail::format_double(r.value));
    }
    out << r.user << ',' << r.item << ',' << static_cast<long long>(r.value) << '\n';
  }
}

RatingList read_interactions(std::istream& in) {
  RatingList out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    const auto fields = detail::split_view(view, ',');
    if (fields.size() != 3) {
      throw ParseError("expected 3 fields (userId,itemId,interaction), got " +
                           std::to_string(fields.size()),
                       line_number);
    }
    const auto user = detail::parse_number<Index>(fields[0]);
    const auto item = detail::parse_number<Index>(fields[1]);
    const auto value = detail::parse_number<long long>(fields[2]);
    if (!user || !item || !value) throw ParseError("non-integer field in '" + line + "'", line_number);
    out.push_back({*user, *item, static_cast<double>(*value)});
  }
  return out;
}

void write_interactions_file(const std::filesystem::path& path,
                             std::span<const InteractionTriple> triples) {
  auto out = detail::open_output(path);
  write_interactions(out, triples);
  detail::finish_output(out, path);
}

void write_interactions_file(const std::filesystem::path& path, std::span<const Rating> ratings) {
  auto out = detail::open_output(path);
  write_interactions(out, ratings);
  detail::finish_output(out, path);
}

RatingList read_interactions_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_interactions(in);
}

void write_id_map(std::ostream& out, const IdMap& map) {
  for (std::size_t i = 0; i < map.size(); ++i) {
    out << i << ',' << quote_if_needed(map.ids()[i], ',') << '\n';
  }
}

IdMap read_id_map(std::istream& in) {
  IdMap map;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != 2) throw ParseError("expected denseIndex,originalId", line_number);
    const auto index = detail::parse_number<Index>(fields[0]);
    if (!index || *index != map.size()) {
      throw ParseError("id map indices must be contiguous from 0", line_number);
    }
    if (map.intern(fields[1]) != *index) {
      throw ParseError("duplicate original id '" + fields[1] + "'", line_number);
    }
  }
  return map;
}

void write_id_map_file(const std::filesystem::path& path, const IdMap& map) {
  auto out = detail::open_output(path);
  write_id_map(out, map);
  detail::finish_output(out, path);
}

IdMap read_id_map_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_id_map(in);
}

}  // namespace cdnmf
