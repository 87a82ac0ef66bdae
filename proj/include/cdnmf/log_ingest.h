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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cdnmf/rating.h"

namespace cdnmf {

// Which log column identifies the item: livechannel (LiveTV) or contentpackage (VoD).
enum class ContentMode { kLiveTv, kVod };

ContentMode parse_content_mode(std::string_view text);
std::string_view to_string(ContentMode mode);

// One parsed CDN access-log line. Typed columns are pulled out; every other
// column is kept verbatim in `extra`.
struct LogRecord {
  double timestamp = 0.0;
  std::string uid;
  std::optional<std::string> livechannel;
  std::optional<std::string> contentpackage;
  std::optional<std::uint64_t> contentlength;
  std::optional<bool> hit;
  std::map<std::string, std::string> extra;

  const std::optional<std::string>& content(ContentMode mode) const {
    return mode == ContentMode::kLiveTv ? livechannel : contentpackage;
  }

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

// Ordered column names of a delimiter-separated log. Must contain `timestamp`
// and `uid`; names are unique.
class LogSchema {
 public:
  explicit LogSchema(std::vector<std::string> columns);

  static LogSchema from_header(std::string_view header, char delimiter = ',');

  const std::vector<std::string>& columns() const { return columns_; }
  std::string header(char delimiter = ',') const;

 private:
  friend std::optional<LogRecord> parse_log_line(std::string_view, const LogSchema&,
                                                 std::size_t, char);
  friend std::string format_log_line(const LogRecord&, const LogSchema&, char);

  enum class Field { kTimestamp, kUid, kLivechannel, kContentpackage, kContentlength, kHit, kOther };

  std::vector<std::string> columns_;
  std::vector<Field> fields_;
};

// Splits one line on `delimiter`. A field wrapped in double quotes may contain
// the delimiter; `""` inside quotes is a literal quote.
std::vector<std::string> split_fields(std::string_view line, char delimiter = ',');

// Returns nullopt for blank lines and `#` comments. Throws ParseError (carrying
// `line_number`) on a wrong column count or a malformed typed field.
std::optional<LogRecord> parse_log_line(std::string_view line, const LogSchema& schema,
                                        std::size_t line_number, char delimiter = ',');

// Inverse of parse_log_line for the columns in `schema`.
std::string format_log_line(const LogRecord& record, const LogSchema& schema,
                            char delimiter = ',');

enum class OnParseError { kAbort, kSkip };

struct LogReadStats {
  std::uint64_t lines = 0;        // physical lines after the header
  std::uint64_t records = 0;      // successfully parsed records
  std::uint64_t ignored = 0;      // blank and comment lines
  std::uint64_t parse_errors = 0; // only non-zero under kSkip
};

struct LogReadSummary {
  std::optional<LogSchema> schema;  // nullopt for an empty input
  LogReadStats stats;
};

// Streams records from a log whose first line is the header row.
LogReadSummary read_log_stream(std::istream& in, char delimiter, OnParseError policy,
                               const std::function<void(const LogRecord&)>& sink);

struct LogFile {
  std::optional<LogSchema> schema;
  LogReadStats stats;
  std::vector<LogRecord> records;
};

LogFile read_log_file(const std::filesystem::path& path, char delimiter = ',',
                      OnParseError policy = OnParseError::kAbort);
void write_log_file(const std::filesystem::path& path, const LogSchema& schema,
                    std::span<const LogRecord> records, char delimiter = ',');

// Bijection between original identifier strings and dense 0-based indices.
class IdMap {
 public:
  Index intern(const std::string& id);
  std::optional<Index> find(const std::string& id) const;
  const std::string& id(Index index) const { return reverse_.at(index); }
  std::size_t size() const { return reverse_.size(); }
  const std::vector<std::string>& ids() const { return reverse_; }

  friend bool operator==(const IdMap& a, const IdMap& b) { return a.reverse_ == b.reverse_; }

 private:
  std::unordered_map<std::string, Index> forward_;
  std::vector<std::string> reverse_;
};

struct InteractionTriple {
  Index user = 0;
  Index item = 0;
  std::uint64_t requests = 0;
  int interaction = 0;

  friend bool operator==(const InteractionTriple&, const InteractionTriple&) = default;
};

// round(ln(requests)), half away from zero. Throws DomainError for requests < 1.
int log_scale(std::uint64_t requests);

struct InteractionSet {
  std::vector<InteractionTriple> triples;  // ordered by first appearance of the pair
  IdMap users;
  IdMap items;
  std::uint64_t accepted = 0;  // records that contributed to a triple
  std::uint64_t skipped = 0;   // records without the mode's content field

  RatingList ratings() const;
};

// Counts (uid, item) groups. Partial aggregators built over consecutive shards
// of one stream can be merged; the merged result is identical to a single
// aggregator fed the whole stream, because dense ids are assigned by global
// first-appearance position at finish().
class InteractionAggregator {
 public:
  explicit InteractionAggregator(ContentMode mode, std::uint64_t first_position = 0);

  void add(const LogRecord& record);
  void merge(const InteractionAggregator& other);
  InteractionSet finish() const;

 private:
  struct PairStats {
    std::uint64_t count = 0;
    std::uint64_t first = 0;
  };

  ContentMode mode_;
  std::uint64_t position_;
  std::uint64_t accepted_ = 0;
  std::uint64_t skipped_ = 0;
  std::unordered_map<std::string, std::uint64_t> user_first_;
  std::unordered_map<std::string, std::uint64_t> item_first_;
  // key: uid + '\0' + item
  std::unordered_map<std::string, PairStats> pairs_;
};

// Aggregates with `shards` worker threads; output does not depend on `shards`.
InteractionSet aggregate_interactions(std::span<const LogRecord> records, ContentMode mode,
                                      unsigned shards = 1);

// Headerless `userId,itemId,interaction` rows, LF line endings.
void write_interactions(std::ostream& out, std::span<const InteractionTriple> triples);
// Rating values must be integral; throws DomainError otherwise.
void write_interactions(std::ostream& out, std::span<const Rating> ratings);
RatingList read_interactions(std::istream& in);

void write_interactions_file(const std::filesystem::path& path,
                             std::span<const InteractionTriple> triples);
void write_interactions_file(const std::filesystem::path& path, std::span<const Rating> ratings);
RatingList read_interactions_file(const std::filesystem::path& path);

// Two-column `denseIndex,originalId` sidecar.
void write_id_map(std::ostream& out, const IdMap& map);
IdMap read_id_map(std::istream& in);
void write_id_map_file(const std::filesystem::path& path, const IdMap& map);
IdMap read_id_map_file(const std::filesystem::path& path);

}  // namespace cdnmf
