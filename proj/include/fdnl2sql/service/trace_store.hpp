#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fdnl2sql/service/json_io.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::service {

struct FeedbackRecord {
  std::string trace_id;
  std::string action;  // accept, modify, reject
  std::optional<std::string> edited_sql;
  std::optional<std::int64_t> exemplar_id;
  std::string at;
};

/// Append-only JSONL of traces and the feedback recorded against them.
/// An empty path keeps everything in memory.
class TraceStore {
 public:
  explicit TraceStore(std::string path = {}, util::Clock clock = util::rfc3339_now);

  /// Next unused "tr-NNNNNN" id; ids are never handed out twice.
  std::string next_id();
  void put(const pipeline::PipelineTrace& t);
  void add_feedback(FeedbackRecord f);

  std::optional<pipeline::PipelineTrace> get(const std::string& id) const;
  std::vector<FeedbackRecord> feedback(const std::string& id) const;
  /// Stored trace JSON plus a "feedback" array.
  std::optional<Json> get_json(const std::string& id) const;
  std::size_t size() const;

 private:
  std::string path_;
  util::Clock clock_;
  mutable std::mutex mu_;
  std::uint64_t counter_ = 0;
  std::map<std::string, Json> traces_;
  std::map<std::string, std::vector<FeedbackRecord>> feedback_;

  void append(const Json& record);
  void note_id(const std::string& id);
};

Json to_json(const FeedbackRecord& f);

}  // namespace fdnl2sql::service
