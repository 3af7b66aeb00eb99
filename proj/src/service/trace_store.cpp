#include "fdnl2sql/service/trace_store.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fdnl2sql::service {

Json to_json(const FeedbackRecord& f) {
  Json j;
  j["trace_id"] = f.trace_id;
  j["action"] = f.action;
  j["edited_sql"] = f.edited_sql ? Json(*f.edited_sql) : Json(nullptr);
  j["exemplar_id"] = f.exemplar_id ? Json(*f.exemplar_id) : Json(nullptr);
  j["at"] = f.at;
  return j;
}

namespace {

FeedbackRecord feedback_from_json(const Json& j) {
  FeedbackRecord f;
  f.trace_id = j.at("trace_id").get<std::string>();
  f.action = j.at("action").get<std::string>();
  if (j.contains("edited_sql") && !j["edited_sql"].is_null()) f.edited_sql = j["edited_sql"].get<std::string>();
  if (j.contains("exemplar_id") && !j["exemplar_id"].is_null()) {
    f.exemplar_id = j["exemplar_id"].get<std::int64_t>();
  }
  f.at = j.value("at", "");
  return f;
}

}  // namespace

TraceStore::TraceStore(std::string path, util::Clock clock)
    : path_(std::move(path)), clock_(std::move(clock)) {
  if (path_.empty()) return;
  std::ifstream in(path_);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (util::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const std::exception&) {
      // A torn final line from a crash is skipped; anything else is fatal.
      if (in.peek() == EOF) break;
      throw Error("corrupt_record", path_ + " line " + std::to_string(lineno));
    }
    auto type = j.value("type", "");
    if (type == "trace") {
      auto id = j.at("trace").at("trace_id").get<std::string>();
      note_id(id);
      traces_[id] = j["trace"];
    } else if (type == "feedback") {
      auto f = feedback_from_json(j.at("feedback"));
      feedback_[f.trace_id].push_back(std::move(f));
    }
  }
}

void TraceStore::note_id(const std::string& id) {
  if (id.rfind("tr-", 0) != 0) return;
  try {
    auto n = std::stoull(id.substr(3));
    if (n > counter_) counter_ = n;
  } catch (const std::exception&) {
  }
}

std::string TraceStore::next_id() {
  std::lock_guard lock(mu_);
  return pipeline::format_trace_id(++counter_);
}

void TraceStore::append(const Json& record) {
  if (path_.empty()) return;
  auto line = dump(record) + "\n";
  auto parent = std::filesystem::path(path_).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  FILE* f = std::fopen(path_.c_str(), "a");
  if (!f) throw Error("trace_io_error", "cannot append to " + path_);
  bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size();
  ok = std::fflush(f) == 0 && ok;
  ok = ::fsync(fileno(f)) == 0 && ok;
  ok = std::fclose(f) == 0 && ok;
  if (!ok) throw Error("trace_io_error", "write to " + path_ + " failed");
}

void TraceStore::put(const pipeline::PipelineTrace& t) {
  auto j = to_json(t);
  std::lock_guard lock(mu_);
  append(Json{{"type", "trace"}, {"trace", j}});
  note_id(t.trace_id);
  traces_[t.trace_id] = std::move(j);
}

void TraceStore::add_feedback(FeedbackRecord f) {
  if (f.at.empty()) f.at = clock_();
  std::lock_guard lock(mu_);
  append(Json{{"type", "feedback"}, {"feedback", to_json(f)}});
  feedback_[f.trace_id].push_back(std::move(f));
}

std::optional<pipeline::PipelineTrace> TraceStore::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = traces_.find(id);
  if (it == traces_.end()) return std::nullopt;
  return trace_from_json(it->second);
}

std::vector<FeedbackRecord> TraceStore::feedback(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = feedback_.find(id);
  return it == feedback_.end() ? std::vector<FeedbackRecord>{} : it->second;
}

std::optional<Json> TraceStore::get_json(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = traces_.find(id);
  if (it == traces_.end()) return std::nullopt;
  auto j = it->second;
  Json fb = Json::array();
  if (auto f = feedback_.find(id); f != feedback_.end()) {
    for (const auto& r : f->second) fb.push_back(to_json(r));
  }
  j["feedback"] = std::move(fb);
  return j;
}

std::size_t TraceStore::size() const {
  std::lock_guard lock(mu_);
  return traces_.size();
}

}  // namespace fdnl2sql::service
