#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "fdnl2sql/augment/augmenter.hpp"
#include "fdnl2sql/bank/bank.hpp"
#include "fdnl2sql/exec/executor.hpp"
#include "fdnl2sql/pipeline/pipeline.hpp"
#include "fdnl2sql/provider/gateway.hpp"
#include "fdnl2sql/provider/prompts.hpp"
#include "fdnl2sql/service/json_io.hpp"
#include "fdnl2sql/service/trace_store.hpp"

namespace httplib {
class Server;
}

namespace fdnl2sql::service {

struct ServiceConfig {
  std::string cors_origin = "*";
  std::size_t default_k = 5;
  std::size_t max_k = 50;
  pipeline::Options pipeline;
};

struct Response {
  int status = 200;
  Json body;
};

using Params = std::multimap<std::string, std::string>;

/// Request handling independent of the transport. Handlers never throw:
/// every outcome is a status plus a JSON body.
class Service {
 public:
  Service(const exec::Executor& db, bank::Bank& bank, const provider::Gateway& gw,
          provider::PromptSet prompts, TraceStore& traces, ServiceConfig cfg = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response query(const std::string& body);
  Response feedback(const std::string& body);
  Response exemplars(const Params& params) const;
  Response start_augment(const std::string& body);
  Response augment_status(const std::string& job_id) const;
  Response schema() const;
  Response trace(const std::string& id) const;
  Response execute(const std::string& body) const;
  Response health() const;

  /// Blocks until the running augment job (if any) has finished.
  void wait_for_job();

  /// Registers every /api route plus CORS handling.
  void mount(httplib::Server& server);

  const ServiceConfig& config() const { return cfg_; }

 private:
  struct Job {
    std::string id;
    std::string status = "running";  // running, done, failed
    augment::AugmentReport report;
    std::string error;
  };

  const exec::Executor& db_;
  bank::Bank& bank_;
  const provider::Gateway& gw_;
  provider::PromptSet prompts_;
  TraceStore& traces_;
  ServiceConfig cfg_;
  pipeline::Pipeline pipeline_;

  mutable std::mutex job_mu_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::uint64_t job_counter_ = 0;
  bool job_running_ = false;
  std::thread job_thread_;
  std::atomic<bool> stop_{false};
};

Json error_body(const std::string& code, const std::string& message);

}  // namespace fdnl2sql::service
