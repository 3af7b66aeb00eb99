#include "fdnl2sql/augment/augmenter.hpp"

#include <algorithm>
#include <memory>

#include <json.hpp>

#include "fdnl2sql/sql/describe.hpp"
#include "fdnl2sql/sql/guard.hpp"
#include "fdnl2sql/sql/parser.hpp"
#include "fdnl2sql/sql/render.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::augment {

namespace {

ValueSampler caching_sampler(const exec::Executor& db) {
  auto cache = std::make_shared<std::map<std::pair<std::string, std::string>, std::vector<exec::Cell>>>();
  return [&db, cache](const std::string& table, const std::string& column) {
    auto key = std::make_pair(table, column);
    auto it = cache->find(key);
    if (it == cache->end()) it = cache->emplace(key, db.distinct_values(table, column)).first;
    return it->second;
  };
}

std::vector<Mutation> filter_kinds(std::vector<Mutation> all, const std::vector<MutationKind>& kinds) {
  if (kinds.empty()) return all;
  std::vector<Mutation> out;
  for (auto& m : all) {
    if (std::find(kinds.begin(), kinds.end(), m.kind) != kinds.end()) out.push_back(std::move(m));
  }
  return out;
}

// Round-robin over kinds (kind order and per-kind order shuffled).
std::vector<Mutation> interleave(std::vector<Mutation> muts, util::Rng& rng) {
  std::map<MutationKind, std::vector<Mutation>> by_kind;
  for (auto& m : muts) by_kind[m.kind].push_back(std::move(m));
  std::vector<MutationKind> order;
  for (auto& [k, v] : by_kind) {
    order.push_back(k);
    rng.shuffle(v);
  }
  rng.shuffle(order);
  std::vector<Mutation> out;
  for (std::size_t round = 0;; ++round) {
    bool any = false;
    for (auto k : order) {
      auto& v = by_kind[k];
      if (round < v.size()) {
        out.push_back(std::move(v[round]));
        any = true;
      }
    }
    if (!any) break;
  }
  return out;
}

}  // namespace

std::string_view to_string(DiscardReason r) {
  switch (r) {
    case DiscardReason::Error:
      return "error";
    case DiscardReason::Empty:
      return "empty";
    case DiscardReason::Duplicate:
      return "duplicate";
  }
  return "error";
}

void Tally::count(const FilterResult& r) {
  ++attempted;
  if (std::holds_alternative<RetainedVariant>(r)) {
    ++retained;
    return;
  }
  switch (std::get<DiscardReason>(r)) {
    case DiscardReason::Error:
      ++discarded_error;
      break;
    case DiscardReason::Empty:
      ++discarded_empty;
      break;
    case DiscardReason::Duplicate:
      ++discarded_duplicate;
      break;
  }
}

void AugmentReport::count(MutationKind kind, const FilterResult& r) {
  Tally::count(r);
  auto name = std::string(to_string(kind));
  per_kind_tally[name].count(r);
  if (std::holds_alternative<RetainedVariant>(r)) ++per_kind[name];
}

bool AugmentReport::conserved() const {
  if (!Tally::conserved()) return false;
  Tally sum;
  for (const auto& [k, t] : per_kind_tally) {
    if (!t.conserved()) return false;
    sum.attempted += t.attempted;
    sum.retained += t.retained;
  }
  return sum.attempted == attempted && sum.retained == retained;
}

FilterResult apply_and_filter(const exec::Executor& db, const sql::SqlQuery& parent,
                              const Mutation& m, const std::set<std::string>& known,
                              int timeout_ms) {
  sql::SqlQuery variant;
  try {
    variant = sql::parse_sql(m.variant_sql);
  } catch (const Error&) {
    return DiscardReason::Error;
  }
  if (!sql::guard(variant, db.schema()).passes()) return DiscardReason::Error;
  auto nf = sql::normalize_sql(variant);
  if (known.count(nf) || nf == sql::normalize_sql(parent)) return DiscardReason::Duplicate;
  try {
    if (!db.is_non_empty(variant, timeout_ms)) return DiscardReason::Empty;
  } catch (const Error&) {
    return DiscardReason::Error;
  }
  return RetainedVariant{m, nf};
}

BackTranslation parse_back_translation(const std::string& reply) {
  BackTranslation out;
  bool seen = false;
  for (const auto& raw : util::split_lines(reply)) {
    auto line = util::trim(raw);
    if (!seen) {
      if (line.rfind("Question:", 0) == 0) {
        out.question = std::string(util::trim(line.substr(9)));
        seen = !out.question.empty();
      }
      continue;
    }
    if (line.rfind("- ", 0) == 0 || line.rfind("* ", 0) == 0) {
      auto sub = util::trim(line.substr(2));
      if (!sub.empty()) out.sub_questions.emplace_back(sub);
    }
  }
  if (!seen) throw UnparseableReply("reply has no \"Question:\" line");
  return out;
}

BackTranslation back_translate(const std::string& variant_sql, const provider::Gateway& gw,
                               const provider::PromptSet& prompts,
                               const std::string& schema_context) {
  provider::GenerationRequest req;
  req.task = provider::PromptKind::Sql2Nl;
  req.prompt = prompts.render(provider::PromptKind::Sql2Nl,
                              {{"schema", schema_context}, {"sql", variant_sql}});
  return parse_back_translation(gw.generate(req).text);
}

std::string to_jsonl(const BenchmarkEntry& e) {
  nlohmann::ordered_json j;
  j["question"] = e.question;
  j["sql"] = e.sql;
  j["kind"] = e.kind;
  j["parent_question"] = e.parent_question;
  j["parent_sql"] = e.parent_sql;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

ExpandResult expand_benchmark(const std::vector<schema::SeedPair>& seeds,
                              const exec::Executor& db, const provider::Gateway& gw,
                              const provider::PromptSet& prompts, const ExpandOptions& opts) {
  std::vector<sql::SqlQuery> parsed;
  std::set<std::string> known;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    sql::SqlQuery q;
    try {
      q = sql::parse_sql(seeds[i].sql);
    } catch (const Error& e) {
      throw SeedInvalid(i, e.what());
    }
    auto report = sql::guard(q, db.schema());
    if (!report.passes()) {
      throw SeedInvalid(i, report.violations.empty() ? "guard failed"
                                                     : report.violations.front().detail);
    }
    try {
      if (!db.is_non_empty(q, opts.timeout_ms)) throw SeedInvalid(i, "empty result");
    } catch (const SeedInvalid&) {
      throw;
    } catch (const Error& e) {
      throw SeedInvalid(i, e.what());
    }
    known.insert(sql::normalize_sql(q));
    parsed.push_back(std::move(q));
  }

  auto schema_context = schema::render_schema_context(db.schema());
  auto sampler = caching_sampler(db);
  ExpandResult out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    util::Rng rng(opts.seed ^ util::fnv1a64(std::to_string(i)));
    auto muts = filter_kinds(enumerate_mutations(parsed[i], db.schema(), rng.next(), sampler),
                             opts.kinds);
    std::size_t kept = 0;
    for (auto& m : interleave(std::move(muts), rng)) {
      if (kept >= opts.per_seed) break;
      auto r = apply_and_filter(db, parsed[i], m, known, opts.timeout_ms);
      out.report.count(m.kind, r);
      auto* rv = std::get_if<RetainedVariant>(&r);
      if (!rv) continue;
      ++kept;
      known.insert(rv->normal_form);
      BenchmarkEntry e;
      e.sql = rv->normal_form;
      e.kind = std::string(to_string(m.kind));
      e.parent_question = seeds[i].question;
      e.parent_sql = seeds[i].sql;
      try {
        e.question = back_translate(e.sql, gw, prompts, schema_context).question;
      } catch (const Error&) {
        e.question = sql::describe_sql(sql::parse_sql(e.sql)).question;
        e.template_question = true;
        ++out.report.pending;
      }
      out.entries.push_back(std::move(e));
    }
  }
  return out;
}

const std::vector<MutationKind>& bank_growth_kinds() {
  static const std::vector<MutationKind> v = {MutationKind::OpChange, MutationKind::ColumnSubstitute,
                                              MutationKind::ValueEditNumeric,
                                              MutationKind::ValueEditText};
  return v;
}

AugmentReport grow_bank(bank::Bank& bank, const exec::Executor& db, const provider::Gateway& gw,
                        const provider::PromptSet& prompts, const GrowOptions& opts,
                        std::vector<PendingVariant>* pending) {
  AugmentReport report;
  if (opts.batch == 0) return report;
  std::vector<bank::Exemplar> sources;
  for (auto& e : bank.snapshot()) {
    if (e.source != bank::Source::Augmented) sources.push_back(std::move(e));
  }
  if (sources.empty()) return report;

  auto known = bank.normal_forms();
  auto schema_context = schema::render_schema_context(db.schema());
  auto sampler = caching_sampler(db);
  util::Rng rng(opts.seed);
  auto stopped = [&] { return opts.stop && opts.stop->load(); };

  for (std::size_t b = 0; b < opts.batch && !stopped(); ++b) {
    const auto& src = sources[rng.below(sources.size())];
    sql::SqlQuery parent;
    try {
      parent = sql::parse_sql(src.sql);
    } catch (const Error&) {
      continue;
    }
    if (!sql::guard(parent, db.schema()).passes()) continue;
    auto muts = filter_kinds(enumerate_mutations(parent, db.schema(), rng.next(), sampler),
                             opts.kinds);
    for (auto& m : interleave(std::move(muts), rng)) {
      if (stopped()) break;
      auto r = apply_and_filter(db, parent, m, known, opts.timeout_ms);
      report.count(m.kind, r);
      auto* rv = std::get_if<RetainedVariant>(&r);
      if (!rv) continue;
      known.insert(rv->normal_form);
      auto kind = std::string(to_string(m.kind));
      try {
        auto bt = back_translate(rv->normal_form, gw, prompts, schema_context);
        bank::Exemplar e;
        e.question = bt.question;
        e.sql = rv->normal_form;
        e.decomposition = bt.sub_questions;
        e.embedding = gw.embed(bt.question);
        e.source = bank::Source::Augmented;
        e.parent_id = src.id;
        e.mutation_kind = kind;
        bank.add(std::move(e));
      } catch (const Error& err) {
        ++report.pending;
        if (pending) pending->push_back({rv->normal_form, kind, src.id, err.code()});
      }
      break;
    }
  }
  return report;
}

}  // namespace fdnl2sql::augment
