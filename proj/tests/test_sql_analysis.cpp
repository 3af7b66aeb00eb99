#include <catch_amalgamated.hpp>

#include "fdnl2sql/sql/analysis.hpp"
#include "fdnl2sql/sql/describe.hpp"
#include "fdnl2sql/sql/lexer.hpp"
#include "fdnl2sql/sql/parser.hpp"
#include "fdnl2sql/sql/render.hpp"

using namespace fdnl2sql;
using sql::parse_sql;
using sql::TokenBag;

TEST_CASE("clause tokens of a simple query") {
  auto t = sql::clause_tokens(parse_sql("SELECT nct_id, phase FROM trials WHERE phase >= 3"));
  CHECK(t.select_tokens == TokenBag{{"nct_id", 1}, {"phase", 1}});
  CHECK(t.from_tokens == TokenBag{{"trials", 1}});
  CHECK(t.where_tokens == TokenBag{{"phase", 1}, {">=", 1}, {"3", 1}});
}

TEST_CASE("qualified names and string literals are single tokens") {
  auto t = sql::clause_tokens(
      parse_sql("SELECT t.nct_id FROM trials AS t WHERE t.cancer_type = 'small cell lung'"));
  CHECK(t.select_tokens == TokenBag{{"t.nct_id", 1}});
  CHECK(t.from_tokens == TokenBag{{"trials", 1}, {"t", 1}});
  CHECK(t.where_tokens.count("t.cancer_type") == 1);
  CHECK(t.where_tokens.count("'small cell lung'") == 1);
  CHECK(sql::bag_size(t.where_tokens) == 3);
}

TEST_CASE("repeated lexemes are counted") {
  auto t = sql::clause_tokens(parse_sql("SELECT a FROM t WHERE x = 1 AND y = 1"));
  CHECK(t.where_tokens.at("=") == 2);
  CHECK(t.where_tokens.at("1") == 2);
  CHECK(t.where_tokens.at("and") == 1);
  CHECK(sql::bag_size(t.where_tokens) == 7);
}

TEST_CASE("bag overlap is the multiset intersection size") {
  TokenBag a{{"x", 2}, {"=", 1}, {"1", 1}};
  TokenBag b{{"x", 1}, {"=", 3}, {"2", 1}};
  CHECK(sql::bag_overlap(a, b) == 2);
  CHECK(sql::bag_overlap(a, {}) == 0);
  CHECK(sql::bag_size(a) == 4);
}

TEST_CASE("no WHERE gives an empty bag and pattern") {
  auto q = parse_sql("SELECT a FROM t");
  CHECK(sql::clause_tokens(q).where_tokens.empty());
  CHECK(sql::extract_where_pattern(q).empty());
}

TEST_CASE("WHERE pattern replaces literals") {
  auto q = parse_sql("SELECT a FROM t WHERE phase = 3 AND cancer_type LIKE '%lung%'");
  CHECK(sql::extract_where_pattern(q) == "phase = <number> AND cancer_type LIKE <text>");
}

TEST_CASE("WHERE pattern keeps its shape when placeholders are refilled") {
  // Literals taken from the original WHERE, in order, put back in place of
  // the placeholders must give the same structure.
  for (std::string raw : {
           std::string("SELECT a FROM t WHERE x = 1 AND (y = 'b' OR z > 2.5)"),
           std::string("SELECT a FROM t WHERE x BETWEEN 1 AND 4 AND y IN ('a', 'b')"),
           std::string("SELECT a FROM t WHERE NOT x = 1"),
           std::string("SELECT a FROM t WHERE y LIKE '<number>'"),
       }) {
    CAPTURE(raw);
    auto q = parse_sql(raw);
    auto pattern = sql::extract_where_pattern(q);
    std::vector<std::string> literals;
    for (const auto& tok : sql::tokenize(sql::render_expr(*q.where()))) {
      if (tok.kind == sql::TokenKind::Number || tok.kind == sql::TokenKind::String) {
        literals.push_back(tok.text);
      }
    }
    std::string refilled;
    std::size_t next = 0;
    for (std::size_t i = 0; i < pattern.size();) {
      bool hit = false;
      for (std::string ph : {"<number>", "<text>"}) {
        if (pattern.compare(i, ph.size(), ph) == 0) {
          REQUIRE(next < literals.size());
          refilled += literals[next++];
          i += ph.size();
          hit = true;
          break;
        }
      }
      if (!hit) refilled += pattern[i++];
    }
    CHECK(next == literals.size());
    CHECK(parse_sql("SELECT a FROM t WHERE " + refilled).structurally_equal(q));
  }
}

TEST_CASE("conjuncts and and_chain are inverse") {
  auto q = parse_sql("SELECT a FROM t WHERE x = 1 AND (y = 2 OR z = 3) AND w < 4");
  auto parts = sql::conjuncts(*q.where());
  REQUIRE(parts.size() == 3);
  CHECK(sql::render_expr(parts[1]) == "y = 2 OR z = 3");
  auto back = sql::and_chain(parts);
  REQUIRE(back);
  CHECK(*back == *q.where());
  CHECK_FALSE(sql::and_chain({}));
}

TEST_CASE("template description") {
  auto d = sql::describe_sql(parse_sql("SELECT nct_id FROM trials WHERE phase = 3 AND start_year >= 2018"));
  CHECK(d.sub_questions.size() == 2);
  CHECK(d.question.find("nct_id") != std::string::npos);
  CHECK(d.question.back() == '?');
}
