#include "fdnl2sql/schema/schema.hpp"

#include <sqlite3.h>

#include <algorithm>

#include "fdnl2sql/util.hpp"

namespace fdnl2sql::schema {

std::string_view to_string(TypeGroup g) {
  switch (g) {
    case TypeGroup::Numeric:
      return "numeric";
    case TypeGroup::Text:
      return "text";
    case TypeGroup::Temporal:
      return "temporal";
  }
  return "text";
}

TypeGroup type_group_for(std::string_view declared_type, std::string_view column_name) {
  auto t = util::to_upper(declared_type);
  bool numeric = false;
  if (t.find("INT") != std::string::npos) {
    numeric = true;
  } else if (t.find("CHAR") != std::string::npos || t.find("CLOB") != std::string::npos ||
             t.find("TEXT") != std::string::npos || t.find("BLOB") != std::string::npos ||
             t.empty()) {
    numeric = false;
  } else {
    // REAL, FLOA, DOUB, NUMERIC, DECIMAL, BOOLEAN, DATE... all take numeric affinity.
    numeric = true;
  }
  if (!numeric) return TypeGroup::Text;
  auto name = util::to_lower(column_name);
  for (auto pat : {"year", "date", "month"}) {
    if (name.find(pat) != std::string::npos) return TypeGroup::Temporal;
  }
  return TypeGroup::Numeric;
}

const ColumnInfo* TableInfo::find(std::string_view column) const {
  for (const auto& c : columns) {
    if (util::iequals(c.name, column)) return &c;
  }
  return nullptr;
}

const TableInfo* SchemaDict::find_table(std::string_view name) const {
  for (const auto& t : tables) {
    if (util::iequals(t.name, name)) return &t;
  }
  return nullptr;
}

SchemaDict SchemaDict::build(std::vector<TableInfo> tables) {
  SchemaDict s;
  s.tables = std::move(tables);
  std::sort(s.tables.begin(), s.tables.end(),
            [](const TableInfo& a, const TableInfo& b) { return a.name < b.name; });

  for (std::size_t i = 0; i < s.tables.size(); ++i) {
    for (std::size_t j = i + 1; j < s.tables.size(); ++j) {
      for (const auto& a : s.tables[i].columns) {
        const auto* b = s.tables[j].find(a.name);
        if (b && b->group == a.group) {
          s.join_candidates.push_back({s.tables[i].name, a.name, s.tables[j].name, b->name});
        }
      }
    }
  }

  std::string ser;
  for (const auto& t : s.tables) {
    ser += t.name + "\n";
    for (const auto& c : t.columns) {
      ser += " " + c.name + "\t" + c.declared_type + "\t" + std::string(to_string(c.group)) +
             "\t" + (c.nullable ? "null" : "notnull") + "\n";
    }
  }
  s.fingerprint = util::hex64(util::fnv1a64(ser));
  return s;
}

namespace {

struct Db {
  sqlite3* h = nullptr;
  ~Db() { sqlite3_close(h); }
};

struct Stmt {
  sqlite3_stmt* h = nullptr;
  ~Stmt() { sqlite3_finalize(h); }
};

std::string column_text(sqlite3_stmt* st, int i) {
  auto p = sqlite3_column_text(st, i);
  return p ? reinterpret_cast<const char*>(p) : "";
}

void prepare(sqlite3* db, const std::string& sql, Stmt& st) {
  if (sqlite3_prepare_v2(db, sql.c_str(), -1, &st.h, nullptr) != SQLITE_OK) {
    throw DbUnreadable(sqlite3_errmsg(db));
  }
}

}  // namespace

SchemaDict introspect(const std::string& db_path) {
  Db db;
  if (sqlite3_open_v2(db_path.c_str(), &db.h, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
    throw DbUnreadable("cannot open " + db_path + ": " +
                       (db.h ? sqlite3_errmsg(db.h) : "out of memory"));
  }
  std::vector<std::string> names;
  {
    Stmt st;
    prepare(db.h,
            "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' "
            "ORDER BY name",
            st);
    int rc;
    while ((rc = sqlite3_step(st.h)) == SQLITE_ROW) names.push_back(column_text(st.h, 0));
    if (rc != SQLITE_DONE) throw DbUnreadable(sqlite3_errmsg(db.h));
  }

  std::vector<TableInfo> tables;
  for (const auto& name : names) {
    TableInfo t;
    t.name = name;
    {
      Stmt st;
      // pragma_table_info(): name=1, type=2, notnull=3, pk=5
      prepare(db.h, "SELECT name, type, \"notnull\", pk FROM pragma_table_info(?1) ORDER BY cid",
              st);
      sqlite3_bind_text(st.h, 1, name.c_str(), -1, SQLITE_TRANSIENT);
      int rc;
      while ((rc = sqlite3_step(st.h)) == SQLITE_ROW) {
        ColumnInfo c;
        c.name = column_text(st.h, 0);
        c.declared_type = column_text(st.h, 1);
        c.group = type_group_for(c.declared_type, c.name);
        c.nullable = sqlite3_column_int(st.h, 2) == 0;
        t.columns.push_back(std::move(c));
      }
      if (rc != SQLITE_DONE) throw DbUnreadable(sqlite3_errmsg(db.h));
    }
    {
      Stmt st;
      std::string quoted = "\"";
      for (char ch : name) {
        if (ch == '"') quoted += '"';
        quoted += ch;
      }
      prepare(db.h, "SELECT count(*) FROM " + quoted + "\"", st);
      if (sqlite3_step(st.h) != SQLITE_ROW) throw DbUnreadable(sqlite3_errmsg(db.h));
      t.row_count = sqlite3_column_int64(st.h, 0);
    }
    tables.push_back(std::move(t));
  }
  return SchemaDict::build(std::move(tables));
}

std::string render_schema_context(const SchemaDict& s) {
  std::string out;
  for (const auto& t : s.tables) {
    out += t.name + "(";
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      if (i) out += ", ";
      const auto& c = t.columns[i];
      out += c.name;
      if (!c.declared_type.empty()) out += " " + c.declared_type;
    }
    out += ")\n";
  }
  if (!s.join_candidates.empty()) {
    out += "Join keys:";
    for (const auto& j : s.join_candidates) {
      out += " " + j.left_table + "." + j.left_column + " = " + j.right_table + "." +
             j.right_column + ";";
    }
    out += "\n";
  }
  return out;
}

}  // namespace fdnl2sql::schema
