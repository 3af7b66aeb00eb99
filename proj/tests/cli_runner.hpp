#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <string>
#include <vector>

namespace testsupport {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') {
      q += "'\\''";
    } else {
      q += c;
    }
  }
  return q + "'";
}

/// Runs the CLI with a clean provider environment (in-process mock,
/// trigram embeddings) and captures stdout.
inline CliResult run_cli(const std::vector<std::string>& args) {
  std::string cmd =
      "env -u FDNL2SQL_PROVIDER_URL -u FDNL2SQL_EMBED_URL -u FDNL2SQL_PROMPT_DIR "
      "-u FDNL2SQL_EMBED_DIM " +
      shell_quote(FDNL2SQL_CLI);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " 2>/dev/null";
  CliResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = ::pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace testsupport
