#pragma once

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>

namespace tfconv::testing {

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::map<std::string, std::string> values;  // key=value lines of stdout
};

// Runs the tfconv executable with `args`; stderr is folded into `out`.
inline CommandResult run_cli(const std::string& exe, const std::string& args) {
  CommandResult r;
  const std::string cmd = "'" + exe + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) r.values[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return r;
}

}  // namespace tfconv::testing
