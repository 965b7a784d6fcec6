#pragma once

// Shared plumbing for the test binaries: scratch directories, small file
// helpers, and a subprocess runner for the CLI under test.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#ifdef SATGROWTH_CLI_PATH
#include <sys/wait.h>
#endif

namespace testsupport {

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    std::random_device rd;
    std::mt19937_64 eng{(static_cast<std::uint64_t>(rd()) << 32) ^ rd()};
    path = std::filesystem::temp_directory_path() /
           ("satgrowth_test_" + std::to_string(eng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline void write_text(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

#ifdef SATGROWTH_CLI_PATH

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI through the shell; env_prefix may carry VAR=value assignments.
inline RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static TempDir scratch;
  static int counter = 0;
  const std::filesystem::path err_path =
      scratch.file("stderr_" + std::to_string(counter++) + ".txt");
  const std::string cmd = env_prefix + std::string(SATGROWTH_CLI_PATH) + " " + args +
                          " 2>" + err_path.string();
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return result;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, n);
  const int status = pclose(pipe);
  if (status != -1 && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.err = read_text(err_path);
  return result;
}

#endif  // SATGROWTH_CLI_PATH

}  // namespace testsupport
