// Command-line surface: synth | train | embed | eval | probe | bench.
//
// Each command reads a JSON config (unknown keys are rejected; relative paths
// resolve against the config file's directory) and writes its artifacts into
// the --out directory.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace intact::cli {

struct Context {
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  int threads = 0;
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

void cmd_synth(const Context& ctx, std::ostream& out);
void cmd_train(const Context& ctx, std::ostream& out);
void cmd_embed(const Context& ctx, std::ostream& out);
void cmd_eval(const Context& ctx, std::ostream& out);
void cmd_probe(const Context& ctx, std::ostream& out);
void cmd_bench(const Context& ctx, std::ostream& out);

/// Parses argv, dispatches, and maps failures to exit codes: 0 success,
/// 1 runtime failure, 2 usage or config error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace intact::cli
