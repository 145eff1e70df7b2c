#pragma once

// Command-line front end: generate, mle, gibbs and summarize. Each command
// writes its outputs plus a run manifest; errors go to stderr as one JSON
// object per line.

#include <cstdint>
#include <string>
#include <vector>

#include "bntl/core.hpp"

namespace bntl::cli {

enum ExitCode : int { ok = 0, usage = 2, data = 3, numeric = 4 };

/// Exit code for a library error.
int exit_code_for(ErrorCode code);

/// Seed of chain `index` derived from a base seed (splitmix64 mixing).
std::uint64_t chain_seed(std::uint64_t seed, unsigned index);

/// "start+length" runs of consecutive integers, e.g. 1 2 3 7 8 -> "1+3 7+2".
std::string run_length(const std::vector<Count>& values);
std::vector<Count> parse_run_length(const std::string& text);

/// Full program: parses argv, dispatches, maps failures to exit codes.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace bntl::cli
