#pragma once

// Temporal edge lists to edge-end sequences: parsing (plain or gzip),
// end ordering, train/test splits, order forgetting and a binary cache.

#include <iosfwd>
#include <string>

#include "bntl/core.hpp"

namespace bntl {

struct Edge {
  Count src = 0;
  Count dst = 0;
  double time = 0.0;
};

struct ParseOptions {
  bool require_timestamp = false;
  bool drop_self_loops = false;
  bool drop_duplicates = false;  // identical (src, dst, time) lines
};

struct EdgeList {
  std::vector<Edge> edges;  // sorted by time, stable on ties
  bool timestamped = false;
  Count lines = 0;
  Count comments = 0;
  Count self_loops = 0;  // seen (dropped only when requested)
  Count duplicates = 0;  // counted only when dropping them
};

/// Lines "src dst [time]"; '#' and '%' comment lines and blank lines are
/// skipped. Errors carry the 1-based line number.
EdgeList parse_edge_list(std::istream& in, const ParseOptions& options = {});
/// Reads a file through zlib, so gzip input is decompressed transparently.
EdgeList parse_edge_list_file(const std::string& path,
                              const ParseOptions& options = {});

enum class EndOrder { src_first, random };
EndOrder parse_end_order(std::string_view name);

struct LabeledSequence {
  EdgeEndSequence z;
  std::vector<Count> label_of;  // original vertex label of canonical id j
};

/// Each edge contributes its two ends (src then dst, or a seeded coin flip
/// per edge), relabeled by first appearance.
LabeledSequence ends_from_edges(std::span<const Edge> edges,
                                EndOrder order = EndOrder::src_first,
                                std::uint64_t seed = 0);

struct TrainTest {
  EdgeEndSequence train;
  std::vector<Count> test;  // keeps the labeling of the full sequence
};

/// Splits after floor(fraction * edges) edges.
TrainTest split_train_test(const EdgeEndSequence& z, double fraction);
/// Splits after a fixed number of training edges.
TrainTest split_train_edges(const EdgeEndSequence& z, Count train_edges);

struct ForgottenGraph {
  UnlabeledObservation observation;
  std::vector<Count> true_sigma;  // arrival position -> external id
  std::vector<Count> true_times;
};

/// Degree multiset under a seeded random assignment of external ids.
ForgottenGraph forget_order(const EdgeEndSequence& z, std::uint64_t seed);

/// Held-out labels expressed in the forgotten graph's external ids: a label
/// j <= K becomes true_sigma[j-1], later arrivals keep K+1, K+2, ...
std::vector<Count> relabel_continuation(const ForgottenGraph& g,
                                        std::span<const Count> test);

/// Binary cache: "BNTLZ\0\0\0", u32 version, u64 n, u64 K, then n
/// zigzag LEB128 varints of successive label differences.
void write_cache(std::ostream& out, const EdgeEndSequence& z);
EdgeEndSequence read_cache(std::istream& in);
void write_cache_file(const std::string& path, const EdgeEndSequence& z);
EdgeEndSequence read_cache_file(const std::string& path);
bool is_cache_file(const std::string& path);

/// Plain-text edge-end sequence: one label per line or whitespace separated.
void write_ends_text(std::ostream& out, const EdgeEndSequence& z);
EdgeEndSequence read_ends_text(std::istream& in);

/// FNV-1a 64-bit digest of a file's bytes (hex string).
std::string file_digest(const std::string& path);

}  // namespace bntl
