#include "doctest.h"

#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bntl/generate.hpp"
#include "bntl/ingest.hpp"

using namespace bntl;
using V = std::vector<Count>;
namespace fs = std::filesystem;

namespace {

V ends_of(const EdgeEndSequence& z) { return V(z.ends().begin(), z.ends().end()); }

EdgeList parse(const std::string& text, ParseOptions opt = {}) {
  std::istringstream in(text);
  return parse_edge_list(in, opt);
}

std::string error_of(const std::string& text, ParseOptions opt = {}) {
  try {
    parse(text, opt);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::malformed_input);
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "bntl-ingest-test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("timestamps sort stably") {
  const auto list = parse("1 2 10\n2 3 5\n1 3 5\n");
  REQUIRE(list.edges.size() == 3);
  CHECK(list.timestamped);
  CHECK(list.edges[0].src == 2);
  CHECK(list.edges[0].dst == 3);
  CHECK(list.edges[1].src == 1);
  CHECK(list.edges[1].dst == 3);
  CHECK(list.edges[2].time == 10.0);
  CHECK(list.lines == 3);
}

TEST_CASE("comments, blank lines and separators") {
  const auto list = parse("# header\n% other header\n\n1,2\n  3\t4  \n");
  CHECK(list.edges.size() == 2);
  CHECK(list.comments == 2);
  CHECK_FALSE(list.timestamped);
  CHECK(list.edges[1].src == 3);
  CHECK(list.edges[1].dst == 4);
}

TEST_CASE("malformed lines report their line number") {
  CHECK(error_of("1 2 3\n# c\n4 x 5\n").find("line 3") != std::string::npos);
  CHECK(error_of("1\n").find("line 1") != std::string::npos);
  CHECK(error_of("1 2 3\n4 5\n").find("line 2") != std::string::npos);
  CHECK(error_of("1 2 3 4\n").find("line 1") != std::string::npos);
  CHECK(error_of("1 2\n", ParseOptions{true, false, false}).find("line 1") != std::string::npos);
}

TEST_CASE("self loops and duplicates are counted and optionally dropped") {
  const std::string text = "1 1 1\n1 2 2\n1 2 2\n2 3 3\n";
  const auto keep = parse(text);
  CHECK(keep.edges.size() == 4);
  CHECK(keep.self_loops == 1);
  const auto drop = parse(text, ParseOptions{false, true, true});
  CHECK(drop.edges.size() == 2);
  CHECK(drop.self_loops == 1);
  CHECK(drop.duplicates == 1);
}

TEST_CASE("edges to ends") {
  const std::vector<Edge> edges{{10, 20, 0}, {10, 30, 0}};
  const auto seq = ends_from_edges(edges);
  CHECK(ends_of(seq.z) == V{1, 2, 1, 3});
  CHECK(seq.label_of == V{10, 20, 30});
  const auto loop = ends_from_edges(std::vector<Edge>{{7, 7, 0}});
  CHECK(ends_of(loop.z) == V{1, 1});

  std::vector<Edge> many;
  for (Count i = 0; i < 200; ++i) many.push_back({i, i + 1000, 0});
  const auto a = ends_from_edges(many, EndOrder::random, 5);
  const auto b = ends_from_edges(many, EndOrder::random, 5);
  CHECK(ends_of(a.z) == ends_of(b.z));
  CHECK(a.label_of == b.label_of);
  CHECK(a.z.size() == 400);
  // some edges must have flipped
  CHECK(a.label_of != ends_from_edges(many).label_of);
  CHECK(parse_end_order("random") == EndOrder::random);
  CHECK_THROWS_AS(parse_end_order("dst-first"), Error);
}

TEST_CASE("train and test split at an edge boundary") {
  const EdgeEndSequence seq(std::vector<Count>{1, 2, 1, 3, 2, 3, 4, 1, 5, 2, 6, 1, 4, 7, 2, 2, 3, 8, 1, 9});
  const auto split = split_train_test(seq, 0.8);
  CHECK(split.train.size() == 16);
  CHECK(split.test.size() == 4);
  CHECK(split.test == V{3, 8, 1, 9});
  const auto [d, t] = degrees_from_ends(split.train);
  CHECK(d.size() == 7);  // labels 8 and 9 appear only in the test part
  CHECK(split_train_edges(seq, 5).train.size() == 10);
  CHECK_THROWS_AS(split_train_test(seq, 0.01), Error);
  CHECK_THROWS_AS(split_train_test(seq, 1.0), Error);
  CHECK_THROWS_AS(split_train_test(EdgeEndSequence({1, 2, 1}), 0.5), Error);
}

TEST_CASE("forgetting the arrival order") {
  const EdgeEndSequence z({1, 2, 1, 3, 2});
  const auto g = forget_order(z, 3);
  CHECK(g.observation.n == 5);
  CHECK(g.true_times == V{1, 2, 4});
  V sorted = g.observation.degrees;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == V{1, 2, 2});
  // the hidden permutation maps arrival positions onto the shuffled ids
  const V by_position{2, 2, 1};
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(g.observation.degrees[static_cast<std::size_t>(g.true_sigma[j] - 1)] == by_position[j]);
  const auto h = forget_order(z, 3);
  CHECK(h.true_sigma == g.true_sigma);
  CHECK(h.observation.degrees == g.observation.degrees);

  const auto big = sample_predictive(BntlModel{0.5, Geometric{0.3}}, 500, std::uint64_t{1});
  const auto f1 = forget_order(big.ends, 1), f2 = forget_order(big.ends, 2);
  CHECK(f1.true_sigma != f2.true_sigma);
  V m1 = f1.observation.degrees, m2 = f2.observation.degrees;
  std::sort(m1.begin(), m1.end());
  std::sort(m2.begin(), m2.end());
  CHECK(m1 == m2);
}

TEST_CASE("binary cache round trip") {
  const auto tr = sample_predictive(BntlModel{0.7, Geometric{0.05}}, 20000, std::uint64_t{4});
  std::stringstream buf;
  write_cache(buf, tr.ends);
  CHECK(buf.str().substr(0, 5) == "BNTLZ");
  CHECK(read_cache(buf) == tr.ends);

  const auto path = scratch("ends.bntlz").string();
  write_cache_file(path, tr.ends);
  CHECK(is_cache_file(path));
  CHECK(read_cache_file(path) == tr.ends);

  std::string bytes = buf.str();
  bytes[0] = 'X';
  std::istringstream bad(bytes);
  CHECK_THROWS_AS(read_cache(bad), Error);
  std::istringstream truncated(buf.str().substr(0, 30));
  CHECK_THROWS_AS(read_cache(truncated), Error);

  std::stringstream text;
  write_ends_text(text, tr.ends);
  CHECK(read_ends_text(text) == tr.ends);
}

TEST_CASE("gzip and plain files parse identically") {
  const std::string text = "# snap\n5 6 3\n6 7 1\n5 7 2\n";
  const auto plain = scratch("edges.txt"), packed = scratch("edges.txt.gz");
  {
    std::ofstream(plain) << text;
    gzFile f = gzopen(packed.c_str(), "wb");
    REQUIRE(f != nullptr);
    gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
  }
  const auto a = parse_edge_list_file(plain.string());
  const auto b = parse_edge_list_file(packed.string());
  REQUIRE(a.edges.size() == 3);
  REQUIRE(b.edges.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.edges[i].src == b.edges[i].src);
    CHECK(a.edges[i].time == b.edges[i].time);
  }
  CHECK(a.edges[0].src == 6);
  CHECK_FALSE(is_cache_file(plain.string()));
  CHECK(file_digest(plain.string()) == file_digest(plain.string()));
  CHECK(file_digest(plain.string()) != file_digest(packed.string()));
  CHECK_THROWS_AS(parse_edge_list_file(scratch("missing.txt").string()), Error);
}

TEST_CASE("degree sum is twice the edge count") {
  std::ostringstream text;
  Rng rng(9);
  for (int i = 0; i < 3000; ++i) text << rng() % 400 << ' ' << rng() % 400 << ' ' << rng() % 50 << '\n';
  const auto list = parse(text.str());
  const auto seq = ends_from_edges(list.edges);
  const auto [d, t] = degrees_from_ends(seq.z);
  CHECK(d.total() == 6000);
}

TEST_CASE("held-out labels follow the hidden permutation") {
  const EdgeEndSequence z({1, 2, 1, 3, 2, 3});
  const auto g = forget_order(z, 11);
  const auto mapped = relabel_continuation(g, V{3, 1, 4, 5, 2});
  CHECK(mapped[0] == g.true_sigma[2]);
  CHECK(mapped[1] == g.true_sigma[0]);
  CHECK(mapped[2] == 4);
  CHECK(mapped[3] == 5);
  CHECK(mapped[4] == g.true_sigma[1]);
  CHECK_THROWS_AS(relabel_continuation(g, V{0}), Error);
}
