#include "bntl/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

namespace bntl {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == ','; }

std::string_view next_token(std::string_view& rest) {
  std::size_t i = 0;
  while (i < rest.size() && is_space(rest[i])) ++i;
  std::size_t j = i;
  while (j < rest.size() && !is_space(rest[j])) ++j;
  auto tok = rest.substr(i, j - i);
  rest.remove_prefix(j);
  return tok;
}

[[noreturn]] void bad_line(Count line, const std::string& why) {
  throw Error(ErrorCode::malformed_input,
              "line " + std::to_string(line) + ": " + why);
}

Count parse_label(std::string_view tok, Count line) {
  Count v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    bad_line(line, "vertex id '" + std::string(tok) + "' is not an integer");
  return v;
}

double parse_time(std::string_view tok, Count line) {
  std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v))
    bad_line(line, "timestamp '" + s + "' is not a number");
  return v;
}

struct EdgeHash {
  std::size_t operator()(const Edge& e) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(e.src) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(e.dst) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    std::uint64_t t;
    std::memcpy(&t, &e.time, sizeof t);
    h ^= t + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};
struct EdgeEq {
  bool operator()(const Edge& a, const Edge& b) const noexcept {
    return a.src == b.src && a.dst == b.dst && a.time == b.time;
  }
};

class EdgeListBuilder {
 public:
  explicit EdgeListBuilder(const ParseOptions& o) : opt_(o) {}

  void line(std::string_view text) {
    ++out_.lines;
    const Count no = out_.lines;
    std::string_view rest = text;
    const auto first = next_token(rest);
    if (first.empty()) return;
    if (first[0] == '#' || first[0] == '%') {
      ++out_.comments;
      return;
    }
    const auto second = next_token(rest);
    if (second.empty()) bad_line(no, "expected 'src dst [time]'");
    const auto third = next_token(rest);
    if (!next_token(rest).empty()) bad_line(no, "expected at most three fields");
    Edge e{parse_label(first, no), parse_label(second, no), 0.0};
    const bool has_time = !third.empty();
    if (has_time) e.time = parse_time(third, no);
    if (opt_.require_timestamp && !has_time) bad_line(no, "missing timestamp");
    if (seen_any_) {
      if (has_time != out_.timestamped)
        bad_line(no, "timestamp column present on some lines only");
    } else {
      out_.timestamped = has_time;
      seen_any_ = true;
    }
    if (e.src == e.dst) {
      ++out_.self_loops;
      if (opt_.drop_self_loops) return;
    }
    if (opt_.drop_duplicates) {
      if (!unique_.insert(e).second) {
        ++out_.duplicates;
        return;
      }
    }
    out_.edges.push_back(e);
  }

  EdgeList finish() {
    if (out_.timestamped)
      std::stable_sort(out_.edges.begin(), out_.edges.end(),
                       [](const Edge& a, const Edge& b) { return a.time < b.time; });
    unique_.clear();
    return std::move(out_);
  }

 private:
  ParseOptions opt_;
  EdgeList out_;
  bool seen_any_ = false;
  std::unordered_set<Edge, EdgeHash, EdgeEq> unique_;
};

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 4);
}
void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 8);
}
std::uint64_t get_uint(std::istream& in, int bytes) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), bytes))
    throw Error(ErrorCode::io, "truncated cache header");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

constexpr char kMagic[8] = {'B', 'N', 'T', 'L', 'Z', 0, 0, 0};
constexpr std::uint32_t kCacheVersion = 1;

}  // namespace

EdgeList parse_edge_list(std::istream& in, const ParseOptions& options) {
  EdgeListBuilder b(options);
  std::string line;
  while (std::getline(in, line)) b.line(line);
  if (in.bad()) throw Error(ErrorCode::io, "read error on edge list");
  return b.finish();
}

EdgeList parse_edge_list_file(const std::string& path, const ParseOptions& options) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw Error(ErrorCode::io, "cannot open " + path);
  gzbuffer(f, 1 << 18);
  EdgeListBuilder b(options);
  std::vector<char> buf(1 << 16);
  std::string pending;
  for (;;) {
    const int got = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (got < 0) {
      int err = 0;
      const std::string msg = gzerror(f, &err);
      gzclose(f);
      throw Error(ErrorCode::io, "read error on " + path + ": " + msg);
    }
    if (got == 0) break;
    std::string_view chunk(buf.data(), static_cast<std::size_t>(got));
    std::size_t start = 0;
    for (std::size_t nl; (nl = chunk.find('\n', start)) != std::string_view::npos;
         start = nl + 1) {
      if (pending.empty()) {
        b.line(chunk.substr(start, nl - start));
      } else {
        pending.append(chunk.substr(start, nl - start));
        b.line(pending);
        pending.clear();
      }
    }
    pending.append(chunk.substr(start));
  }
  gzclose(f);
  if (!pending.empty()) b.line(pending);
  return b.finish();
}

EndOrder parse_end_order(std::string_view name) {
  if (name == "src-first") return EndOrder::src_first;
  if (name == "random") return EndOrder::random;
  throw Error(ErrorCode::invalid_argument,
              "unknown end order '" + std::string(name) + "'");
}

LabeledSequence ends_from_edges(std::span<const Edge> edges, EndOrder order,
                                std::uint64_t seed) {
  if (edges.empty()) throw Error(ErrorCode::insufficient_data, "no edges");
  std::vector<Count> raw;
  raw.reserve(edges.size() * 2);
  Rng rng(seed);
  for (const auto& e : edges) {
    const bool flip = order == EndOrder::random && (rng() >> 63);
    raw.push_back(flip ? e.dst : e.src);
    raw.push_back(flip ? e.src : e.dst);
  }
  auto [z, labels] = canonical_relabel<Count>(raw);
  return {std::move(z), std::move(labels)};
}

TrainTest split_train_edges(const EdgeEndSequence& z, Count train_edges) {
  if (z.size() % 2 != 0)
    throw Error(ErrorCode::invalid_argument,
                "edge-end sequence has odd length; cannot split on edges");
  const Count edges = z.size() / 2;
  if (train_edges < 1 || train_edges >= edges)
    throw Error(ErrorCode::invalid_argument, "degenerate train/test split");
  const auto ends = z.ends();
  const auto cut = static_cast<std::size_t>(2 * train_edges);
  return {EdgeEndSequence({ends.begin(), ends.begin() + static_cast<long>(cut)}),
          {ends.begin() + static_cast<long>(cut), ends.end()}};
}

TrainTest split_train_test(const EdgeEndSequence& z, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(ErrorCode::invalid_argument, "split fraction must lie in (0,1)");
  const Count edges = z.size() / 2;
  const auto train = static_cast<Count>(std::floor(fraction * static_cast<double>(edges) + 1e-9));
  return split_train_edges(z, train);
}

ForgottenGraph forget_order(const EdgeEndSequence& z, std::uint64_t seed) {
  const auto [d, t] = degrees_from_ends(z);
  const auto k = static_cast<std::size_t>(d.size());
  std::vector<Count> ext(k);
  std::iota(ext.begin(), ext.end(), Count{1});
  Rng rng(seed);
  std::shuffle(ext.begin(), ext.end(), rng);
  ForgottenGraph g;
  g.observation.n = z.size();
  g.observation.degrees.assign(k, 0);
  for (std::size_t j = 0; j < k; ++j)
    g.observation.degrees[static_cast<std::size_t>(ext[j] - 1)] = d[j];
  g.true_sigma = std::move(ext);
  g.true_times.assign(t.times().begin(), t.times().end());
  return g;
}

std::vector<Count> relabel_continuation(const ForgottenGraph& g,
                                        std::span<const Count> test) {
  const auto k = static_cast<Count>(g.true_sigma.size());
  std::vector<Count> out(test.begin(), test.end());
  for (Count& v : out) {
    if (v < 1) throw Error(ErrorCode::malformed_input, "test labels start at 1");
    if (v <= k) v = g.true_sigma[static_cast<std::size_t>(v - 1)];
  }
  return out;
}

void write_cache(std::ostream& out, const EdgeEndSequence& z) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kCacheVersion);
  put_u64(out, static_cast<std::uint64_t>(z.size()));
  put_u64(out, static_cast<std::uint64_t>(z.vertex_count()));
  std::string buf;
  buf.reserve(1 << 16);
  Count prev = 0;
  for (Count v : z.ends()) {
    const Count delta = v - prev;
    prev = v;
    auto u = (static_cast<std::uint64_t>(delta) << 1) ^
             static_cast<std::uint64_t>(delta >> 63);
    do {
      unsigned char byte = u & 0x7F;
      u >>= 7;
      if (u) byte |= 0x80;
      buf.push_back(static_cast<char>(byte));
    } while (u);
    if (buf.size() >= (1 << 16) - 16) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::io, "failed to write cache");
}

EdgeEndSequence read_cache(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw Error(ErrorCode::io, "not a BNTLZ cache");
  if (get_uint(in, 4) != kCacheVersion)
    throw Error(ErrorCode::io, "unsupported cache version");
  const auto n = get_uint(in, 8);
  const auto k = get_uint(in, 8);
  std::vector<Count> ends;
  ends.reserve(n);
  std::istreambuf_iterator<char> it(in), end;
  Count prev = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t u = 0;
    for (int shift = 0;; shift += 7) {
      if (it == end || shift > 63) throw Error(ErrorCode::io, "truncated cache body");
      const auto byte = static_cast<unsigned char>(*it++);
      u |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
      if (!(byte & 0x80)) break;
    }
    const auto delta = static_cast<Count>((u >> 1) ^ (~(u & 1) + 1));
    prev += delta;
    ends.push_back(prev);
  }
  EdgeEndSequence z(std::move(ends));
  if (static_cast<std::uint64_t>(z.vertex_count()) != k)
    throw Error(ErrorCode::io, "cache header K does not match body");
  return z;
}

void write_cache_file(const std::string& path, const EdgeEndSequence& z) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  write_cache(out, z);
}

EdgeEndSequence read_cache_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return read_cache(in);
}

bool is_cache_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[8];
  return in.read(magic, 8) && std::memcmp(magic, kMagic, 8) == 0;
}

void write_ends_text(std::ostream& out, const EdgeEndSequence& z) {
  for (Count v : z.ends()) out << v << '\n';
}

EdgeEndSequence read_ends_text(std::istream& in) {
  std::vector<Count> ends;
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::getline(in, tok);
      continue;
    }
    Count v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw Error(ErrorCode::malformed_input, "bad edge end '" + tok + "'");
    ends.push_back(v);
  }
  return EdgeEndSequence(std::move(ends));
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  std::vector<char> buf(1 << 16);
  while (in.read(buf.data(), static_cast<std::streamsize>(buf.size())) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001b3ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace bntl
