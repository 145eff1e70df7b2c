#include "bntl/cli.hpp"

#include <boost/version.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "bntl/diagnostics.hpp"
#include "bntl/generate.hpp"
#include "bntl/gibbs.hpp"
#include "bntl/ingest.hpp"
#include "bntl/mle.hpp"

namespace bntl::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------- helpers

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

fs::path ensure_dir(const std::string& dir) {
  if (dir.empty()) throw Error(ErrorCode::invalid_argument, "output directory is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

json params_json(const InterarrivalModel& m, double alpha) {
  return std::visit(
      [&](const auto& a) -> json {
        using M = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<M, Geometric>) return {{"beta", a.beta}};
        else if constexpr (std::is_same_v<M, ShiftedPoisson>) return {{"lambda", a.lambda}};
        else if constexpr (std::is_same_v<M, PypInduced>) return {{"theta", a.theta}, {"tau", a.tau}};
        else return {{"theta", a.theta}, {"tau", alpha}};
      },
      m);
}

json model_json(const BntlModel& model) {
  return {{"family", std::string(to_string(family_of(model.arrivals)))},
          {"alpha", model.alpha},
          {"params", params_json(model.arrivals, model.alpha)}};
}

BntlModel model_from_json(const json& j) {
  const Family f = parse_family(j.at("family").get<std::string>());
  const double alpha = j.at("alpha").get<double>();
  const auto& p = j.at("params");
  switch (f) {
    case Family::geometric: return {alpha, Geometric{p.at("beta").get<double>()}};
    case Family::shifted_poisson: return {alpha, ShiftedPoisson{p.at("lambda").get<double>()}};
    case Family::pyp_induced:
      return {alpha, PypInduced{p.at("theta").get<double>(), p.at("tau").get<double>()}};
    case Family::coupled_pyp: return {alpha, CoupledPyp{p.at("theta").get<double>()}};
  }
  throw Error(ErrorCode::malformed_input, "unknown family in model record");
}

// Named parameters of the arrival law, in a fixed order per family.
std::vector<std::pair<std::string, double>> param_fields(const InterarrivalModel& m,
                                                         double alpha) {
  std::vector<std::pair<std::string, double>> out;
  const json j = params_json(m, alpha);
  for (const auto& [k, v] : j.items()) out.emplace_back(k, v.get<double>());
  return out;
}

// Flags as given (or defaulted) on a subcommand, for the manifest.
json flags_json(const CLI::App& sub) {
  json flags = json::object();
  for (const CLI::Option* o : sub.get_options()) {
    if (o->get_lnames().empty()) continue;
    const std::string name = o->get_lnames().front();
    if (name == "help") continue;
    const auto& r = o->results();
    if (r.empty()) {
      if (!o->get_default_str().empty()) flags[name] = o->get_default_str();
      continue;
    }
    if (r.size() == 1) flags[name] = r.front();
    else flags[name] = r;
  }
  return flags;
}

json manifest(const std::string& command, const CLI::App& sub, const std::vector<std::string>& inputs,
              const std::vector<std::string>& outputs) {
  json in = json::array();
  for (const auto& p : inputs) in.push_back({{"path", p}, {"fnv1a64", file_digest(p)}});
  return {{"program", "bntl"},
          {"version", kVersion},
          {"command", command},
          {"flags", flags_json(sub)},
          {"inputs", in},
          {"outputs", outputs},
          {"build",
           {{"compiler", __VERSION__}, {"cplusplus", __cplusplus}, {"boost", BOOST_LIB_VERSION}}}};
}

struct Input {
  EdgeEndSequence z;
  std::vector<Count> label_of;  // empty for cached input
  json counts;
};

struct InputOptions {
  std::string path;
  std::string end_order = "src-first";
  bool drop_self_loops = false;
  bool drop_duplicates = false;
  std::uint64_t seed = 1;
};

void add_input_options(CLI::App* sub, InputOptions& o) {
  sub->add_option("--in", o.path, "Edge list (plain or gzip, 'src dst [time]') or a .bntlz cache")
      ->required();
  sub->add_option("--end-order", o.end_order, "Order of an edge's two ends: src-first or random")
      ->capture_default_str();
  sub->add_flag("--drop-self-loops", o.drop_self_loops, "Discard edges (u, u)");
  sub->add_flag("--drop-duplicates", o.drop_duplicates, "Discard repeated (src, dst, time) lines");
}

Input load_input(const InputOptions& o) {
  if (is_cache_file(o.path)) {
    Input in{read_cache_file(o.path), {}, {}};
    in.counts = {{"ends", in.z.size()}, {"edges", in.z.size() / 2}, {"vertices", in.z.vertex_count()}};
    return in;
  }
  const auto list = parse_edge_list_file(o.path, ParseOptions{false, o.drop_self_loops, o.drop_duplicates});
  if (list.edges.empty()) throw Error(ErrorCode::insufficient_data, "no edges in " + o.path);
  auto seq = ends_from_edges(list.edges, parse_end_order(o.end_order), o.seed);
  Input in{std::move(seq.z), std::move(seq.label_of), {}};
  in.counts = {{"lines", list.lines},           {"comments", list.comments},
               {"timestamped", list.timestamped}, {"self_loops", list.self_loops},
               {"duplicates_dropped", list.duplicates}, {"edges", list.edges.size()},
               {"ends", in.z.size()},           {"vertices", in.z.vertex_count()}};
  return in;
}

std::pair<std::vector<Count>, std::vector<Count>> stats(const EdgeEndSequence& z) {
  const auto [d, t] = degrees_from_ends(z);
  return {{d.degrees().begin(), d.degrees().end()}, {t.times().begin(), t.times().end()}};
}

std::vector<Family> parse_families(const std::string& list) {
  std::vector<Family> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "all") {
      out = {Family::coupled_pyp, Family::pyp_induced, Family::geometric, Family::shifted_poisson};
      continue;
    }
    const Family f = parse_family(item);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  if (out.empty()) throw Error(ErrorCode::invalid_argument, "no families given");
  return out;
}

// --------------------------------------------------------------- generate

struct GenerateArgs {
  std::string model;
  double alpha = 0.0;
  double beta = 0.25;
  double lambda = 1.0;
  double theta = 1.0;
  double tau = 0.5;
  Count edges = 1000;
  std::string sampler = "predictive";
  std::uint64_t seed = 1;
  std::string out_dir;
  bool cache = false;
};

void setup_generate(CLI::App* sub, GenerateArgs& a) {
  sub->add_option("--model", a.model, "Arrival family: geometric, poisson, pyp or coupled-pyp")->required();
  sub->add_option("--alpha", a.alpha, "Discount (tau of the coupled model)")->capture_default_str();
  sub->add_option("--beta", a.beta, "Geometric arrival probability")->capture_default_str();
  sub->add_option("--lambda", a.lambda, "Shifted Poisson rate")->capture_default_str();
  sub->add_option("--theta", a.theta, "PYP concentration")->capture_default_str();
  sub->add_option("--tau", a.tau, "Discount of uncoupled PYP arrivals")->capture_default_str();
  sub->add_option("--edges", a.edges, "Number of edges (2x ends)")->capture_default_str();
  sub->add_option("--sampler", a.sampler, "predictive or stick")->capture_default_str();
  sub->add_option("--seed", a.seed, "RNG seed")->capture_default_str();
  sub->add_option("--out-dir", a.out_dir, "Output directory")->required();
  sub->add_flag("--cache", a.cache, "Also write ends.bntlz");
}

BntlModel generator_model(const GenerateArgs& a) {
  switch (parse_family(a.model)) {
    case Family::geometric: return {a.alpha, Geometric{a.beta}};
    case Family::shifted_poisson: return {a.alpha, ShiftedPoisson{a.lambda}};
    case Family::pyp_induced: return {a.alpha, PypInduced{a.theta, a.tau}};
    case Family::coupled_pyp: return {a.alpha, CoupledPyp{a.theta}};
  }
  throw Error(ErrorCode::invalid_argument, "unknown model");
}

int run_generate(const GenerateArgs& a, const CLI::App& sub) {
  if (a.edges < 1) throw Error(ErrorCode::invalid_argument, "--edges must be positive");
  const BntlModel model = generator_model(a);
  validate(model);
  const Count n = 2 * a.edges;
  GeneratedTrace tr = a.sampler == "stick"        ? sample_stick(model, n, a.seed)
                      : a.sampler == "predictive" ? sample_predictive(model, n, a.seed)
                      : throw Error(ErrorCode::invalid_argument, "unknown sampler '" + a.sampler + "'");
  const fs::path dir = ensure_dir(a.out_dir);

  std::string edges;
  edges.reserve(static_cast<std::size_t>(n) * 8);
  const auto ends = tr.ends.ends();
  for (std::size_t i = 0; i + 1 < ends.size(); i += 2)
    edges += std::to_string(ends[i]) + ' ' + std::to_string(ends[i + 1]) + '\n';
  write_file(dir / "edges.txt", edges);

  json truth = {{"model", model_json(model)},
                {"sampler", a.sampler},
                {"seed", a.seed},
                {"edges", a.edges},
                {"n", n},
                {"K", tr.arrivals.size()},
                {"times", std::vector<Count>(tr.arrivals.times().begin(), tr.arrivals.times().end())}};
  if (tr.psi) truth["psi"] = std::vector<double>(tr.psi->values().begin(), tr.psi->values().end());
  write_json(dir / "truth.json", truth);

  std::vector<std::string> outputs{"edges.txt", "truth.json"};
  if (a.cache) {
    write_cache_file((dir / "ends.bntlz").string(), tr.ends);
    outputs.push_back("ends.bntlz");
  }
  outputs.push_back("manifest.json");
  write_json(dir / "manifest.json", manifest("generate", sub, {}, outputs));
  return ok;
}

// -------------------------------------------------------------------- mle

struct MleArgs {
  InputOptions input;
  std::string families = "coupled-pyp,pyp,geometric";
  double split = 0.0;
  bool map = false;
  std::vector<double> alpha_prior;
  std::vector<double> beta_prior{1.0, 1.0};
  std::vector<double> lambda_prior{1.0, 0.0};
  std::vector<double> tau_prior{1.0, 1.0};
  std::string out;
  std::string write_cache;
};

void setup_mle(CLI::App* sub, MleArgs& a) {
  add_input_options(sub, a.input);
  sub->add_option("--seed", a.input.seed, "Seed for --end-order random")->capture_default_str();
  sub->add_option("--family", a.families, "Comma-separated families, or 'all'")->capture_default_str();
  sub->add_option("--split", a.split, "Training fraction of edges for the predictive check (0 = none)")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_flag("--map", a.map, "MAP instead of maximum likelihood");
  sub->add_option("--alpha-prior", a.alpha_prior, "Normal prior on alpha: MEAN SD")->expected(2);
  sub->add_option("--beta-prior", a.beta_prior, "Beta prior on beta: A B")->expected(2)->capture_default_str();
  sub->add_option("--lambda-prior", a.lambda_prior, "Gamma prior on lambda: SHAPE RATE")
      ->expected(2)
      ->capture_default_str();
  sub->add_option("--tau-prior", a.tau_prior, "Beta prior on tau: A B")->expected(2)->capture_default_str();
  sub->add_option("--out", a.out, "JSON output path (default stdout)");
  sub->add_option("--write-cache", a.write_cache, "Write the edge-end sequence as a .bntlz cache");
}

struct Fitter {
  const MleArgs& args;
  MapPriors priors;

  FittedModel operator()(const EdgeEndSequence& z, Family f,
                         std::optional<AlphaFit>& alpha_fit) const {
    const auto [d, t] = stats(z);
    const auto hist = DegreeHistogram::from_degrees(d);
    if (args.map) return fit_map(hist, t, f, priors);
    if (f != Family::coupled_pyp && !alpha_fit) alpha_fit = fit_alpha(hist, t);
    return fit_model(hist, t, f, FitOptions{}, f == Family::coupled_pyp ? std::nullopt : alpha_fit);
  }
};

json fit_json(const FittedModel& fit) {
  json j = model_json(fit.model);
  j["log_likelihood"] = fit.log_likelihood;
  if (family_of(fit.model.arrivals) != Family::coupled_pyp) {
    j["alpha_log_likelihood"] = fit.alpha_log_likelihood;
    j["arrival_log_likelihood"] = fit.arrival_log_likelihood;
  }
  j["alpha_at_boundary"] = fit.alpha_at_boundary;
  j["arrivals_at_boundary"] = fit.arrivals_at_boundary;
  if (!fit.note.empty()) j["note"] = fit.note;
  const auto eta = eta_plugin(fit.model);
  j["eta"] = eta.value ? json(*eta.value) : json(nullptr);
  if (!eta.note.empty()) j["eta_note"] = eta.note;
  j["seconds"] = fit.seconds;
  return j;
}

int run_mle(const MleArgs& a, const CLI::App& sub) {
  Fitter fitter{a, {}};
  fitter.priors.beta_a = a.beta_prior[0];
  fitter.priors.beta_b = a.beta_prior[1];
  fitter.priors.lambda_shape = a.lambda_prior[0];
  fitter.priors.lambda_rate = a.lambda_prior[1];
  fitter.priors.tau_a = a.tau_prior[0];
  fitter.priors.tau_b = a.tau_prior[1];
  if (!a.alpha_prior.empty()) fitter.priors.alpha = AlphaPrior{a.alpha_prior[0], a.alpha_prior[1]};
  if (a.map) fitter.priors.validate();
  const auto families = parse_families(a.families);

  const auto start = std::chrono::steady_clock::now();
  const Input in = load_input(a.input);
  if (!a.write_cache.empty()) write_cache_file(a.write_cache, in.z);
  const double load_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json out = {{"input", {{"path", a.input.path}, {"fnv1a64", file_digest(a.input.path)}, {"counts", in.counts}}},
              {"estimator", a.map ? "map" : "mle"},
              {"load_seconds", load_seconds}};
  json fits = json::array();
  std::optional<AlphaFit> full_alpha, train_alpha;
  std::optional<TrainTest> split;
  if (a.split > 0.0) split = split_train_test(in.z, a.split);
  for (Family f : families) {
    json j = fit_json(fitter(in.z, f, full_alpha));
    if (split) {
      const auto train_fit = fitter(split->train, f, train_alpha);
      const auto t0 = std::chrono::steady_clock::now();
      const double pll = predictive_loglik(train_fit.model, split->train, split->test);
      j["predictive"] = {
          {"train_fraction", a.split},
          {"train_edges", split->train.size() / 2},
          {"test_edges", static_cast<Count>(split->test.size()) / 2},
          {"train_fit", model_json(train_fit.model)},
          {"log_likelihood", pll},
          {"seconds", train_fit.seconds +
                          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    }
    fits.push_back(std::move(j));
  }
  out["fits"] = std::move(fits);
  out["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::vector<std::string> inputs{a.input.path};
  if (a.out.empty()) {
    std::cout << out.dump(2) << '\n';
  } else {
    write_json(a.out, out);
    std::vector<std::string> outputs{a.out};
    if (!a.write_cache.empty()) outputs.push_back(a.write_cache);
    write_json(a.out + ".manifest.json", manifest("mle", sub, inputs, outputs));
  }
  return ok;
}

// ------------------------------------------------------------------ gibbs

struct GibbsArgs {
  InputOptions input;
  std::string family = "coupled-pyp";
  Count iterations = 125000;
  Count burn_in = 25000;
  Count thin = 100;
  Count swaps = 0;
  bool packed_init = false;
  unsigned chains = 1;
  Count train_edges = 0;
  double alpha_lo = -100.0;
  double alpha_hi = 1.0;
  std::string truth;
  std::string resume;
  std::string out_dir;
};

void setup_gibbs(CLI::App* sub, GibbsArgs& a) {
  add_input_options(sub, a.input);
  sub->add_option("--family", a.family, "Inference family")->capture_default_str();
  sub->add_option("--iters", a.iterations, "Total iterations")->capture_default_str();
  sub->add_option("--burnin", a.burn_in, "Burn-in iterations")->capture_default_str();
  sub->add_option("--thin", a.thin, "Keep every thin-th post-burn-in iteration")->capture_default_str();
  sub->add_flag("--packed-init", a.packed_init, "Start from T_j = j instead of evenly spread arrival times");
  sub->add_option("--swaps", a.swaps, "Permutation proposals per iteration (0 = K)")->capture_default_str();
  sub->add_option("--seed", a.input.seed, "Base seed; chain c uses a derived stream")->capture_default_str();
  sub->add_option("--chains", a.chains, "Independent chains run in parallel")
      ->check(CLI::Range(1u, 256u))
      ->capture_default_str();
  sub->add_option("--train-edges", a.train_edges,
                  "Edges used for inference; the rest are held out (0 = all)")
      ->capture_default_str();
  sub->add_option("--alpha-lo", a.alpha_lo, "Lower end of the uniform alpha prior")->capture_default_str();
  sub->add_option("--alpha-hi", a.alpha_hi, "Upper end of the uniform alpha prior")->capture_default_str();
  sub->add_option("--truth", a.truth, "truth.json from generate, for error metrics");
  sub->add_option("--resume", a.resume, "Directory with checkpoint_c<i>.txt from an earlier run");
  sub->add_option("--out-dir", a.out_dir, "Output directory")->required();
}

struct ChainResult {
  ChainArchive archive;
  std::vector<double> log_l1;
  std::exception_ptr error;
};

json mean_sd(const std::vector<double>& x) {
  double m = 0.0, v = 0.0;
  for (double u : x) m += u / static_cast<double>(x.size());
  for (double u : x) v += (u - m) * (u - m);
  const double sd = x.size() > 1 ? std::sqrt(v / static_cast<double>(x.size() - 1)) : 0.0;
  return {{"mean", m}, {"sd", sd}};
}

json ess_json(const std::vector<double>& trace) {
  if (trace.size() < 10) return nullptr;
  const auto e = ess_factor(trace);
  return {{"factor", e.factor}, {"degenerate", e.degenerate}, {"lags", e.lags}};
}

int run_gibbs(const GibbsArgs& a, const CLI::App& sub) {
  const Family family = parse_family(a.family);
  ChainConfig base;
  base.iterations = a.iterations;
  base.burn_in = a.burn_in;
  base.thin = a.thin;
  base.swaps_per_iteration = a.swaps;
  base.spread_initial_times = !a.packed_init;
  base.alpha_lo = a.alpha_lo;
  base.alpha_hi = a.alpha_hi;
  base.validate();

  const Input in = load_input(a.input);
  EdgeEndSequence train = in.z;
  std::vector<Count> test;
  if (a.train_edges > 0 && 2 * a.train_edges < in.z.size()) {
    auto s = split_train_edges(in.z, a.train_edges);
    train = std::move(s.train);
    test = std::move(s.test);
  }
  const ForgottenGraph graph = forget_order(train, a.input.seed);
  const auto [ref_degrees, ref_times] = stats(train);
  const auto test_ids = relabel_continuation(graph, test);
  const fs::path dir = ensure_dir(a.out_dir);

  std::vector<ChainResult> results(a.chains);
  std::vector<std::thread> workers;
  const auto start = std::chrono::steady_clock::now();
  for (unsigned c = 0; c < a.chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        ChainConfig config = base;
        config.seed = chain_seed(a.input.seed, c);
        GibbsChain chain(graph.observation, family, config);
        const fs::path ckpt = dir / ("checkpoint_c" + std::to_string(c) + ".txt");
        if (!a.resume.empty()) {
          std::ifstream rin(fs::path(a.resume) / ckpt.filename());
          if (!rin) throw Error(ErrorCode::io, "missing checkpoint for chain " + std::to_string(c));
          chain.load_checkpoint(rin);
        }
        chain.run();
        std::ostringstream cout_;
        chain.save_checkpoint(cout_);
        write_file(ckpt, cout_.str());
        auto& r = results[c];
        r.archive = chain.archive();
        for (const auto& s : r.archive.samples) {
          std::vector<Count> d(s.sigma.size());
          for (std::size_t j = 0; j < d.size(); ++j)
            d[j] = graph.observation.degrees[static_cast<std::size_t>(s.sigma[j] - 1)];
          r.log_l1.push_back(log_l1_distance(d, ref_degrees, train.size()));
        }
      } catch (...) {
        results[c].error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& r : results)
    if (r.error) std::rethrow_exception(r.error);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::optional<BntlModel> truth;
  if (!a.truth.empty()) {
    std::ifstream tin(a.truth);
    if (!tin) throw Error(ErrorCode::io, "cannot read " + a.truth);
    truth = model_from_json(json::parse(tin).at("model"));
  }

  std::vector<std::string> outputs;
  json chains = json::array();
  ChainArchive pooled;
  pooled.family = family;
  std::vector<double> all_alpha;
  std::map<std::string, std::vector<double>> all_params;
  for (unsigned c = 0; c < a.chains; ++c) {
    const auto& r = results[c];
    const std::string tag = "_c" + std::to_string(c);
    std::ostringstream csv, orders;
    csv.precision(17);
    csv << "iteration,alpha";
    const auto& samples = r.archive.samples;
    std::vector<std::string> names;
    if (!samples.empty())
      for (const auto& [k, v] : param_fields(samples.front().arrivals, samples.front().alpha)) names.push_back(k);
    for (const auto& k : names) csv << ',' << k;
    csv << ",log_joint,s_statistic,log_l1\n";
    std::vector<double> alpha, s_stat;
    std::map<std::string, std::vector<double>> params;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      csv << s.iteration << ',' << s.alpha;
      for (const auto& [k, v] : param_fields(s.arrivals, s.alpha)) {
        csv << ',' << v;
        params[k].push_back(v);
        all_params[k].push_back(v);
      }
      csv << ',' << s.log_joint << ',' << s.s_statistic << ',' << r.log_l1[i] << '\n';
      orders << s.iteration << " T " << run_length(s.times) << " | sigma " << run_length(s.sigma) << '\n';
      alpha.push_back(s.alpha);
      all_alpha.push_back(s.alpha);
      s_stat.push_back(s.s_statistic);
      pooled.samples.push_back(s);
    }
    write_file(dir / ("samples" + tag + ".csv"), csv.str());
    write_file(dir / ("orders" + tag + ".txt"), orders.str());
    outputs.push_back("samples" + tag + ".csv");
    outputs.push_back("orders" + tag + ".txt");
    outputs.push_back("checkpoint" + tag + ".txt");

    json cj = {{"chain", c},
               {"seed", chain_seed(a.input.seed, c)},
               {"samples", samples.size()},
               {"seconds", r.archive.seconds},
               {"alpha", mean_sd(alpha)},
               {"s_statistic", mean_sd(s_stat)},
               {"ess_log_l1", ess_json(r.log_l1)},
               {"ess_alpha", ess_json(alpha)}};
    for (const auto& [k, v] : params) cj[k] = mean_sd(v);
    chains.push_back(std::move(cj));
  }

  json summary = {{"family", std::string(to_string(family))},
                  {"input", {{"path", a.input.path}, {"counts", in.counts}}},
                  {"train_ends", train.size()},
                  {"test_ends", test.size()},
                  {"vertices", graph.observation.degrees.size()},
                  {"iterations", a.iterations},
                  {"burn_in", a.burn_in},
                  {"thin", a.thin},
                  {"chains", chains},
                  {"seconds", seconds}};
  json post = {{"alpha", mean_sd(all_alpha)}};
  for (const auto& [k, v] : all_params) post[k] = mean_sd(v);
  summary["posterior"] = post;
  if (!test.empty() && !pooled.samples.empty()) {
    summary["predictive"] = {
        {"posterior_mean_exp", predictive_loglik(pooled, graph.observation.degrees, test_ids)},
        {"plugin", predictive_loglik_plugin(pooled, graph.observation.degrees, test_ids)}};
  }
  if (truth) {
    json err = {{"truth", model_json(*truth)},
                {"alpha_abs_error", std::abs(post["alpha"]["mean"].get<double>() - truth->alpha)}};
    if (family_of(truth->arrivals) == family)
      for (const auto& [k, v] : param_fields(truth->arrivals, truth->alpha))
        if (post.contains(k)) err[k + "_abs_error"] = std::abs(post[k]["mean"].get<double>() - v);
    summary["errors"] = err;
  }
  write_json(dir / "summary.json", summary);
  outputs.push_back("summary.json");
  outputs.push_back("manifest.json");
  std::vector<std::string> inputs{a.input.path};
  if (!a.truth.empty()) inputs.push_back(a.truth);
  write_json(dir / "manifest.json", manifest("gibbs", sub, inputs, outputs));
  return ok;
}

// -------------------------------------------------------------- summarize

struct SummarizeArgs {
  InputOptions input;
  std::string plots_dir;
};

void setup_summarize(CLI::App* sub, SummarizeArgs& a) {
  add_input_options(sub, a.input);
  sub->add_option("--seed", a.input.seed, "Seed for --end-order random")->capture_default_str();
  sub->add_option("--plots-dir", a.plots_dir, "Directory for the CSV tables")->required();
}

int run_summarize(const SummarizeArgs& a, const CLI::App& sub) {
  const Input in = load_input(a.input);
  const auto [d, t] = stats(in.z);
  const fs::path dir = ensure_dir(a.plots_dir);

  std::ostringstream hist;
  hist << "degree,count\n";
  for (const auto& [deg, m] : degree_histogram(d).counts) hist << deg << ',' << m << '\n';
  write_file(dir / "degree_histogram.csv", hist.str());

  std::ostringstream curve;
  curve << "step,vertices\n";
  for (const auto& [step, k] : arrival_curve(t)) curve << step << ',' << k << '\n';
  write_file(dir / "arrival_curve.csv", curve.str());

  json counts = in.counts;
  counts["arrival_curve_end"] = {in.z.size(), in.z.vertex_count()};
  if (t.size() >= 2) counts["mean_interarrival"] = mean_interarrival(t);
  counts["max_degree"] = *std::max_element(d.begin(), d.end());
  write_json(dir / "counts.json", counts);
  write_json(dir / "manifest.json",
             manifest("summarize", sub, {a.input.path},
                      {"degree_histogram.csv", "arrival_curve.csv", "counts.json", "manifest.json"}));
  std::cout << counts.dump() << '\n';
  return ok;
}

void report(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::domain: return usage;
    case ErrorCode::infeasible:
    case ErrorCode::malformed_input:
    case ErrorCode::insufficient_data:
    case ErrorCode::unidentifiable:
    case ErrorCode::io: return data;
    case ErrorCode::invariant_violation:
    case ErrorCode::numeric: return numeric;
  }
  return numeric;
}

std::uint64_t chain_seed(std::uint64_t seed, unsigned index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::string run_length(const std::vector<Count>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i + 1;
    while (j < values.size() && values[j] == values[j - 1] + 1) ++j;
    if (!out.empty()) out += ' ';
    out += std::to_string(values[i]) + '+' + std::to_string(j - i);
    i = j;
  }
  return out;
}

std::vector<Count> parse_run_length(const std::string& text) {
  std::vector<Count> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    const auto plus = tok.find('+');
    if (plus == std::string::npos) throw Error(ErrorCode::malformed_input, "bad run '" + tok + "'");
    const Count start = std::stoll(tok.substr(0, plus));
    const Count len = std::stoll(tok.substr(plus + 1));
    if (len < 1) throw Error(ErrorCode::malformed_input, "bad run '" + tok + "'");
    for (Count i = 0; i < len; ++i) out.push_back(start + i);
  }
  return out;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Beta neutral-to-the-left random graph models", "bntl"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML file mirroring the flags ([generate], [mle], ... sections); flags win");
  app.require_subcommand(1, 1);

  GenerateArgs gen;
  MleArgs mle;
  GibbsArgs gibbs;
  SummarizeArgs summ;
  auto* gen_cmd = app.add_subcommand("generate", "Sample a synthetic edge-end sequence");
  auto* mle_cmd = app.add_subcommand("mle", "Maximum-likelihood or MAP fits of one or more families");
  auto* gibbs_cmd = app.add_subcommand("gibbs", "Posterior sampling with the arrival order unknown");
  auto* summ_cmd = app.add_subcommand("summarize", "Counts, degree histogram and arrival curve");
  setup_generate(gen_cmd, gen);
  setup_mle(mle_cmd, mle);
  setup_gibbs(gibbs_cmd, gibbs);
  setup_summarize(summ_cmd, summ);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("usage", e.what(), usage);
    return usage;
  }

  try {
    if (gen_cmd->parsed()) return run_generate(gen, *gen_cmd);
    if (mle_cmd->parsed()) return run_mle(mle, *mle_cmd);
    if (gibbs_cmd->parsed()) return run_gibbs(gibbs, *gibbs_cmd);
    if (summ_cmd->parsed()) return run_summarize(summ, *summ_cmd);
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    report(std::string(to_string(e.code())), e.what(), code);
    return code;
  } catch (const nlohmann::json::exception& e) {
    report("malformed_input", e.what(), data);
    return data;
  } catch (const std::exception& e) {
    report("internal", e.what(), numeric);
    return numeric;
  }
  return usage;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"bntl"};
  for (const auto& s : args) argv.push_back(s.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace bntl::cli
