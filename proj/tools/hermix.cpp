// hermix command-line tool. Every command writes its outputs atomically and a
// `<out>.manifest.json` describing inputs, arguments and output digests.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hermix/hermix.hpp"

namespace {

using namespace hermix;

struct Globals {
  std::uint64_t seed = 1;
  unsigned precision_bits = 0;
  bool quiet = false;
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::SchemaViolation:
    case ErrorCode::OverlappingIntervals:
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::Io:
      return 1;
    case ErrorCode::NoValidPartition:
      return 3;
    case ErrorCode::SingularMatrix:
      return 4;
    default:
      return 5;
  }
}

std::vector<double> parse_list(const std::string& text, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') fail(ErrorCode::InvalidArgument, "cannot parse number \"" + item + "\"");
    out.push_back(v);
  }
  return out;
}

/// "lo1,hi1;lo2,hi2"
std::pair<Interval, Interval> parse_intervals(const std::string& text) {
  const auto semi = text.find(';');
  if (semi == std::string::npos) fail(ErrorCode::InvalidArgument, "intervals must look like lo1,hi1;lo2,hi2");
  const auto a = parse_list(text.substr(0, semi));
  const auto b = parse_list(text.substr(semi + 1));
  if (a.size() != 2 || b.size() != 2) fail(ErrorCode::InvalidArgument, "each interval needs two numbers");
  return {{a[0], a[1]}, {b[0], b[1]}};
}

class Run {
 public:
  Run(std::string command, const Globals& g) {
    m_.command = std::move(command);
    m_.seed = g.seed;
    m_.tool_version = kVersion;
    if (g.precision_bits) arg("precision_bits", std::to_string(g.precision_bits));
  }

  void arg(const std::string& k, const std::string& v) { m_.args.emplace_back(k, v); }

  std::string input(const std::string& path) {
    std::string text = read_file(path);
    m_.input_digests.emplace_back(path, sha256_hex(text));
    return text;
  }

  void output(const std::string& path, const std::string& content) {
    write_file_atomic(path, content);
    m_.output_digests.emplace_back(path, sha256_hex(content));
  }

  Json& extra() { return m_.extra; }

  void finish(const std::string& out_path) { write_file_atomic(out_path + ".manifest.json", m_.to_json()); }

 private:
  RunManifest m_;
};

void say(const Globals& g, const std::string& s) {
  if (!g.quiet) std::cerr << s << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-component interval-Gaussian mixtures: sampling, component estimation, lower-bound instances"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--precision-bits", g.precision_bits, "working precision in bits (0 = policy default)");
  app.add_flag("--quiet", g.quiet, "suppress progress messages");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "draw samples from a model");
  std::string model_path, out_path;
  std::size_t n = 0;
  sample_cmd->add_option("--model", model_path)->required();
  sample_cmd->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--out", out_path)->required();

  // estimate
  auto* est_cmd = app.add_subcommand("estimate", "estimate both components from samples");
  std::string samples_path, intervals_text = "auto", mode = "empirical";
  unsigned ell = 0;
  double epsilon = 0.0, bandwidth = -1.0, ell_c = 2.0;
  IntervalSearchConfig search;
  est_cmd->add_option("--samples", samples_path)->required();
  est_cmd->add_option("--intervals", intervals_text, "lo1,hi1;lo2,hi2 or auto")->capture_default_str();
  auto* ell_opt = est_cmd->add_option("--ell", ell);
  auto* eps_opt = est_cmd->add_option("--epsilon", epsilon);
  ell_opt->excludes(eps_opt);
  est_cmd->add_option("--ell-constant", ell_c, "c in l = max(2, ceil(c ln(1/epsilon)))");
  est_cmd->add_option("--mode", mode)->check(CLI::IsMember({"empirical", "kde"}))->capture_default_str();
  est_cmd->add_option("--bandwidth", bandwidth, "KDE bandwidth (default Silverman)");
  est_cmd->add_option("--w-min", search.w_min)->capture_default_str();
  est_cmd->add_option("--s-min", search.s_min)->capture_default_str();
  est_cmd->add_option("--out", out_path)->required();

  // find-intervals
  auto* fi_cmd = app.add_subcommand("find-intervals", "locate the two support intervals");
  fi_cmd->add_option("--samples", samples_path)->required();
  fi_cmd->add_option("--w-min", search.w_min)->capture_default_str();
  fi_cmd->add_option("--s-min", search.s_min)->capture_default_str();
  fi_cmd->add_option("--r-hint", search.r_hint);
  fi_cmd->add_option("--out", out_path)->required();

  // hard-instance
  auto* hi_cmd = app.add_subcommand("hard-instance", "build the mixture pair for a grid spacing");
  double delta = 0.0;
  hi_cmd->add_option("--delta", delta)->required();
  hi_cmd->add_option("--out", out_path)->required();

  // rates
  auto* rates_cmd = app.add_subcommand("rates", "tabulate decay rates over grid spacings");
  std::string deltas_text;
  rates_cmd->add_option("--deltas", deltas_text)->required();
  rates_cmd->add_option("--out", out_path)->required();

  // distinguish
  auto* dist_cmd = app.add_subcommand("distinguish", "likelihood-ratio test between the hard pair");
  std::size_t trials = 0;
  dist_cmd->add_option("--delta", delta)->required();
  dist_cmd->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  dist_cmd->add_option("--trials", trials)->required()->check(CLI::PositiveNumber);
  dist_cmd->add_option("--out", out_path);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "L1 error of an estimate against the true model");
  std::string truth_path, estimate_path;
  eval_cmd->add_option("--truth", truth_path)->required();
  eval_cmd->add_option("--estimate", estimate_path)->required();
  eval_cmd->add_option("--out", out_path);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sample_cmd) {
      Run run("sample", g);
      run.arg("model", model_path);
      run.arg("n", std::to_string(n));
      const TwoComponentMixture model = parse_model(run.input(model_path));
      const SampleSet s = sample(model, n, g.seed);
      run.output(out_path, samples_to_csv(s.values));
      run.extra()["model_digest"] = s.model_digest;
      run.finish(out_path);
      say(g, "wrote " + std::to_string(n) + " samples to " + out_path);
    } else if (*est_cmd) {
      Run run("estimate", g);
      run.arg("samples", samples_path);
      run.arg("intervals", intervals_text);
      run.arg("mode", mode);
      const std::vector<double> xs = parse_samples_csv(run.input(samples_path));
      EstimateOptions opt;
      if (*eps_opt) {
        opt.ell = choose_ell(epsilon, ell_c);
        run.arg("epsilon", format_double(epsilon));
        run.arg("ell_constant", format_double(ell_c));
      } else {
        opt.ell = ell ? ell : 4;
      }
      run.arg("ell", std::to_string(opt.ell));
      opt.mode = mode == "kde" ? ProjectionMode::Kde : ProjectionMode::Empirical;
      opt.bandwidth = bandwidth;
      if (bandwidth >= 0.0) run.arg("bandwidth", format_double(bandwidth));
      opt.precision_bits = g.precision_bits;
      Interval a, b;
      Json found;
      if (intervals_text == "auto") {
        run.arg("w_min", format_double(search.w_min));
        run.arg("s_min", format_double(search.s_min));
        const IntervalPair p = find_intervals(xs, search);
        a = p.i1;
        b = p.i2;
        found = intervals_to_json(p);
      } else {
        std::tie(a, b) = parse_intervals(intervals_text);
      }
      const ComponentEstimate est = estimate(xs, a, b, opt);
      Json j = estimate_to_json(est);
      const auto [l, r] = ordered_intervals(a, b);
      j["intervals"] = {{l.lo, l.hi}, {r.lo, r.hi}};
      if (!found.is_null()) j["interval_search"] = found;
      run.output(out_path, dump(j));
      run.finish(out_path);
      say(g, "w_hat = (" + format_double(est.w_hat[0]) + ", " + format_double(est.w_hat[1]) + ")");
    } else if (*fi_cmd) {
      Run run("find-intervals", g);
      run.arg("samples", samples_path);
      run.arg("w_min", format_double(search.w_min));
      run.arg("s_min", format_double(search.s_min));
      if (search.r_hint > 0) run.arg("r_hint", format_double(search.r_hint));
      const std::vector<double> xs = parse_samples_csv(run.input(samples_path));
      const IntervalPair p = find_intervals(xs, search);
      run.output(out_path, dump(intervals_to_json(p)));
      run.finish(out_path);
    } else if (*hi_cmd) {
      Run run("hard-instance", g);
      run.arg("delta", format_double(delta));
      const HardInstance h = build_hard_instance(delta, g.precision_bits);
      run.output(out_path, hard_instance_to_json(h));
      run.finish(out_path);
    } else if (*rates_cmd) {
      Run run("rates", g);
      run.arg("deltas", deltas_text);
      const std::vector<RateRow> rows = rate_table(parse_list(deltas_text), g.precision_bits);
      run.output(out_path, rates_to_csv(rows));
      Json bounds = Json::array();
      for (const auto& r : rows) bounds.push_back(r.l1_rounding_bound);
      run.extra()["l1_rounding_bound"] = bounds;
      run.finish(out_path);
    } else if (*dist_cmd) {
      Run run("distinguish", g);
      run.arg("delta", format_double(delta));
      run.arg("n", std::to_string(n));
      run.arg("trials", std::to_string(trials));
      const double rate = distinguish_demo(delta, n, trials, g.seed, g.precision_bits);
      Json j;
      j["delta"] = delta;
      j["n"] = n;
      j["trials"] = trials;
      j["success_rate"] = rate;
      std::cout << format_double(rate) << "\n";
      if (!out_path.empty()) {
        run.output(out_path, dump(j));
        run.finish(out_path);
      }
    } else if (*eval_cmd) {
      Run run("eval", g);
      const TwoComponentMixture truth = parse_model(run.input(truth_path));
      Json ej;
      try {
        ej = Json::parse(run.input(estimate_path));
      } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::SchemaViolation, std::string("estimate is not valid JSON: ") + e.what());
      }
      const ComponentEstimate est = estimate_from_json(ej);
      const auto comps = ordered_components(truth);
      double err[2][2];
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) err[i][k] = distance(est.view(i), view(*comps[k].first), Norm::L1);
      const double direct = std::max(err[0][0], err[1][1]);
      const double swapped = std::max(err[0][1], err[1][0]);
      Json j;
      j["direct"] = {err[0][0], err[1][1]};
      j["swapped"] = {err[0][1], err[1][0]};
      j["best"] = direct <= swapped ? j["direct"] : j["swapped"];
      j["best_ordering"] = direct <= swapped ? "direct" : "swapped";
      std::cout << format_double(direct <= swapped ? err[0][0] : err[0][1]) << " "
                << format_double(direct <= swapped ? err[1][1] : err[1][0]) << "\n";
      if (!out_path.empty()) {
        run.output(out_path, dump(j));
        run.finish(out_path);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::SingularMatrix)
      std::cerr << "hint: raise --precision-bits or lower --ell\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
