#include "chainforge/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "chainforge/error.hpp"
#include "chainforge/io.hpp"
#include "chainforge/service.hpp"

namespace chainforge::cli {

namespace {

using io::json;

struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  std::string out_path;
  bool no_meta = false;
};

std::string read_input(Context& ctx, const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(ctx.in), std::istreambuf_iterator<char>()};
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::bad_request, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text)) throw Error(ErrorCode::bad_request, "cannot write '" + path + "'");
}

void emit(Context& ctx, const std::string& text) {
  if (ctx.out_path.empty() || ctx.out_path == "-") {
    ctx.out << text;
  } else {
    write_file(ctx.out_path, text);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit_json(Context& ctx, json doc, int indent = 2) {
  if (!ctx.no_meta) {
    doc["meta"] = {{"tool", "chainforge"}, {"version", CHAINFORGE_VERSION}, {"timestamp", utc_timestamp()}};
  }
  emit(ctx, doc.dump(indent) + "\n");
}

ChainCouplings load_chain(Context& ctx, const std::string& path) {
  return io::chain_from_json(io::parse(read_input(ctx, path)));
}

double resolve_tau(const ChainCouplings& c, std::optional<double> tau) {
  if (tau) return *tau;
  if (auto t = default_transfer_time(c)) return *t;
  throw Error(ErrorCode::bad_request, "--tau is required: the chain does not transfer perfectly at pi");
}

struct SpectrumArgs {
  std::string family;
  int n = 0;
  int a = 1;
  std::optional<double> shift;
  std::vector<double> values;
};

struct SolveArgs {
  std::string spectrum = "-";
  std::string format = "json";
};

struct EvolveArgs {
  std::string chain = "-";
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t points = 1000;
  std::string format = "csv";
};

struct DisorderArgs {
  std::string chain = "-";
  double r = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::optional<double> tau;
  std::size_t bins = 50;
  std::size_t threads = 0;
  std::string hist;
  std::string overlaps;
  bool summary = false;
};

struct EffectiveArgs {
  std::string chain = "-";
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
};

void run_spectrum(Context& ctx, const SpectrumArgs& args) {
  Spectrum s = [&] {
    if (!args.values.empty()) return Spectrum(args.values);
    if (args.family.empty()) throw Error(ErrorCode::bad_request, "give --family or --values");
    if (args.n <= 0) throw Error(ErrorCode::bad_request, "--n must be positive");
    switch (family_from_string(args.family)) {
      case Family::linear: return generate_linear(args.n, args.a);
      case Family::inverted_quadratic: return generate_inverted_quadratic(args.n);
      case Family::cosine: return generate_cosine(args.n);
      case Family::custom: break;
    }
    throw Error(ErrorCode::bad_request, "custom spectra need --values");
  }();
  if (args.shift) s = shift_spectrum(s, *args.shift);
  emit_json(ctx, io::to_json(s));
}

void run_solve(Context& ctx, const SolveArgs& args) {
  const json doc = io::parse(read_input(ctx, args.spectrum));
  const ChainCouplings c = solve(io::spectrum_from_json(doc.contains("spectrum") ? doc.at("spectrum") : doc));
  if (args.format == "csv") {
    emit(ctx, io::couplings_csv(c));
  } else {
    emit_json(ctx, io::to_json(c));
  }
}

void run_evolve(Context& ctx, const EvolveArgs& args) {
  const ChainCouplings c = load_chain(ctx, args.chain);
  const std::vector<double> t = linear_grid(args.t_min, args.t_max, args.points);
  const std::vector<double> f = overlap_trace(eigendecompose(c), t);
  if (args.format == "json") {
    emit_json(ctx, {{"t", t}, {"f", f}});
  } else {
    emit(ctx, io::trace_csv(t, f));
  }
}

void run_disorder(Context& ctx, const DisorderArgs& args) {
  const ChainCouplings c = load_chain(ctx, args.chain);
  DisorderConfig cfg;
  cfg.r = args.r;
  cfg.samples = args.samples;
  cfg.seed = args.seed;
  cfg.tau = resolve_tau(c, args.tau);
  cfg.bins = args.bins;
  cfg.threads = args.threads;
  const DisorderReport report = run_experiment(c, cfg);

  std::string hist_path = args.hist;
  if (hist_path.empty() && !ctx.out_path.empty() && ctx.out_path != "-") hist_path = ctx.out_path + ".hist.csv";
  if (!hist_path.empty()) write_file(hist_path, io::histogram_csv(report.hist));
  if (!args.overlaps.empty()) write_file(args.overlaps, io::overlaps_csv(report.overlaps));

  if (args.summary) {
    emit_json(ctx, io::fit_summary(report, cfg), -1);
  } else {
    emit_json(ctx, io::to_json(report, cfg));
  }
}

void run_effective(Context& ctx, const EffectiveArgs& args) {
  emit_json(ctx, io::to_json(effective_model(load_chain(ctx, args.chain))));
}

void run_serve(Context& ctx, const ServeArgs& args) {
  service::ServiceOptions options;
  options.host = args.host;
  options.port = args.port;
  options.static_dir = args.static_dir;
  service::Service svc(options);
  const int port = svc.bind();
  if (port < 0) throw Error(ErrorCode::bad_request, "cannot bind " + args.host + ":" + std::to_string(args.port));
  ctx.err << "listening on http://" << args.host << ':' << port << std::endl;
  svc.listen();
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Context ctx{in, out, err, {}, false};
  CLI::App app{"Spin chain design: spectra, couplings, transfer dynamics and disorder.", "chainforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(CHAINFORGE_VERSION));
  app.add_option("-o,--out", ctx.out_path, "Output file (default stdout)");
  app.add_flag("--no-meta", ctx.no_meta, "Omit the meta block (tool, version, timestamp)");

  SpectrumArgs spectrum_args;
  auto* spectrum = app.add_subcommand("spectrum", "Generate a spectrum")->fallthrough();
  spectrum->add_option("--family", spectrum_args.family, "linear, inverted_quadratic or cosine");
  spectrum->add_option("--n", spectrum_args.n, "Number of sites");
  spectrum->add_option("--a", spectrum_args.a, "Level spacing of the linear family")->capture_default_str();
  spectrum->add_option("--shift", spectrum_args.shift, "Shift C applied as lambda - sgn(lambda) C");
  spectrum->add_option("--values", spectrum_args.values, "Explicit eigenvalues")->delimiter(',');

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Reconstruct couplings from a spectrum")->fallthrough();
  solve_cmd->add_option("--spectrum", solve_args.spectrum, "Spectrum JSON file, - for stdin")->capture_default_str();
  solve_cmd->add_option("--format", solve_args.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  EvolveArgs evolve_args;
  auto* evolve = app.add_subcommand("evolve", "Transfer overlap |<N|exp(-iHt)|1>| on a time grid")->fallthrough();
  evolve->add_option("--chain", evolve_args.chain, "Couplings JSON file, - for stdin")->capture_default_str();
  evolve->add_option("--tmin", evolve_args.t_min)->capture_default_str();
  evolve->add_option("--tmax", evolve_args.t_max)->required();
  evolve->add_option("--points", evolve_args.points)->capture_default_str();
  evolve->add_option("--format", evolve_args.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  DisorderArgs disorder_args;
  auto* disorder = app.add_subcommand("disorder", "Monte Carlo coupling disorder")->fallthrough();
  disorder->add_option("--chain", disorder_args.chain, "Couplings JSON file, - for stdin")->capture_default_str();
  disorder->add_option("--r", disorder_args.r, "Relative disorder strength")->required();
  disorder->add_option("--samples", disorder_args.samples)->required();
  disorder->add_option("--seed", disorder_args.seed)->capture_default_str();
  disorder->add_option("--tau", disorder_args.tau, "Readout time (default pi when the chain is perfect there)");
  disorder->add_option("--bins", disorder_args.bins)->capture_default_str();
  disorder->add_option("--threads", disorder_args.threads, "Worker threads, 0 for automatic")->capture_default_str();
  disorder->add_option("--hist", disorder_args.hist, "Histogram CSV (default <out>.hist.csv)");
  disorder->add_option("--overlaps", disorder_args.overlaps, "Per-sample overlaps CSV");
  disorder->add_flag("--summary", disorder_args.summary, "Emit only mean and fit");

  EffectiveArgs effective_args;
  auto* effective = app.add_subcommand("effective", "Weak end-coupling effective model")->fallthrough();
  effective->add_option("--chain", effective_args.chain, "Couplings JSON file, - for stdin")->capture_default_str();

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Start the HTTP service")->fallthrough();
  serve->add_option("--host", serve_args.host)->capture_default_str();
  serve->add_option("--port", serve_args.port)->capture_default_str();
  serve->add_option("--static", serve_args.static_dir, "Directory served at /");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << CHAINFORGE_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "chainforge: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*spectrum) run_spectrum(ctx, spectrum_args);
    else if (*solve_cmd) run_solve(ctx, solve_args);
    else if (*evolve) run_evolve(ctx, evolve_args);
    else if (*disorder) run_disorder(ctx, disorder_args);
    else if (*effective) run_effective(ctx, effective_args);
    else if (*serve) run_serve(ctx, serve_args);
  } catch (const Error& e) {
    err << "chainforge: " << to_string(e.code()) << ": " << e.what() << '\n';
    return is_numerical(e.code()) ? kExitNumerical : kExitValidation;
  } catch (const std::exception& e) {
    err << "chainforge: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace chainforge::cli
