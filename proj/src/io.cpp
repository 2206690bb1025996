#include "chainforge/io.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "chainforge/error.hpp"

namespace chainforge::io {

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <typename T>
T required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
    throw Error(ErrorCode::bad_request, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::bad_request, std::string("field '") + key + "' has the wrong type");
  }
}

std::vector<double> number_array(const json& j, const char* key) {
  const json& arr = j.is_object() && j.contains(key) ? j.at(key) : json();
  if (!arr.is_array()) throw Error(ErrorCode::bad_request, std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (!v.is_number()) {
      throw Error(ErrorCode::bad_request, std::string("field '") + key + "' must hold numbers only");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::ostringstream csv_stream() {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  return os;
}

}  // namespace

json to_json(const Spectrum& s) {
  json params = {{"N", s.params().N}, {"C", s.params().C}};
  if (s.params().A) params["A"] = *s.params().A;
  return {{"values", json(std::vector<double>(s.values().begin(), s.values().end()))},
          {"family", std::string(to_string(s.family()))},
          {"params", params}};
}

Spectrum spectrum_from_json(const json& j) {
  std::vector<double> values = number_array(j, "values");
  const Family family = j.contains("family") ? family_from_string(required<std::string>(j, "family"))
                                             : Family::custom;
  SpectrumParams params;
  if (j.contains("params") && j.at("params").is_object()) {
    const json& p = j.at("params");
    if (p.contains("A") && p.at("A").is_number_integer()) params.A = p.at("A").get<int>();
    if (p.contains("C") && p.at("C").is_number()) params.C = p.at("C").get<double>();
  }
  return Spectrum(std::move(values), family, params);
}

json to_json(const ChainCouplings& c) {
  return {{"a", std::vector<double>(c.a().begin(), c.a().end())},
          {"b", std::vector<double>(c.b().begin(), c.b().end())}};
}

ChainCouplings chain_from_json(const json& j) {
  // Accept both a bare chain and a document that wraps it, e.g. a solve response.
  const json& body = (j.is_object() && j.contains("chain")) ? j.at("chain") : j;
  return ChainCouplings(number_array(body, "a"), number_array(body, "b"));
}

json to_json(const PstReport& r) {
  return {{"is_pst", r.is_pst}, {"tau", r.tau}, {"phi", r.phi}, {"max_phase_error", r.max_phase_error}};
}

json to_json(const EigenSystem& es) {
  json vectors = json::array();
  for (std::size_t k = 0; k < es.size(); ++k) {
    const auto v = es.eigenvector(k);
    vectors.push_back(std::vector<double>(v.begin(), v.end()));
  }
  return {{"eigenvalues", std::vector<double>(es.eigenvalues().begin(), es.eigenvalues().end())},
          {"eigenvectors", vectors}};
}

json to_json(const EffectiveModel& m) {
  return {{"parity", m.parity == ChainParity::odd_N ? "odd_N" : "even_N"},
          {"nu", number(m.nu)},
          {"v01", number(m.v01)},
          {"v0n", number(m.v0n)},
          {"omega", number(m.omega)},
          {"detunings", {number(m.detuning_1), number(m.detuning_n)}},
          {"predicted_tau", number(m.predicted_tau)},
          {"xi_min", number(m.xi_min)},
          {"validity_warning", m.validity_warning},
          {"exact_frequency", number(m.exact_frequency)},
          {"exact_tau", number(m.exact_tau)},
          {"tau_discrepancy", number(m.tau_discrepancy)},
          {"splitting_exponent", number(m.splitting_exponent)}};
}

json to_json(const BetaFit& f) {
  return {{"alpha", f.alpha},
          {"beta", f.beta},
          {"mu", f.mu},
          {"sigma2", f.sigma2},
          {"method", std::string(to_string(f.method))},
          {"iterations", f.iterations}};
}

json to_json(const Histogram& h) { return {{"edges", h.edges}, {"counts", h.counts}}; }

json to_json(const DisorderReport& r, const DisorderConfig& cfg) {
  return {{"config",
           {{"r", cfg.r}, {"samples", cfg.samples}, {"seed", cfg.seed}, {"tau", cfg.tau}, {"bins", cfg.bins}}},
          {"mean", r.mean},
          {"fraction_ge_0_98", r.fraction_at_least(0.98)},
          {"histogram", to_json(r.hist)},
          {"fit", r.fit ? to_json(*r.fit) : json(nullptr)},
          {"overlaps", r.overlaps}};
}

json to_json(const StateVector& psi) {
  json out = json::array();
  for (const auto& c : psi.amplitudes()) out.push_back({c.real(), c.imag()});
  return out;
}

StateVector state_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::bad_request, "state vector must be an array of [re, im] pairs");
  std::vector<std::complex<double>> amps;
  for (const json& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw Error(ErrorCode::bad_request, "state vector must be an array of [re, im] pairs");
    }
    amps.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  return StateVector(std::move(amps));
}

DisorderConfig disorder_config_from_json(const json& j) {
  DisorderConfig cfg;
  cfg.r = required<double>(j, "r");
  const auto samples = required<long long>(j, "samples");
  if (samples < 1) throw Error(ErrorCode::bad_request, "samples must be positive");
  cfg.samples = static_cast<std::size_t>(samples);
  cfg.seed = required<std::uint64_t>(j, "seed");
  cfg.tau = required<double>(j, "tau");
  if (j.contains("bins")) {
    const auto bins = required<long long>(j, "bins");
    if (bins < 1) throw Error(ErrorCode::bad_request, "bins must be positive");
    cfg.bins = static_cast<std::size_t>(bins);
  }
  if (j.contains("threads")) cfg.threads = required<std::size_t>(j, "threads");
  return cfg;
}

json fit_summary(const DisorderReport& r, const DisorderConfig& cfg) {
  json out = {{"samples", cfg.samples}, {"r", cfg.r}, {"seed", cfg.seed}, {"tau", cfg.tau}, {"mean", r.mean}};
  if (r.fit) {
    out["alpha"] = r.fit->alpha;
    out["beta"] = r.fit->beta;
    out["mu"] = r.fit->mu;
    out["sigma2"] = r.fit->sigma2;
    out["method"] = std::string(to_string(r.fit->method));
  } else {
    out["fit"] = nullptr;
  }
  return out;
}

std::string couplings_csv(const ChainCouplings& c) {
  auto os = csv_stream();
  os << "index,a,b\n";
  for (std::size_t j = 0; j < c.size(); ++j) {
    os << j + 1 << ',' << c.a()[j] << ',';
    if (j < c.b().size()) os << c.b()[j];
    os << '\n';
  }
  return os.str();
}

std::string trace_csv(std::span<const double> t, std::span<const double> f) {
  if (t.size() != f.size()) throw Error(ErrorCode::bad_request, "trace columns differ in length");
  auto os = csv_stream();
  os << "t,f\n";
  for (std::size_t i = 0; i < t.size(); ++i) os << t[i] << ',' << f[i] << '\n';
  return os.str();
}

std::string histogram_csv(const Histogram& h) {
  auto os = csv_stream();
  os << "lower,upper,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    os << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << '\n';
  }
  return os.str();
}

std::string overlaps_csv(std::span<const double> overlaps) {
  auto os = csv_stream();
  os << "sample,f\n";
  for (std::size_t i = 0; i < overlaps.size(); ++i) os << i << ',' << overlaps[i] << '\n';
  return os.str();
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::bad_request, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace chainforge::io
