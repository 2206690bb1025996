#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainforge/disorder.hpp"
#include "chainforge/dynamics.hpp"
#include "chainforge/iep.hpp"
#include "chainforge/spectrum.hpp"

// JSON and CSV encodings shared by the CLI, the HTTP service and the Python
// module. Non-finite numbers are written as JSON null. Readers ignore keys
// they do not know, so a "meta" block may ride along with any document.
namespace chainforge::io {

using json = nlohmann::json;

// {"values":[...],"family":"linear","params":{"A":7,"C":0,"N":31}}
json to_json(const Spectrum& s);
Spectrum spectrum_from_json(const json& j);

// {"a":[...],"b":[...]}
json to_json(const ChainCouplings& c);
ChainCouplings chain_from_json(const json& j);

json to_json(const PstReport& r);
json to_json(const EigenSystem& es);
json to_json(const EffectiveModel& m);
json to_json(const BetaFit& f);
json to_json(const Histogram& h);
json to_json(const DisorderReport& r, const DisorderConfig& cfg);

// [[re, im], ...]
json to_json(const StateVector& psi);
StateVector state_from_json(const json& j);

// Reads r, samples, seed, tau (required), bins and threads (optional).
DisorderConfig disorder_config_from_json(const json& j);

// One-line summary of a disorder run: mean, fit parameters, sample count.
json fit_summary(const DisorderReport& r, const DisorderConfig& cfg);

// CSV writers, 17 significant digits.
std::string couplings_csv(const ChainCouplings& c);                            // index,a,b
std::string trace_csv(std::span<const double> t, std::span<const double> f);   // t,f
std::string histogram_csv(const Histogram& h);                                 // lower,upper,count
std::string overlaps_csv(std::span<const double> overlaps);                    // sample,f

// Parses JSON text; malformed input raises ErrorCode::bad_request.
json parse(const std::string& text);

}  // namespace chainforge::io
