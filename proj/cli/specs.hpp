#pragma once

// Text forms of schedules, weight schemes, models and real sequences, as taken
// by command-line flags and the JSON config document.

#include <string>

#include "dnstat/dnmeans.hpp"
#include "dnstat/rvmodel.hpp"

namespace dnstat::cli {

/// "example1", "cesaro", "ax,ay" (x = ax m, y = ay m), "ax,bx,ay,by"
/// (x = ax m + bx, y = ay m + by), or a JSON object {"x":{"a":..,"b":..},"y":{..}}.
DeferredSchedule parse_schedule(const std::string& text);

/// "ones", "identity", "example1", or a JSON object {"e":[...],"g":[...]} of
/// tabulated values from index 0; lookups past the table raise ConfigError.
WeightScheme parse_weights(const std::string& text);

/// Any model_from_spec() name, or a JSON object
/// {"description":..., "support":[[[value, limit, prob], ...], ...], "limit":[[value, prob], ...]}
/// whose support entry i is the law at m = i+1; m past the table reuses the last entry.
RVSequenceModel parse_model(const std::string& text);

/// "identity", "const:<c>", "squares", "alternating", "inverse", "sqrt".
RealSeq parse_sequence(const std::string& text);

/// Comma-separated reals.
std::vector<double> parse_real_list(const std::string& text);

}  // namespace dnstat::cli
