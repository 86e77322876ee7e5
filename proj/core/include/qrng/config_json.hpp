#pragma once

// JSON mapping of the model parameter types. Field names match the struct
// members; all numeric values are SI base units. Missing fields keep their
// defaults, unknown fields and type mismatches raise ParameterError naming
// the offending field.

#include <json.hpp>

#include "qrng/entropy.hpp"
#include "qrng/noise_model.hpp"
#include "qrng/trace.hpp"

namespace qrng::config {

using Json = nlohmann::ordered_json;

Json to_json(const noise::PhotodiodeModel& pd);
Json to_json(const noise::FrontEndModel& fe);
Json to_json(const noise::DetectorConfig& cfg);
Json to_json(const entropy::GaussianNoiseModel& model);
Json to_json(const entropy::AdcModel& adc);
Json to_json(const trace::TraceConfig& cfg);

noise::PhotodiodeModel photodiode_from_json(const Json& j);
noise::FrontEndModel frontend_from_json(const Json& j);
noise::DetectorConfig detector_from_json(const Json& j);
entropy::GaussianNoiseModel noise_model_from_json(const Json& j);
entropy::AdcModel adc_from_json(const Json& j);
trace::TraceConfig trace_config_from_json(const Json& j);

// Seeds travel as "0x..." strings so all 64 bits survive JSON.
std::string seed_to_hex(std::uint64_t seed);
std::uint64_t seed_from_hex(std::string_view text);

}  // namespace qrng::config
