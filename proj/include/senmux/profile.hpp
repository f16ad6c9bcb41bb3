// Device profile loading: JSON descriptions of a device's sensors (supported
// ranges, HAL response model, timing noise, measured SDK-preset periods) are
// parsed and validated into DeviceProfile values.
#pragma once

#include "senmux/sensor_types.hpp"

#include <string>

namespace senmux {

// Parse a profile from a JSON document (throws ProfileSchemaError on any
// structural or semantic problem).
DeviceProfile parse_profile(const std::string& json_text);

// Load and validate a profile from a file path.
DeviceProfile load_profile_file(const std::string& path);

// Load one of the profiles bundled with the project by short name
// (e.g. "poco_f1"); falls back to treating the name as a path.
DeviceProfile load_bundled_profile(const std::string& name);

// Semantic checks beyond JSON shape; throws ProfileSchemaError.
void validate_profile(const DeviceProfile& profile);

// Compile-time data directory (bundled profiles, channel parameters, app
// database).
std::string default_data_dir();

} // namespace senmux
