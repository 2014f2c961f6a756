#pragma once

#include <string>

#include "hwforest/cascade.hpp"

namespace hwforest {

/// Versioned little-endian binary encoding of a fitted model. Encoding the
/// same model twice yields identical bytes, and a decode/encode round trip
/// is byte-exact.
std::string serialize_model(const CascadeModel& m);
CascadeModel parse_model(const std::string& bytes);

/// File variants. save_model writes through a temporary file and renames,
/// so a failed run never leaves a partial model behind.
void save_model(const CascadeModel& m, const std::string& path);
CascadeModel load_model(const std::string& path);

} // namespace hwforest
