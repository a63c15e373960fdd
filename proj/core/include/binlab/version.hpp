#pragma once

#include <string_view>

namespace binlab {

/// Library version, "major.minor.patch".
std::string_view version() noexcept;

}  // namespace binlab
