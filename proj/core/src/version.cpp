#include "binlab/version.hpp"

namespace binlab {

std::string_view version() noexcept { return BINLAB_VERSION_STRING; }

}  // namespace binlab
