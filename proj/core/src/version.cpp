#include "panoclass/version.hpp"

namespace panoclass {

std::string_view version() { return PANOCLASS_VERSION_STRING; }

}  // namespace panoclass
