#pragma once

#include <string_view>

namespace panoclass {

std::string_view version();

}  // namespace panoclass
