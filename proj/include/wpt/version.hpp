#pragma once

namespace wpt {

inline constexpr const char* version = "1.0.0";

} // namespace wpt
