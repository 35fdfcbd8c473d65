#pragma once

namespace qrc {

inline constexpr const char* kQrcVersion = "1.0.0";

}  // namespace qrc
