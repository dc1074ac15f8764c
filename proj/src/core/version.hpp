#pragma once

namespace lqrlr {
inline constexpr const char* kToolVersion = "0.1.0";
}
