#pragma once

namespace advtest {
inline constexpr const char* kToolVersion = "0.1.0";
}
