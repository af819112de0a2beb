#pragma once

namespace gorbit {

inline constexpr const char* kVersion = "gorbit 0.1.0";

}  // namespace gorbit
