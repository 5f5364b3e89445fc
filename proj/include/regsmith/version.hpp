#pragma once

namespace regsmith {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kPrngId = "xoshiro256ss-v1";

}  // namespace regsmith
