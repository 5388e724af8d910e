#ifndef MDAG_VERSION_HPP
#define MDAG_VERSION_HPP

namespace mdag {

inline constexpr const char* kToolName = "mdag";
inline constexpr const char* kVersion = "1.0.0";

}  // namespace mdag

#endif  // MDAG_VERSION_HPP
