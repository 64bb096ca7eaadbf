#ifndef GMEASURE_VERSION_HPP
#define GMEASURE_VERSION_HPP

namespace gmeasure {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // GMEASURE_VERSION_HPP
