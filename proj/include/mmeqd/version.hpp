#ifndef MMEQD_VERSION_HPP
#define MMEQD_VERSION_HPP

#define MMEQD_VERSION_STRING "0.1.0"

namespace mmeqd {
inline constexpr const char* version = MMEQD_VERSION_STRING;
}

#endif // MMEQD_VERSION_HPP
