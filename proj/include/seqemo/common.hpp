#ifndef SEQEMO_COMMON_HPP
#define SEQEMO_COMMON_HPP

#include <sstream>
#include <stdexcept>
#include <string>

namespace seqemo {

// Error taxonomy. Config errors come from bad settings, data errors from bad
// inputs, shape/numeric errors from internal contract violations, io errors
// from the filesystem.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised for unreadable or stale cache files; the fix is to regenerate them.
class CacheError : public DataError {
 public:
  using DataError::DataError;
};

namespace detail {
inline void cat_into(std::ostringstream&) {}
template <typename T, typename... Rest>
void cat_into(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  cat_into(os, rest...);
}
}  // namespace detail

template <typename... Args>
std::string cat(const Args&... args) {
  std::ostringstream os;
  detail::cat_into(os, args...);
  return os.str();
}

}  // namespace seqemo

#endif  // SEQEMO_COMMON_HPP
