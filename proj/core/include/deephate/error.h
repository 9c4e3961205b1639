#ifndef DEEPHATE_ERROR_H_
#define DEEPHATE_ERROR_H_

#include <stdexcept>
#include <string>

namespace deephate {

// All library failures surface as this type so the CLI can report them as a
// single line.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace deephate

#endif  // DEEPHATE_ERROR_H_
