#pragma once

#include <stdexcept>
#include <string>

namespace defx {

// Single exception type for all library errors. Messages carry the context
// the failing operation defines (line number, byte offset, doc id, ...).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace defx
