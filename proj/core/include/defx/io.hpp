#pragma once

#include <string>

namespace defx {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace defx
