#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace silt::cli {

enum ExitCode : int { ok = 0, config_error = 2, budget_error = 3, check_failed = 4 };

/// Runs one command line (without the program name). Results go to `out`
/// unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

std::string sha256_hex(std::string_view data);

/// Writes through a temporary sibling and renames it into place.
void write_atomically(const std::string& path, std::string_view content);

}  // namespace silt::cli
