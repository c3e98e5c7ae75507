#pragma once

#include <ostream>

namespace dmic {

/// Entry point of the `dmic` command. Exit status: 0 success, 1 compute
/// error, 2 usage or validation error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dmic
