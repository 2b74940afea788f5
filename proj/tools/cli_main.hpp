#pragma once

#include <string>
#include <vector>

namespace capa {

// CLI dispatcher, exposed for process-free testing.
// Exit codes: 0 ok, 2 config/usage error, 3 numerical failure, 4 I/O error.
int cli_main(const std::vector<std::string>& args);

}  // namespace capa
