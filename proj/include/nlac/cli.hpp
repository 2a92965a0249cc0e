#pragma once

namespace nlac {

/// Exit codes: 0 pass, 1 verdict failure, 2 config error, 3 solver
/// failure, 4 internal error.
int cli_main(int argc, const char* const* argv);

}  // namespace nlac
