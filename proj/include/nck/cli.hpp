#pragma once

namespace nck {

/// Entry point behind the command-line tool; returns the process exit code.
/// Errors print a single-line diagnostic to stderr and yield nonzero.
int cli_main(int argc, const char* const* argv);

}  // namespace nck
