#pragma once

#include <cstdint>
#include <iosfwd>

namespace psa {

/// Entry point of the psa_cli tool. Returns the process exit code:
/// 0 on success, 2 for usage or parameter errors, 1 for runtime failures
/// (unwritable output, unreadable channel file, failed validation).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Oracle, relaxation, detection and invariant checks; one PASS/FAIL line each.
/// Returns true when every check passes.
bool run_validation(bool quick, std::uint64_t seed, std::ostream& out);

}  // namespace psa
