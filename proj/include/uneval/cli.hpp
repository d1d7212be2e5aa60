#pragma once

#include <string>
#include <vector>

namespace uneval {

/// Entry point behind the `uncertain-eval` binary. Exit codes: 0 success,
/// 2 usage or input-parse error, 3 numerical-degeneracy warning escalated by
/// --strict. Commands that draw random numbers require a seed (--seed or the
/// UNCERTAIN_EVAL_SEED environment variable) and echo it in the report
/// metadata; identical invocations produce byte-identical report payloads.
int run_cli(int argc, const char* const* argv);

/// Same, argv-style vector (argv[0] is the program name).
int run_cli(const std::vector<std::string>& args);

}  // namespace uneval
