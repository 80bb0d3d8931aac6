#pragma once

#include <string>

#include "pario/group.hpp"

namespace pario {

// Conformance suites: each performs a 1 KiB write-then-read cycle plus
// suite-specific checks. Intended to run under the launcher with np >= 2.
enum class Suite { Coll, Async, Atomicity, Misc };

Suite suite_from_name(const std::string& name);  // coll|async|atomicity|misc
const char* suite_name(Suite s);

// Runs one suite on this rank; returns 0 on pass. Assertion failures are
// reported with the rank and the first differing byte.
int conformance_run_rank(Group& group, Suite suite, const std::string& dir);

}  // namespace pario
