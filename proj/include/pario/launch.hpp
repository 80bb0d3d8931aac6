#pragma once

#include <string>
#include <vector>

namespace pario {

// Launch specification for one SPMD run: the coordinator is started inside
// the launcher process and N rank processes are spawned with PARIO_RANK,
// PARIO_SIZE and PARIO_COORD set.
struct LaunchSpec {
    int np = 1;
    std::vector<std::string> argv;  // program + args
    std::string coord_host = "127.0.0.1";
    int coord_port = 0;  // 0 = ephemeral
    std::string workdir;  // empty = inherit
    bool prefix_output = true;
};

// Runs the spec to completion. Child stdout/stderr lines are echoed prefixed
// with "[rank N] ". Returns 0 iff every rank exited 0.
int run_spmd(const LaunchSpec& spec);

}  // namespace pario
