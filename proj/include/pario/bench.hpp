#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pario/backend.hpp"
#include "pario/group.hpp"

namespace pario {

// Bandwidth benchmark configuration. The benchmark writes/reads the file in
// blocks, each rank owning a contiguous region of total_bytes/np. Four phases
// run by default: write, read, write-with-sync, read-after-sync; direction and
// sync filters restrict them. Per-element read is an optional extra phase used
// as the slow baseline.
struct BenchConfig {
    std::int64_t total_bytes = 0;
    std::int64_t block_bytes = 0;
    bool run_write = true;
    bool run_read = true;
    bool run_plain = true;
    bool run_sync = true;
    bool per_element = false;
    // The baseline reads this much of each rank's region one 4-byte element
    // per call; bounded so the phase stays tractable.
    std::int64_t element_sample_bytes = 4ll << 20;
    Strategy strategy = Strategy::Positional;
    std::string file;
    int reps = 1;
    bool keep = false;
};

struct PhaseResult {
    std::string direction;  // "write" | "read" | "read_element"
    bool sync = false;
    Strategy strategy = Strategy::Positional;
    std::int64_t bytes = 0;
    double seconds = 0.0;
    double mbps = 0.0;  // MB = 10^6 bytes
};

// Throws IoError{BackendFailure} on an invalid configuration.
void bench_validate(const BenchConfig& cfg);

// SPMD benchmark body; call from every rank. Bandwidth is total bytes over
// the barrier-bracketed wall clock of the slowest rank. Rank 0 returns the
// results; other ranks return an empty vector.
std::vector<PhaseResult> bench_run_rank(Group& group, const BenchConfig& cfg);

// Fixed schema: strategy,direction,sync,bytes,seconds,mbps
std::string bench_csv(const std::vector<PhaseResult>& results);
std::string bench_table(const std::vector<PhaseResult>& results);

// 1 KiB collective write-then-read-back smoke check; returns 0 on data match.
int bench_smoke_rank(Group& group, const std::string& file, Strategy strategy);

}  // namespace pario
