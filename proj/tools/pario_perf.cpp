// pario-perf: bandwidth benchmark. Without PARIO_RANK set it relaunches
// itself through the SPMD launcher; with it set it acts as one rank.
//
//   pario-perf --np N --size BYTES --block BYTES [--dir read|write]
//              [--sync on|off] --strategy positional|mapped --file PATH
//              --reps K [--csv PATH] [--per-element] [--keep] [--smoke]

#include <unistd.h>

#include <CLI11.hpp>
#include <fstream>

#include "pario/bench.hpp"
#include "pario/file.hpp"
#include "pario/launch.hpp"

namespace {

std::string self_exe() {
    char buf[4096];
    ssize_t n = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
    if (n <= 0) return "pario-perf";
    buf[n] = '\0';
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pario bandwidth benchmark"};

    int np = 1;
    pario::BenchConfig cfg;
    std::string dir = "both";
    std::string sync = "both";
    std::string strategy = "positional";
    std::string csv_path;
    bool smoke = false;

    app.add_option("--np", np, "number of rank processes");
    app.add_option("--size", cfg.total_bytes, "total bytes across all ranks");
    app.add_option("--block", cfg.block_bytes, "bytes per access");
    app.add_option("--dir", dir, "read|write (default: both)");
    app.add_option("--sync", sync, "on|off (default: both)");
    app.add_option("--strategy", strategy, "positional|mapped");
    app.add_option("--file", cfg.file, "benchmark file path");
    app.add_option("--reps", cfg.reps, "repetitions");
    app.add_option("--csv", csv_path, "write machine-readable results here");
    app.add_flag("--per-element", cfg.per_element, "add the per-element read baseline");
    app.add_flag("--keep", cfg.keep, "keep the benchmark file");
    app.add_flag("--smoke", smoke, "run the 1 KiB collective round-trip check only");

    CLI11_PARSE(app, argc, argv);

    if (dir == "read") {
        cfg.run_write = false;
    } else if (dir == "write") {
        cfg.run_read = false;
    } else if (dir != "both") {
        std::fprintf(stderr, "pario-perf: --dir must be read or write\n");
        return 2;
    }
    if (sync == "on") {
        cfg.run_plain = false;
    } else if (sync == "off") {
        cfg.run_sync = false;
    } else if (sync != "both") {
        std::fprintf(stderr, "pario-perf: --sync must be on or off\n");
        return 2;
    }
    try {
        cfg.strategy = pario::strategy_from_name(strategy);
        if (!smoke) pario::bench_validate(cfg);
        if (cfg.file.empty()) throw pario::IoError(pario::ErrorClass::BackendFailure,
                                                   "--file is required");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pario-perf: %s\n", e.what());
        return 2;
    }

    if (!std::getenv("PARIO_RANK")) {
        // launcher mode: respawn self under the coordinator
        pario::LaunchSpec spec;
        spec.np = np;
        spec.argv.assign(argv, argv + argc);
        spec.argv[0] = self_exe();
        return pario::run_spmd(spec);
    }

    try {
        pario::Group group = pario::Group::init_from_env();
        int rc = 0;
        if (smoke) {
            rc = pario::bench_smoke_rank(group, cfg.file, cfg.strategy);
            if (group.rank() == 0) {
                std::printf("smoke: %s\n", rc == 0 ? "PASS" : "FAIL");
            }
        } else {
            auto results = pario::bench_run_rank(group, cfg);
            if (group.rank() == 0) {
                std::fputs(pario::bench_table(results).c_str(), stdout);
                if (!csv_path.empty()) {
                    std::ofstream out(csv_path);
                    out << pario::bench_csv(results);
                }
            }
        }
        group.finalize();
        return rc;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pario-perf: %s\n", e.what());
        return 1;
    }
}
