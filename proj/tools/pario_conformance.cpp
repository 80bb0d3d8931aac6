// pario-conformance: collective/async/atomicity/misc conformance suites,
// run as np rank processes via self-relaunch.
//
//   pario-conformance --np N --suite coll|async|atomicity|misc [--dir PATH]

#include <unistd.h>

#include <CLI11.hpp>

#include "pario/conformance.hpp"
#include "pario/launch.hpp"

namespace {

std::string self_exe() {
    char buf[4096];
    ssize_t n = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
    if (n <= 0) return "pario-conformance";
    buf[n] = '\0';
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pario conformance suites"};

    int np = 2;
    std::string suite_str;
    std::string dir = ".";
    app.add_option("--np", np, "number of rank processes (>= 2)");
    app.add_option("--suite", suite_str, "coll|async|atomicity|misc")->required();
    app.add_option("--dir", dir, "working directory for test files");

    CLI11_PARSE(app, argc, argv);

    pario::Suite suite;
    try {
        suite = pario::suite_from_name(suite_str);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pario-conformance: %s\n", e.what());
        return 2;
    }
    if (np < 2) {
        std::fprintf(stderr, "pario-conformance: np must be >= 2\n");
        return 2;
    }

    if (!std::getenv("PARIO_RANK")) {
        pario::LaunchSpec spec;
        spec.np = np;
        spec.argv.assign(argv, argv + argc);
        spec.argv[0] = self_exe();
        return pario::run_spmd(spec);
    }

    try {
        pario::Group group = pario::Group::init_from_env();
        int rc = pario::conformance_run_rank(group, suite, dir);
        group.finalize();
        return rc;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pario-conformance: %s\n", e.what());
        return 1;
    }
}
