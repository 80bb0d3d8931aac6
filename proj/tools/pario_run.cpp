// pario-run: spawns the coordinator and N rank processes for an SPMD program.
//
//   pario-run --np N [--coord HOST:PORT] -- PROG ARGS...

#include <CLI11.hpp>

#include "pario/launch.hpp"
#include "pario/types.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pario SPMD launcher"};
    app.allow_extras();

    int np = 1;
    std::string coord = "127.0.0.1:0";
    app.add_option("--np", np, "number of rank processes")->required();
    app.add_option("--coord", coord, "coordinator bind address (host:port)");

    CLI11_PARSE(app, argc, argv);

    std::vector<std::string> program = app.remaining();
    if (!program.empty() && program.front() == "--") {
        program.erase(program.begin());
    }
    if (program.empty()) {
        std::fprintf(stderr, "pario-run: missing program (use -- PROG ARGS...)\n");
        return 2;
    }

    pario::LaunchSpec spec;
    spec.np = np;
    spec.argv = program;
    auto colon = coord.rfind(':');
    if (colon == std::string::npos) {
        std::fprintf(stderr, "pario-run: --coord must be HOST:PORT\n");
        return 2;
    }
    spec.coord_host = coord.substr(0, colon);
    spec.coord_port = std::stoi(coord.substr(colon + 1));

    try {
        return pario::run_spmd(spec);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pario-run: %s\n", e.what());
        return 2;
    }
}
