#include <doctest.h>

#include <fstream>

#include "oracle.hpp"
#include "support.hpp"

using namespace testsupport;

namespace {

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

}  // namespace

// Randomized programs with nonoverlapping writes replay exactly: the final
// file bytes must equal a single-process sequential replay of the same ops.
// The acceptance suite runs the full 200-program form; this is the quick
// regression version.
TEST_CASE("random programs match the sequential replay oracle") {
    TempDir dir;
    int checked = 0;
    for (int np : {1, 2, 4}) {
        for (std::uint64_t seed = 1; seed <= 12; ++seed) {
            auto program = oracle::generate_program(np, seed * 977 + np);
            auto expected = oracle::replay_program(program);
            CHECK(expected.size() <= 1024);

            auto path = dir.file("prog_" + std::to_string(np) + "_" + std::to_string(seed));
            auto result = run_group(np, [&](pario::Group& g) {
                oracle::execute_program(program, g, path);
            });

            auto actual = slurp(path);
            REQUIRE(actual.size() == expected.size());
            bool equal = actual == expected;
            CHECK(equal);
            if (!equal) {
                for (std::size_t i = 0; i < expected.size(); ++i) {
                    if (actual[i] != expected[i]) {
                        CAPTURE(np);
                        CAPTURE(seed);
                        CAPTURE(i);
                        CHECK(actual[i] == expected[i]);
                        break;
                    }
                }
                return;
            }

            // open/close bracketing: exactly one registration per program run,
            // and no lock leaks
            int opened = 0;
            for (const auto& e : result.events) {
                if (e.type == pario::Coordinator::Event::Type::FileOpened) ++opened;
            }
            CHECK(opened == 1);
            CHECK(result.leaked_locks == 0);
            ++checked;
        }
    }
    CHECK(checked == 36);
}
