#pragma once

// Shared helpers for the test suites: scratch directories and an in-process
// multi-rank harness. Each simulated rank runs on its own thread with its own
// socket connection to a real coordinator, exercising the same code paths as
// separate processes.

#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pario/coordinator.hpp"
#include "pario/group.hpp"
#include "pario/types.hpp"

namespace testsupport {

class TempDir {
  public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        for (int tries = 0; tries < 100; ++tries) {
            auto candidate = base / ("pario_test_" + std::to_string(rd()));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp directory");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

struct GroupRunResult {
    std::vector<pario::Coordinator::Event> events;
    int leaked_locks = 0;
};

// Runs fn(rank_group) on np threads against a fresh coordinator; finalizes
// each group afterwards. The first rank exception is rethrown.
inline GroupRunResult run_group(int np, const std::function<void(pario::Group&)>& fn) {
    pario::Coordinator coordinator(np);
    std::vector<std::exception_ptr> errors(np);
    std::vector<std::thread> threads;
    threads.reserve(np);
    for (int r = 0; r < np; ++r) {
        threads.emplace_back([&, r] {
            try {
                pario::Group g = pario::Group::init(r, np, coordinator.endpoint());
                try {
                    fn(g);
                } catch (...) {
                    errors[r] = std::current_exception();
                    return;  // abrupt: coordinator sees the disconnect
                }
                g.finalize();
            } catch (...) {
                if (!errors[r]) errors[r] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    GroupRunResult result;
    result.events = coordinator.events();
    result.leaked_locks = coordinator.leaked_lock_count();
    coordinator.stop();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return result;
}

// Like run_group but captures each rank's IoError class instead of rethrowing,
// and still finalizes the groups (digest mismatches leave them usable).
inline std::vector<std::optional<pario::ErrorClass>> run_group_capture(
    int np, const std::function<void(pario::Group&)>& fn) {
    pario::Coordinator coordinator(np);
    std::vector<std::optional<pario::ErrorClass>> classes(np);
    std::vector<std::exception_ptr> fatal(np);
    std::vector<std::thread> threads;
    threads.reserve(np);
    for (int r = 0; r < np; ++r) {
        threads.emplace_back([&, r] {
            try {
                pario::Group g = pario::Group::init(r, np, coordinator.endpoint());
                try {
                    fn(g);
                } catch (const pario::IoError& e) {
                    classes[r] = e.cls();
                }
                try {
                    g.finalize();
                } catch (...) {
                }
            } catch (...) {
                fatal[r] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    coordinator.stop();
    for (auto& e : fatal) {
        if (e) std::rethrow_exception(e);
    }
    return classes;
}

inline std::uint8_t pattern_byte(std::uint64_t seed, std::int64_t index) {
    std::uint64_t x = seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(index);
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDull;
    x ^= x >> 33;
    return static_cast<std::uint8_t>(x & 0xFF);
}

}  // namespace testsupport
