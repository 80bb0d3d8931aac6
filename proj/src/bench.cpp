#include "pario/bench.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "pario/file.hpp"

namespace pario {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

std::uint8_t fill_byte(int rank, std::int64_t i) {
    return static_cast<std::uint8_t>((i * 131 + rank * 17 + 7) & 0xFF);
}

struct Region {
    std::int64_t start = 0;  // bytes
    std::int64_t len = 0;
};

Region rank_region(const Group& g, std::int64_t total) {
    std::int64_t per_rank = total / g.size();
    return {g.rank() * per_rank, per_rank};
}

void fill_pattern(std::vector<std::uint8_t>& buf, int rank, std::int64_t base) {
    for (std::size_t i = 0; i < buf.size(); ++i) {
        buf[i] = fill_byte(rank, base + static_cast<std::int64_t>(i));
    }
}

// One timed pass over this rank's region. Returns the wall-clock seconds of
// the slowest rank (barrier-bracketed, so every rank measures the same span).
double timed_pass(Group& g, File& f, const BenchConfig& cfg, bool write, bool sync_blocks,
                  std::vector<std::uint8_t>& buf) {
    Region r = rank_region(g, cfg.total_bytes);
    g.barrier();
    auto t0 = Clock::now();
    for (std::int64_t off = 0; off < r.len; off += cfg.block_bytes) {
        if (write) {
            f.write_at(r.start + off, buf.data(), 0, cfg.block_bytes, ElementType::Byte);
            if (sync_blocks) f.sync();
        } else {
            f.read_at(r.start + off, buf.data(), 0, cfg.block_bytes, ElementType::Byte);
        }
    }
    g.barrier();
    auto t1 = Clock::now();
    return elapsed_seconds(t0, t1);
}

double element_pass(Group& g, File& f, const BenchConfig& cfg, std::int64_t sample_bytes) {
    Region r = rank_region(g, cfg.total_bytes);
    std::int64_t n = std::min(sample_bytes, r.len) / 4;
    std::vector<std::uint8_t> word(4);
    g.barrier();
    auto t0 = Clock::now();
    for (std::int64_t i = 0; i < n; ++i) {
        f.read_at(r.start + i * 4, word.data(), 0, 4, ElementType::Byte);
    }
    g.barrier();
    auto t1 = Clock::now();
    return elapsed_seconds(t0, t1);
}

}  // namespace

void bench_validate(const BenchConfig& cfg) {
    if (cfg.reps < 1) {
        throw IoError(ErrorClass::BackendFailure, "repetitions must be >= 1");
    }
    if (cfg.total_bytes <= 0 || cfg.block_bytes <= 0) {
        throw IoError(ErrorClass::BackendFailure, "sizes must be positive");
    }
    if (cfg.file.empty()) {
        throw IoError(ErrorClass::BackendFailure, "benchmark file path is required");
    }
    if (!cfg.run_write && !cfg.run_read && !cfg.per_element) {
        throw IoError(ErrorClass::BackendFailure, "nothing to run");
    }
}

std::vector<PhaseResult> bench_run_rank(Group& group, const BenchConfig& cfg) {
    bench_validate(cfg);
    if (cfg.total_bytes % (cfg.block_bytes * group.size()) != 0) {
        throw IoError(ErrorClass::BackendFailure,
                      "total bytes must be a multiple of block bytes x np");
    }

    std::vector<PhaseResult> results;
    auto record = [&](const char* direction, bool sync, std::int64_t bytes, double secs) {
        if (group.rank() != 0) return;
        PhaseResult pr;
        pr.direction = direction;
        pr.sync = sync;
        pr.strategy = cfg.strategy;
        pr.bytes = bytes;
        pr.seconds = secs;
        pr.mbps = (secs > 0) ? (static_cast<double>(bytes) / 1e6) / secs : 0.0;
        results.push_back(pr);
    };

    for (int rep = 0; rep < cfg.reps; ++rep) {
        File f = File::open(group, cfg.file, amode::RDWR | amode::CREATE, {}, cfg.strategy);
        f.set_size(0);
        std::vector<std::uint8_t> buf(cfg.block_bytes);
        Region r = rank_region(group, cfg.total_bytes);
        fill_pattern(buf, group.rank(), r.start);

        bool file_filled = false;
        if (cfg.run_write && cfg.run_plain) {
            record("write", false, cfg.total_bytes, timed_pass(group, f, cfg, true, false, buf));
            file_filled = true;
        }
        if (cfg.run_read && cfg.run_plain) {
            if (!file_filled) {
                timed_pass(group, f, cfg, true, false, buf);  // untimed prefill
                file_filled = true;
            }
            record("read", false, cfg.total_bytes, timed_pass(group, f, cfg, false, false, buf));
        }
        if (cfg.run_write && cfg.run_sync) {
            record("write", true, cfg.total_bytes, timed_pass(group, f, cfg, true, true, buf));
            file_filled = true;
        }
        if (cfg.run_read && cfg.run_sync) {
            if (!file_filled) {
                timed_pass(group, f, cfg, true, true, buf);
                file_filled = true;
            }
            record("read", true, cfg.total_bytes, timed_pass(group, f, cfg, false, false, buf));
        }
        if (cfg.per_element) {
            if (!file_filled) {
                timed_pass(group, f, cfg, true, false, buf);
                file_filled = true;
            }
            std::int64_t sample = std::min(cfg.element_sample_bytes,
                                           cfg.total_bytes / group.size()) /
                                  4 * 4;
            std::int64_t all_sampled = sample * group.size();
            record("read_element", false, all_sampled,
                   element_pass(group, f, cfg, sample));
        }

        f.close();
        if (!cfg.keep) {
            if (group.rank() == 0) File::remove(cfg.file);
            group.barrier();
        }
    }
    return results;
}

std::string bench_csv(const std::vector<PhaseResult>& results) {
    std::ostringstream out;
    out << "strategy,direction,sync,bytes,seconds,mbps\n";
    for (const auto& r : results) {
        char line[256];
        std::snprintf(line, sizeof(line), "%s,%s,%s,%lld,%.6f,%.3f\n",
                      strategy_name(r.strategy), r.direction.c_str(),
                      r.sync ? "on" : "off", static_cast<long long>(r.bytes), r.seconds,
                      r.mbps);
        out << line;
    }
    return out.str();
}

std::string bench_table(const std::vector<PhaseResult>& results) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %-14s %-5s %12s %10s %12s\n", "strategy",
                  "direction", "sync", "bytes", "seconds", "MB/s");
    out << line;
    for (const auto& r : results) {
        std::snprintf(line, sizeof(line), "%-12s %-14s %-5s %12lld %10.4f %12.2f\n",
                      strategy_name(r.strategy), r.direction.c_str(),
                      r.sync ? "on" : "off", static_cast<long long>(r.bytes), r.seconds,
                      r.mbps);
        out << line;
    }
    return out.str();
}

int bench_smoke_rank(Group& group, const std::string& file, Strategy strategy) {
    constexpr std::int64_t kTotal = 1024;
    const std::int64_t block = kTotal / group.size();
    const std::int64_t used = block * group.size();

    File f = File::open(group, file,
                        amode::RDWR | amode::CREATE | amode::DELETE_ON_CLOSE, {}, strategy);
    f.set_size(0);
    std::vector<std::uint8_t> buf(block);
    fill_pattern(buf, group.rank(), 0);
    f.seek(group.rank() * block, Whence::Set);
    f.write_all(buf.data(), 0, block, ElementType::Byte);
    f.sync();
    group.barrier();
    f.sync();

    std::vector<std::uint8_t> all(used);
    f.read_at(0, all.data(), 0, used, ElementType::Byte);
    int failures = 0;
    for (std::int64_t i = 0; i < used; ++i) {
        std::uint8_t expect = fill_byte(static_cast<int>(i / block), i % block);
        if (all[i] != expect) {
            if (failures == 0) {
                std::fprintf(stderr,
                             "rank %d: smoke mismatch at byte %lld: expected %02x got %02x\n",
                             group.rank(), static_cast<long long>(i), expect, all[i]);
            }
            ++failures;
        }
    }
    f.close();
    return failures == 0 ? 0 : 1;
}

}  // namespace pario
