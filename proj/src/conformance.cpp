#include "pario/conformance.hpp"

#include <cstdio>
#include <vector>

#include "pario/file.hpp"

namespace pario {

namespace {

constexpr std::int64_t kTotal = 1024;  // 1 KiB payload per the test plan

std::uint8_t pattern(int rank, std::int64_t i) {
    return static_cast<std::uint8_t>((i * 37 + rank * 101 + 5) & 0xFF);
}

int report_diff(Group& g, const char* what, const std::vector<std::uint8_t>& got,
                const std::vector<std::uint8_t>& expect) {
    for (std::size_t i = 0; i < expect.size(); ++i) {
        if (got[i] != expect[i]) {
            std::fprintf(stderr,
                         "rank %d: %s: first byte diff at %zu: expected %02x got %02x\n",
                         g.rank(), what, i, expect[i], got[i]);
            return 1;
        }
    }
    return 0;
}

std::vector<std::uint8_t> whole_file_oracle(int np, std::int64_t block) {
    std::vector<std::uint8_t> expect(np * block);
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(expect.size()); ++i) {
        expect[i] = pattern(static_cast<int>(i / block), i % block);
    }
    return expect;
}

// Collective 1 KiB cycle: every rank writes its region with writeAll at its
// individual pointer, then reads the whole file back.
int suite_coll(Group& g, const std::string& path) {
    const std::int64_t block = kTotal / g.size();
    File f = File::open(g, path, amode::RDWR | amode::CREATE | amode::DELETE_ON_CLOSE);
    f.set_size(0);

    std::vector<std::uint8_t> buf(block);
    for (std::int64_t i = 0; i < block; ++i) buf[i] = pattern(g.rank(), i);
    f.seek(g.rank() * block, Whence::Set);
    f.write_all(buf.data(), 0, block, ElementType::Byte);

    f.sync();
    g.barrier();
    f.sync();

    std::vector<std::uint8_t> got(g.size() * block);
    auto st = f.read_at(0, got.data(), 0, static_cast<std::int64_t>(got.size()),
                        ElementType::Byte);
    int rc = 0;
    if (st.count != static_cast<std::int64_t>(got.size())) {
        std::fprintf(stderr, "rank %d: coll: short read %lld of %zu\n", g.rank(),
                     static_cast<long long>(st.count), got.size());
        rc = 1;
    }
    rc |= report_diff(g, "coll", got, whole_file_oracle(g.size(), block));
    f.close();
    return rc;
}

// Nonblocking 1 KiB cycle: iwrite then iread with explicit waits.
int suite_async(Group& g, const std::string& path) {
    const std::int64_t block = kTotal / g.size();
    File f = File::open(g, path, amode::RDWR | amode::CREATE | amode::DELETE_ON_CLOSE);
    f.set_size(0);

    std::vector<std::uint8_t> buf(block);
    for (std::int64_t i = 0; i < block; ++i) buf[i] = pattern(g.rank(), i);
    f.seek(g.rank() * block, Whence::Set);
    auto wreq = f.iwrite(buf.data(), 0, block, ElementType::Byte);
    auto wst = wreq.wait();
    int rc = 0;
    if (wst.count != block) {
        std::fprintf(stderr, "rank %d: async: iwrite moved %lld of %lld\n", g.rank(),
                     static_cast<long long>(wst.count), static_cast<long long>(block));
        rc = 1;
    }

    f.sync();
    g.barrier();
    f.sync();

    std::vector<std::uint8_t> got(g.size() * block);
    auto rreq = f.iread_at(0, got.data(), 0, static_cast<std::int64_t>(got.size()),
                           ElementType::Byte);
    auto rst = rreq.wait();
    if (rst.count != static_cast<std::int64_t>(got.size())) {
        std::fprintf(stderr, "rank %d: async: iread moved %lld of %zu\n", g.rank(),
                     static_cast<long long>(rst.count), got.size());
        rc = 1;
    }
    rc |= report_diff(g, "async", got, whole_file_oracle(g.size(), block));
    f.close();
    return rc;
}

// Atomic-mode cycle: set/get atomicity plus blocking write/read visibility
// between rank 0 and rank 1 across a barrier.
int suite_atomicity(Group& g, const std::string& path) {
    File f = File::open(g, path, amode::RDWR | amode::CREATE | amode::DELETE_ON_CLOSE);
    f.set_size(0);
    f.set_view(0, ElementType::Int32, ElementType::Int32, "native");

    int rc = 0;
    f.set_atomicity(true);
    if (!f.get_atomicity()) {
        std::fprintf(stderr, "rank %d: atomicity: get after set(true) returned false\n",
                     g.rank());
        rc = 1;
    }

    constexpr std::int64_t kCount = 10;
    if (g.rank() == 0) {
        std::vector<std::int32_t> a(kCount, 5);
        f.write_at(0, a.data(), 0, kCount, ElementType::Int32);
    }
    g.barrier();
    if (g.rank() == 1) {
        std::vector<std::int32_t> b(kCount, 0);
        auto st = f.read_at(0, b.data(), 0, kCount, ElementType::Int32);
        if (st.count != kCount) {
            std::fprintf(stderr, "rank 1: atomicity: short read %lld\n",
                         static_cast<long long>(st.count));
            rc = 1;
        }
        for (std::int64_t i = 0; i < kCount; ++i) {
            if (b[i] != 5) {
                std::fprintf(stderr,
                             "rank 1: atomicity: element %lld is %d, expected 5\n",
                             static_cast<long long>(i), b[i]);
                rc = 1;
                break;
            }
        }
    }
    g.barrier();

    f.set_atomicity(false);
    if (f.get_atomicity()) {
        std::fprintf(stderr, "rank %d: atomicity: get after set(false) returned true\n",
                     g.rank());
        rc = 1;
    }
    f.close();
    return rc;
}

// Pointer arithmetic: getPosition, getByteOffset and seek around a 1 KiB
// write-then-read cycle.
int suite_misc(Group& g, const std::string& path) {
    File f = File::open(g, path, amode::RDWR | amode::CREATE | amode::DELETE_ON_CLOSE);
    f.set_size(0);
    const std::int64_t disp = 16;
    f.set_view(disp, ElementType::Int32, ElementType::Int32, "native");

    int rc = 0;
    const std::int64_t n = kTotal / 4 / g.size();
    std::vector<std::int32_t> data(n);
    for (std::int64_t i = 0; i < n; ++i) {
        data[i] = static_cast<std::int32_t>(g.rank() * 100000 + i);
    }
    f.seek(g.rank() * n, Whence::Set);
    f.write(data.data(), 0, n, ElementType::Int32);

    if (f.get_position() != g.rank() * n + n) {
        std::fprintf(stderr, "rank %d: misc: position %lld, expected %lld\n", g.rank(),
                     static_cast<long long>(f.get_position()),
                     static_cast<long long>(g.rank() * n + n));
        rc = 1;
    }
    if (f.get_byte_offset(n) != disp + n * 4) {
        std::fprintf(stderr, "rank %d: misc: byte offset %lld, expected %lld\n", g.rank(),
                     static_cast<long long>(f.get_byte_offset(n)),
                     static_cast<long long>(disp + n * 4));
        rc = 1;
    }

    f.seek(-n, Whence::Cur);
    if (f.get_position() != g.rank() * n) {
        std::fprintf(stderr, "rank %d: misc: seek(CUR) landed at %lld\n", g.rank(),
                     static_cast<long long>(f.get_position()));
        rc = 1;
    }

    f.sync();
    g.barrier();
    f.sync();

    f.seek(0, Whence::End);
    if (f.get_position() != n * g.size()) {
        std::fprintf(stderr, "rank %d: misc: seek(END) landed at %lld, expected %lld\n",
                     g.rank(), static_cast<long long>(f.get_position()),
                     static_cast<long long>(n * g.size()));
        rc = 1;
    }

    std::vector<std::int32_t> got(n);
    f.seek(g.rank() * n, Whence::Set);
    auto st = f.read(got.data(), 0, n, ElementType::Int32);
    if (st.count != n) {
        std::fprintf(stderr, "rank %d: misc: short read %lld of %lld\n", g.rank(),
                     static_cast<long long>(st.count), static_cast<long long>(n));
        rc = 1;
    }
    for (std::int64_t i = 0; i < n; ++i) {
        if (got[i] != data[i]) {
            std::fprintf(stderr,
                         "rank %d: misc: element %lld is %d, expected %d\n", g.rank(),
                         static_cast<long long>(i), got[i], data[i]);
            rc = 1;
            break;
        }
    }
    f.close();
    return rc;
}

}  // namespace

Suite suite_from_name(const std::string& name) {
    if (name == "coll") return Suite::Coll;
    if (name == "async") return Suite::Async;
    if (name == "atomicity") return Suite::Atomicity;
    if (name == "misc") return Suite::Misc;
    throw IoError(ErrorClass::BackendFailure, "unknown suite '" + name + "'");
}

const char* suite_name(Suite s) {
    switch (s) {
        case Suite::Coll: return "coll";
        case Suite::Async: return "async";
        case Suite::Atomicity: return "atomicity";
        case Suite::Misc: return "misc";
    }
    return "?";
}

int conformance_run_rank(Group& group, Suite suite, const std::string& dir) {
    std::string path = dir + "/pario_conformance_" + suite_name(suite) + ".bin";
    int rc = 1;
    switch (suite) {
        case Suite::Coll: rc = suite_coll(group, path); break;
        case Suite::Async: rc = suite_async(group, path); break;
        case Suite::Atomicity: rc = suite_atomicity(group, path); break;
        case Suite::Misc: rc = suite_misc(group, path); break;
    }
    // Every rank learns the global verdict.
    auto votes = group.all_gather(rc);
    for (auto v : votes) {
        if (v != 0) rc = 1;
    }
    if (group.rank() == 0) {
        std::printf("suite %s: %s\n", suite_name(suite), rc == 0 ? "PASS" : "FAIL");
    }
    return rc;
}

}  // namespace pario
