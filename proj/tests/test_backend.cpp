#include <doctest.h>

#include <fstream>
#include <random>

#include "pario/backend.hpp"
#include "support.hpp"

using namespace pario;
using namespace testsupport;

namespace {

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

const Strategy kStrategies[] = {Strategy::Positional, Strategy::Mapped};

}  // namespace

TEST_CASE("open failures") {
    TempDir dir;
    for (auto s : kStrategies) {
        CAPTURE(strategy_name(s));
        SUBCASE("missing file without CREATE") {
            try {
                backend_open(dir.file("missing.bin"), amode::RDONLY, s);
                FAIL("expected NoSuchFile");
            } catch (const IoError& e) {
                CHECK(e.cls() == ErrorClass::NoSuchFile);
            }
        }
        SUBCASE("directory path") {
            try {
                backend_open(dir.path().string(), amode::RDWR, s);
                FAIL("expected BackendFailure");
            } catch (const IoError& e) {
                CHECK(e.cls() == ErrorClass::BackendFailure);
            }
        }
    }
}

TEST_CASE("round trip, short reads and gap zeros") {
    TempDir dir;
    for (auto s : kStrategies) {
        CAPTURE(strategy_name(s));
        auto path = dir.file(std::string("rt_") + strategy_name(s));
        auto b = backend_open(path, amode::RDWR | amode::CREATE, s);

        std::vector<std::uint8_t> data(16);
        for (int i = 0; i < 16; ++i) data[i] = static_cast<std::uint8_t>(i + 1);
        b->pwrite(0, data.data(), data.size());
        CHECK(b->size() == 16);

        std::vector<std::uint8_t> back(16, 0);
        CHECK(b->pread(0, back.data(), 16) == 16);
        CHECK(back == data);

        SUBCASE("read crossing EOF is short") {
            std::vector<std::uint8_t> tail(16, 0xEE);
            CHECK(b->pread(8, tail.data(), 16) == 8);
            for (int i = 0; i < 8; ++i) CHECK(tail[i] == data[8 + i]);
        }
        SUBCASE("read at and past EOF returns zero bytes") {
            std::uint8_t x;
            CHECK(b->pread(16, &x, 1) == 0);
            CHECK(b->pread(1000, &x, 1) == 0);
        }
        SUBCASE("write past EOF grows the file, gap reads as zero") {
            std::uint8_t tag = 0xAB;
            b->pwrite(31, &tag, 1);
            CHECK(b->size() == 32);
            std::vector<std::uint8_t> all(32);
            CHECK(b->pread(0, all.data(), 32) == 32);
            for (int i = 16; i < 31; ++i) CHECK(all[i] == 0);
            CHECK(all[31] == 0xAB);
        }
        SUBCASE("pread is pure") {
            std::vector<std::uint8_t> first(16), second(16);
            b->pread(4, first.data(), 8);
            b->pread(4, second.data(), 8);
            CHECK(first == second);
        }
        b->close();
    }
}

TEST_CASE("access mode enforcement") {
    TempDir dir;
    spit(dir.file("ro.bin"), {1, 2, 3, 4});
    for (auto s : kStrategies) {
        CAPTURE(strategy_name(s));
        SUBCASE("pwrite on a read-only backend") {
            auto b = backend_open(dir.file("ro.bin"), amode::RDONLY, s);
            std::uint8_t x = 9;
            try {
                b->pwrite(0, &x, 1);
                FAIL("expected AccessModeViolation");
            } catch (const IoError& e) {
                CHECK(e.cls() == ErrorClass::AccessModeViolation);
            }
        }
        SUBCASE("pread on a write-only backend") {
            auto b = backend_open(dir.file("ro.bin"), amode::WRONLY, s);
            std::uint8_t x;
            try {
                b->pread(0, &x, 1);
                FAIL("expected AccessModeViolation");
            } catch (const IoError& e) {
                CHECK(e.cls() == ErrorClass::AccessModeViolation);
            }
        }
    }
}

TEST_CASE("flush and close behavior") {
    TempDir dir;
    for (auto s : kStrategies) {
        CAPTURE(strategy_name(s));
        auto path = dir.file(std::string("fl_") + strategy_name(s));
        auto b = backend_open(path, amode::RDWR | amode::CREATE, s);
        b->flush();  // clean flush is a no-op

        std::vector<std::uint8_t> data{10, 20, 30};
        b->pwrite(0, data.data(), data.size());
        b->flush();
        // visible through an independent descriptor
        CHECK(slurp(path) == data);

        b->close();
        CHECK_THROWS_AS(b->flush(), IoError);
        b->close();  // idempotent
    }
}

TEST_CASE("truncate and preallocation") {
    TempDir dir;
    for (auto s : kStrategies) {
        CAPTURE(strategy_name(s));
        auto path = dir.file(std::string("tr_") + strategy_name(s));
        auto b = backend_open(path, amode::RDWR | amode::CREATE, s);
        std::vector<std::uint8_t> data(40, 0x5A);
        b->pwrite(0, data.data(), data.size());
        b->truncate(16);
        CHECK(b->size() == 16);
        b->ensure_size(8);  // never shrinks
        CHECK(b->size() == 16);
        b->ensure_size(64);
        CHECK(b->size() == 64);
        std::vector<std::uint8_t> all(64);
        CHECK(b->pread(0, all.data(), 64) == 64);
        for (int i = 0; i < 16; ++i) CHECK(all[i] == 0x5A);
        for (int i = 16; i < 64; ++i) CHECK(all[i] == 0);
        b->close();
    }
}

TEST_CASE("cross-strategy visibility") {
    TempDir dir;
    auto path = dir.file("cross.bin");
    auto pos = backend_open(path, amode::RDWR | amode::CREATE, Strategy::Positional);
    std::vector<std::uint8_t> data{9, 8, 7, 6, 5};
    pos->pwrite(3, data.data(), data.size());
    pos->flush();

    auto mapped = backend_open(path, amode::RDONLY, Strategy::Mapped);
    std::vector<std::uint8_t> back(5);
    CHECK(mapped->pread(3, back.data(), 5) == 5);
    CHECK(back == data);
}

TEST_CASE("mapped window remap across chunk boundaries") {
    TempDir dir;
    auto path = dir.file("window.bin");
    auto b = backend_open(path, amode::RDWR | amode::CREATE, Strategy::Mapped);
    const std::int64_t boundary = 16ll << 20;
    std::vector<std::uint8_t> data(16);
    for (int i = 0; i < 16; ++i) data[i] = static_cast<std::uint8_t>(0xC0 + i);
    b->pwrite(boundary - 8, data.data(), data.size());  // straddles the chunk edge
    CHECK(b->size() == boundary + 8);

    std::vector<std::uint8_t> back(16);
    CHECK(b->pread(boundary - 8, back.data(), 16) == 16);
    CHECK(back == data);

    // far jump forces a fresh window
    std::uint8_t x = 0;
    CHECK(b->pread(0, &x, 1) == 1);
    CHECK(x == 0);
    b->close();
}

// Differential property: the two strategies must be byte-identical for any
// operation sequence. (The acceptance suite runs the full 100-sequence form.)
TEST_CASE("strategy differential on randomized op sequences") {
    TempDir dir;
    std::mt19937_64 rng(2024);
    for (int seq = 0; seq < 25; ++seq) {
        CAPTURE(seq);
        auto ppath = dir.file("diff_p_" + std::to_string(seq));
        auto mpath = dir.file("diff_m_" + std::to_string(seq));
        auto p = backend_open(ppath, amode::RDWR | amode::CREATE, Strategy::Positional);
        auto m = backend_open(mpath, amode::RDWR | amode::CREATE, Strategy::Mapped);

        for (int op = 0; op < 40; ++op) {
            int kind = static_cast<int>(rng() % 5);
            std::int64_t off = static_cast<std::int64_t>(rng() % 2048);
            std::size_t len = 1 + rng() % 64;
            if (kind <= 1) {
                std::vector<std::uint8_t> data(len);
                for (auto& c : data) c = static_cast<std::uint8_t>(rng());
                p->pwrite(off, data.data(), len);
                m->pwrite(off, data.data(), len);
            } else if (kind == 2) {
                std::vector<std::uint8_t> a(len, 0), b2(len, 0);
                std::size_t na = p->pread(off, a.data(), len);
                std::size_t nb = m->pread(off, b2.data(), len);
                CHECK(na == nb);
                CHECK(a == b2);
            } else if (kind == 3) {
                std::int64_t sz = static_cast<std::int64_t>(rng() % 2048);
                p->truncate(sz);
                m->truncate(sz);
            } else {
                p->flush();
                m->flush();
            }
            CHECK(p->size() == m->size());
        }
        p->close();
        m->close();
        CHECK(slurp(ppath) == slurp(mpath));
    }
}
