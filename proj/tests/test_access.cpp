#include <doctest.h>

#include <array>
#include <fstream>

#include "pario/file.hpp"
#include "support.hpp"

using namespace pario;
using namespace testsupport;

namespace {

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("explicit-offset transfers") {
    TempDir dir;
    SUBCASE("atomic writer/reader pair sees all ten fives") {
        run_group(2, [&](Group& g) {
            File f = File::open(g, dir.file("ex1"), amode::RDWR | amode::CREATE);
            f.set_view(0, ElementType::Int32, ElementType::Int32, "native");
            f.set_atomicity(true);
            if (g.rank() == 0) {
                std::vector<std::int32_t> a(10, 5);
                auto st = f.write_at(0, a.data(), 0, 10, ElementType::Int32);
                CHECK(st.count == 10);
            }
            g.barrier();
            if (g.rank() == 1) {
                std::vector<std::int32_t> b(10, 0);
                auto st = f.read_at(0, b.data(), 0, 10, ElementType::Int32);
                CHECK(st.count == 10);
                for (auto v : b) CHECK(v == 5);
            }
            f.close();
        });
    }
    SUBCASE("zero-count read leaves the buffer untouched") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("zc"), amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> buf(8, 0xAA);
            auto st = f.read_at(0, buf.data(), 0, 0, ElementType::Byte);
            CHECK(st.count == 0);
            for (auto v : buf) CHECK(v == 0xAA);
            f.close();
        });
    }
    SUBCASE("read over the end of a 6-element file moves 2 of 10") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("eof"), amode::RDWR | amode::CREATE);
            f.set_view(0, ElementType::Int32, ElementType::Int32, "native");
            std::vector<std::int32_t> six{1, 2, 3, 4, 5, 6};
            f.write_at(0, six.data(), 0, 6, ElementType::Int32);
            std::vector<std::int32_t> buf(10, -1);
            auto st = f.read_at(4, buf.data(), 0, 10, ElementType::Int32);
            CHECK(st.count == 2);
            CHECK(buf[0] == 5);
            CHECK(buf[1] == 6);
            f.close();
        });
    }
    SUBCASE("etype mismatch against the view is UnsupportedView") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("mismatch"), amode::RDWR | amode::CREATE);
            f.set_view(0, ElementType::Int32, ElementType::Int32, "native");
            std::vector<double> buf(4);
            try {
                f.read_at(0, buf.data(), 0, 4, ElementType::Float64);
                FAIL("expected UnsupportedView");
            } catch (const IoError& e) {
                CHECK(e.cls() == ErrorClass::UnsupportedView);
            }
            f.close();
        });
    }
    SUBCASE("negative arguments are BadOffset") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("neg"), amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> buf(8);
            CHECK_THROWS_AS(f.read_at(-1, buf.data(), 0, 4, ElementType::Byte), IoError);
            CHECK_THROWS_AS(f.read_at(0, buf.data(), -1, 4, ElementType::Byte), IoError);
            CHECK_THROWS_AS(f.read_at(0, buf.data(), 0, -4, ElementType::Byte), IoError);
            f.close();
        });
    }
    SUBCASE("write on a read-only handle is AccessModeViolation") {
        std::ofstream(dir.file("rofile")) << "abcd";
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("rofile"), amode::RDONLY);
            std::uint8_t x = 1;
            try {
                f.write_at(0, &x, 0, 1, ElementType::Byte);
                FAIL("expected AccessModeViolation");
            } catch (const IoError& e) {
                CHECK(e.cls() == ErrorClass::AccessModeViolation);
            }
            f.close();
        });
    }
}

TEST_CASE("collective explicit-offset transfers") {
    TempDir dir;
    SUBCASE("four ranks write disjoint regions in one collective call") {
        constexpr int np = 4;
        constexpr std::int64_t k = 16;
        auto path = dir.file("atall");
        run_group(np, [&](Group& g) {
            File f = File::open(g, path, amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> block(k);
            for (std::int64_t i = 0; i < k; ++i) {
                block[i] = pattern_byte(g.rank(), i);
            }
            auto st = f.write_at_all(g.rank() * k, block.data(), 0, k, ElementType::Byte);
            CHECK(st.count == k);
            f.sync();
            g.barrier();
            f.sync();
            std::vector<std::uint8_t> all(np * k);
            auto rst = f.read_at_all(0, all.data(), 0, np * k, ElementType::Byte);
            CHECK(rst.count == np * k);
            for (std::int64_t i = 0; i < np * k; ++i) {
                CHECK(all[i] == pattern_byte(static_cast<int>(i / k), i % k));
            }
            f.close();
        });
    }
    SUBCASE("size-one collective equals the noncollective form") {
        auto path_a = dir.file("one_coll");
        auto path_b = dir.file("one_plain");
        run_group(1, [&](Group& g) {
            std::vector<std::uint8_t> data(64);
            for (int i = 0; i < 64; ++i) data[i] = pattern_byte(7, i);
            File fa = File::open(g, path_a, amode::RDWR | amode::CREATE);
            fa.write_at_all(3, data.data(), 0, 64, ElementType::Byte);
            fa.close();
            File fb = File::open(g, path_b, amode::RDWR | amode::CREATE);
            fb.write_at(3, data.data(), 0, 64, ElementType::Byte);
            fb.close();
        });
        CHECK(slurp(path_a) == slurp(path_b));
    }
    SUBCASE("per-rank counts may differ, including zero") {
        constexpr int np = 4;
        const std::array<std::int64_t, np> counts{3, 5, 2, 0};
        const std::array<std::int64_t, np> starts{0, 8, 20, 30};
        auto path = dir.file("varied");
        run_group(np, [&](Group& g) {
            File f = File::open(g, path, amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> block(8);
            for (int i = 0; i < 8; ++i) block[i] = pattern_byte(g.rank() + 40, i);
            auto st = f.write_at_all(starts[g.rank()], block.data(), 0, counts[g.rank()],
                                     ElementType::Byte);
            CHECK(st.count == counts[g.rank()]);
            f.close();
        });
        auto bytes = slurp(path);
        for (int r = 0; r < np; ++r) {
            for (std::int64_t i = 0; i < counts[r]; ++i) {
                CHECK(bytes[starts[r] + i] == pattern_byte(r + 40, i));
            }
        }
    }
}

TEST_CASE("nonblocking explicit-offset transfers") {
    TempDir dir;
    SUBCASE("iwrite_at then wait matches the blocking form byte for byte") {
        auto path_a = dir.file("ib_a");
        auto path_b = dir.file("ib_b");
        run_group(1, [&](Group& g) {
            std::vector<std::uint8_t> data(256);
            for (int i = 0; i < 256; ++i) data[i] = pattern_byte(3, i);
            File fa = File::open(g, path_a, amode::RDWR | amode::CREATE);
            auto req = fa.iwrite_at(5, data.data(), 0, 256, ElementType::Byte);
            auto st = req.wait();
            CHECK(st.count == 256);
            fa.close();
            File fb = File::open(g, path_b, amode::RDWR | amode::CREATE);
            fb.write_at(5, data.data(), 0, 256, ElementType::Byte);
            fb.close();
        });
        CHECK(slurp(path_a) == slurp(path_b));
    }
    SUBCASE("request lifecycle: test before, consume, error after") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("life"), amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> data(1 << 16, 0x33);
            auto req = f.iwrite_at(0, data.data(), 0, data.size(), ElementType::Byte);
            // polling may or may not see completion, but must never error
            (void)req.test();
            TransferStatus st{};
            try {
                st = req.wait();
            } catch (const IoError& e) {
                // the poll above may already have consumed a fast completion
                CHECK(e.cls() == ErrorClass::HandleClosed);
                f.close();
                return;
            }
            CHECK(st.count == static_cast<std::int64_t>(data.size()));
            try {
                (void)req.wait();
                FAIL("expected consumed-request error");
            } catch (const IoError& e) {
                CHECK(e.cls() == ErrorClass::HandleClosed);
            }
            CHECK_THROWS_AS((void)req.test(), IoError);
            f.close();
        });
    }
    SUBCASE("test loop reaches the same status as wait") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("poll"), amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> data(128, 0x44);
            auto req = f.iwrite_at(0, data.data(), 0, 128, ElementType::Byte);
            std::optional<TransferStatus> st;
            while (!(st = req.test())) {
            }
            CHECK(st->count == 128);
            f.close();
        });
    }
    SUBCASE("a dropped request is completed internally at close") {
        auto path = dir.file("dropped");
        run_group(1, [&](Group& g) {
            File f = File::open(g, path, amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> data(4096, 0x77);
            (void)f.iwrite_at(0, data.data(), 0, 4096, ElementType::Byte);
            f.close();  // blocks until the write landed
        });
        auto bytes = slurp(path);
        REQUIRE(bytes.size() == 4096);
        for (auto b : bytes) CHECK(b == 0x77);
    }
}

TEST_CASE("individual-pointer transfers") {
    TempDir dir;
    SUBCASE("pointer advances by the transferred count") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("adv"), amode::RDWR | amode::CREATE);
            f.set_view(0, ElementType::Int32, ElementType::Int32, "native");
            std::vector<std::int32_t> v(5, 9);
            f.write(v.data(), 0, 5, ElementType::Int32);
            CHECK(f.get_position() == 5);
            f.close();
        });
    }
    SUBCASE("1 KiB write then seek(0) read round-trips") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("kib"), amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> out(1024), in(1024, 0);
            for (int i = 0; i < 1024; ++i) out[i] = pattern_byte(11, i);
            f.write(out.data(), 0, 1024, ElementType::Byte);
            f.seek(0, Whence::Set);
            auto st = f.read(in.data(), 0, 1024, ElementType::Byte);
            CHECK(st.count == 1024);
            CHECK(in == out);
            f.close();
        });
    }
    SUBCASE("read at end of file transfers nothing and leaves the pointer") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("eofp"), amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> v(16, 1);
            f.write(v.data(), 0, 16, ElementType::Byte);
            auto st = f.read(v.data(), 0, 8, ElementType::Byte);
            CHECK(st.count == 0);
            CHECK(f.get_position() == 16);
            f.close();
        });
    }
    SUBCASE("buffer offset addresses a sub-array") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("sub"), amode::RDWR | amode::CREATE);
            f.set_view(0, ElementType::Int32, ElementType::Int32, "native");
            std::vector<std::int32_t> v{100, 200, 300, 400};
            f.write(v.data(), 2, 2, ElementType::Int32);  // writes 300, 400
            f.seek(0, Whence::Set);
            std::vector<std::int32_t> in(2, 0);
            f.read(in.data(), 0, 2, ElementType::Int32);
            CHECK(in[0] == 300);
            CHECK(in[1] == 400);
            f.close();
        });
    }
}

TEST_CASE("collective individual-pointer transfers build the 1 KiB file") {
    TempDir dir;
    constexpr int np = 4;
    constexpr std::int64_t block = 256;
    auto path = dir.file("coll1k");
    run_group(np, [&](Group& g) {
        File f = File::open(g, path, amode::RDWR | amode::CREATE);
        std::vector<std::uint8_t> data(block);
        for (std::int64_t i = 0; i < block; ++i) data[i] = pattern_byte(g.rank() + 60, i);
        f.seek(g.rank() * block, Whence::Set);
        auto st = f.write_all(data.data(), 0, block, ElementType::Byte);
        CHECK(st.count == block);
        CHECK(f.get_position() == g.rank() * block + block);
        f.close();
    });
    auto bytes = slurp(path);
    REQUIRE(bytes.size() == np * block);
    for (std::int64_t i = 0; i < np * block; ++i) {
        CHECK(bytes[i] == pattern_byte(static_cast<int>(i / block) + 60, i % block));
    }
}

TEST_CASE("nonblocking individual-pointer transfers") {
    TempDir dir;
    SUBCASE("1 KiB nonblocking round trip") {
        run_group(2, [&](Group& g) {
            File f = File::open(g, dir.file("nb1k"),
                                amode::RDWR | amode::CREATE | amode::DELETE_ON_CLOSE);
            const std::int64_t block = 512;
            std::vector<std::uint8_t> out(block), in(block, 0);
            for (std::int64_t i = 0; i < block; ++i) {
                out[i] = pattern_byte(g.rank() + 80, i);
            }
            f.seek(g.rank() * block, Whence::Set);
            auto w = f.iwrite(out.data(), 0, block, ElementType::Byte);
            CHECK(f.get_position() == g.rank() * block + block);  // advance at initiation
            CHECK(w.wait().count == block);
            f.seek(g.rank() * block, Whence::Set);
            auto r = f.iread(in.data(), 0, block, ElementType::Byte);
            CHECK(r.wait().count == block);
            CHECK(in == out);
            f.close();
        });
    }
    SUBCASE("zero-count request is immediately done") {
        run_group(1, [&](Group& g) {
            File f = File::open(g, dir.file("zcr"), amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> buf(4);
            auto req = f.iread(buf.data(), 0, 0, ElementType::Byte);
            CHECK(f.get_position() == 0);
            auto st = req.test();
            REQUIRE(st.has_value());
            CHECK(st->count == 0);
            f.close();
        });
    }
    SUBCASE("two outstanding writes to disjoint ranges both land") {
        auto path = dir.file("twoout");
        run_group(1, [&](Group& g) {
            File f = File::open(g, path, amode::RDWR | amode::CREATE);
            std::vector<std::uint8_t> a(512, 0xA1), b(512, 0xB2);
            auto r1 = f.iwrite(a.data(), 0, 512, ElementType::Byte);
            auto r2 = f.iwrite(b.data(), 0, 512, ElementType::Byte);
            CHECK(r1.wait().count == 512);
            CHECK(r2.wait().count == 512);
            f.close();
        });
        auto bytes = slurp(path);
        REQUIRE(bytes.size() == 1024);
        for (int i = 0; i < 512; ++i) CHECK(bytes[i] == 0xA1);
        for (int i = 512; i < 1024; ++i) CHECK(bytes[i] == 0xB2);
    }
}

TEST_CASE("seek and position") {
    TempDir dir;
    run_group(1, [&](Group& g) {
        File f = File::open(g, dir.file("seek"), amode::RDWR | amode::CREATE);
        f.set_view(0, ElementType::Int32, ElementType::Int32, "native");
        std::vector<std::int32_t> ten(10, 1);
        f.write_at(0, ten.data(), 0, 10, ElementType::Int32);

        f.seek(5, Whence::Set);
        CHECK(f.get_position() == 5);
        f.seek(-2, Whence::Cur);
        CHECK(f.get_position() == 3);
        f.seek(-1, Whence::End);  // ten etypes in the file
        CHECK(f.get_position() == 9);
        f.seek(2, Whence::End);
        CHECK(f.get_position() == 12);  // past EOF is fine

        try {
            f.seek(-1, Whence::Set);
            FAIL("expected BadOffset");
        } catch (const IoError& e) {
            CHECK(e.cls() == ErrorClass::BadOffset);
        }
        try {
            f.seek(-100, Whence::Cur);
            FAIL("expected BadOffset");
        } catch (const IoError& e) {
            CHECK(e.cls() == ErrorClass::BadOffset);
        }

        SUBCASE("saved position restores exactly") {
            std::mt19937_64 rng(5);
            for (int i = 0; i < 50; ++i) {
                FileOffset saved = f.get_position();
                std::vector<std::int32_t> tmp(4, 7);
                switch (rng() % 3) {
                    case 0: f.write(tmp.data(), 0, 1 + rng() % 3, ElementType::Int32); break;
                    case 1: f.seek(rng() % 32, Whence::Set); break;
                    default: (void)f.read(tmp.data(), 0, rng() % 4, ElementType::Int32);
                }
                f.seek(saved, Whence::Set);
                CHECK(f.get_position() == saved);
            }
        }
        f.close();
    });
}

TEST_CASE("byte-offset arithmetic") {
    TempDir dir;
    run_group(1, [&](Group& g) {
        File f = File::open(g, dir.file("bo"), amode::RDWR | amode::CREATE);
        SUBCASE("spec examples") {
            f.set_view(0, ElementType::Int32, ElementType::Int32, "native");
            CHECK(f.get_byte_offset(10) == 40);
            CHECK(f.get_byte_offset(0) == 0);
            f.set_view(8, ElementType::Float64, ElementType::Float64, "native");
            CHECK(f.get_byte_offset(3) == 32);
            CHECK(f.get_byte_offset(0) == 8);
            f.set_view(8, ElementType::Int64, ElementType::Int64, "native");
            CHECK(f.get_byte_offset(0) == 8);
        }
        SUBCASE("formula holds over sampled views") {
            std::mt19937_64 rng(17);
            const ElementType kinds[] = {ElementType::Byte, ElementType::Int32,
                                         ElementType::Int64, ElementType::Float32,
                                         ElementType::Float64};
            for (int i = 0; i < 200; ++i) {
                FileOffset disp = static_cast<FileOffset>(rng() % 512);
                ElementType e = kinds[rng() % 5];
                f.set_view(disp, e, e, "native");
                FileOffset o = static_cast<FileOffset>(rng() % 100000);
                CHECK(f.get_byte_offset(o) == disp + o * extent_of(e));
            }
        }
        SUBCASE("negative offset rejected") {
            CHECK_THROWS_AS((void)f.get_byte_offset(-1), IoError);
        }
        f.close();
    });
}
