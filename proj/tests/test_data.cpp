#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>

#include <png.h>

#include "clut/data.hpp"
#include "clut/errors.hpp"
#include "clut/png_io.hpp"
#include "clut/rng.hpp"
#include "clut/synth.hpp"
#include "test_util.hpp"

using namespace clut;
using namespace clut::testutil;

namespace {

void write_solid_png(const std::filesystem::path& p, int h, int w, double value) {
    write_png(Image(h, w, value), p);
}

// Test-only 16-bit grayscale writer (the library writer is 8-bit RGB).
void write_png16(const std::filesystem::path& path, int h, int w, std::uint16_t value) {
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<std::size_t>(w) * 2);
    for (int x = 0; x < w; ++x) {
        row[x * 2] = static_cast<png_byte>(value >> 8);
        row[x * 2 + 1] = static_cast<png_byte>(value & 0xff);
    }
    for (int y = 0; y < h; ++y) png_write_row(png, row.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

} // namespace

TEST_CASE("png round trip and normalization") {
    TempDir tmp("png");
    Rng rng(1);

    SUBCASE("8-bit values come back exactly on the 8-bit grid") {
        Image img = quantize8(random_image(9, 7, rng));
        const auto p = tmp.path() / "rt.png";
        write_png(img, p);
        const Image back = read_png(p);
        CHECK(max_abs_diff(img, back) == 0.0);
    }

    SUBCASE("value 255 decodes to exactly 1.0") {
        const auto p = tmp.path() / "white.png";
        write_solid_png(p, 2, 2, 1.0);
        const Image img = read_png(p);
        for (double v : img.data) CHECK(v == 1.0);
    }

    SUBCASE("16-bit gray decodes against 65535") {
        const auto p = tmp.path() / "gray16.png";
        write_png16(p, 2, 3, 65535);
        const Image img = read_png(p);
        CHECK(img.height == 2);
        CHECK(img.width == 3);
        for (double v : img.data) CHECK(v == 1.0);
        write_png16(p, 2, 3, 32768);
        const Image half = read_png(p);
        for (double v : half.data) CHECK(v == doctest::Approx(32768.0 / 65535.0));
    }

    SUBCASE("garbage file raises IoError naming the file") {
        const auto p = tmp.path() / "garbage.png";
        std::ofstream(p) << "this is not a png";
        CHECK_THROWS_WITH_AS(read_png(p), doctest::Contains("garbage.png"), IoError);
    }
}

TEST_CASE("scan_dataset dirs layout") {
    TempDir tmp("scan");
    std::filesystem::create_directories(tmp.path() / "input");
    std::filesystem::create_directories(tmp.path() / "target");
    for (const char* stem : {"a", "b", "c"}) {
        write_solid_png(tmp.path() / "input" / (std::string(stem) + ".png"), 4, 4, 0.25);
        write_solid_png(tmp.path() / "target" / (std::string(stem) + ".png"), 4, 4, 0.75);
    }
    write_solid_png(tmp.path() / "input" / "orphan.png", 4, 4, 0.5);

    const PairedDataset ds = scan_dataset(tmp.path(), "dirs");
    CHECK(ds.size() == 3);
    CHECK(ds.ids == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(ds.warnings.size() == 1);
    CHECK(ds.warnings[0].find("orphan.png") != std::string::npos);

    SUBCASE("checksum tracks the pair list") {
        const std::uint64_t before = ds.manifest_checksum;
        const PairedDataset again = scan_dataset(tmp.path(), "dirs");
        CHECK(again.manifest_checksum == before);
        write_solid_png(tmp.path() / "input" / "d.png", 4, 4, 0.1);
        write_solid_png(tmp.path() / "target" / "d.png", 4, 4, 0.9);
        const PairedDataset changed = scan_dataset(tmp.path(), "dirs");
        CHECK(changed.size() == 4);
        CHECK(changed.manifest_checksum != before);
    }

    SUBCASE("missing directories fail loudly") {
        TempDir empty("scan_empty");
        CHECK_THROWS_AS(scan_dataset(empty.path(), "dirs"), DataError);
        CHECK_THROWS_AS(scan_dataset(empty.path() / "nope", "dirs"), DataError);
    }

    SUBCASE("duplicate stems are rejected") {
        write_solid_png(tmp.path() / "input" / "a.PNG", 4, 4, 0.3);
        // same stem 'a' from a different extension
        std::filesystem::rename(tmp.path() / "input" / "a.PNG",
                                tmp.path() / "input" / "a.png2");
        CHECK_THROWS_AS(scan_dataset(tmp.path(), "dirs"), DataError);
    }
}

TEST_CASE("scan_dataset manifest layout") {
    TempDir tmp("manifest");

    SUBCASE("large split counts are honored") {
        const auto mf = tmp.path() / "train.tsv";
        {
            std::ofstream out(mf);
            out << "# training split\n";
            for (int i = 0; i < 4502; ++i)
                out << "input/img" << i << ".png\ttarget/img" << i << ".png\n";
        }
        const PairedDataset ds = scan_dataset(mf, "manifest");
        CHECK(ds.size() == 4502);
    }

    SUBCASE("missing tab is a parse error with a line number") {
        const auto mf = tmp.path() / "bad.tsv";
        std::ofstream(mf) << "input/a.png target/a.png\n";
        CHECK_THROWS_WITH_AS(scan_dataset(mf, "manifest"), doctest::Contains(":1:"),
                             ParseError);
    }

    SUBCASE("duplicate inputs are rejected") {
        const auto mf = tmp.path() / "dup.tsv";
        std::ofstream(mf) << "input/a.png\ttarget/a.png\ninput/a.png\ttarget/b.png\n";
        CHECK_THROWS_AS(scan_dataset(mf, "manifest"), ParseError);
    }

    SUBCASE("empty manifest is a data error") {
        const auto mf = tmp.path() / "empty.tsv";
        std::ofstream(mf) << "# nothing\n";
        CHECK_THROWS_AS(scan_dataset(mf, "manifest"), DataError);
    }

    CHECK_THROWS_AS(scan_dataset(tmp.path(), "zip"), ConfigError);
}

TEST_CASE("preprocess") {
    SUBCASE("downscaling a constant image keeps the constant") {
        const Image big(512, 512, 0.5);
        const Image out = preprocess(big, 256);
        CHECK(out.height == 256);
        CHECK(out.width == 256);
        for (double v : out.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("matching size passes through unchanged") {
        Rng rng(2);
        const Image img = random_image(256, 256, rng);
        const Image out = preprocess(img, 256);
        CHECK(max_abs_diff(out, img) == 0.0);
    }

    SUBCASE("idempotence") {
        Rng rng(3);
        const Image img = random_image(100, 80, rng);
        const Image once = preprocess(img, 64);
        const Image twice = preprocess(once, 64);
        CHECK(max_abs_diff(once, twice) <= 1e-7);
    }

    SUBCASE("area flag averages exactly") {
        Image img(4, 4);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x)
                for (int c = 0; c < 3; ++c) img.at(y, x, c) = (y < 2) == (x < 2) ? 1.0 : 0.0;
        const Image out = preprocess(img, 2, true);
        CHECK(out.at(0, 0, 0) == 1.0);
        CHECK(out.at(0, 1, 0) == 0.0);
        CHECK(out.at(1, 0, 0) == 0.0);
        CHECK(out.at(1, 1, 0) == 1.0);
    }
}

TEST_CASE("plan_batches") {
    SUBCASE("ten pairs at batch eight split 8 + 2") {
        const auto batches = plan_batches(10, 8, 1, 0);
        REQUIRE(batches.size() == 2);
        CHECK(batches[0].size() == 8);
        CHECK(batches[1].size() == 2);
    }

    SUBCASE("every index appears exactly once per epoch") {
        const auto batches = plan_batches(23, 5, 9, 4);
        std::set<std::size_t> seen;
        for (const auto& b : batches)
            for (std::size_t i : b) CHECK(seen.insert(i).second);
        CHECK(seen.size() == 23);
    }

    SUBCASE("same key reproduces the order, epochs differ") {
        const auto a = plan_batches(100, 10, 7, 3);
        const auto b = plan_batches(100, 10, 7, 3);
        CHECK(a == b);
        std::set<std::vector<std::vector<std::size_t>>> orders;
        for (int epoch = 0; epoch < 10; ++epoch)
            orders.insert(plan_batches(100, 10, 7, epoch));
        CHECK(orders.size() == 10);
    }

    CHECK_THROWS_AS(plan_batches(5, 0, 1, 1), InvalidArgument);
}

TEST_CASE("load_batch reads and preprocesses pairs") {
    TempDir tmp("loadbatch");
    write_synthetic_dataset(tmp.path(), 3, 24, 5, 9);
    const PairedDataset ds = scan_dataset(tmp.path(), "dirs");
    REQUIRE(ds.size() == 3);
    const Batch batch = load_batch(ds, {0, 2}, 24);
    CHECK(batch.inputs.size() == 2);
    CHECK(batch.ids[0] == "0000");
    CHECK(batch.ids[1] == "0002");
    CHECK(batch.inputs[0].height == 24);
    CHECK(batch.targets[1].width == 24);

    SUBCASE("unreadable pair surfaces as DataError") {
        std::ofstream(tmp.path() / "input" / "0001.png") << "broken";
        const PairedDataset ds2 = scan_dataset(tmp.path(), "dirs");
        CHECK_THROWS_AS(load_batch(ds2, {1}, 24), DataError);
    }
}

TEST_CASE("synthetic pairs are the grade LUT applied to the input") {
    const auto pairs = synthetic_pairs(2, 24, 11, 9);
    const Lut3D grade = synthetic_grade_lut(9);
    for (const auto& [input, target] : pairs) {
        const Image expected = apply_lut(grade, input);
        CHECK(max_abs_diff(expected, target) == 0.0);
    }
}
