#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"
#include "texlat/dataset.hpp"
#include "texlat/error.hpp"
#include "texlat/formats.hpp"

using namespace texlat;
namespace fs = std::filesystem;

namespace {

const PssParams kParams{1, 2, 3};

PssVector random_vector(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    PssVector v{kParams, std::vector<double>(pss_dim(kParams))};
    for (auto& x : v.values) x = dist(rng);
    return v;
}

template <class F>
std::string error_of(F&& f) {
    try {
        f();
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "texlat_test_formats" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_pgm(const fs::path& p, std::size_t side, std::uint64_t seed) {
    save_pgm(testing::filtered_noise(side, seed, 1), p);
}

} // namespace

TEST_CASE("statistic vector file round trip") {
    const auto v = random_vector(1);
    std::stringstream buf;
    save_pss(v, buf);
    const auto back = load_pss(buf);
    CHECK(back.params == v.params);
    CHECK(back.values == v.values);

    std::string bytes = buf.str();
    bytes[1] = 'Q';
    CHECK(error_of([&] { std::istringstream s(bytes); load_pss(s); }).find("corrupt container") != std::string::npos);
    bytes = buf.str();
    bytes[4] = 9;
    CHECK(error_of([&] { std::istringstream s(bytes); load_pss(s); }).find("version mismatch") != std::string::npos);
    bytes = buf.str();
    CHECK(error_of([&] { std::istringstream s(bytes.substr(0, bytes.size() - 1)); load_pss(s); }).find("truncated") != std::string::npos);
}

TEST_CASE("statistic vector csv") {
    const auto v = random_vector(2);
    std::ostringstream out;
    write_pss_csv(v, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "name,value");
    std::getline(in, line);
    CHECK(line.rfind("C1.mean,", 0) == 0);
    CHECK(std::stod(line.substr(8)) == v.values[0]);
}

TEST_CASE("shortest double text round trips") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.99999999) == "0.99999999");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("archive round trip") {
    FeatureArchive a{kParams, {}};
    for (std::uint64_t i = 0; i < 5; ++i) a.records.push_back({"cls/img" + std::to_string(i) + ".pgm", i < 3 ? "cls" : "other", random_vector(i).values});
    std::stringstream buf;
    save_archive(a, buf);
    CHECK(buf.str().size() == 4 + 4 + 12 + 16 + 5 * (128 + 64 + 8 * pss_dim(kParams)));
    const auto back = load_archive(buf);
    CHECK(back.params == a.params);
    REQUIRE(back.records.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(back.records[i].id == a.records[i].id);
        CHECK(back.records[i].label == a.records[i].label);
        CHECK(back.records[i].values == a.records[i].values);
    }
    CHECK(back.vectors()[4].values == a.records[4].values);

    std::string bytes = buf.str();
    bytes[0] = 'X';
    CHECK(error_of([&] { std::istringstream s(bytes); load_archive(s); }).find("corrupt container") != std::string::npos);
    bytes = buf.str();
    CHECK(error_of([&] { std::istringstream s(bytes.substr(0, 200)); load_archive(s); }).find("truncated") != std::string::npos);

    a.records[0].id = std::string(200, 'x');
    std::ostringstream sink;
    CHECK_THROWS_AS(save_archive(a, sink), UsageError);
}

TEST_CASE("code file round trip") {
    TextureCode c{kParams, 64, {1.5, -2.0, 3.25}};
    std::stringstream buf;
    save_code(c, buf);
    const auto back = load_code(buf);
    CHECK(back.params == c.params);
    CHECK(back.side == 64);
    CHECK(back.values == c.values);
    std::string old = buf.str();
    old[4] = 0;
    const auto msg = error_of([&] { std::istringstream s(old); load_code(s); });
    CHECK(msg.find("version 0") != std::string::npos);
    CHECK(msg.find("version 1") != std::string::npos);
}

TEST_CASE("file magic") {
    const auto dir = fresh_dir("magic");
    save_pss(random_vector(4), dir / "v.pssv");
    CHECK(file_magic(dir / "v.pssv") == "PSSV");
    std::ofstream(dir / "short") << "ab";
    CHECK(file_magic(dir / "short").empty());
    CHECK_THROWS_AS(file_magic(dir / "missing"), DataError);
}

TEST_CASE("class-folder dataset split") {
    const auto dir = fresh_dir("ds");
    for (const char* cls : {"bark", "sand"}) {
        fs::create_directories(dir / cls);
        for (int i = 3; i >= 0; --i) write_pgm(dir / cls / ("img" + std::to_string(i) + ".pgm"), 16, static_cast<std::uint64_t>(i));
    }
    std::ofstream(dir / "bark" / "notes.txt") << "ignored";
    DatasetManifest m = open_dataset(dir);
    m.train_per_class = 3;
    m.eval_per_class = 1;
    const auto split = split_dataset(m);
    REQUIRE(split.train.size() == 6);
    REQUIRE(split.eval.size() == 2);
    CHECK(split.train[0].id == "bark/img0.pgm");
    CHECK(split.train[2].id == "bark/img2.pgm");
    CHECK(split.eval[0].id == "bark/img3.pgm");
    CHECK(split.eval[1].label == "sand");

    m.train_per_class = 0;
    m.eval_per_class = 0;
    CHECK(split_dataset(m).train.size() == 8);
    m.train_per_class = 4;
    m.eval_per_class = 1;
    CHECK(error_of([&] { split_dataset(m); }).find("bark") != std::string::npos);

    fs::create_directories(dir / "empty");
    m.train_per_class = 0;
    m.eval_per_class = 0;
    CHECK(error_of([&] { split_dataset(m); }).find("empty") != std::string::npos);
}

TEST_CASE("json manifest") {
    const auto dir = fresh_dir("manifest");
    fs::create_directories(dir / "data" / "a");
    for (int i = 0; i < 3; ++i) write_pgm(dir / "data" / "a" / ("x" + std::to_string(i) + ".pgm"), 16, static_cast<std::uint64_t>(i));
    std::ofstream(dir / "m.json") << R"({"root": "data", "classes": ["a"], "train": 2, "eval": 1, "size": 32, "mean": 100, "std": 20})";
    const auto m = open_dataset(dir / "m.json");
    CHECK(m.root == dir / "data");
    CHECK(m.classes == std::vector<std::string>{"a"});
    CHECK(m.preprocess.size == 32);
    CHECK(m.preprocess.mean == 100);
    const auto split = split_dataset(m);
    CHECK(split.train.size() == 2);
    CHECK(split.eval.size() == 1);
    std::ofstream(dir / "bad.json") << "{\"classes\": 3}";
    CHECK_THROWS_AS(load_manifest(dir / "bad.json"), DataError);
}

TEST_CASE("preprocess") {
    const auto img = testing::random_image(36, 5, 80, 10);
    const auto out = preprocess(img, Preprocess{16, 127, 40});
    CHECK(out.width() == 16);
    CHECK(std::abs(mean(out.pixels()) - 127) < 1e-9);
    CHECK(std::abs(std::sqrt(variance(out.pixels())) - 40) < 1e-9);
    const auto wide = preprocess(Image(20, 10, 3.0), Preprocess{8, 127, 40});
    CHECK(wide == Image(8, 8, 127.0));
}
