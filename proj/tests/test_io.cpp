#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "bfl/io.hpp"
#include "bfl/simulation.hpp"

using namespace bfl;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("bfl_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path file(const std::string& name, const std::string& contents) const {
        std::ofstream(path_ / name) << contents;
        return path_ / name;
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

} // namespace

TEST(SplitFields, CommaAndWhitespace) {
    const auto a = io::split_fields("1, 2 ,3");
    ASSERT_EQ(a.size(), 3u);
    EXPECT_EQ(a[1], "2");
    const auto b = io::split_fields("  -1   0.5\t2e3 ");
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[2], "2e3");
}

TEST(LoadUcr, ToyFileDefaultMap) {
    TempDir t;
    const auto p = t.file("toy.txt", "-1 0.1 0.2 0.3\n1 1.5 -2 3\n");
    const Dataset d = io::load_ucr(p);
    EXPECT_EQ(d.n(), 2);
    EXPECT_EQ(d.p(), 3);
    EXPECT_EQ(d.y, Eigen::Vector2d(0, 1));
    EXPECT_EQ(d.X(1, 1), -2.0);
}

TEST(LoadUcr, CommaDelimitedAndCustomMap) {
    TempDir t;
    const auto p = t.file("toy.csv", "1,0.1,0.2\n-1,1.5,-2\n-1,0,0\n");
    const Dataset d = io::load_ucr(p, io::parse_label_map("-1:1,1:0"));
    EXPECT_EQ(d.y, Eigen::Vector3d(0, 1, 1));
}

TEST(LoadUcr, Errors) {
    TempDir t;
    try {
        io::load_ucr(t.file("ragged.txt", "1 0.1 0.2\n-1 0.3\n"));
        FAIL();
    } catch (const parse_error& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
    EXPECT_THROW(io::load_ucr(t.file("unmapped.txt", "1 0.1\n2 0.3\n")), parse_error);
    EXPECT_THROW(io::load_ucr(t.file("text.txt", "1 0.1\n-1 abc\n")), parse_error);
    EXPECT_THROW(io::load_ucr(t.path() / "missing.txt"), parse_error);
    EXPECT_THROW(io::parse_label_map("1:2"), parse_error);
    EXPECT_THROW(io::parse_label_map("x"), parse_error);
}

TEST(LoadMatrix, ToyFile) {
    TempDir t;
    const auto p = t.file("m.csv", "a,b,y\n1,2,0\n3,4,1\n5,6,1\n");
    const auto m = io::load_matrix(p);
    EXPECT_EQ(m.data.n(), 3);
    EXPECT_EQ(m.data.p(), 2);
    EXPECT_EQ(m.feature_names, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(m.data.y, Eigen::Vector3d(0, 1, 1));
    const auto first = io::load_matrix(t.file("f.csv", "y,a,b\n0,1,2\n1,3,4\n"), 0);
    EXPECT_EQ(first.data.X(1, 0), 3.0);
    EXPECT_EQ(first.data.y, Eigen::Vector2d(0, 1));
}

TEST(LoadMatrix, Standardization) {
    TempDir t;
    std::mt19937_64 eng(1);
    std::normal_distribution<double> nd(3.0, 7.0);
    std::string text;
    for (int i = 0; i < 50; ++i) text += std::to_string(nd(eng)) + " " + std::to_string(nd(eng)) + " " + (i % 2 ? "1" : "0") + "\n";
    const auto m = io::load_matrix(t.file("s.txt", text), -1, true);
    for (Eigen::Index j = 0; j < 2; ++j) {
        const auto col = m.data.X.col(j);
        EXPECT_LT(std::abs(col.mean()), 1e-10);
        const double sd = std::sqrt((col.array() - col.mean()).square().sum() / 49.0);
        EXPECT_NEAR(sd, 1.0, 1e-10);
    }
    EXPECT_EQ(m.standardization.center.size(), 2);
}

TEST(LoadMatrix, Errors) {
    TempDir t;
    EXPECT_THROW(io::load_matrix(t.file("c.csv", "1,5,0\n2,5,1\n"), -1, true), domain_error);
    EXPECT_THROW(io::load_matrix(t.file("r.csv", "1,2,0\n2,1\n")), parse_error);
    EXPECT_THROW(io::load_matrix(t.file("y.csv", "1,2,3\n")), parse_error);
    EXPECT_THROW(io::load_matrix(t.file("one.csv", "1\n0\n")), dimension_error);
    EXPECT_THROW(io::load_matrix(t.file("col.csv", "1,0\n"), 5), dimension_error);
}

TEST(MatrixRoundTrip, BitIdentical) {
    TempDir t;
    CaseSpec spec;
    spec.n = 40;
    spec.test_size = 5;
    auto [train, test] = generate_dataset(spec, 0);
    train.X(0, 0) = 1e-300;
    train.X(1, 1) = -123456789.123456789;
    train.X(2, 2) = 0.1 + 0.2;
    io::write_matrix(t.path() / "rt.csv", train);
    const auto back = io::load_matrix(t.path() / "rt.csv");
    EXPECT_EQ(back.data.X, train.X);
    EXPECT_EQ(back.data.y, train.y);
    EXPECT_FALSE(fs::exists(t.path() / "rt.csv.tmp"));
}

TEST(AtomicWrite, ReplacesContents) {
    TempDir t;
    io::atomic_write(t.path() / "sub" / "f.txt", "one");
    io::atomic_write(t.path() / "sub" / "f.txt", "two");
    std::ifstream in(t.path() / "sub" / "f.txt");
    std::string s;
    in >> s;
    EXPECT_EQ(s, "two");
}

TEST(FormatDouble, ShortestRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-310, 6.02214076e23}) {
        double back = 0;
        ASSERT_TRUE(io::parse_double(io::format_double(v), back));
        EXPECT_EQ(back, v);
    }
    EXPECT_EQ(io::format_double(0.5), "0.5");
}
