#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "factorkit/array_io.hpp"
#include "factorkit/checkpoint.hpp"
#include "factorkit/errors.hpp"
#include "factorkit/factorize.hpp"
#include "factorkit/rng.hpp"

namespace factorkit {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(::testing::TempDir()) / ("fk_ckpt_" + name);
    fs::remove_all(p);
    return p;
}

Checkpoint sample(Method method, std::size_t rank, std::size_t blocks) {
    Rng rng(9);
    Checkpoint c{method, rank, blocks, {}};
    for (const char* name : {"fc0", "fc1"}) {
        const DenseMatrix w = rng.gaussian_matrix(12, 8);
        c.layers.push_back({name, project(w, method, rank, blocks)});
    }
    return c;
}

TEST(FactorArrays, RoundTripEveryMethod) {
    Rng rng(1);
    const DenseMatrix w = rng.gaussian_matrix(12, 8);
    for (Method m : {Method::dense, Method::low_rank, Method::block_lr, Method::monarch}) {
        const Factorization f = project(w, m, 2, 4);
        const auto arrays = factor_arrays(f);
        std::vector<DenseMatrix> mats;
        for (const auto& [suffix, a] : arrays) mats.push_back(a);
        const Factorization g = factorization_from_arrays(m, 12, 8, 2, 4, mats);
        EXPECT_EQ(method_of(g), m);
        EXPECT_EQ(max_abs_difference(reconstruct(f), reconstruct(g)), 0.0) << method_name(m);
    }
}

TEST(FactorArrays, ShapesFollowLayout) {
    Rng rng(2);
    const DenseMatrix w = rng.gaussian_matrix(12, 8);
    const auto bl = factor_arrays(project(w, Method::block_lr, 2, 4));
    EXPECT_EQ(bl[0].second.rows(), 4u * 4u * 3u);
    EXPECT_EQ(bl[0].second.cols(), 2u);
    EXPECT_EQ(bl[1].second.rows(), 4u * 4u * 2u);
    EXPECT_EQ(bl[1].second.cols(), 2u);
    const auto mo = factor_arrays(project(w, Method::monarch, 2, 4));
    EXPECT_EQ(mo[0].second.rows(), 12u);
    EXPECT_EQ(mo[0].second.cols(), 8u);
    EXPECT_EQ(mo[1].second.rows(), 32u);
    EXPECT_EQ(mo[1].second.cols(), 2u);
}

TEST(FactorArrays, RejectsWrongShapes) {
    const std::vector<DenseMatrix> bad{DenseMatrix(12, 3), DenseMatrix(8, 2)};
    EXPECT_THROW(factorization_from_arrays(Method::low_rank, 12, 8, 2, 1, bad), FormatError);
    EXPECT_THROW(factorization_from_arrays(Method::dense, 12, 8, 0, 1, bad), FormatError);
    const std::vector<DenseMatrix> lr{DenseMatrix(12, 2), DenseMatrix(8, 2)};
    EXPECT_THROW(factorization_from_arrays(Method::monarch, 12, 8, 2, 5, lr), FormatError);
}

TEST(Checkpoint, WriteReadRoundTrip) {
    for (Method m : {Method::dense, Method::low_rank, Method::block_lr, Method::monarch}) {
        const fs::path dir = scratch(std::string(method_name(m)));
        const Checkpoint c = sample(m, m == Method::dense ? 0 : 2, 4);
        write_checkpoint(dir, c, R"({"params": 7})", std::vector<std::string>{R"({"error": 0.5})", "{}"});
        const Checkpoint back = read_checkpoint(dir);
        EXPECT_EQ(back.method, m);
        EXPECT_EQ(back.rank, c.rank);
        ASSERT_EQ(back.layers.size(), 2u);
        for (std::size_t i = 0; i < 2; ++i) {
            EXPECT_EQ(back.layers[i].name, c.layers[i].name);
            EXPECT_EQ(max_abs_difference(reconstruct(back.layers[i].weight), reconstruct(c.layers[i].weight)), 0.0);
        }
        std::ifstream in(dir / "manifest.json");
        const auto j = nlohmann::json::parse(in);
        EXPECT_EQ(j["method"], method_name(m));
        EXPECT_EQ(j["params"], 7);
        EXPECT_EQ(j["layers"][0]["error"], 0.5);
        EXPECT_EQ(j["layers"][1]["rows"], 12);
        EXPECT_EQ(j["layers"][1]["files"].size(), m == Method::dense ? 1u : 2u);
    }
}

TEST(Checkpoint, RejectsBadNamesAndMixedMethods) {
    Checkpoint c = sample(Method::low_rank, 2, 1);
    c.layers[0].name = "../x";
    EXPECT_THROW(write_checkpoint(scratch("badname"), c), ArgumentError);
    c = sample(Method::low_rank, 2, 1);
    c.layers[1].weight = DenseMatrix(12, 8);
    EXPECT_THROW(write_checkpoint(scratch("mixed"), c), ArgumentError);
}

TEST(Checkpoint, ReadErrors) {
    EXPECT_THROW(read_checkpoint(scratch("missing")), IoError);

    const fs::path dir = scratch("corrupt");
    write_checkpoint(dir, sample(Method::low_rank, 2, 1));
    { std::ofstream(dir / "manifest.json") << R"({"method": "low_rank", "rank": 3, "blocks": 1, "layers": [)"; }
    EXPECT_THROW(read_checkpoint(dir), FormatError);

    { std::ofstream(dir / "manifest.json") << R"({"method": "low_rank", "rank": 3, "blocks": 1, "layers": [
        {"name": "fc0", "rows": 12, "cols": 8, "files": ["fc0.u.fkt", "fc0.v.fkt"]}]})"; }
    EXPECT_THROW(read_checkpoint(dir), FormatError);

    { std::ofstream(dir / "manifest.json") << R"({"method": "low_rank", "rank": 2, "blocks": 1, "layers": [
        {"name": "fc0", "rows": 12, "cols": 8, "files": ["fc0.u.fkt", "gone.fkt"]}]})"; }
    EXPECT_THROW(read_checkpoint(dir), IoError);

    { std::ofstream(dir / "manifest.json") << R"({"method": "tucker", "rank": 2, "blocks": 1, "layers": []})"; }
    EXPECT_THROW(read_checkpoint(dir), FormatError);
}

}  // namespace
}  // namespace factorkit
