#include "factorkit/checkpoint.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "factorkit/array_io.hpp"
#include "factorkit/errors.hpp"

namespace factorkit {

namespace {

using ordered_json = nlohmann::ordered_json;

bool valid_name(const std::string& name) {
    if (name.empty() || name == "." || name == "..") return false;
    for (unsigned char c : name)
        if (!(std::isalnum(c) || c == '_' || c == '-' || c == '.')) return false;
    return true;
}

void expect_shape(const DenseMatrix& a, std::size_t rows, std::size_t cols, const char* what) {
    if (a.rows() != rows || a.cols() != cols)
        throw FormatError(std::string(what) + " is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                              ", expected " + std::to_string(rows) + "x" + std::to_string(cols),
                          0);
}

ordered_json parse_object(std::string_view text, const char* what) {
    if (text.empty()) return ordered_json::object();
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ArgumentError(std::string(what) + " must be a JSON object");
    return j;
}

}  // namespace

std::vector<std::pair<std::string, DenseMatrix>> factor_arrays(const Factorization& f) {
    std::vector<std::pair<std::string, DenseMatrix>> out;
    if (const auto* w = std::get_if<DenseMatrix>(&f)) {
        out.emplace_back("w", *w);
    } else if (const auto* lr = std::get_if<LowRankFactors>(&f)) {
        out.emplace_back("u", lr->u);
        out.emplace_back("v", lr->v);
    } else if (const auto* bl = std::get_if<BlockLowRankFactors>(&f)) {
        const auto& ld = bl->left.dims();
        const auto& rd = bl->right.dims();
        const auto l = bl->left.data();
        const auto r = bl->right.data();
        out.emplace_back("left", DenseMatrix(ld[0] * ld[1] * ld[2], ld[3], {l.begin(), l.end()}));
        out.emplace_back("right", DenseMatrix(rd[0] * rd[1] * rd[2], rd[3], {r.begin(), r.end()}));
    } else {
        const auto& mf = std::get<MonarchFactors>(f);
        std::vector<double> l, r;
        for (const auto& b : mf.left_blocks) l.insert(l.end(), b.data().begin(), b.data().end());
        for (const auto& b : mf.right_blocks) r.insert(r.end(), b.data().begin(), b.data().end());
        const std::size_t inner = mf.blocks * mf.rank();
        out.emplace_back("left", DenseMatrix(mf.rows(), inner, std::move(l)));
        out.emplace_back("right", DenseMatrix(mf.blocks * inner, mf.block_cols(), std::move(r)));
    }
    return out;
}

Factorization factorization_from_arrays(Method method, std::size_t m, std::size_t n, std::size_t rank,
                                        std::size_t blocks, std::span<const DenseMatrix> arrays) {
    const std::size_t want = method == Method::dense ? 1 : 2;
    if (arrays.size() != want)
        throw FormatError(std::string(method_name(method)) + " layer needs " + std::to_string(want) + " arrays", 0);
    if (method == Method::dense) {
        expect_shape(arrays[0], m, n, "w");
        return arrays[0];
    }
    if (rank == 0) throw FormatError("factorized layer with rank 0", 0);
    if (method == Method::low_rank) {
        expect_shape(arrays[0], m, rank, "u");
        expect_shape(arrays[1], n, rank, "v");
        return LowRankFactors{arrays[0], arrays[1]};
    }
    if (blocks == 0 || m % blocks != 0 || n % blocks != 0)
        throw FormatError("blocks " + std::to_string(blocks) + " do not divide " + std::to_string(m) + "x" +
                              std::to_string(n),
                          0);
    const std::size_t b = blocks, o = m / b, p = n / b;
    if (method == Method::block_lr) {
        expect_shape(arrays[0], b * b * o, rank, "left");
        expect_shape(arrays[1], b * b * rank, p, "right");
        BlockLowRankFactors f{BlockGrid::square(m, n, b), BlockTensor(b, b, o, rank), BlockTensor(b, b, rank, p)};
        std::copy(arrays[0].data().begin(), arrays[0].data().end(), f.left.data().begin());
        std::copy(arrays[1].data().begin(), arrays[1].data().end(), f.right.data().begin());
        return f;
    }
    const std::size_t inner = b * rank;
    expect_shape(arrays[0], m, inner, "left");
    expect_shape(arrays[1], b * inner, p, "right");
    MonarchFactors f{b, {}, {}, StridePermutation(m, o), StridePermutation(b * inner, b)};
    for (std::size_t i = 0; i < b; ++i) {
        const auto l = arrays[0].data().subspan(i * o * inner, o * inner);
        const auto r = arrays[1].data().subspan(i * inner * p, inner * p);
        f.left_blocks.emplace_back(o, inner, std::vector<double>(l.begin(), l.end()));
        f.right_blocks.emplace_back(inner, p, std::vector<double>(r.begin(), r.end()));
    }
    return f;
}

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& c, std::string_view manifest_extra,
                      std::span<const std::string> layer_extra) {
    if (!layer_extra.empty() && layer_extra.size() != c.layers.size())
        throw ArgumentError("write_checkpoint: one layer extra per layer");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    ordered_json j;
    j["method"] = method_name(c.method);
    j["rank"] = c.rank;
    j["blocks"] = c.blocks;
    j["layers"] = ordered_json::array();
    for (std::size_t i = 0; i < c.layers.size(); ++i) {
        const auto& layer = c.layers[i];
        if (!valid_name(layer.name)) throw ArgumentError("write_checkpoint: bad layer name \"" + layer.name + "\"");
        if (method_of(layer.weight) != c.method)
            throw ArgumentError("write_checkpoint: layer " + layer.name + " is not " +
                                std::string(method_name(c.method)));
        ordered_json lj{{"name", layer.name}, {"rows", rows_of(layer.weight)}, {"cols", cols_of(layer.weight)}};
        lj["files"] = ordered_json::array();
        for (const auto& [suffix, array] : factor_arrays(layer.weight)) {
            const std::string file = layer.name + "." + suffix + ".fkt";
            write_array(dir / file, array);
            lj["files"].push_back(file);
        }
        if (!layer_extra.empty()) lj.update(parse_object(layer_extra[i], "layer extra"));
        j["layers"].push_back(std::move(lj));
    }
    j.update(parse_object(manifest_extra, "manifest extra"));

    std::ofstream out(dir / std::string(kManifestName), std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("cannot write " + (dir / std::string(kManifestName)).string());
}

Checkpoint read_checkpoint(const std::filesystem::path& dir) {
    const auto manifest_path = dir / std::string(kManifestName);
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw IoError("cannot read " + manifest_path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(manifest_path.string() + ": " + e.what(), e.byte == 0 ? 0 : e.byte - 1);
    }
    Checkpoint c;
    try {
        c.method = parse_method(j.at("method").get<std::string>());
        c.rank = j.at("rank").get<std::size_t>();
        c.blocks = j.at("blocks").get<std::size_t>();
        for (const auto& lj : j.at("layers")) {
            std::string name = lj.at("name").get<std::string>();
            if (!valid_name(name)) throw FormatError("bad layer name \"" + name + "\"", 0);
            std::vector<DenseMatrix> arrays;
            for (const auto& file : lj.at("files")) {
                const std::string f = file.get<std::string>();
                if (!valid_name(f)) throw FormatError("bad file name \"" + f + "\"", 0);
                arrays.push_back(read_array(dir / f));
            }
            c.layers.push_back({std::move(name),
                                factorization_from_arrays(c.method, lj.at("rows").get<std::size_t>(),
                                                          lj.at("cols").get<std::size_t>(), c.rank, c.blocks,
                                                          arrays)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(manifest_path.string() + ": " + e.what(), 0);
    } catch (const ArgumentError& e) {
        throw FormatError(manifest_path.string() + ": " + e.what(), 0);
    } catch (const FormatError& e) {
        throw FormatError(manifest_path.string() + ": " + e.detail(), e.offset());
    }
    return c;
}

}  // namespace factorkit
