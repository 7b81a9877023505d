// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "factorkit/bench.hpp"
#include "factorkit/errors.hpp"
#include "factorkit/experiment.hpp"
#include "factorkit/factorize.hpp"
#include "factorkit/model.hpp"
#include "factorkit/staged.hpp"
#include "factorkit/svd.hpp"
#include "grad_check.hpp"
#include "oracles.hpp"

using namespace factorkit;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool verbose = false;

void note(const std::string& s) {
    if (verbose) std::printf("      %s\n", s.c_str());
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

double frob_diff(const DenseMatrix& a, const DenseMatrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    return std::sqrt(s);
}

// Modified Gram-Schmidt on the columns.
DenseMatrix orthonormal_columns(DenseMatrix a) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) dot += a(i, k) * a(i, j);
            for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) -= dot * a(i, k);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) norm += a(i, j) * a(i, j);
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) /= norm;
    }
    return a;
}

// Row k·b + β of w goes to row β·(m/b) + k.
DenseMatrix stride_rows(const DenseMatrix& w, std::size_t b) {
    const std::size_t o = w.rows() / b;
    DenseMatrix out(w.rows(), w.cols());
    for (std::size_t beta = 0; beta < b; ++beta)
        for (std::size_t k = 0; k < o; ++k)
            for (std::size_t j = 0; j < w.cols(); ++j) out(beta * o + k, j) = w(k * b + beta, j);
    return out;
}

DenseMatrix unstride_rows(const DenseMatrix& x, std::size_t b) {
    const std::size_t o = x.rows() / b;
    DenseMatrix out(x.rows(), x.cols());
    for (std::size_t beta = 0; beta < b; ++beta)
        for (std::size_t k = 0; k < o; ++k)
            for (std::size_t j = 0; j < x.cols(); ++j) out(k * b + beta, j) = x(beta * o + k, j);
    return out;
}

bool same_parameters(const ToyModel& a, const ToyModel& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (method_of(a.layers[l].weight) != method_of(b.layers[l].weight)) return false;
        if (a.layers[l].bias != b.layers[l].bias) return false;
        const auto pa = parameter_spans(a.layers[l].weight);
        const auto pb = parameter_spans(b.layers[l].weight);
        if (pa.size() != pb.size()) return false;
        for (std::size_t t = 0; t < pa.size(); ++t)
            if (!std::equal(pa[t].begin(), pa[t].end(), pb[t].begin(), pb[t].end())) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

Outcome param_counts() {
    Rng rng(1001);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t b = 1 + rng.below(6), o = 1 + rng.below(10), p = 1 + rng.below(10);
        const std::size_t m = b * o, n = b * p;
        const std::size_t r = 1 + rng.below(std::min(o, p));
        const DenseMatrix w = rng.gaussian_matrix(m, n);
        const std::size_t lr = param_count(low_rank_project(w, r));
        const std::size_t bl = param_count(block_lr_project(w, BlockGrid::square(m, n, b), r));
        const std::size_t mo = param_count(monarch_project(w, b, r));
        if (lr != r * (m + n) || bl != b * r * (m + n) || mo != b * r * (m + n))
            return {false, fmt("m=%zu n=%zu b=%zu r=%zu: low-rank %zu block %zu monarch %zu", m, n, b, r, lr, bl, mo)};
    }
    return {true, "50 random shapes, exact"};
}

Outcome eckart_young() {
    Rng rng(2002);
    double worst_rel = 0.0, min_margin = INFINITY;
    std::size_t candidates = 0;
    for (int trial = 0; trial < 20; ++trial) {
        // r = 8 stays below min(m, n) so every tail is positive.
        const std::size_t m = 9 + rng.below(56), n = 9 + rng.below(40);
        const DenseMatrix w = rng.gaussian_matrix(m, n);
        const auto s = oracle::singular_values(w);
        for (std::size_t r : {1u, 2u, 4u, 8u}) {
            const LowRankFactors f = low_rank_project(w, r);
            const double err = frob_diff(w, oracle::triple_loop_matmul(f.u, transpose(f.v)));
            const double tail = oracle::tail(s, r);
            worst_rel = std::max(worst_rel, std::abs(err - tail) / tail);
            for (int c = 0; c < 200; ++c) {
                auto candidate = [&]() -> DenseMatrix {
                    if (c % 3 == 0)
                        return oracle::triple_loop_matmul(rng.gaussian_matrix(m, r), rng.gaussian_matrix(r, n, 0.3));
                    if (c % 3 == 1) {
                        // Best approximation inside a random r-dimensional column space.
                        const DenseMatrix q = orthonormal_columns(rng.gaussian_matrix(m, r));
                        return oracle::triple_loop_matmul(q, oracle::triple_loop_matmul(transpose(q), w));
                    }
                    const double eps = std::pow(10.0, -1.0 - static_cast<double>(c % 4));
                    DenseMatrix u = f.u, v = f.v;
                    for (double& x : u.data()) x += eps * rng.normal();
                    for (double& x : v.data()) x += eps * rng.normal();
                    return oracle::triple_loop_matmul(u, transpose(v));
                };
                const DenseMatrix cand = candidate();
                const double cerr = frob_diff(w, cand);
                ++candidates;
                min_margin = std::min(min_margin, cerr - err);
                if (err > cerr)
                    return {false, fmt("%zux%zu r=%zu: projection %.17g worse than candidate %.17g", m, n, r, err, cerr)};
            }
        }
    }
    const bool ok = worst_rel <= 1e-9;
    return {ok, fmt("%zu candidates, min margin %.3g, max |err - tail|/tail %.2e", candidates, min_margin, worst_rel)};
}

Outcome reduction_identity() {
    Rng rng(3003);
    double monarch_worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t m = 1 + rng.below(40), n = 1 + rng.below(40);
        const std::size_t r = 1 + rng.below(std::min(m, n));
        const DenseMatrix w = rng.gaussian_matrix(m, n);
        const DenseMatrix lr = reconstruct(low_rank_project(w, r));
        const BlockGrid grid = BlockGrid::square(m, n, 1);
        if (grid.b1 != 1 || grid.b2 != 1 || grid.o != m || grid.p != n) return {false, "unexpected grid"};
        if (!(reconstruct(block_lr_project(w, grid, r)) == lr))
            return {false, fmt("%zux%zu r=%zu: block LR on a 1x1 grid differs from low-rank", m, n, r)};
        monarch_worst = std::max(monarch_worst, max_abs_difference(reconstruct(monarch_project(w, 1, r)), lr));
    }
    return {monarch_worst <= 1e-12, fmt("30 shapes bit-identical; monarch b=1 max diff %.2e", monarch_worst)};
}

Outcome monarch_identity() {
    Rng rng(4004);
    std::size_t cases = 0;
    double worst_apply = 0.0;
    for (std::size_t b : {1u, 2u, 4u})
        for (std::size_t r : {1u, 2u})
            for (std::size_t m = b; m <= 24; m += b)
                for (std::size_t n = b; n <= 16; n += b) {
                    if (r > std::min(m / b, n / b)) continue;
                    const DenseMatrix w = rng.gaussian_matrix(m, n);
                    const MonarchFactors mf = monarch_project(w, b, r);
                    const DenseMatrix lhs = reconstruct(mf);
                    const DenseMatrix rhs = unstride_rows(
                        reconstruct(block_lr_project(stride_rows(w, b), BlockGrid::square(m, n, b), r)), b);
                    if (!(lhs == rhs))
                        return {false, fmt("%zux%zu b=%zu r=%zu: max diff %.3g", m, n, b, r,
                                           max_abs_difference(lhs, rhs))};
                    ++cases;
                    if (m == 24 && n == 16) {
                        const Factorization f = mf;
                        const DenseMatrix dense = oracle::monarch_dense(mf);
                        for (int v = 0; v < 50; ++v) {
                            const DenseMatrix x = rng.gaussian_matrix(n, 1);
                            const DenseMatrix want = oracle::triple_loop_matmul(dense, x);
                            const DenseMatrix got = factorkit::apply(f, x);
                            double scale = 1.0;
                            for (double y : want.data()) scale = std::max(scale, std::abs(y));
                            worst_apply = std::max(worst_apply, max_abs_difference(got, want) / scale);
                        }
                    }
                }
    return {worst_apply <= 1e-10,
            fmt("%zu shapes exact; apply vs dense max rel diff %.2e over 300 vectors", cases, worst_apply)};
}

Outcome gradients() {
    Rng rng(5005);
    std::size_t probes = 0, largest = 0;
    double worst = 0.0;
    for (Method method : {Method::low_rank, Method::block_lr, Method::monarch}) {
        ToyModel m;
        for (auto [out, in] : {std::pair<std::size_t, std::size_t>{12, 12}, {12, 12}, {4, 12}}) {
            m.layers.push_back({project(rng.gaussian_matrix(out, in, 0.5), method, 2, 2), {}});
            m.layers.back().bias.resize(out);
            for (double& b : m.layers.back().bias) b = 0.1 * rng.normal();
        }
        largest = std::max(largest, m.param_count());
        const DenseMatrix x = rng.gaussian_matrix(12, 6);
        std::vector<std::size_t> y(6);
        for (auto& v : y) v = rng.below(4);
        ForwardCache cache;
        const Gradients g = backward(m, cache, softmax_cross_entropy(forward(m, x, &cache), y).dlogits);
        auto all = oracle::all_probes(m);
        std::vector<oracle::Probe> pick;
        for (int i = 0; i < 100; ++i) pick.push_back(all[rng.below(all.size())]);
        for (const auto& p : pick) {
            const double a = oracle::probe_grad(g, p);
            const double num = oracle::central_difference(m, x, y, p);
            ++probes;
            worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-12}));
            if (!oracle::grads_close(a, num))
                return {false, fmt("%s layer %zu: analytic %.10g numeric %.10g", std::string(method_name(method)).c_str(),
                                   p.layer, a, num)};
        }
    }
    return {largest <= 5000,
            fmt("%zu probes over 3 models (<= %zu params), worst rel diff %.2e", probes, largest, worst)};
}

ToyModel twelve_layers(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> widths(13, 8);
    widths.push_back(2);
    ToyModel m = dense_mlp(widths, rng);
    m.layers.back().factorizable = false;
    return m;
}

Outcome staged_contract() {
    for (StageOrder order : {StageOrder::high_to_low, StageOrder::low_to_high, StageOrder::all_at_once})
        for (std::size_t per = 1; per <= 12; ++per) {
            const StagedPlan plan = build_plan(12, order, 10, per);
            std::set<std::size_t> seen;
            std::size_t total = 0;
            for (const auto& stage : plan.stages) {
                if (stage.empty()) return {false, "empty stage"};
                seen.insert(stage.begin(), stage.end());
                total += stage.size();
            }
            if (total != 12 || seen.size() != 12 || *seen.rbegin() != 11)
                return {false, fmt("%s per=%zu: not a partition of 0..11",
                                   std::string(stage_order_name(order)).c_str(), per)};
            if (order == StageOrder::high_to_low &&
                std::find(plan.stages.front().begin(), plan.stages.front().end(), 11) == plan.stages.front().end())
                return {false, fmt("high_to_low per=%zu: first stage lacks layer 11", per)};
        }

    const TaskData data = make_separable_task(96, 32, 8, 2.0, 61);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.optimizer.kind = OptimizerKind::adamw;
    for (std::size_t per : {1u, 5u}) {
        ToyModel m = twelve_layers(601);
        const StagedPlan plan = build_plan(12, StageOrder::high_to_low, 1, per);
        std::set<std::size_t> done;
        bool ok = true;
        staged_train(m, data, cfg, plan, ProjectionConfig{Method::low_rank, 2},
                     [&](std::size_t stage, const ToyModel& model) {
                         done.insert(plan.stages[stage].begin(), plan.stages[stage].end());
                         if (stage == 0 && method_of(model.layers[11].weight) != Method::low_rank) ok = false;
                         for (std::size_t l = 0; l < 12; ++l)
                             if ((method_of(model.layers[l].weight) == Method::low_rank) != (done.count(l) > 0))
                                 ok = false;
                     });
        if (!ok) return {false, fmt("high_to_low per=%zu: wrong layers factorized during staging", per)};
    }

    cfg.epochs = 2;
    for (Method method : {Method::low_rank, Method::block_lr, Method::monarch}) {
        const ProjectionConfig proj{method, 1, 2};
        ToyModel staged_model = twelve_layers(602);
        RunRecord staged = staged_train(staged_model, data, cfg, build_plan(12, StageOrder::all_at_once, 0), proj);
        ToyModel plain = twelve_layers(602);
        for (std::size_t l : plain.factorizable_layers())
            project_layer(plain.layers[l], std::get<DenseMatrix>(plain.layers[l].weight), proj);
        const RunRecord unstaged = train_run(plain, data, cfg);
        staged.staged = false;
        staged.plan_json.clear();
        staged.rank = staged.blocks = 0;
        if (!(staged == unstaged) || !same_parameters(staged_model, plain))
            return {false, fmt("%s: all_at_once with 0 steps differs from unstaged training",
                               std::string(method_name(method)).c_str())};
    }
    return {true, "36 plans partition 0..11; high_to_low starts at layer 11; all_at_once/0 steps bit-identical for 3 methods"};
}

struct GridCheck {
    bool rule_ok = true;
    std::string rule_detail;
    StabilityReport report;
};

// Recounts the report from the raw records and re-derives each majority baseline.
GridCheck run_and_check(const ExperimentGrid& grid) {
    Ledger ledger;
    const GridSummary summary = run_grid(grid, ledger);
    GridCheck out;
    if (!summary.errors.empty()) {
        out.rule_ok = false;
        out.rule_detail = summary.errors.front();
        return out;
    }
    const auto records = ledger.records();
    out.report = aggregate(records);

    std::map<std::string, double> baseline;
    for (const auto& spec : grid.datasets) {
        const TaskData t = make_dataset(grid.world, spec);
        std::map<std::size_t, std::size_t> counts;
        for (std::size_t y : t.train.y) ++counts[y];
        std::size_t top = 0, best = 0;
        for (auto [label, c] : counts)
            if (c > best) best = c, top = label;
        baseline[spec.name] = static_cast<double>(std::count(t.eval.y.begin(), t.eval.y.end(), top)) /
                              static_cast<double>(t.eval.y.size());
    }

    std::map<std::pair<Method, bool>, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& r : records) {
        if (r.phase != "final") continue;
        if (r.majority_accuracy != baseline.at(r.dataset) || r.failed != (r.eval_accuracy <= r.majority_accuracy)) {
            out.rule_ok = false;
            out.rule_detail = "record " + r.key + " misclassified";
            return out;
        }
        auto& c = counts[{r.method, r.staged}];
        ++c.first;
        c.second += r.failed ? 1 : 0;
    }
    for (const auto& cell : out.report.cells) {
        const auto [n, failed] = counts[{cell.method, cell.staged}];
        if (cell.attempted != n || cell.failed != failed ||
            std::abs(cell.unstable_pct - 100.0 * static_cast<double>(failed) / static_cast<double>(n)) > 1e-12) {
            out.rule_ok = false;
            out.rule_detail = "report disagrees with recount";
        }
    }
    if (out.report.cells.size() != counts.size()) {
        out.rule_ok = false;
        out.rule_detail = "report cell count disagrees with recount";
    }
    return out;
}

const CellStats* cell(const StabilityReport& r, Method m, bool staged) {
    for (const auto& c : r.cells)
        if (c.method == m && c.staged == staged) return &c;
    return nullptr;
}

Outcome stability() {
    const ExperimentGrid main_grid = toy_stability_grid();
    if (main_grid.seeds != std::vector<std::uint64_t>{1, 2, 3, 4, 5, 6} ||
        main_grid.learning_rates != std::vector<double>(kPaperLrGrid.begin(), kPaperLrGrid.end()))
        return {false, "toy grid does not use seeds 1-6 and the six-rate grid"};
    std::set<std::size_t> sizes;
    for (const auto& d : main_grid.datasets) sizes.insert(d.train_size);
    if (sizes != std::set<std::size_t>{1280, 12800}) return {false, "toy grid sizes are not 1,280 / 12,800"};

    const GridCheck toy = run_and_check(main_grid);
    if (!toy.rule_ok) return {false, "toy grid: " + toy.rule_detail};
    for (const auto& c : toy.report.cells)
        note(fmt("toy %-8s staged=%d runs=%zu failed=%zu unstable=%.2f%%", std::string(method_name(c.method)).c_str(),
                 c.staged ? 1 : 0, c.attempted, c.failed, c.unstable_pct));

    double dense_high = -1.0;
    for (const auto& s : toy.report.by_size)
        if (s.method == Method::dense && s.size == SizeClass::high) dense_high = s.unstable_pct;
    if (dense_high != 0.0) return {false, fmt("dense unstable on high-data tasks: %.2f%%", dense_high)};

    const GridCheck adv = run_and_check(adversarial_grid());
    if (!adv.rule_ok) return {false, "adversarial grid: " + adv.rule_detail};
    for (const auto& c : adv.report.cells)
        note(fmt("adversarial %-8s staged=%d runs=%zu failed=%zu unstable=%.2f%%",
                 std::string(method_name(c.method)).c_str(), c.staged ? 1 : 0, c.attempted, c.failed, c.unstable_pct));

    bool any_unstable = false;
    for (const auto& c : toy.report.cells) any_unstable = any_unstable || c.failed > 0;
    const StabilityReport& where = any_unstable ? toy.report : adv.report;
    const CellStats* staged = cell(where, Method::low_rank, true);
    const CellStats* unstaged = cell(where, Method::low_rank, false);
    if (!staged || !unstaged) return {false, "missing low-rank cells"};
    const CellStats* adv_staged = cell(adv.report, Method::low_rank, true);
    const CellStats* adv_unstaged = cell(adv.report, Method::low_rank, false);
    return {staged->unstable_pct <= unstaged->unstable_pct,
            fmt("dense high-data 0%%; low-rank staged %.1f%% vs unstaged %.1f%% on %s grid (adversarial %.1f%% vs %.1f%%)",
                staged->unstable_pct, unstaged->unstable_pct, any_unstable ? "toy" : "adversarial",
                adv_staged->unstable_pct, adv_unstaged->unstable_pct)};
}

Outcome latency() {
    const auto cases = cases_at_ratio(768, 4, 0.265);
    BenchConfig config;
    config.measured_runs = 40;
    const auto rows = run_bench(cases, config);
    const BenchRow& dense = rows[0];
    const BenchRow& lr = rows[1];
    const BenchRow& bl = rows[2];
    const BenchRow& mo = rows[3];
    for (const auto& r : rows)
        note(fmt("%-8s rank %3zu params %7zu (%.2f%%) %.3f +- %.3f ms", std::string(method_name(r.spec.method)).c_str(),
                 r.spec.rank, r.params, 100.0 * r.ratio, r.result.mean_ms, r.result.std_ms));
    const double predicted = static_cast<double>(dense.flops) / static_cast<double>(lr.flops);
    const double speedup = dense.result.mean_ms / lr.result.mean_ms;
    const bool order = lr.result.mean_ms < bl.result.mean_ms && lr.result.mean_ms < mo.result.mean_ms;
    const bool ratio_ok = speedup >= predicted / 3.0 && speedup <= predicted * 3.0;
    return {order && ratio_ok,
            fmt("ratio %.2f%%: low-rank %.2f, block %.2f, monarch %.2f, dense %.2f ms; speedup %.2f vs predicted %.2f",
                100.0 * lr.ratio, lr.result.mean_ms, bl.result.mean_ms, mo.result.mean_ms, dense.result.mean_ms,
                speedup, predicted)};
}

Outcome spectrum() {
    Rng rng(9009);
    double worst_end = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const DenseMatrix w = rng.gaussian_matrix(2 + rng.below(40), 2 + rng.below(40));
        const auto curve = spectrum_curve(w);
        if (curve.size() != std::min(w.rows(), w.cols())) return {false, "curve length"};
        for (std::size_t i = 1; i < curve.size(); ++i)
            if (curve[i].second > curve[i - 1].second) return {false, fmt("trial %d increases at r=%zu", trial, i + 1)};
        worst_end = std::max(worst_end, curve.back().second);
    }
    DenseMatrix eye(4, 4);
    for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
    const auto curve = spectrum_curve(eye);
    const double want[] = {std::sqrt(3.0) / 2.0, std::sqrt(2.0) / 2.0, 0.5, 0.0};
    double eye_diff = 0.0;
    for (std::size_t i = 0; i < 4; ++i) eye_diff = std::max(eye_diff, std::abs(curve[i].second - want[i]));
    return {worst_end <= 1e-9 && eye_diff <= 1e-15,
            fmt("20 matrices monotone, full-rank max %.2e; identity max diff %.2e", worst_end, eye_diff)};
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;  ///< 0 when no runtime bound applies
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"factorkit acceptance suite"};
    std::vector<int> only;
    app.add_option("--only", only, "Run just these criteria");
    app.add_flag("-v,--verbose", verbose, "Print per-cell and per-method figures");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "parameter-count identities", 1.0, param_counts},
        {2, "Eckart-Young optimality", 30.0, eckart_young},
        {3, "reduction to low-rank", 0.0, reduction_identity},
        {4, "Monarch permutation identity", 0.0, monarch_identity},
        {5, "gradient correctness", 60.0, gradients},
        {6, "staged scheduler contract", 0.0, staged_contract},
        {7, "stability protocol", 900.0, stability},
        {8, "latency ordering", 120.0, latency},
        {9, "spectrum curve", 0.0, spectrum},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_s > 0.0 && secs > c.limit_s) {
            o.pass = false;
            o.detail += fmt("; took %.1f s, limit %.0f s", secs, c.limit_s);
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s [%d] %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
