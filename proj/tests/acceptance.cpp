// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "catcollapse/hllm.hpp"
#include "catcollapse/infoloss.hpp"
#include "catcollapse/pcc.hpp"
#include "fixtures.hpp"
#include "property_checks.hpp"

using namespace catcollapse;

namespace {

constexpr double kLossTol = 0.01;
constexpr double kDevTol = 0.01;
constexpr double kAdjTol = 0.001;
constexpr double kHllmTightTol = 0.01;
constexpr double kHllmLooseTol = 0.02;
constexpr double kSummaryRatioTol = 0.002;
constexpr double kModelRatioTol = 0.01;
constexpr double kAdditivityRel = 1e-9;
constexpr double kExpansionAbs = 1e-12;
constexpr double kFinalDevRel = 1e-6;
constexpr double kPccSeconds = 10.0;
constexpr double kLossPassSeconds = 60.0;

struct Criterion {
    int id;
    std::string name;
    bool pass = true;
    std::vector<std::string> misses;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            misses.push_back(what);
        }
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream s;
        s << what << " got " << got << " want " << want << " tol " << tol;
        expect(std::abs(got - want) <= tol, s.str());
    }
    template <class T>
    void exact(const T& got, const T& want, const std::string& what) {
        std::ostringstream s;
        s << what << " got " << got << " want " << want;
        expect(got == want, s.str());
    }
};

std::string str(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Criterion loss_matrices() {
    Criterion c{1, "loss matrices for schooling, age and four-way age"};
    const auto w = fixtures::wermuth_cox();
    const auto ch = fixtures::christensen();
    const double schooling[5][5] = {{0, 6.95, 20.44, 32.92, 30.40},
                                    {0, 0, 173.69, 77.52, 236.06},
                                    {0, 0, 0, 14.77, 12.99},
                                    {0, 0, 0, 0, 16.31}};
    const double age[5][5] = {{0, 70.52, 178.53, 253.15, 117.20},
                              {0, 0, 43.25, 110.11, 45.81},
                              {0, 0, 0, 23.96, 10.13},
                              {0, 0, 0, 0, 0.84}};
    const double age4[6][6] = {{0, 7.21, 14.29, 22.21, 35.21, 54.45},
                               {0, 0, 7.05, 15.24, 22.48, 38.21},
                               {0, 0, 0, 4.58, 9.87, 19.60},
                               {0, 0, 0, 0, 3.43, 9.59},
                               {0, 0, 0, 0, 0, 2.19}};
    const LossMatrix m0 = loss_matrix(w.table, 0, Treatment::nominal);
    const LossMatrix m1 = loss_matrix(w.table, 1, Treatment::nominal);
    const LossMatrix m9 = loss_matrix(ch.table, 3, Treatment::nominal);
    for (std::size_t u = 0; u < 5; ++u)
        for (std::size_t v = u + 1; v < 5; ++v) {
            c.near(m0.at(u, v)->g2, schooling[u][v], kLossTol, "schooling(" + str({u, v}) + ")");
            c.near(m1.at(u, v)->g2, age[u][v], kLossTol, "age(" + str({u, v}) + ")");
        }
    for (std::size_t u = 0; u < 6; ++u)
        for (std::size_t v = u + 1; v < 6; ++v)
            c.near(m9.at(u, v)->g2, age4[u][v], kLossTol, "four-way age(" + str({u, v}) + ")");
    c.exact<std::int64_t>(m9.df(), 11, "four-way df");
    return c;
}

struct Row {
    std::optional<std::size_t> d;
    std::vector<std::size_t> key;
    Shape dim;
    double dev;
    std::int64_t dfmod, dfres;
    double dev_term;
    std::int64_t df;
    double adj;
};

void check_rows(Criterion& c, const PccTrace& tr, const std::vector<Row>& rows, bool check_dfmod, bool check_adj) {
    c.exact(tr.steps.size(), rows.size(), "row count");
    for (std::size_t r = 0; r < std::min(rows.size(), tr.steps.size()); ++r) {
        const auto& s = tr.steps[r];
        const auto& w = rows[r];
        const std::string at = "row " + std::to_string(r) + " ";
        c.expect(s.d == w.d, at + "d");
        c.expect(s.key == w.key, at + "key got " + str(s.key) + " want " + str(w.key));
        c.expect(s.dim == w.dim, at + "dim got " + str(s.dim) + " want " + str(w.dim));
        c.near(s.dev, w.dev, kDevTol, at + "dev");
        c.near(s.dev_term, w.dev_term, kDevTol, at + "dev_term");
        c.exact(s.df_term, w.df, at + "df");
        c.exact(s.dfres, w.dfres, at + "dfres");
        if (check_dfmod) c.exact(s.dfmod, w.dfmod, at + "dfmod");
        if (check_adj) c.near(s.adj_rsq, w.adj, kAdjTol, at + "adj_rsq");
    }
}

Criterion schooling_trace() {
    Criterion c{2, "schooling by age collapsing trace"};
    const auto w = fixtures::wermuth_cox();
    const PccTrace tr = run_pcc(w.table, w.scheme.treatments());
    const std::vector<Row> rows{
        {std::nullopt, {}, {5, 5}, 0.00, 24, 0, 0.00, 0, 1.000},
        {1, {0, 1, 2, 3, 3}, {5, 4}, 0.84, 20, 4, 0.84, 4, 0.991},
        {0, {0, 0, 1, 2, 3}, {4, 4}, 7.66, 17, 7, 6.82, 3, 0.951},
        {0, {0, 0, 1, 2, 1}, {3, 4}, 20.39, 14, 10, 12.73, 3, 0.909},
        {0, {0, 0, 1, 1, 1}, {2, 4}, 35.69, 11, 13, 15.30, 3, 0.877},
        {1, {0, 1, 2, 2, 2}, {2, 3}, 52.89, 10, 14, 17.20, 1, 0.831},
        {1, {0, 0, 1, 1, 1}, {2, 2}, 110.54, 9, 15, 57.65, 1, 0.670},
        {0, {0, 0, 0, 0, 0}, {1, 2}, 357.15, 8, 16, 246.61, 1, 0.000},
        {0, {0, 0, 0, 0, 0}, {1, 2}, 357.15, 8, 16, 0.00, 1, 0.000},
    };
    check_rows(c, tr, rows, true, true);
    return c;
}

Criterion opinion_trace() {
    Criterion c{3, "abortion opinion collapsing trace (d, key, dim, dfres, df, dev, dev_term)"};
    const auto ch = fixtures::christensen();
    const PccTrace tr = run_pcc(ch.table, ch.scheme.treatments());
    // dfmod and adj_rsq are left unchecked; dfres holds the printed column.
    const std::vector<Row> rows{
        {std::nullopt, {}, {2, 2, 3, 6}, 0.00, 71, 0, 0.00, 0, 0},
        {3, {0, 1, 2, 3, 4, 4}, {2, 2, 3, 5}, 2.19, 20, 60, 2.19, 11, 0},
        {3, {0, 1, 2, 2, 3, 3}, {2, 2, 3, 4}, 6.77, 17, 49, 4.58, 11, 0},
        {3, {0, 0, 1, 1, 2, 2}, {2, 2, 3, 3}, 13.98, 14, 38, 7.21, 11, 0},
        {1, {0, 0}, {2, 1, 3, 3}, 42.65, 11, 21, 28.67, 17, 0},
        {0, {0, 0}, {1, 1, 3, 3}, 65.87, 10, 13, 23.21, 8, 0},
        {3, {0, 0, 1, 1, 1, 1}, {1, 1, 3, 2}, 77.61, 9, 11, 11.74, 2, 0},
        {2, {0, 0, 1}, {1, 1, 2, 2}, 93.28, 8, 10, 15.67, 1, 0},
        {2, {0, 0, 0}, {1, 1, 1, 2}, 121.47, 8, 9, 28.19, 1, 0},
        {0, {0, 0}, {1, 1, 1, 2}, 121.47, 8, 9, 0.00, 1, 0},
    };
    check_rows(c, tr, rows, false, false);
    return c;
}

Criterion hllm_fits() {
    Criterion c{4, "log-linear fits: schooling independence and collapsed opinion backward trace"};
    const auto w = fixtures::wermuth_cox();
    const FitResult ind = ipf_fit(w.table, ModelSpec::main_effects(2));
    c.near(ind.dev, 357.146, kHllmTightTol, "independence dev");
    c.exact<std::int64_t>(ind.dfmod, 8, "independence dfmod");
    c.exact<std::int64_t>(ind.dfres, 16, "independence dfres");

    const auto ch = fixtures::christensen();
    const PccTrace tr = run_pcc(ch.table, ch.scheme.treatments());
    const SparseTable collapsed = apply_partition(ch.table, tr.steps[4].partition);
    const BackwardTrace bt = backward_select(collapsed, ModelSpec::saturated(4));
    const auto sym = ch.scheme.symbols();
    auto find = [&](const std::string& terms) -> const BackwardRow* {
        for (const auto& r : bt.rows)
            if (r.spec.to_string(sym) == terms) return &r;
        c.expect(false, "missing row " + terms);
        return nullptr;
    };
    if (auto* r = find("[roa][s]")) c.near(r->dev, 0.0, kHllmTightTol, "[roa][s] dev");
    if (auto* r = find("[ro][ra][oa][s]")) {
        c.near(r->dev, 5.245, kHllmTightTol, "[oa ra ro s] dev");
        c.exact<std::int64_t>(r->dfres, 4, "[oa ra ro s] dfres");
        c.near(r->adj_rsq, 0.800, kAdjTol, "[oa ra ro s] adj_rsq");
    }
    if (auto* r = find("[ro][oa][s]")) c.near(r->dev, 9.225, kHllmTightTol, "[oa ro s] dev");
    if (auto* r = find("[oa][r][s]")) c.near(r->dev, 23.214, kHllmLooseTol, "[oa s r] dev");
    if (auto* r = find("[r][s][o][a]")) c.near(r->dev, 78.811, kHllmLooseTol, "[a o s r] dev");
    return c;
}

Criterion ratios() {
    Criterion c{5, "Pearson ratios of the summary and the expanded model"};
    const auto w = fixtures::wermuth_cox();
    const RatioTable r0 = pearson_ratios(w.table);
    const double first[] = {0.873, 0.657, 0.814, 1.652, 1.941};
    for (std::size_t j = 0; j < 5; ++j)
        c.near(r0.at(std::vector<std::size_t>{0, j}), first[j], kSummaryRatioTol, "summary (0," + std::to_string(j) + ")");

    const PccTrace tr = run_pcc(w.table, w.scheme.treatments());
    const auto& p = tr.steps[4].partition;
    const SparseTable model =
        expand_model(apply_partition(w.table, p).scaled(1.0 / w.table.total()), p, one_way_marginals(w.table));
    const RatioTable r4 = pearson_ratios(model, independence_model(w.table));
    const double block[2][4] = {{0.56, 0.90, 1.17, 1.35}, {1.46, 1.11, 0.82, 0.63}};
    const std::size_t rows[2] = {0, 2};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            c.near(r4.at(std::vector<std::size_t>{rows[i], j}), block[i][j], kModelRatioTol,
                   "model (" + std::to_string(rows[i]) + "," + std::to_string(j) + ")");
    return c;
}

Criterion curves() {
    Criterion c{6, "curve endpoints for collapsing and log-linear series"};
    const auto w = fixtures::wermuth_cox();
    const auto pcc = curve_of(run_pcc(w.table, w.scheme.treatments()));
    bool has_start = false, has_end = false;
    for (const auto& p : pcc) {
        has_start = has_start || (p.dfmod == 24 && std::abs(p.dev - 0.00) <= kDevTol);
        has_end = has_end || (p.dfmod == 8 && std::abs(p.dev - 357.15) <= kDevTol);
    }
    c.expect(has_start, "pcc point (24, 0.00)");
    c.expect(has_end, "pcc point (8, 357.15)");
    const BackwardTrace bt = backward_select(w.table, ModelSpec::saturated(2));
    c.exact<std::size_t>(bt.rows.size(), 2, "log-linear point count");
    if (bt.rows.size() == 2) {
        c.exact<std::int64_t>(bt.rows[0].dfmod, 24, "saturated dfmod");
        c.near(bt.rows[0].dev, 0.0, kDevTol, "saturated dev");
        c.exact<std::int64_t>(bt.rows[1].dfmod, 8, "independence dfmod");
        c.near(bt.rows[1].dev, 357.15, kDevTol, "independence dev");
    }
    return c;
}

Criterion properties() {
    Criterion c{7, "randomized property suite"};
    auto take = [&](const checks::Outcome& o, const std::string& what) {
        std::ostringstream s;
        s << what << " worst " << o.worst << " over " << o.cases << " tables " << o.note;
        c.expect(o.pass, s.str());
    };
    take(checks::step_additivity(1001, 60, kAdditivityRel), "step additivity");
    take(checks::expansion_margins(1002, 40, kExpansionAbs), "expansion margins");
    take(checks::final_dev_is_independence(1003, 60, kFinalDevRel), "final dev");
    take(checks::scaling_invariance(1004, 30), "scaling invariance");
    take(checks::ipf_closed_form(1005, 200), "IPF closed form");
    take(checks::greedy_matches_oracle(1006, 50), "greedy vs brute force");
    return c;
}

Criterion performance() {
    Criterion c{8, "performance"};
    std::mt19937_64 rng(2024);
    {
        const Shape shape{11, 5, 11, 16};
        std::vector<double> v(checked_cell_count(shape));
        std::poisson_distribution<int> pois(20.0);
        for (auto& x : v) x = pois(rng);
        const SparseTable t = SparseTable::from_dense(shape, v);
        const auto t0 = std::chrono::steady_clock::now();
        const PccTrace tr = run_pcc(t, TreatmentConfig(4, Treatment::nominal));
        const double secs = seconds_since(t0);
        std::ostringstream s;
        s << "11x5x11x16 PCC took " << secs << " s";
        c.expect(secs < kPccSeconds && tr.steps.size() > 1, s.str());
        std::cout << "  info: " << s.str() << " (" << tr.steps.size() << " rows)\n";
    }
    {
        const Shape shape{10, 10, 100, 100};
        const std::uint64_t size = checked_cell_count(shape);
        std::uniform_int_distribution<std::uint64_t> pick(0, size - 1);
        std::vector<Cell> cells;
        while (cells.size() < 100000) cells.push_back({pick(rng), 1.0 + static_cast<double>(rng() % 50)});
        SparseTable t(shape, cells);
        while (t.nnz() < 100000) {
            cells.push_back({pick(rng), 1.0});
            t = SparseTable(shape, cells);
        }
        const auto t0 = std::chrono::steady_clock::now();
        std::size_t pairs = 0;
        for (std::size_t d = 0; d < shape.size(); ++d) pairs += loss_matrix(t, d, Treatment::nominal).entries().size();
        const double secs = seconds_since(t0);
        std::ostringstream s;
        s << "10^6-cell, " << t.nnz() << "-nonzero loss-matrix pass took " << secs << " s";
        c.expect(secs < kLossPassSeconds && pairs == 45 + 45 + 4950 + 4950, s.str());
        std::cout << "  info: " << s.str() << " (" << pairs << " pairs)\n";
    }
    return c;
}

}  // namespace

int main() {
    std::vector<Criterion (*)()> runs{loss_matrices, schooling_trace, opinion_trace, hllm_fits,
                                      ratios,        curves,          properties,    performance};
    int failed = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        Criterion c{static_cast<int>(i + 1), "(aborted)"};
        try {
            c = runs[i]();
        } catch (const std::exception& e) {
            c.pass = false;
            c.misses.push_back(std::string("exception: ") + e.what());
        }
        std::cout << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << '\n';
        for (const auto& m : c.misses) std::cout << "  miss: " << m << '\n';
        failed += !c.pass;
    }
    std::cout << (runs.size() - failed) << "/" << runs.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
