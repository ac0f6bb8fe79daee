#include <doctest.h>

#include <cmath>
#include <random>

#include "catcollapse/error.hpp"
#include "catcollapse/hllm.hpp"
#include "catcollapse/pcc.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "property_checks.hpp"

using namespace catcollapse;

TEST_CASE("model specs reduce to maximal generators") {
    const ModelSpec m(3, {make_term({0}), make_term({0, 1}), make_term({2}), make_term({1})});
    CHECK(m.generators() == std::vector<Term>{make_term({0, 1}), make_term({2})});
    CHECK(m.contains(make_term({1})));
    CHECK_FALSE(m.contains(make_term({1, 2})));
    CHECK(m.closure().size() == 5);
    CHECK(ModelSpec::saturated(3).is_saturated());
    CHECK(ModelSpec::main_effects(3).generators().size() == 3);
    const std::vector<std::string> sym{"a", "b", "c"};
    CHECK(m.to_string(sym) == "[ab][c]");
    CHECK(ModelSpec::saturated(3).without(make_term({0, 1, 2})).to_string(sym) == "[ab][ac][bc]");
    CHECK_THROWS_AS(m.without(make_term({1})), InputError);
}

TEST_CASE("generator parsing") {
    const CategoryScheme s({{"race", {"w", "n"}, Treatment::nominal, ""}, {"sex", {"m", "f"}, Treatment::nominal, ""},
                            {"opinion", {"y", "n"}, Treatment::nominal, ""}});
    CHECK(parse_generators("[ro][s]", s) == ModelSpec(3, {make_term({0, 2}), make_term({1})}));
    CHECK(parse_generators(" [race,opinion] [sex] ", s) == parse_generators("[ro][s]", s));
    CHECK_THROWS_AS(parse_generators("[rx]", s), InputError);
    CHECK_THROWS_AS(parse_generators("ro", s), InputError);
    CHECK_THROWS_AS(parse_generators("[ro", s), InputError);
}

TEST_CASE("model degrees of freedom") {
    for (const Shape& shape : {Shape{2, 3}, Shape{2, 2, 3, 6}, Shape{4, 1, 5}}) {
        std::int64_t cells = 1;
        for (auto r : shape) cells *= static_cast<std::int64_t>(r);
        CHECK(model_df(ModelSpec::saturated(shape.size()), shape) == cells - 1);
    }
    CHECK(model_df(ModelSpec::main_effects(2), {5, 5}) == 8);
    CHECK(model_df(ModelSpec(3, {make_term({0, 1}), make_term({2})}), {3, 2, 2}) == 2 + 1 + 2 + 1);
}

TEST_CASE("saturated fit reproduces the table") {
    std::mt19937_64 rng(41);
    const auto t = checks::to_sparse(oracle::random_table({3, 2, 4}, rng));
    const FitResult f = ipf_fit(t, ModelSpec::saturated(3));
    CHECK(f.dev == 0.0);
    CHECK(f.dfres == 0);
    CHECK(f.fitted == t);
}

TEST_CASE("IPF matches closed forms and generator margins") {
    const auto res = checks::ipf_closed_form(301, 25);
    CHECK_MESSAGE(res.pass, "worst " << res.worst << " " << res.note);
}

TEST_CASE("non-decomposable fit keeps its margins") {
    std::mt19937_64 rng(43);
    const auto t = checks::to_sparse(oracle::random_table({3, 3, 4}, rng));
    const ModelSpec nd(3, {make_term({0, 1}), make_term({1, 2}), make_term({0, 2})});
    const FitResult f = ipf_fit(t, nd);
    CHECK(f.converged);
    CHECK(f.iterations > 1);
    for (Term g : nd.generators()) {
        const auto dims = term_dims(g);
        const SparseTable a = marginal(t, dims), b = marginal(f.fitted, dims);
        for (std::uint64_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.at(i) - b.at(i)) <= 1e-8);
    }
}

TEST_CASE("deviance shrinks as models grow") {
    std::mt19937_64 rng(47);
    for (int rep = 0; rep < 10; ++rep) {
        const auto t = checks::to_sparse(oracle::random_table({3, 3, 2}, rng));
        const ModelSpec chain[] = {
            ModelSpec::main_effects(3),
            ModelSpec(3, {make_term({0, 1}), make_term({2})}),
            ModelSpec(3, {make_term({0, 1}), make_term({1, 2})}),
            ModelSpec(3, {make_term({0, 1}), make_term({1, 2}), make_term({0, 2})}),
            ModelSpec::saturated(3),
        };
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& m : chain) {
            const double dev = ipf_fit(t, m).dev;
            CHECK(dev <= prev + 1e-9);
            prev = dev;
        }
        CHECK(prev == 0.0);
    }
}

TEST_CASE("iteration cap reports non-convergence") {
    std::mt19937_64 rng(53);
    const auto t = checks::to_sparse(oracle::random_table({3, 3, 3}, rng));
    IpfOptions opt;
    opt.max_iter = 1;
    opt.tol = 1e-14;
    const FitResult f = ipf_fit(t, ModelSpec(3, {make_term({0, 1}), make_term({1, 2}), make_term({0, 2})}), opt);
    CHECK_FALSE(f.converged);
    CHECK(f.max_discrepancy > 1e-14);
}

TEST_CASE("independence model and the schooling table") {
    const auto ds = fixtures::wermuth_cox();
    const FitResult f = ipf_fit(ds.table, ModelSpec::main_effects(2));
    CHECK(std::abs(f.dev - 357.146) < 0.01);
    CHECK(f.dfmod == 8);
    CHECK(f.dfres == 16);
    const SparseTable e = independence_model(ds.table);
    for (const auto& c : f.fitted.cells()) CHECK(e.at(c.index) == doctest::Approx(c.count).epsilon(1e-9));
}

TEST_CASE("backward selection on the collapsed opinion table") {
    const auto ds = fixtures::christensen();
    const PccTrace tr = run_pcc(ds.table, ds.scheme.treatments());
    const SparseTable collapsed = apply_partition(ds.table, tr.steps[4].partition);
    CHECK(collapsed.shape() == Shape{2, 1, 3, 3});
    const BackwardTrace bt = backward_select(collapsed, ModelSpec::saturated(4));
    const auto sym = ds.scheme.symbols();
    REQUIRE(bt.rows.size() == 12);
    CHECK(bt.rows[7].spec.to_string(sym) == "[roa][s]");
    CHECK(bt.rows[7].dev == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(bt.rows[8].spec.to_string(sym) == "[ro][ra][oa][s]");
    CHECK(std::abs(bt.rows[8].dev - 5.245) < 0.01);
    CHECK(bt.rows[8].dfres == 4);
    CHECK(std::abs(bt.rows[8].adj_rsq - 0.800) < 0.001);
    CHECK(std::abs(bt.rows[9].dev_term - 3.980) < 0.01);
    CHECK(bt.rows[9].df_term == 2);
    CHECK(bt.rows.back().spec == ModelSpec::main_effects(4));
}

TEST_CASE("independent variables lose nothing until main effects") {
    std::vector<double> v;
    const double a[] = {1, 2}, b[] = {3, 1, 2}, c[] = {2, 5};
    for (double x : a)
        for (double y : b)
            for (double z : c) v.push_back(10.0 * x * y * z);
    const auto t = SparseTable::from_dense({2, 3, 2}, v);
    const BackwardTrace bt = backward_select(t, ModelSpec::saturated(3));
    for (const auto& row : bt.rows) CHECK(row.dev_term == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("partition model ties back to the collapsing trace") {
    const auto ds = fixtures::christensen();
    const PccTrace tr = run_pcc(ds.table, ds.scheme.treatments());
    for (const auto& s : tr.steps) {
        const FitResult f = fit_hllpm(ds.table, s.partition, ModelSpec::saturated(4));
        CHECK(f.dev == doctest::Approx(s.dev).epsilon(1e-6));
        CHECK(f.fitted.shape() == ds.table.shape());
    }
    const FitResult row4 = fit_hllpm(ds.table, tr.steps[4].partition, ModelSpec::saturated(4));
    CHECK(std::abs(row4.dev - 42.65) < 0.01);
    const FitResult id = fit_hllpm(ds.table, Partition::identity(ds.table.shape()), ModelSpec::saturated(4));
    CHECK(id.dev <= 1e-9);
}

TEST_CASE("Pearson ratios") {
    const auto ds = fixtures::wermuth_cox();
    const RatioTable r = pearson_ratios(ds.table);
    CHECK(std::abs(r.at(std::vector<std::size_t>{0, 0}) - 0.873) < 0.002);
    const auto uniform = SparseTable::from_dense({2, 3}, std::vector<double>(6, 4.0));
    for (double x : pearson_ratios(uniform).values) CHECK(x == doctest::Approx(1.0));
    const auto obs = SparseTable::from_dense({2}, std::vector<double>{0, 2});
    const auto exp0 = SparseTable::from_dense({2}, std::vector<double>{0, 1});
    CHECK(pearson_ratios(obs, exp0).values == std::vector<double>{1.0, 1.0});
    const auto obs_bad = SparseTable::from_dense({2}, std::vector<double>{1, 2});
    CHECK_THROWS_AS(pearson_ratios(obs_bad, exp0), DegeneracyError);
}
