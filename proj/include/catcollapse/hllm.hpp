#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "catcollapse/table.hpp"

namespace catcollapse {

// A model term as a bitmask over variable indices; 0 is the grand mean.
using Term = std::uint64_t;

inline constexpr std::size_t kMaxModelRank = 62;

std::vector<std::size_t> term_dims(Term term);
Term make_term(std::initializer_list<std::size_t> dims);

// Hierarchical log-linear model given by its maximal terms.
class ModelSpec {
public:
    ModelSpec() = default;
    // Drops generators contained in others; order is canonical afterwards.
    ModelSpec(std::size_t rank, std::vector<Term> generators);

    static ModelSpec saturated(std::size_t rank);
    static ModelSpec main_effects(std::size_t rank);

    std::size_t rank() const { return rank_; }
    // Larger terms first, then by ascending variable list.
    const std::vector<Term>& generators() const { return generators_; }
    // Every term implied by the generators, including the empty term, ascending.
    std::vector<Term> closure() const;
    bool contains(Term term) const;
    bool is_saturated() const;

    // Removes one generator and keeps its faces that no other generator covers.
    ModelSpec without(Term generator) const;

    std::string to_string(const std::vector<std::string>& symbols) const;

    bool operator==(const ModelSpec&) const = default;

private:
    std::size_t rank_ = 0;
    std::vector<Term> generators_;
};

// Bracket notation: "[oa][ro][s]" by one-character symbols, or
// "[race,age][sex]" by variable names. "[]" is the grand-mean model.
ModelSpec parse_generators(std::string_view text, const CategoryScheme& scheme);

// Sum over non-empty closure terms of prod_{k in term} (r_k - 1).
std::int64_t model_df(const ModelSpec& spec, const Shape& shape);

struct IpfOptions {
    double tol = 1e-8;  // max absolute generator-marginal discrepancy, count units
    int max_iter = 1000;
};

struct FitResult {
    SparseTable fitted;  // expected counts
    double dev = 0.0;
    std::int64_t dfmod = 0;
    std::int64_t dfres = 0;
    int iterations = 0;
    bool converged = true;
    double max_discrepancy = 0.0;
};

// Iterative proportional fitting from the uniform table.
FitResult ipf_fit(const SparseTable& table, const ModelSpec& spec, const IpfOptions& options = {});

// G2 of observed counts against expected counts, over observed-nonzero cells.
double deviance(const SparseTable& observed, const SparseTable& expected);

struct BackwardRow {
    std::size_t r = 0;
    ModelSpec spec;
    double dev = 0.0;
    std::int64_t dfmod = 0;
    std::int64_t dfres = 0;
    double dev_term = 0.0;
    std::int64_t df_term = 0;
    double adj_rsq = 1.0;
    bool converged = true;
};

struct BackwardTrace {
    std::vector<BackwardRow> rows;
    bool converged = true;
};

// Repeatedly drops the interaction generator with the smallest
// deviance increase per parameter removed, down to main effects.
BackwardTrace backward_select(const SparseTable& table, const ModelSpec& start, const IpfOptions& options = {});

// Fits `spec` to the collapsed table and expands the fit to the original
// shape. dfmod counts the collapsed model's parameters plus the within-group
// one-way proportions the expansion fixes.
FitResult fit_hllpm(const SparseTable& original, const Partition& partition, const ModelSpec& spec,
                    const IpfOptions& options = {});

// Expected counts under mutual independence of all variables.
SparseTable independence_model(const SparseTable& table);

struct RatioTable {
    Shape shape;
    std::vector<double> values;  // row-major over shape

    double at(std::span<const std::size_t> coords) const;
};

// (observed_i / n_obs) / (expected_i / n_exp). 0/0 cells report 1.
RatioTable pearson_ratios(const SparseTable& observed, const SparseTable& expected);
RatioTable pearson_ratios(const SparseTable& observed, const FitResult& reference);
// Against the table's own independence model.
RatioTable pearson_ratios(const SparseTable& observed);

}  // namespace catcollapse
