#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "catcollapse/table.hpp"

namespace catcollapse {

// p * ln(p), with 0 * ln(0) taken as 0.
double guarded_plogp(double p);

struct G2Result {
    double g2;
    std::int64_t df;
};

// Likelihood-ratio statistic of independence for a two-way table. df is (R-1)(C-1)
// whatever the zero pattern.
G2Result g2_independence(const SparseTable& table);

struct PairLoss {
    std::size_t dim;
    std::size_t u;
    std::size_t v;
    double g2;
    std::int64_t df;
    double quotient;  // g2 / df
};

// Information lost by aggregating categories u and v of `dim`: G2 of the
// u/v split against the joint distribution of all other variables.
PairLoss pair_loss(const SparseTable& table, std::size_t dim, std::size_t u, std::size_t v);

// Nonzero cells of one dimension grouped by category, keyed by the linear
// index over the remaining dimensions. Built once, queried for every pair.
class CategorySlices {
public:
    CategorySlices(const SparseTable& table, std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t categories() const { return slices_.size(); }
    std::int64_t df() const { return df_; }
    double category_total(std::size_t c) const { return totals_.at(c); }
    PairLoss loss(std::size_t u, std::size_t v) const;

private:
    std::size_t dim_;
    std::int64_t df_;
    std::vector<std::vector<std::pair<std::uint64_t, double>>> slices_;
    std::vector<double> totals_;
};

enum class PairMode { all_pairs, adjacent_only };

class LossMatrix {
public:
    LossMatrix(std::size_t dim, std::size_t categories, PairMode mode, std::int64_t df, std::vector<PairLoss> entries);

    std::size_t dim() const { return dim_; }
    std::size_t categories() const { return categories_; }
    PairMode mode() const { return mode_; }
    std::int64_t df() const { return df_; }
    // Upper-triangle entries in lexical (u, v) order.
    const std::vector<PairLoss>& entries() const { return entries_; }
    // Either order of u, v; empty when the pair is not part of the matrix.
    std::optional<PairLoss> at(std::size_t u, std::size_t v) const;

private:
    std::size_t dim_;
    std::size_t categories_;
    PairMode mode_;
    std::int64_t df_;
    std::vector<PairLoss> entries_;
};

LossMatrix loss_matrix(const SparseTable& table, std::size_t dim, Treatment treatment);
LossMatrix loss_matrix(const CategorySlices& slices, PairMode mode);

}  // namespace catcollapse
