#include "catcollapse/infoloss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "catcollapse/error.hpp"

namespace catcollapse {

double guarded_plogp(double p) {
    if (p < 0.0 || std::isnan(p)) throw InputError("guarded_plogp needs p >= 0");
    return p > 0.0 ? p * std::log(p) : 0.0;
}

G2Result g2_independence(const SparseTable& table) {
    if (table.rank() != 2) throw InputError("g2_independence needs a two-way table, got rank " + std::to_string(table.rank()));
    const std::size_t rows = table.shape()[0], cols = table.shape()[1];
    const auto df = static_cast<std::int64_t>((rows - 1) * (cols - 1));
    const double n = table.total();
    if (n <= 0.0) return {0.0, df};

    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    for (const auto& c : table.cells()) {
        row_sum[c.index / cols] += c.count;
        col_sum[c.index % cols] += c.count;
    }
    double sum = 0.0;
    for (const auto& c : table.cells())
        sum += c.count * std::log(c.count * n / (row_sum[c.index / cols] * col_sum[c.index % cols]));
    return {std::max(0.0, 2.0 * sum), df};
}

CategorySlices::CategorySlices(const SparseTable& table, std::size_t dim) : dim_(dim) {
    if (dim >= table.rank()) throw InputError("dimension out of range");
    const std::size_t r = table.shape()[dim];
    df_ = static_cast<std::int64_t>(table.size() / r) - 1;
    slices_.resize(r);
    totals_.assign(r, 0.0);
    const std::uint64_t stride = table.strides()[dim];
    for (const auto& c : table.cells()) {
        const std::size_t cat = (c.index / stride) % r;
        const std::uint64_t other = (c.index / (stride * r)) * stride + c.index % stride;
        // Cells arrive in index order, so each slice is already sorted by `other`.
        slices_[cat].emplace_back(other, c.count);
        totals_[cat] += c.count;
    }
}

PairLoss CategorySlices::loss(std::size_t u, std::size_t v) const {
    if (u >= categories() || v >= categories()) throw InputError("category out of range");
    if (u == v) throw InputError("pair loss needs two distinct categories");
    const std::size_t lo = std::min(u, v), hi = std::max(u, v);
    const auto& a = slices_[lo];
    const auto& b = slices_[hi];

    // Cells present in only one slice contribute nothing; only the overlap and
    // the two slice totals matter.
    double overlap = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            ++i;
        } else if (b[j].first < a[i].first) {
            ++j;
        } else {
            const double x = a[i].second, y = b[j].second, s = x + y;
            overlap += x * std::log(x / s) + y * std::log(y / s);
            ++i;
            ++j;
        }
    }
    const double na = totals_[lo], nb = totals_[hi], ns = na + nb;
    double split = 0.0;
    if (na > 0.0 && nb > 0.0) split = na * std::log(na / ns) + nb * std::log(nb / ns);
    const double g2 = std::max(0.0, 2.0 * (overlap - split));
    const double q = df_ > 0 ? g2 / static_cast<double>(df_) : 0.0;
    return {dim_, u, v, g2, df_, q};
}

PairLoss pair_loss(const SparseTable& table, std::size_t dim, std::size_t u, std::size_t v) {
    if (dim >= table.rank()) throw InputError("pair_loss dimension out of range");
    const std::size_t r = table.shape()[dim];
    if (u >= r || v >= r) throw InputError("pair_loss category out of range");
    if (u == v) throw InputError("pair_loss needs two distinct categories");
    return CategorySlices(table, dim).loss(u, v);
}

LossMatrix::LossMatrix(std::size_t dim, std::size_t categories, PairMode mode, std::int64_t df,
                       std::vector<PairLoss> entries)
    : dim_(dim), categories_(categories), mode_(mode), df_(df), entries_(std::move(entries)) {}

std::optional<PairLoss> LossMatrix::at(std::size_t u, std::size_t v) const {
    const std::size_t lo = std::min(u, v), hi = std::max(u, v);
    for (const auto& e : entries_)
        if (e.u == lo && e.v == hi) return e;
    return std::nullopt;
}

LossMatrix loss_matrix(const CategorySlices& slices, PairMode mode) {
    const std::size_t r = slices.categories();
    std::vector<PairLoss> entries;
    for (std::size_t u = 0; u + 1 < r; ++u) {
        if (mode == PairMode::adjacent_only) {
            entries.push_back(slices.loss(u, u + 1));
        } else {
            for (std::size_t v = u + 1; v < r; ++v) entries.push_back(slices.loss(u, v));
        }
    }
    return LossMatrix(slices.dim(), r, mode, slices.df(), std::move(entries));
}

LossMatrix loss_matrix(const SparseTable& table, std::size_t dim, Treatment treatment) {
    if (treatment == Treatment::fixed) throw InputError("fixed variables have no loss matrix");
    return loss_matrix(CategorySlices(table, dim),
                       treatment == Treatment::ordinal ? PairMode::adjacent_only : PairMode::all_pairs);
}

}  // namespace catcollapse
