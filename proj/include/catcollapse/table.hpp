#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace catcollapse {

using Shape = std::vector<std::size_t>;
using Coords = std::vector<std::size_t>;

// How a variable takes part in category collapsing.
enum class Treatment { nominal, ordinal, fixed };

using TreatmentConfig = std::vector<Treatment>;

std::string_view to_string(Treatment t);
Treatment parse_treatment(std::string_view text);

struct VariableDef {
    std::string name;
    std::vector<std::string> categories;  // ordinal variables: stored order is the ordinal order
    Treatment treatment = Treatment::nominal;
    std::string symbol;  // one-character tag for generator notation; resolved by CategoryScheme
};

class CategoryScheme {
public:
    CategoryScheme() = default;
    explicit CategoryScheme(std::vector<VariableDef> variables);

    const std::vector<VariableDef>& variables() const { return variables_; }
    const VariableDef& variable(std::size_t dim) const { return variables_.at(dim); }
    std::size_t rank() const { return variables_.size(); }
    Shape shape() const;
    TreatmentConfig treatments() const;
    std::vector<std::string> symbols() const;
    std::optional<std::size_t> find(std::string_view name) const;

private:
    std::vector<VariableDef> variables_;
};

struct Cell {
    std::uint64_t index;  // row-major linear index
    double count;
    bool operator==(const Cell&) const = default;
};

struct Entry {
    Coords coords;
    double count;
};

// Multi-way nonnegative count array. Only strictly positive cells are stored,
// sorted by row-major index (lexicographic coordinate order).
class SparseTable {
public:
    SparseTable() = default;
    explicit SparseTable(Shape shape);
    // Sums duplicate indices and drops zero counts.
    SparseTable(Shape shape, std::vector<Cell> cells);

    static SparseTable from_dense(Shape shape, std::span<const double> values);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::uint64_t size() const { return size_; }
    std::size_t nnz() const { return cells_.size(); }
    double total() const { return total_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<std::uint64_t>& strides() const { return strides_; }

    std::uint64_t index_of(std::span<const std::size_t> coords) const;
    Coords coords_of(std::uint64_t index) const;
    double at(std::uint64_t index) const;
    double at(std::span<const std::size_t> coords) const { return at(index_of(coords)); }

    std::vector<double> one_way(std::size_t dim) const;
    std::vector<double> to_dense() const;
    SparseTable scaled(double factor) const;
    // Same cells under a different shape of equal size (row-major flattening).
    SparseTable reshaped(Shape shape) const;

    bool operator==(const SparseTable& other) const {
        return shape_ == other.shape_ && cells_ == other.cells_;
    }

private:
    Shape shape_;
    std::vector<std::uint64_t> strides_;
    std::uint64_t size_ = 0;
    std::vector<Cell> cells_;
    double total_ = 0.0;

    void init_shape();
};

// Per-variable key vectors mapping original categories to merged groups.
// Group ids are renumbered by first occurrence in each key.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<std::vector<std::size_t>> keys);

    static Partition identity(const Shape& shape);

    std::size_t rank() const { return keys_.size(); }
    const std::vector<std::vector<std::size_t>>& keys() const { return keys_; }
    const std::vector<std::size_t>& key(std::size_t dim) const { return keys_.at(dim); }
    std::size_t group_count(std::size_t dim) const { return group_counts_.at(dim); }
    Shape original_shape() const;
    const Shape& collapsed_shape() const { return group_counts_; }
    std::vector<std::vector<std::size_t>> members(std::size_t dim) const;

    // Merge current groups u and v of one variable.
    Partition merged(std::size_t dim, std::size_t u, std::size_t v) const;
    // Apply `next` to the groups of this partition.
    Partition then(const Partition& next) const;

    bool is_identity(std::size_t dim) const;
    bool is_contiguous(std::size_t dim) const;
    // Throws InputError if fixed keys are not the identity or ordinal groups are not runs.
    void check_treatments(const TreatmentConfig& treatments) const;

    bool operator==(const Partition&) const = default;

private:
    std::vector<std::vector<std::size_t>> keys_;
    std::vector<std::size_t> group_counts_;
};

SparseTable build_table(const Shape& shape, std::span<const Entry> entries);
SparseTable build_table(const CategoryScheme& scheme, std::span<const Entry> entries);

// Sum over all dimensions not listed; result dimensions follow `dims` order.
SparseTable marginal(const SparseTable& table, std::span<const std::size_t> dims);

SparseTable apply_partition(const SparseTable& table, const Partition& partition);

// 2 x (other dims) subtable of categories u, v on `dim`; `dim` becomes the first axis.
SparseTable pair_slice(const SparseTable& table, std::size_t dim, std::size_t u, std::size_t v);

// Spreads collapsed probabilities over the original shape in proportion to the
// original one-way marginals within each group.
SparseTable expand_model(const SparseTable& collapsed, const Partition& partition,
                         const std::vector<std::vector<double>>& original_marginals);

std::vector<std::vector<double>> one_way_marginals(const SparseTable& table);

std::uint64_t checked_cell_count(const Shape& shape);

}  // namespace catcollapse
