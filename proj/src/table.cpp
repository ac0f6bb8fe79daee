#include "catcollapse/table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "catcollapse/error.hpp"

namespace catcollapse {

std::string_view to_string(Treatment t) {
    switch (t) {
        case Treatment::nominal: return "nominal";
        case Treatment::ordinal: return "ordinal";
        case Treatment::fixed: return "fixed";
    }
    return "nominal";
}

Treatment parse_treatment(std::string_view text) {
    if (text == "nominal") return Treatment::nominal;
    if (text == "ordinal") return Treatment::ordinal;
    if (text == "fixed") return Treatment::fixed;
    throw InputError("unknown treatment '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// CategoryScheme

CategoryScheme::CategoryScheme(std::vector<VariableDef> variables) : variables_(std::move(variables)) {
    std::set<std::string> names;
    for (const auto& v : variables_) {
        if (v.name.empty()) throw InputError("variable name must not be empty");
        if (!names.insert(v.name).second) throw InputError("duplicate variable name '" + v.name + "'");
        if (v.categories.empty()) throw InputError("variable '" + v.name + "' has no categories");
        std::set<std::string> labels(v.categories.begin(), v.categories.end());
        if (labels.size() != v.categories.size())
            throw InputError("duplicate category label in variable '" + v.name + "'");
        if (v.symbol.size() > 1) throw InputError("symbol for '" + v.name + "' must be one character");
    }

    // Symbols: explicit ones first, then the first character of the name when it is free.
    std::set<std::string> taken;
    for (const auto& v : variables_)
        if (!v.symbol.empty() && !taken.insert(v.symbol).second)
            throw InputError("duplicate variable symbol '" + v.symbol + "'");
    std::vector<std::string> initials;
    for (const auto& v : variables_) initials.push_back(v.name.substr(0, 1));
    bool initials_unique = std::set<std::string>(initials.begin(), initials.end()).size() == initials.size();
    for (std::size_t k = 0; k < variables_.size(); ++k) {
        auto& v = variables_[k];
        if (!v.symbol.empty()) continue;
        if (initials_unique && !taken.count(initials[k])) {
            v.symbol = initials[k];
        } else {
            for (char c : std::string("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789")) {
                std::string s(1, c);
                if (!taken.count(s)) {
                    v.symbol = s;
                    break;
                }
            }
            if (v.symbol.empty()) throw InputError("too many variables to assign symbols");
        }
        taken.insert(v.symbol);
    }
}

Shape CategoryScheme::shape() const {
    Shape s;
    for (const auto& v : variables_) s.push_back(v.categories.size());
    return s;
}

TreatmentConfig CategoryScheme::treatments() const {
    TreatmentConfig t;
    for (const auto& v : variables_) t.push_back(v.treatment);
    return t;
}

std::vector<std::string> CategoryScheme::symbols() const {
    std::vector<std::string> s;
    for (const auto& v : variables_) s.push_back(v.symbol);
    return s;
}

std::optional<std::size_t> CategoryScheme::find(std::string_view name) const {
    for (std::size_t k = 0; k < variables_.size(); ++k)
        if (variables_[k].name == name) return k;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// SparseTable

std::uint64_t checked_cell_count(const Shape& shape) {
    if (shape.empty()) throw InputError("table must have at least one dimension");
    std::uint64_t size = 1;
    constexpr std::uint64_t limit = std::uint64_t{1} << 62;
    for (std::size_t r : shape) {
        if (r == 0) throw InputError("every dimension needs at least one category");
        if (size > limit / r) throw InputError("table shape too large for 64-bit indexing");
        size *= r;
    }
    return size;
}

void SparseTable::init_shape() {
    size_ = checked_cell_count(shape_);
    strides_.assign(shape_.size(), 1);
    for (std::size_t k = shape_.size(); k-- > 1;) strides_[k - 1] = strides_[k] * shape_[k];
}

SparseTable::SparseTable(Shape shape) : shape_(std::move(shape)) { init_shape(); }

SparseTable::SparseTable(Shape shape, std::vector<Cell> cells) : shape_(std::move(shape)) {
    init_shape();
    for (const auto& c : cells) {
        if (c.index >= size_) throw InputError("cell index out of range");
        if (!(c.count >= 0.0) || !std::isfinite(c.count)) throw InputError("counts must be finite and nonnegative");
    }
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.index < b.index; });
    cells_.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < cells.size() && cells[j].index == cells[i].index) sum += cells[j++].count;
        if (sum > 0.0) cells_.push_back({cells[i].index, sum});
        i = j;
    }
    for (const auto& c : cells_) total_ += c.count;
}

SparseTable SparseTable::from_dense(Shape shape, std::span<const double> values) {
    SparseTable t(std::move(shape));
    if (values.size() != t.size_) throw InputError("dense value count does not match shape");
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] != 0.0) cells.push_back({i, values[i]});
    return SparseTable(t.shape_, std::move(cells));
}

std::uint64_t SparseTable::index_of(std::span<const std::size_t> coords) const {
    if (coords.size() != shape_.size()) throw InputError("coordinate rank does not match table rank");
    std::uint64_t idx = 0;
    for (std::size_t k = 0; k < coords.size(); ++k) {
        if (coords[k] >= shape_[k]) throw InputError("coordinate out of range on dimension " + std::to_string(k));
        idx += coords[k] * strides_[k];
    }
    return idx;
}

Coords SparseTable::coords_of(std::uint64_t index) const {
    Coords c(shape_.size());
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        c[k] = static_cast<std::size_t>(index / strides_[k]);
        index %= strides_[k];
    }
    return c;
}

double SparseTable::at(std::uint64_t index) const {
    auto it = std::lower_bound(cells_.begin(), cells_.end(), index,
                               [](const Cell& c, std::uint64_t i) { return c.index < i; });
    return (it != cells_.end() && it->index == index) ? it->count : 0.0;
}

std::vector<double> SparseTable::one_way(std::size_t dim) const {
    if (dim >= shape_.size()) throw InputError("dimension out of range");
    std::vector<double> m(shape_[dim], 0.0);
    for (const auto& c : cells_) m[(c.index / strides_[dim]) % shape_[dim]] += c.count;
    return m;
}

std::vector<double> SparseTable::to_dense() const {
    std::vector<double> d(size_, 0.0);
    for (const auto& c : cells_) d[c.index] = c.count;
    return d;
}

SparseTable SparseTable::scaled(double factor) const {
    if (!(factor >= 0.0)) throw InputError("scale factor must be nonnegative");
    std::vector<Cell> cells = cells_;
    for (auto& c : cells) c.count *= factor;
    return SparseTable(shape_, std::move(cells));
}

SparseTable SparseTable::reshaped(Shape shape) const {
    SparseTable t(std::move(shape));
    if (t.size_ != size_) throw InputError("reshape must preserve the cell count");
    t.cells_ = cells_;
    t.total_ = total_;
    return t;
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(std::vector<std::vector<std::size_t>> keys) {
    keys_.reserve(keys.size());
    for (auto& key : keys) {
        if (key.empty()) throw InputError("key vector must not be empty");
        std::unordered_map<std::size_t, std::size_t> renumber;
        std::vector<std::size_t> k;
        k.reserve(key.size());
        for (std::size_t g : key) {
            auto [it, inserted] = renumber.emplace(g, renumber.size());
            k.push_back(it->second);
        }
        group_counts_.push_back(renumber.size());
        keys_.push_back(std::move(k));
    }
}

Partition Partition::identity(const Shape& shape) {
    std::vector<std::vector<std::size_t>> keys;
    for (std::size_t r : shape) {
        std::vector<std::size_t> k(r);
        std::iota(k.begin(), k.end(), std::size_t{0});
        keys.push_back(std::move(k));
    }
    return Partition(std::move(keys));
}

Shape Partition::original_shape() const {
    Shape s;
    for (const auto& k : keys_) s.push_back(k.size());
    return s;
}

std::vector<std::vector<std::size_t>> Partition::members(std::size_t dim) const {
    std::vector<std::vector<std::size_t>> m(group_count(dim));
    const auto& k = keys_[dim];
    for (std::size_t c = 0; c < k.size(); ++c) m[k[c]].push_back(c);
    return m;
}

Partition Partition::merged(std::size_t dim, std::size_t u, std::size_t v) const {
    if (dim >= rank()) throw InputError("dimension out of range");
    if (u == v || u >= group_count(dim) || v >= group_count(dim)) throw InputError("invalid group pair");
    auto keys = keys_;
    const std::size_t lo = std::min(u, v), hi = std::max(u, v);
    for (auto& g : keys[dim]) g = (g == hi) ? lo : g;
    return Partition(std::move(keys));
}

Partition Partition::then(const Partition& next) const {
    if (next.original_shape() != collapsed_shape()) throw InputError("partition shapes do not compose");
    auto keys = keys_;
    for (std::size_t k = 0; k < keys.size(); ++k)
        for (auto& g : keys[k]) g = next.keys_[k][g];
    return Partition(std::move(keys));
}

bool Partition::is_identity(std::size_t dim) const { return group_count(dim) == keys_.at(dim).size(); }

bool Partition::is_contiguous(std::size_t dim) const {
    const auto& k = keys_.at(dim);
    // First-occurrence numbering plus runs means the key is nondecreasing.
    return std::is_sorted(k.begin(), k.end());
}

void Partition::check_treatments(const TreatmentConfig& treatments) const {
    if (treatments.size() != rank()) throw InputError("treatment count does not match partition rank");
    for (std::size_t k = 0; k < rank(); ++k) {
        if (treatments[k] == Treatment::fixed && !is_identity(k))
            throw InputError("fixed variable " + std::to_string(k) + " must keep the identity key");
        if (treatments[k] == Treatment::ordinal && !is_contiguous(k))
            throw InputError("ordinal variable " + std::to_string(k) + " must group contiguous categories");
    }
}

// ---------------------------------------------------------------------------
// Operations

SparseTable build_table(const Shape& shape, std::span<const Entry> entries) {
    SparseTable empty(shape);
    std::vector<Cell> cells;
    cells.reserve(entries.size());
    for (const auto& e : entries) {
        if (!(e.count >= 0.0) || !std::isfinite(e.count)) throw InputError("counts must be finite and nonnegative");
        cells.push_back({empty.index_of(e.coords), e.count});
    }
    return SparseTable(shape, std::move(cells));
}

SparseTable build_table(const CategoryScheme& scheme, std::span<const Entry> entries) {
    return build_table(scheme.shape(), entries);
}

namespace {

// Maps each source cell to a target index and sums in source order.
template <typename IndexFn>
SparseTable regroup(const SparseTable& table, Shape target_shape, IndexFn&& target_index) {
    std::vector<Cell> mapped;
    mapped.reserve(table.nnz());
    for (const auto& c : table.cells()) mapped.push_back({target_index(c.index), c.count});
    return SparseTable(std::move(target_shape), std::move(mapped));
}

}  // namespace

SparseTable marginal(const SparseTable& table, std::span<const std::size_t> dims) {
    if (dims.empty()) throw InputError("marginal needs at least one dimension");
    std::vector<bool> seen(table.rank(), false);
    Shape shape;
    for (std::size_t d : dims) {
        if (d >= table.rank()) throw InputError("marginal dimension out of range");
        if (seen[d]) throw InputError("marginal dimension listed twice");
        seen[d] = true;
        shape.push_back(table.shape()[d]);
    }
    SparseTable target(shape);
    const auto& src_strides = table.strides();
    const auto& src_shape = table.shape();
    const auto& dst_strides = target.strides();
    std::vector<std::size_t> d(dims.begin(), dims.end());
    return regroup(table, shape, [&](std::uint64_t idx) {
        std::uint64_t out = 0;
        for (std::size_t j = 0; j < d.size(); ++j) out += ((idx / src_strides[d[j]]) % src_shape[d[j]]) * dst_strides[j];
        return out;
    });
}

SparseTable apply_partition(const SparseTable& table, const Partition& partition) {
    if (partition.original_shape() != table.shape()) throw InputError("partition key lengths do not match table shape");
    const Shape& target_shape = partition.collapsed_shape();
    SparseTable target(target_shape);
    const auto& src_strides = table.strides();
    const auto& src_shape = table.shape();
    const auto& dst_strides = target.strides();
    return regroup(table, target_shape, [&](std::uint64_t idx) {
        std::uint64_t out = 0;
        for (std::size_t k = 0; k < src_shape.size(); ++k)
            out += partition.key(k)[(idx / src_strides[k]) % src_shape[k]] * dst_strides[k];
        return out;
    });
}

SparseTable pair_slice(const SparseTable& table, std::size_t dim, std::size_t u, std::size_t v) {
    if (dim >= table.rank()) throw InputError("pair_slice dimension out of range");
    const std::size_t r = table.shape()[dim];
    if (u >= r || v >= r) throw InputError("pair_slice category out of range");
    if (u == v) throw InputError("pair_slice needs two distinct categories");

    Shape shape{2};
    for (std::size_t k = 0; k < table.rank(); ++k)
        if (k != dim) shape.push_back(table.shape()[k]);
    const std::uint64_t other_size = table.size() / r;
    const std::uint64_t stride = table.strides()[dim];

    std::vector<Cell> cells;
    for (const auto& c : table.cells()) {
        const std::size_t cat = (c.index / stride) % r;
        if (cat != u && cat != v) continue;
        // Remove the `dim` digit from the index: high part * stride + low part.
        const std::uint64_t high = c.index / (stride * r);
        const std::uint64_t low = c.index % stride;
        const std::uint64_t other = high * stride + low;
        cells.push_back({(cat == u ? 0 : other_size) + other, c.count});
    }
    return SparseTable(std::move(shape), std::move(cells));
}

std::vector<std::vector<double>> one_way_marginals(const SparseTable& table) {
    std::vector<std::vector<double>> m;
    for (std::size_t k = 0; k < table.rank(); ++k) m.push_back(table.one_way(k));
    return m;
}

SparseTable expand_model(const SparseTable& collapsed, const Partition& partition,
                         const std::vector<std::vector<double>>& original_marginals) {
    if (collapsed.shape() != partition.collapsed_shape())
        throw InputError("collapsed table shape does not match partition group counts");
    const Shape original = partition.original_shape();
    if (original_marginals.size() != original.size()) throw InputError("need one marginal per variable");

    double reference_total = -1.0;
    std::vector<std::vector<double>> factor(original.size());
    std::vector<std::vector<std::vector<std::size_t>>> members(original.size());
    for (std::size_t k = 0; k < original.size(); ++k) {
        const auto& m = original_marginals[k];
        if (m.size() != original[k]) throw InputError("marginal length does not match partition key length");
        double total = 0.0;
        for (double x : m) {
            if (!(x >= 0.0) || !std::isfinite(x)) throw InputError("marginal counts must be finite and nonnegative");
            total += x;
        }
        if (reference_total < 0.0) {
            reference_total = total;
        } else if (std::abs(total - reference_total) > 1e-9 * std::max(1.0, std::abs(reference_total))) {
            throw InputError("original marginals have inconsistent totals");
        }
        std::vector<double> group_mass(partition.group_count(k), 0.0);
        const auto& key = partition.key(k);
        for (std::size_t c = 0; c < m.size(); ++c) group_mass[key[c]] += m[c];
        factor[k].resize(m.size());
        members[k].resize(partition.group_count(k));
        for (std::size_t c = 0; c < m.size(); ++c) {
            const double g = group_mass[key[c]];
            factor[k][c] = g > 0.0 ? m[c] / g : 0.0;
            if (factor[k][c] > 0.0) members[k][key[c]].push_back(c);
        }
    }

    SparseTable shape_only(original);
    const auto& strides = shape_only.strides();
    const std::size_t rank = original.size();
    std::vector<Cell> out;
    std::vector<std::size_t> pos(rank);
    for (const auto& cell : collapsed.cells()) {
        const Coords g = collapsed.coords_of(cell.index);
        bool empty = false;
        for (std::size_t k = 0; k < rank; ++k) empty = empty || members[k][g[k]].empty();
        if (empty) continue;
        std::fill(pos.begin(), pos.end(), 0);
        bool more = true;
        while (more) {
            double p = cell.count;
            std::uint64_t idx = 0;
            for (std::size_t k = 0; k < rank; ++k) {
                const std::size_t c = members[k][g[k]][pos[k]];
                p *= factor[k][c];
                idx += c * strides[k];
            }
            out.push_back({idx, p});
            more = false;
            for (std::size_t k = rank; k-- > 0;) {
                if (++pos[k] < members[k][g[k]].size()) {
                    more = true;
                    break;
                }
                pos[k] = 0;
            }
        }
    }
    return SparseTable(original, std::move(out));
}

}  // namespace catcollapse
