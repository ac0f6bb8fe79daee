#include "catcollapse/pcc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "catcollapse/error.hpp"

namespace catcollapse {

namespace {

std::size_t dims_with_spread(const Shape& shape) {
    return static_cast<std::size_t>(std::count_if(shape.begin(), shape.end(), [](std::size_t r) { return r > 1; }));
}

bool better(const MergeCandidate& c, const MergeCandidate& best) {
    // Candidates arrive in lexical order, so a tie keeps the earlier one.
    return c.quotient < best.quotient - kQuotientTieTolerance * std::abs(best.quotient);
}

}  // namespace

std::optional<MergeCandidate> select_merge(const SparseTable& table, const TreatmentConfig& treatments) {
    if (treatments.size() != table.rank()) throw InputError("treatment count does not match table rank");
    if (dims_with_spread(table.shape()) <= 1) return std::nullopt;

    std::optional<MergeCandidate> best;
    for (std::size_t d = 0; d < table.rank(); ++d) {
        if (treatments[d] == Treatment::fixed || table.shape()[d] < 2) continue;
        const CategorySlices slices(table, d);
        const LossMatrix matrix = loss_matrix(
            slices, treatments[d] == Treatment::ordinal ? PairMode::adjacent_only : PairMode::all_pairs);
        for (const auto& e : matrix.entries()) {
            MergeCandidate c{e.dim, e.u, e.v, e.g2, e.df, e.quotient};
            if (!best || better(c, *best)) best = c;
        }
    }
    return best;
}

AdjustedRsq adjusted_rsq(double dev_r, std::int64_t dfres_r, double dev_last, std::int64_t dfres_last) {
    if (dfres_r == 0) return {1.0, false};
    if (dev_last == 0.0) return {1.0, true};
    return {1.0 - dev_r * static_cast<double>(dfres_last) / (dev_last * static_cast<double>(dfres_r)), false};
}

PccTrace run_pcc(const SparseTable& table, const TreatmentConfig& treatments, const PccOptions& options) {
    if (treatments.size() != table.rank()) throw InputError("treatment count does not match table rank");
    if (!(table.total() > 0.0)) throw InputError("PCC needs a table with positive total");
    if (options.stop_quotient && !(*options.stop_quotient >= 0.0))
        throw InputError("stop quotient must be nonnegative");

    PccTrace trace;
    trace.original_shape = table.shape();
    trace.treatments = treatments;
    trace.n = table.total();
    const auto cells_less_one = static_cast<std::int64_t>(table.size()) - 1;

    PccStep row0;
    row0.dim = table.shape();
    row0.dfmod = cells_less_one;
    row0.partition = Partition::identity(table.shape());
    trace.steps.push_back(row0);

    SparseTable current = table;
    while (true) {
        const auto candidate = select_merge(current, treatments);
        if (!candidate) break;
        if (options.stop_quotient && candidate->quotient > *options.stop_quotient) {
            trace.stopped_early = true;
            break;
        }
        const PccStep& prev = trace.steps.back();
        current = apply_partition(current, Partition::identity(current.shape()).merged(candidate->dim, candidate->u,
                                                                                         candidate->v));
        PccStep step;
        step.r = prev.r + 1;
        step.d = candidate->dim;
        step.partition = prev.partition.merged(candidate->dim, candidate->u, candidate->v);
        step.key = step.partition.key(candidate->dim);
        step.dim = current.shape();
        step.dev_term = candidate->g2;
        step.df_term = candidate->df;
        step.dev = prev.dev + candidate->g2;
        step.dfres = prev.dfres + candidate->df;
        step.dfmod = cells_less_one - step.dfres;
        step.merge = candidate;
        trace.steps.push_back(std::move(step));
    }

    // Once a single marginal vector remains the trace closes with a repeat of
    // the final model (zero loss, bookkeeping unchanged).
    if (!trace.stopped_early && trace.steps.size() > 1 && dims_with_spread(current.shape()) <= 1) {
        PccStep closing = trace.steps.back();
        closing.r += 1;
        closing.terminal = true;
        closing.merge.reset();
        closing.dev_term = 0.0;
        closing.df_term = 1;
        std::optional<std::size_t> d;
        for (std::size_t k = 0; k < treatments.size() && !d; ++k)
            if (treatments[k] != Treatment::fixed && current.shape()[k] == 1) d = k;
        for (std::size_t k = 0; k < treatments.size() && !d; ++k)
            if (treatments[k] != Treatment::fixed) d = k;
        closing.d = d;
        closing.key = d ? closing.partition.key(*d) : std::vector<std::size_t>{};
        trace.steps.push_back(std::move(closing));
    }

    const PccStep& last = trace.steps.back();
    for (auto& s : trace.steps) s.adj_rsq = adjusted_rsq(s.dev, s.dfres, last.dev, last.dfres).value;
    return trace;
}

PenalizedScores penalized_scores(double dev, std::int64_t dfmod, double n) {
    if (!(n > 0.0)) throw InputError("penalized scores need a positive sample size");
    const double k = static_cast<double>(dfmod);
    return {dev + 2.0 * k, dev + k * std::log(n)};
}

std::vector<CurvePoint> curve_of(const PccTrace& trace) {
    std::vector<CurvePoint> curve;
    for (const auto& s : trace.steps) curve.push_back({s.dfmod, s.dev});
    return curve;
}

double info_concentration(std::span<const CurvePoint> curve) {
    if (curve.size() < 2) throw InputError("concentration needs at least two curve points");
    std::int64_t df_max = curve.front().dfmod, df_min = curve.front().dfmod;
    double dev_max = 0.0;
    for (const auto& p : curve) {
        df_max = std::max(df_max, p.dfmod);
        df_min = std::min(df_min, p.dfmod);
        dev_max = std::max(dev_max, p.dev);
    }
    if (df_max == df_min) throw InputError("concentration needs a range of parameter counts");
    if (dev_max <= 0.0) return 0.0;

    std::vector<std::pair<double, double>> pts;
    const double span = static_cast<double>(df_max - df_min);
    for (const auto& p : curve) pts.emplace_back(static_cast<double>(df_max - p.dfmod) / span, p.dev / dev_max);
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += 0.5 * (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second);
    return area / 0.5;
}

double expanded_deviance(const SparseTable& original, const Partition& partition) {
    const double n = original.total();
    if (!(n > 0.0)) return 0.0;
    const SparseTable collapsed = apply_partition(original, partition);
    const SparseTable model = expand_model(collapsed.scaled(1.0 / n), partition, one_way_marginals(original));
    double sum = 0.0;
    for (const auto& c : original.cells()) {
        const double p = model.at(c.index);
        if (!(p > 0.0)) throw DegeneracyError("expanded model assigns zero to an observed cell");
        sum += c.count * std::log(c.count / (n * p));
    }
    return std::max(0.0, 2.0 * sum);
}

std::uint64_t bell_number(std::size_t n) {
    constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
    // Bell triangle with saturating addition.
    std::vector<std::uint64_t> row{1};
    for (std::size_t i = 1; i <= n; ++i) {
        std::vector<std::uint64_t> next{row.back()};
        for (std::uint64_t x : row) next.push_back(next.back() > cap - x ? cap : next.back() + x);
        row = std::move(next);
    }
    return row.front();
}

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
    if (a != 0 && b > cap / a) return cap;
    return a * b;
}

std::uint64_t key_count(std::size_t r, Treatment t) {
    switch (t) {
        case Treatment::fixed: return 1;
        case Treatment::ordinal: return r - 1 >= 64 ? std::numeric_limits<std::uint64_t>::max() : std::uint64_t{1} << (r - 1);
        case Treatment::nominal: return bell_number(r);
    }
    return 1;
}

// All keys of length r for one variable, renumbered by first occurrence.
std::vector<std::vector<std::size_t>> keys_for(std::size_t r, Treatment t) {
    std::vector<std::vector<std::size_t>> out;
    if (t == Treatment::fixed) {
        std::vector<std::size_t> k(r);
        for (std::size_t i = 0; i < r; ++i) k[i] = i;
        out.push_back(std::move(k));
        return out;
    }
    // Restricted growth strings; ordinal keeps only nondecreasing ones (runs).
    std::vector<std::size_t> k(r, 0), maxes(r, 0);
    while (true) {
        if (t == Treatment::nominal || std::is_sorted(k.begin(), k.end())) out.push_back(k);
        std::size_t i = r;
        while (i-- > 1) {
            const std::size_t limit = (t == Treatment::ordinal) ? k[i - 1] + 1 : maxes[i - 1] + 1;
            if (k[i] < limit) break;
        }
        if (i == 0 || i >= r) break;
        ++k[i];
        maxes[i] = std::max(maxes[i - 1], k[i]);
        for (std::size_t j = i + 1; j < r; ++j) {
            k[j] = (t == Treatment::ordinal) ? k[i] : 0;
            maxes[j] = maxes[i];
        }
    }
    return out;
}

}  // namespace

std::uint64_t enumeration_size(const Shape& shape, const TreatmentConfig& treatments) {
    if (treatments.size() != shape.size()) throw InputError("treatment count does not match table rank");
    std::uint64_t size = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) size = saturating_mul(size, key_count(shape[k], treatments[k]));
    return size;
}

const ShapeOptimum* ExhaustiveResult::best_for(const Shape& shape) const {
    for (const auto& o : optima)
        if (o.shape == shape) return &o;
    return nullptr;
}

ExhaustiveResult exhaustive_partition_search(const SparseTable& table, const TreatmentConfig& treatments,
                                             std::uint64_t size_cap) {
    const std::uint64_t size = enumeration_size(table.shape(), treatments);
    if (size > size_cap)
        throw FeasibilityError("exhaustive search would visit " + std::to_string(size) + " partitions (cap " +
                                   std::to_string(size_cap) + ")",
                               size);

    std::vector<std::vector<std::vector<std::size_t>>> choices;
    for (std::size_t k = 0; k < table.rank(); ++k) choices.push_back(keys_for(table.shape()[k], treatments[k]));

    std::map<Shape, ShapeOptimum> best;
    ExhaustiveResult result;
    std::vector<std::size_t> pos(table.rank(), 0);
    bool more = true;
    while (more) {
        std::vector<std::vector<std::size_t>> keys;
        for (std::size_t k = 0; k < table.rank(); ++k) keys.push_back(choices[k][pos[k]]);
        Partition p(std::move(keys));
        const double loss = expanded_deviance(table, p);
        ++result.enumerated;
        auto it = best.find(p.collapsed_shape());
        if (it == best.end()) {
            best.emplace(p.collapsed_shape(), ShapeOptimum{p.collapsed_shape(), p, loss});
        } else if (loss < it->second.loss) {
            it->second.partition = p;
            it->second.loss = loss;
        }
        more = false;
        for (std::size_t k = table.rank(); k-- > 0;) {
            if (++pos[k] < choices[k].size()) {
                more = true;
                break;
            }
            pos[k] = 0;
        }
    }
    for (auto& [shape, opt] : best) result.optima.push_back(std::move(opt));
    return result;
}

}  // namespace catcollapse
