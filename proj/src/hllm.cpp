#include "catcollapse/hllm.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <optional>
#include <set>

#include "catcollapse/error.hpp"

namespace catcollapse {

std::vector<std::size_t> term_dims(Term term) {
    std::vector<std::size_t> dims;
    for (std::size_t k = 0; term != 0; ++k, term >>= 1)
        if (term & 1) dims.push_back(k);
    return dims;
}

Term make_term(std::initializer_list<std::size_t> dims) {
    Term t = 0;
    for (std::size_t d : dims) {
        if (d >= kMaxModelRank) throw InputError("variable index too large for a model term");
        t |= Term{1} << d;
    }
    return t;
}

namespace {

bool subset_of(Term a, Term b) { return (a & ~b) == 0; }

// Larger terms first, then ascending variable lists.
bool canonical_less(Term a, Term b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa > pb;
    return term_dims(a) < term_dims(b);
}

bool lexical_less(Term a, Term b) { return term_dims(a) < term_dims(b); }

}  // namespace

ModelSpec::ModelSpec(std::size_t rank, std::vector<Term> generators) : rank_(rank) {
    if (rank == 0 || rank > kMaxModelRank) throw InputError("model rank out of range");
    const Term all = (Term{1} << rank) - 1;
    std::sort(generators.begin(), generators.end());
    generators.erase(std::unique(generators.begin(), generators.end()), generators.end());
    for (Term g : generators) {
        if (!subset_of(g, all)) throw InputError("model term refers to a variable outside the table");
        if (g == 0) continue;
        bool covered = false;
        for (Term h : generators) covered = covered || (h != g && subset_of(g, h));
        if (!covered) generators_.push_back(g);
    }
    std::sort(generators_.begin(), generators_.end(), canonical_less);
}

ModelSpec ModelSpec::saturated(std::size_t rank) {
    if (rank == 0 || rank > kMaxModelRank) throw InputError("model rank out of range");
    return ModelSpec(rank, {(Term{1} << rank) - 1});
}

ModelSpec ModelSpec::main_effects(std::size_t rank) {
    std::vector<Term> g;
    for (std::size_t k = 0; k < rank; ++k) g.push_back(Term{1} << k);
    return ModelSpec(rank, std::move(g));
}

std::vector<Term> ModelSpec::closure() const {
    std::set<Term> terms{0};
    for (Term g : generators_) {
        // Enumerate all submasks of g.
        for (Term s = g;; s = (s - 1) & g) {
            terms.insert(s);
            if (s == 0) break;
        }
    }
    return {terms.begin(), terms.end()};
}

bool ModelSpec::contains(Term term) const {
    if (term == 0) return true;
    return std::any_of(generators_.begin(), generators_.end(), [&](Term g) { return subset_of(term, g); });
}

bool ModelSpec::is_saturated() const { return rank_ > 0 && contains((Term{1} << rank_) - 1); }

ModelSpec ModelSpec::without(Term generator) const {
    auto it = std::find(generators_.begin(), generators_.end(), generator);
    if (it == generators_.end()) throw InputError("term is not a generator of the model");
    std::vector<Term> next;
    for (Term g : generators_)
        if (g != generator) next.push_back(g);
    for (std::size_t k : term_dims(generator)) {
        const Term face = generator & ~(Term{1} << k);
        if (face != 0) next.push_back(face);
    }
    return ModelSpec(rank_, std::move(next));
}

std::string ModelSpec::to_string(const std::vector<std::string>& symbols) const {
    if (generators_.empty()) return "[]";
    std::string out;
    for (Term g : generators_) {
        out += '[';
        for (std::size_t k : term_dims(g)) out += k < symbols.size() ? symbols[k] : std::to_string(k);
        out += ']';
    }
    return out;
}

ModelSpec parse_generators(std::string_view text, const CategoryScheme& scheme) {
    std::vector<Term> gens;
    std::size_t i = 0;
    auto lookup = [&](std::string_view token) -> std::size_t {
        if (auto k = scheme.find(token)) return *k;
        for (std::size_t k = 0; k < scheme.rank(); ++k)
            if (scheme.variable(k).symbol == token) return k;
        throw InputError("unknown variable '" + std::string(token) + "' in generator list");
    };
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    while (i < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        if (text[i] != '[') throw InputError("generator list must be bracketed, e.g. [ab][c]");
        const std::size_t close = text.find(']', i);
        if (close == std::string_view::npos) throw InputError("unterminated '[' in generator list");
        const std::string_view body = trim(text.substr(i + 1, close - i - 1));
        Term t = 0;
        if (body.find(',') != std::string_view::npos) {
            std::size_t start = 0;
            while (start <= body.size()) {
                std::size_t comma = body.find(',', start);
                if (comma == std::string_view::npos) comma = body.size();
                t |= Term{1} << lookup(trim(body.substr(start, comma - start)));
                start = comma + 1;
            }
        } else if (!body.empty()) {
            if (auto k = scheme.find(body); k && body.size() > 1) {
                t |= Term{1} << *k;
            } else {
                for (char c : body) t |= Term{1} << lookup(std::string_view(&c, 1));
            }
        }
        gens.push_back(t);
        i = close + 1;
    }
    return ModelSpec(scheme.rank(), std::move(gens));
}

std::int64_t model_df(const ModelSpec& spec, const Shape& shape) {
    if (spec.rank() != shape.size()) throw InputError("model rank does not match shape");
    std::int64_t df = 0;
    for (Term t : spec.closure()) {
        if (t == 0) continue;
        std::int64_t d = 1;
        for (std::size_t k : term_dims(t)) d *= static_cast<std::int64_t>(shape[k]) - 1;
        df += d;
    }
    return df;
}

double deviance(const SparseTable& observed, const SparseTable& expected) {
    if (observed.shape() != expected.shape()) throw InputError("deviance needs tables of the same shape");
    double sum = 0.0;
    for (const auto& c : observed.cells()) {
        const double e = expected.at(c.index);
        if (!(e > 0.0)) throw DegeneracyError("expected count is zero where a count was observed");
        sum += c.count * std::log(c.count / e);
    }
    return std::max(0.0, 2.0 * sum);
}

namespace {

constexpr std::uint64_t kMaxDenseCells = std::uint64_t{1} << 28;

struct MarginMap {
    std::vector<std::uint32_t> index;  // cell -> marginal cell
    std::vector<double> observed;
    std::vector<double> fitted;
};

MarginMap make_margin_map(const SparseTable& table, Term term) {
    const auto dims = term_dims(term);
    const auto& shape = table.shape();
    const auto& strides = table.strides();
    std::vector<std::uint64_t> out_strides(dims.size(), 1);
    std::uint64_t out_size = 1;
    for (std::size_t j = dims.size(); j-- > 0;) {
        out_strides[j] = out_size;
        out_size *= shape[dims[j]];
    }
    MarginMap m;
    m.index.resize(table.size());
    for (std::uint64_t i = 0; i < table.size(); ++i) {
        std::uint64_t o = 0;
        for (std::size_t j = 0; j < dims.size(); ++j) o += ((i / strides[dims[j]]) % shape[dims[j]]) * out_strides[j];
        m.index[i] = static_cast<std::uint32_t>(o);
    }
    m.observed.assign(out_size, 0.0);
    for (const auto& c : table.cells()) m.observed[m.index[c.index]] += c.count;
    m.fitted.assign(out_size, 0.0);
    return m;
}

void sum_into(MarginMap& m, const std::vector<double>& values) {
    std::fill(m.fitted.begin(), m.fitted.end(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) m.fitted[m.index[i]] += values[i];
}

}  // namespace

FitResult ipf_fit(const SparseTable& table, const ModelSpec& spec, const IpfOptions& options) {
    if (!(table.total() > 0.0)) throw InputError("model fitting needs a table with positive total");
    if (!(options.tol > 0.0)) throw InputError("IPF tolerance must be positive");
    if (spec.rank() != table.rank()) throw InputError("model rank does not match table rank");

    FitResult result;
    result.dfmod = model_df(spec, table.shape());
    result.dfres = static_cast<std::int64_t>(table.size()) - 1 - result.dfmod;

    if (spec.is_saturated()) {
        result.fitted = table;
        result.dev = 0.0;
        return result;
    }
    if (table.size() > kMaxDenseCells) throw InputError("table too large for model fitting");

    std::vector<double> fitted(table.size(), table.total() / static_cast<double>(table.size()));
    std::vector<MarginMap> margins;
    for (Term g : spec.generators()) margins.push_back(make_margin_map(table, g));

    auto discrepancy = [&] {
        double worst = 0.0;
        for (auto& m : margins) {
            sum_into(m, fitted);
            for (std::size_t j = 0; j < m.observed.size(); ++j)
                worst = std::max(worst, std::abs(m.fitted[j] - m.observed[j]));
        }
        return worst;
    };

    result.converged = margins.empty();
    for (int it = 1; it <= options.max_iter && !margins.empty(); ++it) {
        for (auto& m : margins) {
            sum_into(m, fitted);
            for (std::size_t i = 0; i < fitted.size(); ++i) {
                const double f = m.fitted[m.index[i]];
                fitted[i] = f > 0.0 ? fitted[i] * (m.observed[m.index[i]] / f) : 0.0;
            }
        }
        result.iterations = it;
        result.max_discrepancy = discrepancy();
        if (result.max_discrepancy <= options.tol) {
            result.converged = true;
            break;
        }
    }

    result.fitted = SparseTable::from_dense(table.shape(), fitted);
    result.dev = deviance(table, result.fitted);
    return result;
}

BackwardTrace backward_select(const SparseTable& table, const ModelSpec& start, const IpfOptions& options) {
    BackwardTrace trace;
    FitResult current = ipf_fit(table, start, options);
    ModelSpec spec = start;
    trace.rows.push_back({0, spec, current.dev, current.dfmod, current.dfres, 0.0, 0, 1.0, current.converged});
    trace.converged = current.converged;

    while (true) {
        std::vector<Term> removable;
        for (Term g : spec.generators())
            if (std::popcount(g) >= 2) removable.push_back(g);
        if (removable.empty()) break;
        std::sort(removable.begin(), removable.end(), lexical_less);

        struct Choice {
            ModelSpec spec;
            FitResult fit;
            double quotient;
        };
        std::optional<Choice> best;
        for (Term g : removable) {
            ModelSpec next = spec.without(g);
            FitResult fit = ipf_fit(table, next, options);
            const std::int64_t ddf = current.dfmod - fit.dfmod;
            const double q = ddf > 0 ? (fit.dev - current.dev) / static_cast<double>(ddf) : 0.0;
            if (!best || q < best->quotient - 1e-12 * std::abs(best->quotient))
                best = Choice{std::move(next), std::move(fit), q};
        }

        BackwardRow row;
        row.r = trace.rows.back().r + 1;
        row.spec = best->spec;
        row.dev = best->fit.dev;
        row.dfmod = best->fit.dfmod;
        row.dfres = best->fit.dfres;
        row.dev_term = best->fit.dev - current.dev;
        row.df_term = current.dfmod - best->fit.dfmod;
        row.converged = best->fit.converged;
        trace.converged = trace.converged && row.converged;
        trace.rows.push_back(row);
        spec = best->spec;
        current = std::move(best->fit);
    }

    const auto& last = trace.rows.back();
    for (auto& row : trace.rows) {
        if (row.dfres == 0) row.adj_rsq = 1.0;
        else if (last.dev == 0.0) row.adj_rsq = 1.0;
        else row.adj_rsq = 1.0 - row.dev * static_cast<double>(last.dfres) / (last.dev * static_cast<double>(row.dfres));
    }
    return trace;
}

FitResult fit_hllpm(const SparseTable& original, const Partition& partition, const ModelSpec& spec,
                    const IpfOptions& options) {
    if (partition.original_shape() != original.shape()) throw InputError("partition does not match table shape");
    const double n = original.total();
    const SparseTable collapsed = apply_partition(original, partition);
    const FitResult inner = ipf_fit(collapsed, spec, options);
    const SparseTable probs = expand_model(inner.fitted.scaled(1.0 / inner.fitted.total()), partition,
                                           one_way_marginals(original));

    FitResult result;
    result.fitted = probs.scaled(n);
    result.dev = deviance(original, result.fitted);
    std::int64_t within = 0;
    for (std::size_t k = 0; k < original.rank(); ++k)
        within += static_cast<std::int64_t>(original.shape()[k] - partition.group_count(k));
    result.dfmod = inner.dfmod + within;
    result.dfres = static_cast<std::int64_t>(original.size()) - 1 - result.dfmod;
    result.iterations = inner.iterations;
    result.converged = inner.converged;
    result.max_discrepancy = inner.max_discrepancy;
    return result;
}

SparseTable independence_model(const SparseTable& table) {
    const double n = table.total();
    if (table.size() > kMaxDenseCells) throw InputError("table too large for a dense independence model");
    if (!(n > 0.0)) return SparseTable(table.shape());
    const auto margins = one_way_marginals(table);
    std::vector<double> values(table.size());
    for (std::uint64_t i = 0; i < table.size(); ++i) {
        double v = n;
        std::uint64_t rest = i;
        for (std::size_t k = 0; k < table.rank(); ++k) {
            const std::uint64_t c = rest / table.strides()[k];
            rest %= table.strides()[k];
            v *= margins[k][c] / n;
        }
        values[i] = v;
    }
    return SparseTable::from_dense(table.shape(), values);
}

double RatioTable::at(std::span<const std::size_t> coords) const {
    if (coords.size() != shape.size()) throw InputError("coordinate rank does not match ratio table");
    std::uint64_t idx = 0;
    for (std::size_t k = 0; k < coords.size(); ++k) {
        if (coords[k] >= shape[k]) throw InputError("coordinate out of range");
        idx = idx * shape[k] + coords[k];
    }
    return values[idx];
}

RatioTable pearson_ratios(const SparseTable& observed, const SparseTable& expected) {
    if (observed.shape() != expected.shape()) throw InputError("ratio tables must share a shape");
    if (observed.size() > kMaxDenseCells) throw InputError("table too large for a ratio grid");
    const double no = observed.total(), ne = expected.total();
    RatioTable out{observed.shape(), std::vector<double>(observed.size(), 1.0)};
    const auto exp_dense = expected.to_dense();
    const auto obs_dense = observed.to_dense();
    for (std::size_t i = 0; i < obs_dense.size(); ++i) {
        const double p = no > 0.0 ? obs_dense[i] / no : 0.0;
        const double q = ne > 0.0 ? exp_dense[i] / ne : 0.0;
        if (q > 0.0) {
            out.values[i] = p / q;
        } else if (p > 0.0) {
            throw DegeneracyError("positive count in a cell with zero expected probability");
        }
    }
    return out;
}

RatioTable pearson_ratios(const SparseTable& observed, const FitResult& reference) {
    return pearson_ratios(observed, reference.fitted);
}

RatioTable pearson_ratios(const SparseTable& observed) { return pearson_ratios(observed, independence_model(observed)); }

}  // namespace catcollapse
