#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "catcollapse/infoloss.hpp"
#include "catcollapse/table.hpp"

namespace catcollapse {

// Relative tolerance under which two quotients count as tied.
inline constexpr double kQuotientTieTolerance = 1e-12;

struct MergeCandidate {
    std::size_t dim;
    std::size_t u;  // current category indices, u < v
    std::size_t v;
    double g2;
    std::int64_t df;
    double quotient;
};

// Pair with the smallest g2/df over all eligible pairs; ties go to the
// lexicographically smallest (dim, u, v). Empty once at most one dimension
// still has more than one category, or no non-fixed variable can merge.
std::optional<MergeCandidate> select_merge(const SparseTable& table, const TreatmentConfig& treatments);

struct PccStep {
    std::size_t r = 0;
    std::optional<std::size_t> d;   // collapsed variable; empty on row 0
    std::vector<std::size_t> key;   // cumulative key of d over original categories
    Shape dim;                      // shape after the step
    double dev = 0.0;               // cumulative deviance against the saturated model
    std::int64_t dfmod = 0;
    std::int64_t dfres = 0;
    double dev_term = 0.0;
    std::int64_t df_term = 0;
    double adj_rsq = 1.0;
    bool terminal = false;          // closing record once a single marginal vector remains
    std::optional<MergeCandidate> merge;
    Partition partition;            // cumulative partition of the original table
};

struct PccOptions {
    // Stop before the first merge whose g2/df exceeds this value.
    std::optional<double> stop_quotient;
};

struct PccTrace {
    std::vector<PccStep> steps;
    Shape original_shape;
    TreatmentConfig treatments;
    double n = 0.0;
    bool stopped_early = false;

    double final_dev() const { return steps.empty() ? 0.0 : steps.back().dev; }
};

PccTrace run_pcc(const SparseTable& table, const TreatmentConfig& treatments, const PccOptions& options = {});

struct AdjustedRsq {
    double value;
    bool degenerate;  // last deviance was zero; value reported as 1
};

// 1 - dev_r * dfres_last / (dev_last * dfres_r); rows with dfres_r == 0 are 1.
AdjustedRsq adjusted_rsq(double dev_r, std::int64_t dfres_r, double dev_last, std::int64_t dfres_last);

struct PenalizedScores {
    double aic_rel;
    double bic_rel;
};

// AIC and BIC relative to the saturated model. Diagnostic only.
PenalizedScores penalized_scores(double dev, std::int64_t dfmod, double n);

struct CurvePoint {
    std::int64_t dfmod;
    double dev;
};

std::vector<CurvePoint> curve_of(const PccTrace& trace);

// Area under the normalized deviance-vs-parameters curve over the area of the
// triangle. Small values mean the information sits in a few parameters.
double info_concentration(std::span<const CurvePoint> curve);

// G2 between the original table and the saturated model of its collapsed
// table, expanded back to the original shape.
double expanded_deviance(const SparseTable& original, const Partition& partition);

// Number of set partitions of n items; saturates at UINT64_MAX.
std::uint64_t bell_number(std::size_t n);
// Joint partitions the exhaustive search visits; saturates at UINT64_MAX.
std::uint64_t enumeration_size(const Shape& shape, const TreatmentConfig& treatments);

struct ShapeOptimum {
    Shape shape;
    Partition partition;
    double loss;
};

struct ExhaustiveResult {
    std::uint64_t enumerated = 0;
    std::vector<ShapeOptimum> optima;  // one per reachable collapsed shape, sorted by shape

    const ShapeOptimum* best_for(const Shape& shape) const;
};

// Visits every joint partition allowed by the treatments and keeps the
// minimum-loss one per collapsed shape. Throws FeasibilityError past size_cap.
ExhaustiveResult exhaustive_partition_search(const SparseTable& table, const TreatmentConfig& treatments,
                                             std::uint64_t size_cap);

}  // namespace catcollapse
