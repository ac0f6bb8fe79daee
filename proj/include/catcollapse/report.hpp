#pragma once

#include <string>
#include <vector>

#include "catcollapse/hllm.hpp"
#include "catcollapse/infoloss.hpp"
#include "catcollapse/pcc.hpp"
#include "catcollapse/table.hpp"

namespace catcollapse {

// Fixed-point text with `decimals` places; never prints "-0.00".
std::string fixed(double value, int decimals);

std::string join(const std::vector<std::size_t>& values, const std::string& sep = " ");

struct ReportFormat {
    int deviance_decimals = 2;
    int ratio_decimals = 3;  // ratios and adjusted R^2

    static ReportFormat with_precision(int deviance_decimals);
};

// Columns r, d, key, dim, dev, dfmod, dfres, dev_term, df_term, adj_rsq.
std::string render_pcc_trace(const PccTrace& trace, const ReportFormat& fmt);

// Upper-triangular grid of G2 values with a leading comment line.
std::string render_loss_matrix(const LossMatrix& matrix, const VariableDef& variable, const ReportFormat& fmt);

std::string render_backward_trace(const BackwardTrace& trace, const std::vector<std::string>& symbols,
                                  const ReportFormat& fmt);

std::string render_fit(const FitResult& fit, const ModelSpec& spec, const std::vector<std::string>& symbols,
                       const ReportFormat& fmt);

// One block per row of the first dimension; remaining dimensions flattened
// row-major into columns.
std::string render_grid(const std::string& label, const Shape& shape, const std::vector<double>& values, int decimals);

struct CurveSeries {
    std::string name;
    std::vector<std::string> labels;
    std::vector<CurvePoint> points;
};

// CSV with header series,label,dfmod,dev.
std::string render_curve(const std::vector<CurveSeries>& series, const ReportFormat& fmt);

}  // namespace catcollapse
