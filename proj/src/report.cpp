#include "catcollapse/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace catcollapse {

std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s(buf);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string join(const std::vector<std::size_t>& values, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(values[i]);
    }
    return out;
}

ReportFormat ReportFormat::with_precision(int deviance_decimals) {
    return {deviance_decimals, deviance_decimals + 1};
}

std::string render_pcc_trace(const PccTrace& trace, const ReportFormat& fmt) {
    std::ostringstream out;
    out << "r\td\tkey\tdim\tdev\tdfmod\tdfres\tdev_term\tdf_term\tadj_rsq\n";
    for (const auto& s : trace.steps) {
        out << s.r << '\t' << (s.d ? std::to_string(*s.d) : "") << '\t' << join(s.key) << '\t' << join(s.dim) << '\t'
            << fixed(s.dev, fmt.deviance_decimals) << '\t' << s.dfmod << '\t' << s.dfres << '\t'
            << fixed(s.dev_term, fmt.deviance_decimals) << '\t' << s.df_term << '\t'
            << fixed(s.adj_rsq, fmt.ratio_decimals) << '\n';
    }
    return out.str();
}

std::string render_loss_matrix(const LossMatrix& matrix, const VariableDef& variable, const ReportFormat& fmt) {
    std::ostringstream out;
    out << "# variable " << variable.name << " dim " << matrix.dim() << " mode "
        << (matrix.mode() == PairMode::adjacent_only ? "adjacent" : "all_pairs") << " df " << matrix.df() << '\n';
    const std::size_t r = matrix.categories();
    for (std::size_t v = 0; v < r; ++v) out << '\t' << v;
    out << '\n';
    for (std::size_t u = 0; u < r; ++u) {
        out << u;
        for (std::size_t v = 0; v < r; ++v) {
            out << '\t';
            if (v > u)
                if (auto e = matrix.at(u, v)) out << fixed(e->g2, fmt.deviance_decimals);
        }
        out << '\n';
    }
    return out.str();
}

std::string render_backward_trace(const BackwardTrace& trace, const std::vector<std::string>& symbols,
                                  const ReportFormat& fmt) {
    std::ostringstream out;
    out << "r\tterms\tdev\tdfmod\tdfres\tdev_term\tdf_term\tadj_rsq\n";
    for (const auto& row : trace.rows) {
        out << row.r << '\t' << row.spec.to_string(symbols) << '\t' << fixed(row.dev, fmt.deviance_decimals) << '\t'
            << row.dfmod << '\t' << row.dfres << '\t' << fixed(row.dev_term, fmt.deviance_decimals) << '\t'
            << row.df_term << '\t' << fixed(row.adj_rsq, fmt.ratio_decimals) << '\n';
    }
    return out.str();
}

std::string render_fit(const FitResult& fit, const ModelSpec& spec, const std::vector<std::string>& symbols,
                       const ReportFormat& fmt) {
    std::ostringstream out;
    out << "terms\tdev\tdfmod\tdfres\titerations\tconverged\n";
    out << spec.to_string(symbols) << '\t' << fixed(fit.dev, fmt.deviance_decimals) << '\t' << fit.dfmod << '\t'
        << fit.dfres << '\t' << fit.iterations << '\t' << (fit.converged ? "yes" : "no") << '\n';
    return out.str();
}

std::string render_grid(const std::string& label, const Shape& shape, const std::vector<double>& values, int decimals) {
    std::ostringstream out;
    const std::size_t rows = shape.empty() ? 1 : shape[0];
    const std::size_t cols = rows ? values.size() / rows : 0;
    for (std::size_t i = 0; i < rows; ++i) {
        out << (i == 0 ? label : "");
        for (std::size_t j = 0; j < cols; ++j) out << '\t' << fixed(values[i * cols + j], decimals);
        out << '\n';
    }
    return out.str();
}

std::string render_curve(const std::vector<CurveSeries>& series, const ReportFormat& fmt) {
    std::ostringstream out;
    out << "series,label,dfmod,dev\n";
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.points.size(); ++i)
            out << s.name << ',' << (i < s.labels.size() ? s.labels[i] : "") << ',' << s.points[i].dfmod << ','
                << fixed(s.points[i].dev, fmt.deviance_decimals) << '\n';
    return out.str();
}

}  // namespace catcollapse
