#include "catcollapse/commands.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "catcollapse/error.hpp"
#include "catcollapse/hllm.hpp"
#include "catcollapse/io.hpp"
#include "catcollapse/pcc.hpp"
#include "catcollapse/report.hpp"

namespace catcollapse {

namespace {

struct Loaded {
    CategoryScheme scheme;
    SparseTable table;
};

Loaded load(const RunConfig& config) {
    if (config.data.empty()) throw InputError("--data is required");
    std::optional<SchemeConfig> scheme_config;
    if (config.config) scheme_config = load_config(*config.config);
    const CountsData data = read_counts(config.data, scheme_config ? &*scheme_config : nullptr);
    if (data.entries.empty()) throw InputError("data file " + config.data.string() + " has no rows");
    Loaded l{data.scheme(), data.table()};
    if (!(l.table.total() > 0.0)) throw InputError("data file " + config.data.string() + " has no positive counts");
    return l;
}

void write_file(const RunConfig& config, const std::string& name, const std::string& content, std::ostream& log) {
    std::filesystem::create_directories(config.out);
    const auto path = config.out / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path.string());
    f << content;
    log << "wrote " << path.string() << '\n';
}

std::size_t resolve_dim(const CategoryScheme& scheme, const std::string& text) {
    if (auto k = scheme.find(text)) return *k;
    std::size_t k = 0;
    std::istringstream in(text);
    if (in >> k && in.eof() && k < scheme.rank()) return k;
    throw InputError("unknown variable '" + text + "'");
}

const PccStep& step_at(const PccTrace& trace, std::size_t r) {
    for (const auto& s : trace.steps)
        if (s.r == r) return s;
    throw InputError("PCC trace has no row " + std::to_string(r));
}

std::string step_loss_matrices(const CategoryScheme& scheme, const SparseTable& table, const PccTrace& trace,
                               const ReportFormat& fmt) {
    std::ostringstream out;
    for (const auto& step : trace.steps) {
        if (step.terminal) continue;
        const SparseTable current = apply_partition(table, step.partition);
        std::size_t spread = 0;
        for (std::size_t r : current.shape()) spread += r > 1;
        if (spread <= 1) continue;
        for (std::size_t d = 0; d < scheme.rank(); ++d) {
            const Treatment t = scheme.variable(d).treatment;
            if (t == Treatment::fixed || current.shape()[d] < 2) continue;
            out << "# step " << step.r << '\n';
            out << render_loss_matrix(loss_matrix(current, d, t), scheme.variable(d), fmt);
        }
    }
    return out.str();
}

int cmd_pcc(const RunConfig& config, std::ostream& log) {
    const auto [scheme, table] = load(config);
    const auto fmt = ReportFormat::with_precision(config.precision);
    PccOptions options;
    options.stop_quotient = config.stop_quotient;
    const PccTrace trace = run_pcc(table, scheme.treatments(), options);
    write_file(config, "pcc_trace.tsv", render_pcc_trace(trace, fmt), log);
    if (config.loss_matrices)
        write_file(config, "pcc_loss_matrices.tsv", step_loss_matrices(scheme, table, trace, fmt), log);
    return kExitOk;
}

int cmd_lossmatrix(const RunConfig& config, std::ostream& log) {
    const auto [scheme, table] = load(config);
    const auto fmt = ReportFormat::with_precision(config.precision);
    std::vector<std::size_t> dims;
    if (config.dim) {
        dims.push_back(resolve_dim(scheme, *config.dim));
    } else {
        for (std::size_t d = 0; d < scheme.rank(); ++d)
            if (scheme.variable(d).treatment != Treatment::fixed) dims.push_back(d);
    }
    for (std::size_t d : dims) {
        const auto& v = scheme.variable(d);
        write_file(config, "lossmatrix_" + v.name + ".tsv",
                   render_loss_matrix(loss_matrix(table, d, v.treatment), v, fmt), log);
    }
    return kExitOk;
}

int cmd_hllm(const RunConfig& config, std::ostream& log) {
    const auto [scheme, table] = load(config);
    const auto fmt = ReportFormat::with_precision(config.precision);
    const auto symbols = scheme.symbols();

    std::optional<Partition> partition;
    if (config.pcc_step) {
        const PccTrace trace = run_pcc(table, scheme.treatments());
        partition = step_at(trace, *config.pcc_step).partition;
    }

    if (config.generators) {
        const ModelSpec spec = parse_generators(*config.generators, scheme);
        const FitResult fit = partition ? fit_hllpm(table, *partition, spec) : ipf_fit(table, spec);
        write_file(config, "hllm_fit.tsv", render_fit(fit, spec, symbols, fmt), log);
        if (!fit.converged) {
            log << "model fit did not converge (max discrepancy " << fit.max_discrepancy << ")\n";
            return kExitNonConvergence;
        }
        return kExitOk;
    }

    const SparseTable working = partition ? apply_partition(table, *partition) : table;
    const BackwardTrace trace = backward_select(working, ModelSpec::saturated(working.rank()));
    write_file(config, "hllm_backward.tsv", render_backward_trace(trace, symbols, fmt), log);
    if (!trace.converged) {
        log << "at least one model fit did not converge\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

int cmd_ratios(const RunConfig& config, std::ostream& log) {
    const auto [scheme, table] = load(config);
    const auto fmt = ReportFormat::with_precision(config.precision);
    const PccTrace trace = run_pcc(table, scheme.treatments());
    const SparseTable reference = independence_model(table);
    const auto margins = one_way_marginals(table);

    std::ostringstream summary, model;
    for (const auto& step : trace.steps) {
        const SparseTable current = apply_partition(table, step.partition);
        const RatioTable own = pearson_ratios(current);
        summary << "# step " << step.r << " dim " << join(current.shape()) << '\n';
        summary << render_grid("counts", current.shape(), current.to_dense(), 0);
        summary << render_grid("ratios", own.shape, own.values, fmt.ratio_decimals);

        const SparseTable expanded = expand_model(current.scaled(1.0 / table.total()), step.partition, margins);
        const RatioTable fitted = pearson_ratios(expanded, reference);
        model << "# step " << step.r << '\n';
        model << render_grid("ratios", fitted.shape, fitted.values, fmt.ratio_decimals);
    }
    write_file(config, "summary_ratios.tsv", summary.str(), log);
    write_file(config, "model_ratios.tsv", model.str(), log);
    return kExitOk;
}

int cmd_curve(const RunConfig& config, std::ostream& log) {
    const auto [scheme, table] = load(config);
    const auto fmt = ReportFormat::with_precision(config.precision);
    const PccTrace trace = run_pcc(table, scheme.treatments());
    const BackwardTrace hllm = backward_select(table, ModelSpec::saturated(table.rank()));

    CurveSeries pcc{"pcc", {}, {}};
    for (const auto& s : trace.steps) {
        pcc.labels.push_back(std::to_string(s.r));
        pcc.points.push_back({s.dfmod, s.dev});
    }
    CurveSeries backward{"hllm", {}, {}};
    const auto symbols = scheme.symbols();
    for (const auto& row : hllm.rows) {
        backward.labels.push_back(row.spec.to_string(symbols));
        backward.points.push_back({row.dfmod, row.dev});
    }
    write_file(config, "curve.csv", render_curve({pcc, backward}, fmt), log);
    log << "pcc concentration " << fixed(info_concentration(curve_of(trace)), fmt.ratio_decimals) << '\n';
    if (!hllm.converged) {
        log << "at least one model fit did not converge\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

int cmd_oracle(const RunConfig& config, std::ostream& log) {
    const auto [scheme, table] = load(config);
    const auto fmt = ReportFormat::with_precision(config.precision);
    const ExhaustiveResult result = exhaustive_partition_search(table, scheme.treatments(), config.oracle_cap);
    const PccTrace trace = run_pcc(table, scheme.treatments());

    std::ostringstream out;
    out << "dim\tloss\tpcc_dev\tgap\tkeys\n";
    for (const auto& opt : result.optima) {
        std::string keys;
        for (std::size_t k = 0; k < opt.partition.rank(); ++k) keys += (k ? " | " : "") + join(opt.partition.key(k));
        const PccStep* on_path = nullptr;
        for (const auto& s : trace.steps)
            if (!s.terminal && s.dim == opt.shape) on_path = &s;
        out << join(opt.shape) << '\t' << fixed(opt.loss, fmt.deviance_decimals) << '\t'
            << (on_path ? fixed(on_path->dev, fmt.deviance_decimals) : "") << '\t'
            << (on_path ? fixed(on_path->dev - opt.loss, fmt.deviance_decimals) : "") << '\t' << keys << '\n';
    }
    write_file(config, "oracle.tsv", out.str(), log);
    log << "enumerated " << result.enumerated << " partitions\n";
    return kExitOk;
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& log) {
    try {
        if (config.precision < 0 || config.precision > 12) throw InputError("--precision must be between 0 and 12");
        if (config.stop_quotient && !(*config.stop_quotient >= 0.0))
            throw InputError("--stop-quotient must be nonnegative");
        if (config.command == "pcc") return cmd_pcc(config, log);
        if (config.command == "lossmatrix") return cmd_lossmatrix(config, log);
        if (config.command == "hllm") return cmd_hllm(config, log);
        if (config.command == "ratios") return cmd_ratios(config, log);
        if (config.command == "curve") return cmd_curve(config, log);
        if (config.command == "oracle") return cmd_oracle(config, log);
        throw InputError("unknown command '" + config.command + "'");
    } catch (const FeasibilityError& e) {
        log << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

}  // namespace catcollapse
