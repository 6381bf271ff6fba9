// Command-line front end: one subcommand per distribution operation plus the
// two grid emitters. Results go to stdout (text, json, or csv), diagnostics to
// stderr. Exit codes: 0 ok, 1 usage, 2 validation, 3 numerical.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <mvdist/mvdist.hpp>

using json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class InfinitySign { None, Negative, Positive };

double parse_real_token(const std::string& token, InfinitySign dot_sign, const char* flag) {
    std::string t = token;
    t.erase(0, t.find_first_not_of(" \t"));
    t.erase(t.find_last_not_of(" \t") + 1);
    if (t == ".") {
        switch (dot_sign) {
            case InfinitySign::Negative:
                return mvdist::kNegInf;
            case InfinitySign::Positive:
                return mvdist::kPosInf;
            case InfinitySign::None:
                throw UsageError(std::string(flag) + ": '.' is only valid in bound and truncation vectors");
        }
    }
    if (t == "inf" || t == "+inf") return mvdist::kPosInf;
    if (t == "-inf") return mvdist::kNegInf;
    try {
        std::size_t pos = 0;
        const double v = std::stod(t, &pos);
        if (pos != t.size()) throw UsageError("");
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string(flag) + ": cannot parse '" + t + "' as a real number");
    }
}

std::vector<double> parse_vector(const std::string& text, InfinitySign dot_sign, const char* flag) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string token =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        out.push_back(parse_real_token(token, dot_sign, flag));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw UsageError(std::string(flag) + ": empty vector");
    return out;
}

mvdist::Matrix parse_matrix(const std::string& text, const char* flag) {
    std::vector<std::vector<double>> rows;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t semi = text.find(';', start);
        const std::string row =
            text.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
        rows.push_back(parse_vector(row, InfinitySign::None, flag));
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    const std::size_t k = rows.size();
    mvdist::Matrix m(k, rows.front().size());
    for (std::size_t i = 0; i < k; ++i) {
        if (rows[i].size() != m.cols())
            throw UsageError(std::string(flag) + ": rows must all have the same length");
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

mvdist::FactorizationMethod parse_method(const std::string& name) {
    if (name == "cholesky") return mvdist::FactorizationMethod::Cholesky;
    if (name == "eigen") return mvdist::FactorizationMethod::Eigen;
    if (name == "svd") return mvdist::FactorizationMethod::Svd;
    throw UsageError("--method: unknown method '" + name + "' (choose cholesky, eigen, or svd)");
}

mvdist::Tail parse_tail(const std::string& name) {
    if (name == "lower") return mvdist::Tail::Lower;
    if (name == "upper") return mvdist::Tail::Upper;
    if (name == "both") return mvdist::Tail::Both;
    throw UsageError("--tail: unknown tail '" + name + "' (choose lower, upper, or both)");
}

json real_to_json(double v) {
    if (std::isfinite(v)) return v;
    if (v == mvdist::kPosInf) return "inf";
    if (v == mvdist::kNegInf) return "-inf";
    return "nan";
}

json vector_to_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(real_to_json(x));
    return a;
}

json matrix_to_json(const mvdist::Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(real_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_text_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.7g", v);
    return buf;
}

std::string format_csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// One invocation's worth of output. Scalar commands fill `fields`; tabular
// commands (samplers, grids) fill `columns` + `rows`.
struct CommandOutput {
    std::string command;
    json inputs = json::object();
    json result;
    json error_estimate;
    json diagnostics = json::object();
    std::vector<std::pair<std::string, double>> fields;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void print_output(const CommandOutput& out, const std::string& format) {
    if (format == "json") {
        json j;
        j["command"] = out.command;
        j["inputs"] = out.inputs;
        j["result"] = out.result;
        j["error_estimate"] = out.error_estimate;
        j["diagnostics"] = out.diagnostics;
        std::cout << j.dump(2) << "\n";
        return;
    }
    if (format == "csv") {
        if (!out.columns.empty()) {
            for (std::size_t c = 0; c < out.columns.size(); ++c)
                std::cout << (c ? "," : "") << out.columns[c];
            std::cout << "\n";
            for (const auto& row : out.rows) {
                for (std::size_t c = 0; c < row.size(); ++c)
                    std::cout << (c ? "," : "") << format_csv_number(row[c]);
                std::cout << "\n";
            }
        } else {
            for (std::size_t c = 0; c < out.fields.size(); ++c)
                std::cout << (c ? "," : "") << out.fields[c].first;
            std::cout << "\n";
            for (std::size_t c = 0; c < out.fields.size(); ++c)
                std::cout << (c ? "," : "") << format_csv_number(out.fields[c].second);
            std::cout << "\n";
        }
        return;
    }
    // text
    if (!out.columns.empty()) {
        for (const auto& name : out.columns) std::printf("%14s", name.c_str());
        std::printf("\n");
        for (const auto& row : out.rows) {
            for (double v : row) std::printf("%14s", format_text_number(v).c_str());
            std::printf("\n");
        }
    } else {
        std::size_t width = 0;
        for (const auto& [name, value] : out.fields) width = std::max(width, name.size());
        for (const auto& [name, value] : out.fields)
            std::printf("%-*s  %s\n", static_cast<int>(width), name.c_str(),
                        format_text_number(value).c_str());
    }
}

// Flag storage shared by all subcommands; each subcommand registers only the
// options the paper gives it.
struct Options {
    std::string x, mean, delta, sigma, lower, upper, lower_trunc, upper_trunc;
    double df = 1.0;
    double p = 0.0;
    std::string tail = "lower";
    long itermax = 1000000;
    double tolerance = 0.000001;
    int shifts = 12;
    int samples = 1000;
    double alpha = 3.0;
    std::uint64_t n = 1;
    std::string method = "cholesky";
    bool log_density = false;
    std::uint64_t seed = 0;
    std::string format = "text";
    int threads = 0;
    std::string integrator = "qmc";
    std::string family;
    double grid_min = -3.0, grid_max = 3.0, grid_step = 0.1;
    double tmin = -8.0, tmax = 1.0, tstep = 0.25;
};

void add_format_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--format", opt.format, "Output format: text, json, or csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
}

void add_qmc_flags(CLI::App* cmd, Options& opt, bool with_alpha = true) {
    cmd->add_option("--shifts", opt.shifts, "Randomized lattice shifts (default 12)");
    cmd->add_option("--samples", opt.samples, "Samples per shift (default 1000)");
    if (with_alpha)
        cmd->add_option("--alpha", opt.alpha, "Monte Carlo confidence factor (default 3)");
    cmd->add_option("--seed", opt.seed, "Random seed (default 0)");
    cmd->add_option("--threads", opt.threads, "Worker thread cap, 0 = all cores");
}

void add_bisection_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--tail", opt.tail, "Quantile tail: lower, upper, or both");
    cmd->add_option("--itermax", opt.itermax, "Bisection iteration cap (default 1000000)");
    cmd->add_option("--tolerance", opt.tolerance, "Bisection tolerance (default 0.000001)");
}

void add_integrator_flag(CLI::App* cmd, Options& opt) {
    cmd->add_option("--integrator", opt.integrator,
                    "Rectangle-probability integrator (this build provides 'qmc')");
}

void check_integrator(const Options& opt) {
    if (opt.integrator != "qmc")
        throw UsageError("--integrator: unsupported integrator '" + opt.integrator +
                         "' (this build provides 'qmc')");
}

void merge_inputs(json& inputs, const json& extra) {
    for (const auto& [key, val] : extra.items()) inputs[key] = val;
}

json qmc_inputs(const Options& opt, bool with_alpha = true) {
    json j = json::object();
    j["shifts"] = opt.shifts;
    j["samples"] = opt.samples;
    if (with_alpha) j["alpha"] = opt.alpha;
    j["seed"] = opt.seed;
    return j;
}

json quantile_diagnostics(const mvdist::QuantileResult& r) {
    json d = json::object();
    d["flag"] = r.flag;
    d["fquantile"] = r.fquantile;
    d["iterations"] = r.iterations;
    return d;
}

void fill_sample_output(CommandOutput& out, const mvdist::SampleMatrix& sample) {
    const std::size_t k = sample.draws.cols();
    for (std::size_t j = 0; j < k; ++j) out.columns.push_back("x" + std::to_string(j + 1));
    json result = json::array();
    out.rows.reserve(sample.draws.rows());
    for (std::size_t i = 0; i < sample.draws.rows(); ++i) {
        std::vector<double> row(k);
        json jrow = json::array();
        for (std::size_t j = 0; j < k; ++j) {
            row[j] = sample.draws(i, j);
            jrow.push_back(row[j]);
        }
        out.rows.push_back(std::move(row));
        result.push_back(std::move(jrow));
    }
    out.result = std::move(result);
}

mvdist::QmcConfig qmc_config(const Options& opt) {
    return mvdist::QmcConfig{opt.shifts, opt.samples, opt.alpha};
}

mvdist::BisectionConfig bisection_config(const Options& opt) {
    return mvdist::BisectionConfig{opt.itermax, opt.tolerance, parse_tail(opt.tail)};
}

// ---------------------------------------------------------------------------
// subcommand handlers

CommandOutput run_density(const std::string& command, const Options& opt, bool t_family,
                          bool truncated) {
    check_integrator(opt);
    const char* location_flag = t_family ? "--delta" : "--mean";
    const auto x = parse_vector(opt.x, InfinitySign::None, "--x");
    const auto location =
        parse_vector(t_family ? opt.delta : opt.mean, InfinitySign::None, location_flag);
    const auto sigma = parse_matrix(opt.sigma, "--sigma");

    CommandOutput out;
    out.command = command;
    out.inputs["x"] = vector_to_json(x);
    out.inputs[t_family ? "delta" : "mean"] = vector_to_json(location);
    out.inputs["sigma"] = matrix_to_json(sigma);
    if (t_family) out.inputs["df"] = opt.df;
    out.inputs["logdensity"] = opt.log_density;

    double value = 0.0;
    if (!truncated) {
        value = t_family ? mvdist::mvt_density(x, location, sigma, opt.df, opt.log_density)
                         : mvdist::mvn_density(x, location, sigma, opt.log_density);
    } else {
        const mvdist::TruncationBox box{
            parse_vector(opt.lower_trunc, InfinitySign::Negative, "--lower-truncation"),
            parse_vector(opt.upper_trunc, InfinitySign::Positive, "--upper-truncation")};
        out.inputs["lowertruncation"] = vector_to_json(box.lower);
        out.inputs["uppertruncation"] = vector_to_json(box.upper);
        merge_inputs(out.inputs, qmc_inputs(opt));
        value = t_family
                    ? mvdist::tmvt_density(x, location, sigma, opt.df, box, opt.log_density,
                                           qmc_config(opt), opt.seed, nullptr, opt.threads)
                    : mvdist::tmvn_density(x, location, sigma, box, opt.log_density,
                                           qmc_config(opt), opt.seed, nullptr, opt.threads);
    }
    out.result = value;
    out.fields.emplace_back(opt.log_density ? "logdensity" : "density", value);
    return out;
}

CommandOutput run_probability(const std::string& command, const Options& opt, bool t_family,
                              bool truncated) {
    check_integrator(opt);
    const char* location_flag = t_family ? "--delta" : "--mean";
    const auto lower = parse_vector(opt.lower, InfinitySign::Negative, "--lower");
    const auto upper = parse_vector(opt.upper, InfinitySign::Positive, "--upper");
    const auto location =
        parse_vector(t_family ? opt.delta : opt.mean, InfinitySign::None, location_flag);
    const auto sigma = parse_matrix(opt.sigma, "--sigma");
    const mvdist::ExtendedBounds bounds{lower, upper};

    CommandOutput out;
    out.command = command;
    out.inputs["lower"] = vector_to_json(lower);
    out.inputs["upper"] = vector_to_json(upper);
    out.inputs[t_family ? "delta" : "mean"] = vector_to_json(location);
    out.inputs["sigma"] = matrix_to_json(sigma);
    if (t_family) out.inputs["df"] = opt.df;
    merge_inputs(out.inputs, qmc_inputs(opt));
    out.inputs["alpha"] = opt.alpha;

    mvdist::ProbabilityEstimate est;
    if (!truncated) {
        est = t_family ? mvdist::mvt_probability(bounds, location, sigma, opt.df, qmc_config(opt),
                                                 opt.seed, opt.threads)
                       : mvdist::mvn_probability(bounds, location, sigma, qmc_config(opt),
                                                 opt.seed, opt.threads);
    } else {
        const mvdist::TruncationBox box{
            parse_vector(opt.lower_trunc, InfinitySign::Negative, "--lower-truncation"),
            parse_vector(opt.upper_trunc, InfinitySign::Positive, "--upper-truncation")};
        out.inputs["lowertruncation"] = vector_to_json(box.lower);
        out.inputs["uppertruncation"] = vector_to_json(box.upper);
        est = t_family ? mvdist::tmvt_probability(bounds, location, sigma, opt.df, box,
                                                  qmc_config(opt), opt.seed, opt.threads)
                       : mvdist::tmvn_probability(bounds, location, sigma, box, qmc_config(opt),
                                                  opt.seed, opt.threads);
    }
    out.result = est.value;
    out.error_estimate = est.error;
    out.fields.emplace_back("probability", est.value);
    out.fields.emplace_back("error", est.error);
    return out;
}

CommandOutput run_quantile(const std::string& command, const Options& opt, bool t_family,
                           bool truncated) {
    check_integrator(opt);
    const char* location_flag = t_family ? "--delta" : "--mean";
    const auto location =
        parse_vector(t_family ? opt.delta : opt.mean, InfinitySign::None, location_flag);
    const auto sigma = parse_matrix(opt.sigma, "--sigma");

    CommandOutput out;
    out.command = command;
    out.inputs["p"] = opt.p;
    out.inputs[t_family ? "delta" : "mean"] = vector_to_json(location);
    out.inputs["sigma"] = matrix_to_json(sigma);
    if (t_family) out.inputs["df"] = opt.df;
    out.inputs["tail"] = opt.tail;
    out.inputs["itermax"] = opt.itermax;
    out.inputs["tolerance"] = opt.tolerance;
    merge_inputs(out.inputs, qmc_inputs(opt, false));

    mvdist::QuantileResult r;
    if (!truncated) {
        r = t_family
                ? mvdist::mvt_quantile(opt.p, location, sigma, opt.df, bisection_config(opt),
                                       qmc_config(opt), opt.seed, opt.threads)
                : mvdist::mvn_quantile(opt.p, location, sigma, bisection_config(opt),
                                       qmc_config(opt), opt.seed, opt.threads);
    } else {
        const mvdist::TruncationBox box{
            parse_vector(opt.lower_trunc, InfinitySign::Negative, "--lower-truncation"),
            parse_vector(opt.upper_trunc, InfinitySign::Positive, "--upper-truncation")};
        out.inputs["lowertruncation"] = vector_to_json(box.lower);
        out.inputs["uppertruncation"] = vector_to_json(box.upper);
        r = t_family
                ? mvdist::tmvt_quantile(opt.p, location, sigma, opt.df, box, bisection_config(opt),
                                        qmc_config(opt), opt.seed, opt.threads)
                : mvdist::tmvn_quantile(opt.p, location, sigma, box, bisection_config(opt),
                                        qmc_config(opt), opt.seed, opt.threads);
    }
    out.result = r.quantile;
    out.error_estimate = r.error;
    out.diagnostics = quantile_diagnostics(r);
    out.fields.emplace_back("quantile", r.quantile);
    out.fields.emplace_back("error", r.error);
    out.fields.emplace_back("flag", static_cast<double>(r.flag));
    out.fields.emplace_back("fquantile", r.fquantile);
    out.fields.emplace_back("iterations", static_cast<double>(r.iterations));
    return out;
}

CommandOutput run_sampler(const std::string& command, const Options& opt, bool t_family,
                          bool truncated) {
    const char* location_flag = t_family ? "--delta" : "--mean";
    const auto location =
        parse_vector(t_family ? opt.delta : opt.mean, InfinitySign::None, location_flag);
    const auto sigma = parse_matrix(opt.sigma, "--sigma");
    const auto method = parse_method(opt.method);

    CommandOutput out;
    out.command = command;
    out.inputs[t_family ? "delta" : "mean"] = vector_to_json(location);
    out.inputs["sigma"] = matrix_to_json(sigma);
    if (t_family) out.inputs["df"] = opt.df;
    out.inputs["n"] = opt.n;
    out.inputs["method"] = opt.method;
    out.inputs["seed"] = opt.seed;

    mvdist::SampleMatrix sample;
    if (!truncated) {
        sample = t_family ? mvdist::sample_mvt(opt.n, location, sigma, opt.df, method, opt.seed)
                          : mvdist::sample_mvn(opt.n, location, sigma, method, opt.seed);
    } else {
        const mvdist::TruncationBox box{
            parse_vector(opt.lower_trunc, InfinitySign::Negative, "--lower-truncation"),
            parse_vector(opt.upper_trunc, InfinitySign::Positive, "--upper-truncation")};
        out.inputs["lowertruncation"] = vector_to_json(box.lower);
        out.inputs["uppertruncation"] = vector_to_json(box.upper);
        sample = t_family
                     ? mvdist::sample_tmvt(opt.n, location, sigma, opt.df, box, method, opt.seed)
                     : mvdist::sample_tmvn(opt.n, location, sigma, box, method, opt.seed);
    }
    fill_sample_output(out, sample);
    out.diagnostics["method"] = opt.method;
    return out;
}

CommandOutput run_density_grid(const Options& opt) {
    const bool t_family = opt.family == "mvt" || opt.family == "tmvt";
    const bool truncated = opt.family == "tmvnormal" || opt.family == "tmvt";
    if (!t_family && !truncated && opt.family != "mvnormal")
        throw UsageError("--family: unknown family '" + opt.family +
                         "' (choose mvnormal, mvt, tmvnormal, or tmvt)");
    const std::string location_text = !opt.mean.empty() ? opt.mean : opt.delta;
    const auto location = parse_vector(location_text, InfinitySign::None, "--mean/--delta");
    const auto sigma = parse_matrix(opt.sigma, "--sigma");
    if (location.size() != 2)
        throw mvdist::UnsupportedDimension("density-grid requires a bivariate distribution");
    if (!(opt.grid_step > 0.0) || !(opt.grid_max > opt.grid_min))
        throw UsageError("--grid-min/--grid-max/--grid-step: need grid-min < grid-max and step > 0");

    std::optional<mvdist::TruncationBox> box;
    if (truncated)
        box = mvdist::TruncationBox{
            parse_vector(opt.lower_trunc, InfinitySign::Negative, "--lower-truncation"),
            parse_vector(opt.upper_trunc, InfinitySign::Positive, "--upper-truncation")};

    CommandOutput out;
    out.command = "density-grid";
    out.inputs["family"] = opt.family;
    out.inputs["mean"] = vector_to_json(location);
    out.inputs["sigma"] = matrix_to_json(sigma);
    if (t_family) out.inputs["df"] = opt.df;
    if (box) {
        out.inputs["lowertruncation"] = vector_to_json(box->lower);
        out.inputs["uppertruncation"] = vector_to_json(box->upper);
        merge_inputs(out.inputs, qmc_inputs(opt));
    }
    out.inputs["grid_min"] = opt.grid_min;
    out.inputs["grid_max"] = opt.grid_max;
    out.inputs["grid_step"] = opt.grid_step;
    out.inputs["logdensity"] = opt.log_density;

    // one normalizing constant per grid, not one per point
    mvdist::NormalizingCache cache;
    const auto density_at = [&](const std::vector<double>& x) {
        switch ((t_family ? 1 : 0) + (truncated ? 2 : 0)) {
            case 0:
                return mvdist::mvn_density(x, location, sigma, opt.log_density);
            case 1:
                return mvdist::mvt_density(x, location, sigma, opt.df, opt.log_density);
            case 2:
                return mvdist::tmvn_density(x, location, sigma, *box, opt.log_density,
                                            qmc_config(opt), opt.seed, &cache, opt.threads);
            default:
                return mvdist::tmvt_density(x, location, sigma, opt.df, *box, opt.log_density,
                                            qmc_config(opt), opt.seed, &cache, opt.threads);
        }
    };

    const auto points = static_cast<std::size_t>(
        std::floor((opt.grid_max - opt.grid_min) / opt.grid_step + 1e-9)) + 1;
    out.columns = {"x1", "x2", "density"};
    json result = json::array();
    for (std::size_t i = 0; i < points; ++i) {
        const double x1 = opt.grid_min + static_cast<double>(i) * opt.grid_step;
        for (std::size_t j = 0; j < points; ++j) {
            const double x2 = opt.grid_min + static_cast<double>(j) * opt.grid_step;
            const double d = density_at({x1, x2});
            out.rows.push_back({x1, x2, d});
            result.push_back(json::array({x1, x2, real_to_json(d)}));
        }
    }
    out.result = std::move(result);
    return out;
}

CommandOutput run_truncation_curve(const Options& opt) {
    const std::string location_text = !opt.mean.empty() ? opt.mean : opt.delta;
    const auto location = parse_vector(location_text, InfinitySign::None, "--mean/--delta");
    const auto sigma = parse_matrix(opt.sigma, "--sigma");
    if (!(opt.tstep > 0.0) || !(opt.tmax >= opt.tmin))
        throw UsageError("--tmin/--tmax/--tstep: need tmin <= tmax and tstep > 0");
    const std::size_t k = location.size();

    CommandOutput out;
    out.command = "truncation-curve";
    out.inputs["mean"] = vector_to_json(location);
    out.inputs["sigma"] = matrix_to_json(sigma);
    out.inputs["tmin"] = opt.tmin;
    out.inputs["tmax"] = opt.tmax;
    out.inputs["tstep"] = opt.tstep;
    merge_inputs(out.inputs, qmc_inputs(opt));
    out.inputs["alpha"] = opt.alpha;

    const mvdist::ExtendedBounds orthant{std::vector<double>(k, 0.0),
                                         std::vector<double>(k, mvdist::kPosInf)};
    const auto steps = static_cast<std::size_t>(
        std::floor((opt.tmax - opt.tmin) / opt.tstep + 1e-9)) + 1;
    out.columns = {"t", "probability", "error"};
    json result = json::array();
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = opt.tmin + static_cast<double>(i) * opt.tstep;
        const mvdist::TruncationBox box{std::vector<double>(k, t),
                                        std::vector<double>(k, mvdist::kPosInf)};
        const auto est = mvdist::tmvn_probability(orthant, location, sigma, box, qmc_config(opt),
                                                  opt.seed, opt.threads);
        out.rows.push_back({t, est.value, est.error});
        result.push_back(json::array({t, est.value, est.error}));
    }
    out.result = std::move(result);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multivariate normal and t distributions, with and without truncation"};
    app.require_subcommand(1);
    Options opt;

    struct Registered {
        CLI::App* cmd;
        CommandOutput (*handler)(const std::string&, const Options&, bool, bool);
        bool t_family;
        bool truncated;
    };
    std::vector<Registered> registered;

    const auto add_location = [&](CLI::App* cmd, bool t_family, bool required = true) {
        auto* o = t_family
                      ? cmd->add_option("--delta", opt.delta, "Non-centrality vector (comma-separated)")
                      : cmd->add_option("--mean", opt.mean, "Location vector (comma-separated)");
        if (required) o->required();
    };
    const auto add_sigma = [&](CLI::App* cmd) {
        cmd->add_option("--sigma", opt.sigma,
                        "Scale matrix, row-major with ';' between rows")->required();
    };
    const auto add_truncation = [&](CLI::App* cmd) {
        cmd->add_option("--lower-truncation", opt.lower_trunc,
                        "Lower truncation limits ('.' or -inf for unbounded)")->required();
        cmd->add_option("--upper-truncation", opt.upper_trunc,
                        "Upper truncation limits ('.' or inf for unbounded)")->required();
    };
    const auto add_rect_bounds = [&](CLI::App* cmd) {
        cmd->add_option("--lower", opt.lower, "Lower integration limits ('.' or -inf)")->required();
        cmd->add_option("--upper", opt.upper, "Upper integration limits ('.' or inf)")->required();
    };
    const auto add_df = [&](CLI::App* cmd) {
        cmd->add_option("--df", opt.df, "Degrees of freedom (default 1)");
    };

    // densities
    for (const auto& [name, t_family, truncated] :
         {std::tuple{"mvnormalden", false, false}, std::tuple{"mvtden", true, false},
          std::tuple{"tmvnormalden", false, true}, std::tuple{"tmvtden", true, true}}) {
        auto* cmd = app.add_subcommand(name, std::string("Density of the ") + name + " family");
        cmd->add_option("--x", opt.x, "Evaluation point (comma-separated)")->required();
        add_location(cmd, t_family);
        add_sigma(cmd);
        if (t_family) add_df(cmd);
        if (truncated) {
            add_truncation(cmd);
            add_qmc_flags(cmd, opt);
            if (!t_family) add_integrator_flag(cmd, opt);
        }
        cmd->add_flag("--log-density", opt.log_density, "Return the log of the density");
        add_format_flags(cmd, opt);
        registered.push_back({cmd, run_density, t_family, truncated});
    }

    // rectangle probabilities
    for (const auto& [name, t_family, truncated] :
         {std::tuple{"pmvnormal", false, false}, std::tuple{"mvt", true, false},
          std::tuple{"tmvnormal", false, true}, std::tuple{"tmvt", true, true}}) {
        auto* cmd = app.add_subcommand(name, std::string("Rectangle probability (") + name + ")");
        add_rect_bounds(cmd);
        add_location(cmd, t_family);
        add_sigma(cmd);
        if (t_family) add_df(cmd);
        if (truncated) add_truncation(cmd);
        add_qmc_flags(cmd, opt);
        if (truncated && !t_family) add_integrator_flag(cmd, opt);
        add_format_flags(cmd, opt);
        registered.push_back({cmd, run_probability, t_family, truncated});
    }

    // equicoordinate quantiles
    for (const auto& [name, t_family, truncated] :
         {std::tuple{"invmvnormal", false, false}, std::tuple{"invmvt", true, false},
          std::tuple{"invtmvnormal", false, true}, std::tuple{"invtmvt", true, true}}) {
        auto* cmd = app.add_subcommand(name, std::string("Equicoordinate quantile (") + name + ")");
        cmd->add_option("--p", opt.p, "Target probability, strictly in (0,1)")->required();
        add_location(cmd, t_family);
        add_sigma(cmd);
        if (t_family) add_df(cmd);
        if (truncated) add_truncation(cmd);
        add_bisection_flags(cmd, opt);
        add_qmc_flags(cmd, opt);
        if (!t_family) add_integrator_flag(cmd, opt);
        add_format_flags(cmd, opt);
        registered.push_back({cmd, run_quantile, t_family, truncated});
    }

    // samplers
    for (const auto& [name, t_family, truncated] :
         {std::tuple{"rmvnormal", false, false}, std::tuple{"rmvt", true, false},
          std::tuple{"rtmvnormal", false, true}, std::tuple{"rtmvt", true, true}}) {
        auto* cmd = app.add_subcommand(name, std::string("Pseudo-random draws (") + name + ")");
        add_location(cmd, t_family);
        add_sigma(cmd);
        if (t_family) add_df(cmd);
        if (truncated) add_truncation(cmd);
        cmd->add_option("--n", opt.n, "Number of draws (default 1)");
        cmd->add_option("--method", opt.method, "Factorization: cholesky, eigen, or svd");
        cmd->add_option("--seed", opt.seed, "Random seed (default 0)");
        add_format_flags(cmd, opt);
        registered.push_back({cmd, run_sampler, t_family, truncated});
    }

    // grid emitters
    auto* grid = app.add_subcommand("density-grid",
                                    "Bivariate density values over a square grid (contour data)");
    grid->add_option("--family", opt.family, "mvnormal, mvt, tmvnormal, or tmvt")->required();
    grid->add_option("--mean,--delta", opt.mean, "Location vector")->required();
    add_sigma(grid);
    add_df(grid);
    grid->add_option("--lower-truncation", opt.lower_trunc, "Lower truncation limits");
    grid->add_option("--upper-truncation", opt.upper_trunc, "Upper truncation limits");
    grid->add_option("--grid-min", opt.grid_min, "Grid lower edge (default -3)");
    grid->add_option("--grid-max", opt.grid_max, "Grid upper edge (default 3)");
    grid->add_option("--grid-step", opt.grid_step, "Grid step (default 0.1)");
    grid->add_flag("--log-density", opt.log_density, "Emit log densities");
    add_qmc_flags(grid, opt);
    add_format_flags(grid, opt);

    auto* curve = app.add_subcommand(
        "truncation-curve", "Orthant probability under a lower truncation box moving with t");
    curve->add_option("--mean,--delta", opt.mean, "Location vector")->required();
    add_sigma(curve);
    curve->add_option("--tmin", opt.tmin, "Smallest truncation point (default -8)");
    curve->add_option("--tmax", opt.tmax, "Largest truncation point (default 1)");
    curve->add_option("--tstep", opt.tstep, "Truncation point step (default 0.25)");
    add_qmc_flags(curve, opt);
    add_format_flags(curve, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        CommandOutput out;
        if (grid->parsed()) {
            out = run_density_grid(opt);
        } else if (curve->parsed()) {
            out = run_truncation_curve(opt);
        } else {
            for (const auto& reg : registered)
                if (reg.cmd->parsed()) {
                    out = reg.handler(reg.cmd->get_name(), opt, reg.t_family, reg.truncated);
                    break;
                }
        }
        print_output(out, opt.format);
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const mvdist::DegenerateTruncation& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const mvdist::AcceptanceTooLow& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const mvdist::Error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }
}
