#include "regimevol/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "regimevol/diagnostics.hpp"
#include "regimevol/error.hpp"
#include "regimevol/linreg.hpp"
#include "regimevol/markov_switching.hpp"
#include "regimevol/quantile_regression.hpp"
#include "regimevol/rng.hpp"
#include "regimevol/simulation.hpp"
#include "regimevol/stats.hpp"
#include "regimevol/svg.hpp"

namespace regimevol {

namespace {

constexpr const char* kToolVersion = "regimevol 0.1.0";

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt6(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::ofstream open_artifact(const std::filesystem::path& dir, const std::string& name,
                            std::vector<std::string>& artifacts) {
    std::ofstream out(dir / name);
    if (!out) fail(ErrorCode::IoError, "cannot write artifact '" + name + "'");
    artifacts.push_back(name);
    return out;
}

TimeSeries apply_transform(const TimeSeries& series, SeriesTransform transform) {
    if (transform == SeriesTransform::None) return series;
    if (series.size() < 2) fail(ErrorCode::TooShort, "cannot difference a single observation");
    std::vector<Date> dates(series.dates().begin() + 1, series.dates().end());
    std::vector<double> values;
    values.reserve(series.size() - 1);
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (transform == SeriesTransform::Diff) {
            values.push_back(series.value(i) - series.value(i - 1));
        } else {
            if (!(series.value(i) > 0.0 && series.value(i - 1) > 0.0)) {
                fail(ErrorCode::NonPositivePrice, "log-difference needs positive values");
            }
            values.push_back(100.0 * std::log(series.value(i) / series.value(i - 1)));
        }
    }
    return TimeSeries(std::move(dates), std::move(values), series.frequency());
}

TimeSeries maybe_slice(const TimeSeries& series, const PipelineConfig& config) {
    if (!config.start && !config.end) return series;
    Date lo = config.start.value_or(series.first_date());
    Date hi = config.end.value_or(series.last_date());
    return series.slice(lo, hi);
}

struct LoadedInputs {
    std::optional<ReturnSeries> returns;
    std::optional<TimeSeries> covariate1;
    std::optional<TimeSeries> covariate2;
    std::vector<NamedSeries> regressors;  // config order, native frequency
};

LoadedInputs load_inputs(const PipelineConfig& config, bool need_returns) {
    LoadedInputs inputs;
    if (need_returns) {
        TimeSeries raw = maybe_slice(load_csv(config.returns_path, config.returns_schema), config);
        if (config.returns_are_returns) {
            ReturnSeries r;
            r.dates = raw.dates();
            r.returns = raw.values();
            inputs.returns = std::move(r);
        } else {
            inputs.returns = log_returns(raw);
        }
        TimeSeries c1 = apply_transform(load_csv(config.covariate1.path, CsvSchema::DateValue),
                                        config.covariate1.transform);
        TimeSeries c2 = apply_transform(load_csv(config.covariate2.path, CsvSchema::DateValue),
                                        config.covariate2.transform);
        if (config.lag_months > 0) {
            c1 = lag_months(c1, config.lag_months);
            c2 = lag_months(c2, config.lag_months);
        }
        inputs.covariate1 = std::move(c1);
        inputs.covariate2 = std::move(c2);
    }
    for (const auto& [name, path] : config.regressors) {
        inputs.regressors.push_back({name, maybe_slice(load_csv(path, CsvSchema::DateValue),
                                                       config)});
    }
    return inputs;
}

struct Stage2Design {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;  // intercept first
    std::vector<std::string> names;
    std::vector<Date> dates;
};

void apply_stage2_lag(Stage2Design& design, int lag) {
    if (lag <= 0) return;
    const Eigen::Index T = design.y.size();
    if (T <= lag) fail(ErrorCode::InsufficientData, "stage-2 lag leaves no observations");
    Eigen::VectorXd y = design.y.segment(lag, T - lag);
    Eigen::MatrixXd X(T - lag, design.X.cols());
    X.col(0).setOnes();
    for (Eigen::Index j = 1; j < design.X.cols(); ++j) {
        X.col(j) = design.X.col(j).segment(0, T - lag);
    }
    design.y = std::move(y);
    design.X = std::move(X);
    design.dates.erase(design.dates.begin(), design.dates.begin() + lag);
}

// daily design with monthly series broadcast across their month; a
// monthly dependent (broadcast LTV mode) rides along in the monthly list
Stage2Design daily_design(const TimeSeries& dependent, const std::string& dep_name,
                          const std::vector<NamedSeries>& regressors, int lag) {
    std::vector<NamedSeries> daily;
    std::vector<NamedSeries> monthly;
    if (dependent.frequency() == Frequency::Daily) {
        daily.push_back({dep_name, dependent});
    } else {
        monthly.push_back({dep_name, dependent});
    }
    for (const auto& r : regressors) {
        (r.series.frequency() == Frequency::Daily ? daily : monthly).push_back(r);
    }
    if (daily.empty()) {
        fail(ErrorCode::FrequencyMismatch,
             "broadcasting a monthly dependent needs at least one daily regressor");
    }
    AlignedPanel panel = align(daily, monthly);

    Stage2Design design;
    design.dates = panel.daily_dates;
    const std::size_t T = panel.daily_dates.size();
    design.y.resize(static_cast<Eigen::Index>(T));
    const auto& dep = panel.column(dep_name);
    for (std::size_t t = 0; t < T; ++t) design.y(static_cast<Eigen::Index>(t)) = dep[t];
    design.X.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(regressors.size()) + 1);
    design.X.col(0).setOnes();
    design.names.push_back("const");
    Eigen::Index col = 1;
    for (const auto& r : regressors) {  // preserve config order
        const auto& values = panel.column(r.name);
        for (std::size_t t = 0; t < T; ++t) {
            design.X(static_cast<Eigen::Index>(t), col) = values[t];
        }
        design.names.push_back(r.name);
        ++col;
    }
    apply_stage2_lag(design, lag);
    return design;
}

// monthly dependent; daily regressors are compressed by within-month means
Stage2Design monthly_design(const TimeSeries& dependent, const std::vector<NamedSeries>& regressors,
                            int lag) {
    std::vector<std::pair<std::string, TimeSeries>> monthly;
    for (const auto& r : regressors) {
        monthly.emplace_back(r.name, r.series.frequency() == Frequency::Daily
                                         ? to_monthly_mean(r.series)
                                         : r.series);
    }

    std::set<int> keys;
    for (const auto& d : dependent.dates()) keys.insert(d.month_key());
    for (const auto& [name, series] : monthly) {
        std::set<int> have;
        for (const auto& d : series.dates()) have.insert(d.month_key());
        std::set<int> merged;
        for (int k : keys) {
            if (have.count(k)) merged.insert(k);
        }
        keys = std::move(merged);
    }
    if (keys.empty()) fail(ErrorCode::NoOverlap, "no common months for the monthly design");

    Stage2Design design;
    for (int k : keys) design.dates.push_back(Date::from_month_key(k));
    const std::size_t T = design.dates.size();
    design.y.resize(static_cast<Eigen::Index>(T));
    {
        std::map<int, double> lookup;
        for (std::size_t i = 0; i < dependent.size(); ++i) {
            lookup[dependent.date(i).month_key()] = dependent.value(i);
        }
        std::size_t t = 0;
        for (int k : keys) design.y(static_cast<Eigen::Index>(t++)) = lookup.at(k);
    }
    design.X.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(monthly.size()) + 1);
    design.X.col(0).setOnes();
    design.names.push_back("const");
    Eigen::Index col = 1;
    for (const auto& [name, series] : monthly) {
        std::map<int, double> lookup;
        for (std::size_t i = 0; i < series.size(); ++i) {
            lookup[series.date(i).month_key()] = series.value(i);
        }
        std::size_t t = 0;
        for (int k : keys) design.X(static_cast<Eigen::Index>(t++), col) = lookup.at(k);
        design.names.push_back(name);
        ++col;
    }
    apply_stage2_lag(design, lag);
    return design;
}

// ---- report writers ------------------------------------------------------

void write_unit_root_row(std::ostream& txt, std::ostream& csv, const std::string& variable,
                         const char* test, const UnitRootResult& r) {
    txt << "  " << test << "  stat=" << fmt6(r.statistic) << "  cv5%=" << fmt6(r.critical_values.pct5)
        << "  lags=" << r.lags_used << (r.reject_at_5pct ? "  stationary" : "  unit root") << "\n";
    csv << variable << ',' << test << ',' << fmt(r.statistic) << ','
        << fmt(r.critical_values.pct5) << ',' << (r.reject_at_5pct ? "reject" : "accept") << "\n";
}

void write_diagnostics(const std::filesystem::path& dir, const LoadedInputs& inputs,
                       const TimeSeries* stv, const TimeSeries* ltv,
                       std::vector<std::string>& artifacts) {
    std::ofstream txt = open_artifact(dir, "diagnostics.txt", artifacts);
    std::ofstream csv = open_artifact(dir, "diagnostics.csv", artifacts);
    csv << "variable,test,statistic,reference,decision\n";

    std::vector<std::pair<std::string, const TimeSeries*>> variables;
    if (stv) variables.emplace_back("stv", stv);
    if (ltv) variables.emplace_back("ltv", ltv);
    for (const auto& r : inputs.regressors) variables.emplace_back(r.name, &r.series);

    txt << "Descriptive statistics\n";
    txt << "  variable            n        mean          sd        skew        kurt\n";
    for (const auto& [name, series] : variables) {
        Descriptives d = describe(series->values());
        char line[160];
        std::snprintf(line, sizeof(line), "  %-12s %8zu %11.4f %11.4f %11.4f %11.4f\n",
                      name.c_str(), d.n, d.mean, d.sd, d.skewness, d.kurtosis);
        txt << line;
        csv << name << ",mean," << fmt(d.mean) << ",,\n";
        csv << name << ",sd," << fmt(d.sd) << ",,\n";
        csv << name << ",skewness," << fmt(d.skewness) << ",,\n";
        csv << name << ",kurtosis," << fmt(d.kurtosis) << ",,\n";
    }

    txt << "\nUnit-root tests (constant term)\n";
    for (const auto& [name, series] : variables) {
        txt << name << "\n";
        UnitRootResult adf = adf_test(series->values(), DeterministicTerms::Constant);
        write_unit_root_row(txt, csv, name, "ADF", adf);
        UnitRootResult pp = pp_test(series->values(), DeterministicTerms::Constant);
        write_unit_root_row(txt, csv, name, "PP ", pp);
    }

    for (const auto& [name, series] : std::vector<std::pair<std::string, const TimeSeries*>>{
             {"stv", stv}, {"ltv", ltv}}) {
        if (!series) continue;
        txt << "\nStructural breaks and ARCH effects: " << name << "\n";
        BreakTestResult breaks = bai_perron(series->values(), nullptr, 5, 0.15);
        txt << "  Bai-Perron breaks: " << breaks.num_breaks;
        csv << name << ",bai_perron_breaks," << breaks.num_breaks << ",,\n";
        for (std::size_t b : breaks.break_indices) {
            txt << "  " << series->date(b).to_string();
            csv << name << ",break_date," << series->date(b).to_string() << ",,\n";
        }
        txt << "\n";
        if (!breaks.break_indices.empty()) {
            UnitRootResult adf_breaks = adf_test(series->values(), DeterministicTerms::Constant,
                                                 -1, breaks.break_indices);
            write_unit_root_row(txt, csv, name, "ADF+breaks", adf_breaks);
        }
        std::vector<double> demeaned = series->values();
        double mu = mean(demeaned);
        for (double& v : demeaned) v -= mu;
        ArchLmResult arch = arch_lm(demeaned, 10);
        txt << "  ARCH-LM(10)  stat=" << fmt6(arch.lm_statistic) << "  p=" << fmt6(arch.p_value)
            << "\n";
        csv << name << ",arch_lm," << fmt(arch.lm_statistic) << ',' << fmt(arch.p_value) << ','
            << (arch.p_value < 0.05 ? "arch" : "none") << "\n";
    }

    // collinearity of the stage-2 regressors on the daily panel
    if (inputs.regressors.size() >= 2 && stv) {
        Stage2Design design = daily_design(*stv, "stv", inputs.regressors, 0);
        Eigen::MatrixXd X = design.X.rightCols(design.X.cols() - 1);
        std::vector<std::string> names(design.names.begin() + 1, design.names.end());
        txt << "\nVariance inflation factors\n";
        for (const auto& [name, value] : vif(X, names)) {
            txt << "  " << name << " = " << fmt6(value) << "\n";
            csv << name << ",vif," << fmt(value) << ",,\n";
        }
    }
}

void write_garch_outputs(const std::filesystem::path& dir, const GarchMidasFit& fit,
                         std::vector<std::string>& artifacts) {
    {
        std::ofstream txt = open_artifact(dir, "garch_midas_params.txt", artifacts);
        txt << "Two-covariate GARCH-MIDAS fit (" << (fit.spec.form == LongRunForm::Log ? "log" : "level")
            << " long-run form, K=" << fit.spec.K << ")\n";
        txt << "loglik = " << fmt(fit.loglik) << "  converged = " << (fit.converged ? "yes" : "no")
            << "\n\n";
        txt << "  parameter     estimate      std.err       t-ratio\n";
        std::vector<double> estimates = {fit.params.mu,     fit.params.alpha, fit.params.gamma,
                                         fit.params.beta,   fit.params.m,     fit.params.theta1,
                                         fit.params.theta2, fit.params.w2_1,  fit.params.w2_2};
        if (fit.spec.estimate_w1) {
            estimates.push_back(fit.params.w1_1);
            estimates.push_back(fit.params.w1_2);
        }
        for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
            double est = estimates[i];
            double se = fit.std_errors[i];
            char line[160];
            std::snprintf(line, sizeof(line), "  %-10s %12.6f %12.6f %12.4f\n",
                          fit.param_names[i].c_str(), est, se, se > 0 ? est / se : 0.0);
            txt << line;
        }
    }
    {
        std::ofstream csv = open_artifact(dir, "garch_midas_params.csv", artifacts);
        csv << "parameter,estimate,std_error\n";
        std::vector<double> estimates = {fit.params.mu,     fit.params.alpha, fit.params.gamma,
                                         fit.params.beta,   fit.params.m,     fit.params.theta1,
                                         fit.params.theta2, fit.params.w2_1,  fit.params.w2_2};
        if (fit.spec.estimate_w1) {
            estimates.push_back(fit.params.w1_1);
            estimates.push_back(fit.params.w1_2);
        }
        for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
            csv << fit.param_names[i] << ',' << fmt(estimates[i]) << ',' << fmt(fit.std_errors[i])
                << "\n";
        }
        csv << "loglik," << fmt(fit.loglik) << ",\n";
        csv << "converged," << (fit.converged ? 1 : 0) << ",\n";
    }
}

void write_series_artifacts(const std::filesystem::path& dir, const TimeSeries& series,
                            const std::string& stem, const std::string& title,
                            std::vector<std::string>& artifacts) {
    write_csv(series, dir / (stem + ".csv"));
    artifacts.push_back(stem + ".csv");
    std::vector<std::string> labels;
    labels.reserve(series.size());
    for (const auto& d : series.dates()) labels.push_back(d.to_string());
    write_svg_line_chart(dir / (stem + ".svg"), title, labels, {{stem, series.values()}});
    artifacts.push_back(stem + ".svg");
}

void write_msr_outputs(const std::filesystem::path& dir, const std::string& stem,
                       const MsrFit& fit, const std::vector<Date>& dates,
                       std::vector<std::string>& artifacts) {
    {
        std::ofstream csv = open_artifact(dir, stem + ".csv", artifacts);
        csv << "parameter,estimate,std_error\n";
        for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
            csv << fit.param_names[i] << ',' << fmt(fit.estimates[i]) << ','
                << fmt(fit.std_errors[i]) << "\n";
        }
        csv << "loglik," << fmt(fit.loglik) << ",\n";
        csv << "converged," << (fit.converged ? 1 : 0) << ",\n";
    }
    {
        std::ofstream csv = open_artifact(dir, stem + "_transition.csv", artifacts);
        const Eigen::MatrixXd& P = fit.transition;
        for (Eigen::Index i = 0; i < P.rows(); ++i) {
            for (Eigen::Index j = 0; j < P.cols(); ++j) {
                csv << fmt(P(i, j)) << (j + 1 < P.cols() ? "," : "\n");
            }
        }
    }
    {
        std::ofstream csv = open_artifact(dir, stem + "_durations.csv", artifacts);
        csv << "regime,stay_probability,expected_duration\n";
        for (std::size_t m = 0; m < fit.durations.size(); ++m) {
            csv << (m + 1) << ',' << fmt(fit.transition(static_cast<Eigen::Index>(m),
                                                        static_cast<Eigen::Index>(m)))
                << ',' << fmt(fit.durations[m]) << "\n";
        }
    }
    {
        std::ofstream csv = open_artifact(dir, stem + "_probabilities.csv", artifacts);
        const Eigen::Index M = fit.smoothed.cols();
        csv << "date";
        for (Eigen::Index m = 0; m < M; ++m) csv << ",filtered_regime" << (m + 1);
        for (Eigen::Index m = 0; m < M; ++m) csv << ",smoothed_regime" << (m + 1);
        csv << "\n";
        for (Eigen::Index t = 0; t < fit.smoothed.rows(); ++t) {
            csv << dates[static_cast<std::size_t>(t)].to_string();
            for (Eigen::Index m = 0; m < M; ++m) csv << ',' << fmt(fit.filtered(t, m));
            for (Eigen::Index m = 0; m < M; ++m) csv << ',' << fmt(fit.smoothed(t, m));
            csv << "\n";
        }
    }
    {
        std::vector<std::string> labels;
        for (const auto& d : dates) labels.push_back(d.to_string());
        std::vector<SvgSeries> series;
        const char* palette[4] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd"};
        for (Eigen::Index m = 0; m < fit.smoothed.cols(); ++m) {
            SvgSeries s;
            s.label = "regime " + std::to_string(m + 1);
            s.color = palette[static_cast<std::size_t>(m) % 4];
            s.values.resize(static_cast<std::size_t>(fit.smoothed.rows()));
            for (Eigen::Index t = 0; t < fit.smoothed.rows(); ++t) {
                s.values[static_cast<std::size_t>(t)] = fit.smoothed(t, m);
            }
            series.push_back(std::move(s));
        }
        write_svg_line_chart(dir / (stem + "_probabilities.svg"),
                             stem + " smoothed regime probabilities", labels, series);
        artifacts.push_back(stem + "_probabilities.svg");
    }
}

void write_qr_outputs(const std::filesystem::path& dir, const std::string& stem,
                      const QuantileProcess& process, const std::vector<std::string>& names,
                      std::vector<std::string>& artifacts) {
    {
        std::ofstream csv = open_artifact(dir, stem + ".csv", artifacts);
        csv << "tau,coefficient,estimate,lower,upper,pseudo_r2\n";
        for (std::size_t i = 0; i < process.taus.size(); ++i) {
            if (!process.ok[i]) continue;
            const QrFit& fit = process.fits[i];
            for (std::size_t j = 0; j < names.size(); ++j) {
                double est = fit.beta(static_cast<Eigen::Index>(j));
                double se = std::sqrt(std::max(0.0, fit.covariance(static_cast<Eigen::Index>(j),
                                                                   static_cast<Eigen::Index>(j))));
                csv << fmt(process.taus[i]) << ',' << names[j] << ',' << fmt(est) << ','
                    << fmt(est - process.band_z * se) << ',' << fmt(est + process.band_z * se)
                    << ',' << fmt(fit.pseudo_r2) << "\n";
            }
        }
    }
    std::vector<std::string> labels;
    for (double tau : process.taus) labels.push_back(fmt6(tau).substr(0, 4));
    for (std::size_t j = 0; j < names.size(); ++j) {
        SvgSeries line;
        line.label = names[j];
        SvgBand band;
        for (std::size_t i = 0; i < process.taus.size(); ++i) {
            if (!process.ok[i]) continue;
            const QrFit& fit = process.fits[i];
            double est = fit.beta(static_cast<Eigen::Index>(j));
            double se = std::sqrt(std::max(0.0, fit.covariance(static_cast<Eigen::Index>(j),
                                                               static_cast<Eigen::Index>(j))));
            line.values.push_back(est);
            band.lower.push_back(est - process.band_z * se);
            band.upper.push_back(est + process.band_z * se);
        }
        std::string file = stem + "_" + names[j] + ".svg";
        write_svg_line_chart(dir / file, stem + " coefficient path: " + names[j], labels, {line},
                             &band);
        artifacts.push_back(file);
    }
}

TimeSeries load_artifact_series(const std::filesystem::path& dir, const std::string& name,
                                const std::string& stage_hint) {
    std::filesystem::path file = dir / name;
    if (!std::filesystem::exists(file)) {
        fail(ErrorCode::ConfigError,
             name + " not found in output dir; run the " + stage_hint + " stage first");
    }
    return load_csv(file, CsvSchema::DateValue);
}

std::string stage_name(PipelineStage stage) {
    switch (stage) {
        case PipelineStage::All: return "run";
        case PipelineStage::Diagnostics: return "diagnostics";
        case PipelineStage::GarchMidas: return "garch";
        case PipelineStage::Msr: return "msr";
        case PipelineStage::Qr: return "qr";
    }
    return "run";
}

}  // namespace

PipelineStage stage_from_string(const std::string& name) {
    if (name == "run" || name == "all") return PipelineStage::All;
    if (name == "diagnostics") return PipelineStage::Diagnostics;
    if (name == "garch" || name == "garch-midas") return PipelineStage::GarchMidas;
    if (name == "msr") return PipelineStage::Msr;
    if (name == "qr") return PipelineStage::Qr;
    fail(ErrorCode::ConfigError, "unknown stage '" + name + "'");
}

PipelineResult run_pipeline(const PipelineConfig& config, PipelineStage stage) {
    PipelineResult result;
    std::filesystem::create_directories(config.output_dir);
    std::string current = "setup";
    try {
        const bool want_garch = stage == PipelineStage::All || stage == PipelineStage::GarchMidas;
        const bool want_diag = stage == PipelineStage::All || stage == PipelineStage::Diagnostics;
        const bool want_msr = stage == PipelineStage::All || stage == PipelineStage::Msr;
        const bool want_qr = stage == PipelineStage::All || stage == PipelineStage::Qr;

        current = "ingest";
        LoadedInputs inputs = load_inputs(config, want_garch);

        std::optional<TimeSeries> stv;
        std::optional<TimeSeries> ltv;

        if (want_garch) {
            current = "garch";
            GarchMidasFit fit = fit_garch_midas(*inputs.returns, *inputs.covariate1,
                                                *inputs.covariate2, config.gm_spec);
            write_garch_outputs(config.output_dir, fit, result.artifacts);
            auto [stv_series, ltv_series] = extract_volatilities(fit, /*force=*/true);
            write_series_artifacts(config.output_dir, stv_series, "stv",
                                   "short-term volatility component", result.artifacts);
            write_series_artifacts(config.output_dir, ltv_series, "ltv",
                                   "long-term volatility component", result.artifacts);
            // downstream stages consume the persisted artifacts so a
            // staged rerun reproduces the full run exactly
            stv = load_artifact_series(config.output_dir, "stv.csv", "garch");
            ltv = load_artifact_series(config.output_dir, "ltv.csv", "garch");
            if (!fit.converged) {
                fail(ErrorCode::NoConvergence, "volatility fit did not converge");
            }
        } else if (want_msr || want_qr || want_diag) {
            // reuse persisted volatility components when available
            if (std::filesystem::exists(config.output_dir / "stv.csv")) {
                stv = load_artifact_series(config.output_dir, "stv.csv", "garch");
            }
            if (std::filesystem::exists(config.output_dir / "ltv.csv")) {
                ltv = load_artifact_series(config.output_dir, "ltv.csv", "garch");
            }
            if ((want_msr || want_qr) && (!stv || !ltv)) {
                fail(ErrorCode::ConfigError,
                     "stv.csv / ltv.csv not found in output dir; run the garch stage first");
            }
        }

        if (want_diag) {
            current = "diagnostics";
            write_diagnostics(config.output_dir, inputs, stv ? &*stv : nullptr,
                              ltv ? &*ltv : nullptr, result.artifacts);
        }

        if (want_msr || want_qr) {
            current = "stage2-design";
            Stage2Design stv_design = daily_design(*stv, "stv", inputs.regressors,
                                                   config.stage2_lag);
            Stage2Design ltv_design =
                config.ltv_monthly
                    ? monthly_design(*ltv, inputs.regressors, config.stage2_lag)
                    : daily_design(*ltv, "ltv", inputs.regressors, config.stage2_lag);

            if (want_msr) {
                current = "msr";
                MsrSpec spec;
                spec.n_regimes = config.msr_regimes;
                spec.switching_variance = config.switching_variance;
                spec.switching_names = stv_design.names;
                MsrFitOptions options;
                options.seed = config.seed;
                MsrFit stv_fit = fit_msr(spec, stv_design.y, stv_design.X, Eigen::MatrixXd(),
                                         nullptr, options);
                write_msr_outputs(config.output_dir, "msr_stv", stv_fit, stv_design.dates,
                                  result.artifacts);
                spec.switching_names = ltv_design.names;
                MsrFit ltv_fit = fit_msr(spec, ltv_design.y, ltv_design.X, Eigen::MatrixXd(),
                                         nullptr, options);
                write_msr_outputs(config.output_dir, "msr_ltv", ltv_fit, ltv_design.dates,
                                  result.artifacts);
            }

            if (want_qr) {
                current = "qr";
                QuantileProcess stv_process = quantile_process(stv_design.y, stv_design.X,
                                                               config.taus);
                write_qr_outputs(config.output_dir, "qr_stv", stv_process, stv_design.names,
                                 result.artifacts);
                QuantileProcess ltv_process = quantile_process(ltv_design.y, ltv_design.X,
                                                               config.taus);
                write_qr_outputs(config.output_dir, "qr_ltv", ltv_process, ltv_design.names,
                                 result.artifacts);
            }
        }

        current = "manifest";
        {
            std::ofstream manifest = open_artifact(config.output_dir, "manifest.txt",
                                                   result.artifacts);
            manifest << "tool = " << kToolVersion << "\n";
            manifest << "config = " << config.source_path.filename().string() << "\n";
            char hash[32];
            std::snprintf(hash, sizeof(hash), "%016llx",
                          static_cast<unsigned long long>(file_hash(config.source_path)));
            manifest << "config_hash = " << hash << "\n";
            manifest << "seed = " << config.seed << "\n";
            manifest << "stage = " << stage_name(stage) << "\n";
            std::vector<std::string> sorted = result.artifacts;
            std::sort(sorted.begin(), sorted.end());
            for (const auto& name : sorted) manifest << "artifact = " << name << "\n";
        }
        std::filesystem::remove(config.output_dir / "FAILED");
    } catch (const Error& e) {
        std::ofstream marker(config.output_dir / "FAILED");
        marker << "stage = " << current << "\n";
        marker << "error = " << e.what() << "\n";
        result.exit_code = 2;
        result.error = "[" + current + "] " + e.what();
    }
    return result;
}

std::filesystem::path write_fixture(const std::string& scenario,
                                    const std::filesystem::path& directory, std::uint64_t seed) {
    std::filesystem::create_directories(directory);
    int n_days = 4000;
    if (scenario == "pipeline-fixture") {
        n_days = 4000;
    } else if (scenario == "pipeline-fixture-small") {
        n_days = 1600;
    } else {
        fail(ErrorCode::ConfigError, "unknown scenario '" + scenario + "'");
    }

    GarchMidasParams truth;
    truth.mu = 0.0;
    truth.alpha = 0.05;
    truth.gamma = 0.10;
    truth.beta = 0.85;
    truth.m = 0.1;
    truth.theta1 = -0.3;
    truth.theta2 = -0.2;
    truth.w2_1 = 3.0;
    truth.w2_2 = 3.0;
    GarchMidasSpec spec;
    spec.K = 12;
    GarchMidasSimulation sim = simulate_garch_midas(truth, spec, n_days, seed);

    write_csv(TimeSeries(sim.returns.dates, sim.returns.returns, Frequency::Daily),
              directory / "returns.csv");
    write_csv(sim.covariate1, directory / "ip.csv");
    write_csv(sim.covariate2, directory / "nfci.csv");

    // five stage-2 uncertainty proxies: three monthly, two daily
    const char* monthly_names[3] = {"ecu", "gepu", "epuch"};
    for (int i = 0; i < 3; ++i) {
        Philox4x32 rng(seed, 100 + static_cast<std::uint64_t>(i));
        std::vector<Date> dates = sim.covariate1.dates();
        std::vector<double> values(dates.size());
        double x = rng.normal();
        for (std::size_t t = 0; t < values.size(); ++t) {
            x = 0.9 * x + std::sqrt(1.0 - 0.81) * rng.normal();
            values[t] = 100.0 + 10.0 * x;
        }
        write_csv(TimeSeries(std::move(dates), std::move(values), Frequency::Monthly),
                  directory / (std::string(monthly_names[i]) + ".csv"));
    }
    const char* daily_names[2] = {"epu", "vix"};
    for (int i = 0; i < 2; ++i) {
        Philox4x32 rng(seed, 200 + static_cast<std::uint64_t>(i));
        std::vector<Date> dates = sim.returns.dates;
        std::vector<double> values(dates.size());
        double x = rng.normal();
        for (std::size_t t = 0; t < values.size(); ++t) {
            x = 0.97 * x + std::sqrt(1.0 - 0.97 * 0.97) * rng.normal();
            values[t] = 20.0 + 5.0 * x;
        }
        write_csv(TimeSeries(std::move(dates), std::move(values), Frequency::Daily),
                  directory / (std::string(daily_names[i]) + ".csv"));
    }

    std::filesystem::path config_path = directory / "fixture.conf";
    std::ofstream conf(config_path);
    conf << "[data]\n";
    conf << "returns = " << (directory / "returns.csv").string() << "\n";
    conf << "returns_kind = returns\n";
    conf << "covariate1 = " << (directory / "ip.csv").string() << "\n";
    conf << "covariate1_name = ip\n";
    conf << "covariate2 = " << (directory / "nfci.csv").string() << "\n";
    conf << "covariate2_name = nfci\n";
    conf << "regressor.ecu = " << (directory / "ecu.csv").string() << "\n";
    conf << "regressor.epu = " << (directory / "epu.csv").string() << "\n";
    conf << "regressor.epuch = " << (directory / "epuch.csv").string() << "\n";
    conf << "regressor.gepu = " << (directory / "gepu.csv").string() << "\n";
    conf << "regressor.vix = " << (directory / "vix.csv").string() << "\n";
    conf << "\n[garch_midas]\n";
    conf << "k = 12\n";
    conf << "long_run = log\n";
    conf << "\n[msr]\n";
    conf << "regimes = 2\n";
    if (n_days < 3500) {
        // short samples lack the monthly observations the LTV regression needs
        conf << "\n[stage2]\n";
        conf << "ltv_frequency = daily\n";
    }
    conf << "\n[output]\n";
    conf << "dir = " << (directory / "out").string() << "\n";
    conf << "\n[run]\n";
    conf << "seed = " << seed << "\n";
    return config_path;
}

}  // namespace regimevol
