#include "regimevol/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "regimevol/error.hpp"

namespace regimevol {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct RawConfig {
    std::map<std::string, std::string> values;                    // section.key -> value
    std::vector<std::pair<std::string, std::string>> regressors;  // file order preserved
};

RawConfig parse_raw(const std::filesystem::path& path, ConfigErrors& errors) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
    RawConfig raw;
    std::string line;
    std::string section;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        if (text.front() == '[') {
            if (text.back() != ']') {
                errors.emplace_back("line " + std::to_string(line_number), "unterminated section header");
                continue;
            }
            section = lower(trim(text.substr(1, text.size() - 2)));
            continue;
        }
        auto eq = text.find('=');
        if (eq == std::string::npos) {
            errors.emplace_back("line " + std::to_string(line_number), "expected key = value");
            continue;
        }
        std::string key = lower(trim(text.substr(0, eq)));
        std::string value = trim(text.substr(eq + 1));
        if (section == "data" && key.rfind("regressor.", 0) == 0) {
            raw.regressors.emplace_back(key.substr(10), value);
            continue;
        }
        std::string full = section.empty() ? key : section + "." + key;
        if (raw.values.count(full)) {
            errors.emplace_back(full, "key repeated");
        }
        raw.values[full] = value;
    }
    return raw;
}

const std::vector<std::string> kKnownKeys = {
    "data.returns", "data.returns_schema", "data.returns_kind",
    "data.covariate1", "data.covariate1_name", "data.covariate1_transform",
    "data.covariate2", "data.covariate2_name", "data.covariate2_transform",
    "sample.start", "sample.end",
    "garch_midas.k", "garch_midas.long_run", "garch_midas.lag_months",
    "garch_midas.estimate_w1",
    "msr.regimes", "msr.switching_variance",
    "qr.taus",
    "stage2.ltv_frequency", "stage2.lag",
    "output.dir", "run.seed",
};

}  // namespace

ScenarioConfig load_scenario_config(const std::filesystem::path& path, ConfigErrors& errors) {
    errors.clear();
    RawConfig raw = parse_raw(path, errors);
    ScenarioConfig scenario;
    for (const auto& [key, value] : raw.values) {
        if (key == "scenario.name") {
            scenario.name = value;
        } else if (key == "scenario.seed") {
            try {
                scenario.seed = std::stoull(value);
            } catch (const std::exception&) {
                errors.emplace_back(key, "not an unsigned integer: '" + value + "'");
            }
        } else if (key == "scenario.out") {
            scenario.output_dir = value;
        } else {
            errors.emplace_back(key, "unknown key");
        }
    }
    if (scenario.name != "pipeline-fixture" && scenario.name != "pipeline-fixture-small") {
        errors.emplace_back("scenario.name", "unknown scenario '" + scenario.name + "'");
    }
    return scenario;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path, ConfigErrors& errors) {
    errors.clear();
    RawConfig raw = parse_raw(path, errors);
    PipelineConfig config;
    config.source_path = path;

    for (const auto& [key, value] : raw.values) {
        (void)value;
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
            errors.emplace_back(key, "unknown key");
        }
    }

    auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto it = raw.values.find(key);
        if (it == raw.values.end()) return std::nullopt;
        return it->second;
    };
    auto get_int = [&](const std::string& key, int fallback) {
        auto v = get(key);
        if (!v) return fallback;
        try {
            return std::stoi(*v);
        } catch (const std::exception&) {
            errors.emplace_back(key, "not an integer: '" + *v + "'");
            return fallback;
        }
    };
    auto get_bool = [&](const std::string& key, bool fallback) {
        auto v = get(key);
        if (!v) return fallback;
        std::string s = lower(*v);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        errors.emplace_back(key, "not a boolean: '" + *v + "'");
        return fallback;
    };
    auto get_date = [&](const std::string& key) -> std::optional<Date> {
        auto v = get(key);
        if (!v) return std::nullopt;
        try {
            return Date::parse(*v);
        } catch (const Error&) {
            errors.emplace_back(key, "not a date (YYYY-MM-DD): '" + *v + "'");
            return std::nullopt;
        }
    };
    auto require_path = [&](const std::string& key, std::string& target) {
        auto v = get(key);
        if (!v || v->empty()) {
            errors.emplace_back(key, "required file path missing");
            return;
        }
        target = *v;
        if (!std::filesystem::exists(*v)) {
            errors.emplace_back(key, "file does not exist: '" + *v + "'");
        }
    };
    auto get_transform = [&](const std::string& key) {
        auto v = get(key);
        if (!v) return SeriesTransform::None;
        std::string s = lower(*v);
        if (s == "none") return SeriesTransform::None;
        if (s == "diff") return SeriesTransform::Diff;
        if (s == "log_diff") return SeriesTransform::LogDiff;
        errors.emplace_back(key, "expected none | diff | log_diff");
        return SeriesTransform::None;
    };

    require_path("data.returns", config.returns_path);
    if (auto v = get("data.returns_schema")) {
        std::string s = lower(*v);
        if (s == "date_value") {
            config.returns_schema = CsvSchema::DateValue;
        } else if (s == "yahoo") {
            config.returns_schema = CsvSchema::YahooOhlc;
        } else {
            errors.emplace_back("data.returns_schema", "expected date_value | yahoo");
        }
    }
    if (auto v = get("data.returns_kind")) {
        std::string s = lower(*v);
        if (s == "returns") {
            config.returns_are_returns = true;
        } else if (s == "prices") {
            config.returns_are_returns = false;
        } else {
            errors.emplace_back("data.returns_kind", "expected prices | returns");
        }
    }

    require_path("data.covariate1", config.covariate1.path);
    require_path("data.covariate2", config.covariate2.path);
    config.covariate1.name = get("data.covariate1_name").value_or("covariate1");
    config.covariate2.name = get("data.covariate2_name").value_or("covariate2");
    config.covariate1.transform = get_transform("data.covariate1_transform");
    config.covariate2.transform = get_transform("data.covariate2_transform");
    config.gm_spec.covariate1_name = config.covariate1.name;
    config.gm_spec.covariate2_name = config.covariate2.name;

    for (const auto& [name, file] : raw.regressors) {
        if (!std::filesystem::exists(file)) {
            errors.emplace_back("data.regressor." + name, "file does not exist: '" + file + "'");
        }
        config.regressors.emplace_back(name, file);
    }
    if (config.regressors.size() < 2) {
        errors.emplace_back("data.regressor.*", "need at least two stage-2 regressors");
    }

    config.start = get_date("sample.start");
    config.end = get_date("sample.end");
    if (config.start && config.end && !(*config.start < *config.end)) {
        errors.emplace_back("sample", "end date must come after start date");
    }

    config.gm_spec.K = get_int("garch_midas.k", 12);
    if (config.gm_spec.K < 1) errors.emplace_back("garch_midas.k", "K must be >= 1");
    if (auto v = get("garch_midas.long_run")) {
        std::string s = lower(*v);
        if (s == "log") {
            config.gm_spec.form = LongRunForm::Log;
        } else if (s == "level") {
            config.gm_spec.form = LongRunForm::Level;
        } else {
            errors.emplace_back("garch_midas.long_run", "expected log | level");
        }
    }
    config.gm_spec.estimate_w1 = get_bool("garch_midas.estimate_w1", false);
    config.lag_months = get_int("garch_midas.lag_months", 0);
    if (config.lag_months < 0) errors.emplace_back("garch_midas.lag_months", "must be >= 0");

    config.msr_regimes = get_int("msr.regimes", 2);
    if (config.msr_regimes < 2 || config.msr_regimes > 4) {
        errors.emplace_back("msr.regimes", "supported regime counts are 2..4");
    }
    config.switching_variance = get_bool("msr.switching_variance", true);

    if (auto v = get("qr.taus")) {
        // either lo:hi:step or a comma list
        std::string s = *v;
        std::vector<double> taus;
        bool ok = true;
        if (s.find(':') != std::string::npos) {
            double lo = 0, hi = 0, step = 0;
            char c1 = 0, c2 = 0;
            std::istringstream ss(s);
            if (ss >> lo >> c1 >> hi >> c2 >> step && c1 == ':' && c2 == ':' && step > 0) {
                for (double t = lo; t <= hi + 1e-12; t += step) taus.push_back(t);
            } else {
                ok = false;
            }
        } else {
            std::istringstream ss(s);
            std::string token;
            while (std::getline(ss, token, ',')) {
                try {
                    taus.push_back(std::stod(token));
                } catch (const std::exception&) {
                    ok = false;
                }
            }
        }
        for (double t : taus) {
            if (!(t > 0.0 && t < 1.0)) ok = false;
        }
        for (std::size_t i = 1; i < taus.size(); ++i) {
            if (!(taus[i] > taus[i - 1])) ok = false;
        }
        if (!ok || taus.empty()) {
            errors.emplace_back("qr.taus", "expected lo:hi:step or a strictly increasing list in (0,1)");
        } else {
            config.taus = taus;
        }
    }
    if (config.taus.empty()) {
        for (int i = 1; i <= 19; ++i) config.taus.push_back(0.05 * i);
    }

    if (auto v = get("stage2.ltv_frequency")) {
        std::string s = lower(*v);
        if (s == "monthly") {
            config.ltv_monthly = true;
        } else if (s == "daily") {
            config.ltv_monthly = false;
        } else {
            errors.emplace_back("stage2.ltv_frequency", "expected monthly | daily");
        }
    }
    config.stage2_lag = get_int("stage2.lag", 0);
    if (config.stage2_lag < 0) errors.emplace_back("stage2.lag", "must be >= 0");

    if (auto v = get("output.dir")) config.output_dir = *v;
    if (auto v = get("run.seed")) {
        try {
            config.seed = std::stoull(*v);
        } catch (const std::exception&) {
            errors.emplace_back("run.seed", "not an unsigned integer: '" + *v + "'");
        }
    }

    return config;
}

}  // namespace regimevol
