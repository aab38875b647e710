#include "varmcs/app/config.hpp"

#include "varmcs/common/errors.hpp"
#include "varmcs/common/format.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace varmcs::app {

namespace {

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
    if (!node.IsMap()) throw InputError("config: '" + section + "' must be a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw InputError("config: unknown key '" + key + "' in '" + section + "'");
    }
}

template <typename T>
T get(const YAML::Node& node, const std::string& key, const std::string& section, T fallback) {
    const auto child = node[key];
    if (!child || child.IsNull()) return fallback;
    try {
        return child.as<T>();
    } catch (const YAML::Exception&) {
        throw InputError("config: bad value for '" + section + "." + key + "'");
    }
}

std::size_t get_count(const YAML::Node& node, const std::string& key, const std::string& section,
                      std::size_t fallback) {
    const long long v = get<long long>(node, key, section, static_cast<long long>(fallback));
    if (v < 0) throw InputError("config: '" + section + "." + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& text) {
    std::filesystem::path p(text);
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

void RunConfig::validate() const {
    if (data_path.empty()) throw InputError("config: data.path is required");
    if (!std::filesystem::exists(data_path)) throw InputError("config: data file '" + data_path.string() + "' not found");
    if (out_of_sample == 0) throw InputError("config: split.out_of_sample must be positive");
    if (!(tau > 0.0 && tau < 1.0)) throw InputError("config: tau must lie in (0,1)");
    if (models.empty()) throw InputError("config: the model list is empty");
    if (!(loss_delta > 0.0)) throw InputError("config: loss.delta must be positive");
    mcs.validate();
    if (!(eta >= 0.0)) throw InputError("config: combination.eta must be nonnegative");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError("config: combination.lambda must lie in (0,1]");
    if (rolling.refit_every < 1) throw InputError("config: forecast.refit_every must be at least 1");
    if (rolling.fit.starts < 1 || rolling.refit_starts < 1) throw InputError("config: optimizer starts must be positive");
    if (rolling.caviar.random_starts < 1 || rolling.caviar_refit_starts < 0)
        throw InputError("config: CAViaR start counts must be positive");
    if (output_dir.empty()) throw InputError("config: output is required");
}

RunConfig parse_run_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw InputError(std::string("config: YAML parse error: ") + e.what());
    }
    check_keys(root, "config",
               {"asset", "data", "split", "tau", "models", "loss", "mcs", "combination", "forecast", "workers", "output"});

    RunConfig c;
    c.asset = get<std::string>(root, "asset", "config", c.asset);
    c.tau = get<double>(root, "tau", "config", c.tau);
    c.workers = static_cast<unsigned>(get_count(root, "workers", "config", 1));
    const auto output = get<std::string>(root, "output", "config", "");
    if (!output.empty()) c.output_dir = resolve(base_dir, output);

    if (const auto data = root["data"]) {
        check_keys(data, "data", {"path", "date_column", "value_column"});
        const auto path = get<std::string>(data, "path", "data", "");
        if (!path.empty()) c.data_path = resolve(base_dir, path);
        c.date_column = get<std::string>(data, "date_column", "data", c.date_column);
        c.value_column = get<std::string>(data, "value_column", "data", c.value_column);
    }
    if (const auto split = root["split"]) {
        check_keys(split, "split", {"out_of_sample"});
        c.out_of_sample = get_count(split, "out_of_sample", "split", 0);
    }

    const auto models = root["models"];
    if (models && models.IsScalar()) {
        if (models.as<std::string>() != "standard")
            throw InputError("config: 'models' must be a list of labels or the word 'standard'");
        c.models = risk::standard_model_set();
    } else if (models && models.IsSequence()) {
        for (const auto& m : models) c.models.push_back(risk::parse_model(m.as<std::string>()));
    }

    if (const auto loss = root["loss"]) {
        check_keys(loss, "loss", {"type", "delta"});
        c.loss_type = loss::parse_var_loss_type(get<std::string>(loss, "type", "loss", "normal"));
        c.loss_delta = get<double>(loss, "delta", "loss", c.loss_delta);
    }
    if (const auto m = root["mcs"]) {
        check_keys(m, "mcs", {"alpha", "B", "statistic", "block_length", "seed"});
        c.mcs.alpha = get<double>(m, "alpha", "mcs", c.mcs.alpha);
        c.mcs.B = get<int>(m, "B", "mcs", c.mcs.B);
        c.mcs.statistic = mcs::parse_statistic(get<std::string>(m, "statistic", "mcs", "Tmax"));
        if (m["block_length"] && !m["block_length"].IsNull())
            c.mcs.block_length = get_count(m, "block_length", "mcs", 1);
        c.mcs.seed = get<std::uint64_t>(m, "seed", "mcs", c.mcs.seed);
    }
    if (const auto comb = root["combination"]) {
        check_keys(comb, "combination", {"eta", "lambda"});
        c.eta = get<double>(comb, "eta", "combination", c.eta);
        c.lambda = get<double>(comb, "lambda", "combination", c.lambda);
    }
    if (const auto f = root["forecast"]) {
        check_keys(f, "forecast",
                   {"refit_every", "window", "seed", "starts", "refit_starts", "caviar_starts", "caviar_refit_starts",
                    "caviar_polished"});
        auto& r = c.rolling;
        r.refit_every = get_count(f, "refit_every", "forecast", r.refit_every);
        r.window = get_count(f, "window", "forecast", r.window);
        r.seed = get<std::uint64_t>(f, "seed", "forecast", r.seed);
        r.fit.starts = get<int>(f, "starts", "forecast", r.fit.starts);
        r.refit_starts = get<int>(f, "refit_starts", "forecast", r.refit_starts);
        r.caviar.random_starts = get<int>(f, "caviar_starts", "forecast", 1000);
        r.caviar_refit_starts = get<int>(f, "caviar_refit_starts", "forecast", r.caviar_refit_starts);
        r.caviar.polished = get<int>(f, "caviar_polished", "forecast", r.caviar.polished);
    } else {
        c.rolling.caviar.random_starts = 1000;
    }
    c.rolling.workers = c.workers;
    c.mcs.workers = c.workers;
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), path.parent_path());
}

std::string canonical_config(const RunConfig& c) {
    std::ostringstream out;
    out << "asset=" << c.asset << '\n';
    out << "data=" << c.data_path.filename().string() << '\n';
    out << "date_column=" << c.date_column << "\nvalue_column=" << c.value_column << '\n';
    out << "out_of_sample=" << c.out_of_sample << '\n';
    out << "tau=" << format_double(c.tau) << '\n';
    out << "models=";
    for (std::size_t i = 0; i < c.models.size(); ++i) out << (i ? "," : "") << c.models[i].label;
    out << '\n';
    out << "loss=" << (c.loss_type == loss::VarLossType::Normal ? "normal" : "differentiable") << ','
        << format_double(c.loss_delta) << '\n';
    out << "mcs.alpha=" << format_double(c.mcs.alpha) << "\nmcs.B=" << c.mcs.B
        << "\nmcs.statistic=" << mcs::to_string(c.mcs.statistic) << "\nmcs.block_length="
        << (c.mcs.block_length ? std::to_string(*c.mcs.block_length) : "auto") << "\nmcs.seed=" << c.mcs.seed << '\n';
    out << "eta=" << format_double(c.eta) << "\nlambda=" << format_double(c.lambda) << '\n';
    const auto& r = c.rolling;
    out << "refit_every=" << r.refit_every << "\nwindow=" << r.window << "\nforecast.seed=" << r.seed
        << "\nstarts=" << r.fit.starts << "\nrefit_starts=" << r.refit_starts
        << "\ncaviar_starts=" << r.caviar.random_starts << "\ncaviar_refit_starts=" << r.caviar_refit_starts
        << "\ncaviar_polished=" << r.caviar.polished << '\n';
    return out.str();
}

}  // namespace varmcs::app
