#include "varmcs/mcs/mcs.hpp"

#include "varmcs/common/format.hpp"

#include "json.hpp"

#include <cmath>
#include <ostream>

namespace varmcs::mcs {

namespace {

using nlohmann::ordered_json;

// JSON has no infinities; deterministic orderings are written as strings.
ordered_json number(double value) {
    if (std::isfinite(value)) return value;
    return format_double(value);
}

}  // namespace

void write_ssm_csv(std::ostream& out, const SsmResult& result) {
    out << "model,Rank_R,t_ij,p_value_R,Rank_max,t_i,p_value_max,Loss_x1e3\n";
    for (std::size_t idx : result.survivors) {
        const auto& r = result.models[idx];
        out << r.name << ',' << r.rank_R << ',' << format_double(r.v_R) << ',' << format_double(r.mcs_p_R) << ','
            << r.rank_max << ',' << format_double(r.v_max) << ',' << format_double(r.mcs_p_max) << ','
            << format_double(r.mean_loss * 1e3) << '\n';
    }
}

void write_ssm_json(std::ostream& out, const SsmResult& result) {
    ordered_json doc;
    const auto& c = result.config;
    doc["config"] = {{"alpha", c.alpha},
                     {"B", c.B},
                     {"statistic", std::string(to_string(c.statistic))},
                     {"seed", c.seed},
                     {"block_length", result.block_length},
                     {"block_length_auto", !c.block_length.has_value()}};
    if (result.selection) {
        doc["block_length_selection"] = {{"largest_significant_lag", result.selection->length},
                                         {"max_significant_count", result.selection->max_significant},
                                         {"ar_order", result.selection->max_order},
                                         {"pairs_used", result.selection->pairs_used}};
    }
    doc["n"] = result.n;

    ordered_json survivors = ordered_json::array();
    for (std::size_t idx : result.survivors) survivors.push_back(result.models[idx].name);
    doc["survivors"] = std::move(survivors);

    ordered_json models = ordered_json::array();
    for (const auto& r : result.models) {
        ordered_json m = {{"name", r.name},
                          {"mean_loss", r.mean_loss},
                          {"survivor", r.survivor},
                          {"mcs_p_R", r.mcs_p_R},
                          {"mcs_p_max", r.mcs_p_max}};
        if (r.eliminated_at) m["eliminated_at_step"] = *r.eliminated_at;
        if (r.survivor) {
            m["rank_R"] = r.rank_R;
            m["rank_max"] = r.rank_max;
            m["t_ij"] = number(r.v_R);
            m["t_i"] = number(r.v_max);
        }
        models.push_back(std::move(m));
    }
    doc["models"] = std::move(models);

    ordered_json steps = ordered_json::array();
    for (std::size_t s = 0; s < result.steps.size(); ++s) {
        const auto& st = result.steps[s];
        ordered_json names = ordered_json::array();
        for (std::size_t idx : st.models) names.push_back(result.models[idx].name);
        ordered_json step = {{"step", s},
                             {"models", std::move(names)},
                             {"T_R", number(st.T_R)},
                             {"T_max", number(st.T_max)},
                             {"p_R", st.p_R},
                             {"p_max", st.p_max}};
        if (st.eliminated)
            step["eliminated"] = result.models[*st.eliminated].name;
        else
            step["eliminated"] = nullptr;
        steps.push_back(std::move(step));
    }
    doc["steps"] = std::move(steps);
    out << doc.dump(2) << '\n';
}

}  // namespace varmcs::mcs
