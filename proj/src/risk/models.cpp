#include "varmcs/risk/models.hpp"

#include "varmcs/common/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace varmcs::risk {

namespace {

std::string upper(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
    return out;
}

int parse_order(std::string_view text, std::string_view label) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || value < 1 || value > 10)
        throw InputError("bad lag order in model label '" + std::string(label) + "'");
    return value;
}

}  // namespace

std::string canonical_label(const ModelVariant& spec) {
    if (const auto* g = std::get_if<vol::GarchSpec>(&spec)) {
        std::string label(vol::family_name(g->family));
        if (g->p != 1 || g->q != 1) label += "(" + std::to_string(g->p) + "," + std::to_string(g->q) + ")";
        return label + (g->dist == vol::Distribution::Gaussian ? "-N" : "-T");
    }
    if (const auto* g = std::get_if<vol::GasSpec>(&spec)) {
        std::string label = g->dist == vol::GasDist::Gaussian ? "GAS-N" : "GAS-T";
        if (g->static_shape) label += "-static";
        return label;
    }
    const auto& c = std::get<caviar::CaviarSpec>(spec);
    return "CAViaR-" + std::string(caviar::variant_name(c.variant));
}

ModelSpec parse_model(std::string_view label) {
    const std::string text = upper(label);
    if (text.rfind("CAVIAR-", 0) == 0) {
        caviar::CaviarSpec spec;
        spec.variant = caviar::parse_variant(std::string_view(text).substr(7));
        return {canonical_label(spec), spec};
    }
    if (text == "GAS-N" || text == "GAS-T" || text == "GAS-T-STATIC") {
        vol::GasSpec spec;
        spec.dist = text == "GAS-N" ? vol::GasDist::Gaussian : vol::GasDist::StudentT;
        spec.static_shape = text == "GAS-T-STATIC";
        return {canonical_label(spec), spec};
    }
    const auto dash = text.rfind('-');
    if (dash == std::string::npos || dash + 2 != text.size())
        throw InputError("model label '" + std::string(label) + "' needs a -N or -T suffix");
    vol::GarchSpec spec;
    const char dist = text[dash + 1];
    if (dist == 'N')
        spec.dist = vol::Distribution::Gaussian;
    else if (dist == 'T')
        spec.dist = vol::Distribution::StudentT;
    else
        throw InputError("model label '" + std::string(label) + "' needs a -N or -T suffix");
    std::string_view head = std::string_view(text).substr(0, dash);
    if (const auto open = head.find('('); open != std::string_view::npos) {
        const auto comma = head.find(',', open);
        if (comma == std::string_view::npos || head.back() != ')')
            throw InputError("bad lag orders in model label '" + std::string(label) + "'");
        spec.p = parse_order(head.substr(open + 1, comma - open - 1), label);
        spec.q = parse_order(head.substr(comma + 1, head.size() - comma - 2), label);
        head = head.substr(0, open);
    }
    spec.family = vol::parse_family(head);
    return {canonical_label(spec), spec};
}

std::vector<ModelSpec> standard_model_set() {
    std::vector<ModelSpec> out;
    for (auto family : {vol::GarchFamily::GARCH, vol::GarchFamily::EGARCH, vol::GarchFamily::APARCH,
                        vol::GarchFamily::AVGARCH, vol::GarchFamily::GJRGARCH, vol::GarchFamily::TGARCH,
                        vol::GarchFamily::NGARCH, vol::GarchFamily::CGARCH}) {
        for (auto dist : {vol::Distribution::Gaussian, vol::Distribution::StudentT}) {
            vol::GarchSpec spec;
            spec.family = family;
            spec.dist = dist;
            out.push_back({canonical_label(spec), spec});
        }
    }
    for (auto dist : {vol::GasDist::Gaussian, vol::GasDist::StudentT}) {
        vol::GasSpec spec;
        spec.dist = dist;
        out.push_back({canonical_label(spec), spec});
    }
    for (auto variant : {caviar::Variant::SymmetricAbsValue, caviar::Variant::AsymmetricSlope,
                         caviar::Variant::IndirectGarch, caviar::Variant::Adaptive}) {
        caviar::CaviarSpec spec;
        spec.variant = variant;
        out.push_back({canonical_label(spec), spec});
    }
    return out;
}

}  // namespace varmcs::risk
