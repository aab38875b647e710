#include "varmcs/loss/loss.hpp"

#include "varmcs/common/csv.hpp"
#include "varmcs/common/errors.hpp"
#include "varmcs/common/format.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace varmcs::loss {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw InputError("realized and evaluated series differ in length (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
}

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
    return out;
}

}  // namespace

std::vector<double> loss_var(std::span<const double> realized, std::span<const double> evaluated, double tau,
                             VarLossType type, double delta) {
    check_lengths(realized, evaluated);
    if (!(tau > 0.0 && tau < 1.0)) throw InputError("VaR loss needs tau in (0,1)");
    if (type == VarLossType::Differentiable && !(delta > 0.0)) throw InputError("smoothness delta must be positive");
    std::vector<double> out(realized.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        const double u = realized[t] - evaluated[t];
        double d;
        if (type == VarLossType::Normal) {
            d = realized[t] < evaluated[t] ? 1.0 : 0.0;
        } else {
            // 1/(1+exp(x)) without overflow for large |x|.
            const double x = delta * u;
            d = x > 0.0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
        }
        out[t] = (tau - d) * u;
    }
    return out;
}

std::vector<double> loss_vol(std::span<const double> realized, std::span<const double> evaluated, VolLoss which) {
    check_lengths(realized, evaluated);
    std::vector<double> out(realized.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        const double r = realized[t];
        const double f = evaluated[t];
        switch (which) {
            case VolLoss::SE1:
                out[t] = (r - f) * (r - f);
                break;
            case VolLoss::SE2:
                out[t] = (r * r - f * f) * (r * r - f * f);
                break;
            case VolLoss::QLIKE:
                if (!(r > 0.0 && f > 0.0)) throw InputError("QLIKE needs positive volatilities (t=" + std::to_string(t) + ")");
                out[t] = std::log(f * f) + (r * r) / (f * f);
                break;
            case VolLoss::R2LOG: {
                if (!(r > 0.0 && f > 0.0)) throw InputError("R2LOG needs positive volatilities (t=" + std::to_string(t) + ")");
                const double l = std::log((r * r) / (f * f));
                out[t] = l * l;
                break;
            }
            case VolLoss::AE1:
                out[t] = std::abs(r - f);
                break;
            case VolLoss::AE2:
                out[t] = std::abs(r * r - f * f);
                break;
        }
    }
    return out;
}

std::vector<double> loss_level(std::span<const double> realized, std::span<const double> evaluated, LevelLoss which) {
    check_lengths(realized, evaluated);
    std::vector<double> out(realized.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        const double e = realized[t] - evaluated[t];
        out[t] = which == LevelLoss::SE ? e * e : std::abs(e);
    }
    return out;
}

VolLoss parse_vol_loss(std::string_view name) {
    const auto u = upper(name);
    if (u == "SE1") return VolLoss::SE1;
    if (u == "SE2") return VolLoss::SE2;
    if (u == "QLIKE") return VolLoss::QLIKE;
    if (u == "R2LOG") return VolLoss::R2LOG;
    if (u == "AE1") return VolLoss::AE1;
    if (u == "AE2") return VolLoss::AE2;
    throw InputError("unknown volatility loss '" + std::string(name) + "'");
}

LevelLoss parse_level_loss(std::string_view name) {
    const auto u = upper(name);
    if (u == "SE") return LevelLoss::SE;
    if (u == "AE") return LevelLoss::AE;
    throw InputError("unknown level loss '" + std::string(name) + "'");
}

VarLossType parse_var_loss_type(std::string_view name) {
    const auto u = upper(name);
    if (u == "NORMAL") return VarLossType::Normal;
    if (u == "DIFFERENTIABLE") return VarLossType::Differentiable;
    throw InputError("unknown VaR loss type '" + std::string(name) + "'");
}

std::string_view to_string(VolLoss which) {
    switch (which) {
        case VolLoss::SE1: return "SE1";
        case VolLoss::SE2: return "SE2";
        case VolLoss::QLIKE: return "QLIKE";
        case VolLoss::R2LOG: return "R2LOG";
        case VolLoss::AE1: return "AE1";
        case VolLoss::AE2: return "AE2";
    }
    return "?";
}

void LossMatrix::validate() const {
    if (rows.empty()) throw InputError("loss matrix has no models");
    if (names.size() != rows.size()) throw InputError("loss matrix needs one name per row");
    const std::size_t n = rows.front().size();
    if (n == 0) throw InputError("loss matrix has no periods");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != n)
            throw InputError("loss row '" + names[i] + "' has " + std::to_string(rows[i].size()) +
                             " periods, expected " + std::to_string(n));
        for (std::size_t t = 0; t < n; ++t)
            if (!std::isfinite(rows[i][t]))
                throw InputError("non-finite loss for model '" + names[i] + "' at period " + std::to_string(t + 1));
    }
}

LossMatrix build_loss_matrix(std::span<const double> realized, const std::vector<std::string>& names,
                             const std::vector<std::vector<double>>& forecasts, const LossKind& kind) {
    if (names.size() != forecasts.size()) throw InputError("forecast panel needs one name per model");
    LossMatrix m;
    m.names = names;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const auto& f = forecasts[i];
        try {
            switch (kind.family) {
                case LossKind::Family::VaR:
                    m.rows.push_back(loss_var(realized, f, kind.tau, kind.var_type, kind.delta));
                    break;
                case LossKind::Family::Vol:
                    m.rows.push_back(loss_vol(realized, f, kind.vol));
                    break;
                case LossKind::Family::Level:
                    m.rows.push_back(loss_level(realized, f, kind.level));
                    break;
            }
        } catch (const InputError& e) {
            throw InputError("model '" + names[i] + "': " + e.what());
        }
    }
    m.validate();
    return m;
}

LossMatrix read_loss_csv(std::istream& in) {
    LossMatrix m;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        if (first) {
            first = false;
            if (upper(fields.front()) == "MODEL") continue;
        }
        if (fields.size() < 2) throw InputError("loss CSV line " + std::to_string(line_no) + " has no losses");
        if (fields.front().empty()) throw InputError("loss CSV line " + std::to_string(line_no) + " has no model name");
        std::vector<double> row;
        row.reserve(fields.size() - 1);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            const auto v = parse_double(fields[k]);
            if (!v)
                throw InputError("loss CSV line " + std::to_string(line_no) + ", column " + std::to_string(k + 1) +
                                 ": cannot parse '" + fields[k] + "'");
            row.push_back(*v);
        }
        m.names.push_back(fields.front());
        m.rows.push_back(std::move(row));
    }
    if (m.rows.empty()) throw InputError("loss CSV contains no rows");
    m.validate();
    return m;
}

LossMatrix read_loss_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open loss matrix '" + path.string() + "'");
    return read_loss_csv(in);
}

void write_loss_csv(std::ostream& out, const LossMatrix& matrix) {
    out << "model";
    for (std::size_t t = 0; t < matrix.periods(); ++t) out << ",t" << (t + 1);
    out << '\n';
    for (std::size_t i = 0; i < matrix.models(); ++i) {
        out << csv_field(matrix.names[i]);
        for (double v : matrix.rows[i]) out << ',' << format_double(v);
        out << '\n';
    }
}

}  // namespace varmcs::loss
