#pragma once

// Straightforward reference for the MCS procedure, used only by tests.
// Works on explicit per-period differential series and resamples them directly,
// with plain loops and no shared state with the library beyond the bootstrap index sets.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Solves A x = b by Gauss-Jordan elimination with partial pivoting. Returns false if singular.
inline bool solve_linear(Matrix a, std::vector<double> b, std::vector<double>& x, Matrix* inverse = nullptr) {
    const std::size_t n = b.size();
    Matrix inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) return false;
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        std::swap(b[pivot], b[col]);
        const double diag = a[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col][c] /= diag;
            inv[col][c] /= diag;
        }
        b[col] /= diag;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    x = b;
    if (inverse) *inverse = inv;
    return true;
}

/// Largest lag with |t| > 1.96 in an AR(p) OLS fit (with intercept) of any pairwise
/// differential, p = min(10, floor(n^(1/3))); at least 1.
inline std::size_t naive_block_length(const Matrix& losses) {
    const std::size_t m = losses.size();
    const std::size_t n = losses[0].size();
    std::size_t p = 1;
    while ((p + 1) * (p + 1) * (p + 1) <= n) ++p;
    if (p > 10) p = 10;
    std::size_t best = 1;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            std::vector<double> d(n);
            bool constant = true;
            for (std::size_t t = 0; t < n; ++t) {
                d[t] = losses[i][t] - losses[j][t];
                if (d[t] != d[0]) constant = false;
            }
            if (constant) continue;
            const std::size_t k = p + 1;
            Matrix xtx(k, std::vector<double>(k, 0.0));
            std::vector<double> xty(k, 0.0);
            for (std::size_t t = p; t < n; ++t) {
                std::vector<double> row(k);
                row[0] = 1.0;
                for (std::size_t l = 1; l <= p; ++l) row[l] = d[t - l];
                for (std::size_t a = 0; a < k; ++a) {
                    xty[a] += row[a] * d[t];
                    for (std::size_t b = 0; b < k; ++b) xtx[a][b] += row[a] * row[b];
                }
            }
            std::vector<double> coef;
            Matrix inv;
            if (!solve_linear(xtx, xty, coef, &inv)) continue;
            double rss = 0.0;
            for (std::size_t t = p; t < n; ++t) {
                double fit = coef[0];
                for (std::size_t l = 1; l <= p; ++l) fit += coef[l] * d[t - l];
                rss += (d[t] - fit) * (d[t] - fit);
            }
            const double s2 = rss / static_cast<double>(n - p - k);
            for (std::size_t l = 1; l <= p; ++l) {
                const double se = std::sqrt(s2 * inv[l][l]);
                if (se > 0.0 && std::abs(coef[l] / se) > 1.96 && l > best) best = l;
            }
        }
    }
    return best;
}

/// Moving-block index sets: ceil(n/p) blocks per replicate, starts uniform on [0, n-p]
/// drawn from mt19937_64(seed) by rejection of the low remainder band, truncated to n.
inline std::vector<std::vector<std::size_t>> naive_indices(std::size_t n, std::size_t B, std::size_t p,
                                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::uint64_t choices = n - p + 1;
    auto draw = [&]() -> std::uint64_t {
        if (choices == 1) return 0;
        const std::uint64_t reject_below = (~choices + 1) % choices;  // 2^64 mod choices
        while (true) {
            const std::uint64_t r = rng();
            if (r >= reject_below) return r % choices;
        }
    };
    const std::size_t blocks = (n + p - 1) / p;
    std::vector<std::vector<std::size_t>> out(B);
    for (auto& idx : out) {
        std::vector<std::size_t> starts(blocks);
        for (auto& s : starts) s = static_cast<std::size_t>(draw());
        for (std::size_t s : starts)
            for (std::size_t j = 0; j < p && idx.size() < n; ++j) idx.push_back(s + j);
    }
    return out;
}

struct NaiveResult {
    std::vector<std::size_t> eliminated;  // model indices in elimination order
    std::vector<std::size_t> survivors;   // ascending model index
    std::vector<double> step_p;           // p-value of the configured statistic at each step
};

inline double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double resampled_mean(const std::vector<double>& x, const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t t : idx) s += x[t];
    return s / static_cast<double>(idx.size());
}

inline double student(double mean, double var) {
    if (var > 0.0) return mean / std::sqrt(var);
    if (mean == 0.0) return 0.0;
    return mean > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

/// use_tmax selects T_max / e_max, otherwise T_R / e_R.
inline NaiveResult naive_mcs(const Matrix& losses, const std::vector<std::vector<std::size_t>>& indices, double alpha,
                             bool use_tmax) {
    const std::size_t n = losses[0].size();
    const std::size_t B = indices.size();
    std::vector<std::size_t> set;
    for (std::size_t i = 0; i < losses.size(); ++i) set.push_back(i);
    NaiveResult out;

    while (set.size() > 1) {
        const std::size_t k = set.size();
        // pairwise series and their statistics
        Matrix tij(k, std::vector<double>(k, 0.0));
        std::vector<std::vector<std::vector<double>>> pair_centered(k, std::vector<std::vector<double>>(k));
        Matrix pair_sd(k, std::vector<double>(k, 0.0));
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t c = 0; c < k; ++c) {
                if (a == c) continue;
                std::vector<double> d(n);
                for (std::size_t t = 0; t < n; ++t) d[t] = losses[set[a]][t] - losses[set[c]][t];
                const double dbar = mean_of(d);
                std::vector<double> centered(B);
                double var = 0.0;
                for (std::size_t b = 0; b < B; ++b) {
                    centered[b] = resampled_mean(d, indices[b]) - dbar;
                    var += centered[b] * centered[b];
                }
                var /= static_cast<double>(B);
                tij[a][c] = student(dbar, var);
                pair_centered[a][c] = centered;
                pair_sd[a][c] = std::sqrt(var);
            }
        }
        // model-versus-set series
        std::vector<double> ti(k);
        Matrix dot_centered(k);
        std::vector<double> dot_sd(k);
        for (std::size_t a = 0; a < k; ++a) {
            std::vector<double> d(n, 0.0);
            for (std::size_t t = 0; t < n; ++t) {
                double s = 0.0;
                for (std::size_t c = 0; c < k; ++c)
                    if (c != a) s += losses[set[a]][t] - losses[set[c]][t];
                d[t] = s / static_cast<double>(k - 1);
            }
            const double dbar = mean_of(d);
            std::vector<double> centered(B);
            double var = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
                centered[b] = resampled_mean(d, indices[b]) - dbar;
                var += centered[b] * centered[b];
            }
            var /= static_cast<double>(B);
            ti[a] = student(dbar, var);
            dot_centered[a] = centered;
            dot_sd[a] = std::sqrt(var);
        }

        double T = 0.0;
        if (use_tmax) {
            T = -std::numeric_limits<double>::infinity();
            for (double v : ti) T = std::max(T, v);
        } else {
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t c = 0; c < k; ++c)
                    if (a != c) T = std::max(T, std::abs(tij[a][c]));
        }
        std::size_t exceed = 0;
        for (std::size_t b = 0; b < B; ++b) {
            double Tb = use_tmax ? -std::numeric_limits<double>::infinity() : 0.0;
            for (std::size_t a = 0; a < k; ++a) {
                if (use_tmax) {
                    const double v = dot_sd[a] > 0.0 ? dot_centered[a][b] / dot_sd[a] : 0.0;
                    Tb = std::max(Tb, v);
                } else {
                    for (std::size_t c = 0; c < k; ++c) {
                        if (a == c) continue;
                        const double v = pair_sd[a][c] > 0.0 ? pair_centered[a][c][b] / pair_sd[a][c] : 0.0;
                        Tb = std::max(Tb, std::abs(v));
                    }
                }
            }
            if (Tb >= T) ++exceed;
        }
        const double p = static_cast<double>(exceed) / static_cast<double>(B);
        out.step_p.push_back(p);
        if (p > alpha) break;

        std::size_t worst = 0;
        double worst_v = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < k; ++a) {
            double v = ti[a];
            if (!use_tmax) {
                v = -std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < k; ++c)
                    if (c != a) v = std::max(v, tij[a][c]);
            }
            if (v > worst_v) {
                worst_v = v;
                worst = a;
            }
        }
        out.eliminated.push_back(set[worst]);
        set.erase(set.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    out.survivors = set;
    return out;
}

}  // namespace oracle
