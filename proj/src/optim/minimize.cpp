#include "varmcs/optim/minimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace varmcs::optim {

namespace {

// Large but finite: GSL's line search and simplex arithmetic cannot digest inf.
constexpr double kPenalty = 1e100;

const bool kGslHandlerOff = [] {
    gsl_set_error_handler_off();
    return true;
}();

struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;

VectorPtr make_vector(std::span<const double> values) {
    VectorPtr v(gsl_vector_alloc(values.size()));
    for (std::size_t k = 0; k < values.size(); ++k) gsl_vector_set(v.get(), k, values[k]);
    return v;
}

/// Wraps the objective, counts evaluations and remembers the best point seen.
class Tracker {
public:
    explicit Tracker(const Objective& f, double fd_step = 1e-5) : f_(f), fd_step_(fd_step) {}

    double eval(std::span<const double> x) {
        ++evaluations_;
        double value = f_(x);
        if (!std::isfinite(value)) value = std::numeric_limits<double>::infinity();
        if (value < best_value_) {
            best_value_ = value;
            best_x_.assign(x.begin(), x.end());
        }
        return value;
    }

    double eval_gsl(const gsl_vector* v) {
        scratch_.resize(v->size);
        for (std::size_t k = 0; k < v->size; ++k) scratch_[k] = gsl_vector_get(v, k);
        const double value = eval(scratch_);
        return std::isfinite(value) ? value : kPenalty;
    }

    void gradient_gsl(const gsl_vector* v, gsl_vector* g) {
        std::vector<double> x(v->size);
        for (std::size_t k = 0; k < v->size; ++k) x[k] = gsl_vector_get(v, k);
        const auto grad = numerical_gradient([this](std::span<const double> p) { return eval(p); }, x,
                                             fd_step_);
        for (std::size_t k = 0; k < grad.size(); ++k)
            gsl_vector_set(g, k, std::isfinite(grad[k]) ? grad[k] : 0.0);
    }

    MinimizeResult result(int iterations, bool converged) const {
        MinimizeResult r;
        r.x = best_x_;
        r.value = best_value_;
        r.iterations = iterations;
        r.evaluations = evaluations_;
        r.converged = converged;
        return r;
    }

private:
    const Objective& f_;
    double fd_step_;
    int evaluations_ = 0;
    double best_value_ = std::numeric_limits<double>::infinity();
    std::vector<double> best_x_;
    std::vector<double> scratch_;
};

double gsl_f(const gsl_vector* v, void* params) { return static_cast<Tracker*>(params)->eval_gsl(v); }

void gsl_df(const gsl_vector* v, void* params, gsl_vector* g) {
    static_cast<Tracker*>(params)->gradient_gsl(v, g);
}

void gsl_fdf(const gsl_vector* v, void* params, double* f, gsl_vector* g) {
    auto* tracker = static_cast<Tracker*>(params);
    *f = tracker->eval_gsl(v);
    tracker->gradient_gsl(v, g);
}

}  // namespace

std::vector<double> numerical_gradient(const Objective& f, std::span<const double> x, double step) {
    std::vector<double> point(x.begin(), x.end());
    std::vector<double> grad(x.size(), 0.0);
    const double f0 = f(point);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double h = step * std::max(1.0, std::abs(x[k]));
        point[k] = x[k] + h;
        const double up = f(point);
        point[k] = x[k] - h;
        const double down = f(point);
        point[k] = x[k];
        if (std::isfinite(up) && std::isfinite(down)) {
            grad[k] = (up - down) / (2.0 * h);
        } else if (std::isfinite(up) && std::isfinite(f0)) {
            grad[k] = (up - f0) / h;
        } else if (std::isfinite(down) && std::isfinite(f0)) {
            grad[k] = (f0 - down) / h;
        } else {
            grad[k] = 0.0;
        }
    }
    return grad;
}

MinimizeResult minimize_bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& options) {
    (void)kGslHandlerOff;
    Tracker tracker(f, options.fd_step);
    const double start = tracker.eval(x0);
    if (!std::isfinite(start) || x0.empty()) return tracker.result(0, false);

    gsl_multimin_function_fdf fn;
    fn.n = x0.size();
    fn.f = &gsl_f;
    fn.df = &gsl_df;
    fn.fdf = &gsl_fdf;
    fn.params = &tracker;

    std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> solver(
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, x0.size()),
        &gsl_multimin_fdfminimizer_free);
    auto start_vec = make_vector(x0);
    gsl_multimin_fdfminimizer_set(solver.get(), &fn, start_vec.get(), options.initial_step,
                                  options.line_tolerance);

    int iter = 0;
    bool converged = false;
    int stalled = 0;
    double previous = start;
    while (iter < options.max_iterations) {
        ++iter;
        const int status = gsl_multimin_fdfminimizer_iterate(solver.get());
        if (status != GSL_SUCCESS) {
            // No further progress along the search direction: accept if the gradient is small.
            converged = gsl_multimin_test_gradient(solver->gradient, options.gradient_tolerance * 100) ==
                        GSL_SUCCESS;
            break;
        }
        if (gsl_multimin_test_gradient(solver->gradient, options.gradient_tolerance) == GSL_SUCCESS) {
            converged = true;
            break;
        }
        const double current = solver->f;
        const double tol = options.relative_tolerance * (std::abs(current) + options.relative_tolerance);
        stalled = previous - current < tol ? stalled + 1 : 0;
        previous = current;
        if (options.relative_tolerance > 0.0 && stalled >= options.stall_iterations) {
            converged = true;
            break;
        }
    }
    return tracker.result(iter, converged);
}

MinimizeResult minimize_nelder_mead(const Objective& f, std::vector<double> x0,
                                    const NelderMeadOptions& options) {
    (void)kGslHandlerOff;
    Tracker tracker(f);
    const double start = tracker.eval(x0);
    if (!std::isfinite(start) || x0.empty()) return tracker.result(0, false);

    gsl_multimin_function fn;
    fn.n = x0.size();
    fn.f = &gsl_f;
    fn.params = &tracker;

    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, x0.size()),
        &gsl_multimin_fminimizer_free);
    auto start_vec = make_vector(x0);
    std::vector<double> steps(x0.size());
    for (std::size_t k = 0; k < x0.size(); ++k)
        steps[k] = std::max(options.initial_step, options.initial_step * std::abs(x0[k]));
    auto step_vec = make_vector(steps);
    gsl_multimin_fminimizer_set(solver.get(), &fn, start_vec.get(), step_vec.get());

    int iter = 0;
    bool converged = false;
    while (iter < options.max_iterations) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
        const double size = gsl_multimin_fminimizer_size(solver.get());
        if (gsl_multimin_test_size(size, options.size_tolerance) == GSL_SUCCESS) {
            converged = true;
            break;
        }
    }
    return tracker.result(iter, converged);
}

}  // namespace varmcs::optim
