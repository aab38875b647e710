#pragma once

#include <functional>
#include <span>
#include <vector>

namespace varmcs::optim {

/// Objective over an unconstrained vector. Infeasible points return +inf.
using Objective = std::function<double(std::span<const double>)>;

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

struct BfgsOptions {
    int max_iterations = 400;
    double gradient_tolerance = 1e-5;
    /// Also stop once `stall_iterations` iterations in a row improve f by less than
    /// relative_tolerance * (|f| + relative_tolerance). Zero disables the test.
    double relative_tolerance = 1e-9;
    int stall_iterations = 5;
    double initial_step = 0.05;
    double line_tolerance = 0.1;
    double fd_step = 1e-5;
};

struct NelderMeadOptions {
    int max_iterations = 4000;
    double size_tolerance = 1e-7;
    /// Initial simplex edge per coordinate: max(initial_step, initial_step * |x0_k|).
    double initial_step = 0.1;
};

/// Central-difference gradient; falls back to a one-sided difference when a
/// neighbour is infeasible.
std::vector<double> numerical_gradient(const Objective& f, std::span<const double> x, double step);

/// Quasi-Newton (GSL vector_bfgs2) with numerical gradients. The returned point is
/// the best one evaluated, so `value <= f(x0)` whenever f(x0) is finite.
MinimizeResult minimize_bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& options = {});

/// Derivative-free simplex search (GSL nmsimplex2). Same best-point guarantee.
MinimizeResult minimize_nelder_mead(const Objective& f, std::vector<double> x0,
                                    const NelderMeadOptions& options = {});

}  // namespace varmcs::optim
