#pragma once

#include <functional>
#include <span>
#include <vector>

#include "treatkit/splits.hpp"

namespace treatkit {

struct SigResult {
    double sig = 1.0;              // p-value in [0, 1]
    int extra_model_degrees = 0;
    bool converged = true;         // false when the logistic fit hit the iteration cap
};

// Significance of the single-variable linear model y ~ x: F statistic with
// df1 = 1 + extra_degrees and df2 = n - 2 - extra_degrees, upper tail via the
// regularized incomplete beta. Zero-variance x, or too few rows for the
// corrected degrees of freedom, report sig = 1.
SigResult f_test_sig(std::span<const double> x, std::span<const double> y, int extra_degrees);

// Significance of the single-variable logistic model y ~ x: drop in deviance
// against the intercept-only model, upper-tail chi-square with
// df = 1 + extra_degrees. y_ind must be a non-constant 0/1 vector. The IRLS
// solver runs at most 50 iterations (log-likelihood change < 1e-10 to stop)
// with a 1e-12 ridge on the normal equations so quasi-separated inputs of the
// kind tiny design frames produce still yield a finite answer.
SigResult chisq_test_sig(std::span<const double> x, std::span<const double> y_ind,
                         int extra_degrees);

enum class SigTest { kLinear, kLogistic };

// Out-of-sample significance for complex (extraModelDegrees > 0) variables:
// per fold, the encoder is fit on the train rows and applied to the app rows;
// the assembled full-length vector is then scored by the test above with the
// stated extra degrees. Rows no fold applies to (possible only with
// user-supplied plans) fall back to the all-rows encoding.
using OosEncoder = std::function<std::vector<double>(std::span<const std::size_t> train_rows,
                                                     std::span<const std::size_t> app_rows)>;

SigResult cross_validated_sig(const OosEncoder& fit_and_encode, std::span<const double> y,
                              const SplitPlan& plan, int extra_degrees, SigTest test);

// Internals shared with the logistic machinery; exposed for reuse.
struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ssr = 0.0;
    double sse = 0.0;
    bool degenerate = false;  // zero-variance x
};
OlsFit ols_fit(std::span<const double> x, std::span<const double> y);

}  // namespace treatkit
