#include "treatkit/significance.hpp"

#include <algorithm>
#include <cmath>

#include "treatkit/special_functions.hpp"

namespace treatkit {

namespace {

// log(1 + e^eta) without overflow
double softplus(double eta) {
    if (eta > 36.0) return eta;
    if (eta < -36.0) return 0.0;
    return std::log1p(std::exp(eta));
}

double bernoulli_loglik(std::span<const double> x, std::span<const double> y, double b0,
                        double b1) {
    double ll = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double eta = b0 + b1 * x[i];
        ll += y[i] * eta - softplus(eta);
    }
    return ll;
}

}  // namespace

OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
    OlsFit fit;
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0) {
        fit.degenerate = true;
        fit.intercept = my;
        fit.sse = syy;
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.ssr = sxy * sxy / sxx;
    fit.sse = std::max(syy - fit.ssr, 0.0);
    return fit;
}

SigResult f_test_sig(std::span<const double> x, std::span<const double> y, int extra_degrees) {
    if (x.size() != y.size()) throw Error("f_test_sig: length mismatch");
    SigResult res;
    res.extra_model_degrees = extra_degrees;
    const auto n = static_cast<long long>(x.size());
    const long long df1 = 1 + extra_degrees;
    const long long df2 = n - 2 - extra_degrees;
    if (df2 <= 0) return res;  // not enough rows to score against

    const OlsFit fit = ols_fit(x, y);
    if (fit.degenerate || fit.ssr <= 0.0) return res;
    if (fit.sse <= 0.0) {
        res.sig = 0.0;  // perfect fit
        return res;
    }
    const double f_stat = (fit.ssr / static_cast<double>(df1)) / (fit.sse / static_cast<double>(df2));
    // P[F_{df1,df2} >= f] via the incomplete beta
    const double xarg = static_cast<double>(df2) / (static_cast<double>(df2) + df1 * f_stat);
    res.sig = reg_incomplete_beta(df2 / 2.0, df1 / 2.0, xarg);
    return res;
}

SigResult chisq_test_sig(std::span<const double> x, std::span<const double> y_ind,
                         int extra_degrees) {
    if (x.size() != y_ind.size()) throw Error("chisq_test_sig: length mismatch");
    const std::size_t n = x.size();
    if (n == 0) throw Error("chisq_test_sig: empty input");

    double pos = 0.0;
    for (const double v : y_ind) {
        if (v != 0.0 && v != 1.0) throw Error("chisq_test_sig: outcome must be 0/1");
        pos += v;
    }
    const double p0 = pos / static_cast<double>(n);
    if (p0 == 0.0 || p0 == 1.0) throw Error("chisq_test_sig: outcome must take more than one value");

    SigResult res;
    res.extra_model_degrees = extra_degrees;
    const double xmin = *std::min_element(x.begin(), x.end());
    const double xmax = *std::max_element(x.begin(), x.end());
    if (xmin == xmax) return res;  // constant x carries no information

    const double null_dev =
        -2.0 * (pos * std::log(p0) + (static_cast<double>(n) - pos) * std::log1p(-p0));

    // Newton/IRLS on (intercept, slope)
    double b0 = std::log(p0 / (1.0 - p0));
    double b1 = 0.0;
    double ll = bernoulli_loglik(x, y_ind, b0, b1);
    res.converged = false;
    for (int iter = 0; iter < 50; ++iter) {
        double g0 = 0.0, g1 = 0.0;       // gradient
        double h00 = 0.0, h01 = 0.0, h11 = 0.0;  // negative Hessian
        for (std::size_t i = 0; i < n; ++i) {
            const double eta = b0 + b1 * x[i];
            const double p = 1.0 / (1.0 + std::exp(-std::clamp(eta, -36.0, 36.0)));
            const double w = p * (1.0 - p);
            const double r = y_ind[i] - p;
            g0 += r;
            g1 += r * x[i];
            h00 += w;
            h01 += w * x[i];
            h11 += w * x[i] * x[i];
        }
        h00 += 1e-12;
        h11 += 1e-12;
        const double det = h00 * h11 - h01 * h01;
        if (det <= 0.0 || !std::isfinite(det)) break;
        b0 += (h11 * g0 - h01 * g1) / det;
        b1 += (h00 * g1 - h01 * g0) / det;
        const double ll_new = bernoulli_loglik(x, y_ind, b0, b1);
        const bool done = std::fabs(ll_new - ll) < 1e-10;
        ll = ll_new;
        if (done) {
            res.converged = true;
            break;
        }
    }
    const double resid_dev = -2.0 * ll;
    const double stat = std::max(null_dev - resid_dev, 0.0);
    res.sig = reg_upper_gamma_q((1.0 + extra_degrees) / 2.0, stat / 2.0);
    return res;
}

SigResult cross_validated_sig(const OosEncoder& fit_and_encode, std::span<const double> y,
                              const SplitPlan& plan, int extra_degrees, SigTest test) {
    const std::size_t n = y.size();
    std::vector<double> oos(n, 0.0);
    std::vector<bool> covered(n, false);
    for (const auto& fold : plan.folds) {
        const std::vector<double> vals = fit_and_encode(fold.train, fold.app);
        for (std::size_t i = 0; i < fold.app.size(); ++i) {
            oos[fold.app[i]] = vals[i];
            covered[fold.app[i]] = true;
        }
    }
    if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
        std::vector<std::size_t> all(n), missing_rows;
        for (std::size_t r = 0; r < n; ++r) all[r] = r;
        for (std::size_t r = 0; r < n; ++r) {
            if (!covered[r]) missing_rows.push_back(r);
        }
        const std::vector<double> vals = fit_and_encode(all, missing_rows);
        for (std::size_t i = 0; i < missing_rows.size(); ++i) oos[missing_rows[i]] = vals[i];
    }
    return test == SigTest::kLinear ? f_test_sig(oos, y, extra_degrees)
                                    : chisq_test_sig(oos, y, extra_degrees);
}

}  // namespace treatkit
