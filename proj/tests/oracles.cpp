#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace oracle {

namespace {

double simpson(const std::function<double(double)>& f, double a, double m, double b, double fa,
               double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, lm, m, fa, flm, fm);
    const double right = simpson(f, m, rm, b, fm, frm, fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_step(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           adaptive_step(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a >= b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    return adaptive_step(f, a, b, fa, fm, fb, simpson(f, a, m, b, fa, fm, fb), tol, 48);
}

}  // namespace

double beta_cdf(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double norm = std::exp(log_norm);

    // lower piece over t in [0, min(x, 1/2)] with t = u^2 so the a-side
    // endpoint is smooth for a >= 1/2
    double total = 0.0;
    const double lower_end = std::min(x, 0.5);
    total += integrate(
        [&](double u) {
            return 2.0 * std::pow(u, 2.0 * a - 1.0) * std::pow(1.0 - u * u, b - 1.0);
        },
        0.0, std::sqrt(lower_end), 1e-14);
    if (x > 0.5) {
        // upper piece over t in [1/2, x] with 1 - t = v^2 for the b-side
        total += integrate(
            [&](double v) {
                return 2.0 * std::pow(1.0 - v * v, a - 1.0) * std::pow(v, 2.0 * b - 1.0);
            },
            std::sqrt(1.0 - x), std::sqrt(0.5), 1e-14);
    }
    return total * norm;
}

double chisq_sf(double df, double x) {
    if (x <= 0.0) return 1.0;
    const double s = 0.5 * df;
    const double z = 0.5 * x;
    const double log_norm = -std::lgamma(s);
    if (z < s + 1.0) {
        // lower integral with t = u^2 so s = 1/2 stays smooth
        const double p = integrate(
                             [&](double u) {
                                 return 2.0 * std::pow(u, 2.0 * s - 1.0) * std::exp(-u * u);
                             },
                             0.0, std::sqrt(z), 1e-14) *
                         std::exp(log_norm);
        return 1.0 - p;
    }
    // upper tail directly; cut off far past any mass
    const double cutoff = z + 60.0 + 10.0 * s;
    const double q = integrate(
                         [&](double t) { return std::exp((s - 1.0) * std::log(t) - t); },
                         z, cutoff, 1e-16) *
                     std::exp(log_norm);
    return q;
}

double f_sf(double df1, double df2, double f) {
    if (f <= 0.0) return 1.0;
    // P[F >= f] = I_{df2/(df2 + df1 f)}(df2/2, df1/2)
    return beta_cdf(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

OlsResult ols(const std::vector<double>& x, const std::vector<double>& y, int extra_degrees) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double nd = static_cast<double>(n);
    const double det = nd * sxx - sx * sx;
    OlsResult res;
    if (det == 0.0) return res;
    res.slope = (nd * sxy - sx * sy) / det;
    res.intercept = (sy - res.slope * sx) / nd;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - res.intercept - res.slope * x[i];
        sse += e * e;
    }
    const double tss = syy - sy * sy / nd;
    const double ssr = std::max(tss - sse, 0.0);
    const double df1 = 1.0 + extra_degrees;
    const double df2 = nd - 2.0 - extra_degrees;
    if (df2 <= 0.0 || ssr <= 0.0) return res;
    if (sse <= 0.0) {
        res.f_stat = std::numeric_limits<double>::infinity();
        res.p_value = 0.0;
        return res;
    }
    res.f_stat = (ssr / df1) / (sse / df2);
    res.p_value = f_sf(df1, df2, res.f_stat);
    return res;
}

namespace {

double loglik_multi(const std::vector<std::vector<double>>& cols, const std::vector<double>& y,
                    const std::vector<double>& beta) {
    double ll = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double eta = beta[0];
        for (std::size_t j = 0; j < cols.size(); ++j) eta += beta[j + 1] * cols[j][i];
        const double sp = eta > 30.0 ? eta : (eta < -30.0 ? 0.0 : std::log1p(std::exp(eta)));
        ll += y[i] * eta - sp;
    }
    return ll;
}

// Gauss-Jordan solve; A is (p x p) row-major, b length p. Returns false if singular.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t p) {
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::fabs(a[r * p + col]) > std::fabs(a[pivot * p + col])) pivot = r;
        }
        if (std::fabs(a[pivot * p + col]) < 1e-300) return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < p; ++c) std::swap(a[col * p + c], a[pivot * p + c]);
            std::swap(b[col], b[pivot]);
        }
        const double d = a[col * p + col];
        for (std::size_t c = 0; c < p; ++c) a[col * p + c] /= d;
        b[col] /= d;
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            const double factor = a[r * p + col];
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c < p; ++c) a[r * p + c] -= factor * a[col * p + c];
            b[r] -= factor * b[col];
        }
    }
    return true;
}

}  // namespace

std::vector<double> logistic_fit_multi(const std::vector<std::vector<double>>& columns,
                                       const std::vector<double>& y) {
    const std::size_t n = y.size();
    const std::size_t p = columns.size() + 1;
    std::vector<double> beta(p, 0.0);
    std::vector<double> xi(p);
    double ll = loglik_multi(columns, y, beta);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> grad(p, 0.0);
        std::vector<double> hess(p * p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double eta = beta[0];
            for (std::size_t j = 1; j < p; ++j) eta += beta[j] * columns[j - 1][i];
            const double pr = 1.0 / (1.0 + std::exp(-std::max(-30.0, std::min(30.0, eta))));
            const double w = pr * (1.0 - pr);
            const double r = y[i] - pr;
            xi[0] = 1.0;
            for (std::size_t j = 1; j < p; ++j) xi[j] = columns[j - 1][i];
            for (std::size_t j = 0; j < p; ++j) {
                grad[j] += r * xi[j];
                for (std::size_t k = 0; k < p; ++k) hess[j * p + k] += w * xi[j] * xi[k];
            }
        }
        for (std::size_t j = 0; j < p; ++j) hess[j * p + j] += 1e-10;
        std::vector<double> step = grad;
        if (!solve_dense(hess, step, p)) break;
        for (std::size_t j = 0; j < p; ++j) beta[j] += step[j];
        const double ll_new = loglik_multi(columns, y, beta);
        if (std::fabs(ll_new - ll) < 1e-9) break;
        ll = ll_new;
    }
    return beta;
}

double logistic_predict(const std::vector<double>& beta,
                        const std::vector<std::vector<double>>& columns, std::size_t row) {
    double eta = beta[0];
    for (std::size_t j = 0; j < columns.size(); ++j) eta += beta[j + 1] * columns[j][row];
    return 1.0 / (1.0 + std::exp(-eta));
}

LogisticResult logistic(const std::vector<double>& x, const std::vector<double>& y,
                        int extra_degrees) {
    const std::size_t n = x.size();
    double pos = 0.0;
    for (const double v : y) pos += v;
    const double p0 = pos / static_cast<double>(n);
    const double null_dev =
        -2.0 * (pos * std::log(p0) + (static_cast<double>(n) - pos) * std::log1p(-p0));
    const std::vector<double> beta = logistic_fit_multi({x}, y);
    const double resid_dev = -2.0 * loglik_multi({x}, y, beta);
    LogisticResult res;
    res.deviance_drop = std::max(null_dev - resid_dev, 0.0);
    res.p_value = chisq_sf(1.0 + extra_degrees, res.deviance_drop);
    return res;
}

SplitReport split_check(const treatkit::SplitPlan& plan, std::size_t nrows) {
    SplitReport report;
    std::vector<int> covered(nrows, 0);
    for (const auto& fold : plan.folds) {
        if (fold.train.empty() || fold.app.empty()) report.nonempty = false;
        std::vector<bool> in_train(nrows, false);
        for (const std::size_t r : fold.train) in_train[r] = true;
        for (const std::size_t r : fold.app) {
            if (in_train[r]) report.disjoint = false;
            ++covered[r];
        }
    }
    for (std::size_t r = 0; r < nrows; ++r) {
        if (covered[r] != 1) report.app_partitions_rows = false;
    }
    return report;
}

double gaussian(treatkit::Rng& rng) {
    // Box-Muller; draws strictly inside (0, 1)
    double u1 = rng.unit_double();
    while (u1 <= 0.0) u1 = rng.unit_double();
    const double u2 = rng.unit_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace oracle
