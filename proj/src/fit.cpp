#include "spinlat/fit.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "spinlat/errors.hpp"

namespace spinlat {

double DecayFit::eval(double t) const { return infinite_tau ? c_hat : c_hat * std::exp(-t / tau_hat); }

std::string DecayFit::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"C\":" << c_hat << ",\"tau\":";
    if (infinite_tau)
        os << "null";
    else
        os << tau_hat;
    os << ",\"se_C\":" << se_c << ",\"se_tau\":" << se_tau << ",\"r_squared\":" << r_squared
       << ",\"points_used\":" << points_used << ",\"censored_dropped\":" << censored_dropped
       << ",\"infinite_tau\":" << (infinite_tau ? "true" : "false") << "}";
    return os.str();
}

DecayFit fit_decay(const std::vector<SeriesPoint>& series) {
    std::vector<SeriesPoint> pts = series;
    DecayFit fit;
    // right-censored tail: zero estimates at the largest times
    while (!pts.empty() && pts.back().value == 0.0) {
        pts.pop_back();
        ++fit.censored_dropped;
    }
    for (const auto& p : pts)
        if (p.value <= 0.0) throw contract_error("fit_decay: interior nonpositive point in the fit range");
    if (pts.size() < 3) throw contract_error("fit_decay: need at least 3 positive points");

    bool all_exact = true;
    for (const auto& p : pts)
        if (p.stderr_ > 0.0) all_exact = false;

    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (const auto& p : pts) {
        const double y = std::log(p.value);
        // var(log p) ~= (se / p)^2
        double var = all_exact ? 1.0 : (p.stderr_ / p.value) * (p.stderr_ / p.value);
        if (!all_exact && var < 1e-24) var = 1e-24;
        const double w = 1.0 / var;
        sw += w;
        swx += w * p.t;
        swy += w * y;
        swxx += w * p.t * p.t;
        swxy += w * p.t * y;
    }
    const double det = sw * swxx - swx * swx;
    if (det <= 0.0) throw contract_error("fit_decay: degenerate design (need distinct times)");
    const double slope = (sw * swxy - swx * swy) / det;
    const double intercept = (swy - slope * swx) / sw;

    double ss_res = 0, ss_tot = 0;
    const double ybar = swy / sw;
    for (const auto& p : pts) {
        const double y = std::log(p.value);
        double var = all_exact ? 1.0 : std::max((p.stderr_ / p.value) * (p.stderr_ / p.value), 1e-24);
        const double w = 1.0 / var;
        ss_res += w * (y - (intercept + slope * p.t)) * (y - (intercept + slope * p.t));
        ss_tot += w * (y - ybar) * (y - ybar);
    }

    double var_slope = sw / det;
    double var_intercept = swxx / det;
    if (all_exact) {
        // relative weights: scale by residual variance
        const double s2 = ss_res / double(pts.size() - 2);
        var_slope *= s2;
        var_intercept *= s2;
    }

    fit.points_used = int(pts.size());
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.c_hat = std::exp(intercept);
    fit.se_c = fit.c_hat * std::sqrt(var_intercept);
    if (slope >= -1e-300) {
        fit.infinite_tau = true;
        fit.tau_hat = std::numeric_limits<double>::infinity();
        fit.se_tau = std::numeric_limits<double>::infinity();
    } else {
        fit.tau_hat = -1.0 / slope;
        fit.se_tau = std::sqrt(var_slope) / (slope * slope);
    }
    return fit;
}

std::pair<double, double> mean_stderr(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : xs) m += x;
    m /= double(xs.size());
    if (xs.size() == 1) return {m, 0.0};
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= double(xs.size() - 1);
    return {m, std::sqrt(v / double(xs.size()))};
}

double binomial_stderr(double p_hat, std::size_t n) {
    return n ? std::sqrt(p_hat * (1.0 - p_hat) / double(n)) : 0.0;
}

}  // namespace spinlat
