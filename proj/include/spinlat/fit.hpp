#pragma once

#include <string>
#include <vector>

namespace spinlat {

struct SeriesPoint {
    double t;
    double value;
    double stderr_;  // zero = exact point
};

// Exponential-decay fit p(t) = C exp(-t / tau) by weighted least squares on
// log p with delta-method weights. Trailing zero-valued points are dropped
// as right-censored (counted); an interior zero is an error.
struct DecayFit {
    double c_hat = 0.0;
    double tau_hat = 0.0;
    double se_c = 0.0;
    double se_tau = 0.0;
    double r_squared = 0.0;
    int points_used = 0;
    int censored_dropped = 0;
    bool infinite_tau = false;  // slope >= 0: no decay resolved

    double eval(double t) const;
    std::string to_json() const;
};

DecayFit fit_decay(const std::vector<SeriesPoint>& series);

// mean and standard error of a sample
std::pair<double, double> mean_stderr(const std::vector<double>& xs);

// standard error of an empirical proportion
double binomial_stderr(double p_hat, std::size_t n);

}  // namespace spinlat
