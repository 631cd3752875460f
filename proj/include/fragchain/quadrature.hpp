#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace fragchain {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0; //!< estimated absolute error
};

//! Adaptive Gauss-Kronrod integration of f over [lo, hi]. Known kinks of the
//! integrand can be passed as breakpoints; the interval is split there so the
//! panels only ever see smooth pieces.
QuadResult integrate(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-11, std::span<const double> breakpoints = {});

//! Extended-precision variant used where near-exact cancellation is required
//! (kernel moment systems).
long double integrate_ld(const std::function<long double(long double)>& f,
                         long double lo, long double hi);

//! Compensated (Neumaier) summation; keeps conservation checks below 1e-12
//! even for long fragment lists.
class NeumaierSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace fragchain
