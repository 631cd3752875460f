#include "fragchain/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fragchain {

QuadResult integrate(const std::function<double(double)>& f, double lo, double hi,
                     double tol, std::span<const double> breakpoints) {
    if (!(hi > lo)) return {0.0, 0.0};

    std::vector<double> knots;
    knots.push_back(lo);
    for (double b : breakpoints)
        if (b > lo && b < hi) knots.push_back(b);
    knots.push_back(hi);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    QuadResult out;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        double err = 0.0;
        out.value += gk::integrate(f, knots[i], knots[i + 1], 15, tol, &err);
        out.abs_error += err;
    }
    return out;
}

long double integrate_ld(const std::function<long double(long double)>& f,
                         long double lo, long double hi) {
    using gk = boost::math::quadrature::gauss_kronrod<long double, 61>;
    long double err = 0;
    return gk::integrate(f, lo, hi, 10, 3e-18L, &err);
}

} // namespace fragchain
