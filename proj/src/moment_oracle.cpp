#include "bmc/moment_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace bmc {

Observable mean_generation_observable(const Observable& f, int n,
                                      const BarKernel& kernel) {
    if (n < 0) throw std::invalid_argument("negative generation");
    return scaled(kernel.q_pow(f, n), std::ldexp(1.0, n));
}

Observable second_moment_generation_observable(const Observable& f, int n,
                                               const BarKernel& kernel) {
    if (n < 0) throw std::invalid_argument("negative generation");
    Observable total = scaled(kernel.q_pow(multiply(f, f), n), std::ldexp(1.0, n));
    for (int k = 0; k < n; ++k) { // empty sum when n = 0
        const Observable qf = kernel.q_pow(f, k + 1);
        total = add(total, scaled(kernel.q_pow(multiply(qf, qf), n - k - 1),
                                  std::ldexp(1.0, n + k)));
    }
    return total;
}

Observable cross_moment_observable(const Observable& f, const Observable& g,
                                   int n, int m, const BarKernel& kernel) {
    if (m < 0 || n < m)
        throw std::invalid_argument("cross moment needs n >= m >= 0");
    Observable total = scaled(
        kernel.q_pow(multiply(g, kernel.q_pow(f, n - m)), m), std::ldexp(1.0, n));
    for (int k = 0; k < m; ++k) {
        const Observable qg = kernel.q_pow(g, k + 1);
        const Observable qf = kernel.q_pow(f, n - m + k + 1);
        total = add(total, scaled(kernel.q_pow(multiply(qg, qf), m - k - 1),
                                  std::ldexp(1.0, n + k)));
    }
    return total;
}

double mean_generation(const Observable& f, int n, double x,
                       const BarKernel& kernel) {
    return mean_generation_observable(f, n, kernel).evaluate(x);
}

double second_moment_generation(const Observable& f, int n, double x,
                                const BarKernel& kernel) {
    return second_moment_generation_observable(f, n, kernel).evaluate(x);
}

double cross_moment(const Observable& f, const Observable& g, int n, int m,
                    double x, const BarKernel& kernel) {
    return cross_moment_observable(f, g, n, m, kernel).evaluate(x);
}

double stationary_variance_generation(const Observable& f, int n,
                                      const BarKernel& kernel) {
    const Observable fc = center(f);
    // <mu, E_x[...]> is the constant coefficient; the mean term vanishes
    return second_moment_generation_observable(fc, n, kernel).coeff(0);
}

double stationary_variance_tree(const Observable& f, int n,
                                const BarKernel& kernel) {
    const Observable fc = center(f);
    double total = 0.0;
    for (int p = 0; p <= n; ++p) {
        total += second_moment_generation_observable(fc, p, kernel).coeff(0);
        for (int q = 0; q < p; ++q)
            total +=
                2.0 * cross_moment_observable(fc, fc, p, q, kernel).coeff(0);
    }
    return total;
}

} // namespace bmc
