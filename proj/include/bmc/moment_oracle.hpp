#pragma once

#include "bmc/kernel.hpp"

// Exact many-to-one moments for generation sums M_{G_n}(f) of a BAR chain:
//   E_x[M_{G_n}(f)]            = 2^n Q^n f(x)
//   E_x[M_{G_n}(f)^2]          = 2^n Q^n(f^2)(x)
//                                + sum_{k<n} 2^{n+k} Q^{n-k-1}((Q^{k+1} f)^2)(x)
//   E_x[M_{G_n}(f) M_{G_m}(g)] = 2^n Q^m(g Q^{n-m} f)(x)
//                                + sum_{k<m} 2^{n+k} Q^{m-k-1}(Q^{k+1}g Q^{n-m+k+1}f)(x)
// (n >= m; the joint kernel of the BAR factorizes, so P(g (x) h) = Qg Qh).
// Everything is closed-form in the Hermite algebra; the *_observable forms
// return the full dependence on the initial state.

namespace bmc {

Observable mean_generation_observable(const Observable& f, int n,
                                      const BarKernel& kernel);
Observable second_moment_generation_observable(const Observable& f, int n,
                                               const BarKernel& kernel);
Observable cross_moment_observable(const Observable& f, const Observable& g,
                                   int n, int m, const BarKernel& kernel);

double mean_generation(const Observable& f, int n, double x,
                       const BarKernel& kernel);
double second_moment_generation(const Observable& f, int n, double x,
                                const BarKernel& kernel);
double cross_moment(const Observable& f, const Observable& g, int n, int m,
                    double x, const BarKernel& kernel);

// Exact variances of generation / tree sums of the centered observable when
// the root is drawn from the invariant law.
double stationary_variance_generation(const Observable& f, int n,
                                      const BarKernel& kernel);
double stationary_variance_tree(const Observable& f, int n,
                                const BarKernel& kernel);

} // namespace bmc
