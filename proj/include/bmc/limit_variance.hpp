#pragma once

#include "bmc/kernel.hpp"

// Asymptotic variances of the normalized generation / tree averages.
// Series are evaluated with truncation points chosen from their geometric
// tail ratios, so every report carries a certified tail bound.

namespace bmc {

struct VarianceReport {
    double value = 0.0;
    int truncation_K = 0;   // largest index kept in any series direction
    double tail_bound = 0.0; // certified bound on everything dropped
    double sigma1 = 0.0;     // first / diagonal series block
    double sigma2 = 0.0;     // second / cross series block (before the x2)
};

// Generation statistic, single observable: <mu, fc^2> + sum_k 2^k <mu,(Q^{k+1}fc)^2>.
VarianceReport sigma_sub_G(const Observable& f, const BarKernel& kernel,
                           double tol = 1e-12);
// Tree statistic: adds twice the mixed-generation block.
VarianceReport sigma_sub_T(const Observable& f, const BarKernel& kernel,
                           double tol = 1e-12);
// Full sequence form.
VarianceReport sigma_sub_sequence(const ObservableSequence& seq,
                                  const BarKernel& kernel, double tol = 1e-12);

// Critical-regime counterparts (the eigenvalue set is the singleton {a}).
VarianceReport sigma_crit_G(const Observable& f, const BarKernel& kernel);
VarianceReport sigma_crit_T(const Observable& f, const BarKernel& kernel);
VarianceReport sigma_crit_sequence(const ObservableSequence& seq,
                                   const BarKernel& kernel, double tol = 1e-12);

} // namespace bmc
