#include "bmc/limit_variance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmc {

namespace {

void require_regime(const BarKernel& k, Regime want, const char* who) {
    if (k.regime() != want)
        throw std::domain_error(std::string(who) + " needs the " +
                                regime_name(want) + " regime, kernel is " +
                                regime_name(k.regime()));
}

// smallest K >= 0 with coeff * ratio^K / (1 - ratio) < tol
int geometric_cutoff(double coeff, double ratio, double tol) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::domain_error("series tail ratio must lie in (0,1)");
    if (coeff <= 0.0) return 0;
    const double head = coeff / (1.0 - ratio);
    if (head < tol) return 0;
    const int K = static_cast<int>(std::ceil(std::log(tol / head) / std::log(ratio)));
    if (K > 5'000'000)
        throw std::domain_error("tolerance unreachable this close to the regime boundary");
    return std::max(K, 0);
}

double geometric_tail(double coeff, double ratio, int K) {
    return coeff * std::pow(ratio, K) / (1.0 - ratio);
}

// multiply the non-constant coefficients by the eigenvalue ladder a^m once
void step_q(std::vector<double>& c, double a) {
    double lambda = 1.0;
    for (std::size_t m = 1; m < c.size(); ++m) {
        lambda *= a;
        c[m] *= lambda;
    }
}

double quad_inner(const std::vector<double>& c1, const std::vector<double>& c2,
                  double scale) {
    Observable f1(scale, c1), f2(scale, c2);
    return mu_inner(f1, f2);
}

} // namespace

VarianceReport sigma_sub_G(const Observable& f, const BarKernel& kernel,
                           double tol) {
    require_regime(kernel, Regime::sub_critical, "sigma_sub_G");
    const Observable fc = center(f);
    const double norm2 = mu_inner(fc, fc);
    const double alpha = kernel.alpha();
    const double ratio = 2.0 * alpha * alpha;

    VarianceReport rep;
    const int K = geometric_cutoff(norm2 * alpha * alpha, ratio, tol);
    std::vector<double> qc = fc.coeffs();
    step_q(qc, kernel.a()); // Q^{1} fc
    double series = 0.0;
    for (int k = 0; k < K; ++k) {
        series += std::ldexp(quad_inner(qc, qc, fc.scale()), k);
        step_q(qc, kernel.a());
    }
    rep.value = norm2 + series;
    rep.sigma1 = rep.value;
    rep.truncation_K = K;
    rep.tail_bound = geometric_tail(norm2 * alpha * alpha, ratio, K);
    return rep;
}

VarianceReport sigma_sub_T(const Observable& f, const BarKernel& kernel,
                           double tol) {
    require_regime(kernel, Regime::sub_critical, "sigma_sub_T");
    const Observable fc = center(f);
    const double norm2 = mu_inner(fc, fc);
    const double a = kernel.a();
    const double alpha = kernel.alpha();
    const double r2 = 2.0 * alpha * alpha;

    VarianceReport g_part = sigma_sub_G(f, kernel, tol / 4.0);

    // sum_{k>=1} <mu, fc Q^k fc>
    const int K1 = geometric_cutoff(norm2 * alpha, alpha, tol / 4.0);
    double part1 = 0.0;
    {
        std::vector<double> qc = fc.coeffs();
        for (int k = 1; k <= K1; ++k) {
            step_q(qc, a);
            part1 += quad_inner(fc.coeffs(), qc, fc.scale());
        }
    }

    // sum_{k>=1, r>=0} 2^r <mu, Q^{r+1} fc Q^{r+k+1} fc>
    const double c2 = norm2 * alpha * alpha;
    const int Kr = geometric_cutoff(c2 * alpha / (1.0 - alpha), r2, tol / 4.0);
    const int K2 = geometric_cutoff(c2 * alpha / (1.0 - r2), alpha, tol / 4.0);
    double part2 = 0.0;
    {
        std::vector<double> base = fc.coeffs();
        step_q(base, a); // Q^{r+1} fc at r = 0
        for (int r = 0; r <= Kr; ++r) {
            std::vector<double> run = base;
            for (int k = 1; k <= K2; ++k) {
                step_q(run, a);
                part2 += std::ldexp(quad_inner(base, run, fc.scale()), r);
            }
            step_q(base, a);
        }
    }

    VarianceReport rep;
    rep.sigma1 = g_part.value;
    rep.sigma2 = part1 + part2;
    rep.value = g_part.value + 2.0 * rep.sigma2;
    rep.truncation_K = std::max({g_part.truncation_K, K1, K2, Kr});
    rep.tail_bound = g_part.tail_bound + geometric_tail(norm2 * alpha, alpha, K1) +
                     geometric_tail(c2 * alpha / (1.0 - alpha), r2, Kr + 1) +
                     geometric_tail(c2 * alpha / (1.0 - r2), alpha, K2);
    return rep;
}

VarianceReport sigma_sub_sequence(const ObservableSequence& seq,
                                  const BarKernel& kernel, double tol) {
    require_regime(kernel, Regime::sub_critical, "sigma_sub_sequence");
    const double a = kernel.a();
    const double alpha = kernel.alpha();
    const double r2 = 2.0 * alpha * alpha;
    const double scale = seq.scale();
    const bool const_tail = seq.tail() == ObservableSequence::Tail::constant_last;

    // centered entries over the support (the tail entry repeats the last one)
    std::vector<Observable> fc;
    double max_norm2 = 0.0;
    for (int l = 0; l < seq.support(); ++l) {
        fc.push_back(center(seq.entry(l)));
        max_norm2 = std::max(max_norm2, mu_inner(fc.back(), fc.back()));
    }
    auto entry = [&](int l) -> const Observable& {
        return l < seq.support() ? fc[l] : fc.back();
    };
    if (max_norm2 == 0.0) return {};

    const double piece = tol / 8.0;
    const double a2 = alpha * alpha;

    // generation-index cutoff (only the constant tail needs one)
    int L;
    if (const_tail) {
        const double inner_bound =
            max_norm2 * (1.0 + a2 / (1.0 - r2) + alpha / (1.0 - alpha) +
                         a2 * alpha / ((1.0 - alpha) * (1.0 - r2)));
        L = geometric_cutoff(inner_bound, 0.5, piece);
        L = std::max(L, seq.support());
    } else {
        L = seq.support();
    }
    const int Kk = geometric_cutoff(2.0 * max_norm2 * a2, r2, piece);
    const int Kr =
        geometric_cutoff(2.0 * max_norm2 * a2 * alpha / (1.0 - alpha), r2, piece);
    // one generation-gap cutoff serving both cross sums
    const int D = std::max(
        geometric_cutoff(2.0 * max_norm2 * alpha, alpha, piece),
        geometric_cutoff(2.0 * max_norm2 * a2 * alpha / (1.0 - r2), alpha, piece));

    double s1a = 0.0, s1b = 0.0, s2a = 0.0, s2b = 0.0;
    for (int l = 0; l < L; ++l) {
        const Observable& fl = entry(l);
        if (fl.is_zero()) continue;
        const double wl = std::ldexp(1.0, -l);
        s1a += wl * mu_inner(fl, fl);

        std::vector<double> q = fl.coeffs();
        step_q(q, a);
        for (int k = 0; k < Kk; ++k) {
            s1b += wl * std::ldexp(quad_inner(q, q, scale), k);
            step_q(q, a);
        }

        // cross terms pair entry l with entry k = l + d
        const int dmax = const_tail ? D : std::min(D, seq.support() - 1 - l);
        std::vector<double> ql = fl.coeffs(); // Q^d f_l
        for (int d = 1; d <= dmax; ++d) {
            step_q(ql, a);
            const Observable& fk = entry(l + d);
            if (fk.is_zero()) continue;
            s2a += wl * quad_inner(fk.coeffs(), ql, scale);

            std::vector<double> qk = fk.coeffs();
            step_q(qk, a); // Q^{r+1} f_k
            std::vector<double> qld = ql;
            step_q(qld, a); // Q^{d+r+1} f_l
            for (int r = 0; r <= Kr; ++r) {
                s2b += wl * std::ldexp(quad_inner(qk, qld, scale), r);
                step_q(qk, a);
                step_q(qld, a);
            }
        }
    }

    VarianceReport rep;
    rep.sigma1 = s1a + s1b;
    rep.sigma2 = s2a + s2b;
    rep.value = rep.sigma1 + 2.0 * rep.sigma2;
    rep.truncation_K = std::max({L, Kk, D, Kr});
    double tail = 0.0;
    if (const_tail) {
        const double inner_bound =
            max_norm2 * (1.0 + a2 / (1.0 - r2) + alpha / (1.0 - alpha) +
                         a2 * alpha / ((1.0 - alpha) * (1.0 - r2)));
        tail += geometric_tail(inner_bound, 0.5, L);
    }
    tail += geometric_tail(2.0 * max_norm2 * a2, r2, Kk);
    tail += geometric_tail(2.0 * max_norm2 * alpha, alpha, D);
    tail += geometric_tail(2.0 * max_norm2 * a2 * alpha / (1.0 - alpha), r2, Kr + 1);
    tail += geometric_tail(2.0 * max_norm2 * a2 * alpha / (1.0 - r2), alpha, D);
    rep.tail_bound = tail;
    return rep;
}

namespace {

// <mu, P(Rf (x)sym Rg)> for the product kernel: <mu, (Q Rf)(Q Rg)>
double crit_block(const Observable& f, const Observable& g,
                  const BarKernel& kernel) {
    std::vector<double> rf = project_R(f).coeffs();
    std::vector<double> rg = project_R(g).coeffs();
    step_q(rf, kernel.a());
    step_q(rg, kernel.a());
    return quad_inner(rf, rg, f.scale());
}

} // namespace

VarianceReport sigma_crit_G(const Observable& f, const BarKernel& kernel) {
    require_regime(kernel, Regime::critical, "sigma_crit_G");
    VarianceReport rep;
    rep.sigma1 = crit_block(f, f, kernel);
    rep.value = rep.sigma1;
    return rep;
}

VarianceReport sigma_crit_T(const Observable& f, const BarKernel& kernel) {
    require_regime(kernel, Regime::critical, "sigma_crit_T");
    const double s = crit_block(f, f, kernel);
    VarianceReport rep;
    rep.sigma1 = s;
    rep.sigma2 = s / (std::sqrt(2.0) * kernel.theta() - 1.0);
    rep.value = s + 2.0 * rep.sigma2;
    return rep;
}

VarianceReport sigma_crit_sequence(const ObservableSequence& seq,
                                   const BarKernel& kernel, double tol) {
    require_regime(kernel, Regime::critical, "sigma_crit_sequence");
    const double theta = kernel.theta();
    const bool const_tail = seq.tail() == ObservableSequence::Tail::constant_last;

    double block_max = 0.0;
    for (int l = 0; l < seq.support(); ++l)
        block_max =
            std::max(block_max, std::fabs(crit_block(seq.entry(l), seq.entry(l),
                                                     kernel)));
    if (block_max == 0.0) return {};

    const double piece = tol / 4.0;
    const double rd = 1.0 / std::sqrt(2.0);
    int L;
    if (const_tail) {
        const double inner_bound = block_max * (1.0 + rd / (1.0 - rd));
        L = std::max(geometric_cutoff(inner_bound, 0.5, piece), seq.support());
    } else {
        L = seq.support();
    }
    const int D = geometric_cutoff(2.0 * block_max * rd, rd, piece);

    double c1 = 0.0, c2 = 0.0;
    for (int l = 0; l < L; ++l) {
        const Observable& fl = seq.entry(l);
        if (fl.is_zero()) continue;
        c1 += std::ldexp(1.0, -l) * crit_block(fl, fl, kernel);

        const int dmax = const_tail ? D : std::min(D, seq.support() - 1 - l);
        for (int d = 1; d <= dmax; ++d) {
            const Observable& fk = seq.entry(l + d);
            if (fk.is_zero()) continue;
            const double w =
                std::ldexp(std::pow(rd, d), -l) * (theta < 0 && (d & 1) ? -1.0 : 1.0);
            c2 += w * crit_block(fk, fl, kernel);
        }
    }

    VarianceReport rep;
    rep.sigma1 = c1;
    rep.sigma2 = c2;
    rep.value = c1 + 2.0 * c2;
    rep.truncation_K = std::max(L, D);
    double tail = 0.0;
    if (const_tail)
        tail += geometric_tail(block_max * (1.0 + rd / (1.0 - rd)), 0.5, L);
    tail += geometric_tail(2.0 * block_max * rd, rd, D);
    rep.tail_bound = tail;
    return rep;
}

} // namespace bmc
