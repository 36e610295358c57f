#pragma once

// Independent reference implementations used only by tests. These must not
// share code paths with the library: they exist to cross-check it.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

// erf via Taylor series (small |x|) or Lentz-style continued fraction for
// erfc (large |x|), evaluated in extended precision.
inline long double erf_series(long double x) {
    const long double two_over_sqrt_pi = 1.128379167095512573896158903121545172L;
    if (std::abs(x) <= 3.0L) {
        // erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1))
        long double term = x;
        long double sum = x;
        for (int n = 1; n < 120; ++n) {
            term *= -x * x / n;
            sum += term / (2 * n + 1);
        }
        return two_over_sqrt_pi * sum;
    }
    // erfc(|x|) = exp(-x^2)/sqrt(pi) * 1/(|x| + a1/(|x| + a2/(...))), a_n = n/2
    const long double ax = std::abs(x);
    long double tail = 0.0L;
    for (int n = 160; n >= 1; --n) {
        tail = (n / 2.0L) / (ax + tail);
    }
    const long double erfc_ax = std::exp(-ax * ax) / std::sqrt(3.14159265358979323846264338327950288L) /
                                (ax + tail);
    const long double erf_ax = 1.0L - erfc_ax;
    return x > 0 ? erf_ax : -erf_ax;
}

inline double std_normal_cdf(double x) {
    const long double v = 0.5L * (1.0L + erf_series(static_cast<long double>(x) /
                                                    1.41421356237309504880168872420969808L));
    return static_cast<double>(v);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// Explicit sort-based fractional ranking, distinct from the library's.
inline std::vector<double> ranks_bruteforce(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        size_t less = 0, equal = 0;
        for (size_t j = 0; j < v.size(); ++j) {
            if (v[j] < v[i]) ++less;
            if (v[j] == v[i]) ++equal;
        }
        // average of ranks less+1 .. less+equal
        r[i] = less + 0.5 * (equal + 1);
    }
    return r;
}

inline double spearman_bruteforce(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(ranks_bruteforce(x), ranks_bruteforce(y));
}

// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_error(double a, double b) {
    const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
    return std::abs(a - b) / denom;
}

// Independent PMOD construction: truncated-Gaussian interval masses via the
// erf oracle, then a bisection solve of the tilt multiplier (the library uses
// a closed form).
inline std::array<double, 5> pmod_bisect(double mu, double sigma, double target) {
    const std::array<double, 6> edges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const std::array<double, 5> mid{0.1, 0.3, 0.5, 0.7, 0.9};
    auto cdf = [&](double v) { return std_normal_cdf((v - mu) / sigma); };
    const double total = cdf(1.0) - cdf(0.0);
    std::array<double, 5> p{};
    for (int i = 0; i < 5; ++i) p[i] = (cdf(edges[i + 1]) - cdf(edges[i])) / total;

    std::array<bool, 5> support{};
    for (int i = 0; i < 5; ++i) support[i] = p[i] > 0.0;

    auto mean_at = [&](double lam) {
        double s = 0.0, sm = 0.0;
        for (int i = 0; i < 5; ++i) {
            if (!support[i]) continue;
            const double q = p[i] * std::max(1.0 + lam * (mid[i] - target), 0.0);
            s += q;
            sm += q * mid[i];
        }
        return s > 0.0 ? sm / s : std::nan("");
    };

    for (int round = 0; round < 5; ++round) {
        double mn = 1.0, mx = 0.0;
        for (int i = 0; i < 5; ++i) {
            if (support[i]) {
                mn = std::min(mn, mid[i]);
                mx = std::max(mx, mid[i]);
            }
        }
        if (target < mn - 1e-15 || target > mx + 1e-15) break;  // fall through to bracket

        const double base = mean_at(0.0);
        double lam = 0.0;
        if (std::abs(base - target) > 1e-15) {
            double lo = 0.0, hi = base < target ? 1.0 : -1.0;
            while (std::abs(hi) < 1e14) {
                const double m = mean_at(hi);
                if (std::isnan(m)) break;
                if ((m - target) * (base - target) <= 0.0) break;
                hi *= 2.0;
            }
            for (int it = 0; it < 300; ++it) {
                const double m2 = 0.5 * (lo + hi);
                const double v = mean_at(m2);
                if (std::isnan(v) || (v - target) * (base - target) > 0.0) {
                    lo = m2;
                } else {
                    hi = m2;
                }
            }
            lam = 0.5 * (lo + hi);
        }
        bool any_negative = false;
        for (int i = 0; i < 5; ++i) {
            if (support[i] && 1.0 + lam * (mid[i] - target) < -1e-12) any_negative = true;
        }
        if (!any_negative) {
            std::array<double, 5> q{};
            double s = 0.0;
            for (int i = 0; i < 5; ++i) {
                q[i] = support[i] ? p[i] * std::max(1.0 + lam * (mid[i] - target), 0.0) : 0.0;
                s += q[i];
            }
            if (s > 0.0) {
                double mean = 0.0;
                for (auto& v : q) v /= s;
                for (int i = 0; i < 5; ++i) mean += q[i] * mid[i];
                if (std::abs(mean - target) < 1e-9) return q;
            }
        }
        bool shrunk = false;
        for (int i = 0; i < 5; ++i) {
            if (support[i] && 1.0 + lam * (mid[i] - target) < 1e-12) {
                support[i] = false;
                shrunk = true;
            }
        }
        if (!shrunk) break;
    }

    // two-midpoint bracket with the exact target mean
    std::array<double, 5> q{};
    if (target <= mid[0]) {
        q[0] = 1.0;
    } else if (target >= mid[4]) {
        q[4] = 1.0;
    } else {
        int k = 0;
        while (k < 3 && mid[k + 1] < target) ++k;
        q[k] = (mid[k + 1] - target) / 0.2;
        q[k + 1] = 1.0 - q[k];
    }
    return q;
}

}  // namespace oracle
