#pragma once

// Branch-free scalar kernels written so that loops over them vectorize
// (build with -fno-trapping-math so the selects are if-converted).

#include <bit>
#include <cstdint>

namespace sslsurv::detail {

//! exp(x) with x clamped to [-700, 700]; relative error below 3e-16.
inline double exp_clamped(double x)
{
    x = x < -700.0 ? -700.0 : x;
    x = x > 700.0 ? 700.0 : x;
    constexpr double log2e = 1.4426950408889634074;
    constexpr double ln2_hi = 6.93147180369123816490e-01;
    constexpr double ln2_lo = 1.90821492927058770002e-10;
    constexpr double shifter = 0x1.8p52; // adding it rounds to an integer
    const double kd = x * log2e + shifter;
    const double n = kd - shifter;
    const double r = (x - n * ln2_hi) - n * ln2_lo; // |r| <= ln2 / 2
    double q = 1.0 / 6227020800.0;
    q = q * r + 1.0 / 479001600.0;
    q = q * r + 1.0 / 39916800.0;
    q = q * r + 1.0 / 3628800.0;
    q = q * r + 1.0 / 362880.0;
    q = q * r + 1.0 / 40320.0;
    q = q * r + 1.0 / 5040.0;
    q = q * r + 1.0 / 720.0;
    q = q * r + 1.0 / 120.0;
    q = q * r + 1.0 / 24.0;
    q = q * r + 1.0 / 6.0;
    q = q * r + 0.5;
    q = q * r + 1.0;
    q = q * r + 1.0;
    const std::int64_t k =
        std::bit_cast<std::int64_t>(kd) - std::bit_cast<std::int64_t>(shifter);
    return q * std::bit_cast<double>((k + 1023) << 52);
}

// Chebyshev series in y = 2t - 1, t = 2 / (2 + z), of exp(z^2) erfc(z) (2 + z) / 2
// for z >= 0; truncation error below 1e-19.
inline constexpr double erfcx_cheb[] = {
    0.5770337386164697,      0.3554369212704985,     0.06509515882878653,
    0.003671142395836639,    -0.0011128447433526325, -0.0001607582991537808,
    3.278031574173137e-05,   5.442441645505016e-06,  -1.5154665553171482e-06,
    -1.4297608181169865e-07, 8.234608827419493e-08,  -1.2962846852306563e-09,
    -4.154721631015199e-09,  6.347058278362811e-10,  1.4320822712256225e-10,
    -6.160390105204585e-11,  2.0612138554721698e-12, 3.5714931488477042e-12,
    -8.586422843251796e-13,  -6.14560021379063e-14,  7.418725748596617e-14,
    -1.2895042755032325e-14, -2.358726385710632e-15, 1.5729349381685912e-15,
    -2.2782966239546465e-16, -6.31233045075643e-17,  3.5916763531814925e-17,
    -5.049809149847729e-18,  -1.5324541113154899e-18, 8.90334528899061e-19,
    -1.4031007385132944e-19,
};

inline constexpr double inv_sqrt_2pi = 0.3989422804014326779399460599343819;

//! Standard normal cdf and density at x; absolute error of the cdf ~1 ulp.
inline void probit_pair(double x, double& cdf, double& pdf)
{
    constexpr int terms = static_cast<int>(sizeof(erfcx_cheb) / sizeof(double));
    const double z = (x < 0.0 ? -x : x) * 0.70710678118654752440;
    const double t = 2.0 / (2.0 + z);
    const double y2 = 2.0 * (2.0 * t - 1.0);
    double b1 = 0.0;
    double b2 = 0.0;
#pragma GCC unroll 32
    for (int j = terms - 1; j >= 1; --j) {
        const double b0 = y2 * b1 - b2 + erfcx_cheb[j];
        b2 = b1;
        b1 = b0;
    }
    const double e = exp_clamped(-z * z);
    const double tail = 0.5 * t * (0.5 * y2 * b1 - b2 + erfcx_cheb[0]) * e;
    cdf = x < 0.0 ? tail : 1.0 - tail;
    pdf = inv_sqrt_2pi * e;
}

//! Logistic cdf and density at x.
inline void logistic_pair(double x, double& cdf, double& pdf)
{
    const double e = exp_clamped(x < 0.0 ? x : -x);
    const double inv = 1.0 / (1.0 + e);
    cdf = x < 0.0 ? e * inv : inv;
    pdf = e * inv * inv;
}

} // namespace sslsurv::detail
