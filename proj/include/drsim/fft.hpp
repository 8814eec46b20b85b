// Small self-contained complex FFT: iterative radix-2 for powers of two,
// Bluestein's chirp-z transform for every other length (forecasts are 48-dim
// by default, so composite lengths are the common case).
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace drsim::fft {

using cdouble = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

// In-place iterative Cooley-Tukey, n a power of two. inverse => conjugate
// twiddles; scaling is handled by the callers.
inline void radix2(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const cdouble wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cdouble u = a[i + k];
                cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Bluestein: express an arbitrary-length DFT as a convolution and run the
// convolution with radix-2 transforms of padded length >= 2n-1.
inline std::vector<cdouble> bluestein(const std::vector<cdouble>& input, bool inverse) {
    const std::size_t n = input.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cdouble> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // angle = pi * k^2 / n, k^2 reduced mod 2n to stay exact for large k
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = cdouble(std::cos(ang), std::sin(ang));
    }

    std::vector<cdouble> a(m, cdouble(0.0)), b(m, cdouble(0.0));
    for (std::size_t k = 0; k < n; ++k) a[k] = input[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

    radix2(a, false);
    radix2(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    radix2(a, true);

    std::vector<cdouble> out(n);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
    return out;
}

}  // namespace detail

// Forward DFT, X[k] = sum_t x[t] e^{-2pi i kt/n}. No normalisation.
inline std::vector<cdouble> forward(std::vector<cdouble> input) {
    if (input.empty()) throw std::invalid_argument("fft: empty input");
    if (is_power_of_two(input.size())) {
        detail::radix2(input, false);
        return input;
    }
    return detail::bluestein(input, false);
}

// Inverse DFT with 1/n normalisation, so inverse(forward(x)) == x.
inline std::vector<cdouble> inverse(std::vector<cdouble> input) {
    if (input.empty()) throw std::invalid_argument("fft: empty input");
    const double scale = 1.0 / static_cast<double>(input.size());
    std::vector<cdouble> out;
    if (is_power_of_two(input.size())) {
        detail::radix2(input, true);
        out = std::move(input);
    } else {
        out = detail::bluestein(input, true);
    }
    for (cdouble& c : out) c *= scale;
    return out;
}

inline std::vector<cdouble> forward_real(const std::vector<double>& input) {
    std::vector<cdouble> buf(input.begin(), input.end());
    return forward(std::move(buf));
}

}  // namespace drsim::fft
