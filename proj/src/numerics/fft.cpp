#include "subdiff/numerics/fft.hpp"

#include <cmath>
#include <mutex>
#include <unordered_map>

#include "subdiff/errors.hpp"

namespace subdiff::num {

namespace {

struct Twiddles {
    std::vector<std::complex<double>> fwd;  // e^{-2pi i k / n}, k < n/2
    std::vector<std::complex<double>> inv;
};

const Twiddles& twiddles_for(std::size_t n) {
    static std::unordered_map<std::size_t, Twiddles> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    Twiddles tw;
    tw.fwd.resize(n / 2);
    tw.inv.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        double ang = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
        tw.fwd[k] = {std::cos(ang), std::sin(ang)};
        tw.inv[k] = std::conj(tw.fwd[k]);
    }
    return cache.emplace(n, std::move(tw)).first->second;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft(std::complex<double>* a, std::size_t n, bool inverse) {
    if (n == 0) return;
    if ((n & (n - 1)) != 0)
        throw ContractError("fft: length must be a power of two");
    if (n == 1) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    const Twiddles& tw = twiddles_for(n);
    const auto& w = inverse ? tw.inv : tw.fwd;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w[k * stride];
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
    if (inverse) {
        double s = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) a[i] *= s;
    }
}

}  // namespace subdiff::num
