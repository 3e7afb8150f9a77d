#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace mmfield {

/// One splitmix64 step; used to derive independent child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Child seed for stream `stream` of `base`. Schedule independent: the
/// child depends only on (base, stream).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Seeded generator with portable draws (no implementation-defined
/// std distributions, so output is identical across standard libraries).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n) {
        if (n == 0) throw std::invalid_argument("below(0)");
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do v = eng_();
        while (v >= limit);
        return static_cast<std::size_t>(v % bound);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 eng_;
};

/// Inverse-CDF sampler over a finite probability vector.
class Categorical {
public:
    explicit Categorical(const std::vector<double>& weights) {
        double acc = 0.0;
        cdf_.reserve(weights.size());
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("negative weight");
            acc += w;
            cdf_.push_back(acc);
        }
        if (!(acc > 0.0)) throw std::invalid_argument("empty support");
        std::size_t last = 0;
        for (std::size_t k = 0; k < weights.size(); ++k)
            if (weights[k] > 0.0) last = k;
        for (std::size_t k = 0; k < cdf_.size(); ++k) cdf_[k] = k >= last ? 1.0 : cdf_[k] / acc;
    }

    std::size_t operator()(Rng& rng) const {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
        return k < cdf_.size() ? k : cdf_.size() - 1;
    }

private:
    std::vector<double> cdf_;
};

}  // namespace mmfield
