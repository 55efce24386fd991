#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "actk/group.hpp"

namespace actk {

using cplx = std::complex<double>;

namespace detail {

inline std::vector<std::size_t> prime_factors(std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t p = 2; p * p <= n; ++p)
        while (n % p == 0) {
            out.push_back(p);
            n /= p;
        }
    if (n > 1) out.push_back(n);
    return out;
}

/** @brief one-dimensional DFT plan: mixed radix for smooth lengths, Bluestein otherwise */
class Dft1d {
public:
    static constexpr std::size_t kMaxRadix = 64;

    explicit Dft1d(std::size_t n) : n_(n), tw_(n) {
        for (std::size_t k = 0; k < n; ++k) tw_[k] = root(k, n, -1);
        if (n <= 1) return;
        auto fs = prime_factors(n);
        // radix-4 passes where possible keep the recursion shallow
        std::vector<std::size_t> merged;
        std::size_t twos = 0;
        for (auto p : fs)
            if (p == 2) ++twos;
        for (; twos >= 2; twos -= 2) merged.push_back(4);
        if (twos) merged.push_back(2);
        for (auto p : fs)
            if (p != 2) merged.push_back(p);
        factors_ = merged;
        if (fs.back() > kMaxRadix) {
            bluestein_ = true;
            std::size_t m = 1;
            while (m < 2 * n - 1) m <<= 1;
            m_ = m;
            chirp_.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t e = (static_cast<unsigned __int128>(k) * k) % (2 * n);
                chirp_[k] = root(e, 2 * n, -1);
            }
            inner_ = std::make_unique<Dft1d>(m);
            std::vector<cplx> b(m, cplx{});
            for (std::size_t k = 0; k < n; ++k) {
                b[k] = std::conj(chirp_[k]);
                if (k) b[m - k] = std::conj(chirp_[k]);
            }
            inner_->run(b.data(), -1);
            bhat_ = std::move(b);
        }
    }

    std::size_t size() const { return n_; }

    /// in-place transform of a contiguous line; sign -1 forward, +1 backward; unnormalized
    void run(cplx* data, int sign) const {
        if (n_ <= 1) return;
        if (bluestein_) {
            run_bluestein(data, sign);
            return;
        }
        std::vector<cplx> in(data, data + n_);
        std::vector<cplx> scratch(kMaxRadix);
        work(data, in.data(), 1, 0, sign, scratch);
    }

private:
    static cplx root(std::size_t k, std::size_t n, int sign) {
        const long double t = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k) /
                              static_cast<long double>(n);
        return {static_cast<double>(std::cos(t)), static_cast<double>(sign * std::sin(t))};
    }

    cplx twiddle(std::size_t idx, int sign) const {
        const cplx w = tw_[idx % n_];
        return sign < 0 ? w : std::conj(w);
    }

    // decimation in time; out receives the transform of in[0], in[fstride], ...
    void work(cplx* out, const cplx* in, std::size_t fstride, std::size_t level, int sign,
              std::vector<cplx>& scratch) const {
        const std::size_t p = factors_[level];
        const std::size_t m = n_ / (fstride * p);
        if (m == 1) {
            for (std::size_t q = 0; q < p; ++q) out[q] = in[q * fstride];
        } else {
            for (std::size_t q = 0; q < p; ++q) work(out + q * m, in + q * fstride, fstride * p, level + 1, sign, scratch);
        }
        for (std::size_t u = 0; u < m; ++u) {
            for (std::size_t q = 0; q < p; ++q) scratch[q] = out[u + q * m];
            for (std::size_t q1 = 0; q1 < p; ++q1) {
                const std::size_t k = u + q1 * m;
                cplx acc = scratch[0];
                for (std::size_t q = 1; q < p; ++q) acc += scratch[q] * twiddle(q * k * fstride, sign);
                out[k] = acc;
            }
        }
    }

    void run_bluestein(cplx* data, int sign) const {
        std::vector<cplx> a(m_, cplx{});
        for (std::size_t k = 0; k < n_; ++k) {
            const cplx c = sign < 0 ? chirp_[k] : std::conj(chirp_[k]);
            a[k] = data[k] * c;
        }
        inner_->run(a.data(), -1);
        if (sign < 0) {
            for (std::size_t k = 0; k < m_; ++k) a[k] *= bhat_[k];
        } else {
            // transform of conj(b) is conj of transform of b at the negated index
            for (std::size_t k = 0; k < m_; ++k) a[k] *= std::conj(bhat_[(m_ - k) % m_]);
        }
        inner_->run(a.data(), +1);
        const double inv = 1.0 / static_cast<double>(m_);
        for (std::size_t k = 0; k < n_; ++k) {
            const cplx c = sign < 0 ? chirp_[k] : std::conj(chirp_[k]);
            data[k] = a[k] * inv * c;
        }
    }

    std::size_t n_;
    std::vector<cplx> tw_;
    std::vector<std::size_t> factors_;
    bool bluestein_ = false;
    std::size_t m_ = 0;
    std::vector<cplx> chirp_;
    std::vector<cplx> bhat_;
    std::unique_ptr<Dft1d> inner_;
};

inline const Dft1d& plan(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<Dft1d>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Dft1d>(n);
    return *slot;
}

}  // namespace detail

/// unnormalized multidimensional transform over the group, sum_x f(x) exp(sign 2 pi i <gamma,x>)
inline void fft_nd(const Group& g, std::vector<cplx>& data, int sign) {
    const std::size_t n = g.size();
    if (data.size() != n) throw SchemaError("fft input length does not match group order");
    std::vector<cplx> line;
    for (std::size_t j = 0; j < g.rank(); ++j) {
        const std::size_t len = g.factors()[j];
        const std::size_t stride = g.strides()[j];
        const auto& p = detail::plan(len);
        line.resize(len);
        const std::size_t block = len * stride;
        for (std::size_t outer = 0; outer < n; outer += block)
            for (std::size_t inner = 0; inner < stride; ++inner) {
                const std::size_t base = outer + inner;
                for (std::size_t k = 0; k < len; ++k) line[k] = data[base + k * stride];
                p.run(line.data(), sign);
                for (std::size_t k = 0; k < len; ++k) data[base + k * stride] = line[k];
            }
    }
}

/// O(N^2) reference transform with exact phase indexing
inline std::vector<cplx> naive_dft(const Group& g, const std::vector<cplx>& data, int sign) {
    const std::size_t n = g.size();
    const std::uint64_t e = g.exponent();
    std::vector<cplx> roots(e);
    for (std::uint64_t k = 0; k < e; ++k) roots[k] = Group::unit_root(k, e);
    std::vector<cplx> out(n);
    for (elem_t gam = 0; gam < n; ++gam) {
        cplx acc{};
        for (elem_t x = 0; x < n; ++x) {
            const std::uint64_t ph = g.phase(gam, x);
            const cplx w = sign > 0 ? roots[ph] : roots[(e - ph) % e];
            acc += data[x] * w;
        }
        out[gam] = acc;
    }
    return out;
}

}  // namespace actk
