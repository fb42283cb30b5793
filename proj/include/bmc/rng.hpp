#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// Streams are keyed by (master seed, stream id), so replicate r always
// sees the same numbers no matter which thread runs it.

namespace bmc {

class Philox4x32 {
  public:
    Philox4x32(std::uint64_t master_seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(master_seed),
               static_cast<std::uint32_t>(master_seed >> 32)},
          stream_{static_cast<std::uint32_t>(stream_id),
                  static_cast<std::uint32_t>(stream_id >> 32)} {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            block_ = generate(block_counter_++);
            pos_ = 0;
        }
        return block_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // uniform on (0,1); never returns 0 or 1
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

  private:
    static void mul_hi_lo(std::uint32_t a, std::uint32_t b,
                          std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    std::array<std::uint32_t, 4> generate(std::uint64_t block) const {
        std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(block),
            static_cast<std::uint32_t>(block >> 32), stream_[0], stream_[1]};
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mul_hi_lo(0xD2511F53u, ctr[0], hi0, lo0);
            mul_hi_lo(0xCD9E8D57u, ctr[2], hi1, lo1);
            ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return ctr;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::array<std::uint32_t, 4> block_ = {};
    std::uint64_t block_counter_ = 0;
    int pos_ = 4;
};

// Gaussian variates on top of a Philox stream (Marsaglia polar method).
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : gen_(master_seed, stream_id) {}

    double uniform() { return gen_.next_double(); }

    std::pair<double, double> gaussian_pair() {
        double u, v, s;
        do {
            u = 2.0 * gen_.next_double() - 1.0;
            v = 2.0 * gen_.next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        return {u * m, v * m};
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        auto [g0, g1] = gaussian_pair();
        spare_ = g1;
        have_spare_ = true;
        return g0;
    }

  private:
    Philox4x32 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace bmc
