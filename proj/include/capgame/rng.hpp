#pragma once

#include <cstdint>
#include <random>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace capgame {

/// Standard normal stream keyed by (seed, stream). Every arm of a comparison that uses the
/// same key sees the same draws; `negate` gives the antithetic partner.
class PathNormals {
public:
    PathNormals(std::uint64_t seed, std::uint64_t stream, bool negate = false) : sign_(negate ? -1.0 : 1.0) {
        std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                          std::uint32_t(stream >> 32), 0x9e3779b9u};
        engine_.seed(seq);
    }

    double operator()() { return sign_ * normal_(engine_); }

private:
    boost::random::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
    double sign_;
};

}  // namespace capgame
