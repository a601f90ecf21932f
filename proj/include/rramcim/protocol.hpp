#pragma once

// Synthetic LPN-style authentication used to judge what a given output BER
// does to a protocol built on BMVM.
//
// A static public matrix A (challenge_rows x feature_bits, sparse rows) is
// deployed once. Enrollment stores the commitment c = A w of a random binary
// template w. A probe w' is accepted when HD(A w', c) <= threshold. Since
// A w' ^ A w = A (w' ^ w), a genuine probe (few flipped features) disagrees on
// few rows while an impostor (independent w') disagrees on roughly half.
// The hardware BER enters as independent flips of the probe-side output bits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rramcim/bitlinalg.hpp"
#include "rramcim/rng.hpp"

namespace rramcim {

struct ProtocolParams {
  std::size_t feature_bits = 36;
  std::size_t challenge_rows = 512;
  double row_density = 0.1;      // P(a_ij = 1)
  double intra_flip_rate = 0.03; // genuine probe feature noise
  double inter_flip_rate = 0.5;  // impostor vs enrolled template; 0.5 = independent
  double accept_fraction = 0.25; // threshold = floor(accept_fraction * rows)
  std::uint64_t genuine_trials = 100000;
  std::uint64_t impostor_trials = 100000;

  std::size_t threshold() const {
    return static_cast<std::size_t>(std::floor(accept_fraction * static_cast<double>(challenge_rows)));
  }

  void validate() const {
    if (feature_bits == 0 || challenge_rows == 0) throw std::invalid_argument("protocol: sizes must be > 0");
    for (double p : {row_density, intra_flip_rate, inter_flip_rate, accept_fraction}) {
      if (!(p >= 0 && p <= 1)) throw std::invalid_argument("protocol: rates must lie in [0, 1]");
    }
  }
};

struct ProtocolResult {
  double ber = 0.0;
  std::uint64_t genuine_trials = 0;
  std::uint64_t impostor_trials = 0;
  std::size_t threshold = 0;

  // Realized counts: without flips, and with one draw of injected flips.
  std::uint64_t false_rejects_base = 0;
  std::uint64_t false_rejects = 0;
  std::uint64_t false_accepts_base = 0;
  std::uint64_t false_accepts = 0;
  double frr_base = 0.0;
  double frr = 0.0;
  double far_base = 0.0;
  double far = 0.0;

  // Same trials, with the flips averaged out instead of drawn once: mean of
  // P(reject | m, ber) over each trial's flip-free mismatch count m.
  double frr_expected = 0.0;
  double far_expected = 0.0;

  // Relative FRR increase (frr_expected - frr_base) / frr_base, or the
  // absolute difference when frr_base is 0.
  double frr_delta = 0.0;
  double frr_delta_realized = 0.0;
};

/// Binomial(n, p) pmf; entries below ~1e-300 are left at 0.
inline std::vector<double> binomial_pmf(std::size_t n, double p) {
  std::vector<double> pmf(n + 1, 0.0);
  if (p <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p >= 1.0) {
    pmf[n] = 1.0;
    return pmf;
  }
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double ln = std::lgamma(static_cast<double>(n) + 1.0);
  for (std::size_t k = 0; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    const double rest = static_cast<double>(n - k);
    const double lpmf = ln - std::lgamma(kd + 1.0) - std::lgamma(rest + 1.0) + kd * lp + rest * lq;
    pmf[k] = lpmf < -690.0 ? 0.0 : std::exp(lpmf);
  }
  return pmf;
}

/// P(m + X - Y > threshold): X ~ Bin(rows - m, ber) flips create a mismatch,
/// Y ~ Bin(m, ber) flips cancel one.
inline double reject_probability(std::size_t m, std::size_t rows, std::size_t threshold, double ber) {
  if (m > rows) throw std::invalid_argument("reject_probability: m exceeds rows");
  const auto px = binomial_pmf(rows - m, ber);
  const auto py = binomial_pmf(m, ber);
  double p = 0.0;
  for (std::size_t x = 0; x < px.size(); ++x) {
    if (px[x] == 0.0) continue;
    for (std::size_t y = 0; y < py.size(); ++y) {
      if (py[y] == 0.0) continue;
      if (static_cast<long long>(m + x) - static_cast<long long>(y) > static_cast<long long>(threshold)) {
        p += px[x] * py[y];
      }
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

namespace detail {

struct ProtocolTally {
  std::vector<std::uint64_t> base_histogram; // trials by flip-free mismatch count
  std::uint64_t rejects = 0;                 // with injected flips
};

// Mismatch count between the enrolled commitment and the probe response,
// without and with injected output flips. Flips come from their own stream,
// one raw draw per output bit compared against ber * 2^64, so for a fixed
// seed the flip set at a lower BER is a subset of the set at a higher one.
inline std::pair<std::size_t, std::size_t> probe_mismatches(const BitMatrix& a, const BitVector& enrolled_commitment,
                                                            const BitVector& probe, double ber, Rng& flip_rng) {
  BitVector response = bmvm_exact(a, probe);
  const std::size_t base = (response ^ enrolled_commitment).popcount();
  if (ber > 0) {
    const double scaled = std::ldexp(ber, 64);
    const std::uint64_t cut =
        scaled >= 18446744073709551615.0 ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(scaled);
    for (std::size_t i = 0; i < response.size(); ++i) {
      if (flip_rng() < cut) response.flip(i);
    }
  }
  return {base, (response ^ enrolled_commitment).popcount()};
}

} // namespace detail

/// FAR/FRR with and without output bit flips at rate `ber`. Deterministic
/// in (params, seed) for any jobs value.
inline ProtocolResult protocol_impact(double ber, const ProtocolParams& params, std::uint64_t seed, unsigned jobs = 0) {
  params.validate();
  if (!(ber >= 0 && ber <= 1)) throw std::invalid_argument("protocol_impact: ber must lie in [0, 1]");

  Rng matrix_rng = make_stream(seed, StreamDomain::Protocol, 0);
  const BitMatrix a = BitMatrix::random(params.challenge_rows, params.feature_bits, matrix_rng, params.row_density);
  const std::size_t threshold = params.threshold();

  const std::size_t rows = params.challenge_rows;

  auto run = [&](std::uint64_t trials, bool genuine) {
    const std::uint64_t lane = genuine ? 1 : 2;
    const auto parts = run_blocks<detail::ProtocolTally>(
        trials, kDefaultBlockSize, jobs, [&](std::uint64_t block, std::uint64_t begin, std::uint64_t end) {
          Rng rng = make_stream(seed, StreamDomain::Protocol, (lane << 40) | (block + 1));
          Rng flip_rng = make_stream(seed, StreamDomain::Protocol, ((lane + 2) << 40) | (block + 1));
          std::bernoulli_distribution feature_flip(genuine ? params.intra_flip_rate : params.inter_flip_rate);
          detail::ProtocolTally tally;
          tally.base_histogram.assign(rows + 1, 0);
          for (std::uint64_t t = begin; t < end; ++t) {
            const BitVector templ = BitVector::random(params.feature_bits, rng);
            const BitVector commitment = bmvm_exact(a, templ);
            BitVector probe = templ;
            for (std::size_t j = 0; j < params.feature_bits; ++j) {
              if (feature_flip(rng)) probe.flip(j);
            }
            const auto [base, flipped] = detail::probe_mismatches(a, commitment, probe, ber, flip_rng);
            ++tally.base_histogram[base];
            tally.rejects += flipped > threshold;
          }
          return tally;
        });
    detail::ProtocolTally total;
    total.base_histogram.assign(rows + 1, 0);
    for (const auto& p : parts) {
      for (std::size_t m = 0; m <= rows; ++m) total.base_histogram[m] += p.base_histogram[m];
      total.rejects += p.rejects;
    }
    return total;
  };

  const auto genuine = run(params.genuine_trials, true);
  const auto impostor = run(params.impostor_trials, false);

  ProtocolResult r;
  r.ber = ber;
  r.genuine_trials = params.genuine_trials;
  r.impostor_trials = params.impostor_trials;
  r.threshold = threshold;

  double expected_rejects = 0.0;
  double expected_accepts = 0.0;
  for (std::size_t m = 0; m <= rows; ++m) {
    const auto g = genuine.base_histogram[m];
    const auto i = impostor.base_histogram[m];
    if (m > threshold) {
      r.false_rejects_base += g;
    } else {
      r.false_accepts_base += i;
    }
    if (g == 0 && i == 0) continue;
    const double pr = reject_probability(m, rows, threshold, ber);
    expected_rejects += static_cast<double>(g) * pr;
    expected_accepts += static_cast<double>(i) * (1.0 - pr);
  }
  r.false_rejects = genuine.rejects;
  r.false_accepts = params.impostor_trials - impostor.rejects;

  auto rate = [](double k, std::uint64_t n) { return n ? k / static_cast<double>(n) : 0.0; };
  r.frr_base = rate(static_cast<double>(r.false_rejects_base), r.genuine_trials);
  r.frr = rate(static_cast<double>(r.false_rejects), r.genuine_trials);
  r.far_base = rate(static_cast<double>(r.false_accepts_base), r.impostor_trials);
  r.far = rate(static_cast<double>(r.false_accepts), r.impostor_trials);
  r.frr_expected = rate(expected_rejects, r.genuine_trials);
  r.far_expected = rate(expected_accepts, r.impostor_trials);

  auto relative = [&](double value) {
    const double diff = value - r.frr_base;
    return r.frr_base > 0 ? diff / r.frr_base : diff;
  };
  r.frr_delta = relative(r.frr_expected);
  r.frr_delta_realized = relative(r.frr);
  return r;
}

} // namespace rramcim
