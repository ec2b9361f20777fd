#pragma once

#include "arrayhd/densities.hpp"
#include "arrayhd/rng.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace arrayhd {

/// Product-Gaussian proposal N(0, sigma1^2) x N(0, sigma2^2) with envelope
/// constant bounding density/proposal from above.
struct ProposalConfig {
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double envelope = 1.0;
    double verification_range = 8.0;  // envelope checked on a grid this wide
};

/// Envelope-tight proposals for the two analytic density families.
ProposalConfig perelomov_proposal(const PerelomovDensityParams& p);
ProposalConfig truncated_proposal(const TruncatedDensityParams& p);

struct SampleBatch {
    std::uint64_t seed = 0;
    std::size_t count = 0;
    std::vector<std::pair<double, double>> samples;
    double acceptance_rate = 1.0;
};

/// Draws `count` samples of `density` by rejection from the Gaussian
/// proposal. Deterministic for a fixed seed and independent of the worker
/// count: work is split into fixed chunks with substream seeds derived from
/// the master seed, merged in chunk order. Verifies the envelope bound on a
/// grid before sampling and throws on violation.
SampleBatch rejection_sample(const Density2D& density, const ProposalConfig& proposal,
                             std::uint64_t seed, std::size_t count, int threads = 0);

void write_samples_csv(const std::string& path, const SampleBatch& batch);

}  // namespace arrayhd
