#include "arrayhd/sampling.hpp"

#include "arrayhd/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace arrayhd {

namespace {

constexpr std::size_t kChunkSize = 16384;  // accepted samples per substream

struct GaussianPair {
    double z0, z1;
};

GaussianPair box_muller(SplitMix64& rng) {
    const double u1 = rng.next_unit_positive();
    const double u2 = rng.next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

void verify_envelope(const Density2D& density, const ProposalConfig& prop) {
    const int n = 161;
    const double range = prop.verification_range;
    const double h = 2.0 * range / (n - 1);
    const double q_norm = 1.0 / (2.0 * M_PI * prop.sigma1 * prop.sigma2);
    for (int i = 0; i < n; ++i) {
        const double x1 = -range + i * h;
        for (int k = 0; k < n; ++k) {
            const double x2 = -range + k * h;
            const double z1 = x1 / prop.sigma1;
            const double z2 = x2 / prop.sigma2;
            const double q = q_norm * std::exp(-0.5 * (z1 * z1 + z2 * z2));
            const double bound = prop.envelope * q;
            const double p = density(x1, x2);
            if (p > bound * (1.0 + 1e-9) + 1e-300) {
                throw std::runtime_error(
                    "rejection_sample: envelope violated at (" + std::to_string(x1) + ", " +
                    std::to_string(x2) + "): density " + std::to_string(p) + " > bound " +
                    std::to_string(bound));
            }
        }
    }
}

}  // namespace

ProposalConfig perelomov_proposal(const PerelomovDensityParams& p) {
    const double sigma2 = std::max(p.var_sum, p.var_diff);
    ProposalConfig prop;
    prop.sigma1 = std::sqrt(sigma2);
    prop.sigma2 = prop.sigma1;
    // Ratio is maximized at the origin: 2 sigma^2 / sqrt(A B).
    prop.envelope = 2.0 * sigma2 / std::sqrt(p.var_sum * p.var_diff);
    prop.verification_range = 5.0 * prop.sigma1;
    return prop;
}

ProposalConfig truncated_proposal(const TruncatedDensityParams& p) {
    ProposalConfig prop;
    prop.sigma1 = 1.0;
    prop.sigma2 = 1.0;
    // p/q = 2 e^{-s/2} * bracket with s = x1^2 + x2^2, and the bracket is at
    // most (c1 + c2 s)^2 since 2|x1 x2| <= s; maximize over s >= 0.
    auto bound_at = [&](double s) {
        const double g = p.c1 + p.c2 * s;
        return 2.0 * std::exp(-0.5 * s) * g * g;
    };
    double envelope = bound_at(0.0);
    if (p.c2 > 0.0) {
        const double s_star = 4.0 - p.c1 / p.c2;
        if (s_star > 0.0) {
            envelope = std::max(envelope, bound_at(s_star));
        }
    }
    prop.envelope = envelope;
    prop.verification_range = 8.0;
    return prop;
}

SampleBatch rejection_sample(const Density2D& density, const ProposalConfig& proposal,
                             std::uint64_t seed, std::size_t count, int threads) {
    if (count == 0) {
        throw std::invalid_argument("rejection_sample: count must be > 0");
    }
    if (!(proposal.sigma1 > 0.0) || !(proposal.sigma2 > 0.0) || !(proposal.envelope > 0.0)) {
        throw std::invalid_argument("rejection_sample: invalid proposal configuration");
    }
    verify_envelope(density, proposal);

    const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
    SampleBatch batch;
    batch.seed = seed;
    batch.count = count;
    batch.samples.resize(count);
    std::atomic<std::uint64_t> total_proposals{0};
    std::atomic<std::size_t> cursor{0};

    const double q_norm = 1.0 / (2.0 * M_PI * proposal.sigma1 * proposal.sigma2);
    auto worker = [&]() {
        for (;;) {
            const std::size_t chunk = cursor.fetch_add(1);
            if (chunk >= chunks) {
                return;
            }
            const std::size_t begin = chunk * kChunkSize;
            const std::size_t quota = std::min(kChunkSize, count - begin);
            SplitMix64 rng(derive_seed(seed, chunk));
            std::uint64_t proposals = 0;
            std::size_t accepted = 0;
            while (accepted < quota) {
                const GaussianPair z = box_muller(rng);
                const double u = rng.next_unit();
                ++proposals;
                const double x1 = proposal.sigma1 * z.z0;
                const double x2 = proposal.sigma2 * z.z1;
                const double q = q_norm * std::exp(-0.5 * (z.z0 * z.z0 + z.z1 * z.z1));
                if (u * proposal.envelope * q <= density(x1, x2)) {
                    batch.samples[begin + accepted] = {x1, x2};
                    ++accepted;
                }
            }
            total_proposals.fetch_add(proposals);
        }
    };

    const int workers = resolve_threads(threads);
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }

    batch.acceptance_rate =
        static_cast<double>(count) / static_cast<double>(total_proposals.load());
    return batch;
}

void write_samples_csv(const std::string& path, const SampleBatch& batch) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_samples_csv: cannot open " + path);
    }
    out << "x1,x2\n";
    char buf[80];
    for (const auto& [x1, x2] : batch.samples) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", x1, x2);
        out << buf;
    }
}

}  // namespace arrayhd
