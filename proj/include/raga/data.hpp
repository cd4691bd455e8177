#ifndef RAGA_DATA_HPP
#define RAGA_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "raga/models.hpp"
#include "raga/rng.hpp"

namespace raga {

// Per-client data shards with honest/Byzantine designation.
// weights alpha_m = S_m / sum_j S_j; honest_weight C_alpha = sum over honest alpha_m.
struct ShardedDataset {
    std::vector<std::vector<Sample>> shards;
    std::vector<int> sizes;
    std::vector<double> weights;
    std::vector<bool> byzantine_mask;
    double honest_weight = 1.0;

    int client_count() const { return static_cast<int>(shards.size()); }

    int total_size() const {
        int n = 0;
        for (int s : sizes) n += s;
        return n;
    }

    int byzantine_count() const {
        int n = 0;
        for (bool b : byzantine_mask) n += b ? 1 : 0;
        return n;
    }

    void validate() const {
        if (shards.empty()) throw std::invalid_argument("ShardedDataset: no shards");
        if (sizes.size() != shards.size() || weights.size() != shards.size() ||
            byzantine_mask.size() != shards.size())
            throw std::invalid_argument("ShardedDataset: field length mismatch");
        double wsum = 0.0, honest = 0.0;
        for (std::size_t m = 0; m < shards.size(); ++m) {
            if (shards[m].empty()) throw std::invalid_argument("ShardedDataset: empty shard");
            if (sizes[m] != static_cast<int>(shards[m].size()))
                throw std::invalid_argument("ShardedDataset: stored size disagrees with shard");
            wsum += weights[m];
            if (!byzantine_mask[m]) honest += weights[m];
        }
        if (std::fabs(wsum - 1.0) > 1e-12)
            throw std::invalid_argument("ShardedDataset: weights must sum to 1 within 1e-12");
        if (honest != honest_weight)
            throw std::invalid_argument("ShardedDataset: honest_weight inconsistent with mask");
    }
};

// Builds the bookkeeping fields from raw shards; everyone starts honest.
inline ShardedDataset make_sharded(std::vector<std::vector<Sample>> shards) {
    if (shards.empty()) throw std::invalid_argument("make_sharded: no shards");
    ShardedDataset ds;
    ds.shards = std::move(shards);
    double total = 0.0;
    for (const auto& shard : ds.shards) {
        if (shard.empty()) throw std::invalid_argument("make_sharded: empty shard");
        ds.sizes.push_back(static_cast<int>(shard.size()));
        total += static_cast<double>(shard.size());
    }
    for (int s : ds.sizes) ds.weights.push_back(static_cast<double>(s) / total);
    ds.byzantine_mask.assign(ds.shards.size(), false);
    double honest = 0.0;
    for (double w : ds.weights) honest += w;
    ds.honest_weight = honest;
    return ds;
}

struct PartitionPlan {
    int client_count = 50;
    double concentration = 0.6; // Dirichlet phi; smaller means more skew
    std::uint64_t seed = 1;

    bool operator==(const PartitionPlan&) const = default;
};

namespace detail {

// floor + distribute the remainder by descending fractional part (ties: lower index).
inline std::vector<int> largest_remainder_counts(const std::vector<double>& props, int total) {
    const std::size_t m = props.size();
    std::vector<int> counts(m, 0);
    std::vector<std::pair<double, std::size_t>> rem(m);
    int assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double exact = props[i] * total;
        counts[i] = static_cast<int>(std::floor(exact));
        assigned += counts[i];
        rem[i] = {exact - std::floor(exact), i};
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int r = 0; r < total - assigned; ++r) counts[rem[static_cast<std::size_t>(r)].second] += 1;
    return counts;
}

} // namespace detail

// For each class draw client proportions ~ Dirichlet(phi * 1_M) and deal that
// class's samples by largest-remainder rounding. Empty shards are repaired by
// moving one sample from the largest shard.
inline ShardedDataset dirichlet_partition(const std::vector<Sample>& samples,
                                          const PartitionPlan& plan) {
    if (samples.empty()) throw std::invalid_argument("dirichlet_partition: empty input");
    if (plan.client_count < 1) throw std::invalid_argument("dirichlet_partition: client_count must be >= 1");
    if (!(plan.concentration > 0.0))
        throw std::invalid_argument("dirichlet_partition: concentration must be positive");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < samples.size(); ++i) by_class[samples[i].label].push_back(i);

    const int M = plan.client_count;
    Rng rng(plan.seed);
    std::vector<std::vector<Sample>> shards(static_cast<std::size_t>(M));
    for (const auto& [label, idx] : by_class) {
        const auto props = rng.dirichlet(plan.concentration, M);
        const auto counts = detail::largest_remainder_counts(props, static_cast<int>(idx.size()));
        std::size_t pos = 0;
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < counts[static_cast<std::size_t>(m)]; ++k)
                shards[static_cast<std::size_t>(m)].push_back(samples[idx[pos++]]);
    }

    for (std::size_t m = 0; m < shards.size(); ++m) {
        if (!shards[m].empty()) continue;
        std::size_t largest = 0;
        for (std::size_t j = 1; j < shards.size(); ++j)
            if (shards[j].size() > shards[largest].size()) largest = j;
        if (shards[largest].size() < 2)
            throw std::invalid_argument("dirichlet_partition: not enough samples to fill every client");
        shards[m].push_back(shards[largest].back());
        shards[largest].pop_back();
    }
    return make_sharded(std::move(shards));
}

// Marks a subset of shards Byzantine whose weight is as close to target_fraction
// as achievable while staying <= target_fraction + 0.02 and keeping C_alpha > 0.5.
// Best of 256 seeded random-order greedy passes.
inline ShardedDataset mark_byzantine(const ShardedDataset& ds, double target_fraction,
                                     std::uint64_t seed) {
    ds.validate();
    if (!(target_fraction >= 0.0) || target_fraction >= 0.5)
        throw std::invalid_argument("mark_byzantine: target_fraction must lie in [0, 0.5)");

    ShardedDataset out = ds;
    out.byzantine_mask.assign(ds.shards.size(), false);
    if (target_fraction == 0.0) {
        out.honest_weight = [&] {
            double h = 0.0;
            for (double w : out.weights) h += w;
            return h;
        }();
        return out;
    }

    const int M = ds.client_count();
    const double tol = 0.02;
    Rng rng(seed);
    std::vector<std::size_t> best;
    double best_weight = 0.0;
    double best_diff = std::fabs(target_fraction);
    for (int restart = 0; restart < 256; ++restart) {
        const auto order = rng.permutation(M);
        std::vector<std::size_t> sel;
        double cum = 0.0;
        for (int i : order) {
            const double cand = cum + ds.weights[static_cast<std::size_t>(i)];
            if (cand > target_fraction + tol) continue;
            if (cand >= 0.5) continue;
            if (std::fabs(cand - target_fraction) >= std::fabs(cum - target_fraction)) continue;
            sel.push_back(static_cast<std::size_t>(i));
            cum = cand;
        }
        if (std::fabs(cum - target_fraction) < best_diff) {
            best_diff = std::fabs(cum - target_fraction);
            best_weight = cum;
            best = std::move(sel);
        }
    }
    (void)best_weight;
    for (std::size_t i : best) out.byzantine_mask[i] = true;

    double honest = 0.0;
    for (std::size_t m = 0; m < out.weights.size(); ++m)
        if (!out.byzantine_mask[m]) honest += out.weights[m];
    out.honest_weight = honest;
    if (!(out.honest_weight > 0.5))
        throw std::invalid_argument("mark_byzantine: cannot keep honest weight above 0.5");
    return out;
}

// Shard m holds per_shard samples at offset_m + N(0, noise_std^2 I); the offsets
// control heterogeneity directly.
inline ShardedDataset synthetic_quadratic(int dim, int clients, int per_shard,
                                          const std::vector<ParameterVector>& shard_offsets,
                                          double noise_std, std::uint64_t seed) {
    if (dim < 1 || clients < 1 || per_shard < 1)
        throw std::invalid_argument("synthetic_quadratic: dim, clients, per_shard must be >= 1");
    if (static_cast<int>(shard_offsets.size()) != clients)
        throw std::invalid_argument("synthetic_quadratic: need one offset per client");
    if (noise_std < 0.0) throw std::invalid_argument("synthetic_quadratic: negative noise_std");
    Rng rng(seed);
    std::vector<std::vector<Sample>> shards(static_cast<std::size_t>(clients));
    for (int m = 0; m < clients; ++m) {
        const auto& off = shard_offsets[static_cast<std::size_t>(m)];
        if (static_cast<int>(off.size()) != dim)
            throw std::invalid_argument("synthetic_quadratic: offset dimension mismatch");
        for (int i = 0; i < per_shard; ++i) {
            Sample s;
            s.features.resize(static_cast<std::size_t>(dim));
            for (int j = 0; j < dim; ++j)
                s.features[static_cast<std::size_t>(j)] =
                    off[static_cast<std::size_t>(j)] + noise_std * rng.normal();
            shards[static_cast<std::size_t>(m)].push_back(std::move(s));
        }
    }
    return make_sharded(std::move(shards));
}

// Gaussian class blobs with pairwise mean distance ~ separation, labels dealt
// round-robin, then split across clients by dirichlet_partition.
inline ShardedDataset synthetic_logistic(int dim, int clients, int per_shard, int class_count,
                                         double separation, double concentration,
                                         std::uint64_t seed) {
    if (dim < 1 || clients < 1 || per_shard < 1)
        throw std::invalid_argument("synthetic_logistic: dim, clients, per_shard must be >= 1");
    if (class_count < 2) throw std::invalid_argument("synthetic_logistic: class_count must be >= 2");
    Rng rng(seed);
    std::vector<ParameterVector> means(static_cast<std::size_t>(class_count));
    for (int c = 0; c < class_count; ++c) {
        ParameterVector u(static_cast<std::size_t>(dim));
        for (double& v : u) v = rng.normal();
        const double n = norm(u);
        const double scale = n > 0.0 ? separation / (std::sqrt(2.0) * n) : 0.0;
        for (double& v : u) v *= scale;
        means[static_cast<std::size_t>(c)] = std::move(u);
    }
    const int total = clients * per_shard;
    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        const int c = i % class_count;
        Sample s;
        s.label = c;
        s.features.resize(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j)
            s.features[static_cast<std::size_t>(j)] =
                means[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] + rng.normal();
        samples.push_back(std::move(s));
    }
    return dirichlet_partition(samples, PartitionPlan{clients, concentration, seed_mix(seed, 1)});
}

namespace detail {

// Global loss over the honest shards, weighted alpha_m / C_alpha.
inline double honest_loss(const ModelSpec& spec, const ParameterVector& w,
                          const ShardedDataset& ds) {
    double acc = 0.0;
    for (int m = 0; m < ds.client_count(); ++m) {
        if (ds.byzantine_mask[static_cast<std::size_t>(m)]) continue;
        acc += ds.weights[static_cast<std::size_t>(m)] *
               loss(spec, w, std::span<const Sample>(ds.shards[static_cast<std::size_t>(m)]));
    }
    return acc / ds.honest_weight;
}

inline ParameterVector honest_global_gradient(const ModelSpec& spec, const ParameterVector& w,
                                              const ShardedDataset& ds) {
    ParameterVector acc(w.size(), 0.0);
    for (int m = 0; m < ds.client_count(); ++m) {
        if (ds.byzantine_mask[static_cast<std::size_t>(m)]) continue;
        const auto g = gradient(spec, w, std::span<const Sample>(ds.shards[static_cast<std::size_t>(m)]));
        add_scaled(acc, ds.weights[static_cast<std::size_t>(m)] / ds.honest_weight, g);
    }
    return acc;
}

// Minimizer of the honest quadratic loss: the alpha-weighted mean of honest samples.
inline ParameterVector quadratic_optimum(const ShardedDataset& ds, int dim) {
    ParameterVector opt(static_cast<std::size_t>(dim), 0.0);
    for (int m = 0; m < ds.client_count(); ++m) {
        if (ds.byzantine_mask[static_cast<std::size_t>(m)]) continue;
        const auto& shard = ds.shards[static_cast<std::size_t>(m)];
        ParameterVector mean(static_cast<std::size_t>(dim), 0.0);
        for (const Sample& s : shard) add_scaled(mean, 1.0, s.features);
        add_scaled(opt, ds.weights[static_cast<std::size_t>(m)] / ds.honest_weight /
                            static_cast<double>(shard.size()),
                   mean);
    }
    return opt;
}

inline std::uint32_t read_u32_be(std::span<const std::uint8_t> bytes, std::size_t offset,
                                 const char* field) {
    if (offset + 4 > bytes.size())
        throw std::invalid_argument(std::string("parse_idx: truncated payload reading ") + field);
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

} // namespace detail

// IDX pair -> samples with pixels scaled to [0,1] and labels in {0..9}.
inline std::vector<Sample> parse_idx(std::span<const std::uint8_t> images_bytes,
                                     std::span<const std::uint8_t> labels_bytes) {
    const std::uint32_t image_magic = detail::read_u32_be(images_bytes, 0, "images magic");
    if (image_magic != 0x00000803u)
        throw std::invalid_argument("parse_idx: bad magic in images file (expected 2051, got " +
                                    std::to_string(image_magic) + ")");
    const std::uint32_t label_magic = detail::read_u32_be(labels_bytes, 0, "labels magic");
    if (label_magic != 0x00000801u)
        throw std::invalid_argument("parse_idx: bad magic in labels file (expected 2049, got " +
                                    std::to_string(label_magic) + ")");
    const std::uint32_t image_count = detail::read_u32_be(images_bytes, 4, "images count");
    const std::uint32_t label_count = detail::read_u32_be(labels_bytes, 4, "labels count");
    if (image_count != label_count)
        throw std::invalid_argument("parse_idx: count mismatch (images " + std::to_string(image_count) +
                                    " vs labels " + std::to_string(label_count) + ")");
    const std::uint32_t rows = detail::read_u32_be(images_bytes, 8, "images rows");
    const std::uint32_t cols = detail::read_u32_be(images_bytes, 12, "images cols");
    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    if (pixels == 0) throw std::invalid_argument("parse_idx: images rows/cols must be positive");
    if (images_bytes.size() != 16 + pixels * image_count)
        throw std::invalid_argument("parse_idx: truncated payload in images data");
    if (labels_bytes.size() != 8 + static_cast<std::size_t>(label_count))
        throw std::invalid_argument("parse_idx: truncated payload in labels data");

    std::vector<Sample> samples(image_count);
    for (std::uint32_t i = 0; i < image_count; ++i) {
        Sample& s = samples[i];
        const std::uint8_t label = labels_bytes[8 + i];
        if (label > 9)
            throw std::invalid_argument("parse_idx: labels value out of range at index " +
                                        std::to_string(i));
        s.label = label;
        s.features.resize(pixels);
        const std::size_t base = 16 + static_cast<std::size_t>(i) * pixels;
        for (std::size_t j = 0; j < pixels; ++j)
            s.features[j] = static_cast<double>(images_bytes[base + j]) / 255.0;
    }
    return samples;
}

inline std::vector<std::uint8_t> encode_idx_images(const std::vector<std::vector<std::uint8_t>>& images,
                                                   int rows, int cols) {
    std::vector<std::uint8_t> out;
    const auto push_u32 = [&](std::uint32_t v) {
        out.push_back(static_cast<std::uint8_t>(v >> 24));
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v));
    };
    push_u32(0x00000803u);
    push_u32(static_cast<std::uint32_t>(images.size()));
    push_u32(static_cast<std::uint32_t>(rows));
    push_u32(static_cast<std::uint32_t>(cols));
    for (const auto& img : images) {
        if (static_cast<int>(img.size()) != rows * cols)
            throw std::invalid_argument("encode_idx_images: image size mismatch");
        out.insert(out.end(), img.begin(), img.end());
    }
    return out;
}

inline std::vector<std::uint8_t> encode_idx_labels(const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> out;
    const auto push_u32 = [&](std::uint32_t v) {
        out.push_back(static_cast<std::uint8_t>(v >> 24));
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v));
    };
    push_u32(0x00000801u);
    push_u32(static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

struct IdxBytes {
    std::vector<std::uint8_t> images;
    std::vector<std::uint8_t> labels;
};

// Deterministic 28x28 ten-class stand-in for MNIST, sharing the exact IDX byte
// format; used where the real files are not available. Training samples are
// jittered stamps of per-class templates. With boundary_blend set (the
// evaluation profile) every sample is instead mixed toward a second class's
// template, label still dominant, and drawn under heavier pixel noise - held-out
// accuracy then resolves small margins and any garbage a training run
// accumulated on off-template pixels.
inline IdxBytes synthetic_digit_idx(int count, double noise_std, std::uint64_t seed,
                                    bool boundary_blend = false) {
    if (count < 1) throw std::invalid_argument("synthetic_digit_idx: count must be >= 1");
    constexpr int kSide = 28;
    Rng rng(seed);
    std::vector<std::vector<std::uint8_t>> images;
    std::vector<std::uint8_t> labels;
    images.reserve(static_cast<std::size_t>(count));
    labels.reserve(static_cast<std::size_t>(count));
    // 30 grid slots, three per class through a fixed coprime shuffle, so the ten
    // class templates occupy disjoint positions (near-orthogonal mean images)
    const auto stamp_template = [&](std::vector<double>& canvas, int cls, double weight, Rng& r) {
        for (int b = 0; b < 3; ++b) {
            const int slot = (7 * (3 * cls + b) + 3) % 30;
            const double cr = 4 + 5 * (slot / 6) + r.uniform(-0.75, 0.75);
            const double cc = 4 + 4 * (slot % 6) + r.uniform(-0.75, 0.75);
            const double amp = weight * (0.85 + 0.15 * r.next_double());
            for (int y = 0; y < kSide; ++y)
                for (int x = 0; x < kSide; ++x) {
                    const double dy = y - cr, dx = x - cc;
                    canvas[static_cast<std::size_t>(y * kSide + x)] +=
                        amp * std::exp(-(dy * dy + dx * dx) / (2.0 * 2.2 * 2.2));
                }
        }
    };
    for (int i = 0; i < count; ++i) {
        const int c = i % 10;
        std::vector<double> canvas(kSide * kSide, 0.0);
        const int other = (c + 1 + static_cast<int>(rng.uniform_index(9))) % 10;
        const double blend = boundary_blend ? rng.uniform(0.25, 0.5) : 0.0;
        stamp_template(canvas, c, 1.0 - blend, rng);
        stamp_template(canvas, other, blend, rng);
        const double pixel_noise = boundary_blend ? std::max(noise_std, 0.3) : noise_std;
        std::vector<std::uint8_t> img(kSide * kSide);
        for (std::size_t j = 0; j < img.size(); ++j) {
            const double v = std::clamp(canvas[j] + pixel_noise * rng.normal(), 0.0, 1.0);
            img[j] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
        images.push_back(std::move(img));
        labels.push_back(static_cast<std::uint8_t>(c));
    }
    return {encode_idx_images(images, kSide, kSide), encode_idx_labels(labels)};
}

} // namespace raga

#endif // RAGA_DATA_HPP
