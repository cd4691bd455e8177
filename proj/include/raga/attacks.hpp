#ifndef RAGA_ATTACKS_HPP
#define RAGA_ATTACKS_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "raga/client.hpp"
#include "raga/rng.hpp"
#include "raga/vec.hpp"

namespace raga {

enum class AttackType { NoAttack, Gaussian, SignFlip, Lie };

struct AttackKind {
    AttackType type = AttackType::NoAttack;
    double gaussian_std = 9.48683298050513799599; // sqrt(90)
    double signflip_scale = 3.0;
    double lie_coeff = 0.7;

    void validate() const {
        if (type == AttackType::Gaussian && !(gaussian_std > 0.0))
            throw std::invalid_argument("AttackKind: gaussian_std must be positive");
        if (type == AttackType::SignFlip && !(signflip_scale > 0.0))
            throw std::invalid_argument("AttackKind: signflip_scale must be positive");
        if (type == AttackType::Lie && !(lie_coeff > 0.0))
            throw std::invalid_argument("AttackKind: lie_coeff must be positive");
    }

    bool operator==(const AttackKind&) const = default;
};

// Omniscient, stateless forgery from the current round's honest uploads.
//   Gaussian: byz_count vectors with iid N(0, std^2) coordinates.
//   SignFlip: copies of -scale * sum over honest uploads (unweighted sum).
//   Lie:      copies of rho + coeff * nu, the coordinate-wise honest mean and
//             population standard deviation.
inline std::vector<ParameterVector> forge(const AttackKind& kind,
                                          const std::vector<ClientUpdate>& honest_updates,
                                          int byz_count, int dim, Rng& rng) {
    kind.validate();
    if (byz_count < 0) throw std::invalid_argument("forge: byz_count must be >= 0");
    if (kind.type == AttackType::NoAttack) return {};
    if (byz_count == 0) return {};
    for (const auto& u : honest_updates)
        if (static_cast<int>(u.vector.size()) != dim)
            throw std::invalid_argument("forge: honest update dimension mismatch");

    std::vector<ParameterVector> out;
    out.reserve(static_cast<std::size_t>(byz_count));
    switch (kind.type) {
    case AttackType::NoAttack: return {};
    case AttackType::Gaussian: {
        for (int b = 0; b < byz_count; ++b) {
            ParameterVector v(static_cast<std::size_t>(dim));
            for (double& x : v) x = kind.gaussian_std * rng.normal();
            out.push_back(std::move(v));
        }
        return out;
    }
    case AttackType::SignFlip: {
        if (honest_updates.empty())
            throw std::invalid_argument("forge: sign-flip attack needs at least one honest update");
        ParameterVector v(static_cast<std::size_t>(dim), 0.0);
        for (const auto& u : honest_updates)
            for (std::size_t j = 0; j < v.size(); ++j) v[j] += u.vector[j];
        for (double& x : v) x = -kind.signflip_scale * x;
        for (int b = 0; b < byz_count; ++b) out.push_back(v);
        return out;
    }
    case AttackType::Lie: {
        if (honest_updates.empty())
            throw std::invalid_argument("forge: LIE attack needs at least one honest update");
        const double n = static_cast<double>(honest_updates.size());
        ParameterVector mean(static_cast<std::size_t>(dim), 0.0);
        for (const auto& u : honest_updates)
            for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += u.vector[j];
        for (double& x : mean) x /= n;
        ParameterVector v(static_cast<std::size_t>(dim), 0.0);
        for (const auto& u : honest_updates)
            for (std::size_t j = 0; j < v.size(); ++j) {
                const double d = u.vector[j] - mean[j];
                v[j] += d * d;
            }
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] = mean[j] + kind.lie_coeff * std::sqrt(v[j] / n);
        for (int b = 0; b < byz_count; ++b) out.push_back(v);
        return out;
    }
    }
    return out;
}

} // namespace raga

#endif // RAGA_ATTACKS_HPP
