#pragma once

#include <memory>
#include <span>
#include <vector>

#include "voxpcg/rng.hpp"

namespace voxpcg {

/// Covariance matrix adaptation evolution strategy (rank-one + rank-mu
/// update, cumulative step-size adaptation, lazy eigendecomposition).
/// Maximization is expressed through tell()'s ranking.
class CmaEs {
public:
    CmaEs(std::vector<double> mean, double sigma, int lambda = 0);
    ~CmaEs();
    CmaEs(CmaEs&&) noexcept;
    CmaEs& operator=(CmaEs&&) noexcept;

    static int default_lambda(int dimension);

    int dimension() const;
    int lambda() const;
    double sigma() const;
    std::vector<double> mean() const;
    int generation() const;

    /// Samples lambda points from N(mean, sigma^2 C).
    std::vector<std::vector<double>> ask(Rng& rng);

    /// `ranking` lists indices into the last ask() batch, best first. Must be
    /// a permutation of 0..lambda-1.
    void tell(std::span<const int> ranking);

    /// Covariance or step size has become unusable.
    bool degenerate() const;

private:
    struct State;
    std::unique_ptr<State> s_;
};

}  // namespace voxpcg
