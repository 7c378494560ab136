#define EIGEN_DONT_PARALLELIZE
#include "voxpcg/cma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <lapacke.h>

namespace voxpcg {

struct CmaEs::State {
    int n = 0;
    int lambda = 0;
    int mu = 0;
    Eigen::VectorXd weights;
    double mueff = 0, cc = 0, cs = 0, c1 = 0, cmu = 0, damps = 0, chi_n = 0;

    Eigen::VectorXd mean;
    double sigma = 0;
    Eigen::MatrixXd C;
    Eigen::MatrixXd B;
    Eigen::VectorXd D;  // sqrt of eigenvalues
    Eigen::VectorXd pc;
    Eigen::VectorXd ps;
    bool identity_basis = true;

    Eigen::MatrixXd last_y;  // n x lambda, (x - mean) / sigma of the last batch
    int generation = 0;
    long evaluations = 0;
    long eigen_evaluations = 0;
    bool broken = false;

    void update_eigensystem() {
        C = 0.5 * (C + C.transpose()).eval();
        Eigen::MatrixXd vectors = C;
        Eigen::VectorXd values(n);
        const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, vectors.data(), n, values.data());
        if (info != 0 || !values.allFinite() || values.minCoeff() <= 0.0) {
            broken = true;
            return;
        }
        B = std::move(vectors);
        D = values.cwiseSqrt();
        identity_basis = false;
        if (D.maxCoeff() / D.minCoeff() > 1e7) broken = true;
    }
};

CmaEs::CmaEs(std::vector<double> mean, double sigma, int lambda) : s_(std::make_unique<State>()) {
    if (mean.empty()) throw std::invalid_argument("CMA-ES needs dimension >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("CMA-ES step size must be > 0");
    auto& s = *s_;
    s.n = static_cast<int>(mean.size());
    s.lambda = lambda > 0 ? lambda : default_lambda(s.n);
    if (s.lambda < 2) throw std::invalid_argument("CMA-ES population must be >= 2");
    s.mu = s.lambda / 2;
    s.weights.resize(s.mu);
    for (int i = 0; i < s.mu; ++i) s.weights[i] = std::log(s.mu + 0.5) - std::log(i + 1.0);
    s.weights /= s.weights.sum();
    s.mueff = 1.0 / s.weights.squaredNorm();
    const double n = s.n;
    s.cc = (4 + s.mueff / n) / (n + 4 + 2 * s.mueff / n);
    s.cs = (s.mueff + 2) / (n + s.mueff + 5);
    s.c1 = 2 / ((n + 1.3) * (n + 1.3) + s.mueff);
    s.cmu = std::min(1 - s.c1, 2 * (s.mueff - 2 + 1 / s.mueff) / ((n + 2) * (n + 2) + s.mueff));
    s.damps = 1 + 2 * std::max(0.0, std::sqrt((s.mueff - 1) / (n + 1)) - 1) + s.cs;
    s.chi_n = std::sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n));

    s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), s.n);
    s.sigma = sigma;
    s.C = Eigen::MatrixXd::Identity(s.n, s.n);
    s.D = Eigen::VectorXd::Ones(s.n);
    s.pc = Eigen::VectorXd::Zero(s.n);
    s.ps = Eigen::VectorXd::Zero(s.n);
}

CmaEs::~CmaEs() = default;
CmaEs::CmaEs(CmaEs&&) noexcept = default;
CmaEs& CmaEs::operator=(CmaEs&&) noexcept = default;

int CmaEs::default_lambda(int dimension) {
    return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

int CmaEs::dimension() const { return s_->n; }
int CmaEs::lambda() const { return s_->lambda; }
double CmaEs::sigma() const { return s_->sigma; }
int CmaEs::generation() const { return s_->generation; }

std::vector<double> CmaEs::mean() const { return {s_->mean.data(), s_->mean.data() + s_->n}; }

std::vector<std::vector<double>> CmaEs::ask(Rng& rng) {
    auto& s = *s_;
    Eigen::MatrixXd z(s.n, s.lambda);
    for (int k = 0; k < s.lambda; ++k) {
        for (int i = 0; i < s.n; ++i) z(i, k) = rng.normal();
    }
    const Eigen::MatrixXd scaled = s.D.asDiagonal() * z;
    s.last_y = s.identity_basis ? scaled : (s.B * scaled).eval();
    std::vector<std::vector<double>> out(static_cast<std::size_t>(s.lambda));
    for (int k = 0; k < s.lambda; ++k) {
        const Eigen::VectorXd x = s.mean + s.sigma * s.last_y.col(k);
        out[static_cast<std::size_t>(k)].assign(x.data(), x.data() + s.n);
    }
    return out;
}

void CmaEs::tell(std::span<const int> ranking) {
    auto& s = *s_;
    if (s.last_y.cols() != s.lambda) throw std::logic_error("CmaEs::tell before ask");
    if (static_cast<int>(ranking.size()) != s.lambda) throw std::invalid_argument("ranking must cover the batch");
    std::vector<char> seen(static_cast<std::size_t>(s.lambda), 0);
    for (int r : ranking) {
        if (r < 0 || r >= s.lambda || seen[static_cast<std::size_t>(r)]) {
            throw std::invalid_argument("ranking is not a permutation");
        }
        seen[static_cast<std::size_t>(r)] = 1;
    }

    Eigen::MatrixXd selected(s.n, s.mu);
    for (int i = 0; i < s.mu; ++i) selected.col(i) = s.last_y.col(ranking[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd y_w = selected * s.weights;
    s.mean += s.sigma * y_w;

    // C^{-1/2} y_w = B D^{-1} B^T y_w
    Eigen::VectorXd whitened;
    if (s.identity_basis) {
        whitened = y_w.cwiseQuotient(s.D);
    } else {
        whitened = s.B * (s.B.transpose() * y_w).cwiseQuotient(s.D);
    }
    s.ps = (1 - s.cs) * s.ps + std::sqrt(s.cs * (2 - s.cs) * s.mueff) * whitened;
    const double ps_norm = s.ps.norm();
    const double decay = 1 - std::pow(1 - s.cs, 2.0 * (s.generation + 1));
    const bool hsig = ps_norm / std::sqrt(decay) / s.chi_n < 1.4 + 2.0 / (s.n + 1);
    s.pc = (1 - s.cc) * s.pc + (hsig ? std::sqrt(s.cc * (2 - s.cc) * s.mueff) : 0.0) * y_w;

    const double old_weight = 1 - s.c1 - s.cmu + (hsig ? 0.0 : s.c1 * s.cc * (2 - s.cc));
    s.C *= old_weight;
    s.C.noalias() += s.c1 * s.pc * s.pc.transpose();
    s.C.noalias() += s.cmu * selected * s.weights.asDiagonal() * selected.transpose();

    s.sigma *= std::exp(std::min(1.0, (s.cs / s.damps) * (ps_norm / s.chi_n - 1)));

    ++s.generation;
    s.evaluations += s.lambda;
    if (!s.C.allFinite() || !std::isfinite(s.sigma) || !s.mean.allFinite()) {
        s.broken = true;
        return;
    }
    const double lag = s.lambda / (s.c1 + s.cmu) / s.n / 10.0;
    if (static_cast<double>(s.evaluations - s.eigen_evaluations) > lag) {
        s.eigen_evaluations = s.evaluations;
        s.update_eigensystem();
    }
}

bool CmaEs::degenerate() const {
    const auto& s = *s_;
    return s.broken || !(s.sigma > 0.0) || s.sigma * s.D.maxCoeff() < 1e-14 || s.sigma > 1e8;
}

}  // namespace voxpcg
