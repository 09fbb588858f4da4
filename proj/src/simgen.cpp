#include "dsos/simgen.hpp"

#include "dsos/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dsos {

std::string shift_name(ShiftKind s) {
    switch (s) {
        case ShiftKind::none: return "none";
        case ShiftKind::label: return "label";
        case ShiftKind::corrupted: return "corrupted";
        case ShiftKind::mean: return "mean";
        case ShiftKind::noise: return "noise";
        case ShiftKind::dependency: return "dependency";
    }
    throw std::logic_error("shift_name: bad enum");
}

ShiftKind shift_from_name(const std::string& name) {
    if (name == "none") return ShiftKind::none;
    if (name == "label") return ShiftKind::label;
    if (name == "corrupted") return ShiftKind::corrupted;
    if (name == "mean") return ShiftKind::mean;
    if (name == "noise") return ShiftKind::noise;
    if (name == "dependency") return ShiftKind::dependency;
    throw std::invalid_argument("unknown shift kind: " + name);
}

void GmmShiftSpec::validate() const {
    if (!unsafe_grid) {
        if (n_per_side != 400 && n_per_side != 800 && n_per_side != 1600)
            throw std::invalid_argument("GmmShiftSpec: n_per_side must be 400, 800 or 1600");
        if (d != 4 && d != 8 && d != 16)
            throw std::invalid_argument("GmmShiftSpec: d must be 4, 8 or 16");
    } else {
        if (n_per_side < 4) throw std::invalid_argument("GmmShiftSpec: n_per_side too small");
        if (d < 2) throw std::invalid_argument("GmmShiftSpec: d must be >= 2");
    }
    if (intensity_index < 0 || intensity_index > 2)
        throw std::invalid_argument("GmmShiftSpec: intensity_index must lie in 0..2");
}

Matrix cholesky(const Matrix& spd) {
    if (spd.rows() != spd.cols()) throw std::invalid_argument("cholesky: square matrix required");
    const std::size_t d = spd.rows();
    Matrix lower(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = spd(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= lower(i, k) * lower(j, k);
            if (i == j) {
                if (sum <= 0.0) throw std::invalid_argument("cholesky: matrix is not SPD");
                lower(i, i) = std::sqrt(sum);
            } else {
                lower(i, j) = sum / lower(j, j);
            }
        }
    }
    return lower;
}

namespace {

struct MixtureSide {
    double phi1;         // weight of component 1
    std::vector<double> mu1, mu2;
    Matrix chol1, chol2; // Cholesky factors of the component covariances
};

Matrix identity(std::size_t d) {
    Matrix m(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
}

Matrix sample_side(const MixtureSide& side, std::size_t n, std::size_t d, Rng& rng) {
    Matrix out(n, d);
    std::vector<double> z(d);
    for (std::size_t r = 0; r < n; ++r) {
        const bool first = rng.uniform() < side.phi1;
        const auto& mu = first ? side.mu1 : side.mu2;
        const auto& chol = first ? side.chol1 : side.chol2;
        for (auto& v : z) v = rng.normal();
        for (std::size_t i = 0; i < d; ++i) {
            double x = mu[i];
            for (std::size_t k = 0; k <= i; ++k) x += chol(i, k) * z[k];
            out(r, i) = x;
        }
    }
    return out;
}

} // namespace

std::pair<Matrix, Matrix> generate(const GmmShiftSpec& spec) {
    spec.validate();
    const std::size_t d = spec.d;

    MixtureSide train{0.5,
                      std::vector<double>(d, 1.0),
                      std::vector<double>(d, -1.0),
                      cholesky(identity(d)),
                      cholesky(identity(d))};
    MixtureSide test = train;

    const int level = spec.intensity_index;
    switch (spec.shift) {
        case ShiftKind::none:
            break;
        case ShiftKind::label: {
            const double phi_tr = kLabelShiftTrainWeights[level];
            train.phi1 = phi_tr;
            test.phi1 = 1.0 - phi_tr;
            break;
        }
        case ShiftKind::corrupted: {
            const double omega = kCorruptedFractions[level];
            train.phi1 = 1.0;
            test.phi1 = 1.0 - omega;
            break;
        }
        case ShiftKind::mean: {
            const double kappa = kMeanShiftKappas[level];
            const double rest = spec.mean_shift_negative_rest ? -1.0 : 1.0;
            test.mu2.assign(d, rest);
            test.mu2[0] = kappa / 10.0;
            break;
        }
        case ShiftKind::noise: {
            const double theta = kNoiseShiftThetas[level];
            Matrix sigma = identity(d);
            sigma(0, 0) = theta / 10.0;
            test.chol1 = cholesky(sigma);
            break;
        }
        case ShiftKind::dependency: {
            const double gamma = kDependencyGammas[level];
            Matrix sigma = identity(d);
            sigma(0, 1) = gamma;
            sigma(1, 0) = gamma;
            test.chol2 = cholesky(sigma);
            break;
        }
    }

    Rng train_rng = Rng::derive(spec.seed, 0);
    Rng test_rng = Rng::derive(spec.seed, 1);
    Matrix x_train = sample_side(train, spec.n_per_side, d, train_rng);
    Matrix x_test = sample_side(test, spec.n_per_side, d, test_rng);
    return {std::move(x_train), std::move(x_test)};
}

} // namespace dsos
