#pragma once

#include "dsos/dataset.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>

namespace dsos {

enum class ShiftKind { none, label, corrupted, mean, noise, dependency };

std::string shift_name(ShiftKind s);
ShiftKind shift_from_name(const std::string& name);

// Two-component Gaussian mixture scenario. The baseline draws both sides from
// 0.5 N(+1_d, I) + 0.5 N(-1_d, I); exactly one parameter block departs from it
// according to `shift` at one of three intensities:
//   label:      phi_tr in {0.49, 0.47, 0.45}, phi_te = 1 - phi_tr
//   corrupted:  omega  in {0.01, 0.02, 0.04}, phi_tr = 1, phi_te = 1 - omega
//   mean:       kappa  in {11, 12, 14}, mu2_te = [kappa/10, 1_{d-1}]
//   noise:      theta  in {11, 12, 14}, Sigma1_te[0][0] = theta/10
//   dependency: gamma  in {0.1, 0.2, 0.4}, Sigma2_te[0][1] = Sigma2_te[1][0] = gamma
struct GmmShiftSpec {
    std::size_t n_per_side = 400; // {400, 800, 1600}
    std::size_t d = 4;            // {4, 8, 16}
    ShiftKind shift = ShiftKind::none;
    int intensity_index = 0; // 0..2
    std::uint64_t seed = 0;
    // The mean shift as printed sets the unchanged coordinates of mu2_te to
    // +1; this flag flips them to -1 (matching the baseline mu2 = -1_d).
    bool mean_shift_negative_rest = false;
    // Allow n_per_side/d outside the published grid.
    bool unsafe_grid = false;

    void validate() const;
};

inline constexpr std::array<double, 3> kLabelShiftTrainWeights{0.49, 0.47, 0.45};
inline constexpr std::array<double, 3> kCorruptedFractions{0.01, 0.02, 0.04};
inline constexpr std::array<double, 3> kMeanShiftKappas{11, 12, 14};
inline constexpr std::array<double, 3> kNoiseShiftThetas{11, 12, 14};
inline constexpr std::array<double, 3> kDependencyGammas{0.1, 0.2, 0.4};

// (train, test) feature matrices, n_per_side rows each.
std::pair<Matrix, Matrix> generate(const GmmShiftSpec& spec);

// Lower-triangular Cholesky factor; throws if the matrix is not SPD.
Matrix cholesky(const Matrix& spd);

} // namespace dsos
