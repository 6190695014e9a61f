// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <spectraface/spectra.hpp>

#include <array>
#include <filesystem>
#include <span>

namespace spectraface
{

/// A, D(t), F1..F12, in that order.
inline constexpr int kIlluminantCount = 14;
inline constexpr int kIlluminantA     = 0;
inline constexpr int kIlluminantD     = 1;
inline constexpr int kFirstFluorescent = 2;

inline constexpr double kMinTemperatureParam = 1.0;
inline constexpr double kMaxTemperatureParam = 22.0;

/// Daylight temperature parameter t in [1, 22] to correlated colour temperature.
constexpr double cct_from_temperature_param( double t ) { return 1000.0 * t + 3000.0; }

/// CIE daylight chromaticity x_D for a CCT in [4000, 25000] K, with its derivative.
struct DaylightChromaticity
{
    double x, y;
    double dx_dcct, dy_dcct;
};
DaylightChromaticity daylight_chromaticity( double cct );

/// Standard illuminant spectra on one grid. A and F1..F12 are rescaled to unit
/// sum; the daylight basis S0, S1, S2 is kept raw.
class IlluminantBank
{
public:
    static IlluminantBank load( const std::filesystem::path &data_dir, const WavelengthGrid &grid );

    IlluminantBank() = default;

    IlluminantBank(
        WavelengthGrid                 grid,
        Eigen::VectorXd                a,
        Eigen::VectorXd                s0,
        Eigen::VectorXd                s1,
        Eigen::VectorXd                s2,
        std::array<Eigen::VectorXd, 12> fluorescent );

    const WavelengthGrid  &grid() const { return grid_; }
    const Eigen::VectorXd &a() const { return a_; }
    const Eigen::VectorXd &fluorescent( int k ) const { return f_[static_cast<std::size_t>( k )]; }
    const Eigen::VectorXd &s0() const { return s0_; }
    const Eigen::VectorXd &s1() const { return s1_; }
    const Eigen::VectorXd &s2() const { return s2_; }

private:
    WavelengthGrid                 grid_;
    Eigen::VectorXd                a_, s0_, s1_, s2_;
    std::array<Eigen::VectorXd, 12> f_;
};

/// Unit-sum daylight SPD and its derivative with respect to t.
struct DaylightSpd
{
    Eigen::VectorXd spd;
    Eigen::VectorXd d_t;
};
DaylightSpd daylight_spd( double t, const IlluminantBank &bank );

/// Convex weights over the 14 illuminants plus the daylight parameter t.
struct IlluminantWeights
{
    std::array<double, kIlluminantCount> w{};
    double                               t = 11.5;

    /// Throws ValidationError unless weights are a simplex point (1e-9) and t is in [1, 22].
    void validate() const;
};

/// Max-subtracted softmax.
std::array<double, kIlluminantCount> softmax_weights( std::span<const double, kIlluminantCount> logits );

/// d w_i / d z_j = w_i (delta_ij - w_j).
Eigen::Matrix<double, kIlluminantCount, kIlluminantCount>
softmax_jacobian( const std::array<double, kIlluminantCount> &w );

struct MixedIlluminant
{
    Eigen::VectorXd spd;       ///< unit sum, nonnegative
    Eigen::MatrixXd d_weights; ///< D x 14; column k is the k-th basis spectrum
    Eigen::MatrixXd d_logits;  ///< D x 14; d_weights composed with the softmax Jacobian
    Eigen::VectorXd d_t;       ///< w_D * d e_D / dt
};

MixedIlluminant mix_illuminant( const IlluminantWeights &weights, const IlluminantBank &bank );

} // namespace spectraface
