// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <spectraface/bilinear.hpp>
#include <spectraface/spectra.hpp>

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace spectraface
{

inline constexpr double kCameraParamLimit = 3.0;

/// Measured RGB sensitivities, one D x 3 matrix per camera.
struct SensitivityDataset
{
    WavelengthGrid               grid;
    std::vector<std::string>     names;
    std::vector<Eigen::MatrixXd> cameras;

    /// Columns named `<camera>_R`, `<camera>_G`, `<camera>_B`, consecutive.
    /// Each camera is scaled to unit peak.
    static SensitivityDataset load( const std::filesystem::path &path, const WavelengthGrid &grid );

    void validate() const;
};

/// vec(S) stacks the R, G, B columns of a D x 3 sensitivity matrix.
Eigen::VectorXd vectorize( const Eigen::MatrixXd &sensitivity );
Eigen::MatrixXd unvectorize( const Eigen::VectorXd &v );

/// Statistical camera model: vec(S(b)) = P diag(sigma) b + vec(S_mean).
struct CameraPCA
{
    WavelengthGrid           grid;
    Eigen::MatrixXd          components; ///< 3D x N, orthonormal columns
    Eigen::VectorXd          sigma;      ///< N, descending
    Eigen::VectorXd          mean;       ///< 3D
    Eigen::VectorXd          variances;  ///< every nonzero eigenvalue of the sample covariance
    std::vector<std::string> cameras;

    int dims() const { return static_cast<int>( sigma.size() ); }

    /// Fraction of total variance captured by the retained components.
    double explained_variance() const;

    /// Coefficients b of a sensitivity matrix in this basis.
    Eigen::VectorXd project( const Eigen::MatrixXd &sensitivity ) const;
};

CameraPCA fit_pca( const SensitivityDataset &dataset, int n_components );

/// S(b) as a D x 3 matrix. |b_i| must not exceed 3.
Eigen::MatrixXd sensitivity_from_b( const CameraPCA &pca, std::span<const double> b );

/// d vec(S) / d b = P diag(sigma); independent of b.
Eigen::MatrixXd sensitivity_jacobian( const CameraPCA &pca );

/// Least-squares map from camera raw to XYZ, each row rescaled to unit sum.
Eigen::Matrix3d raw2xyz( const Eigen::MatrixXd &sensitivity, const Eigen::MatrixXd &cmf );

/// T_raw2xyz tabulated over b in [-3, 3]^2 on a K x K grid.
class Raw2XyzLut
{
public:
    struct Sample
    {
        Eigen::Matrix3d                value;
        std::array<Eigen::Matrix3d, 2> d_b;
    };

    static Raw2XyzLut build( const CameraPCA &pca, const Eigen::MatrixXd &cmf, int k = 65 );

    int    size() const { return k_; }
    double node_coordinate( int i ) const;

    const Eigen::Matrix3d &node( int i, int j ) const
    {
        return nodes_[static_cast<std::size_t>( i * k_ + j )];
    }

    /// Throws ValidationError outside [-3, 3]^2; no clamping.
    Sample sample( double b0, double b1 ) const;

private:
    int                          k_ = 0;
    std::vector<Eigen::Matrix3d> nodes_;
};

} // namespace spectraface
