// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <Eigen/Dense>

namespace spectraface
{

/// Fixed XYZ -> linear sRGB matrix and the display gamma.
struct PipelineConstants
{
    Eigen::Matrix3d xyz2rgb;
    double          a     = 0.055;
    double          gamma = 2.4;

    static const PipelineConstants &standard();
};

/// Diagonal of T_wb = diag(S^T e)^-1. Throws NumericalError when any channel
/// response is not positive.
Eigen::Vector3d white_balance( const Eigen::MatrixXd &sensitivity, const Eigen::VectorXd &illuminant );

/// i_linRGB = T_xyz2rgb T_raw2xyz T_wb i_raw.
Eigen::Vector3d apply_pipeline(
    const Eigen::Vector3d   &raw,
    const Eigen::MatrixXd   &sensitivity,
    const Eigen::VectorXd   &illuminant,
    const Eigen::Matrix3d   &raw2xyz,
    const PipelineConstants &constants = PipelineConstants::standard() );

/// (1 + a) x^(1/gamma) - a with x clamped to [0, 1] first. The result may be
/// as low as -a.
double gamma_encode( double linear, const PipelineConstants &constants = PipelineConstants::standard() );

/// Inverse of gamma_encode on [-a, 1]; inputs are clamped to that interval.
double gamma_decode( double encoded, const PipelineConstants &constants = PipelineConstants::standard() );

/// gamma_encode clamped to [0, 1], for writing display images.
double gamma_encode_for_export( double linear, const PipelineConstants &constants = PipelineConstants::standard() );

Eigen::Vector3d gamma_encode( const Eigen::Vector3d &linear, const PipelineConstants &constants = PipelineConstants::standard() );
Eigen::Vector3d gamma_decode( const Eigen::Vector3d &encoded, const PipelineConstants &constants = PipelineConstants::standard() );

} // namespace spectraface
