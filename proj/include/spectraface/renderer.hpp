// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <spectraface/image.hpp>
#include <spectraface/models.hpp>

#include <array>
#include <cstdint>

namespace spectraface
{

/// Per-pixel unknowns: normalized chromophore coordinates and the two shadings.
struct PixelParams
{
    double m        = 0.5;
    double h        = 0.5;
    double diffuse  = 1.0;
    double specular = 0.0;

    void validate() const;
};

/// Image-wide unknowns: camera PCA coefficients and the illuminant mixture.
struct SceneParams
{
    std::array<double, 2> camera{};
    IlluminantWeights     light;

    /// Uniform mixture, t = 11.5, b = 0.
    static SceneParams neutral();

    void validate() const;
};

/// Normalized chromophore values this far outside [0, 1] are clamped by
/// render_image instead of rejected.
inline constexpr double kMapRangeSlack = 1e-6;

/// The four spatial maps in physical units (volume fractions and shadings).
struct ParameterMaps
{
    Map melanin;
    Map haemoglobin;
    Map diffuse;
    Map specular;
};

struct RenderedImage
{
    RgbImage linear;
    Mask     mask;
};

/// Scene-dependent quantities shared by every pixel.
struct SceneState
{
    SceneState( const SceneParams &scene, const Models &models );

    SceneParams                    params;
    MixedIlluminant                light;
    Eigen::MatrixXd                sensitivity;   ///< S, D x 3
    std::array<Eigen::MatrixXd, 2> d_sensitivity; ///< dS/db_k, D x 3
    Eigen::Vector3d                white_balance; ///< diagonal of T_wb
    Raw2XyzLut::Sample             raw2xyz;
    Eigen::Matrix3d                xyz2rgb;
    Eigen::MatrixXd                lit_sensitivity; ///< diag(e) S, so i_raw = lit_sensitivity^T (i_d r + i_s)
    Eigen::Matrix3d                balanced_to_rgb; ///< T_xyz2rgb T_raw2xyz
    Eigen::Matrix3d                raw_to_rgb;      ///< balanced_to_rgb T_wb
};

/// Partials of one rendered linear sRGB triple.
struct PixelJacobian
{
    Eigen::Matrix<double, 3, 4>                pixel;   ///< m, h, i_d, i_s
    Eigen::Matrix<double, 3, 2>                camera;  ///< b_1, b_2
    Eigen::Matrix<double, 3, kIlluminantCount> weights; ///< mixture weights
    Eigen::Matrix<double, 3, kIlluminantCount> logits;  ///< softmax logits
    Eigen::Vector3d                            t;       ///< daylight parameter
};

/// Dichromatic spectral render of one pixel through sensor and pipeline.
Eigen::Vector3d render_pixel(
    const PixelParams &pixel, const SceneState &scene, const Models &models, PixelJacobian *jacobian = nullptr );

Eigen::Vector3d render_pixel(
    const PixelParams &pixel, const SceneParams &scene, const Models &models, PixelJacobian *jacobian = nullptr );

/// Renders every masked pixel; background pixels are zero. Output does not
/// depend on `threads`.
RenderedImage render_image(
    const ParameterMaps &maps, const SceneParams &scene, const Mask &mask, const Models &models, int threads = 0 );

struct GradientCheckReport
{
    int    points               = 0;
    int    skipped_partials     = 0;
    double max_relative_error   = 0.0;
    double max_error_linear     = 0.0; ///< i_d, i_s
    double max_error_chromophore = 0.0; ///< m, h
    double max_error_camera     = 0.0;
    double max_error_light      = 0.0; ///< logits
    double max_error_temperature = 0.0;
};

/// Compares every analytic partial of render_pixel with central differences of
/// step `step` at random in-range points. Partials whose stencil would cross a
/// LUT cell boundary or the 7000 K daylight branch are skipped.
GradientCheckReport check_gradients( const Models &models, int points, double step, std::uint64_t seed );

/// |a - b| / max(|a|, |b|, floor).
double relative_error( double analytic, double numeric, double floor = 1e-7 );

} // namespace spectraface
