// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <spectraface/renderer.hpp>

#include <optional>
#include <string>
#include <vector>

namespace spectraface
{

/// Unconstrained unknowns of one image. Background latents are carried but
/// receive zero gradient.
struct LatentImage
{
    Map                                  z_m, z_h, z_d, z_s;
    std::array<double, 2>                z_b{};
    std::array<double, kIlluminantCount> z_light{};
    double                               z_t = 0.0;

    /// All-zero latents: m = h = 0.5, i_d = i_s = 1, b = 0, t = 11.5, uniform light.
    static LatentImage zeros( int width, int height );

    int width() const { return z_m.width; }
    int height() const { return z_m.height; }

    /// Flat layout: z_m, z_h, z_d, z_s (row-major each), z_b, z_light, z_t.
    std::size_t     parameter_count() const;
    std::size_t     scene_offset() const { return 4 * z_m.size(); }
    Eigen::VectorXd pack() const;
    void            unpack( const Eigen::VectorXd &x );

    void validate() const;
};

/// Per-pixel values and image-wide parameters after the range transforms,
/// with the derivative of each w.r.t. its own latent.
struct TransformedLatents
{
    Map                   m, h, diffuse, specular;
    Map                   dm_dz, dh_dz; ///< sigmoid'; i_d and i_s are their own derivatives
    SceneParams           scene;
    std::array<double, 2> db_dz{};
    double                dt_dz = 0.0;
};

TransformedLatents transform_latents( const LatentImage &z );

/// Inverse transforms. Zero shadings and zero light weights map to `floor`
/// instead of minus infinity.
LatentImage latents_from_parameters(
    const Map &m, const Map &h, const Map &diffuse, const Map &specular, const SceneParams &scene,
    double floor = -50.0 );

double sigmoid( double z );
double logit( double p );

struct LossWeights
{
    double appearance        = 1e-3;
    double camera_prior      = 1e-4;
    double specular_sparsity = 1e-5;
    double shading           = 1e-5;

    void validate() const;
};

/// Masked sum of squared channel differences divided by the masked pixel count.
double appearance_loss( const RgbImage &recon, const RgbImage &observed, const Mask &mask );

double camera_prior_loss( std::span<const double> b );

/// Mean of |i_s| over the mask.
double specular_sparsity_loss( const Map &specular, const Mask &mask );

struct ShadingSupervision
{
    double loss  = 0.0;
    double scale = 0.0; ///< least-squares s with no intercept
};

/// Mean of (s i_d - i_d_PGT)^2 over the mask after fitting s.
ShadingSupervision shading_supervision_loss( const Map &diffuse, const Map &pseudo_gt, const Mask &mask );

/// Unweighted terms, the weighted total and the fitted shading scale (NaN
/// without a pseudo ground truth).
struct LossBreakdown
{
    double appearance        = 0.0;
    double camera_prior      = 0.0;
    double specular_sparsity = 0.0;
    double shading           = 0.0;
    double shading_scale     = 0.0;
    double total             = 0.0;
};

struct LossEvaluation
{
    LossBreakdown              terms;
    RgbImage                   reconstruction; ///< linear sRGB, zero outside the mask
    std::optional<LatentImage> gradient;
};

/// Weighted loss of latents `z` against a linear observation. The shading term
/// is dropped when `pseudo_gt` is null. Reductions use fixed pixel chunks, so
/// the result does not depend on `threads`.
LossEvaluation total_loss(
    const LatentImage &z,
    const RgbImage    &observed_linear,
    const Mask        &mask,
    const Models      &models,
    const LossWeights &weights,
    const Map         *pseudo_gt      = nullptr,
    bool               want_gradient  = true,
    int                threads        = 0 );

struct FitOptions
{
    int                        max_iterations = 2000;
    double                     step           = 0.05;
    double                     tolerance      = 1e-9; ///< relative loss decrease over `window` iterations
    int                        window         = 50;
    double                     beta1          = 0.9;
    double                     beta2          = 0.9; ///< short memory: gradients shrink by orders of magnitude during a fit
    double                     epsilon        = 1e-16; ///< loss terms are small, so this is far below Adam's usual 1e-8
    int                        max_backtracks = 40;
    bool                       freeze_scene   = false;
    std::optional<LatentImage> initial; ///< warm start; zeros otherwise
    LossWeights                weights;
    int                        log_every = 10;
    int                        threads   = 0;

    void validate() const;
};

/// One logged optimizer iteration.
struct TraceEntry
{
    int           iteration = 0;
    double        step      = 0.0;
    LossBreakdown terms;
};

/// Physical-domain result of a fit.
struct Decomposition
{
    ParameterMaps   maps;
    Mask            mask;
    SceneParams     scene;
    Eigen::MatrixXd sensitivity;
    Eigen::VectorXd illuminant;
    RenderedImage   reconstruction;
    LossBreakdown   loss;
};

struct FitResult
{
    Decomposition           decomposition;
    LatentImage             latents;
    std::vector<TraceEntry> trace;
    int                     iterations = 0;
    bool                    converged  = false;
    std::string             stop_reason;
    double                  wall_time = 0.0; ///< seconds; the only nondeterministic field
};

/// Physical maps, scene and reconstruction for latents `z`.
Decomposition decompose( const LatentImage &z, const Mask &mask, const Models &models, const RgbImage &reconstruction );

/// Fits a linear sRGB observation with Adam and monotone backtracking.
FitResult fit_linear(
    const RgbImage &observed_linear, const Mask &mask, const Models &models, const FitOptions &options = {},
    const Map *pseudo_gt = nullptr );

/// Gamma-decodes a display-encoded image, then fits it.
FitResult fit(
    const RgbImage &observed_encoded, const Mask &mask, const Models &models, const FitOptions &options = {},
    const Map *pseudo_gt = nullptr );

/// sqrt(appearance_loss); channels summed per pixel.
double appearance_rmse( const RgbImage &a, const RgbImage &b, const Mask &mask );

struct LossGradientReport
{
    int    points           = 0;
    int    checked_partials = 0;
    int    skipped_partials = 0;
    double max_relative_error = 0.0;
};

/// Central differences of total_loss over every latent of a small random
/// image, at `points` random latent points. Partials whose stencil crosses a
/// LUT cell boundary or the 7000 K daylight branch are skipped. Relative
/// errors use a floor of 1e-6 times the largest partial at that point.
LossGradientReport check_loss_gradients(
    const Models &models, int points, double step, std::uint64_t seed, int width = 3, int height = 3 );

} // namespace spectraface
