// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <spectraface/fitter.hpp>

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spectraface
{

// ---------------------------------------------------------------------------
// Edits

struct EditedImage
{
    ParameterMaps maps;
    RenderedImage linear;
    RgbImage      encoded; ///< display-encoded, clamped to [0, 1]
};

/// Replaces the specular map by a constant and re-renders.
EditedImage edit_specular_remove( const Decomposition &d, const Models &models, double constant = 0.0 );

/// m' = clamp(m + delta, 0, 1) in normalized melanin coordinates.
EditedImage edit_melanin_shift( const Decomposition &d, const Models &models, double delta );

/// f_blood' = clamp(factor * f_blood) to the blood range; factor >= 0.
EditedImage edit_haemoglobin_scale( const Decomposition &d, const Models &models, double factor );

/// Rec. 709 luminance of a linear sRGB triple.
double luminance( const Eigen::Vector3d &rgb );

/// True when every masked value lies in its physical range (shadings >= 0).
bool maps_in_range( const ParameterMaps &maps, const Mask &mask, const BioRanges &ranges );

// ---------------------------------------------------------------------------
// Synthetic cases

struct SynthOptions
{
    int    width        = 32;
    int    height       = 32;
    double latent_range = 2.5; ///< z_m, z_h uniform in [-latent_range, latent_range]
    double diffuse_min  = 0.3;
    double diffuse_max  = 1.0;
    double max_channel  = 0.9;  ///< largest linear value of a rendered pixel
    double min_channel  = 2e-3; ///< pixels darker than this in any channel are redrawn

    void validate() const;
};

/// Forward render from random in-range maps and scene. Specular shading is
/// zero and every masked pixel lies inside (0, 1), so display encoding is
/// lossless up to floating point.
struct SyntheticCase
{
    ParameterMaps truth;
    Map           m, h; ///< normalized chromophore coordinates
    SceneParams   scene;
    Mask          mask; ///< centred ellipse
    RgbImage      linear;
    RgbImage      encoded;
    RgbImage      albedo_linear; ///< i_d = 1, i_s = 0
    LatentImage   latents;       ///< latents reproducing the truth
};

SyntheticCase make_synthetic_case( const Models &models, const SynthOptions &options, std::uint64_t seed );

/// Case directory layout: input.png (16-bit), input.pfm (same values,
/// lossless), mask.png, gt_melanin.pfm, gt_haemoglobin.pfm, gt_diffuse.pfm,
/// gt_specular.pfm, gt_albedo.png, gt_albedo.pfm, shading_pgt.pfm and
/// gt_scene.json.
void write_case( const std::filesystem::path &dir, const SyntheticCase &c, const Models &models );

/// Writes `count` cases named case_000, case_001, ... with seeds seed, seed+1, ...
std::vector<std::filesystem::path> write_synthetic_suite(
    const std::filesystem::path &root, int count, const Models &models, const SynthOptions &options,
    std::uint64_t seed );

// ---------------------------------------------------------------------------
// Bench

inline constexpr std::array<std::string_view, 6> kBenchColumns{
    "Diffuse", "Specular", "Albedo", "Melanin", "Haemoglobin", "Reconstruction" };

struct BenchCase
{
    std::string             name;
    std::filesystem::path   dir;
    std::filesystem::path   input_path;
    RgbImage                input; ///< display-encoded
    Mask                    mask;
    std::optional<Map>      gt_melanin, gt_haemoglobin, gt_diffuse, gt_specular, shading_pgt;
    std::optional<RgbImage> gt_albedo; ///< display-encoded
    std::optional<SceneParams> gt_scene;
};

/// Prefers the lossless input.pfm / gt_albedo.pfm over the PNGs when present.
BenchCase load_case( const std::filesystem::path &dir );

/// Every subdirectory of `root` holding an input image, in name order.
std::vector<BenchCase> load_cases( const std::filesystem::path &root );

struct BenchOptions
{
    FitOptions                           fit;
    bool                                 warm_start    = false; ///< start from the ground-truth maps and scene
    bool                                 use_shading_pgt = true;
    int                                  threads       = 0;
    std::optional<std::filesystem::path> output_dir; ///< per-case decomposition and reconstruction.pfm
};

struct CaseScores
{
    std::string                        name;
    std::array<std::optional<double>, 6> rmse; ///< kBenchColumns order; empty when ground truth is missing
    double                             reconstruction_linear = 0.0;
    double                             diffuse_scale         = 1.0;
    int                                iterations            = 0;
    bool                               converged             = false;
    LossBreakdown                      loss;
};

struct BenchReport
{
    std::vector<CaseScores>              cases;
    std::array<std::optional<double>, 6> mean;
};

/// RMSE of a fit against a case's ground truth. Diffuse and specular maps are
/// scaled by the least-squares factor that best maps the fitted diffuse map
/// onto the ground truth; albedo and reconstruction are compared in
/// display-encoded values rounded to float32; melanin and haemoglobin in
/// volume fractions.
CaseScores score_case( const BenchCase &c, const Decomposition &d, const Models &models );

/// The display-encoded reconstruction exactly as scored, float32-rounded.
RgbImage scored_reconstruction( const Decomposition &d, const Models &models );

BenchReport bench( const std::vector<BenchCase> &cases, const Models &models, const BenchOptions &options );

nlohmann::json bench_report_json( const BenchReport &report );
nlohmann::json fit_report_json( const FitResult &result );

} // namespace spectraface
