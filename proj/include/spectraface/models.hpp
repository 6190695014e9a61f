// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <spectraface/camera.hpp>
#include <spectraface/illumination.hpp>
#include <spectraface/pipeline.hpp>
#include <spectraface/skin.hpp>
#include <spectraface/spectra.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace spectraface
{

/// Everything needed to build the forward model. Loadable from a JSON file:
///
///     { "data_dir": "...", "grid": {"min": 400, "max": 720, "step": 10},
///       "camera_components": 2, "skin_lut_size": 256, "raw2xyz_lut_size": 65,
///       "skin_lut": "optional/prebuilt.lut", "optics": { ...OpticalConstants overrides... } }
struct ModelConfig
{
    std::filesystem::path                data_dir = default_data_dir();
    WavelengthGrid                       grid;
    int                                  camera_components = 2;
    int                                  skin_lut_size     = 256;
    int                                  raw2xyz_lut_size  = 65;
    std::optional<std::filesystem::path> skin_lut_path;
    nlohmann::json                       optics = nlohmann::json::object();

    static ModelConfig from_json( const nlohmann::json &j, const std::filesystem::path &base_dir = {} );
    static ModelConfig load( const std::filesystem::path &path );
};

/// The immutable forward model: data, PCA, both LUTs and the pipeline constants.
struct Models
{
    WavelengthGrid         grid;
    ColorMatchingFunctions cmf;
    IlluminantBank         illuminants;
    SensitivityDataset     cameras;
    CameraPCA              camera;
    Eigen::MatrixXd        camera_jacobian; ///< d vec(S) / d b, 3D x 2
    Raw2XyzLut             raw2xyz;
    OpticalConstants       optics;
    SkinLut                skin;
    PipelineConstants      pipeline = PipelineConstants::standard();

    static Models build( const ModelConfig &config = {} );
};

} // namespace spectraface
