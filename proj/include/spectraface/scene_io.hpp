// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <spectraface/fitter.hpp>

#include <json.hpp>

#include <filesystem>

namespace spectraface
{

/// Scene JSON:
///
///     { "camera": { "b": [b1, b2] },
///       "illuminant": { "wA": .., "wD": .., "t": .., "wF": [12 values] } }
///
/// When `models` is given, the derived sensitivity matrix and illuminant
/// spectrum are added under "derived"; readers ignore that block.
nlohmann::json scene_to_json( const SceneParams &scene, const Models *models = nullptr );
SceneParams    scene_from_json( const nlohmann::json &j );

SceneParams read_scene( const std::filesystem::path &path );
void        write_scene( const std::filesystem::path &path, const SceneParams &scene, const Models *models = nullptr );

nlohmann::json read_json( const std::filesystem::path &path );

/// Two-space indentation and a trailing newline.
void write_json( const std::filesystem::path &path, const nlohmann::json &j );

/// Decomposition directory: melanin.pfm, haemoglobin.pfm, diffuse.pfm,
/// specular.pfm, mask.png, scene.json and reconstruction.png.
void write_decomposition( const std::filesystem::path &dir, const Decomposition &d, const Models &models );

/// Reads the maps, mask and scene back and re-renders the reconstruction.
Decomposition read_decomposition( const std::filesystem::path &dir, const Models &models );

/// Gamma-encodes a linear image for display, clamping to [0, 1].
RgbImage encode_for_export( const RgbImage &linear, const PipelineConstants &constants );

} // namespace spectraface
