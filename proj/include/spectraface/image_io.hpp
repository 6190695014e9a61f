// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <spectraface/image.hpp>

#include <filesystem>

namespace spectraface
{

/// PFM: "Pf" (1 channel) or "PF" (3 channels), scale -1 (little-endian),
/// rows stored bottom to top. Values pass through float32.
Map      read_map_pfm( const std::filesystem::path &path );
void     write_map_pfm( const std::filesystem::path &path, const Map &map );
RgbImage read_rgb_pfm( const std::filesystem::path &path );
void     write_rgb_pfm( const std::filesystem::path &path, const RgbImage &image );

/// 8- or 16-bit PNG as RGB in [0, 1]. Grey, palette and alpha inputs are
/// expanded; alpha is dropped.
RgbImage read_png_rgb( const std::filesystem::path &path );

/// Writes RGB values clamped to [0, 1] with round-to-nearest quantization.
void write_png_rgb( const std::filesystem::path &path, const RgbImage &image, int bit_depth = 8 );

/// Greyscale PNG thresholded at 128 (8-bit scale); colour inputs use the first channel.
Mask read_mask_png( const std::filesystem::path &path );
void write_mask_png( const std::filesystem::path &path, const Mask &mask );

/// PNG if the extension is .png, PFM otherwise.
RgbImage read_rgb_image( const std::filesystem::path &path );

} // namespace spectraface
