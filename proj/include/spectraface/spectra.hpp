// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spectraface
{

/// Uniformly spaced wavelength samples in nanometres, inclusive of both ends.
class WavelengthGrid
{
public:
    /// 400-720 nm at 10 nm, 33 samples.
    WavelengthGrid() = default;
    WavelengthGrid( double lambda_min, double lambda_max, double step );

    double lambda_min() const { return min_; }
    double lambda_max() const { return max_; }
    double step() const { return step_; }
    int    size() const { return size_; }

    double wavelength( int i ) const { return min_ + step_ * i; }

    /// Index of the node closest to `nm`; throws when it is not on the grid.
    int index_of( double nm ) const;

    bool operator==( const WavelengthGrid &other ) const = default;

private:
    double min_  = 400.0;
    double max_  = 720.0;
    double step_ = 10.0;
    int    size_ = 33;
};

/// Values sampled on a wavelength grid.
struct Spectrum
{
    WavelengthGrid  grid;
    Eigen::VectorXd values;

    Spectrum() = default;
    Spectrum( WavelengthGrid g, Eigen::VectorXd v );

    double at( double nm ) const { return values[grid.index_of( nm )]; }
    double sum() const { return values.sum(); }
};

/// A delimited text table: a wavelength column followed by labelled value
/// columns. Lines starting with `#` are comments; the first remaining line is
/// the header. Fields may be separated by commas, tabs or spaces.
class SpectralTable
{
public:
    static SpectralTable parse( std::string_view text, std::string_view source = "<memory>" );
    static SpectralTable load( const std::filesystem::path &path );

    SpectralTable() = default;
    SpectralTable(
        std::vector<double>              wavelengths,
        std::vector<std::string>         labels,
        std::vector<std::vector<double>> columns );

    const std::vector<double>      &wavelengths() const { return wavelengths_; }
    const std::vector<std::string> &labels() const { return labels_; }
    const std::vector<double>      &column( std::string_view label ) const;
    bool                            has_column( std::string_view label ) const;

private:
    std::vector<double>              wavelengths_;
    std::vector<std::string>         labels_;
    std::vector<std::vector<double>> columns_;
};

/// Linear interpolation of one table column onto the grid. Extrapolation is an
/// error.
Spectrum resample( const SpectralTable &table, std::string_view column, const WavelengthGrid &grid );

/// CIE 1931 2-degree observer on the grid, columns x-bar, y-bar, z-bar.
struct ColorMatchingFunctions
{
    WavelengthGrid  grid;
    Eigen::MatrixXd matrix; // D x 3
};

/// Reads a table with columns `x`, `y`, `z` (or the first three value columns).
ColorMatchingFunctions load_cmf( const std::filesystem::path &path, const WavelengthGrid &grid );

/// `$SPECTRAFACE_DATA` when set, otherwise the data directory of the source tree.
std::filesystem::path default_data_dir();

} // namespace spectraface
