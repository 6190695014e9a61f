// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <spectraface/spectra.hpp>

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace spectraface
{

/// Physiological ranges of the two skin chromophores (volume fractions).
struct BioRanges
{
    double melanin_min = 0.013;
    double melanin_max = 0.43;
    double blood_min   = 0.02;
    double blood_max   = 0.07;
};

/// Epidermal melanosome and dermal blood volume fractions.
struct BioParams
{
    double f_mel   = 0.2215;
    double f_blood = 0.045;
};

/// Everything the two-layer model needs besides the two chromophore
/// fractions. Absorption and scattering are in cm^-1, wavelengths in nm.
struct OpticalConstants
{
    // mu_a,mel = melanin_scale * lambda^-melanin_exponent
    double melanin_scale    = 6.6e11;
    double melanin_exponent = 3.33;

    // mu_a,base = baseline_offset + baseline_amplitude * exp(-(lambda - baseline_center) / baseline_width)
    double baseline_offset    = 0.0244;
    double baseline_amplitude = 8.53;
    double baseline_center    = 154.0;
    double baseline_width     = 66.2;

    // mu_s' = scattering_scale * (lambda / scattering_reference)^-scattering_exponent
    double scattering_scale     = 46.0;
    double scattering_reference = 500.0;
    double scattering_exponent  = 1.421;

    double oxygenation              = 0.75;   ///< HbO2 fraction of total haemoglobin
    double haemoglobin_concentration = 150.0;  ///< g/L in whole blood
    double haemoglobin_molar_mass   = 64500.0; ///< g/mol
    double epidermis_thickness      = 0.01;    ///< cm

    BioRanges ranges;

    /// Molar extinction (cm^-1 / M, base-10) of oxy- and deoxy-haemoglobin on the grid.
    Spectrum extinction_oxy;
    Spectrum extinction_deoxy;

    /// Defaults with extinction spectra read from `data_dir/hemoglobin.csv`.
    static OpticalConstants load( const std::filesystem::path &data_dir, const WavelengthGrid &grid );

    /// Overrides scalar fields present in `config` (same names as the members,
    /// ranges under "ranges").
    void apply_overrides( const nlohmann::json &config );

    void validate( const WavelengthGrid &grid ) const;
};

Eigen::VectorXd melanin_absorption( const OpticalConstants &c, const WavelengthGrid &grid );
Eigen::VectorXd baseline_absorption( const OpticalConstants &c, const WavelengthGrid &grid );
Eigen::VectorXd blood_absorption( const OpticalConstants &c, const WavelengthGrid &grid );
Eigen::VectorXd reduced_scattering( const OpticalConstants &c, const WavelengthGrid &grid );

/// Semi-infinite Kubelka-Munk reflectance for a ratio K/S >= 0.
double kubelka_munk_reflectance( double k_over_s );

/// Lambert-Beer transmission through the epidermis.
Spectrum epidermis_transmittance( double f_mel, const OpticalConstants &c, const WavelengthGrid &grid );

/// Kubelka-Munk reflectance of the dermis.
Spectrum dermis_reflectance( double f_blood, const OpticalConstants &c, const WavelengthGrid &grid );

/// r = T_epidermis^2 * R_dermis.
Spectrum diffuse_reflectance( const BioParams &p, const OpticalConstants &c, const WavelengthGrid &grid );

/// Normalized chromophore coordinates (m, h) in [0, 1]^2 <-> volume fractions.
BioParams physical_from_normalized( double m, double h, const BioRanges &r );
double    normalized_melanin( double f_mel, const BioRanges &r );
double    normalized_blood( double f_blood, const BioRanges &r );

/// G x G table of diffuse reflectance over normalized (m, h).
class SkinLut
{
public:
    struct Sample
    {
        Eigen::VectorXd r, d_m, d_h;
    };

    static SkinLut build( const OpticalConstants &c, const WavelengthGrid &grid, int g = 256 );

    /// Binary format, little-endian: magic "SFSKNLUT", u32 version (1), u32 G,
    /// u32 D, f64 lambda_min, lambda_max, step, f64 melanin_min, melanin_max,
    /// blood_min, blood_max, then G*G*D float32 in (m, h, lambda) row-major order.
    void           save( const std::filesystem::path &path ) const;
    static SkinLut load( const std::filesystem::path &path );

    int                   size() const { return g_; }
    const WavelengthGrid &grid() const { return grid_; }
    const BioRanges      &ranges() const { return ranges_; }

    /// Node (i, j): f_mel at i/(G-1), f_blood at j/(G-1) of their ranges.
    Eigen::Map<const Eigen::VectorXd> node( int i, int j ) const;

    /// Bilinear interpolation with analytic partials; m, h must be in [0, 1].
    Sample sample( double m, double h ) const;
    void   sample( double m, double h, Sample &out ) const;

private:
    int                 g_ = 0;
    WavelengthGrid      grid_;
    BioRanges           ranges_;
    std::vector<double> data_;
};

} // namespace spectraface
