// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/skin.hpp>
#include <spectraface/bilinear.hpp>
#include <spectraface/error.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

static_assert( std::endian::native == std::endian::little, "LUT files are written in host order" );

namespace spectraface
{

OpticalConstants OpticalConstants::load( const std::filesystem::path &data_dir, const WavelengthGrid &grid )
{
    const auto       table = SpectralTable::load( data_dir / "hemoglobin.csv" );
    OpticalConstants c;
    c.extinction_oxy   = resample( table, "HbO2", grid );
    c.extinction_deoxy = resample( table, "Hb", grid );
    c.validate( grid );
    return c;
}

void OpticalConstants::apply_overrides( const nlohmann::json &config )
{
    const auto take = [&]( const nlohmann::json &j, const char *key, double &field ) {
        if ( j.contains( key ) )
            field = j.at( key ).get<double>();
    };
    take( config, "melanin_scale", melanin_scale );
    take( config, "melanin_exponent", melanin_exponent );
    take( config, "baseline_offset", baseline_offset );
    take( config, "baseline_amplitude", baseline_amplitude );
    take( config, "baseline_center", baseline_center );
    take( config, "baseline_width", baseline_width );
    take( config, "scattering_scale", scattering_scale );
    take( config, "scattering_reference", scattering_reference );
    take( config, "scattering_exponent", scattering_exponent );
    take( config, "oxygenation", oxygenation );
    take( config, "haemoglobin_concentration", haemoglobin_concentration );
    take( config, "haemoglobin_molar_mass", haemoglobin_molar_mass );
    take( config, "epidermis_thickness", epidermis_thickness );
    if ( config.contains( "ranges" ) )
    {
        const auto &r = config.at( "ranges" );
        take( r, "melanin_min", ranges.melanin_min );
        take( r, "melanin_max", ranges.melanin_max );
        take( r, "blood_min", ranges.blood_min );
        take( r, "blood_max", ranges.blood_max );
    }
}

void OpticalConstants::validate( const WavelengthGrid &grid ) const
{
    if ( !( epidermis_thickness > 0.0 ) )
        throw ValidationError( "epidermis thickness must be positive" );
    if ( !( oxygenation >= 0.0 && oxygenation <= 1.0 ) )
        throw ValidationError( "blood oxygenation must lie in [0, 1]" );
    if ( !( haemoglobin_concentration >= 0.0 && haemoglobin_molar_mass > 0.0 ) )
        throw ValidationError( "haemoglobin concentration/molar mass must be positive" );
    if ( !( ranges.melanin_min < ranges.melanin_max && ranges.blood_min < ranges.blood_max &&
            ranges.melanin_min >= 0.0 && ranges.melanin_max <= 1.0 && ranges.blood_min >= 0.0 &&
            ranges.blood_max <= 1.0 ) )
        throw ValidationError( "chromophore ranges must be increasing volume fractions" );
    if ( extinction_oxy.grid != grid || extinction_deoxy.grid != grid )
        throw ValidationError( "haemoglobin extinction spectra are not on the model grid" );
    if ( ( extinction_oxy.values.array() < 0.0 ).any() || ( extinction_deoxy.values.array() < 0.0 ).any() )
        throw ValidationError( "haemoglobin extinction must be nonnegative" );
}

namespace
{

Eigen::VectorXd wavelengths( const WavelengthGrid &grid )
{
    return Eigen::VectorXd::LinSpaced( grid.size(), grid.lambda_min(), grid.lambda_max() );
}

void check_range( double f, double lo, double hi, const char *what )
{
    if ( !std::isfinite( f ) || f < lo - 1e-12 || f > hi + 1e-12 )
        throw ValidationError( std::string( what ) + " volume fraction outside [" + std::to_string( lo ) +
                               ", " + std::to_string( hi ) + "]" );
}

} // namespace

Eigen::VectorXd melanin_absorption( const OpticalConstants &c, const WavelengthGrid &grid )
{
    return c.melanin_scale * wavelengths( grid ).array().pow( -c.melanin_exponent );
}

Eigen::VectorXd baseline_absorption( const OpticalConstants &c, const WavelengthGrid &grid )
{
    return c.baseline_offset +
           c.baseline_amplitude *
               ( -( wavelengths( grid ).array() - c.baseline_center ) / c.baseline_width ).exp();
}

Eigen::VectorXd blood_absorption( const OpticalConstants &c, const WavelengthGrid &grid )
{
    // mu_a = ln(10) * epsilon * concentration / molar mass
    if ( c.extinction_oxy.values.size() != grid.size() || c.extinction_deoxy.values.size() != grid.size() )
        throw ValidationError( "haemoglobin extinction spectra do not match the wavelength grid" );
    const double molar = c.haemoglobin_concentration / c.haemoglobin_molar_mass;
    return std::log( 10.0 ) * molar *
           ( c.oxygenation * c.extinction_oxy.values + ( 1.0 - c.oxygenation ) * c.extinction_deoxy.values );
}

Eigen::VectorXd reduced_scattering( const OpticalConstants &c, const WavelengthGrid &grid )
{
    return c.scattering_scale * ( wavelengths( grid ).array() / c.scattering_reference ).pow( -c.scattering_exponent );
}

double kubelka_munk_reflectance( double k_over_s )
{
    // 1 + x - sqrt(x^2 + 2x), written to avoid cancellation for large x.
    return 1.0 / ( 1.0 + k_over_s + std::sqrt( k_over_s * k_over_s + 2.0 * k_over_s ) );
}

Spectrum epidermis_transmittance( double f_mel, const OpticalConstants &c, const WavelengthGrid &grid )
{
    check_range( f_mel, c.ranges.melanin_min, c.ranges.melanin_max, "melanin" );
    const Eigen::VectorXd mu = f_mel * melanin_absorption( c, grid ) + ( 1.0 - f_mel ) * baseline_absorption( c, grid );
    return Spectrum( grid, ( -mu * c.epidermis_thickness ).array().exp().matrix() );
}

Spectrum dermis_reflectance( double f_blood, const OpticalConstants &c, const WavelengthGrid &grid )
{
    check_range( f_blood, c.ranges.blood_min, c.ranges.blood_max, "blood" );
    const Eigen::VectorXd k = f_blood * blood_absorption( c, grid ) + ( 1.0 - f_blood ) * baseline_absorption( c, grid );
    const Eigen::VectorXd s = reduced_scattering( c, grid );
    if ( !( s.array() > 0.0 ).all() )
        throw ValidationError( "dermal scattering must be positive" );

    Eigen::VectorXd r( grid.size() );
    for ( int i = 0; i < grid.size(); ++i )
        r[i] = kubelka_munk_reflectance( k[i] / s[i] );
    return Spectrum( grid, std::move( r ) );
}

Spectrum diffuse_reflectance( const BioParams &p, const OpticalConstants &c, const WavelengthGrid &grid )
{
    const auto t = epidermis_transmittance( p.f_mel, c, grid );
    const auto r = dermis_reflectance( p.f_blood, c, grid );
    return Spectrum( grid, t.values.cwiseAbs2().cwiseProduct( r.values ) );
}

BioParams physical_from_normalized( double m, double h, const BioRanges &r )
{
    return { std::lerp( r.melanin_min, r.melanin_max, m ), std::lerp( r.blood_min, r.blood_max, h ) };
}

double normalized_melanin( double f_mel, const BioRanges &r )
{
    return ( f_mel - r.melanin_min ) / ( r.melanin_max - r.melanin_min );
}

double normalized_blood( double f_blood, const BioRanges &r )
{
    return ( f_blood - r.blood_min ) / ( r.blood_max - r.blood_min );
}

SkinLut SkinLut::build( const OpticalConstants &c, const WavelengthGrid &grid, int g )
{
    if ( g < 2 )
        throw ValidationError( "skin LUT needs at least 2 nodes per axis" );
    c.validate( grid );

    SkinLut lut;
    lut.g_      = g;
    lut.grid_   = grid;
    lut.ranges_ = c.ranges;
    const auto d = static_cast<std::size_t>( grid.size() );
    lut.data_.resize( static_cast<std::size_t>( g ) * g * d );

    // T^2 depends only on i, R_dermis only on j.
    std::vector<Eigen::VectorXd> t2( static_cast<std::size_t>( g ) ), rd( static_cast<std::size_t>( g ) );
    for ( int i = 0; i < g; ++i )
    {
        const auto p = physical_from_normalized( static_cast<double>( i ) / ( g - 1 ), static_cast<double>( i ) / ( g - 1 ), c.ranges );
        t2[static_cast<std::size_t>( i )] = epidermis_transmittance( p.f_mel, c, grid ).values.cwiseAbs2();
        rd[static_cast<std::size_t>( i )] = dermis_reflectance( p.f_blood, c, grid ).values;
    }
    for ( int i = 0; i < g; ++i )
        for ( int j = 0; j < g; ++j )
        {
            Eigen::Map<Eigen::VectorXd> out( lut.data_.data() + ( static_cast<std::size_t>( i ) * g + j ) * d, grid.size() );
            out = t2[static_cast<std::size_t>( i )].cwiseProduct( rd[static_cast<std::size_t>( j )] );
        }
    return lut;
}

Eigen::Map<const Eigen::VectorXd> SkinLut::node( int i, int j ) const
{
    const auto d = static_cast<std::size_t>( grid_.size() );
    return Eigen::Map<const Eigen::VectorXd>( data_.data() + ( static_cast<std::size_t>( i ) * g_ + j ) * d, grid_.size() );
}

SkinLut::Sample SkinLut::sample( double m, double h ) const
{
    Sample s;
    sample( m, h, s );
    return s;
}

void SkinLut::sample( double m, double h, Sample &out ) const
{
    if ( !( m >= 0.0 && m <= 1.0 && h >= 0.0 && h <= 1.0 ) )
        throw ValidationError( "skin LUT query outside [0, 1]^2" );
    const auto a = locate_on_axis( m, 0.0, 1.0, g_ );
    const auto b = locate_on_axis( h, 0.0, 1.0, g_ );
    bilinear_blend( [this]( int i, int j ) { return node( i, j ); }, a, b, out.r, out.d_m, out.d_h );
}

namespace
{

template <typename T> void put( std::ofstream &out, T v )
{
    out.write( reinterpret_cast<const char *>( &v ), sizeof( T ) );
}

template <typename T> T get( std::ifstream &in, const std::filesystem::path &path )
{
    T v{};
    if ( !in.read( reinterpret_cast<char *>( &v ), sizeof( T ) ) )
        throw ValidationError( path.string() + ": truncated skin LUT" );
    return v;
}

constexpr char kLutMagic[8] = { 'S', 'F', 'S', 'K', 'N', 'L', 'U', 'T' };

} // namespace

void SkinLut::save( const std::filesystem::path &path ) const
{
    std::ofstream out( path, std::ios::binary );
    if ( !out )
        throw Error( "cannot write " + path.string() );
    out.write( kLutMagic, sizeof( kLutMagic ) );
    put<std::uint32_t>( out, 1 );
    put<std::uint32_t>( out, static_cast<std::uint32_t>( g_ ) );
    put<std::uint32_t>( out, static_cast<std::uint32_t>( grid_.size() ) );
    put( out, grid_.lambda_min() );
    put( out, grid_.lambda_max() );
    put( out, grid_.step() );
    put( out, ranges_.melanin_min );
    put( out, ranges_.melanin_max );
    put( out, ranges_.blood_min );
    put( out, ranges_.blood_max );
    std::vector<float> payload( data_.begin(), data_.end() );
    out.write( reinterpret_cast<const char *>( payload.data() ),
               static_cast<std::streamsize>( payload.size() * sizeof( float ) ) );
    if ( !out )
        throw Error( "failed writing " + path.string() );
}

SkinLut SkinLut::load( const std::filesystem::path &path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw ValidationError( "cannot open skin LUT " + path.string() );
    char magic[8];
    if ( !in.read( magic, sizeof( magic ) ) || std::memcmp( magic, kLutMagic, sizeof( magic ) ) != 0 )
        throw ValidationError( path.string() + ": not a skin LUT file" );
    if ( get<std::uint32_t>( in, path ) != 1 )
        throw ValidationError( path.string() + ": unsupported skin LUT version" );

    SkinLut lut;
    lut.g_           = static_cast<int>( get<std::uint32_t>( in, path ) );
    const auto d     = get<std::uint32_t>( in, path );
    const auto lo    = get<double>( in, path );
    const auto hi    = get<double>( in, path );
    const auto step  = get<double>( in, path );
    lut.grid_        = WavelengthGrid( lo, hi, step );
    lut.ranges_.melanin_min = get<double>( in, path );
    lut.ranges_.melanin_max = get<double>( in, path );
    lut.ranges_.blood_min   = get<double>( in, path );
    lut.ranges_.blood_max   = get<double>( in, path );
    if ( lut.g_ < 2 || static_cast<int>( d ) != lut.grid_.size() )
        throw ValidationError( path.string() + ": inconsistent skin LUT header" );

    std::vector<float> payload( static_cast<std::size_t>( lut.g_ ) * lut.g_ * d );
    if ( !in.read( reinterpret_cast<char *>( payload.data() ),
                   static_cast<std::streamsize>( payload.size() * sizeof( float ) ) ) )
        throw ValidationError( path.string() + ": truncated skin LUT payload" );
    lut.data_.assign( payload.begin(), payload.end() );
    return lut;
}

} // namespace spectraface
