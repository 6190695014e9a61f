// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/illumination.hpp>
#include <spectraface/error.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace spectraface
{

DaylightChromaticity daylight_chromaticity( double cct )
{
    if ( !( cct >= 4000.0 && cct <= 25000.0 ) )
        throw ValidationError( "daylight CCT must lie in [4000, 25000] K" );

    // x_D = c0 + c1/T + c2/T^2 + c3/T^3, split at 7000 K.
    const bool   low = cct <= 7000.0;
    const double c0  = low ? 0.244063 : 0.237040;
    const double c1  = low ? 0.09911e3 : 0.24748e3;
    const double c2  = low ? 2.9678e6 : 1.9018e6;
    const double c3  = low ? -4.6070e9 : -2.0064e9;

    const double inv = 1.0 / cct;
    const double x   = c0 + inv * ( c1 + inv * ( c2 + inv * c3 ) );
    const double dx  = -inv * inv * ( c1 + inv * ( 2.0 * c2 + inv * 3.0 * c3 ) );
    const double y   = -3.0 * x * x + 2.870 * x - 0.275;
    const double dy  = ( -6.0 * x + 2.870 ) * dx;
    return { x, y, dx, dy };
}

IlluminantBank::IlluminantBank(
    WavelengthGrid                  grid,
    Eigen::VectorXd                 a,
    Eigen::VectorXd                 s0,
    Eigen::VectorXd                 s1,
    Eigen::VectorXd                 s2,
    std::array<Eigen::VectorXd, 12> fluorescent )
    : grid_( grid )
    , a_( std::move( a ) )
    , s0_( std::move( s0 ) )
    , s1_( std::move( s1 ) )
    , s2_( std::move( s2 ) )
    , f_( std::move( fluorescent ) )
{
    const auto normalize = [&]( Eigen::VectorXd &v, const std::string &name ) {
        if ( v.size() != grid_.size() )
            throw ValidationError( name + " has the wrong number of samples" );
        v = v.cwiseMax( 0.0 );
        const double s = v.sum();
        if ( !( s > 0.0 ) )
            throw ValidationError( name + " has no positive energy on the grid" );
        v /= s;
    };
    normalize( a_, "illuminant A" );
    for ( int k = 0; k < 12; ++k )
        normalize( f_[static_cast<std::size_t>( k )], "illuminant F" + std::to_string( k + 1 ) );
    for ( const auto *s: { &s0_, &s1_, &s2_ } )
        if ( s->size() != grid_.size() )
            throw ValidationError( "daylight basis has the wrong number of samples" );
}

IlluminantBank IlluminantBank::load( const std::filesystem::path &data_dir, const WavelengthGrid &grid )
{
    const auto a_table = SpectralTable::load( data_dir / "cie_a.csv" );
    const auto d_table = SpectralTable::load( data_dir / "cie_d_components.csv" );
    const auto f_table = SpectralTable::load( data_dir / "cie_f.csv" );

    std::array<Eigen::VectorXd, 12> f;
    for ( int k = 0; k < 12; ++k )
        f[static_cast<std::size_t>( k )] =
            resample( f_table, "F" + std::to_string( k + 1 ), grid ).values;

    return IlluminantBank(
        grid,
        resample( a_table, a_table.labels().front(), grid ).values,
        resample( d_table, "S0", grid ).values,
        resample( d_table, "S1", grid ).values,
        resample( d_table, "S2", grid ).values,
        std::move( f ) );
}

DaylightSpd daylight_spd( double t, const IlluminantBank &bank )
{
    if ( !std::isfinite( t ) || t < kMinTemperatureParam || t > kMaxTemperatureParam )
        throw ValidationError( "daylight parameter t must lie in [1, 22]" );

    const double cct = cct_from_temperature_param( t );
    const auto   xy  = daylight_chromaticity( cct );

    const double m   = 0.0241 + 0.2562 * xy.x - 0.7341 * xy.y;
    const double n1  = -1.3515 - 1.7703 * xy.x + 5.9114 * xy.y;
    const double n2  = 0.0300 - 31.4424 * xy.x + 30.0717 * xy.y;
    const double dm  = 0.2562 * xy.dx_dcct - 0.7341 * xy.dy_dcct;
    const double dn1 = -1.7703 * xy.dx_dcct + 5.9114 * xy.dy_dcct;
    const double dn2 = -31.4424 * xy.dx_dcct + 30.0717 * xy.dy_dcct;

    const double m1  = n1 / m;
    const double m2  = n2 / m;
    const double dm1 = ( dn1 * m - n1 * dm ) / ( m * m );
    const double dm2 = ( dn2 * m - n2 * dm ) / ( m * m );

    const Eigen::VectorXd s  = bank.s0() + m1 * bank.s1() + m2 * bank.s2();
    const Eigen::VectorXd ds = dm1 * bank.s1() + dm2 * bank.s2();
    const double          total  = s.sum();
    const double          dtotal = ds.sum();
    if ( !( total > 0.0 ) )
        throw NumericalError( "daylight reconstruction has no positive energy" );

    // dCCT/dt = 1000
    DaylightSpd out;
    out.spd = s / total;
    out.d_t = 1000.0 * ( ds * total - s * dtotal ) / ( total * total );
    return out;
}

void IlluminantWeights::validate() const
{
    double sum = 0.0;
    for ( double v: w )
    {
        if ( !std::isfinite( v ) || v < 0.0 )
            throw ValidationError( "illuminant weights must be finite and nonnegative" );
        sum += v;
    }
    if ( std::abs( sum - 1.0 ) > 1e-9 )
        throw ValidationError( "illuminant weights must sum to 1" );
    if ( !std::isfinite( t ) || t < kMinTemperatureParam || t > kMaxTemperatureParam )
        throw ValidationError( "daylight parameter t must lie in [1, 22]" );
}

std::array<double, kIlluminantCount> softmax_weights( std::span<const double, kIlluminantCount> logits )
{
    for ( double z: logits )
        if ( !std::isfinite( z ) )
            throw ValidationError( "illuminant logits must be finite" );

    const double top = *std::max_element( logits.begin(), logits.end() );
    std::array<double, kIlluminantCount> w{};
    double                               sum = 0.0;
    for ( int i = 0; i < kIlluminantCount; ++i )
    {
        w[i] = std::exp( logits[i] - top );
        sum += w[i];
    }
    for ( double &v: w )
        v /= sum;
    return w;
}

Eigen::Matrix<double, kIlluminantCount, kIlluminantCount>
softmax_jacobian( const std::array<double, kIlluminantCount> &w )
{
    Eigen::Map<const Eigen::Matrix<double, kIlluminantCount, 1>> v( w.data() );
    Eigen::Matrix<double, kIlluminantCount, kIlluminantCount>  j = -v * v.transpose();
    j.diagonal() += v;
    return j;
}

MixedIlluminant mix_illuminant( const IlluminantWeights &weights, const IlluminantBank &bank )
{
    weights.validate();
    const int  d        = bank.grid().size();
    const auto daylight = daylight_spd( weights.t, bank );

    MixedIlluminant out;
    out.d_weights.resize( d, kIlluminantCount );
    out.d_weights.col( kIlluminantA ) = bank.a();
    out.d_weights.col( kIlluminantD ) = daylight.spd;
    for ( int k = 0; k < 12; ++k )
        out.d_weights.col( kFirstFluorescent + k ) = bank.fluorescent( k );

    Eigen::Map<const Eigen::Matrix<double, kIlluminantCount, 1>> w( weights.w.data() );
    out.spd      = out.d_weights * w;
    out.d_logits = out.d_weights * softmax_jacobian( weights.w );
    out.d_t      = weights.w[kIlluminantD] * daylight.d_t;
    return out;
}

} // namespace spectraface
