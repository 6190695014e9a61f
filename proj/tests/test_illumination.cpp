// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include "test_support.hpp"

#include <spectraface/error.hpp>
#include <spectraface/illumination.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace spectraface;
using spectraface::testing::models;
using spectraface::testing::uniform;

namespace
{

// CIE daylight chromaticity polynomial, evaluated term by term with std::pow.
double oracle_x_d( double cct )
{
    if ( cct <= 7000.0 )
        return -4.6070e9 / std::pow( cct, 3 ) + 2.9678e6 / std::pow( cct, 2 ) + 0.09911e3 / cct + 0.244063;
    return -2.0064e9 / std::pow( cct, 3 ) + 1.9018e6 / std::pow( cct, 2 ) + 0.24748e3 / cct + 0.237040;
}

// Unit-sum CIE daylight SPD from S0, S1, S2.
Eigen::VectorXd oracle_daylight( double cct, const IlluminantBank &bank )
{
    const double x  = oracle_x_d( cct );
    const double y  = -3.0 * x * x + 2.870 * x - 0.275;
    const double m  = 0.0241 + 0.2562 * x - 0.7341 * y;
    const double m1 = ( -1.3515 - 1.7703 * x + 5.9114 * y ) / m;
    const double m2 = ( 0.0300 - 31.4424 * x + 30.0717 * y ) / m;
    Eigen::VectorXd s = bank.s0() + m1 * bank.s1() + m2 * bank.s2();
    return s / s.sum();
}

std::array<double, kIlluminantCount> random_logits( std::mt19937_64 &rng )
{
    std::array<double, kIlluminantCount> z;
    for ( auto &v: z )
        v = uniform( rng, -5.0, 5.0 );
    return z;
}

} // namespace

TEST( Temperature, AffineCctEndpoints )
{
    EXPECT_DOUBLE_EQ( cct_from_temperature_param( 1.0 ), 4000.0 );
    EXPECT_DOUBLE_EQ( cct_from_temperature_param( 22.0 ), 25000.0 );
}

TEST( Daylight, ChromaticityMatchesPolynomialOracle )
{
    for ( double cct: { 4000.0, 5000.0, 6500.0, 7000.0, 7001.0, 10000.0, 25000.0 } )
    {
        const auto c = daylight_chromaticity( cct );
        EXPECT_NEAR( c.x, oracle_x_d( cct ), 1e-12 ) << cct;
        const double x = oracle_x_d( cct );
        EXPECT_NEAR( c.y, -3.0 * x * x + 2.870 * x - 0.275, 1e-12 ) << cct;
    }
    // 6500 K sits near the familiar D65 white point.
    EXPECT_NEAR( daylight_chromaticity( 6500.0 ).x, 0.3123, 1e-3 );
    EXPECT_THROW( daylight_chromaticity( 3999.0 ), ValidationError );
}

TEST( Daylight, ChromaticityDerivative )
{
    const double h = 1e-3;
    for ( double cct: { 4500.0, 6000.0, 9000.0, 20000.0 } )
    {
        const auto c  = daylight_chromaticity( cct );
        const double fd = ( oracle_x_d( cct + h ) - oracle_x_d( cct - h ) ) / ( 2 * h );
        EXPECT_NEAR( c.dx_dcct, fd, 1e-6 * std::abs( fd ) );
    }
}

TEST( Daylight, SpdMatchesOracle )
{
    const auto &bank = models().illuminants;
    for ( double t: { 1.0, 3.5, 4.0, 11.5, 22.0 } )
    {
        const auto d = daylight_spd( t, bank );
        const auto o = oracle_daylight( cct_from_temperature_param( t ), bank );
        EXPECT_LT( ( d.spd - o ).cwiseAbs().maxCoeff(), 1e-12 ) << t;
        EXPECT_NEAR( d.spd.sum(), 1.0, 1e-12 );
    }
}

TEST( Daylight, TemperatureDerivativeMatchesFiniteDifferences )
{
    const auto     &bank = models().illuminants;
    const double    h    = 1e-4;
    std::mt19937_64 rng( 11 );
    for ( int k = 0; k < 200; ++k )
    {
        const double t = uniform( rng, 1.01, 21.99 );
        if ( std::abs( t - 4.0 ) < 2 * h )
            continue; // 7000 K branch
        const auto            d  = daylight_spd( t, bank );
        const Eigen::VectorXd fd = ( oracle_daylight( cct_from_temperature_param( t + h ), bank ) -
                                     oracle_daylight( cct_from_temperature_param( t - h ), bank ) ) /
                                   ( 2 * h );
        for ( int i = 0; i < fd.size(); ++i )
        {
            const double scale = std::max( { std::abs( fd[i] ), std::abs( d.d_t[i] ), 1e-9 } );
            EXPECT_LT( std::abs( d.d_t[i] - fd[i] ) / scale, 1e-3 ) << "t=" << t << " i=" << i;
        }
    }
}

TEST( Softmax, ClosedFormCases )
{
    std::array<double, kIlluminantCount> z{};
    for ( double w: softmax_weights( z ) )
        EXPECT_DOUBLE_EQ( w, 1.0 / 14.0 );

    z[0]         = std::log( 2.0 );
    const auto w = softmax_weights( z );
    EXPECT_NEAR( w[0], 2.0 / 15.0, 1e-15 );
    for ( int k = 1; k < kIlluminantCount; ++k )
        EXPECT_NEAR( w[static_cast<std::size_t>( k )], 1.0 / 15.0, 1e-15 );

    auto shifted = z;
    for ( auto &v: shifted )
        v += 1000.0;
    // ln 2 + 1000 rounds to a coarser ulp, hence 1e-12 rather than exact.
    const auto ws = softmax_weights( shifted );
    for ( int k = 0; k < kIlluminantCount; ++k )
        EXPECT_NEAR( ws[static_cast<std::size_t>( k )], w[static_cast<std::size_t>( k )], 1e-12 );
}

TEST( Softmax, RandomDrawsAreSimplexPoints )
{
    std::mt19937_64 rng( 3 );
    for ( int k = 0; k < 1000; ++k )
    {
        const auto w   = softmax_weights( random_logits( rng ) );
        double     sum = 0.0;
        for ( double v: w )
        {
            EXPECT_GT( v, 0.0 );
            sum += v;
        }
        EXPECT_LT( std::abs( sum - 1.0 ), 1e-9 );
    }
}

TEST( Softmax, JacobianMatchesFiniteDifferences )
{
    std::mt19937_64 rng( 5 );
    const double    h = 1e-6;
    for ( int k = 0; k < 20; ++k )
    {
        const auto z = random_logits( rng );
        const auto J = softmax_jacobian( softmax_weights( z ) );
        for ( int j = 0; j < kIlluminantCount; ++j )
        {
            auto zp = z, zm = z;
            zp[static_cast<std::size_t>( j )] += h;
            zm[static_cast<std::size_t>( j )] -= h;
            const auto wp = softmax_weights( zp ), wm = softmax_weights( zm );
            for ( int i = 0; i < kIlluminantCount; ++i )
                EXPECT_NEAR( J( i, j ), ( wp[static_cast<std::size_t>( i )] - wm[static_cast<std::size_t>( i )] ) / ( 2 * h ), 1e-8 );
        }
    }
}

TEST( Mixture, OneHotReproducesBasis )
{
    const auto       &bank = models().illuminants;
    IlluminantWeights w;
    w.w[kIlluminantA] = 1.0;
    const auto e      = mix_illuminant( w, bank );
    EXPECT_EQ( e.spd, bank.a() );

    IlluminantWeights f;
    f.w[kFirstFluorescent + 6] = 1.0;
    EXPECT_EQ( mix_illuminant( f, bank ).spd, bank.fluorescent( 6 ) );
}

TEST( Mixture, UnitSumAndNonnegative )
{
    const auto     &bank = models().illuminants;
    std::mt19937_64 rng( 7 );
    for ( int k = 0; k < 1000; ++k )
    {
        IlluminantWeights w;
        w.w = softmax_weights( random_logits( rng ) );
        w.t = uniform( rng, 1.0, 22.0 );
        const auto e = mix_illuminant( w, bank );
        EXPECT_LT( std::abs( e.spd.sum() - 1.0 ), 1e-9 );
        EXPECT_GE( e.spd.minCoeff(), 0.0 );
    }
}

TEST( Mixture, UniformWeights )
{
    IlluminantWeights w;
    w.w.fill( 1.0 / 14.0 );
    EXPECT_NEAR( mix_illuminant( w, models().illuminants ).spd.sum(), 1.0, 1e-12 );
}

TEST( Mixture, LogitDerivativeMatchesFiniteDifferences )
{
    const auto     &bank = models().illuminants;
    std::mt19937_64 rng( 9 );
    const double    h = 1e-5;
    const auto      z = random_logits( rng );
    IlluminantWeights w;
    w.w          = softmax_weights( z );
    w.t          = 13.0;
    const auto e = mix_illuminant( w, bank );
    for ( int j = 0; j < kIlluminantCount; ++j )
    {
        auto zp = z, zm = z;
        zp[static_cast<std::size_t>( j )] += h;
        zm[static_cast<std::size_t>( j )] -= h;
        IlluminantWeights wp = w, wm = w;
        wp.w = softmax_weights( zp );
        wm.w = softmax_weights( zm );
        const Eigen::VectorXd fd = ( mix_illuminant( wp, bank ).spd - mix_illuminant( wm, bank ).spd ) / ( 2 * h );
        EXPECT_LT( ( e.d_logits.col( j ) - fd ).cwiseAbs().maxCoeff(), 1e-9 );
    }
}

TEST( Weights, ValidateRejectsOffSimplex )
{
    IlluminantWeights w;
    w.w.fill( 0.1 );
    EXPECT_THROW( w.validate(), ValidationError );
    w.w.fill( 1.0 / 14.0 );
    EXPECT_NO_THROW( w.validate() );
    w.t = 23.0;
    EXPECT_THROW( w.validate(), ValidationError );
}
