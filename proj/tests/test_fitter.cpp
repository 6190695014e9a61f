// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include "test_support.hpp"

#include <spectraface/error.hpp>
#include <spectraface/fitter.hpp>
#include <spectraface/harness.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace spectraface;
using spectraface::testing::models;
using spectraface::testing::uniform;

namespace
{

double map_rmse( const Map &a, const Map &b, const Mask &mask )
{
    double sum = 0.0;
    int    n   = 0;
    for ( std::size_t i = 0; i < mask.size(); ++i )
        if ( mask[i] )
        {
            sum += ( a[i] - b[i] ) * ( a[i] - b[i] );
            ++n;
        }
    return std::sqrt( sum / n );
}

LatentImage random_latents( int w, int h, std::mt19937_64 &rng )
{
    auto z = LatentImage::zeros( w, h );
    for ( std::size_t i = 0; i < z.z_m.size(); ++i )
    {
        z.z_m[i] = uniform( rng, -3, 3 );
        z.z_h[i] = uniform( rng, -3, 3 );
        z.z_d[i] = uniform( rng, -1, 0.5 );
        z.z_s[i] = uniform( rng, -4, -1 );
    }
    z.z_b = { uniform( rng, -1, 1 ), uniform( rng, -1, 1 ) };
    for ( auto &v: z.z_light )
        v = uniform( rng, -2, 2 );
    z.z_t = uniform( rng, -2, 2 );
    return z;
}

} // namespace

TEST( Transforms, ZeroLatentsAreMidRange )
{
    const auto t = transform_latents( LatentImage::zeros( 2, 2 ) );
    const auto p = physical_from_normalized( t.m[0], t.h[0], models().optics.ranges );
    EXPECT_DOUBLE_EQ( t.m[0], 0.5 );
    EXPECT_DOUBLE_EQ( t.h[3], 0.5 );
    EXPECT_DOUBLE_EQ( p.f_mel, 0.2215 );
    EXPECT_DOUBLE_EQ( p.f_blood, 0.045 );
    EXPECT_DOUBLE_EQ( t.diffuse[1], 1.0 );
    EXPECT_DOUBLE_EQ( t.specular[2], 1.0 );
    EXPECT_EQ( t.scene.camera, ( std::array<double, 2>{ 0.0, 0.0 } ) );
    EXPECT_DOUBLE_EQ( t.scene.light.t, 11.5 );
    for ( double w: t.scene.light.w )
        EXPECT_DOUBLE_EQ( w, 1.0 / 14.0 );
}

TEST( Transforms, SaturatedLatentsHitRangeLimits )
{
    auto z   = LatentImage::zeros( 1, 1 );
    z.z_m[0] = 40.0;
    z.z_h[0] = -40.0;
    z.z_b    = { 40.0, -40.0 };
    const auto t = transform_latents( z );
    EXPECT_NEAR( physical_from_normalized( t.m[0], t.h[0], models().optics.ranges ).f_mel, 0.43, 1e-12 );
    EXPECT_NEAR( physical_from_normalized( t.m[0], t.h[0], models().optics.ranges ).f_blood, 0.02, 1e-12 );
    EXPECT_NEAR( t.scene.camera[0], 3.0, 1e-12 );
    EXPECT_NEAR( t.scene.camera[1], -3.0, 1e-12 );
}

TEST( Transforms, InverseRoundTrip )
{
    std::mt19937_64 rng( 1 );
    const auto      z = random_latents( 3, 2, rng );
    const auto      t = transform_latents( z );
    const auto      back = latents_from_parameters( t.m, t.h, t.diffuse, t.specular, t.scene );
    EXPECT_LT( ( back.pack() - z.pack() ).head( 4 * 6 + 2 ).cwiseAbs().maxCoeff(), 1e-9 );
    // Logits are recovered up to a common shift.
    const auto t2 = transform_latents( back );
    for ( int k = 0; k < kIlluminantCount; ++k )
        EXPECT_NEAR( t2.scene.light.w[static_cast<std::size_t>( k )], t.scene.light.w[static_cast<std::size_t>( k )], 1e-12 );
    EXPECT_NEAR( t2.scene.light.t, t.scene.light.t, 1e-9 );
}

TEST( Transforms, PackUnpackRoundTrip )
{
    std::mt19937_64 rng( 2 );
    const auto      z = random_latents( 4, 3, rng );
    auto            y = LatentImage::zeros( 4, 3 );
    y.unpack( z.pack() );
    EXPECT_EQ( y.pack(), z.pack() );
    EXPECT_EQ( z.parameter_count(), 4u * 12u + 2u + 14u + 1u );
    EXPECT_THROW( y.unpack( Eigen::VectorXd::Zero( 3 ) ), ValidationError );
}

TEST( Losses, AppearanceExamples )
{
    RgbImage a( 2, 1, Eigen::Vector3d::Zero() ), b( 2, 1, Eigen::Vector3d::Zero() );
    Mask     one( 2, 1, 0 );
    one[0] = 1;
    EXPECT_DOUBLE_EQ( appearance_loss( a, b, one ), 0.0 );
    a[0] = { 0.1, 0, 0 };
    EXPECT_NEAR( appearance_loss( a, b, one ), 0.01, 1e-15 );
    a[1] = { 0, 0.1, 0 };
    EXPECT_NEAR( appearance_loss( a, b, Mask( 2, 1, 1 ) ), 0.01, 1e-15 );
    EXPECT_THROW( appearance_loss( a, b, Mask( 2, 1, 0 ) ), ValidationError );
}

TEST( Losses, CameraPriorExamples )
{
    EXPECT_DOUBLE_EQ( camera_prior_loss( std::array<double, 2>{ 0, 0 } ), 0.0 );
    EXPECT_DOUBLE_EQ( camera_prior_loss( std::array<double, 2>{ 1, 2 } ), 5.0 );
    EXPECT_DOUBLE_EQ( camera_prior_loss( std::array<double, 2>{ 3, 3 } ), 18.0 );
}

TEST( Losses, SparsityExamples )
{
    Mask mask( 3, 1, 1 );
    mask[2] = 0;
    EXPECT_DOUBLE_EQ( specular_sparsity_loss( Map( 3, 1, 0.0 ), mask ), 0.0 );
    Map c( 3, 1, 0.37 );
    c[2] = 100.0; // background is ignored
    EXPECT_NEAR( specular_sparsity_loss( c, mask ), 0.37, 1e-15 );
}

TEST( Losses, ShadingSupervisionExamples )
{
    Mask mask( 2, 1, 1 );
    Map  d( 2, 1 ), p( 2, 1 );
    d[0] = 1.0, d[1] = 0.5;
    p[0] = 2.0, p[1] = 1.0;
    auto s = shading_supervision_loss( d, p, mask );
    EXPECT_NEAR( s.scale, 2.0, 1e-15 );
    EXPECT_NEAR( s.loss, 0.0, 1e-15 );
    s = shading_supervision_loss( d, d, mask );
    EXPECT_NEAR( s.scale, 1.0, 1e-15 );
    EXPECT_NEAR( s.loss, 0.0, 1e-15 );
    d[0] = 1.0, d[1] = 0.0;
    p[0] = 0.0, p[1] = 3.0;
    s = shading_supervision_loss( d, p, mask );
    EXPECT_DOUBLE_EQ( s.scale, 0.0 );
    EXPECT_DOUBLE_EQ( s.loss, 4.5 );
}

TEST( TotalLoss, PerfectReconstructionIsZero )
{
    const auto &m = models();
    auto        z = LatentImage::zeros( 3, 3 );
    z.z_s.data.assign( 9, -50.0 );
    auto        base = total_loss( z, RgbImage( 3, 3, Eigen::Vector3d::Zero() ), Mask( 3, 3, 1 ), m, {}, nullptr, false );
    const auto  eval = total_loss( z, base.reconstruction, Mask( 3, 3, 1 ), m, {}, nullptr, false );
    EXPECT_DOUBLE_EQ( eval.terms.appearance, 0.0 );
    EXPECT_DOUBLE_EQ( eval.terms.camera_prior, 0.0 );
    EXPECT_LT( eval.terms.total, 1e-25 );
}

TEST( TotalLoss, WeightsCombineTerms )
{
    const auto     &m = models();
    std::mt19937_64 rng( 3 );
    const auto      z = random_latents( 3, 3, rng );
    RgbImage        obs( 3, 3 );
    Map             pgt( 3, 3 );
    for ( std::size_t i = 0; i < obs.size(); ++i )
    {
        obs[i] = { uniform( rng, 0, 1 ), uniform( rng, 0, 1 ), uniform( rng, 0, 1 ) };
        pgt[i] = uniform( rng, 0.2, 1 );
    }
    const Mask mask( 3, 3, 1 );

    LossWeights only_app{ 1e-3, 0, 0, 0 };
    const auto  a = total_loss( z, obs, mask, m, only_app, &pgt, false );
    EXPECT_EQ( a.terms.total, 1e-3 * a.terms.appearance );

    const LossWeights w;
    const auto        full = total_loss( z, obs, mask, m, w, &pgt, false );
    const double      expect = w.appearance * full.terms.appearance + w.camera_prior * full.terms.camera_prior +
                          w.specular_sparsity * full.terms.specular_sparsity + w.shading * full.terms.shading;
    EXPECT_NEAR( full.terms.total, expect, 1e-15 * std::abs( expect ) );
    EXPECT_TRUE( std::isnan( total_loss( z, obs, mask, m, w, nullptr, false ).terms.shading_scale ) );
}

TEST( TotalLoss, ThreadCountDoesNotChangeResult )
{
    const auto     &m = models();
    std::mt19937_64 rng( 4 );
    const auto      z = random_latents( 40, 30, rng );
    RgbImage        obs( 40, 30 );
    for ( auto &v: obs.data )
        v = { uniform( rng, 0, 1 ), uniform( rng, 0, 1 ), uniform( rng, 0, 1 ) };
    const Mask mask( 40, 30, 1 );
    const auto a = total_loss( z, obs, mask, m, {}, nullptr, true, 1 );
    const auto b = total_loss( z, obs, mask, m, {}, nullptr, true, 3 );
    EXPECT_EQ( a.terms.total, b.terms.total );
    EXPECT_EQ( a.gradient->pack(), b.gradient->pack() );
}

TEST( TotalLoss, GradientMatchesFiniteDifferences )
{
    const auto report = check_loss_gradients( models(), 20, 1e-4, 7 );
    EXPECT_EQ( report.points, 20 );
    EXPECT_GT( report.checked_partials, 1000 );
    EXPECT_LT( report.max_relative_error, 1e-3 );
}

TEST( Fit, ZeroLatentImageIsAlreadyOptimal )
{
    // Specular sparsity is the only term nonzero at z = 0, so it is switched off.
    const auto &m = models();
    const auto  z = LatentImage::zeros( 8, 8 );
    const Mask  mask( 8, 8, 1 );
    const auto  rendered = total_loss( z, RgbImage( 8, 8, Eigen::Vector3d::Zero() ), mask, m, {}, nullptr, false ).reconstruction;
    FitOptions  o;
    o.weights.specular_sparsity = 0.0;
    o.max_iterations            = 10;
    const auto r = fit_linear( rendered, mask, m, o );
    EXPECT_LE( r.iterations, 10 );
    EXPECT_LT( r.decomposition.loss.total, 1e-10 );
}

TEST( Fit, FrozenSceneRecoversChromophores )
{
    const auto  &m = models();
    const auto   c = make_synthetic_case( m, SynthOptions{}, 123 );
    FitOptions   o;
    o.freeze_scene = true;
    auto init      = LatentImage::zeros( c.mask.width, c.mask.height );
    init.z_b       = c.latents.z_b;
    init.z_light   = c.latents.z_light;
    init.z_t       = c.latents.z_t;
    o.initial      = init;
    const auto r   = fit( c.encoded, c.mask, m, o );

    EXPECT_NEAR( r.decomposition.scene.camera[0], c.scene.camera[0], 1e-12 );
    EXPECT_NEAR( r.decomposition.scene.camera[1], c.scene.camera[1], 1e-12 );
    EXPECT_LT( map_rmse( r.decomposition.maps.melanin, c.truth.melanin, c.mask ), 0.02 );
    EXPECT_LT( map_rmse( r.decomposition.maps.haemoglobin, c.truth.haemoglobin, c.mask ), 0.02 );
    EXPECT_LT( appearance_rmse( r.decomposition.reconstruction.linear, c.linear, c.mask ), 1e-3 );

    // Accepted steps never increase the loss.
    for ( std::size_t k = 1; k < r.trace.size(); ++k )
        EXPECT_LE( r.trace[k].terms.total, r.trace[k - 1].terms.total );
    EXPECT_TRUE( maps_in_range( r.decomposition.maps, c.mask, m.optics.ranges ) );
}

TEST( Fit, AllFreeReproducesAppearance )
{
    const auto &m = models();
    const auto  c = make_synthetic_case( m, SynthOptions{}, 321 );
    const auto  r = fit( c.encoded, c.mask, m, FitOptions{} );
    EXPECT_LT( appearance_rmse( r.decomposition.reconstruction.linear, c.linear, c.mask ), 1e-3 );
    EXPECT_NO_THROW( r.decomposition.scene.validate() );
}

TEST( Fit, DeterministicAcrossThreadCounts )
{
    const auto &m = models();
    SynthOptions so;
    so.width = so.height = 16;
    const auto c = make_synthetic_case( m, so, 5 );
    FitOptions o;
    o.max_iterations = 100;
    o.threads        = 1;
    const auto a     = fit( c.encoded, c.mask, m, o );
    o.threads        = 4;
    const auto b     = fit( c.encoded, c.mask, m, o );
    EXPECT_EQ( a.latents.pack(), b.latents.pack() );
    EXPECT_EQ( a.iterations, b.iterations );
}

TEST( Fit, RejectsEmptyMaskAndBadOptions )
{
    const auto &m = models();
    RgbImage    img( 4, 4, Eigen::Vector3d::Constant( 0.5 ) );
    EXPECT_THROW( fit( img, Mask( 4, 4, 0 ), m ), ValidationError );
    FitOptions o;
    o.step = -1;
    EXPECT_THROW( fit( img, Mask( 4, 4, 1 ), m, o ), ValidationError );
}
