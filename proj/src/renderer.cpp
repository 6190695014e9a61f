// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/renderer.hpp>
#include <spectraface/error.hpp>
#include <spectraface/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace spectraface
{

void PixelParams::validate() const
{
    if ( !( m >= 0.0 && m <= 1.0 && h >= 0.0 && h <= 1.0 ) )
        throw ValidationError( "normalized chromophore coordinates must lie in [0, 1]" );
    if ( !( diffuse >= 0.0 && specular >= 0.0 ) || !std::isfinite( diffuse ) || !std::isfinite( specular ) )
        throw ValidationError( "shading values must be finite and nonnegative" );
}

SceneParams SceneParams::neutral()
{
    SceneParams s;
    s.light.w.fill( 1.0 / kIlluminantCount );
    s.light.t = 11.5;
    return s;
}

void SceneParams::validate() const
{
    for ( double b: camera )
        if ( !std::isfinite( b ) || std::abs( b ) > kCameraParamLimit )
            throw ValidationError( "camera parameters must lie in [-3, 3]" );
    light.validate();
}

SceneState::SceneState( const SceneParams &scene, const Models &models ) : params( scene )
{
    scene.validate();
    light       = mix_illuminant( scene.light, models.illuminants );
    sensitivity = sensitivity_from_b( models.camera, scene.camera );
    for ( int k = 0; k < 2; ++k )
        d_sensitivity[static_cast<std::size_t>( k )] = unvectorize( models.camera_jacobian.col( k ) );
    white_balance   = spectraface::white_balance( sensitivity, light.spd );
    raw2xyz         = models.raw2xyz.sample( scene.camera[0], scene.camera[1] );
    xyz2rgb         = models.pipeline.xyz2rgb;
    lit_sensitivity = light.spd.asDiagonal() * sensitivity;
    balanced_to_rgb = xyz2rgb * raw2xyz.value;
    raw_to_rgb      = balanced_to_rgb * white_balance.asDiagonal();
}

Eigen::Vector3d render_pixel(
    const PixelParams &pixel, const SceneState &scene, const Models &models, PixelJacobian *jacobian )
{
    pixel.validate();
    const auto            skin = models.skin.sample( pixel.m, pixel.h );
    const Eigen::VectorXd q    = pixel.diffuse * skin.r.array() + pixel.specular;
    const Eigen::Vector3d raw  = scene.lit_sensitivity.transpose() * q;
    const Eigen::Vector3d rgb  = scene.raw_to_rgb * raw;
    if ( !jacobian )
        return rgb;

    auto &j = *jacobian;
    j.pixel.col( 0 ) = scene.raw_to_rgb * ( pixel.diffuse * ( scene.lit_sensitivity.transpose() * skin.d_m ) );
    j.pixel.col( 1 ) = scene.raw_to_rgb * ( pixel.diffuse * ( scene.lit_sensitivity.transpose() * skin.d_h ) );
    j.pixel.col( 2 ) = scene.raw_to_rgb * ( scene.lit_sensitivity.transpose() * skin.r );
    j.pixel.col( 3 ) = scene.balanced_to_rgb * Eigen::Vector3d::Ones();

    const Eigen::Vector3d &wb       = scene.white_balance;
    const Eigen::Vector3d  balanced = wb.cwiseProduct( raw );
    // T_wb depends on the light and the camera through n = S^T e; d(wb) = -wb^2 dn.
    const auto through_balance = [&]( const Eigen::Vector3d &d_raw, const Eigen::Vector3d &d_response ) {
        const Eigen::Vector3d d_balanced =
            wb.cwiseProduct( d_raw ) - wb.cwiseProduct( wb ).cwiseProduct( raw ).cwiseProduct( d_response );
        return Eigen::Vector3d( scene.balanced_to_rgb * d_balanced );
    };
    const Eigen::VectorXd lit_q = scene.light.spd.cwiseProduct( q );
    for ( int k = 0; k < 2; ++k )
    {
        const auto &ds = scene.d_sensitivity[static_cast<std::size_t>( k )];
        j.camera.col( k ) =
            scene.xyz2rgb * ( scene.raw2xyz.d_b[static_cast<std::size_t>( k )] * balanced ) +
            through_balance( ds.transpose() * lit_q, ds.transpose() * scene.light.spd );
    }
    const auto light_direction = [&]( const Eigen::VectorXd &v ) {
        return through_balance(
            scene.sensitivity.transpose() * v.cwiseProduct( q ), scene.sensitivity.transpose() * v );
    };
    for ( int k = 0; k < kIlluminantCount; ++k )
    {
        j.weights.col( k ) = light_direction( scene.light.d_weights.col( k ) );
        j.logits.col( k )  = light_direction( scene.light.d_logits.col( k ) );
    }
    j.t = light_direction( scene.light.d_t );
    return rgb;
}

Eigen::Vector3d render_pixel(
    const PixelParams &pixel, const SceneParams &scene, const Models &models, PixelJacobian *jacobian )
{
    return render_pixel( pixel, SceneState( scene, models ), models, jacobian );
}

RenderedImage render_image(
    const ParameterMaps &maps, const SceneParams &scene, const Mask &mask, const Models &models, int threads )
{
    if ( !maps.melanin.same_shape( mask ) || !maps.haemoglobin.same_shape( mask ) ||
         !maps.diffuse.same_shape( mask ) || !maps.specular.same_shape( mask ) )
        throw ValidationError( "parameter maps and mask must have identical dimensions" );
    if ( count_foreground( mask ) == 0 )
        throw ValidationError( "mask has no foreground pixels" );

    const SceneState state( scene, models );
    const auto      &ranges = models.optics.ranges;
    RenderedImage    out{ RgbImage( mask.width, mask.height, Eigen::Vector3d::Zero() ), mask };

    parallel_chunks( mask.size(), threads, [&]( std::size_t, std::size_t begin, std::size_t end ) {
        for ( std::size_t i = begin; i < end; ++i )
        {
            if ( !mask[i] )
                continue;
            PixelParams p;
            p.m        = normalized_melanin( maps.melanin[i], ranges );
            p.h        = normalized_blood( maps.haemoglobin[i], ranges );
            // Absorbs round-off from float32 map storage and the unit conversion.
            if ( std::abs( p.m - std::clamp( p.m, 0.0, 1.0 ) ) < kMapRangeSlack )
                p.m = std::clamp( p.m, 0.0, 1.0 );
            if ( std::abs( p.h - std::clamp( p.h, 0.0, 1.0 ) ) < kMapRangeSlack )
                p.h = std::clamp( p.h, 0.0, 1.0 );
            p.diffuse  = maps.diffuse[i];
            p.specular = maps.specular[i];
            out.linear[i] = render_pixel( p, state, models );
        }
    } );
    return out;
}

double relative_error( double analytic, double numeric, double floor )
{
    const double scale = std::max( { std::abs( analytic ), std::abs( numeric ), floor } );
    return std::abs( analytic - numeric ) / scale;
}

namespace
{

double distance_to_node( double x, double lo, double hi, int nodes )
{
    const double p = ( x - lo ) * ( nodes - 1 ) / ( hi - lo );
    return std::abs( p - std::round( p ) ) * ( hi - lo ) / ( nodes - 1 );
}

} // namespace

GradientCheckReport check_gradients( const Models &models, int points, double step, std::uint64_t seed )
{
    std::mt19937_64                        rng( seed );
    std::uniform_real_distribution<double> unit( 0.0, 1.0 );
    std::normal_distribution<double>       normal( 0.0, 1.0 );

    GradientCheckReport report;
    report.points = points;
    const int    g   = models.skin.size();
    const int    k   = models.raw2xyz.size();
    const double lim = kCameraParamLimit;

    for ( int n = 0; n < points; ++n )
    {
        PixelParams p;
        p.m        = step + ( 1.0 - 2.0 * step ) * unit( rng );
        p.h        = step + ( 1.0 - 2.0 * step ) * unit( rng );
        p.diffuse  = 0.1 + 1.9 * unit( rng );
        p.specular = 0.5 * unit( rng );

        std::array<double, 2>                camera{ ( lim - 2 * step ) * ( 2 * unit( rng ) - 1 ),
                                                     ( lim - 2 * step ) * ( 2 * unit( rng ) - 1 ) };
        std::array<double, kIlluminantCount> logits{};
        for ( double &z: logits )
            z = normal( rng );
        const double t = 1.0 + 2 * step + ( 21.0 - 4 * step ) * unit( rng );

        const auto make_scene = [&]( const std::array<double, 2> &b, const std::array<double, kIlluminantCount> &z,
                                     double temp ) {
            SceneParams s;
            s.camera  = b;
            s.light.w = softmax_weights( z );
            s.light.t = temp;
            return s;
        };

        PixelJacobian j;
        render_pixel( p, make_scene( camera, logits, t ), models, &j );

        const auto compare = [&]( const Eigen::Vector3d &analytic, const Eigen::Vector3d &plus,
                                  const Eigen::Vector3d &minus, double &group ) {
            for ( int c = 0; c < 3; ++c )
            {
                const double numeric = ( plus[c] - minus[c] ) / ( 2.0 * step );
                const double e       = relative_error( analytic[c], numeric );
                group                = std::max( group, e );
                report.max_relative_error = std::max( report.max_relative_error, e );
            }
        };

        const SceneState base( make_scene( camera, logits, t ), models );
        for ( int q = 0; q < 4; ++q )
        {
            double *field = q == 0 ? &p.m : q == 1 ? &p.h : q == 2 ? &p.diffuse : &p.specular;
            if ( q < 2 && distance_to_node( *field, 0.0, 1.0, g ) <= step )
            {
                ++report.skipped_partials;
                continue;
            }
            PixelParams plus = p, minus = p;
            double *fp = q == 0 ? &plus.m : q == 1 ? &plus.h : q == 2 ? &plus.diffuse : &plus.specular;
            double *fm = q == 0 ? &minus.m : q == 1 ? &minus.h : q == 2 ? &minus.diffuse : &minus.specular;
            *fp += step;
            *fm -= step;
            compare( j.pixel.col( q ), render_pixel( plus, base, models ), render_pixel( minus, base, models ),
                     q < 2 ? report.max_error_chromophore : report.max_error_linear );
        }
        for ( int b = 0; b < 2; ++b )
        {
            if ( distance_to_node( camera[static_cast<std::size_t>( b )], -lim, lim, k ) <= step )
            {
                ++report.skipped_partials;
                continue;
            }
            auto plus = camera, minus = camera;
            plus[static_cast<std::size_t>( b )] += step;
            minus[static_cast<std::size_t>( b )] -= step;
            compare( j.camera.col( b ), render_pixel( p, make_scene( plus, logits, t ), models ),
                     render_pixel( p, make_scene( minus, logits, t ), models ), report.max_error_camera );
        }
        for ( int l = 0; l < kIlluminantCount; ++l )
        {
            auto plus = logits, minus = logits;
            plus[static_cast<std::size_t>( l )] += step;
            minus[static_cast<std::size_t>( l )] -= step;
            compare( j.logits.col( l ), render_pixel( p, make_scene( camera, plus, t ), models ),
                     render_pixel( p, make_scene( camera, minus, t ), models ), report.max_error_light );
        }
        // 7000 K branch split of the daylight chromaticity polynomial.
        if ( std::abs( cct_from_temperature_param( t ) - 7000.0 ) <= 1000.0 * step )
            ++report.skipped_partials;
        else
            compare( j.t, render_pixel( p, make_scene( camera, logits, t + step ), models ),
                     render_pixel( p, make_scene( camera, logits, t - step ), models ), report.max_error_temperature );
    }
    return report;
}

} // namespace spectraface
