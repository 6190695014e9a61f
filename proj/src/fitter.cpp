// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/fitter.hpp>
#include <spectraface/error.hpp>
#include <spectraface/parallel.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace spectraface
{

double sigmoid( double z )
{
    if ( z >= 0.0 )
        return 1.0 / ( 1.0 + std::exp( -z ) );
    const double e = std::exp( z );
    return e / ( 1.0 + e );
}

double logit( double p )
{
    return std::log( p ) - std::log1p( -p );
}

LatentImage LatentImage::zeros( int width, int height )
{
    LatentImage z;
    z.z_m = z.z_h = z.z_d = z.z_s = Map( width, height, 0.0 );
    return z;
}

std::size_t LatentImage::parameter_count() const
{
    return scene_offset() + 2 + kIlluminantCount + 1;
}

Eigen::VectorXd LatentImage::pack() const
{
    Eigen::VectorXd x( static_cast<Eigen::Index>( parameter_count() ) );
    const std::size_t n = z_m.size();
    std::size_t       k = 0;
    for ( const Map *map: { &z_m, &z_h, &z_d, &z_s } )
        for ( std::size_t i = 0; i < n; ++i )
            x[static_cast<Eigen::Index>( k++ )] = ( *map )[i];
    for ( double v: z_b )
        x[static_cast<Eigen::Index>( k++ )] = v;
    for ( double v: z_light )
        x[static_cast<Eigen::Index>( k++ )] = v;
    x[static_cast<Eigen::Index>( k )] = z_t;
    return x;
}

void LatentImage::unpack( const Eigen::VectorXd &x )
{
    if ( static_cast<std::size_t>( x.size() ) != parameter_count() )
        throw ValidationError( "latent vector has the wrong length" );
    const std::size_t n = z_m.size();
    std::size_t       k = 0;
    for ( Map *map: { &z_m, &z_h, &z_d, &z_s } )
        for ( std::size_t i = 0; i < n; ++i )
            ( *map )[i] = x[static_cast<Eigen::Index>( k++ )];
    for ( double &v: z_b )
        v = x[static_cast<Eigen::Index>( k++ )];
    for ( double &v: z_light )
        v = x[static_cast<Eigen::Index>( k++ )];
    z_t = x[static_cast<Eigen::Index>( k )];
}

void LatentImage::validate() const
{
    if ( !z_m.same_shape( z_h ) || !z_m.same_shape( z_d ) || !z_m.same_shape( z_s ) )
        throw ValidationError( "latent maps have inconsistent dimensions" );
    if ( !pack().allFinite() )
        throw ValidationError( "latents must be finite" );
}

TransformedLatents transform_latents( const LatentImage &z )
{
    const int          w = z.width(), h = z.height();
    TransformedLatents t;
    t.m = t.h = t.diffuse = t.specular = t.dm_dz = t.dh_dz = Map( w, h, 0.0 );
    for ( std::size_t i = 0; i < z.z_m.size(); ++i )
    {
        t.m[i]        = sigmoid( z.z_m[i] );
        t.h[i]        = sigmoid( z.z_h[i] );
        t.dm_dz[i]    = t.m[i] * ( 1.0 - t.m[i] );
        t.dh_dz[i]    = t.h[i] * ( 1.0 - t.h[i] );
        t.diffuse[i]  = std::exp( z.z_d[i] );
        t.specular[i] = std::exp( z.z_s[i] );
    }
    for ( std::size_t k = 0; k < 2; ++k )
    {
        const double s     = sigmoid( z.z_b[k] );
        t.scene.camera[k] = std::clamp( kCameraParamLimit * ( 2.0 * s - 1.0 ), -kCameraParamLimit, kCameraParamLimit );
        t.db_dz[k]        = 2.0 * kCameraParamLimit * s * ( 1.0 - s );
    }
    const double s  = sigmoid( z.z_t );
    t.scene.light.t = kMinTemperatureParam + ( kMaxTemperatureParam - kMinTemperatureParam ) * s;
    t.dt_dz         = ( kMaxTemperatureParam - kMinTemperatureParam ) * s * ( 1.0 - s );
    t.scene.light.w = softmax_weights( z.z_light );
    return t;
}

LatentImage latents_from_parameters(
    const Map &m, const Map &h, const Map &diffuse, const Map &specular, const SceneParams &scene, double floor )
{
    if ( !m.same_shape( h ) || !m.same_shape( diffuse ) || !m.same_shape( specular ) )
        throw ValidationError( "parameter maps have inconsistent dimensions" );
    const auto bounded_logit = [&]( double p ) { return std::clamp( logit( p ), floor, -floor ); };
    const auto bounded_log   = [&]( double v ) { return v > 0.0 ? std::max( std::log( v ), floor ) : floor; };

    LatentImage z = LatentImage::zeros( m.width, m.height );
    for ( std::size_t i = 0; i < m.size(); ++i )
    {
        z.z_m[i] = bounded_logit( m[i] );
        z.z_h[i] = bounded_logit( h[i] );
        z.z_d[i] = bounded_log( diffuse[i] );
        z.z_s[i] = bounded_log( specular[i] );
    }
    for ( std::size_t k = 0; k < 2; ++k )
        z.z_b[k] = bounded_logit( 0.5 * ( scene.camera[k] / kCameraParamLimit + 1.0 ) );
    z.z_t = bounded_logit( ( scene.light.t - kMinTemperatureParam ) / ( kMaxTemperatureParam - kMinTemperatureParam ) );
    for ( std::size_t k = 0; k < z.z_light.size(); ++k )
        z.z_light[k] = bounded_log( scene.light.w[k] );
    return z;
}

void LossWeights::validate() const
{
    for ( double w: { appearance, camera_prior, specular_sparsity, shading } )
        if ( !( w >= 0.0 ) || !std::isfinite( w ) )
            throw ValidationError( "loss weights must be finite and nonnegative" );
}

namespace
{

std::size_t require_foreground( const Mask &mask )
{
    const std::size_t n = count_foreground( mask );
    if ( n == 0 )
        throw ValidationError( "mask has no foreground pixels" );
    return n;
}

} // namespace

double appearance_loss( const RgbImage &recon, const RgbImage &observed, const Mask &mask )
{
    if ( !recon.same_shape( observed ) || !recon.same_shape( mask ) )
        throw ValidationError( "image and mask dimensions differ" );
    const std::size_t n   = require_foreground( mask );
    double            sum = 0.0;
    for ( std::size_t i = 0; i < mask.size(); ++i )
        if ( mask[i] )
            sum += ( recon[i] - observed[i] ).squaredNorm();
    return sum / static_cast<double>( n );
}

double camera_prior_loss( std::span<const double> b )
{
    double s = 0.0;
    for ( double v: b )
        s += v * v;
    return s;
}

double specular_sparsity_loss( const Map &specular, const Mask &mask )
{
    if ( !specular.same_shape( mask ) )
        throw ValidationError( "specular map and mask dimensions differ" );
    const std::size_t n   = require_foreground( mask );
    double            sum = 0.0;
    for ( std::size_t i = 0; i < mask.size(); ++i )
        if ( mask[i] )
            sum += std::abs( specular[i] );
    return sum / static_cast<double>( n );
}

ShadingSupervision shading_supervision_loss( const Map &diffuse, const Map &pseudo_gt, const Mask &mask )
{
    if ( !diffuse.same_shape( mask ) || !pseudo_gt.same_shape( mask ) )
        throw ValidationError( "shading maps and mask dimensions differ" );
    const std::size_t n  = require_foreground( mask );
    double            dp = 0.0, dd = 0.0;
    for ( std::size_t i = 0; i < mask.size(); ++i )
        if ( mask[i] )
        {
            dp += diffuse[i] * pseudo_gt[i];
            dd += diffuse[i] * diffuse[i];
        }
    if ( !( dd > 0.0 ) )
        throw NumericalError( "diffuse shading is zero over the mask" );
    ShadingSupervision out;
    out.scale = dp / dd;
    for ( std::size_t i = 0; i < mask.size(); ++i )
        if ( mask[i] )
        {
            const double r = out.scale * diffuse[i] - pseudo_gt[i];
            out.loss += r * r;
        }
    out.loss /= static_cast<double>( n );
    return out;
}

namespace
{

struct ChunkSums
{
    double          appearance = 0.0;
    double          specular   = 0.0;
    Eigen::MatrixXd lit_outer; ///< sum of q gamma^T, D x 3
    Eigen::Vector3d balance   = Eigen::Vector3d::Zero();
    Eigen::Matrix3d transform = Eigen::Matrix3d::Zero();
};

} // namespace

LossEvaluation total_loss(
    const LatentImage &z,
    const RgbImage    &observed_linear,
    const Mask        &mask,
    const Models      &models,
    const LossWeights &weights,
    const Map         *pseudo_gt,
    bool               want_gradient,
    int                threads )
{
    weights.validate();
    if ( !z.z_m.same_shape( mask ) || !observed_linear.same_shape( mask ) )
        throw ValidationError( "latents, observation and mask dimensions differ" );
    const std::size_t n     = require_foreground( mask );
    const double      inv_n = 1.0 / static_cast<double>( n );

    const TransformedLatents tl = transform_latents( z );
    const SceneState         state( tl.scene, models );
    const int                d = models.grid.size();

    ShadingSupervision shading{ 0.0, std::numeric_limits<double>::quiet_NaN() };
    if ( pseudo_gt )
        shading = shading_supervision_loss( tl.diffuse, *pseudo_gt, mask );

    LossEvaluation out;
    out.reconstruction = RgbImage( mask.width, mask.height, Eigen::Vector3d::Zero() );
    if ( want_gradient )
        out.gradient = LatentImage::zeros( mask.width, mask.height );

    const double         g_scale = 2.0 * weights.appearance * inv_n;
    std::vector<ChunkSums> sums( chunk_count( mask.size() ) );
    parallel_chunks( mask.size(), threads, [&]( std::size_t c, std::size_t begin, std::size_t end ) {
        ChunkSums &acc = sums[c];
        if ( want_gradient )
            acc.lit_outer = Eigen::MatrixXd::Zero( d, 3 );
        SkinLut::Sample skin;
        Eigen::VectorXd q( d ), u( d );
        for ( std::size_t i = begin; i < end; ++i )
        {
            if ( !mask[i] )
                continue;
            const double id = tl.diffuse[i], is = tl.specular[i];
            models.skin.sample( tl.m[i], tl.h[i], skin );
            q.array()                 = id * skin.r.array() + is;
            const Eigen::Vector3d raw = state.lit_sensitivity.transpose() * q;
            const Eigen::Vector3d rgb = state.raw_to_rgb * raw;
            out.reconstruction[i]     = rgb;
            const Eigen::Vector3d delta = rgb - observed_linear[i];
            acc.appearance += delta.squaredNorm();
            acc.specular += is;
            if ( !want_gradient )
                continue;

            const Eigen::Vector3d g     = g_scale * delta;
            const Eigen::Vector3d gamma = state.raw_to_rgb.transpose() * g;
            u.noalias()                 = state.lit_sensitivity * gamma;

            double d_id = u.dot( skin.r );
            double d_is = u.sum() + weights.specular_sparsity * inv_n;
            if ( pseudo_gt )
                d_id += 2.0 * weights.shading * inv_n * shading.scale * ( shading.scale * id - ( *pseudo_gt )[i] );

            auto &grad    = *out.gradient;
            grad.z_m[i]   = id * u.dot( skin.d_m ) * tl.dm_dz[i];
            grad.z_h[i]   = id * u.dot( skin.d_h ) * tl.dh_dz[i];
            grad.z_d[i]   = d_id * id;
            grad.z_s[i]   = d_is * is;

            const Eigen::Vector3d balanced = state.white_balance.cwiseProduct( raw );
            acc.lit_outer.noalias() += q * gamma.transpose();
            acc.balance += gamma.cwiseProduct( balanced );
            acc.transform.noalias() += ( state.xyz2rgb.transpose() * g ) * balanced.transpose();
        }
    } );

    ChunkSums total;
    if ( want_gradient )
        total.lit_outer = Eigen::MatrixXd::Zero( d, 3 );
    for ( const auto &s: sums )
    {
        total.appearance += s.appearance;
        total.specular += s.specular;
        if ( want_gradient && s.lit_outer.size() )
        {
            total.lit_outer += s.lit_outer;
            total.balance += s.balance;
            total.transform += s.transform;
        }
    }

    auto &t             = out.terms;
    t.appearance        = total.appearance * inv_n;
    t.camera_prior      = camera_prior_loss( tl.scene.camera );
    t.specular_sparsity = total.specular * inv_n;
    t.shading           = pseudo_gt ? shading.loss : 0.0;
    t.shading_scale     = shading.scale;
    t.total             = weights.appearance * t.appearance + weights.camera_prior * t.camera_prior +
              weights.specular_sparsity * t.specular_sparsity + ( pseudo_gt ? weights.shading * t.shading : 0.0 );

    if ( want_gradient )
    {
        auto &grad = *out.gradient;
        const Eigen::MatrixXd &s = state.sensitivity;
        const Eigen::VectorXd &e = state.light.spd;
        // Gradient w.r.t. an additive change of the illuminant spectrum.
        const Eigen::VectorXd d_spd =
            s.cwiseProduct( total.lit_outer ).rowwise().sum() - s * total.balance;
        const Eigen::VectorXd d_logits = state.light.d_logits.transpose() * d_spd;
        for ( int k = 0; k < kIlluminantCount; ++k )
            grad.z_light[static_cast<std::size_t>( k )] = d_logits[k];
        grad.z_t = state.light.d_t.dot( d_spd ) * tl.dt_dz;

        const Eigen::MatrixXd lit_outer = e.asDiagonal() * total.lit_outer;
        for ( std::size_t k = 0; k < 2; ++k )
        {
            const Eigen::MatrixXd &ds = state.d_sensitivity[k];
            const double d_b = ds.cwiseProduct( lit_outer ).sum() - ( ds.transpose() * e ).dot( total.balance ) +
                               state.raw2xyz.d_b[k].cwiseProduct( total.transform ).sum() +
                               2.0 * weights.camera_prior * tl.scene.camera[k];
            grad.z_b[k] = d_b * tl.db_dz[k];
        }
    }
    return out;
}

void FitOptions::validate() const
{
    if ( max_iterations <= 0 )
        throw ValidationError( "iteration count must be positive" );
    if ( !( step > 0.0 ) || !std::isfinite( step ) )
        throw ValidationError( "step size must be positive" );
    if ( !( tolerance >= 0.0 ) || window <= 0 || max_backtracks < 0 || log_every <= 0 )
        throw ValidationError( "invalid convergence settings" );
    if ( !( beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0 ) )
        throw ValidationError( "invalid Adam parameters" );
    weights.validate();
    if ( initial )
        initial->validate();
}

Decomposition decompose( const LatentImage &z, const Mask &mask, const Models &models, const RgbImage &reconstruction )
{
    const TransformedLatents tl     = transform_latents( z );
    const BioRanges         &ranges = models.optics.ranges;

    Decomposition out;
    out.maps.melanin = out.maps.haemoglobin = Map( mask.width, mask.height, 0.0 );
    for ( std::size_t i = 0; i < mask.size(); ++i )
    {
        const auto p            = physical_from_normalized( tl.m[i], tl.h[i], ranges );
        out.maps.melanin[i]     = p.f_mel;
        out.maps.haemoglobin[i] = p.f_blood;
    }
    out.maps.diffuse  = tl.diffuse;
    out.maps.specular = tl.specular;
    out.mask          = mask;
    out.scene         = tl.scene;
    out.sensitivity   = sensitivity_from_b( models.camera, tl.scene.camera );
    out.illuminant    = mix_illuminant( tl.scene.light, models.illuminants ).spd;
    out.reconstruction = RenderedImage{ reconstruction, mask };
    return out;
}

FitResult fit_linear(
    const RgbImage &observed_linear, const Mask &mask, const Models &models, const FitOptions &options,
    const Map *pseudo_gt )
{
    const auto start = std::chrono::steady_clock::now();
    options.validate();
    if ( !observed_linear.same_shape( mask ) )
        throw ValidationError( "image and mask dimensions differ" );
    require_foreground( mask );
    for ( std::size_t i = 0; i < mask.size(); ++i )
        if ( mask[i] && !observed_linear[i].allFinite() )
            throw ValidationError( "observed image contains non-finite values" );

    LatentImage z = options.initial ? *options.initial : LatentImage::zeros( mask.width, mask.height );
    if ( !z.z_m.same_shape( mask ) )
        throw ValidationError( "initial latents do not match the image dimensions" );

    const auto evaluate = [&]( const Eigen::VectorXd &x ) {
        z.unpack( x );
        return total_loss( z, observed_linear, mask, models, options.weights, pseudo_gt, true, options.threads );
    };

    Eigen::VectorXd x   = z.pack();
    LossEvaluation  cur = evaluate( x );
    if ( !std::isfinite( cur.terms.total ) )
        throw NumericalError( "loss is not finite at the initial latents" );

    const auto      count = x.size();
    const auto      fixed = static_cast<Eigen::Index>( z.scene_offset() );
    Eigen::VectorXd m1    = Eigen::VectorXd::Zero( count );
    Eigen::VectorXd m2    = Eigen::VectorXd::Zero( count );
    double          alpha = options.step;

    FitResult           result;
    std::vector<double> history{ cur.terms.total };
    result.trace.push_back( { 0, alpha, cur.terms } );
    result.stop_reason = "iteration limit";

    int it = 1;
    for ( ; it <= options.max_iterations; ++it )
    {
        Eigen::VectorXd g = cur.gradient->pack();
        if ( options.freeze_scene )
            g.tail( count - fixed ).setZero();
        if ( g.cwiseAbs().maxCoeff() == 0.0 )
        {
            result.converged   = true;
            result.stop_reason = "zero gradient";
            --it;
            break;
        }
        m1 = options.beta1 * m1 + ( 1.0 - options.beta1 ) * g;
        m2 = options.beta2 * m2 + ( 1.0 - options.beta2 ) * g.cwiseAbs2();
        const double          c1        = 1.0 - std::pow( options.beta1, it );
        const double          c2        = 1.0 - std::pow( options.beta2, it );
        const Eigen::VectorXd direction = ( m1 / c1 ).array() / ( ( m2 / c2 ).array().sqrt() + options.epsilon );

        bool accepted = false;
        for ( int bt = 0; bt <= options.max_backtracks; ++bt )
        {
            const Eigen::VectorXd trial_x = x - alpha * direction;
            LossEvaluation        trial   = evaluate( trial_x );
            if ( !std::isfinite( trial.terms.total ) )
            {
                std::ostringstream msg;
                msg << "loss diverged at iteration " << it << " (step " << alpha << ")";
                throw NumericalError( msg.str() );
            }
            if ( trial.terms.total <= cur.terms.total )
            {
                x        = trial_x;
                cur      = std::move( trial );
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if ( !accepted )
        {
            result.converged   = true;
            result.stop_reason = "no descent step";
            z.unpack( x );
            --it;
            break;
        }
        history.push_back( cur.terms.total );
        if ( it % options.log_every == 0 )
            result.trace.push_back( { it, alpha, cur.terms } );

        if ( it >= options.window )
        {
            const double before = history[static_cast<std::size_t>( it - options.window )];
            if ( before <= 0.0 || ( before - cur.terms.total ) / before < options.tolerance )
            {
                result.converged   = true;
                result.stop_reason = "relative decrease below tolerance";
                break;
            }
        }
    }
    result.iterations = std::min( it, options.max_iterations );
    z.unpack( x );
    if ( result.trace.back().iteration != result.iterations )
        result.trace.push_back( { result.iterations, alpha, cur.terms } );

    result.latents            = z;
    result.decomposition      = decompose( z, mask, models, cur.reconstruction );
    result.decomposition.loss = cur.terms;
    result.wall_time = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
    return result;
}

FitResult fit(
    const RgbImage &observed_encoded, const Mask &mask, const Models &models, const FitOptions &options,
    const Map *pseudo_gt )
{
    RgbImage linear = observed_encoded;
    for ( auto &px: linear.data )
        px = gamma_decode( px, models.pipeline );
    return fit_linear( linear, mask, models, options, pseudo_gt );
}

double appearance_rmse( const RgbImage &a, const RgbImage &b, const Mask &mask )
{
    return std::sqrt( appearance_loss( a, b, mask ) );
}

namespace
{

bool crosses_node( double lo, double hi, double axis_lo, double axis_hi, int nodes )
{
    const double scale = ( nodes - 1 ) / ( axis_hi - axis_lo );
    const double a = ( lo - axis_lo ) * scale, b = ( hi - axis_lo ) * scale;
    // Also skip when an endpoint sits within round-off of a node.
    return std::floor( a - 1e-9 ) != std::floor( b + 1e-9 );
}

} // namespace

LossGradientReport check_loss_gradients(
    const Models &models, int points, double step, std::uint64_t seed, int width, int height )
{
    if ( points <= 0 || !( step > 0.0 ) || width <= 0 || height <= 0 )
        throw ValidationError( "invalid gradient check settings" );
    std::mt19937_64                        rng( seed );
    std::uniform_real_distribution<double> unit( 0.0, 1.0 );
    std::normal_distribution<double>       normal( 0.0, 1.0 );
    const auto uniform = [&]( double lo, double hi ) { return lo + ( hi - lo ) * unit( rng ); };

    Mask mask( width, height, 255 );
    mask[0] = 0;
    if ( count_foreground( mask ) == 0 )
        mask[0] = 255;

    const int          g_skin = models.skin.size();
    const int          g_cam  = models.raw2xyz.size();
    const LossWeights  weights;
    LossGradientReport report;
    report.points = points;

    for ( int p = 0; p < points; ++p )
    {
        LatentImage z = LatentImage::zeros( width, height );
        RgbImage    observed( width, height, Eigen::Vector3d::Zero() );
        Map         pgt( width, height );
        for ( std::size_t i = 0; i < mask.size(); ++i )
        {
            z.z_m[i]    = uniform( -3.0, 3.0 );
            z.z_h[i]    = uniform( -3.0, 3.0 );
            z.z_d[i]    = uniform( -1.0, 0.5 );
            z.z_s[i]    = uniform( -3.0, 0.0 );
            observed[i] = Eigen::Vector3d( unit( rng ), unit( rng ), unit( rng ) ) * 0.5;
            pgt[i]      = uniform( 0.2, 1.5 );
        }
        for ( double &v: z.z_b )
            v = uniform( -1.5, 1.5 );
        for ( double &v: z.z_light )
            v = normal( rng );
        z.z_t = uniform( -3.0, 3.0 );

        const LossEvaluation  base     = total_loss( z, observed, mask, models, weights, &pgt, true, 1 );
        const Eigen::VectorXd analytic = base.gradient->pack();
        const Eigen::VectorXd x        = z.pack();
        const double          floor    = std::max( 1e-6 * analytic.cwiseAbs().maxCoeff(), 1e-300 );
        const auto            n_pix    = static_cast<Eigen::Index>( mask.size() );
        const auto            offset   = static_cast<Eigen::Index>( z.scene_offset() );

        for ( Eigen::Index k = 0; k < x.size(); ++k )
        {
            bool skip = false;
            if ( k < 2 * n_pix )
                skip = crosses_node( sigmoid( x[k] - step ), sigmoid( x[k] + step ), 0.0, 1.0, g_skin );
            else if ( k == offset || k == offset + 1 )
            {
                const auto b = [&]( double v ) { return kCameraParamLimit * ( 2.0 * sigmoid( v ) - 1.0 ); };
                skip = crosses_node( b( x[k] - step ), b( x[k] + step ), -kCameraParamLimit, kCameraParamLimit, g_cam );
            }
            else if ( k == x.size() - 1 )
            {
                const auto t = [&]( double v ) { return 1.0 + 21.0 * sigmoid( v ); };
                skip         = t( x[k] - step ) <= 4.0 && t( x[k] + step ) >= 4.0;
            }
            if ( skip )
            {
                ++report.skipped_partials;
                continue;
            }
            Eigen::VectorXd xp = x, xm = x;
            xp[k] += step;
            xm[k] -= step;
            LatentImage zp = z, zm = z;
            zp.unpack( xp );
            zm.unpack( xm );
            const double lp = total_loss( zp, observed, mask, models, weights, &pgt, false, 1 ).terms.total;
            const double lm = total_loss( zm, observed, mask, models, weights, &pgt, false, 1 ).terms.total;
            const double numeric = ( lp - lm ) / ( 2.0 * step );
            report.max_relative_error =
                std::max( report.max_relative_error, relative_error( analytic[k], numeric, floor ) );
            ++report.checked_partials;
        }
    }
    return report;
}

} // namespace spectraface
