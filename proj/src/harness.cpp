// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/harness.hpp>
#include <spectraface/error.hpp>
#include <spectraface/image_io.hpp>
#include <spectraface/parallel.hpp>
#include <spectraface/scene_io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace spectraface
{

// ---------------------------------------------------------------------------
// Edits

namespace
{

EditedImage finish_edit( ParameterMaps maps, const Decomposition &d, const Models &models )
{
    EditedImage out;
    out.linear  = render_image( maps, d.scene, d.mask, models );
    out.encoded = encode_for_export( out.linear.linear, models.pipeline );
    out.maps    = std::move( maps );
    return out;
}

double clamp_unit( double v )
{
    return std::clamp( v, 0.0, 1.0 );
}

} // namespace

EditedImage edit_specular_remove( const Decomposition &d, const Models &models, double constant )
{
    if ( !( constant >= 0.0 ) || !std::isfinite( constant ) )
        throw ValidationError( "specular constant must be finite and nonnegative" );
    ParameterMaps maps = d.maps;
    std::fill( maps.specular.data.begin(), maps.specular.data.end(), constant );
    return finish_edit( std::move( maps ), d, models );
}

EditedImage edit_melanin_shift( const Decomposition &d, const Models &models, double delta )
{
    if ( !std::isfinite( delta ) )
        throw ValidationError( "melanin shift must be finite" );
    const BioRanges &r    = models.optics.ranges;
    ParameterMaps    maps = d.maps;
    for ( auto &f: maps.melanin.data )
        f = std::lerp( r.melanin_min, r.melanin_max, clamp_unit( clamp_unit( normalized_melanin( f, r ) ) + delta ) );
    return finish_edit( std::move( maps ), d, models );
}

EditedImage edit_haemoglobin_scale( const Decomposition &d, const Models &models, double factor )
{
    if ( !( factor >= 0.0 ) || !std::isfinite( factor ) )
        throw ValidationError( "haemoglobin factor must be finite and nonnegative" );
    const BioRanges &r    = models.optics.ranges;
    ParameterMaps    maps = d.maps;
    for ( auto &f: maps.haemoglobin.data )
        f = std::clamp( f * factor, r.blood_min, r.blood_max );
    return finish_edit( std::move( maps ), d, models );
}

double luminance( const Eigen::Vector3d &rgb )
{
    return 0.2126 * rgb[0] + 0.7152 * rgb[1] + 0.0722 * rgb[2];
}

bool maps_in_range( const ParameterMaps &maps, const Mask &mask, const BioRanges &ranges )
{
    for ( std::size_t i = 0; i < mask.size(); ++i )
    {
        if ( !mask[i] )
            continue;
        const double fm = maps.melanin[i], fb = maps.haemoglobin[i];
        if ( !( fm >= ranges.melanin_min && fm <= ranges.melanin_max ) )
            return false;
        if ( !( fb >= ranges.blood_min && fb <= ranges.blood_max ) )
            return false;
        if ( !( maps.diffuse[i] >= 0.0 ) || !( maps.specular[i] >= 0.0 ) )
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Synthetic cases

void SynthOptions::validate() const
{
    if ( width <= 0 || height <= 0 )
        throw ValidationError( "synthetic image dimensions must be positive" );
    if ( !( latent_range > 0.0 ) || !( diffuse_min > 0.0 ) || !( diffuse_max >= diffuse_min ) )
        throw ValidationError( "invalid synthetic parameter ranges" );
    if ( !( max_channel > min_channel && min_channel > 0.0 && max_channel <= 1.0 ) )
        throw ValidationError( "synthetic channel limits must satisfy 0 < min < max <= 1" );
}

namespace
{

Mask ellipse_mask( int w, int h )
{
    Mask         mask( w, h, 0 );
    const double cx = 0.5 * w, cy = 0.5 * h, rx = 0.45 * w, ry = 0.45 * h;
    for ( int y = 0; y < h; ++y )
        for ( int x = 0; x < w; ++x )
        {
            const double u = ( x + 0.5 - cx ) / rx, v = ( y + 0.5 - cy ) / ry;
            mask( x, y ) = u * u + v * v <= 1.0 ? 255 : 0;
        }
    if ( count_foreground( mask ) == 0 )
        mask[mask.size() / 2] = 255;
    return mask;
}

} // namespace

SyntheticCase make_synthetic_case( const Models &models, const SynthOptions &options, std::uint64_t seed )
{
    options.validate();
    std::mt19937_64                        rng( seed );
    std::uniform_real_distribution<double> unit( 0.0, 1.0 );
    std::normal_distribution<double>       normal( 0.0, 1.5 );
    std::normal_distribution<double>       unit_normal( 0.0, 1.0 );
    const auto uniform = [&]( double lo, double hi ) { return lo + ( hi - lo ) * unit( rng ); };
    constexpr int kPixelTries = 200;
    constexpr int kSceneTries = 50;

    const int     w = options.width, h = options.height;
    SyntheticCase c;
    c.mask = ellipse_mask( w, h );

    for ( int attempt = 0; attempt < kSceneTries; ++attempt )
    {
        // PCA coefficients are in units of the dataset standard deviation.
        for ( double &b: c.scene.camera )
            b = std::clamp( unit_normal( rng ), -2.5, 2.5 );
        std::array<double, kIlluminantCount> logits{};
        for ( double &z: logits )
            z = normal( rng );
        c.scene.light.w = softmax_weights( logits );
        c.scene.light.t = uniform( kMinTemperatureParam, kMaxTemperatureParam );
        const SceneState state( c.scene, models );

        c.m = c.h = c.truth.diffuse = Map( w, h, 0.5 );
        c.truth.specular            = Map( w, h, 0.0 );
        c.linear = c.albedo_linear = RgbImage( w, h, Eigen::Vector3d::Zero() );
        bool ok                    = true;
        for ( std::size_t i = 0; i < c.mask.size() && ok; ++i )
        {
            if ( !c.mask[i] )
                continue;
            bool found = false;
            for ( int t = 0; t < kPixelTries && !found; ++t )
            {
                PixelParams p;
                p.m                   = sigmoid( uniform( -options.latent_range, options.latent_range ) );
                p.h                   = sigmoid( uniform( -options.latent_range, options.latent_range ) );
                const Eigen::Vector3d albedo = render_pixel( p, state, models );
                if ( albedo.minCoeff() * options.diffuse_min < options.min_channel )
                    continue;
                const double id = std::min( uniform( options.diffuse_min, options.diffuse_max ),
                                            options.max_channel / albedo.maxCoeff() );
                if ( albedo.minCoeff() * id < options.min_channel )
                    continue;
                c.m[i]             = p.m;
                c.h[i]             = p.h;
                c.truth.diffuse[i] = id;
                c.albedo_linear[i] = albedo;
                c.linear[i]        = id * albedo;
                found              = true;
            }
            ok = found;
        }
        if ( !ok )
            continue;

        const BioRanges &r  = models.optics.ranges;
        c.truth.melanin     = Map( w, h );
        c.truth.haemoglobin = Map( w, h );
        for ( std::size_t i = 0; i < c.mask.size(); ++i )
        {
            const auto phys         = physical_from_normalized( c.m[i], c.h[i], r );
            c.truth.melanin[i]     = phys.f_mel;
            c.truth.haemoglobin[i] = phys.f_blood;
        }
        c.encoded = c.linear;
        for ( auto &px: c.encoded.data )
            px = gamma_encode( px, models.pipeline );
        c.latents = latents_from_parameters( c.m, c.h, c.truth.diffuse, c.truth.specular, c.scene );
        return c;
    }
    throw NumericalError( "could not draw a synthetic scene with displayable skin pixels" );
}

void write_case( const std::filesystem::path &dir, const SyntheticCase &c, const Models &models )
{
    std::filesystem::create_directories( dir );
    write_png_rgb( dir / "input.png", c.encoded, 16 );
    write_rgb_pfm( dir / "input.pfm", c.encoded );
    write_mask_png( dir / "mask.png", c.mask );
    write_map_pfm( dir / "gt_melanin.pfm", c.truth.melanin );
    write_map_pfm( dir / "gt_haemoglobin.pfm", c.truth.haemoglobin );
    write_map_pfm( dir / "gt_diffuse.pfm", c.truth.diffuse );
    write_map_pfm( dir / "gt_specular.pfm", c.truth.specular );
    const RgbImage albedo = encode_for_export( c.albedo_linear, models.pipeline );
    write_png_rgb( dir / "gt_albedo.png", albedo, 16 );
    write_rgb_pfm( dir / "gt_albedo.pfm", albedo );
    write_map_pfm( dir / "shading_pgt.pfm", c.truth.diffuse );
    write_scene( dir / "gt_scene.json", c.scene, &models );
}

std::vector<std::filesystem::path> write_synthetic_suite(
    const std::filesystem::path &root, int count, const Models &models, const SynthOptions &options,
    std::uint64_t seed )
{
    if ( count <= 0 )
        throw ValidationError( "case count must be positive" );
    std::vector<std::filesystem::path> dirs;
    for ( int k = 0; k < count; ++k )
    {
        char name[32];
        std::snprintf( name, sizeof name, "case_%03d", k );
        dirs.push_back( root / name );
        write_case( dirs.back(), make_synthetic_case( models, options, seed + static_cast<std::uint64_t>( k ) ), models );
    }
    return dirs;
}

// ---------------------------------------------------------------------------
// Bench

namespace
{

template <typename T>
void require_shape( const T &image, const Mask &mask, const std::filesystem::path &path )
{
    if ( !image.same_shape( mask ) )
        throw ValidationError( "'" + path.string() + "' does not match the mask dimensions" );
}

std::optional<Map> optional_map( const std::filesystem::path &path, const Mask &mask )
{
    if ( !std::filesystem::exists( path ) )
        return std::nullopt;
    Map m = read_map_pfm( path );
    require_shape( m, mask, path );
    return m;
}

double masked_rmse( const Map &a, const Map &b, const Mask &mask, double scale = 1.0 )
{
    double      sum = 0.0;
    std::size_t n   = 0;
    for ( std::size_t i = 0; i < mask.size(); ++i )
        if ( mask[i] )
        {
            const double r = scale * a[i] - b[i];
            sum += r * r;
            ++n;
        }
    return std::sqrt( sum / static_cast<double>( n ) );
}

RgbImage round_to_float( RgbImage image )
{
    for ( auto &px: image.data )
        for ( int c = 0; c < 3; ++c )
            px[c] = static_cast<float>( px[c] );
    return image;
}

} // namespace

BenchCase load_case( const std::filesystem::path &dir )
{
    BenchCase c;
    c.dir  = dir;
    c.name = dir.filename().string();
    if ( c.name.empty() )
        c.name = dir.parent_path().filename().string();
    c.input_path = std::filesystem::exists( dir / "input.pfm" ) ? dir / "input.pfm" : dir / "input.png";
    c.input      = read_rgb_image( c.input_path );
    c.mask       = read_mask_png( dir / "mask.png" );
    require_shape( c.input, c.mask, c.input_path );
    if ( count_foreground( c.mask ) == 0 )
        throw ValidationError( "mask of case '" + c.name + "' is empty" );
    c.gt_melanin     = optional_map( dir / "gt_melanin.pfm", c.mask );
    c.gt_haemoglobin = optional_map( dir / "gt_haemoglobin.pfm", c.mask );
    c.gt_diffuse     = optional_map( dir / "gt_diffuse.pfm", c.mask );
    c.gt_specular    = optional_map( dir / "gt_specular.pfm", c.mask );
    c.shading_pgt    = optional_map( dir / "shading_pgt.pfm", c.mask );
    for ( const char *name: { "gt_albedo.pfm", "gt_albedo.png" } )
        if ( std::filesystem::exists( dir / name ) )
        {
            c.gt_albedo = read_rgb_image( dir / name );
            require_shape( *c.gt_albedo, c.mask, dir / name );
            break;
        }
    if ( std::filesystem::exists( dir / "gt_scene.json" ) )
        c.gt_scene = read_scene( dir / "gt_scene.json" );
    return c;
}

std::vector<BenchCase> load_cases( const std::filesystem::path &root )
{
    if ( !std::filesystem::is_directory( root ) )
        throw ValidationError( "case directory '" + root.string() + "' does not exist" );
    std::vector<std::filesystem::path> dirs;
    for ( const auto &entry: std::filesystem::directory_iterator( root ) )
        if ( entry.is_directory() &&
             ( std::filesystem::exists( entry.path() / "input.png" ) || std::filesystem::exists( entry.path() / "input.pfm" ) ) )
            dirs.push_back( entry.path() );
    std::sort( dirs.begin(), dirs.end() );
    if ( dirs.empty() )
        throw ValidationError( "no bench cases under '" + root.string() + "'" );
    std::vector<BenchCase> cases;
    for ( const auto &d: dirs )
        cases.push_back( load_case( d ) );
    return cases;
}

RgbImage scored_reconstruction( const Decomposition &d, const Models &models )
{
    return round_to_float( encode_for_export( d.reconstruction.linear, models.pipeline ) );
}

CaseScores score_case( const BenchCase &c, const Decomposition &d, const Models &models )
{
    CaseScores s;
    s.name            = c.name;
    const Mask &mask  = c.mask;
    s.loss            = d.loss;

    if ( c.gt_diffuse )
    {
        double dp = 0.0, dd = 0.0;
        for ( std::size_t i = 0; i < mask.size(); ++i )
            if ( mask[i] )
            {
                dp += d.maps.diffuse[i] * ( *c.gt_diffuse )[i];
                dd += d.maps.diffuse[i] * d.maps.diffuse[i];
            }
        s.diffuse_scale = dd > 0.0 ? dp / dd : 1.0;
        s.rmse[0]       = masked_rmse( d.maps.diffuse, *c.gt_diffuse, mask, s.diffuse_scale );
    }
    if ( c.gt_specular )
        s.rmse[1] = masked_rmse( d.maps.specular, *c.gt_specular, mask, s.diffuse_scale );
    if ( c.gt_albedo )
    {
        ParameterMaps flat = d.maps;
        std::fill( flat.diffuse.data.begin(), flat.diffuse.data.end(), 1.0 );
        std::fill( flat.specular.data.begin(), flat.specular.data.end(), 0.0 );
        const RgbImage albedo =
            round_to_float( encode_for_export( render_image( flat, d.scene, mask, models ).linear, models.pipeline ) );
        s.rmse[2] = appearance_rmse( albedo, round_to_float( *c.gt_albedo ), mask );
    }
    if ( c.gt_melanin )
        s.rmse[3] = masked_rmse( d.maps.melanin, *c.gt_melanin, mask );
    if ( c.gt_haemoglobin )
        s.rmse[4] = masked_rmse( d.maps.haemoglobin, *c.gt_haemoglobin, mask );
    s.rmse[5] = appearance_rmse( scored_reconstruction( d, models ), round_to_float( c.input ), mask );

    RgbImage observed_linear = c.input;
    for ( auto &px: observed_linear.data )
        px = gamma_decode( px, models.pipeline );
    s.reconstruction_linear = appearance_rmse( d.reconstruction.linear, observed_linear, mask );
    return s;
}

BenchReport bench( const std::vector<BenchCase> &cases, const Models &models, const BenchOptions &options )
{
    if ( cases.empty() )
        throw ValidationError( "bench needs at least one case" );
    options.fit.validate();
    BenchReport report;
    report.cases.resize( cases.size() );

    parallel_for( cases.size(), options.threads, [&]( std::size_t k ) {
        const BenchCase &c   = cases[k];
        FitOptions       fit = options.fit;
        fit.threads          = 1;
        if ( options.warm_start )
        {
            if ( !c.gt_melanin || !c.gt_haemoglobin || !c.gt_diffuse || !c.gt_specular )
                throw ValidationError( "warm start needs all four ground-truth maps in case '" + c.name + "'" );
            const BioRanges &r = models.optics.ranges;
            Map              m( c.mask.width, c.mask.height ), h( c.mask.width, c.mask.height );
            for ( std::size_t i = 0; i < c.mask.size(); ++i )
            {
                m[i] = clamp_unit( normalized_melanin( ( *c.gt_melanin )[i], r ) );
                h[i] = clamp_unit( normalized_blood( ( *c.gt_haemoglobin )[i], r ) );
            }
            fit.initial = latents_from_parameters(
                m, h, *c.gt_diffuse, *c.gt_specular, c.gt_scene.value_or( SceneParams::neutral() ) );
        }
        const Map      *pgt    = options.use_shading_pgt && c.shading_pgt ? &*c.shading_pgt : nullptr;
        const FitResult result = spectraface::fit( c.input, c.mask, models, fit, pgt );
        CaseScores      scores = score_case( c, result.decomposition, models );
        scores.iterations      = result.iterations;
        scores.converged       = result.converged;
        report.cases[k]        = std::move( scores );

        if ( options.output_dir )
        {
            const auto dir = *options.output_dir / c.name;
            write_decomposition( dir, result.decomposition, models );
            write_rgb_pfm( dir / "reconstruction.pfm", scored_reconstruction( result.decomposition, models ) );
            write_json( dir / "fit.json", fit_report_json( result ) );
        }
    } );

    for ( std::size_t col = 0; col < kBenchColumns.size(); ++col )
    {
        double      sum = 0.0;
        std::size_t n   = 0;
        for ( const auto &c: report.cases )
            if ( c.rmse[col] )
            {
                sum += *c.rmse[col];
                ++n;
            }
        if ( n )
            report.mean[col] = sum / static_cast<double>( n );
    }
    return report;
}

namespace
{

nlohmann::json columns_json( const std::array<std::optional<double>, 6> &values )
{
    nlohmann::json j = nlohmann::json::object();
    for ( std::size_t k = 0; k < kBenchColumns.size(); ++k )
    {
        const std::string key( kBenchColumns[k] );
        if ( values[k] )
            j[key] = *values[k];
        else
            j[key] = "N/A";
    }
    return j;
}

nlohmann::json terms_json( const LossBreakdown &t )
{
    nlohmann::json j;
    j["appearance"]        = t.appearance;
    j["camera_prior"]      = t.camera_prior;
    j["specular_sparsity"] = t.specular_sparsity;
    j["shading"]           = t.shading;
    j["total"]             = t.total;
    if ( std::isfinite( t.shading_scale ) )
        j["shading_scale"] = t.shading_scale;
    else
        j["shading_scale"] = nullptr;
    return j;
}

} // namespace

nlohmann::json bench_report_json( const BenchReport &report )
{
    nlohmann::json j;
    j["columns"] = nlohmann::json::array();
    for ( auto c: kBenchColumns )
        j["columns"].push_back( std::string( c ) );
    j["reconstruction_space"] = "gamma";
    j["cases"]                = nlohmann::json::array();
    for ( const auto &c: report.cases )
    {
        nlohmann::json e;
        e["name"]                            = c.name;
        e["rmse"]                            = columns_json( c.rmse );
        e["extras"]["reconstruction_linear"] = c.reconstruction_linear;
        e["extras"]["diffuse_scale"]         = c.diffuse_scale;
        e["extras"]["iterations"]            = c.iterations;
        e["extras"]["converged"]             = c.converged;
        e["extras"]["loss"]                  = terms_json( c.loss );
        j["cases"].push_back( e );
    }
    j["mean"] = columns_json( report.mean );
    return j;
}

nlohmann::json fit_report_json( const FitResult &result )
{
    nlohmann::json j;
    j["iterations"]  = result.iterations;
    j["converged"]   = result.converged;
    j["stop_reason"] = result.stop_reason;
    j["wall_time"]   = result.wall_time;
    j["final"]       = terms_json( result.decomposition.loss );

    const auto &scene          = result.decomposition.scene;
    j["theta"]["camera"]       = scene.camera;
    j["theta"]["weights"]      = scene.light.w;
    j["theta"]["t"]            = scene.light.t;
    j["theta"]["cct"]          = cct_from_temperature_param( scene.light.t );

    j["trace"] = nlohmann::json::array();
    for ( const auto &e: result.trace )
    {
        nlohmann::json t = terms_json( e.terms );
        t["iteration"]   = e.iteration;
        t["step"]        = e.step;
        j["trace"].push_back( t );
    }
    return j;
}

} // namespace spectraface
