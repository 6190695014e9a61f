// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.

#include <spectraface/harness.hpp>
#include <spectraface/image_io.hpp>
#include <spectraface/scene_io.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace spectraface;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since( Clock::time_point start )
{
    return std::chrono::duration<double>( Clock::now() - start ).count();
}

double uniform( std::mt19937_64 &rng, double lo, double hi )
{
    return std::uniform_real_distribution<double>( lo, hi )( rng );
}

SceneParams random_scene( std::mt19937_64 &rng )
{
    SceneParams s;
    s.camera = { uniform( rng, -3, 3 ), uniform( rng, -3, 3 ) };
    std::array<double, kIlluminantCount> z;
    for ( auto &v: z )
        v = uniform( rng, -4, 4 );
    s.light.w = softmax_weights( z );
    s.light.t = uniform( rng, 1, 22 );
    return s;
}

double masked_rmse( const Map &a, const Map &b, const Mask &mask )
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

struct Outcome
{
    bool        pass = false;
    std::string detail;
};

std::string format( const char *fmt, auto... args )
{
    char buf[512];
    std::snprintf( buf, sizeof( buf ), fmt, args... );
    return buf;
}

int g_failures = 0;

void report( const char *name, const std::function<Outcome()> &criterion )
{
    Outcome out;
    try
    {
        out = criterion();
    }
    catch ( const std::exception &e )
    {
        out = { false, std::string( "exception: " ) + e.what() };
    }
    std::printf( "%s  %-28s %s\n", out.pass ? "PASS" : "FAIL", name, out.detail.c_str() );
    std::fflush( stdout );
    g_failures += !out.pass;
}

struct RoundTrip
{
    std::vector<SyntheticCase> cases;
    std::vector<FitResult>     frozen, free;
};

RoundTrip &round_trip( const Models &models )
{
    static RoundTrip rt = [&] {
        RoundTrip r;
        for ( int k = 0; k < 10; ++k )
            r.cases.push_back( make_synthetic_case( models, SynthOptions{}, 1000 + k ) );
        return r;
    }();
    return rt;
}

Outcome gradient_correctness( const Models &models )
{
    const auto start  = Clock::now();
    const auto loss   = check_loss_gradients( models, 100, 1e-4, 2024 );
    const double time = seconds_since( start );
    return { loss.max_relative_error < 1e-3 && time < 30.0,
             format( "max_rel_err=%.3e (<1e-3) partials=%d skipped=%d time=%.2fs (<30s)", loss.max_relative_error,
                     loss.checked_partials, loss.skipped_partials, time ) };
}

Outcome round_trip_frozen( const Models &models )
{
    auto        &rt    = round_trip( models );
    const auto   start = Clock::now();
    double       mel = 0.0, hb = 0.0, app = 0.0;
    for ( const auto &c: rt.cases )
    {
        FitOptions o;
        o.freeze_scene = true;
        auto init      = LatentImage::zeros( c.mask.width, c.mask.height );
        init.z_b       = c.latents.z_b;
        init.z_light   = c.latents.z_light;
        init.z_t       = c.latents.z_t;
        o.initial      = init;
        rt.frozen.push_back( fit( c.encoded, c.mask, models, o ) );
        const auto &d = rt.frozen.back().decomposition;
        mel = std::max( mel, masked_rmse( d.maps.melanin, c.truth.melanin, c.mask ) );
        hb  = std::max( hb, masked_rmse( d.maps.haemoglobin, c.truth.haemoglobin, c.mask ) );
        app = std::max( app, appearance_rmse( d.reconstruction.linear, c.linear, c.mask ) );
    }
    const double time = seconds_since( start );
    return { mel < 0.02 && hb < 0.02 && app < 1e-3 && time < 300.0,
             format( "worst f_mel=%.4f f_blood=%.4f (<0.02) appearance=%.3e (<1e-3) time=%.1fs (<300s)", mel, hb, app,
                     time ) };
}

Outcome round_trip_free( const Models &models )
{
    auto        &rt    = round_trip( models );
    const auto   start = Clock::now();
    double       app   = 0.0;
    for ( const auto &c: rt.cases )
    {
        rt.free.push_back( fit( c.encoded, c.mask, models, FitOptions{} ) );
        app = std::max( app, appearance_rmse( rt.free.back().decomposition.reconstruction.linear, c.linear, c.mask ) );
    }
    const double time = seconds_since( start );
    return { app < 1e-3 && time < 600.0,
             format( "worst appearance=%.3e (<1e-3) time=%.1fs (<600s)", app, time ) };
}

Outcome conservation( const Models &models )
{
    std::mt19937_64 rng( 7 );
    double          illum = 0.0;
    for ( int k = 0; k < 1000; ++k )
    {
        const auto s = random_scene( rng );
        illum        = std::max( illum, std::abs( mix_illuminant( s.light, models.illuminants ).spd.sum() - 1.0 ) );
    }

    double     rows = 0.0;
    const auto row_error = [&]( const Eigen::Matrix3d &t ) {
        rows = std::max( rows, ( t.rowwise().sum() - Eigen::Vector3d::Ones() ).cwiseAbs().maxCoeff() );
    };
    for ( int i = 0; i < models.raw2xyz.size(); ++i )
        for ( int j = 0; j < models.raw2xyz.size(); ++j )
            row_error( models.raw2xyz.node( i, j ) );
    for ( int k = 0; k < 1000; ++k )
        row_error( models.raw2xyz.sample( uniform( rng, -3, 3 ), uniform( rng, -3, 3 ) ).value );

    double gamma = 0.0;
    for ( int k = 0; k < 100000; ++k )
    {
        const double x = k == 0 ? 1.0 : 1.0 - uniform( rng, 0.0, 1.0 );
        gamma          = std::max( gamma, std::abs( gamma_decode( gamma_encode( x ) ) - x ) );
    }
    return { illum < 1e-9 && rows < 1e-9 && gamma < 1e-12,
             format( "illuminant_sum=%.2e raw2xyz_rows=%.2e (<1e-9) gamma_round_trip=%.2e (<1e-12)", illum, rows,
                     gamma ) };
}

Outcome lut_fidelity( const Models &models )
{
    const auto      start = Clock::now();
    std::mt19937_64 rng( 11 );
    double          skin = 0.0, raw = 0.0;
    for ( int k = 0; k < 10000; ++k )
    {
        const double m = uniform( rng, 0, 1 ), h = uniform( rng, 0, 1 );
        const auto   direct = diffuse_reflectance( physical_from_normalized( m, h, models.optics.ranges ), models.optics, models.grid );
        skin = std::max( skin, ( models.skin.sample( m, h ).r - direct.values ).cwiseAbs().maxCoeff() );
    }
    for ( int k = 0; k < 10000; ++k )
    {
        const double b[2]{ uniform( rng, -3, 3 ), uniform( rng, -3, 3 ) };
        const auto   direct = raw2xyz( sensitivity_from_b( models.camera, b ), models.cmf.matrix );
        raw = std::max( raw, ( models.raw2xyz.sample( b[0], b[1] ).value - direct ).cwiseAbs().maxCoeff() );
    }
    const double time = seconds_since( start );
    return { skin < 1e-3 && raw < 1e-3 && time < 60.0 && models.skin.size() == 256 && models.raw2xyz.size() == 65,
             format( "skin(G=%d)=%.3e raw2xyz(K=%d)=%.3e (<1e-3) time=%.2fs (<60s)", models.skin.size(), skin,
                     models.raw2xyz.size(), raw, time ) };
}

Outcome pca_claim( const Models &models )
{
    const double ev = models.camera.explained_variance();
    return { models.camera.dims() == 2 && ev >= 0.95,
             format( "N=%d explained_variance=%.4f (>=0.95) cameras=%zu", models.camera.dims(), ev,
                     models.cameras.cameras.size() ) };
}

Outcome specular_white( const Models &models )
{
    std::mt19937_64 rng( 13 );
    double          worst = 0.0;
    for ( int k = 0; k < 100; ++k )
    {
        const SceneState      state( random_scene( rng ), models );
        const double          i_s = uniform( rng, 0.05, 4.0 );
        const Eigen::VectorXd q   = Eigen::VectorXd::Constant( models.grid.size(), i_s );
        const Eigen::Vector3d raw = state.lit_sensitivity.transpose() * q;
        worst = std::max( worst, ( state.white_balance.cwiseProduct( raw ) - Eigen::Vector3d::Constant( i_s ) ).cwiseAbs().maxCoeff() );
    }
    return { worst < 1e-9, format( "max_dev=%.3e (<1e-9) pairs=100", worst ) };
}

Outcome bench_schema( const Models &models )
{
    const auto root = std::filesystem::temp_directory_path() / "spectraface_acceptance_bench";
    std::filesystem::remove_all( root );
    const auto start = Clock::now();
    write_synthetic_suite( root / "cases", 25, models, SynthOptions{}, 5000 );
    BenchOptions o;
    o.output_dir      = root / "out";
    const auto report = bench( load_cases( root / "cases" ), models, o );
    const auto json   = bench_report_json( report );
    write_json( root / "report.json", json );

    bool                     schema = json["columns"].size() == 6 && json["mean"].size() == 6;
    std::vector<std::string> expected( kBenchColumns.begin(), kBenchColumns.end() );
    for ( std::size_t k = 0; schema && k < 6; ++k )
        schema = json["columns"][k] == expected[k] && json["mean"].contains( expected[k] );
    for ( const auto &c: json["cases"] )
        schema = schema && c["rmse"].size() == 6;
    const double time = seconds_since( start );

    const std::string cmd = std::string( SPECTRAFACE_PYTHON ) + " " + SPECTRAFACE_TEST_DIR +
                            "/oracles/recompute_reconstruction.py --cases " + ( root / "cases" ).string() +
                            " --outputs " + ( root / "out" ).string() + " --report " + ( root / "report.json" ).string() +
                            " --tolerance 1e-9";
    std::string oracle;
    int         status = -1;
    if ( FILE *pipe = popen( cmd.c_str(), "r" ) )
    {
        char line[256];
        while ( std::fgets( line, sizeof( line ), pipe ) )
            oracle += line;
        status = pclose( pipe );
    }
    while ( !oracle.empty() && oracle.back() == '\n' )
        oracle.pop_back();
    return { schema && report.cases.size() == 25 && status == 0,
             format( "cases=%zu columns=%zu schema=%s oracle[%s] mean_reconstruction=%.3e bench_time=%.1fs",
                     report.cases.size(), json["columns"].size(), schema ? "ok" : "bad", oracle.c_str(),
                     report.mean[5].value_or( NAN ), time ) };
}

Outcome editing_sanity( const Models &models )
{
    auto &rt = round_trip( models );
    if ( rt.free.empty() )
        for ( const auto &c: rt.cases )
            rt.free.push_back( fit( c.encoded, c.mask, models, FitOptions{} ) );

    int    brighter = 0, violations = 0, pixels = 0;
    double worst_increase = 0.0;
    for ( const auto &r: rt.free )
    {
        const auto &d      = r.decomposition;
        const auto  darker = edit_melanin_shift( d, models, 0.6 );
        const auto  blood  = edit_haemoglobin_scale( d, models, 0.5 );
        const auto  matte  = edit_specular_remove( d, models );
        for ( std::size_t i = 0; i < d.mask.size(); ++i )
        {
            if ( !d.mask[i] )
                continue;
            ++pixels;
            const double before = luminance( d.reconstruction.linear[i] );
            const double after  = luminance( darker.linear.linear[i] );
            if ( after > before )
            {
                ++brighter;
                worst_increase = std::max( worst_increase, after - before );
            }
            for ( const auto *e: { &blood, &matte } )
                violations += !e->linear.linear[i].allFinite();
        }
        violations += !maps_in_range( blood.maps, d.mask, models.optics.ranges );
        violations += !maps_in_range( matte.maps, d.mask, models.optics.ranges );
        violations += !maps_in_range( darker.maps, d.mask, models.optics.ranges );
    }
    return { brighter == 0 && violations == 0,
             format( "melanin+0.6 brighter_pixels=%d/%d (max_increase=%.2e) range_violations=%d", brighter, pixels,
                     worst_increase, violations ) };
}

} // namespace

int main()
{
    const auto   start  = Clock::now();
    const Models models = Models::build();

    report( "gradient-correctness", [&] { return gradient_correctness( models ); } );
    report( "round-trip-frozen-scene", [&] { return round_trip_frozen( models ); } );
    report( "round-trip-all-free", [&] { return round_trip_free( models ); } );
    report( "conservation", [&] { return conservation( models ); } );
    report( "lut-fidelity", [&] { return lut_fidelity( models ); } );
    report( "pca-explained-variance", [&] { return pca_claim( models ); } );
    report( "specular-white", [&] { return specular_white( models ); } );
    report( "bench-schema", [&] { return bench_schema( models ); } );
    report( "editing-sanity", [&] { return editing_sanity( models ); } );

    std::printf( "%d/9 criteria passed in %.1fs\n", 9 - g_failures, seconds_since( start ) );
    return g_failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
