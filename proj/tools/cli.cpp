// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include "cli.hpp"

#include <spectraface/error.hpp>
#include <spectraface/harness.hpp>
#include <spectraface/image_io.hpp>
#include <spectraface/scene_io.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace spectraface::cli
{

namespace
{

struct Globals
{
    std::string   config;
    std::uint64_t seed    = 1;
    int           threads = 0;
};

ModelConfig model_config( const Globals &g )
{
    return g.config.empty() ? ModelConfig{} : ModelConfig::load( g.config );
}

nlohmann::json vector_json( const Eigen::VectorXd &v )
{
    return std::vector<double>( v.data(), v.data() + v.size() );
}

void print( const nlohmann::json &j )
{
    std::cout << j.dump( 2 ) << '\n';
}

// ---------------------------------------------------------------------------

struct LutArgs
{
    std::string           out, lut;
    std::optional<int>    size;
    std::optional<double> m, h;
};

int lut_build( const Globals &g, const LutArgs &a )
{
    const ModelConfig cfg    = model_config( g );
    OpticalConstants  optics = OpticalConstants::load( cfg.data_dir, cfg.grid );
    optics.apply_overrides( cfg.optics );
    optics.validate( cfg.grid );
    const SkinLut lut = SkinLut::build( optics, cfg.grid, a.size.value_or( cfg.skin_lut_size ) );
    lut.save( a.out );
    print( { { "lut", a.out }, { "size", lut.size() }, { "wavelengths", cfg.grid.size() } } );
    return kExitOk;
}

int lut_dump( const SkinLut &lut, const LutArgs &a )
{
    nlohmann::json j;
    j["size"]                  = lut.size();
    j["grid"]                  = { { "min", lut.grid().lambda_min() }, { "max", lut.grid().lambda_max() }, { "step", lut.grid().step() } };
    j["ranges"]["melanin"]     = { lut.ranges().melanin_min, lut.ranges().melanin_max };
    j["ranges"]["haemoglobin"] = { lut.ranges().blood_min, lut.ranges().blood_max };
    if ( a.m || a.h )
    {
        if ( !a.m || !a.h )
            throw ValidationError( "--melanin and --haemoglobin must be given together" );
        if ( *a.m < 0.0 || *a.m > 1.0 || *a.h < 0.0 || *a.h > 1.0 )
            throw ValidationError( "--melanin and --haemoglobin must lie in [0, 1]" );
        const auto s   = lut.sample( *a.m, *a.h );
        j["query"]     = { { "m", *a.m }, { "h", *a.h } };
        j["reflectance"] = vector_json( s.r );
    }
    print( j );
    return kExitOk;
}

// ---------------------------------------------------------------------------

int camera_pca( const Globals &g, std::optional<int> components, const std::string &out )
{
    const ModelConfig cfg = model_config( g );
    const auto        ds  = SensitivityDataset::load( cfg.data_dir / "camera_sensitivities.csv", cfg.grid );
    const CameraPCA   pca = fit_pca( ds, components.value_or( cfg.camera_components ) );
    nlohmann::json    j;
    j["cameras"]            = pca.cameras.size();
    j["components"]         = pca.dims();
    j["sigma"]              = vector_json( pca.sigma );
    j["explained_variance"] = pca.explained_variance();
    print( j );
    if ( !out.empty() )
    {
        j["mean"]  = vector_json( pca.mean );
        j["basis"] = nlohmann::json::array();
        for ( int k = 0; k < pca.dims(); ++k )
            j["basis"].push_back( vector_json( pca.components.col( k ) ) );
        j["camera_names"] = pca.cameras;
        write_json( out, j );
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct RenderArgs
{
    std::string melanin, haemoglobin, diffuse, specular, mask, scene, out, linear;
    int         bit_depth = 8;
};

int render( const Globals &g, const RenderArgs &a )
{
    const Models  models = Models::build( model_config( g ) );
    ParameterMaps maps{ read_map_pfm( a.melanin ), read_map_pfm( a.haemoglobin ), read_map_pfm( a.diffuse ),
                        read_map_pfm( a.specular ) };
    const Mask        mask  = read_mask_png( a.mask );
    const SceneParams scene = read_scene( a.scene );
    const auto        img   = render_image( maps, scene, mask, models, g.threads );
    write_png_rgb( a.out, encode_for_export( img.linear, models.pipeline ), a.bit_depth );
    if ( !a.linear.empty() )
        write_rgb_pfm( a.linear, img.linear );
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct FitArgs
{
    std::string         input, mask, out, pgt, scene;
    int                 iterations = FitOptions{}.max_iterations;
    double              step       = FitOptions{}.step;
    double              tolerance  = FitOptions{}.tolerance;
    bool                freeze     = false;
    std::vector<double> weights;
};

FitOptions fit_options( const FitArgs &a, int threads )
{
    FitOptions o;
    o.max_iterations = a.iterations;
    o.step           = a.step;
    o.tolerance      = a.tolerance;
    o.threads        = threads;
    if ( !a.weights.empty() )
    {
        if ( a.weights.size() != 4 )
            throw ValidationError( "--weights takes four values" );
        o.weights = { a.weights[0], a.weights[1], a.weights[2], a.weights[3] };
    }
    return o;
}

int fit_command( const Globals &g, const FitArgs &a )
{
    const Models   models = Models::build( model_config( g ) );
    const RgbImage input  = read_rgb_image( a.input );
    const Mask     mask   = read_mask_png( a.mask );
    if ( !input.same_shape( mask ) )
        throw ValidationError( "input image and mask dimensions differ" );

    FitOptions options = fit_options( a, g.threads );
    if ( a.freeze && a.scene.empty() )
        throw ValidationError( "--freeze-scene needs --scene" );
    if ( !a.scene.empty() )
    {
        // Scene latents from the file; per-pixel latents start at zero.
        const SceneParams scene = read_scene( a.scene );
        const Map         half( mask.width, mask.height, 0.5 ), one( mask.width, mask.height, 1.0 );
        LatentImage       z     = latents_from_parameters( half, half, one, one, scene );
        z.z_m = z.z_h = z.z_d = z.z_s = Map( mask.width, mask.height, 0.0 );
        options.initial      = z;
        options.freeze_scene = a.freeze;
    }
    std::optional<Map> pgt;
    if ( !a.pgt.empty() )
    {
        pgt = read_map_pfm( a.pgt );
        if ( !pgt->same_shape( mask ) )
            throw ValidationError( "pseudo ground-truth shading does not match the mask" );
    }

    const FitResult result = fit( input, mask, models, options, pgt ? &*pgt : nullptr );
    write_decomposition( a.out, result.decomposition, models );
    write_json( std::filesystem::path( a.out ) / "report.json", fit_report_json( result ) );
    print( { { "iterations", result.iterations },
             { "converged", result.converged },
             { "stop_reason", result.stop_reason },
             { "loss", result.decomposition.loss.total },
             { "appearance_rmse", std::sqrt( result.decomposition.loss.appearance ) } } );
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct EditArgs
{
    std::string           decomposition, op, out, linear;
    std::optional<double> amount;
    int                   bit_depth = 8;
};

int edit_command( const Globals &g, const EditArgs &a )
{
    const Models        models = Models::build( model_config( g ) );
    const Decomposition d      = read_decomposition( a.decomposition, models );
    EditedImage         edited;
    if ( a.op == "specular" )
        edited = edit_specular_remove( d, models, a.amount.value_or( 0.0 ) );
    else if ( a.op == "melanin" )
        edited = edit_melanin_shift( d, models, a.amount.value_or( 0.6 ) );
    else
        edited = edit_haemoglobin_scale( d, models, a.amount.value_or( 0.5 ) );
    write_png_rgb( a.out, edited.encoded, a.bit_depth );
    if ( !a.linear.empty() )
        write_rgb_pfm( a.linear, edited.linear.linear );
    print( { { "op", a.op },
             { "in_range", maps_in_range( edited.maps, d.mask, models.optics.ranges ) },
             { "out", a.out } } );
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs
{
    std::string cases, report, out;
    FitArgs     fit;
    bool        warm_start = false;
    bool        no_pgt     = false;
};

int bench_command( const Globals &g, const BenchArgs &a )
{
    const Models models = Models::build( model_config( g ) );
    BenchOptions options;
    options.fit             = fit_options( a.fit, 1 );
    options.warm_start      = a.warm_start;
    options.use_shading_pgt = !a.no_pgt;
    options.threads         = g.threads;
    if ( !a.out.empty() )
        options.output_dir = a.out;
    const BenchReport    report = bench( load_cases( a.cases ), models, options );
    const nlohmann::json j      = bench_report_json( report );
    write_json( a.report, j );
    print( j["mean"] );
    return kExitOk;
}

int synth_command( const Globals &g, const std::string &out, int count, const SynthOptions &options )
{
    const Models models = Models::build( model_config( g ) );
    const auto   dirs   = write_synthetic_suite( out, count, models, options, g.seed );
    print( { { "cases", dirs.size() }, { "root", out }, { "seed", g.seed } } );
    return kExitOk;
}

int gradcheck_command( const Globals &g, int points, double step )
{
    const Models models   = Models::build( model_config( g ) );
    const auto   renderer = check_gradients( models, points, step, g.seed );
    const auto   loss     = check_loss_gradients( models, points, step, g.seed );
    constexpr double kTolerance = 1e-3;
    const bool       pass       = renderer.max_relative_error < kTolerance && loss.max_relative_error < kTolerance;
    print( { { "points", points },
             { "step", step },
             { "renderer", { { "max_relative_error", renderer.max_relative_error },
                             { "skipped_partials", renderer.skipped_partials } } },
             { "total_loss", { { "max_relative_error", loss.max_relative_error },
                               { "checked_partials", loss.checked_partials },
                               { "skipped_partials", loss.skipped_partials } } },
             { "pass", pass } } );
    return pass ? kExitOk : kExitRuntime;
}

} // namespace

int run( int argc, char **argv )
{
    CLI::App app{ "Spectral skin appearance model: rendering, fitting and editing" };
    app.name( "spectraface" );
    app.require_subcommand( 1 );
    app.fallthrough();

    Globals g;
    app.add_option( "--config", g.config, "Model configuration JSON (data directory, grid, optical constants)" )
        ->check( CLI::ExistingFile );
    app.add_option( "--seed", g.seed, "Random seed for synth and gradcheck" );
    app.add_option( "--threads", g.threads, "Worker threads (0 = hardware concurrency)" )->check( CLI::NonNegativeNumber );

    // lut
    LutArgs lut;
    auto   *lut_cmd = app.add_subcommand( "lut", "Skin reflectance lookup table" );
    lut_cmd->require_subcommand( 1 );
    auto *lut_build_cmd = lut_cmd->add_subcommand( "build", "Build and save the skin LUT" );
    lut_build_cmd->add_option( "--out", lut.out, "Output file" )->required();
    lut_build_cmd->add_option( "--size", lut.size, "Nodes per axis" )->check( CLI::Range( 2, 4096 ) );
    auto *lut_dump_cmd = lut_cmd->add_subcommand( "dump", "Print a saved LUT header and optionally one spectrum" );
    lut_dump_cmd->add_option( "--lut", lut.lut, "LUT file" )->required()->check( CLI::ExistingFile );
    lut_dump_cmd->add_option( "--melanin", lut.m, "Normalized melanin coordinate in [0, 1]" );
    lut_dump_cmd->add_option( "--haemoglobin", lut.h, "Normalized haemoglobin coordinate in [0, 1]" );

    // camera
    std::optional<int> pca_components;
    std::string        pca_out;
    auto              *camera_cmd = app.add_subcommand( "camera", "Camera sensitivity model" );
    camera_cmd->require_subcommand( 1 );
    auto *pca_cmd = camera_cmd->add_subcommand( "pca", "Fit the sensitivity PCA and report explained variance" );
    pca_cmd->add_option( "--components", pca_components, "Number of components" )->check( CLI::PositiveNumber );
    pca_cmd->add_option( "--out", pca_out, "Write the model as JSON" );

    // render
    RenderArgs ra;
    auto      *render_cmd = app.add_subcommand( "render", "Render parameter maps to an sRGB image" );
    render_cmd->add_option( "--melanin", ra.melanin, "Melanin volume fraction map (PFM)" )->required()->check( CLI::ExistingFile );
    render_cmd->add_option( "--haemoglobin", ra.haemoglobin, "Blood volume fraction map (PFM)" )->required()->check( CLI::ExistingFile );
    render_cmd->add_option( "--diffuse", ra.diffuse, "Diffuse shading map (PFM)" )->required()->check( CLI::ExistingFile );
    render_cmd->add_option( "--specular", ra.specular, "Specular shading map (PFM)" )->required()->check( CLI::ExistingFile );
    render_cmd->add_option( "--mask", ra.mask, "Foreground mask (PNG)" )->required()->check( CLI::ExistingFile );
    render_cmd->add_option( "--scene", ra.scene, "Scene JSON" )->required()->check( CLI::ExistingFile );
    render_cmd->add_option( "--out", ra.out, "Output PNG" )->required();
    render_cmd->add_option( "--linear", ra.linear, "Also write linear sRGB as PFM" );
    render_cmd->add_option( "--bit-depth", ra.bit_depth, "PNG bit depth" )->check( CLI::IsMember( { 8, 16 } ) );

    // fit
    const auto add_fit_options = [&]( CLI::App *cmd, FitArgs &f ) {
        cmd->add_option( "--iterations", f.iterations, "Maximum optimizer iterations" )->check( CLI::PositiveNumber );
        cmd->add_option( "--step", f.step, "Adam step size" )->check( CLI::PositiveNumber );
        cmd->add_option( "--tolerance", f.tolerance, "Relative loss decrease over 50 iterations that stops the fit" )
            ->check( CLI::NonNegativeNumber );
        cmd->add_option( "--weights", f.weights, "Loss weights w1 w2 w3 w4" )->expected( 4 );
    };
    FitArgs fa;
    auto   *fit_cmd = app.add_subcommand( "fit", "Fit the model to an sRGB image" );
    fit_cmd->add_option( "--input", fa.input, "Input image (PNG or PFM, display-encoded)" )->required()->check( CLI::ExistingFile );
    fit_cmd->add_option( "--mask", fa.mask, "Foreground mask (PNG)" )->required()->check( CLI::ExistingFile );
    fit_cmd->add_option( "--out", fa.out, "Output directory" )->required();
    fit_cmd->add_option( "--pgt", fa.pgt, "Pseudo ground-truth diffuse shading (PFM)" )->check( CLI::ExistingFile );
    fit_cmd->add_option( "--scene", fa.scene, "Initial scene JSON" )->check( CLI::ExistingFile );
    fit_cmd->add_flag( "--freeze-scene", fa.freeze, "Keep camera and illuminant fixed at --scene" );
    add_fit_options( fit_cmd, fa );

    // edit
    EditArgs ea;
    auto    *edit_cmd = app.add_subcommand( "edit", "Edit a decomposition and re-render" );
    edit_cmd->add_option( "--decomposition", ea.decomposition, "Directory written by fit" )->required()->check( CLI::ExistingDirectory );
    edit_cmd->add_option( "--op", ea.op, "specular | melanin | haemoglobin" )
        ->required()
        ->check( CLI::IsMember( { "specular", "melanin", "haemoglobin" } ) );
    edit_cmd->add_option( "--amount", ea.amount,
                          "Specular constant (default 0), melanin shift (default 0.6) or haemoglobin factor (default 0.5)" );
    edit_cmd->add_option( "--out", ea.out, "Output PNG" )->required();
    edit_cmd->add_option( "--linear", ea.linear, "Also write linear sRGB as PFM" );
    edit_cmd->add_option( "--bit-depth", ea.bit_depth, "PNG bit depth" )->check( CLI::IsMember( { 8, 16 } ) );

    // bench
    BenchArgs ba;
    auto     *bench_cmd = app.add_subcommand( "bench", "Fit every case and report RMSE per map" );
    bench_cmd->add_option( "--cases", ba.cases, "Directory of case directories" )->required()->check( CLI::ExistingDirectory );
    bench_cmd->add_option( "--report", ba.report, "Report JSON path" )->required();
    bench_cmd->add_option( "--out", ba.out, "Directory for per-case decompositions" );
    bench_cmd->add_flag( "--warm-start", ba.warm_start, "Start each fit from the ground truth" );
    bench_cmd->add_flag( "--no-pgt", ba.no_pgt, "Ignore shading_pgt.pfm" );
    add_fit_options( bench_cmd, ba.fit );

    // synth
    std::string  synth_out;
    int          synth_count = 25;
    SynthOptions synth;
    auto        *synth_cmd = app.add_subcommand( "synth", "Write a synthetic bench suite" );
    synth_cmd->add_option( "--out", synth_out, "Output directory" )->required();
    synth_cmd->add_option( "--count", synth_count, "Number of cases" )->check( CLI::PositiveNumber );
    synth_cmd->add_option( "--width", synth.width, "Image width" )->check( CLI::PositiveNumber );
    synth_cmd->add_option( "--height", synth.height, "Image height" )->check( CLI::PositiveNumber );

    // gradcheck
    int    grad_points = 100;
    double grad_step   = 1e-4;
    auto  *grad_cmd    = app.add_subcommand( "gradcheck", "Compare analytic gradients with central differences" );
    grad_cmd->add_option( "--points", grad_points, "Random points" )->check( CLI::PositiveNumber );
    grad_cmd->add_option( "--step", grad_step, "Finite-difference step" )->check( CLI::PositiveNumber );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::CallForHelp &e )
    {
        return app.exit( e );
    }
    catch ( const CLI::CallForAllHelp &e )
    {
        return app.exit( e );
    }
    catch ( const CLI::ParseError &e )
    {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitValidation;
    }

    try
    {
        if ( lut_build_cmd->parsed() )
            return lut_build( g, lut );
        if ( lut_dump_cmd->parsed() )
            return lut_dump( SkinLut::load( lut.lut ), lut );
        if ( pca_cmd->parsed() )
            return camera_pca( g, pca_components, pca_out );
        if ( render_cmd->parsed() )
            return render( g, ra );
        if ( fit_cmd->parsed() )
            return fit_command( g, fa );
        if ( edit_cmd->parsed() )
            return edit_command( g, ea );
        if ( bench_cmd->parsed() )
            return bench_command( g, ba );
        if ( synth_cmd->parsed() )
            return synth_command( g, synth_out, synth_count, synth );
        if ( grad_cmd->parsed() )
            return gradcheck_command( g, grad_points, grad_step );
    }
    catch ( const ValidationError &e )
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    catch ( const std::exception &e )
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    std::cerr << app.help();
    return kExitValidation;
}

} // namespace spectraface::cli
