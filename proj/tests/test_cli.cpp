// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <string>

using spectraface::testing::scratch_dir;

namespace
{

struct Run
{
    int         status = -1;
    std::string output;
};

Run cli( const std::string &args, const std::string &env = "" )
{
    const std::string cmd = env + " " + SPECTRAFACE_CLI + " " + args + " 2>&1";
    Run               r;
    if ( FILE *pipe = popen( cmd.c_str(), "r" ) )
    {
        char buf[4096];
        while ( std::size_t n = std::fread( buf, 1, sizeof( buf ), pipe ) )
            r.output.append( buf, n );
        const int raw = pclose( pipe );
        r.status      = WIFEXITED( raw ) ? WEXITSTATUS( raw ) : -1;
    }
    return r;
}

std::string slurp( const std::filesystem::path &p )
{
    std::ifstream in( p, std::ios::binary );
    return { std::istreambuf_iterator<char>( in ), {} };
}

} // namespace

TEST( Cli, UnknownFlagIsRejectedWithUsage )
{
    const auto r = cli( "--bogus" );
    EXPECT_EQ( r.status, 2 );
    EXPECT_NE( r.output.find( "Usage" ), std::string::npos );

    const auto s = cli( "render --nope 1" );
    EXPECT_EQ( s.status, 2 );
    EXPECT_NE( s.output.find( "Usage" ), std::string::npos );
}

TEST( Cli, MissingSubcommandIsAValidationError )
{
    EXPECT_EQ( cli( "" ).status, 2 );
}

TEST( Cli, HelpSucceeds )
{
    const auto r = cli( "--help" );
    EXPECT_EQ( r.status, 0 );
    for ( const char *sub: { "lut", "camera", "render", "fit", "edit", "bench", "gradcheck" } )
        EXPECT_NE( r.output.find( sub ), std::string::npos ) << sub;
}

TEST( Cli, GradcheckExitsZero )
{
    const auto r = cli( "gradcheck --points 100" );
    EXPECT_EQ( r.status, 0 ) << r.output;
}

TEST( Cli, BadDataDirectoryIsReported )
{
    const auto r = cli( "camera pca", "SPECTRAFACE_DATA=/nonexistent" );
    EXPECT_EQ( r.status, 2 ) << r.output;
    EXPECT_NE( r.output.find( "/nonexistent" ), std::string::npos );
}

TEST( Cli, LutBuildAndDump )
{
    const auto dir = scratch_dir( "cli_lut" );
    ASSERT_EQ( cli( "lut build --size 8 --out " + ( dir / "s.lut" ).string() ).status, 0 );
    const auto r = cli( "lut dump --lut " + ( dir / "s.lut" ).string() + " --melanin 0.5 --haemoglobin 0.5" );
    EXPECT_EQ( r.status, 0 ) << r.output;
    EXPECT_EQ( cli( "lut dump --lut " + ( dir / "s.lut" ).string() + " --melanin 1.5" ).status, 2 );
}

TEST( Cli, SynthFitEditRenderBenchPipeline )
{
    const auto dir = scratch_dir( "cli_flow" );
    ASSERT_EQ( cli( "--seed 4 synth --count 2 --width 12 --height 12 --out " + ( dir / "cases" ).string() ).status, 0 );
    const auto c0 = dir / "cases" / "case_000";

    const std::string fit_args = "fit --iterations 30 --input " + ( c0 / "input.png" ).string() + " --mask " +
                                 ( c0 / "mask.png" ).string() + " --out ";
    const auto a = cli( fit_args + ( dir / "fit_a" ).string() );
    ASSERT_EQ( a.status, 0 ) << a.output;
    for ( const char *f: { "melanin.pfm", "haemoglobin.pfm", "diffuse.pfm", "specular.pfm", "scene.json",
                           "reconstruction.png", "report.json" } )
        EXPECT_TRUE( std::filesystem::exists( dir / "fit_a" / f ) ) << f;

    // Identical inputs give byte-identical outputs.
    ASSERT_EQ( cli( fit_args + ( dir / "fit_b" ).string() ).status, 0 );
    for ( const char *f: { "melanin.pfm", "haemoglobin.pfm", "diffuse.pfm", "specular.pfm", "scene.json",
                           "reconstruction.png" } )
        EXPECT_EQ( slurp( dir / "fit_a" / f ), slurp( dir / "fit_b" / f ) ) << f;

    const auto d = dir / "fit_a";
    for ( const char *op: { "specular", "melanin", "haemoglobin" } )
    {
        const auto e = cli( "edit --decomposition " + d.string() + " --op " + op + " --out " +
                            ( dir / ( std::string( op ) + ".png" ) ).string() );
        EXPECT_EQ( e.status, 0 ) << e.output;
    }
    EXPECT_EQ( cli( "edit --decomposition " + d.string() + " --op teeth --out " + ( dir / "x.png" ).string() ).status, 2 );
    EXPECT_EQ( cli( "edit --decomposition " + d.string() + " --op haemoglobin --amount -1 --out " + ( dir / "x.png" ).string() ).status, 2 );

    const std::string render_args = "render --melanin " + ( d / "melanin.pfm" ).string() + " --haemoglobin " +
                                    ( d / "haemoglobin.pfm" ).string() + " --diffuse " + ( d / "diffuse.pfm" ).string() +
                                    " --specular " + ( d / "specular.pfm" ).string() + " --mask " +
                                    ( d / "mask.png" ).string() + " --scene " + ( d / "scene.json" ).string() + " --out ";
    ASSERT_EQ( cli( render_args + ( dir / "r1.png" ).string() ).status, 0 );
    ASSERT_EQ( cli( render_args + ( dir / "r2.png" ).string() ).status, 0 );
    EXPECT_EQ( slurp( dir / "r1.png" ), slurp( dir / "r2.png" ) );

    const auto b = cli( "bench --iterations 20 --cases " + ( dir / "cases" ).string() + " --report " +
                        ( dir / "report.json" ).string() );
    ASSERT_EQ( b.status, 0 ) << b.output;
    const auto j = nlohmann::json::parse( slurp( dir / "report.json" ) );
    EXPECT_EQ( j["columns"].size(), 6u );
    EXPECT_EQ( j["cases"].size(), 2u );
}

TEST( Cli, InvalidSceneIsAValidationError )
{
    const auto dir = scratch_dir( "cli_scene" );
    ASSERT_EQ( cli( "synth --count 1 --width 8 --height 8 --out " + ( dir / "cases" ).string() ).status, 0 );
    {
        std::ofstream out( dir / "bad.json" );
        out << R"({"camera": {"b": [9, 0]}, "illuminant": {"wA": 1, "wD": 0, "t": 5, "wF": [0,0,0,0,0,0,0,0,0,0,0,0]}})";
    }
    const auto c = dir / "cases" / "case_000";
    const auto r = cli( "fit --input " + ( c / "input.png" ).string() + " --mask " + ( c / "mask.png" ).string() +
                        " --scene " + ( dir / "bad.json" ).string() + " --out " + ( dir / "o" ).string() );
    EXPECT_EQ( r.status, 2 ) << r.output;
}
