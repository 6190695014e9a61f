// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/scene_io.hpp>
#include <spectraface/error.hpp>
#include <spectraface/image_io.hpp>

#include <fstream>

namespace spectraface
{

namespace
{

std::vector<double> to_vector( const Eigen::VectorXd &v )
{
    return { v.data(), v.data() + v.size() };
}

double number( const nlohmann::json &j, const char *key )
{
    if ( !j.contains( key ) || !j.at( key ).is_number() )
        throw ValidationError( std::string( "scene JSON: missing numeric field '" ) + key + "'" );
    return j.at( key ).get<double>();
}

} // namespace

nlohmann::json scene_to_json( const SceneParams &scene, const Models *models )
{
    nlohmann::json j;
    j["camera"]["b"] = scene.camera;
    auto &ill        = j["illuminant"];
    ill["wA"]        = scene.light.w[kIlluminantA];
    ill["wD"]        = scene.light.w[kIlluminantD];
    ill["t"]         = scene.light.t;
    std::vector<double> wf( scene.light.w.begin() + kFirstFluorescent, scene.light.w.end() );
    ill["wF"] = wf;
    if ( models )
    {
        const Eigen::MatrixXd s = sensitivity_from_b( models->camera, scene.camera );
        auto                 &d = j["derived"];
        d["wavelengths"]        = to_vector( Eigen::VectorXd::LinSpaced(
            models->grid.size(), models->grid.lambda_min(), models->grid.lambda_max() ) );
        d["sensitivity"]["R"] = to_vector( s.col( 0 ) );
        d["sensitivity"]["G"] = to_vector( s.col( 1 ) );
        d["sensitivity"]["B"] = to_vector( s.col( 2 ) );
        d["illuminant"]       = to_vector( mix_illuminant( scene.light, models->illuminants ).spd );
        d["cct"]              = cct_from_temperature_param( scene.light.t );
    }
    return j;
}

SceneParams scene_from_json( const nlohmann::json &j )
{
    if ( !j.is_object() || !j.contains( "camera" ) || !j.contains( "illuminant" ) )
        throw ValidationError( "scene JSON needs 'camera' and 'illuminant' objects" );
    SceneParams s;
    const auto &b = j.at( "camera" ).value( "b", nlohmann::json() );
    if ( !b.is_array() || b.size() != 2 )
        throw ValidationError( "scene JSON: camera.b must hold two numbers" );
    for ( std::size_t k = 0; k < 2; ++k )
    {
        if ( !b[k].is_number() )
            throw ValidationError( "scene JSON: camera.b must hold two numbers" );
        s.camera[k] = b[k].get<double>();
    }
    const auto &ill              = j.at( "illuminant" );
    s.light.w[kIlluminantA]      = number( ill, "wA" );
    s.light.w[kIlluminantD]      = number( ill, "wD" );
    s.light.t                    = number( ill, "t" );
    const auto &wf               = ill.value( "wF", nlohmann::json() );
    if ( !wf.is_array() || wf.size() != 12 )
        throw ValidationError( "scene JSON: illuminant.wF must hold twelve numbers" );
    for ( std::size_t k = 0; k < 12; ++k )
    {
        if ( !wf[k].is_number() )
            throw ValidationError( "scene JSON: illuminant.wF must hold twelve numbers" );
        s.light.w[kFirstFluorescent + k] = wf[k].get<double>();
    }
    s.validate();
    return s;
}

nlohmann::json read_json( const std::filesystem::path &path )
{
    std::ifstream in( path );
    if ( !in )
        throw ValidationError( "cannot open '" + path.string() + "'" );
    try
    {
        return nlohmann::json::parse( in );
    }
    catch ( const nlohmann::json::parse_error &e )
    {
        throw ValidationError( "invalid JSON in '" + path.string() + "': " + e.what() );
    }
}

void write_json( const std::filesystem::path &path, const nlohmann::json &j )
{
    std::ofstream out( path );
    if ( !out )
        throw Error( "cannot write '" + path.string() + "'" );
    out << j.dump( 2 ) << '\n';
    if ( !out )
        throw Error( "failed writing '" + path.string() + "'" );
}

SceneParams read_scene( const std::filesystem::path &path )
{
    return scene_from_json( read_json( path ) );
}

void write_scene( const std::filesystem::path &path, const SceneParams &scene, const Models *models )
{
    write_json( path, scene_to_json( scene, models ) );
}

RgbImage encode_for_export( const RgbImage &linear, const PipelineConstants &constants )
{
    RgbImage out = linear;
    for ( auto &px: out.data )
        for ( int c = 0; c < 3; ++c )
            px[c] = gamma_encode_for_export( px[c], constants );
    return out;
}

void write_decomposition( const std::filesystem::path &dir, const Decomposition &d, const Models &models )
{
    std::filesystem::create_directories( dir );
    write_map_pfm( dir / "melanin.pfm", d.maps.melanin );
    write_map_pfm( dir / "haemoglobin.pfm", d.maps.haemoglobin );
    write_map_pfm( dir / "diffuse.pfm", d.maps.diffuse );
    write_map_pfm( dir / "specular.pfm", d.maps.specular );
    write_mask_png( dir / "mask.png", d.mask );
    write_scene( dir / "scene.json", d.scene, &models );
    write_png_rgb( dir / "reconstruction.png", encode_for_export( d.reconstruction.linear, models.pipeline ), 16 );
}

Decomposition read_decomposition( const std::filesystem::path &dir, const Models &models )
{
    Decomposition d;
    d.maps.melanin     = read_map_pfm( dir / "melanin.pfm" );
    d.maps.haemoglobin = read_map_pfm( dir / "haemoglobin.pfm" );
    d.maps.diffuse     = read_map_pfm( dir / "diffuse.pfm" );
    d.maps.specular    = read_map_pfm( dir / "specular.pfm" );
    d.mask             = read_mask_png( dir / "mask.png" );
    d.scene            = read_scene( dir / "scene.json" );
    d.sensitivity      = sensitivity_from_b( models.camera, d.scene.camera );
    d.illuminant       = mix_illuminant( d.scene.light, models.illuminants ).spd;
    d.reconstruction   = render_image( d.maps, d.scene, d.mask, models );
    return d;
}

} // namespace spectraface
