// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/models.hpp>
#include <spectraface/error.hpp>

#include <fstream>

namespace spectraface
{

ModelConfig ModelConfig::from_json( const nlohmann::json &j, const std::filesystem::path &base_dir )
{
    const auto resolve = [&]( const std::string &p ) {
        std::filesystem::path path( p );
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };

    ModelConfig c;
    try
    {
        if ( j.contains( "data_dir" ) )
            c.data_dir = resolve( j.at( "data_dir" ).get<std::string>() );
        if ( j.contains( "grid" ) )
        {
            const auto &g = j.at( "grid" );
            c.grid = WavelengthGrid( g.value( "min", 400.0 ), g.value( "max", 720.0 ), g.value( "step", 10.0 ) );
        }
        c.camera_components = j.value( "camera_components", c.camera_components );
        c.skin_lut_size     = j.value( "skin_lut_size", c.skin_lut_size );
        c.raw2xyz_lut_size  = j.value( "raw2xyz_lut_size", c.raw2xyz_lut_size );
        if ( j.contains( "skin_lut" ) )
            c.skin_lut_path = resolve( j.at( "skin_lut" ).get<std::string>() );
        if ( j.contains( "optics" ) )
            c.optics = j.at( "optics" );
    }
    catch ( const nlohmann::json::exception &e )
    {
        throw ValidationError( std::string( "bad model config: " ) + e.what() );
    }
    return c;
}

ModelConfig ModelConfig::load( const std::filesystem::path &path )
{
    std::ifstream in( path );
    if ( !in )
        throw ValidationError( "cannot open config " + path.string() );
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch ( const nlohmann::json::exception &e )
    {
        throw ValidationError( path.string() + ": " + e.what() );
    }
    return from_json( j, path.parent_path() );
}

Models Models::build( const ModelConfig &config )
{
    Models m;
    m.grid        = config.grid;
    m.cmf         = load_cmf( config.data_dir / "cmf_1931.csv", m.grid );
    m.illuminants = IlluminantBank::load( config.data_dir, m.grid );
    m.cameras     = SensitivityDataset::load( config.data_dir / "camera_sensitivities.csv", m.grid );
    m.camera      = fit_pca( m.cameras, config.camera_components );
    m.camera_jacobian = sensitivity_jacobian( m.camera );
    m.raw2xyz     = Raw2XyzLut::build( m.camera, m.cmf.matrix, config.raw2xyz_lut_size );

    m.optics = OpticalConstants::load( config.data_dir, m.grid );
    try
    {
        m.optics.apply_overrides( config.optics );
    }
    catch ( const nlohmann::json::exception &e )
    {
        throw ValidationError( std::string( "bad optics override: " ) + e.what() );
    }
    m.optics.validate( m.grid );

    if ( config.skin_lut_path )
    {
        m.skin = SkinLut::load( *config.skin_lut_path );
        if ( m.skin.grid() != m.grid )
            throw ValidationError( "skin LUT was built on a different wavelength grid" );
        const auto &r = m.skin.ranges(), &o = m.optics.ranges;
        if ( r.melanin_min != o.melanin_min || r.melanin_max != o.melanin_max || r.blood_min != o.blood_min ||
             r.blood_max != o.blood_max )
            throw ValidationError( "skin LUT was built for different chromophore ranges" );
    }
    else
        m.skin = SkinLut::build( m.optics, m.grid, config.skin_lut_size );
    return m;
}

} // namespace spectraface
