// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/spectra.hpp>
#include <spectraface/error.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spectraface
{

WavelengthGrid::WavelengthGrid( double lambda_min, double lambda_max, double step )
    : min_( lambda_min ), max_( lambda_max ), step_( step )
{
    if ( !( step > 0.0 ) || !( lambda_max > lambda_min ) || !std::isfinite( lambda_min ) ||
         !std::isfinite( lambda_max ) )
        throw ValidationError( "wavelength grid must be strictly increasing with a positive step" );

    const double intervals = ( lambda_max - lambda_min ) / step;
    const double rounded   = std::round( intervals );
    if ( std::abs( intervals - rounded ) > 1e-9 * std::max( 1.0, rounded ) )
        throw ValidationError( "wavelength grid range is not a whole number of steps" );
    size_ = static_cast<int>( rounded ) + 1;
}

int WavelengthGrid::index_of( double nm ) const
{
    const double pos = ( nm - min_ ) / step_;
    const double idx = std::round( pos );
    if ( std::abs( pos - idx ) > 1e-9 || idx < 0 || idx >= size_ )
        throw ValidationError( "wavelength " + std::to_string( nm ) + " nm is not a grid node" );
    return static_cast<int>( idx );
}

Spectrum::Spectrum( WavelengthGrid g, Eigen::VectorXd v ) : grid( g ), values( std::move( v ) )
{
    if ( values.size() != grid.size() )
        throw ValidationError( "spectrum length does not match its wavelength grid" );
    if ( !values.allFinite() )
        throw ValidationError( "spectrum contains non-finite values" );
}

namespace
{

std::vector<std::string> split_fields( std::string_view line )
{
    std::vector<std::string> out;
    std::string              field;
    bool                     pending = false;
    for ( char c: line )
    {
        if ( c == ',' || c == '\t' || c == ' ' || c == ';' || c == '\r' )
        {
            // Commas delimit even empty fields; runs of blanks do not.
            if ( c == ',' || c == ';' || pending )
            {
                out.push_back( field );
                field.clear();
            }
            pending = false;
        }
        else
        {
            field.push_back( c );
            pending = true;
        }
    }
    if ( pending || !field.empty() )
        out.push_back( field );
    return out;
}

bool parse_double( const std::string &s, double &out )
{
    if ( s.empty() )
        return false;
    const char *first = s.data();
    const char *last  = s.data() + s.size();
    if ( *first == '+' )
        ++first;
    auto [ptr, ec] = std::from_chars( first, last, out );
    return ec == std::errc() && ptr == last;
}

} // namespace

SpectralTable SpectralTable::parse( std::string_view text, std::string_view source )
{
    std::vector<double>              wavelengths;
    std::vector<std::string>         labels;
    std::vector<std::vector<double>> columns;

    std::istringstream in{ std::string( text ) };
    std::string        line;
    bool               have_header = false;
    int                line_no     = 0;
    const auto         fail        = [&]( const std::string &what ) {
        throw ValidationError(
            std::string( source ) + ":" + std::to_string( line_no ) + ": " + what );
    };

    while ( std::getline( in, line ) )
    {
        ++line_no;
        const auto first = line.find_first_not_of( " \t\r" );
        if ( first == std::string::npos || line[first] == '#' )
            continue;

        auto fields = split_fields( std::string_view( line ).substr( first ) );
        if ( !have_header )
        {
            if ( fields.size() < 2 )
                fail( "header needs a wavelength column and at least one value column" );
            labels.assign( fields.begin() + 1, fields.end() );
            columns.resize( labels.size() );
            have_header = true;
            continue;
        }
        if ( fields.size() != labels.size() + 1 )
            fail( "expected " + std::to_string( labels.size() + 1 ) + " fields, got " +
                  std::to_string( fields.size() ) );

        double wl = 0.0;
        if ( !parse_double( fields[0], wl ) )
            fail( "bad wavelength '" + fields[0] + "'" );
        if ( !wavelengths.empty() && !( wl > wavelengths.back() ) )
            fail( "wavelengths must be strictly increasing" );
        wavelengths.push_back( wl );
        for ( std::size_t c = 0; c < labels.size(); ++c )
        {
            double v = 0.0;
            if ( !parse_double( fields[c + 1], v ) || !std::isfinite( v ) )
                fail( "bad value '" + fields[c + 1] + "'" );
            columns[c].push_back( v );
        }
    }
    if ( !have_header )
        throw ValidationError( std::string( source ) + ": no header line" );
    if ( wavelengths.size() < 2 )
        throw ValidationError( std::string( source ) + ": need at least two rows" );
    return SpectralTable( std::move( wavelengths ), std::move( labels ), std::move( columns ) );
}

SpectralTable SpectralTable::load( const std::filesystem::path &path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw ValidationError( "cannot open spectral table " + path.string() );
    std::stringstream buf;
    buf << in.rdbuf();
    return parse( buf.str(), path.string() );
}

SpectralTable::SpectralTable(
    std::vector<double>              wavelengths,
    std::vector<std::string>         labels,
    std::vector<std::vector<double>> columns )
    : wavelengths_( std::move( wavelengths ) )
    , labels_( std::move( labels ) )
    , columns_( std::move( columns ) )
{
    if ( labels_.size() != columns_.size() )
        throw ValidationError( "spectral table label/column count mismatch" );
    for ( const auto &c: columns_ )
        if ( c.size() != wavelengths_.size() )
            throw ValidationError( "spectral table column length mismatch" );
    for ( std::size_t i = 1; i < wavelengths_.size(); ++i )
        if ( !( wavelengths_[i] > wavelengths_[i - 1] ) )
            throw ValidationError( "spectral table wavelengths must be strictly increasing" );
}

bool SpectralTable::has_column( std::string_view label ) const
{
    return std::find( labels_.begin(), labels_.end(), label ) != labels_.end();
}

const std::vector<double> &SpectralTable::column( std::string_view label ) const
{
    auto it = std::find( labels_.begin(), labels_.end(), label );
    if ( it == labels_.end() )
        throw ValidationError( "unknown spectral table column '" + std::string( label ) + "'" );
    return columns_[static_cast<std::size_t>( it - labels_.begin() )];
}

Spectrum resample( const SpectralTable &table, std::string_view column, const WavelengthGrid &grid )
{
    const auto &wl     = table.wavelengths();
    const auto &values = table.column( column );
    if ( wl.size() < 2 )
        throw ValidationError( "spectral table needs at least two rows" );
    if ( grid.lambda_min() < wl.front() || grid.lambda_max() > wl.back() )
        throw ValidationError(
            "spectral table spans " + std::to_string( wl.front() ) + "-" +
            std::to_string( wl.back() ) + " nm and does not cover the grid" );

    Eigen::VectorXd out( grid.size() );
    for ( int i = 0; i < grid.size(); ++i )
    {
        const double nm = grid.wavelength( i );
        auto         hi = std::lower_bound( wl.begin(), wl.end(), nm );
        auto         k  = static_cast<std::size_t>( hi - wl.begin() );
        if ( hi != wl.end() && *hi == nm )
        {
            out[i] = values[k];
            continue;
        }
        // wl[k-1] < nm < wl[k]
        const double t = ( nm - wl[k - 1] ) / ( wl[k] - wl[k - 1] );
        out[i]         = values[k - 1] + t * ( values[k] - values[k - 1] );
    }
    return Spectrum( grid, std::move( out ) );
}

ColorMatchingFunctions load_cmf( const std::filesystem::path &path, const WavelengthGrid &grid )
{
    const auto table = SpectralTable::load( path );

    std::vector<std::string> names{ "x", "y", "z" };
    if ( !table.has_column( "x" ) )
    {
        if ( table.labels().size() != 3 )
            throw ValidationError( path.string() + ": colour matching table needs 3 value columns" );
        names = table.labels();
    }

    ColorMatchingFunctions cmf{ grid, Eigen::MatrixXd( grid.size(), 3 ) };
    for ( int c = 0; c < 3; ++c )
        cmf.matrix.col( c ) = resample( table, names[c], grid ).values;
    if ( ( cmf.matrix.array() < 0.0 ).any() )
        throw ValidationError( path.string() + ": colour matching functions must be nonnegative" );
    return cmf;
}

std::filesystem::path default_data_dir()
{
    if ( const char *env = std::getenv( "SPECTRAFACE_DATA" ); env && *env )
        return env;
    return SPECTRAFACE_DEFAULT_DATA_DIR;
}

} // namespace spectraface
