// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/image_io.hpp>
#include <spectraface/error.hpp>

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace spectraface
{

namespace
{

std::string describe( const std::filesystem::path &path )
{
    return "'" + path.string() + "'";
}

// ---------------------------------------------------------------------------
// PFM

struct PfmData
{
    int                width = 0, height = 0, channels = 0;
    std::vector<float> values; ///< top row first, interleaved channels
};

std::uint32_t byteswap32( std::uint32_t v )
{
    return ( v >> 24 ) | ( ( v >> 8 ) & 0xff00u ) | ( ( v << 8 ) & 0xff0000u ) | ( v << 24 );
}

PfmData read_pfm( const std::filesystem::path &path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw ValidationError( "cannot open PFM " + describe( path ) );

    std::string magic;
    int         w = 0, h = 0;
    double      scale = 0.0;
    in >> magic >> w >> h >> scale;
    if ( !in || ( magic != "Pf" && magic != "PF" ) || w <= 0 || h <= 0 || scale == 0.0 || !std::isfinite( scale ) )
        throw ValidationError( "malformed PFM header in " + describe( path ) );
    in.get(); // single whitespace byte before the raster

    PfmData out;
    out.width    = w;
    out.height   = h;
    out.channels = magic == "PF" ? 3 : 1;
    const std::size_t row = static_cast<std::size_t>( w ) * static_cast<std::size_t>( out.channels );
    std::vector<std::uint32_t> raw( row * static_cast<std::size_t>( h ) );
    in.read( reinterpret_cast<char *>( raw.data() ), static_cast<std::streamsize>( raw.size() * 4 ) );
    if ( in.gcount() != static_cast<std::streamsize>( raw.size() * 4 ) )
        throw ValidationError( "truncated PFM raster in " + describe( path ) );

    const bool file_little = scale < 0.0;
    const bool swap        = file_little != ( std::endian::native == std::endian::little );
    out.values.resize( raw.size() );
    for ( int y = 0; y < h; ++y )
    {
        // File rows run bottom to top.
        const std::size_t src = static_cast<std::size_t>( h - 1 - y ) * row;
        const std::size_t dst = static_cast<std::size_t>( y ) * row;
        for ( std::size_t k = 0; k < row; ++k )
        {
            std::uint32_t bits = raw[src + k];
            if ( swap )
                bits = byteswap32( bits );
            out.values[dst + k] = std::bit_cast<float>( bits );
        }
    }
    for ( float v: out.values )
        if ( !std::isfinite( v ) )
            throw ValidationError( "non-finite value in PFM " + describe( path ) );
    return out;
}

void write_pfm( const std::filesystem::path &path, const PfmData &data )
{
    std::ofstream out( path, std::ios::binary );
    if ( !out )
        throw Error( "cannot write PFM " + describe( path ) );
    out << ( data.channels == 3 ? "PF" : "Pf" ) << '\n' << data.width << ' ' << data.height << '\n' << "-1.0\n";
    const std::size_t row = static_cast<std::size_t>( data.width ) * static_cast<std::size_t>( data.channels );
    std::vector<std::uint32_t> raw( data.values.size() );
    for ( int y = 0; y < data.height; ++y )
        for ( std::size_t k = 0; k < row; ++k )
        {
            std::uint32_t bits = std::bit_cast<std::uint32_t>( data.values[static_cast<std::size_t>( y ) * row + k] );
            if constexpr ( std::endian::native == std::endian::big )
                bits = byteswap32( bits );
            raw[static_cast<std::size_t>( data.height - 1 - y ) * row + k] = bits;
        }
    out.write( reinterpret_cast<const char *>( raw.data() ), static_cast<std::streamsize>( raw.size() * 4 ) );
    if ( !out )
        throw Error( "failed writing PFM " + describe( path ) );
}

float to_float( double v )
{
    if ( !std::isfinite( v ) )
        throw ValidationError( "cannot store a non-finite value" );
    return static_cast<float>( v );
}

// ---------------------------------------------------------------------------
// PNG

struct PngRaster
{
    int                        width = 0, height = 0, channels = 0, bit_depth = 0;
    std::vector<std::uint16_t> samples; ///< top row first, interleaved
};

struct FileCloser
{
    void operator()( std::FILE *f ) const { std::fclose( f ); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct ReadState
{
    std::vector<unsigned char> bytes;
    std::vector<png_bytep>     rows;
};

PngRaster read_png( const std::filesystem::path &path, bool expand_to_rgb )
{
    FilePtr file( std::fopen( path.c_str(), "rb" ) );
    if ( !file )
        throw ValidationError( "cannot open PNG " + describe( path ) );
    unsigned char sig[8];
    if ( std::fread( sig, 1, 8, file.get() ) != 8 || png_sig_cmp( sig, 0, 8 ) != 0 )
        throw ValidationError( describe( path ) + " is not a PNG file" );

    png_structp png = png_create_read_struct( PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr );
    if ( !png )
        throw Error( "libpng initialisation failed" );
    png_infop info = png_create_info_struct( png );
    if ( !info )
    {
        png_destroy_read_struct( &png, nullptr, nullptr );
        throw Error( "libpng initialisation failed" );
    }
    auto      state  = std::make_unique<ReadState>();
    PngRaster raster;
    if ( setjmp( png_jmpbuf( png ) ) )
    {
        png_destroy_read_struct( &png, &info, nullptr );
        throw ValidationError( "malformed PNG " + describe( path ) );
    }

    png_init_io( png, file.get() );
    png_set_sig_bytes( png, 8 );
    png_read_info( png, info );
    const int color = png_get_color_type( png, info );
    if ( color == PNG_COLOR_TYPE_PALETTE )
        png_set_palette_to_rgb( png );
    if ( color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth( png, info ) < 8 )
        png_set_expand_gray_1_2_4_to_8( png );
    if ( color & PNG_COLOR_MASK_ALPHA )
        png_set_strip_alpha( png );
    if ( expand_to_rgb && ( color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA ) )
        png_set_gray_to_rgb( png );
    if ( png_get_bit_depth( png, info ) == 16 && std::endian::native == std::endian::little )
        png_set_swap( png );
    png_read_update_info( png, info );

    raster.width     = static_cast<int>( png_get_image_width( png, info ) );
    raster.height    = static_cast<int>( png_get_image_height( png, info ) );
    raster.channels  = png_get_channels( png, info );
    raster.bit_depth = png_get_bit_depth( png, info );
    const std::size_t rowbytes = png_get_rowbytes( png, info );
    state->bytes.resize( rowbytes * static_cast<std::size_t>( raster.height ) );
    state->rows.resize( static_cast<std::size_t>( raster.height ) );
    for ( int y = 0; y < raster.height; ++y )
        state->rows[static_cast<std::size_t>( y )] = state->bytes.data() + rowbytes * static_cast<std::size_t>( y );
    png_read_image( png, state->rows.data() );
    png_read_end( png, nullptr );
    png_destroy_read_struct( &png, &info, nullptr );

    const std::size_t count =
        static_cast<std::size_t>( raster.width ) * static_cast<std::size_t>( raster.height ) * static_cast<std::size_t>( raster.channels );
    raster.samples.resize( count );
    if ( raster.bit_depth == 16 )
        std::memcpy( raster.samples.data(), state->bytes.data(), count * 2 );
    else
        for ( std::size_t i = 0; i < count; ++i )
            raster.samples[i] = state->bytes[i];
    return raster;
}

void write_png( const std::filesystem::path &path, int width, int height, int channels, int bit_depth,
                const std::vector<std::uint16_t> &samples )
{
    if ( bit_depth != 8 && bit_depth != 16 )
        throw ValidationError( "PNG bit depth must be 8 or 16" );
    FilePtr file( std::fopen( path.c_str(), "wb" ) );
    if ( !file )
        throw Error( "cannot write PNG " + describe( path ) );

    const std::size_t bytes_per = bit_depth == 16 ? 2 : 1;
    const std::size_t rowbytes  = static_cast<std::size_t>( width ) * static_cast<std::size_t>( channels ) * bytes_per;
    auto              state     = std::make_unique<ReadState>();
    state->bytes.resize( rowbytes * static_cast<std::size_t>( height ) );
    for ( std::size_t i = 0; i < samples.size(); ++i )
    {
        if ( bit_depth == 16 )
            std::memcpy( state->bytes.data() + 2 * i, &samples[i], 2 );
        else
            state->bytes[i] = static_cast<unsigned char>( samples[i] );
    }
    state->rows.resize( static_cast<std::size_t>( height ) );
    for ( int y = 0; y < height; ++y )
        state->rows[static_cast<std::size_t>( y )] = state->bytes.data() + rowbytes * static_cast<std::size_t>( y );

    png_structp png = png_create_write_struct( PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr );
    if ( !png )
        throw Error( "libpng initialisation failed" );
    png_infop info = png_create_info_struct( png );
    if ( !info )
    {
        png_destroy_write_struct( &png, nullptr );
        throw Error( "libpng initialisation failed" );
    }
    if ( setjmp( png_jmpbuf( png ) ) )
    {
        png_destroy_write_struct( &png, &info );
        throw Error( "failed writing PNG " + describe( path ) );
    }
    png_init_io( png, file.get() );
    png_set_IHDR( png, info, static_cast<png_uint_32>( width ), static_cast<png_uint_32>( height ), bit_depth,
                  channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                  PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT );
    png_write_info( png, info );
    if ( bit_depth == 16 && std::endian::native == std::endian::little )
        png_set_swap( png );
    png_write_image( png, state->rows.data() );
    png_write_end( png, nullptr );
    png_destroy_write_struct( &png, &info );
}

} // namespace

Map read_map_pfm( const std::filesystem::path &path )
{
    const PfmData data = read_pfm( path );
    if ( data.channels != 1 )
        throw ValidationError( describe( path ) + " is not a single-channel PFM" );
    Map map( data.width, data.height );
    for ( std::size_t i = 0; i < map.size(); ++i )
        map[i] = data.values[i];
    return map;
}

void write_map_pfm( const std::filesystem::path &path, const Map &map )
{
    PfmData data{ map.width, map.height, 1, {} };
    data.values.reserve( map.size() );
    for ( double v: map.data )
        data.values.push_back( to_float( v ) );
    write_pfm( path, data );
}

RgbImage read_rgb_pfm( const std::filesystem::path &path )
{
    const PfmData data = read_pfm( path );
    if ( data.channels != 3 )
        throw ValidationError( describe( path ) + " is not a 3-channel PFM" );
    RgbImage image( data.width, data.height, Eigen::Vector3d::Zero() );
    for ( std::size_t i = 0; i < image.size(); ++i )
        image[i] = Eigen::Vector3d( data.values[3 * i], data.values[3 * i + 1], data.values[3 * i + 2] );
    return image;
}

void write_rgb_pfm( const std::filesystem::path &path, const RgbImage &image )
{
    PfmData data{ image.width, image.height, 3, {} };
    data.values.reserve( 3 * image.size() );
    for ( const auto &px: image.data )
        for ( int c = 0; c < 3; ++c )
            data.values.push_back( to_float( px[c] ) );
    write_pfm( path, data );
}

RgbImage read_png_rgb( const std::filesystem::path &path )
{
    const PngRaster raster = read_png( path, true );
    const double    peak   = raster.bit_depth == 16 ? 65535.0 : 255.0;
    RgbImage        image( raster.width, raster.height, Eigen::Vector3d::Zero() );
    for ( std::size_t i = 0; i < image.size(); ++i )
        for ( int c = 0; c < 3; ++c )
            image[i][c] = raster.samples[3 * i + static_cast<std::size_t>( c )] / peak;
    return image;
}

void write_png_rgb( const std::filesystem::path &path, const RgbImage &image, int bit_depth )
{
    const double               peak = bit_depth == 16 ? 65535.0 : 255.0;
    std::vector<std::uint16_t> samples;
    samples.reserve( 3 * image.size() );
    for ( const auto &px: image.data )
        for ( int c = 0; c < 3; ++c )
        {
            const double v = std::isfinite( px[c] ) ? std::clamp( px[c], 0.0, 1.0 ) : 0.0;
            samples.push_back( static_cast<std::uint16_t>( std::lround( v * peak ) ) );
        }
    write_png( path, image.width, image.height, 3, bit_depth, samples );
}

Mask read_mask_png( const std::filesystem::path &path )
{
    const PngRaster     raster    = read_png( path, false );
    const std::uint16_t threshold = raster.bit_depth == 16 ? 128 * 257 : 128;
    Mask                mask( raster.width, raster.height, 0 );
    for ( std::size_t i = 0; i < mask.size(); ++i )
        mask[i] = raster.samples[i * static_cast<std::size_t>( raster.channels )] >= threshold ? 255 : 0;
    return mask;
}

void write_mask_png( const std::filesystem::path &path, const Mask &mask )
{
    std::vector<std::uint16_t> samples( mask.size() );
    for ( std::size_t i = 0; i < mask.size(); ++i )
        samples[i] = mask[i] ? 255 : 0;
    write_png( path, mask.width, mask.height, 1, 8, samples );
}

RgbImage read_rgb_image( const std::filesystem::path &path )
{
    auto ext = path.extension().string();
    for ( auto &ch: ext )
        ch = static_cast<char>( std::tolower( static_cast<unsigned char>( ch ) ) );
    return ext == ".png" ? read_png_rgb( path ) : read_rgb_pfm( path );
}

} // namespace spectraface
