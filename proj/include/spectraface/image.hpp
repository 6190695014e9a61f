// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace spectraface
{

/// Row-major 2D array, row 0 at the top.
template <typename T>
struct Plane
{
    int            width  = 0;
    int            height = 0;
    std::vector<T> data;

    Plane() = default;
    Plane( int w, int h, const T &fill = T{} )
        : width( w ), height( h ), data( static_cast<std::size_t>( w ) * static_cast<std::size_t>( h ), fill )
    {
        if ( w < 0 || h < 0 )
            throw std::invalid_argument( "negative image dimensions" );
    }

    std::size_t size() const { return data.size(); }
    bool        empty() const { return data.empty(); }

    T       &operator()( int x, int y ) { return data[static_cast<std::size_t>( y ) * width + x]; }
    const T &operator()( int x, int y ) const { return data[static_cast<std::size_t>( y ) * width + x]; }
    T       &operator[]( std::size_t i ) { return data[i]; }
    const T &operator[]( std::size_t i ) const { return data[i]; }

    template <typename U>
    bool same_shape( const Plane<U> &other ) const
    {
        return width == other.width && height == other.height;
    }
};

using Map      = Plane<double>;
using Mask     = Plane<std::uint8_t>;
using RgbImage = Plane<Eigen::Vector3d>;

inline std::size_t count_foreground( const Mask &mask )
{
    std::size_t n = 0;
    for ( auto v: mask.data )
        n += v != 0;
    return n;
}

} // namespace spectraface
