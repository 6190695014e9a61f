// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <algorithm>
#include <cmath>

namespace spectraface
{

/// Position of a coordinate on a uniform axis of `nodes` samples over [lo, hi].
struct AxisCell
{
    int    index; ///< lower node of the containing cell, in [0, nodes - 2]
    double frac;  ///< offset within the cell, in [0, 1]
    double scale; ///< d frac / d coordinate
};

/// Caller guarantees lo <= x <= hi. Coordinates within 1e-12 cells of a node
/// snap onto it so node queries reproduce node values exactly.
inline AxisCell locate_on_axis( double x, double lo, double hi, int nodes )
{
    const double scale = ( nodes - 1 ) / ( hi - lo );
    double       p     = ( x - lo ) * scale;
    if ( const double r = std::round( p ); std::abs( p - r ) < 1e-12 )
        p = r;
    const int i = std::clamp( static_cast<int>( std::floor( p ) ), 0, nodes - 2 );
    return { i, p - i, scale };
}

/// Bilinear blend of the four nodes around (a, b). `node(i, j)` returns an
/// object supporting `+`, `-` and scalar `*` (Eigen expressions, doubles).
/// Writes value and both partial derivatives.
template <typename Node, typename Out>
void bilinear_blend( const Node &node, const AxisCell &a, const AxisCell &b, Out &value, Out &d_a, Out &d_b )
{
    const auto &v00 = node( a.index, b.index );
    const auto &v10 = node( a.index + 1, b.index );
    const auto &v01 = node( a.index, b.index + 1 );
    const auto &v11 = node( a.index + 1, b.index + 1 );
    const double u = a.frac, v = b.frac;

    value = ( 1.0 - u ) * ( 1.0 - v ) * v00 + u * ( 1.0 - v ) * v10 + ( 1.0 - u ) * v * v01 + u * v * v11;
    d_a   = a.scale * ( ( 1.0 - v ) * ( v10 - v00 ) + v * ( v11 - v01 ) );
    d_b   = b.scale * ( ( 1.0 - u ) * ( v01 - v00 ) + u * ( v11 - v10 ) );
}

} // namespace spectraface
