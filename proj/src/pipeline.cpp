// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/pipeline.hpp>
#include <spectraface/error.hpp>

#include <algorithm>
#include <cmath>

namespace spectraface
{

const PipelineConstants &PipelineConstants::standard()
{
    static const PipelineConstants constants = [] {
        PipelineConstants c;
        c.xyz2rgb << 3.2406, -1.537, -0.498,
                     -0.968, 1.8758, 0.0415,
                     0.0557, -0.204, 1.0570;
        return c;
    }();
    return constants;
}

Eigen::Vector3d white_balance( const Eigen::MatrixXd &sensitivity, const Eigen::VectorXd &illuminant )
{
    if ( sensitivity.cols() != 3 || sensitivity.rows() != illuminant.size() )
        throw ValidationError( "white balance needs a D x 3 sensitivity and a length-D illuminant" );
    const Eigen::Vector3d response = sensitivity.transpose() * illuminant;
    if ( !( response.array() > 0.0 ).all() )
        throw NumericalError( "camera response to the illuminant is not positive in every channel" );
    return response.cwiseInverse();
}

Eigen::Vector3d apply_pipeline(
    const Eigen::Vector3d   &raw,
    const Eigen::MatrixXd   &sensitivity,
    const Eigen::VectorXd   &illuminant,
    const Eigen::Matrix3d   &raw2xyz,
    const PipelineConstants &constants )
{
    const Eigen::Vector3d wb = white_balance( sensitivity, illuminant );
    return constants.xyz2rgb * ( raw2xyz * wb.cwiseProduct( raw ) );
}

double gamma_encode( double linear, const PipelineConstants &c )
{
    const double x = std::clamp( linear, 0.0, 1.0 );
    return ( 1.0 + c.a ) * std::pow( x, 1.0 / c.gamma ) - c.a;
}

double gamma_decode( double encoded, const PipelineConstants &c )
{
    const double y = std::clamp( encoded, -c.a, 1.0 );
    return std::pow( ( y + c.a ) / ( 1.0 + c.a ), c.gamma );
}

double gamma_encode_for_export( double linear, const PipelineConstants &c )
{
    return std::clamp( gamma_encode( linear, c ), 0.0, 1.0 );
}

Eigen::Vector3d gamma_encode( const Eigen::Vector3d &linear, const PipelineConstants &c )
{
    return { gamma_encode( linear[0], c ), gamma_encode( linear[1], c ), gamma_encode( linear[2], c ) };
}

Eigen::Vector3d gamma_decode( const Eigen::Vector3d &encoded, const PipelineConstants &c )
{
    return { gamma_decode( encoded[0], c ), gamma_decode( encoded[1], c ), gamma_decode( encoded[2], c ) };
}

} // namespace spectraface
