// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include <spectraface/camera.hpp>
#include <spectraface/error.hpp>

#include <cmath>

namespace spectraface
{

SensitivityDataset SensitivityDataset::load( const std::filesystem::path &path, const WavelengthGrid &grid )
{
    const auto table  = SpectralTable::load( path );
    const auto labels = table.labels();

    SensitivityDataset out;
    out.grid = grid;
    if ( labels.size() % 3 != 0 )
        throw ValidationError( path.string() + ": expected one column triple per camera" );

    for ( std::size_t c = 0; c < labels.size(); c += 3 )
    {
        const auto &r = labels[c];
        if ( r.size() < 3 || r.substr( r.size() - 2 ) != "_R" )
            throw ValidationError( path.string() + ": column '" + r + "' should end in _R" );
        const auto name = r.substr( 0, r.size() - 2 );
        if ( labels[c + 1] != name + "_G" || labels[c + 2] != name + "_B" )
            throw ValidationError( path.string() + ": camera '" + name + "' needs _R, _G, _B columns" );

        Eigen::MatrixXd s( grid.size(), 3 );
        for ( int k = 0; k < 3; ++k )
            s.col( k ) = resample( table, labels[c + static_cast<std::size_t>( k )], grid ).values;
        const double peak = s.maxCoeff();
        if ( !( peak > 0.0 ) )
            throw ValidationError( path.string() + ": camera '" + name + "' has no positive response" );
        out.names.push_back( name );
        out.cameras.push_back( s / peak );
    }
    out.validate();
    return out;
}

void SensitivityDataset::validate() const
{
    if ( cameras.size() < 3 )
        throw ValidationError( "sensitivity dataset needs at least 3 cameras" );
    if ( names.size() != cameras.size() )
        throw ValidationError( "sensitivity dataset names/cameras mismatch" );
    for ( const auto &s: cameras )
    {
        if ( s.rows() != grid.size() || s.cols() != 3 )
            throw ValidationError( "camera sensitivity is not D x 3 on the dataset grid" );
        if ( ( s.array() < 0.0 ).any() || !s.allFinite() )
            throw ValidationError( "camera sensitivities must be finite and nonnegative" );
    }
}

Eigen::VectorXd vectorize( const Eigen::MatrixXd &sensitivity )
{
    return Eigen::Map<const Eigen::VectorXd>( sensitivity.data(), sensitivity.size() );
}

Eigen::MatrixXd unvectorize( const Eigen::VectorXd &v )
{
    if ( v.size() % 3 != 0 )
        throw ValidationError( "vectorized sensitivity length must be a multiple of 3" );
    return Eigen::Map<const Eigen::MatrixXd>( v.data(), v.size() / 3, 3 );
}

double CameraPCA::explained_variance() const
{
    const double total = variances.sum();
    return total > 0.0 ? sigma.squaredNorm() / total : 1.0;
}

Eigen::VectorXd CameraPCA::project( const Eigen::MatrixXd &sensitivity ) const
{
    const Eigen::VectorXd centred = vectorize( sensitivity ) - mean;
    return ( components.transpose() * centred ).cwiseQuotient( sigma );
}

CameraPCA fit_pca( const SensitivityDataset &dataset, int n_components )
{
    dataset.validate();
    const int n   = static_cast<int>( dataset.cameras.size() );
    const int dim = 3 * dataset.grid.size();
    if ( n_components < 1 || n_components >= n )
        throw ValidationError( "PCA dimensionality must be in [1, camera count - 1]" );

    Eigen::MatrixXd x( n, dim );
    for ( int i = 0; i < n; ++i )
        x.row( i ) = vectorize( dataset.cameras[static_cast<std::size_t>( i )] ).transpose();

    CameraPCA pca;
    pca.grid    = dataset.grid;
    pca.cameras = dataset.names;
    pca.mean    = x.colwise().mean().transpose();
    x.rowwise() -= pca.mean.transpose();

    Eigen::BDCSVD<Eigen::MatrixXd> svd( x, Eigen::ComputeThinV );
    const Eigen::VectorXd         &s = svd.singularValues();
    int                            rank = 0;
    while ( rank < s.size() && s[rank] > 1e-12 * std::max( s[0], 1e-300 ) )
        ++rank;
    if ( rank < n_components )
        throw NumericalError(
            "sensitivity dataset has rank " + std::to_string( rank ) + " < " + std::to_string( n_components ) );

    pca.variances  = s.head( rank ).array().square() / ( n - 1 );
    pca.sigma      = pca.variances.head( n_components ).cwiseSqrt();
    pca.components = svd.matrixV().leftCols( n_components );
    for ( int k = 0; k < n_components; ++k )
    {
        Eigen::Index arg = 0;
        pca.components.col( k ).cwiseAbs().maxCoeff( &arg );
        if ( pca.components( arg, k ) < 0.0 )
            pca.components.col( k ) *= -1.0;
    }
    return pca;
}

Eigen::MatrixXd sensitivity_from_b( const CameraPCA &pca, std::span<const double> b )
{
    if ( static_cast<int>( b.size() ) != pca.dims() )
        throw ValidationError( "camera parameter count does not match the PCA model" );
    Eigen::VectorXd coeff( pca.dims() );
    for ( int i = 0; i < pca.dims(); ++i )
    {
        if ( !std::isfinite( b[i] ) || std::abs( b[i] ) > kCameraParamLimit )
            throw ValidationError( "camera parameters must lie in [-3, 3]" );
        coeff[i] = b[i] * pca.sigma[i];
    }
    return unvectorize( pca.components * coeff + pca.mean );
}

Eigen::MatrixXd sensitivity_jacobian( const CameraPCA &pca )
{
    return pca.components * pca.sigma.asDiagonal();
}

Eigen::Matrix3d raw2xyz( const Eigen::MatrixXd &sensitivity, const Eigen::MatrixXd &cmf )
{
    if ( sensitivity.cols() != 3 || cmf.cols() != 3 || sensitivity.rows() != cmf.rows() )
        throw ValidationError( "raw2xyz needs D x 3 sensitivity and colour matching matrices" );

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold( 1e-10 );
    cod.compute( sensitivity );
    if ( cod.rank() < 3 )
        throw NumericalError( "camera sensitivity matrix is rank deficient" );

    // min || S X - C ||, T = X^T so that T (S^T r) ~ C^T r.
    Eigen::Matrix3d t = cod.solve( cmf ).transpose();
    for ( int r = 0; r < 3; ++r )
    {
        const double sum = t.row( r ).sum();
        if ( std::abs( sum ) < 1e-12 )
            throw NumericalError( "raw2xyz row sums to zero and cannot be normalized" );
        t.row( r ) /= sum;
    }
    return t;
}

Raw2XyzLut Raw2XyzLut::build( const CameraPCA &pca, const Eigen::MatrixXd &cmf, int k )
{
    if ( k < 2 )
        throw ValidationError( "raw2xyz LUT needs at least 2 nodes per axis" );
    if ( pca.dims() != 2 )
        throw ValidationError( "raw2xyz LUT is tabulated over a 2-dimensional camera model" );

    Raw2XyzLut lut;
    lut.k_ = k;
    lut.nodes_.resize( static_cast<std::size_t>( k ) * k );
    for ( int i = 0; i < k; ++i )
        for ( int j = 0; j < k; ++j )
        {
            const double b[2] = { lut.node_coordinate( i ), lut.node_coordinate( j ) };
            lut.nodes_[static_cast<std::size_t>( i * k + j )] = raw2xyz( sensitivity_from_b( pca, b ), cmf );
        }
    return lut;
}

double Raw2XyzLut::node_coordinate( int i ) const
{
    if ( i == k_ - 1 )
        return kCameraParamLimit;
    return -kCameraParamLimit + 2.0 * kCameraParamLimit * i / ( k_ - 1 );
}

Raw2XyzLut::Sample Raw2XyzLut::sample( double b0, double b1 ) const
{
    if ( !( std::abs( b0 ) <= kCameraParamLimit && std::abs( b1 ) <= kCameraParamLimit ) )
        throw ValidationError( "raw2xyz LUT query outside [-3, 3]^2" );

    const auto a = locate_on_axis( b0, -kCameraParamLimit, kCameraParamLimit, k_ );
    const auto c = locate_on_axis( b1, -kCameraParamLimit, kCameraParamLimit, k_ );

    Sample out;
    bilinear_blend(
        [this]( int i, int j ) -> const Eigen::Matrix3d & { return node( i, j ); }, a, c, out.value,
        out.d_b[0], out.d_b[1] );
    return out;
}

} // namespace spectraface
