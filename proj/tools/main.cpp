// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#include "cli.hpp"

int main( int argc, char **argv )
{
    return spectraface::cli::run( argc, argv );
}
