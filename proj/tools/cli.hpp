// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

namespace spectraface::cli
{

/// Process exit codes.
inline constexpr int kExitOk         = 0;
inline constexpr int kExitRuntime    = 1;
inline constexpr int kExitValidation = 2;

int run( int argc, char **argv );

} // namespace spectraface::cli
