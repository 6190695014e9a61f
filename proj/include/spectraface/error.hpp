// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <stdexcept>
#include <string>

namespace spectraface
{

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Caller-supplied input is malformed or out of its documented range.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// A numerical operation could not complete (rank deficiency, divergence,
/// unphysical camera/illuminant pairing).
class NumericalError : public Error
{
public:
    using Error::Error;
};

} // namespace spectraface
