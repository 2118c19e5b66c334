#pragma once

#include <stdexcept>
#include <string>

namespace lpcasrc {

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// solver

class MaxIterationsExceeded : public Error
{
public:
    using Error::Error;
};

class DegenerateStep : public Error
{
public:
    using Error::Error;
};

class NotRepresentable : public Error
{
public:
    using Error::Error;
};

// local PCA / dictionary

/// Violation of 1 <= d <= n < (smallest class size) - 1.
class Eq7Violation : public Error
{
public:
    using Error::Error;
};

class NotEnoughNeighbors : public Error
{
public:
    using Error::Error;
};

class DegenerateNeighborhood : public Error
{
public:
    using Error::Error;
};

// data handling

class DimensionMismatch : public Error
{
public:
    using Error::Error;
};

class ClassTooSmall : public Error
{
public:
    using Error::Error;
};

/// Malformed input file or configuration. Carries file/line context in the message.
class InputError : public Error
{
public:
    using Error::Error;
};

} // namespace lpcasrc
