//---------------------------------------------------------------------------//
//! \file modrec/errors.hpp
//---------------------------------------------------------------------------//
#pragma once

#include <stdexcept>
#include <string>

namespace modrec
{
//! Base class for every error raised by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! An argument lies outside the mathematical domain of an operation.
class DomainError : public Error
{
  public:
    using Error::Error;
};

//! A statistic (g, theta) is undefined for the given input, e.g. vacuum.
class UndefinedStatistic : public Error
{
  public:
    using Error::Error;
};

//! A constructed object violates a documented invariant.
class ValidationError : public Error
{
  public:
    using Error::Error;
};

//! A tally without pulses was handed to an estimator.
class EmptyTallyError : public Error
{
  public:
    using Error::Error;
};

//! A branch never clicked, so click-ratio estimators are undefined.
class ZeroSinglesError : public Error
{
  public:
    using Error::Error;
};

//! Every candidate fit failed, so no reconstruction exists.
class NumericalFailure : public Error
{
  public:
    using Error::Error;
};

//! File could not be read or written.
class IoError : public Error
{
  public:
    using Error::Error;
};

}  // namespace modrec
