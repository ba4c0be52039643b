#pragma once
#include <stdexcept>
#include <string>

namespace touchline {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateVector : Error { using Error::Error; };
struct MissingKeypoint : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct NotScalar : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct NonFiniteGradient : Error { using Error::Error; };
struct PlacementFailure : Error { using Error::Error; };
struct MalformedRecord : Error { using Error::Error; };
struct DataMissingGesture : Error { using Error::Error; };
struct MismatchedSplit : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace touchline
