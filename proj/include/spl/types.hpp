#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace spl {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Index = Eigen::Index;

inline constexpr double pi = 3.14159265358979323846;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

/// Evaluation hit a quadrature node or the origin of a kernel.
class SingularityError : public Error {
public:
    using Error::Error;
};

class ExtrapolationError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

inline Mat2 rotation(double angle)
{
    Mat2 r;
    r << std::cos(angle), -std::sin(angle),
         std::sin(angle),  std::cos(angle);
    return r;
}

inline double cross(const Vec2& a, const Vec2& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

} // namespace spl
