#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace quadrics {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Relative singular-value threshold used for every numerical rank decision.
inline constexpr double kRankTol = 1e-8;

/// A 3D point with a unit surface normal.
struct OrientedPoint {
    Vec3 position = Vec3::Zero();
    Vec3 normal = Vec3::Zero();
};

/// Homogeneous plane covector (a,b,c,d) with ||(a,b,c)|| = 1; plane is a*x+b*y+c*z+d = 0.
struct Plane {
    Vec4 pi = Vec4::Zero();

    Plane() = default;
    Plane(const Vec3& normal, double offset) {
        const double n = normal.norm();
        pi << normal / n, offset / n;
    }
    explicit Plane(const Vec4& coeffs) {
        const double n = coeffs.head<3>().norm();
        pi = coeffs / n;
    }

    Vec3 normal() const { return pi.head<3>(); }
    double offset() const { return pi(3); }
    /// Signed Euclidean distance from a point to the plane.
    double distance(const Vec3& x) const { return pi.head<3>().dot(x) + pi(3); }
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TooFewPoints : public Error {
public:
    using Error::Error;
};

class DegenerateBasis : public Error {
public:
    using Error::Error;
};

class EmptyAccumulator : public Error {
public:
    using Error::Error;
};

class SurfaceNotFound : public Error {
public:
    using Error::Error;
};

/// random_quadric gave up satisfying a class filter.
class GenerationTimeout : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

/// Input file could not be parsed; carries the byte offset (and line for text formats).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t byte_offset, long line = -1)
        : Error(what + " (byte " + std::to_string(byte_offset) +
                (line >= 0 ? ", line " + std::to_string(line) : std::string()) + ")"),
          byte_offset(byte_offset),
          line(line) {}

    std::size_t byte_offset = 0;
    long line = -1;
};

}  // namespace quadrics
