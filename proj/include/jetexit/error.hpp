#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace jetexit {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter is outside its admissible range. `field()` names it.
class ParameterError : public Error {
public:
    ParameterError(std::string field, const std::string& what)
        : Error(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

/// Newton polish hit a singular velocity Jacobian.
class DegeneratePointError : public GeometryError {
public:
    DegeneratePointError(double x, double y, const std::string& what)
        : GeometryError(what), x_(x), y_(y) {}
    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }

private:
    double x_, y_;
};

class TracingBudgetError : public GeometryError {
public:
    using GeometryError::GeometryError;
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class MeshQualityError : public Error {
public:
    MeshQualityError(std::size_t worst_triangle, double worst_area, const std::string& what)
        : Error(what), worst_triangle_(worst_triangle), worst_area_(worst_area) {}
    std::size_t worst_triangle() const noexcept { return worst_triangle_; }
    double worst_area() const noexcept { return worst_area_; }

private:
    std::size_t worst_triangle_;
    double worst_area_;
};

class MarkerError : public Error {
public:
    using Error::Error;
};

class PairingError : public Error {
public:
    using Error::Error;
};

/// Linear solver breakdown or iteration cap; carries the residual history.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}
    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

class CrossingStructureError : public Error {
public:
    using Error::Error;
};

class ExtremumStructureError : public Error {
public:
    using Error::Error;
};

class CensoringError : public Error {
public:
    CensoringError(std::size_t censored, const std::string& what)
        : Error(what), censored_(censored) {}
    std::size_t censored() const noexcept { return censored_; }

private:
    std::size_t censored_;
};

}  // namespace jetexit
