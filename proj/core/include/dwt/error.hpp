#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dwt {

enum class ErrorKind {
  Parse,
  Io,
  Domain,
  Dimension,
  Shape,
  Range,
  NoInnerBoundary,
  BoundarySpec,
  InterpolationImpossible,
  RecipeInfeasible,
  TransformDegenerate,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::Dimension: return "DimensionError";
    case ErrorKind::Shape: return "ShapeError";
    case ErrorKind::Range: return "RangeError";
    case ErrorKind::NoInnerBoundary: return "NoInnerBoundary";
    case ErrorKind::BoundarySpec: return "BoundarySpec";
    case ErrorKind::InterpolationImpossible: return "InterpolationImpossible";
    case ErrorKind::RecipeInfeasible: return "RecipeInfeasible";
    case ErrorKind::TransformDegenerate: return "TransformDegenerate";
  }
  return "Error";
}

/// Every failure raised by the library. `kind()` is stable and is what the
/// CLI prints as `error=<Kind>`.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace dwt
