#pragma once

#include <stdexcept>
#include <string>

namespace iris {

// Error taxonomy shared by the library and the command-line tool.
// Kind drives the tool's exit code: input/validation problems exit 2,
// runtime pipeline failures exit 3.
enum class ErrorKind {
  Validation,   // malformed arguments, specs, or files
  Dimension,    // shape mismatch between tensors/codes
  Io,           // filesystem or format trouble
  NoIrisFound,  // empty segmentation mask
  NoCircleFound,// Hough transform found no candidate
  Geometry,     // inconsistent circle geometry
  Incomparable, // iris codes with empty joint mask
  Training,     // divergence (NaN loss) during optimization
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

  // True for failures of the pipeline itself rather than of its inputs.
  bool is_pipeline_failure() const {
    switch (kind_) {
      case ErrorKind::NoIrisFound:
      case ErrorKind::NoCircleFound:
      case ErrorKind::Geometry:
      case ErrorKind::Incomparable:
      case ErrorKind::Training:
        return true;
      default:
        return false;
    }
  }

  const char* kind_name() const {
    switch (kind_) {
      case ErrorKind::Validation:   return "validation";
      case ErrorKind::Dimension:    return "dimension";
      case ErrorKind::Io:           return "io";
      case ErrorKind::NoIrisFound:  return "no_iris_found";
      case ErrorKind::NoCircleFound:return "no_circle_found";
      case ErrorKind::Geometry:     return "geometry";
      case ErrorKind::Incomparable: return "incomparable_codes";
      case ErrorKind::Training:     return "training";
    }
    return "unknown";
  }

private:
  ErrorKind kind_;
};

}  // namespace iris
