#pragma once

#include <stdexcept>
#include <string>

namespace meshsim {

/// Base of every error thrown by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define MESHSIM_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& message) : Error(tag, message) {}    \
  };

MESHSIM_DEFINE_ERROR(DegenerateError, "degenerate")
MESHSIM_DEFINE_ERROR(ResolutionError, "resolution")
MESHSIM_DEFINE_ERROR(MeshFragmentError, "mesh_fragment")
MESHSIM_DEFINE_ERROR(StructuralError, "structural")
MESHSIM_DEFINE_ERROR(InvalidArgument, "invalid_argument")
MESHSIM_DEFINE_ERROR(SolverError, "solver")
MESHSIM_DEFINE_ERROR(RigidBodyModeError, "rigid_body_mode")
MESHSIM_DEFINE_ERROR(TrainingError, "training")
MESHSIM_DEFINE_ERROR(IoError, "io")

#undef MESHSIM_DEFINE_ERROR

/// Mesh / config file syntax or schema error with a location.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, std::string field)
      : Error("parse", message), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace meshsim
