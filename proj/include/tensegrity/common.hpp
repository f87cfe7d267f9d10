#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>

namespace tensegrity {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kGravity = 9.81;  // m/s^2

enum class ErrorCode {
  InvalidArgument,
  OutOfRange,
  Internal,
  InfeasibleEquality,
  NotPsd,
  MaxIterations,
  DegenerateCommand,
  SingularAllocation,
  NotAdjacent,
  DisconnectedGraph,
  NoPath,
  ExcessiveTimestep,
  Timeout,
  Config,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace tensegrity
