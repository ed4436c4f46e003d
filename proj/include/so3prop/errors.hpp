#pragma once

#include <stdexcept>
#include <string>

namespace so3prop {

struct NotSkew : std::invalid_argument {
  explicit NotSkew(const std::string& what) : std::invalid_argument(what) {}
};

struct NotUnit : std::invalid_argument {
  explicit NotUnit(const std::string& what) : std::invalid_argument(what) {}
};

struct NotRotation : std::invalid_argument {
  explicit NotRotation(const std::string& what) : std::invalid_argument(what) {}
};

struct NoConvergence : std::runtime_error {
  double residual;
  int iterations;
  NoConvergence(double res, int iters)
      : std::runtime_error("newton solve did not converge: residual " +
                           std::to_string(res) + " after " +
                           std::to_string(iters) + " iterations"),
        residual(res), iterations(iters) {}
};

struct BandlimitTooHighForGrid : std::invalid_argument {
  explicit BandlimitTooHighForGrid(const std::string& what)
      : std::invalid_argument(what) {}
};

struct BoxTooSmall : std::invalid_argument {
  explicit BoxTooSmall(const std::string& what) : std::invalid_argument(what) {}
};

struct OutOfSupport : std::domain_error {
  explicit OutOfSupport(const std::string& what) : std::domain_error(what) {}
};

struct DegenerateUpdate : std::runtime_error {
  explicit DegenerateUpdate(const std::string& what)
      : std::runtime_error(what) {}
};

struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace so3prop
