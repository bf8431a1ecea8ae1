#ifndef HETNET_ERROR_HPP
#define HETNET_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hetnet {

/// Invalid or inconsistent configuration (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// State space larger than the configured ceiling.
class SizeError : public ConfigError {
  public:
    SizeError(const std::string &what, std::size_t count)
        : ConfigError(what), m_count(count) {}

    std::size_t count() const { return m_count; }

  private:
    std::size_t m_count;
};

/// Numerical failure (maps to CLI exit code 3).
class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string &what, double residual)
        : std::runtime_error(what), m_residual(residual) {}

    double residual() const { return m_residual; }

  private:
    double m_residual;
};

} // namespace hetnet

#endif
