#pragma once

#include <stdexcept>
#include <string>

namespace rieszlab {

/// Host exceeds a configured size cap (dense decomposition, etc.).
class ResourceLimitError : public std::runtime_error {
public:
    explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

/// Gluing surgery produced an invalid manifold (e.g. disconnected ambient).
class SurgeryFailure : public std::runtime_error {
public:
    explicit SurgeryFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Violated internal invariant; indicates a bug, not bad input.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

} // namespace rieszlab
