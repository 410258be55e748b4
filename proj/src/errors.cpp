#include "liouville/errors.hpp"

namespace lv {

Error::Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

UsageError::UsageError(const std::string& what) : Error(ExitCode::usage, what) {}

TransienceError::TransienceError(const std::string& what) : UsageError(what) {}

ResourceError::ResourceError(const std::string& what, long partial)
    : Error(ExitCode::resource, what), partial_(partial) {}

NumericError::NumericError(const std::string& what) : Error(ExitCode::numeric, what) {}

RecurrentWalkError::RecurrentWalkError(const std::string& what) : NumericError(what) {}

TruncationError::TruncationError(const std::string& what) : NumericError(what) {}

}  // namespace lv
