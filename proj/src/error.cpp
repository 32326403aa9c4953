#include "stone/error.hpp"

#include <sstream>

namespace stone {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::InvalidWindow: return "invalid-window";
    case ErrorCode::IncompletePreview: return "incomplete-preview";
    case ErrorCode::ResourceLimit: return "resource-limit";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::NotApplicable: return "not-applicable";
    case ErrorCode::Io: return "io";
    case ErrorCode::Format: return "format";
    case ErrorCode::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

namespace {
std::string describe_empty(const std::vector<std::size_t>& groups) {
  std::ostringstream os;
  os << "incomplete preview: " << groups.size() << " empty group(s): [";
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (i) os << ", ";
    os << groups[i];
  }
  os << "]";
  return os.str();
}
}  // namespace

IncompletePreviewError::IncompletePreviewError(std::vector<std::size_t> empty_groups)
    : Error(ErrorCode::IncompletePreview, describe_empty(empty_groups)),
      empty_(std::move(empty_groups)) {}

DivergenceError::DivergenceError(std::size_t iteration)
    : Error(ErrorCode::Divergence,
            "non-finite value encountered at iteration " + std::to_string(iteration)),
      iteration_(iteration) {}

}  // namespace stone
