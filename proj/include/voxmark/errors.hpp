#ifndef VOXMARK_ERRORS_HPP
#define VOXMARK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace voxmark {

// Malformed or unsupported file content (NIfTI headers, CSV layout, JSON).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inputs that parse but violate a documented contract (unknown label ids,
// duplicate table rows, mismatched dimensions).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user configuration: unknown task names, missing hippocampus labels,
// grids/folds that cannot be formed from the data.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inputs that are structurally fine but numerically unusable
// (all-background label map, empty mask, single-class labels).
class DegenerateInputError : public std::runtime_error {
public:
    explicit DegenerateInputError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace voxmark

#endif
