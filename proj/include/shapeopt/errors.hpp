#pragma once

#include <stdexcept>
#include <string>

namespace shapeopt {

/// A caller broke a documented precondition (wrong dimension, unknown job, ...).
class contract_violation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An argument is well-formed but outside the domain of the operation.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Reward weights with zero L1 norm cannot be normalised.
class degenerate_weights : public domain_error {
public:
    using domain_error::domain_error;
};

/// Raised by the trainer when parameters or gradients become non-finite.
class training_diverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Journal or experiment directory content that cannot be trusted.
class integrity_error : public std::runtime_error {
public:
    integrity_error(const std::string& what, long line = -1)
        : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line)
    {
    }

    long line() const noexcept { return line_; }

private:
    long line_;
};

class evaluation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Data an export or report needs has not been produced yet.
class missing_data : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace shapeopt
