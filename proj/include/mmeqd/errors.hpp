#ifndef MMEQD_ERRORS_HPP
#define MMEQD_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmeqd {

/// Base of every error raised by the library. category() is a stable
/// machine-readable tag; the CLI prints it verbatim on failure.
class error : public std::runtime_error {
public:
    error(std::string_view category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

#define MMEQD_DEFINE_ERROR(name, tag)                                        \
    class name : public error {                                              \
    public:                                                                  \
        explicit name(const std::string& what) : error(tag, what) {}         \
    }

MMEQD_DEFINE_ERROR(domain_error, "domain");
MMEQD_DEFINE_ERROR(config_error, "config");
MMEQD_DEFINE_ERROR(data_error, "data");
MMEQD_DEFINE_ERROR(degenerate_covariance_error, "degenerate_covariance");
MMEQD_DEFINE_ERROR(degenerate_parameter_error, "degenerate_parameter");
MMEQD_DEFINE_ERROR(bracketing_error, "bracketing");
MMEQD_DEFINE_ERROR(truncation_error, "truncation");
MMEQD_DEFINE_ERROR(design_error, "design");
MMEQD_DEFINE_ERROR(estimation_error, "estimation");
MMEQD_DEFINE_ERROR(bound_undefined_error, "bound_undefined");
MMEQD_DEFINE_ERROR(io_error, "io");

#undef MMEQD_DEFINE_ERROR

/// Raised when an integrand produces a non-finite value. Carries the
/// abscissa so callers can report where the density broke down.
class evaluation_error : public error {
public:
    evaluation_error(const std::string& what, double at)
        : error("evaluation", what + " at tau=" + std::to_string(at)), at_(at) {}

    double at() const noexcept { return at_; }

private:
    double at_;
};

} // namespace mmeqd

#endif // MMEQD_ERRORS_HPP
