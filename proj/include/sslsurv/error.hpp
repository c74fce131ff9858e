#pragma once

#include <stdexcept>
#include <string>

namespace sslsurv {

// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind {
    invalid_argument,
    parse,
    degenerate_data,
    degenerate_support,
    degenerate_pairs,
    ipcw_singularity,
    non_convergence,
    calibration,
    range,
    all_zero,
    rank_deficient,
    too_few_replicates,
};

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

    // true for problems with the input data rather than the numerics
    bool is_data_error() const noexcept
    {
        return kind_ == ErrorKind::parse ||
               kind_ == ErrorKind::degenerate_data ||
               kind_ == ErrorKind::invalid_argument;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what)
{
    if (!ok) {
        throw Error(kind, what);
    }
}

} // namespace sslsurv
