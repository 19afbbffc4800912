#pragma once

#include <stdexcept>
#include <string>

namespace nsopt {

// One code per contract-level failure class. The C API collapses these into
// coarse status codes; the name string survives for diagnostics.
enum class Errc {
    invalid_params,
    unrepairable_params,
    invalid_targets,
    invalid_sweep,
    unsupported_sweep,
    empty_selection,
    parse_error,
    invariant_error,
    range_error,
    degenerate_curve,
    non_monotonic,
    empty_history,
    no_json_found,
    schema_error,
    transport_error,
    proposal_error,
    exhausted_space,
    config_error,
    io_error,
    corrupt_trajectory,
    internal_error,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::invalid_params: return "InvalidParams";
        case Errc::unrepairable_params: return "UnrepairableParams";
        case Errc::invalid_targets: return "InvalidTargets";
        case Errc::invalid_sweep: return "InvalidSweep";
        case Errc::unsupported_sweep: return "UnsupportedSweep";
        case Errc::empty_selection: return "EmptySelection";
        case Errc::parse_error: return "ParseError";
        case Errc::invariant_error: return "InvariantError";
        case Errc::range_error: return "RangeError";
        case Errc::degenerate_curve: return "DegenerateCurve";
        case Errc::non_monotonic: return "NonMonotonic";
        case Errc::empty_history: return "EmptyHistory";
        case Errc::no_json_found: return "NoJsonFound";
        case Errc::schema_error: return "SchemaError";
        case Errc::transport_error: return "TransportError";
        case Errc::proposal_error: return "ProposalError";
        case Errc::exhausted_space: return "ExhaustedSpace";
        case Errc::config_error: return "ConfigError";
        case Errc::io_error: return "IOError";
        case Errc::corrupt_trajectory: return "CorruptTrajectory";
        case Errc::internal_error: return "InternalError";
    }
    return "UnknownError";
}

} // namespace nsopt
