#pragma once

#include <stdexcept>
#include <string>

namespace cfrank {

// Base class for everything thrown on purpose by this library.  Callers that
// want to distinguish "bad input" from "ran out of certified precision" catch
// the concrete types below.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// The coefficient stream of an angle ran dry (finite list exhausted, or the
// decimal input no longer pins down the next partial quotient).
struct coefficient_budget_exhausted : error {
    explicit coefficient_budget_exhausted(const std::string& msg) : error(msg) {}
};

// A certified comparison could not be decided within the precision cap.
struct undecidable_comparison : error {
    explicit undecidable_comparison(const std::string& msg) : error(msg) {}
};

// An iterative search (net scan, candidate scan, level loop) hit its cap.
struct search_cap_exceeded : error {
    explicit search_cap_exceeded(const std::string& msg) : error(msg) {}
};

// Requested expansion of an implicit level would exceed the element cap.
struct sumset_too_large : error {
    explicit sumset_too_large(const std::string& msg) : error(msg) {}
};

// No index with the required approximation quality exists within the budget.
struct m_sequence_not_found : error {
    explicit m_sequence_not_found(const std::string& msg) : error(msg) {}
};

// The membership window precondition failed for the requested parameters.
struct e_membership_failed : error {
    explicit e_membership_failed(const std::string& msg) : error(msg) {}
};

// A tail estimate was requested for parameters that carry no usable bound.
struct no_tail_majorant : error {
    explicit no_tail_majorant(const std::string& msg) : error(msg) {}
};

// A tower height outgrew the configured decimal-digit budget.
struct digit_cap_exceeded : error {
    explicit digit_cap_exceeded(const std::string& msg) : error(msg) {}
};

// The check's hypotheses visibly fail on this input (e.g. a boundedness
// criterion applied to parameters that are still growing).
struct not_applicable : error {
    explicit not_applicable(const std::string& msg) : error(msg) {}
};

// Quadratic-surd input describes a rational (or degenerate) number.
struct not_irrational : error {
    explicit not_irrational(const std::string& msg) : error(msg) {}
};

// Angle outside (0,1), or an index/argument outside its documented range.
struct out_of_range : error {
    explicit out_of_range(const std::string& msg) : error(msg) {}
};

// Telescoping was asked to merge a non-consecutive block of levels.
struct block_not_consecutive : error {
    explicit block_not_consecutive(const std::string& msg) : error(msg) {}
};

// Malformed file or request (JSON shape, unknown subcommand argument, ...).
struct format_error : error {
    explicit format_error(const std::string& msg) : error(msg) {}
};

} // namespace cfrank
