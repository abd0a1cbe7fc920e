#pragma once

#include "finpanel/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace finpanel::articulate {

/// Official discrepancy threshold, thousands of rubles. Substitution fires
/// strictly above it; articulation passes at or below it.
inline constexpr Money kThreshold = 4;

struct Term {
    int sign; // +1 or -1
    LineCode code;

    bool operator==(const Term &) const = default;
};

struct Equation {
    std::string id;
    Form form_scope;
    LineCode total;
    std::vector<Term> terms;
    // whether the total's x-suffix optional-line sum enters the right-hand side
    bool includes_optional = false;

    bool operator==(const Equation &) const = default;
};

/// The fixed suite: 22 full-statement and 4 simplified-statement equations,
/// in published order.
const std::vector<Equation> &equation_registry();

/// Signed sum over present terms; missing terms contribute zero. Returns
/// nullopt iff every term (including the optional-line sum, when in scope)
/// is missing.
std::optional<Money> compute_total(const LineValues &lines, const Equation &eq);

struct EquationCheck {
    std::string id;
    std::optional<Money> stated;
    std::optional<Money> computed;
    bool applicable = false; // stated and computed both present
    Money discrepancy = 0;
    bool pass = true;
};

struct ArticulationResult {
    bool articulated = true;
    std::vector<EquationCheck> checks; // one per form-matched equation
};

/// Evaluates every equation matching the statement's form against its
/// current values. articulated is true iff every applicable equation is
/// within the threshold (vacuously true when none applies).
ArticulationResult check_articulation(const HarmonizedStatement &stmt);

/// Repairs totals in place: for each form-matched equation, evaluated
/// leaf-first so repaired section totals feed the grand totals, the stated
/// total is replaced by the computed one when it is absent or off by more
/// than the threshold (sets totals_adjustment). Simplified statements then
/// also receive full-form totals absent from their form, computed from the
/// available components (fill only, flag untouched).
void adjust_totals(HarmonizedStatement &stmt);

/// Indices into equation_registry() in repair evaluation order for a form.
const std::vector<std::size_t> &adjustment_order(Form form);

/// The registry as a data file (form,id,total,terms,includes_optional) so
/// the golden-file test and the brute-force oracle share one source.
std::vector<Equation> read_equation_file(const std::filesystem::path &path);

} // namespace finpanel::articulate
