#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dbcl/core_model.hpp"

namespace dbcl {

enum class EmcClass { Safe, ViolationPossible, FeedbackEmpty, Undetermined };

std::string to_string(EmcClass c);
EmcClass emc_class_from_string(const std::string& text);

struct EmcEntry {
    std::string variable;
    bool self_regulating = false;
    /// nullopt when the path search exceeded its budget
    std::optional<bool> feedback_empty;
    EmcClass classification = EmcClass::Undetermined;

    bool operator==(const EmcEntry&) const = default;
};

struct EmcReport {
    std::vector<EmcEntry> entries;
    std::vector<std::string> warnings;

    bool operator==(const EmcReport&) const = default;
};

inline constexpr std::size_t kDefaultPathBudget = 5'000'000;

/// True iff `x` is adjacent (any mark) to its prime variable.
bool is_self_regulating(const PatternGraph& g, const std::string& x);

/// True iff every simple path between `from` and `to` in the contemporaneous
/// graph has three of its nodes forming a v-structure p -> q <- r of compelled
/// edges. Throws dbcl::Error when more than `budget` path extensions are needed.
bool every_path_has_v_structure(const PatternGraph& g, const VarId& from, const VarId& to,
                                std::size_t budget = kDefaultPathBudget);

/// Whether the feedback set of `x` is empty, decided from the pattern.
bool feedback_empty(const PatternGraph& g, const std::string& x, std::size_t budget = kDefaultPathBudget);

EmcClass classify(bool self_regulating, bool feedback_empty);

/// One entry per variable with a prime in the pattern, in name order.
EmcReport emc_report(const PatternGraph& g, std::size_t budget = kDefaultPathBudget);

}  // namespace dbcl
