#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "rmab/mdp.hpp"

namespace rmab {

/// How the decision maker may treat the row P(.|s,a) of one arm.
enum class RowClass {
    Known,          ///< exact row supplied up front; never estimated
    Stationary,     ///< unknown but fixed over episodes: estimated from all history
    NonStationary,  ///< unknown and drifting: estimated from the sliding window
};

/// Known ordering of an arm's optimal value function in the state index.
enum class Monotonicity {
    None,        ///< no structural claim
    Increasing,  ///< V nondecreasing in the state index
    Decreasing,  ///< V nonincreasing in the state index
};

/// Per-arm domain knowledge: which rows are stationary or drifting, which
/// transitions are structurally impossible, and the per-episode drift bound.
class PriorKnowledge {
public:
    PriorKnowledge() = default;

    /// Every row starts NonStationary with no structural zeros.
    PriorKnowledge(std::size_t num_states, double epsilon)
        : n_(num_states),
          epsilon_(epsilon),
          classes_(num_states, {RowClass::NonStationary, RowClass::NonStationary}),
          zeros_(num_states, {std::vector<bool>(num_states, false), std::vector<bool>(num_states, false)}),
          known_(num_states) {
        detail::require(num_states >= 1, "prior needs at least one state");
        detail::require(epsilon >= 0.0, "drift bound must be nonnegative");
    }

    std::size_t num_states() const noexcept { return n_; }
    double epsilon() const noexcept { return epsilon_; }
    void set_epsilon(double epsilon) {
        detail::require(epsilon >= 0.0, "drift bound must be nonnegative");
        epsilon_ = epsilon;
    }

    RowClass row_class(State s, Action a) const { return classes_[s][idx(a)]; }
    void set_row_class(State s, Action a, RowClass c) { classes_[s][idx(a)] = c; }

    /// Declares row (s,a) known with the given distribution.
    void set_known(State s, Action a, std::vector<double> row) {
        detail::require(row.size() == n_, "known row has wrong length");
        classes_[s][idx(a)] = RowClass::Known;
        known_[s][idx(a)] = std::move(row);
    }
    const std::vector<double>& known_row(State s, Action a) const { return known_[s][idx(a)]; }

    /// s' in S0(s,a): P(s'|s,a) = 0 in every episode.
    bool structural_zero(State s, Action a, State next) const { return zeros_[s][idx(a)][next]; }
    void set_structural_zero(State s, Action a, State next, bool zero = true) { zeros_[s][idx(a)][next] = zero; }

    /// Marks as structural zeros everything outside `allowed`.
    void restrict_support(State s, Action a, std::initializer_list<State> allowed) {
        auto& mask = zeros_[s][idx(a)];
        std::fill(mask.begin(), mask.end(), true);
        for (State j : allowed) mask[j] = false;
    }

    std::size_t allowed_count(State s, Action a) const {
        std::size_t c = 0;
        for (bool z : zeros_[s][idx(a)]) c += z ? 0 : 1;
        return c;
    }

    /// |Z1|: unknown stationary rows.
    std::size_t z1_size() const { return count(RowClass::Stationary); }
    /// |Z2|: unknown drifting rows.
    std::size_t z2_size() const { return count(RowClass::NonStationary); }

    /// Throws unless every row has a reachable next state and known rows
    /// are distributions that respect the structural zeros.
    void validate() const {
        for (State s = 0; s < n_; ++s) {
            for (Action a = 0; a < 2; ++a) {
                detail::require(allowed_count(s, a) >= 1,
                                "structural zeros leave no reachable next state for a row");
                if (row_class(s, a) != RowClass::Known) continue;
                const auto& row = known_row(s, a);
                double sum = 0.0;
                for (State j = 0; j < n_; ++j) {
                    detail::require(row[j] >= 0.0, "known row has a negative entry");
                    detail::require(!(structural_zero(s, a, j) && row[j] > 0.0),
                                    "known row puts mass on a structural zero");
                    sum += row[j];
                }
                detail::require(std::abs(sum - 1.0) <= kStochasticTolerance, "known row does not sum to one");
            }
        }
    }

    /// True if `kernel` respects every structural zero and matches every known row.
    bool consistent_with(const TransitionKernel& kernel, double tol = 1e-12) const {
        if (kernel.num_states() != n_) return false;
        for (State s = 0; s < n_; ++s) {
            for (Action a = 0; a < 2; ++a) {
                for (State j = 0; j < n_; ++j) {
                    if (structural_zero(s, a, j) && kernel(s, a, j) > tol) return false;
                    if (row_class(s, a) == RowClass::Known && std::abs(kernel(s, a, j) - known_row(s, a)[j]) > tol) {
                        return false;
                    }
                }
            }
        }
        return true;
    }

private:
    static std::size_t idx(Action a) { return static_cast<std::size_t>(a); }

    std::size_t count(RowClass c) const {
        std::size_t total = 0;
        for (const auto& pair : classes_) total += (pair[0] == c) + (pair[1] == c);
        return total;
    }

    std::size_t n_ = 0;
    double epsilon_ = 0.0;
    std::vector<std::array<RowClass, 2>> classes_;
    std::vector<std::array<std::vector<bool>, 2>> zeros_;
    std::vector<std::array<std::vector<double>, 2>> known_;
};

}  // namespace rmab
