#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "dfa/panel.hpp"
#include "dfa/state_space.hpp"

namespace dfa {

struct SimOptions {
  Eigen::Index burn_in = 500;
  /// Draw the starting state from the stationary distribution instead of
  /// starting at zero (burn-in still applies).
  bool stationary_start = false;
  /// First date of the synthetic weekday calendar attached to the returns.
  Date start_date{std::chrono::year{2015}, std::chrono::January, std::chrono::day{1}};
};

struct SimOutput {
  ReturnsPanel returns;           // beta F + diag(sigma) Z, not centered
  Eigen::MatrixXd true_factors;   // T x n
  Eigen::MatrixXd true_idio;      // T x S, unit-innovation Z
  std::uint64_t seed = 0;
};

/// Standard-normal innovations for (burn_in + t_obs) steps, drawn from a
/// seeded mt19937_64: factor shocks first, then idiosyncratic shocks, row by row.
struct Shocks {
  Eigen::MatrixXd factor;  // steps x n
  Eigen::MatrixXd idio;    // steps x S
  Eigen::VectorXd initial_state;  // empty unless a stationary start was requested
};

Shocks draw_shocks(const DFMParams& params, const DFMSpec& spec, Eigen::Index steps, std::uint64_t seed,
                   bool stationary_start = false);

/// Runs the scalar recursions on given shocks and drops the first burn_in rows.
SimOutput simulate_from_shocks(const DFMParams& params, const DFMSpec& spec, const Shocks& shocks, Eigen::Index burn_in,
                               const Date& start_date = SimOptions{}.start_date);

/// Throws NumericalError for non-stationary parameters.
SimOutput simulate_dfm(const DFMParams& params, const DFMSpec& spec, Eigen::Index t_obs, std::uint64_t seed,
                       const SimOptions& options = {});

/// Consecutive weekdays starting at (or after) `start`.
std::vector<Date> weekday_calendar(const Date& start, Eigen::Index count);

}  // namespace dfa
