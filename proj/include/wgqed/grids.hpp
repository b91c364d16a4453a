// grids.hpp: uniform k and time grids

#pragma once

#include <cstddef>
#include <vector>

namespace wgqed {

// Uniform wavevector grid k_j = k_min + j*dk, j = 0..n-1, all k > 0.
// The default k_min = dk/2 is the midpoint rule for the integral over (0, k_max).
class KGrid {
public:
    KGrid() = default;
    KGrid(double dk, std::size_t n);
    KGrid(double k_min, double dk, std::size_t n);

    // Midpoint grid on (0, k_max] with spacing close to dk_target.
    static KGrid covering(double k_max, double dk_target);

    double dk() const { return dk_; }
    std::size_t size() const { return n_; }
    double k_min() const { return k_min_; }
    double k_max() const { return k_min_ + dk_ * static_cast<double>(n_ - 1); }
    // Upper edge of the last cell, the cut-off of the midpoint-rule integral.
    double k_cutoff() const { return k_max() + 0.5 * dk_; }
    double operator[](std::size_t j) const { return k_min_ + dk_ * static_cast<double>(j); }
    std::vector<double> values() const;

    bool operator==(const KGrid& other) const = default;

private:
    double k_min_{0.0};
    double dk_{0.0};
    std::size_t n_{0};
};

// Uniform time grid t_n = t_start + n*dt, n = 0..steps().
class TimeGrid {
public:
    TimeGrid() = default;
    // Throws DomainError unless t_start < t_end, dt > 0 and the span is an integer number of steps.
    TimeGrid(double t_start, double t_end, double dt);
    // Grid with exactly `steps` intervals.
    static TimeGrid with_steps(double t_start, double t_end, std::size_t steps);
    // Grid on [t_start, t_end] with the largest dt <= dt_max that divides the span.
    static TimeGrid fitting(double t_start, double t_end, double dt_max);

    double t_start() const { return t_start_; }
    double t_end() const { return t_end_; }
    double dt() const { return dt_; }
    std::size_t steps() const { return steps_; }
    std::size_t size() const { return steps_ + 1; }
    double operator[](std::size_t n) const { return t_start_ + dt_ * static_cast<double>(n); }
    std::vector<double> values() const;

    // Same span with 2x the number of steps.
    TimeGrid refined(std::size_t factor = 2) const { return with_steps(t_start_, t_end_, steps_ * factor); }

    bool operator==(const TimeGrid& other) const = default;

private:
    double t_start_{0.0};
    double t_end_{0.0};
    double dt_{0.0};
    std::size_t steps_{0};
};

} // namespace wgqed
