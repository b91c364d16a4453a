#include "wgqed/grids.hpp"

#include <cmath>

#include "wgqed/errors.hpp"

namespace wgqed {

KGrid::KGrid(double dk, std::size_t n) : KGrid(0.5 * dk, dk, n) {}

KGrid::KGrid(double k_min, double dk, std::size_t n) : k_min_(k_min), dk_(dk), n_(n) {
    if (!(dk > 0.0)) throw DomainError("KGrid: dk must be > 0");
    if (n == 0) throw DomainError("KGrid: empty grid");
    if (!(k_min > 0.0)) throw DomainError("KGrid: all k must be > 0");
}

KGrid KGrid::covering(double k_max, double dk_target) {
    if (!(k_max > 0.0) || !(dk_target > 0.0)) throw DomainError("KGrid::covering: bad extent");
    const auto n = static_cast<std::size_t>(std::ceil(k_max / dk_target));
    return KGrid(k_max / static_cast<double>(n), n);
}

std::vector<double> KGrid::values() const {
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = (*this)[j];
    return out;
}

TimeGrid::TimeGrid(double t_start, double t_end, double dt) : t_start_(t_start), t_end_(t_end), dt_(dt) {
    if (!(t_start < t_end)) throw DomainError("TimeGrid: t_start must be < t_end");
    if (!(dt > 0.0)) throw DomainError("TimeGrid: dt must be > 0");
    const double count = (t_end - t_start) / dt;
    const double rounded = std::round(count);
    if (rounded < 1.0 || std::abs(count - rounded) > 1e-9 * std::max(1.0, rounded)) {
        throw DomainError("TimeGrid: (t_end - t_start)/dt must be an integer");
    }
    steps_ = static_cast<std::size_t>(rounded);
    dt_ = (t_end - t_start) / rounded;
}

TimeGrid TimeGrid::with_steps(double t_start, double t_end, std::size_t steps) {
    if (steps == 0) throw DomainError("TimeGrid: need at least one step");
    return TimeGrid(t_start, t_end, (t_end - t_start) / static_cast<double>(steps));
}

TimeGrid TimeGrid::fitting(double t_start, double t_end, double dt_max) {
    if (!(dt_max > 0.0)) throw DomainError("TimeGrid: dt must be > 0");
    const auto steps = static_cast<std::size_t>(std::ceil((t_end - t_start) / dt_max - 1e-9));
    return with_steps(t_start, t_end, std::max<std::size_t>(steps, 1));
}

std::vector<double> TimeGrid::values() const {
    std::vector<double> out(size());
    for (std::size_t n = 0; n < size(); ++n) out[n] = (*this)[n];
    return out;
}

} // namespace wgqed
