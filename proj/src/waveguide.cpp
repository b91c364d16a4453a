#include "wgqed/waveguide.hpp"

#include <cmath>
#include <string>

#include "wgqed/errors.hpp"

namespace wgqed {

void WaveguideModel::validate() const {
    if (!(omega0 > 0.0)) throw DomainError("WaveguideModel: omega0 must be > 0");
    if (!(v > 0.0)) throw DomainError("WaveguideModel: v must be > 0");
    if (!(g >= 0.0)) throw DomainError("WaveguideModel: g must be >= 0");
    if (!(leak_rate >= 0.0)) throw DomainError("WaveguideModel: leak_rate must be >= 0");
}

double omega_of_k(double k, const WaveguideModel& model) {
    if (!(k >= 0.0)) throw DomainError("omega_of_k: k must be >= 0, got " + std::to_string(k));
    return std::hypot(model.omega0, model.hbar_v() * k);
}

double k_of_omega(double omega, const WaveguideModel& model) {
    if (!(omega >= model.omega0)) throw DomainError("k_of_omega: omega below the cut-off");
    // (omega - omega0)(omega + omega0) avoids cancellation near the edge
    const double d = omega - model.omega0;
    return std::sqrt(d * (omega + model.omega0)) / model.hbar_v();
}

namespace {
void require_above_edge(double omega, const WaveguideModel& model, const char* who) {
    if (!(omega > model.omega0)) {
        throw DomainError(std::string(who) + ": omega must lie above the cut-off omega0");
    }
}
} // namespace

double dos(double omega, const WaveguideModel& model) {
    require_above_edge(omega, model, "dos");
    return std::sqrt(model.omega0 / 2.0) / (model.hbar_v() * std::sqrt(omega - model.omega0));
}

double dk_domega(double omega, const WaveguideModel& model) {
    require_above_edge(omega, model, "dk_domega");
    return omega / (model.hbar_v() * model.hbar_v() * k_of_omega(omega, model));
}

double group_velocity(double omega, const WaveguideModel& model) {
    require_above_edge(omega, model, "group_velocity");
    // v * sqrt(1 - (omega0/omega)^2), written without cancellation
    const double d = omega - model.omega0;
    return model.v * std::sqrt(d * (omega + model.omega0)) / omega;
}

double markovian_rate(const WaveguideModel& model, double omega_center) {
    return 2.0 * units::kPi * model.g * model.g * dos(omega_center, model);
}

double calibrate_coupling(double gamma_target, double omega_center, const WaveguideModel& model) {
    if (!(gamma_target > 0.0)) throw DomainError("calibrate_coupling: gamma_target must be > 0");
    return std::sqrt(gamma_target / (2.0 * units::kPi * dos(omega_center, model)));
}

WaveguideModel with_rate(WaveguideModel model, double gamma_target, double omega_center) {
    model.g = calibrate_coupling(gamma_target, omega_center, model);
    return model;
}

double rate_from_dipole(double dipole_debye) {
    if (!(dipole_debye >= 0.0)) throw DomainError("rate_from_dipole: dipole must be >= 0");
    const double r = dipole_debye / kAnchorDipoleDebye;
    return kAnchorRateMev * r * r;
}

double truncation_shift(const WaveguideModel& model, double k_max, double omega) {
    model.validate();
    const double top = omega_of_k(k_max, model);
    if (!(omega < top)) throw DomainError("truncation_shift: omega must lie below the band cut-off");
    const double a_coef = model.g * model.g * std::sqrt(model.omega0 / 2.0) / model.hbar_v();
    const double u = std::sqrt(top - model.omega0);
    const double x = omega - model.omega0;
    if (x == 0.0) return -2.0 * a_coef / u;
    if (x < 0.0) {
        const double a = std::sqrt(-x);
        return -2.0 * a_coef / a * std::atan(a / u);
    }
    const double b = std::sqrt(x);
    return -a_coef / b * std::log((u + b) / (u - b));
}

} // namespace wgqed
