#include "coinfer/cost_model.hpp"

#include <stdexcept>
#include <string>

namespace coinfer {

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0)) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

void check_bit_width(int b_hat, const Workload& w) {
  if (b_hat < 1 || b_hat > w.b_max) {
    throw std::invalid_argument("b_hat must be in [1, b_max]");
  }
}

void check_frequency(double f, double f_max, const char* name) {
  if (!(f > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
  if (f > f_max) throw std::invalid_argument(std::string(name) + " exceeds its maximum");
}

}  // namespace

void validate(const DeviceProfile& d) {
  check_positive(d.f_max, "device f_max");
  check_positive(d.flops_per_cycle, "device flops_per_cycle");
  check_positive(d.pue, "device pue");
  check_positive(d.power_coeff, "device power_coeff");
}

void validate(const ServerProfile& s) {
  check_positive(s.f_max, "server f_max");
  check_positive(s.flops_per_cycle, "server flops_per_cycle");
  check_positive(s.pue, "server pue");
  check_positive(s.power_coeff, "server power_coeff");
}

void validate(const Workload& w) {
  check_positive(w.agent_flops, "agent_flops");
  check_positive(w.server_flops, "server_flops");
  if (w.native_bits < 1) throw std::invalid_argument("native_bits must be >= 1");
  if (w.b_max < 1 || w.b_max > w.native_bits) {
    throw std::invalid_argument("b_max must satisfy 1 <= b_max <= native_bits");
  }
}

double agent_cycles(double b_hat, const Workload& w, const DeviceProfile& d) {
  return b_hat * w.agent_flops / (static_cast<double>(w.native_bits) * d.flops_per_cycle);
}

double server_cycles(const Workload& w, const ServerProfile& s) {
  return w.server_flops / s.flops_per_cycle;
}

double agent_delay(int b_hat, double f, const Workload& w, const DeviceProfile& d) {
  validate(w);
  validate(d);
  check_bit_width(b_hat, w);
  check_frequency(f, d.f_max, "f");
  return agent_cycles(b_hat, w, d) / f;
}

double server_delay(double f_tilde, const Workload& w, const ServerProfile& s) {
  validate(w);
  validate(s);
  check_frequency(f_tilde, s.f_max, "f_tilde");
  return server_cycles(w, s) / f_tilde;
}

double agent_energy(int b_hat, double f, const Workload& w, const DeviceProfile& d) {
  validate(w);
  validate(d);
  check_bit_width(b_hat, w);
  check_frequency(f, d.f_max, "f");
  return d.pue * agent_cycles(b_hat, w, d) * d.power_coeff * f * f;
}

double server_energy(double f_tilde, const Workload& w, const ServerProfile& s) {
  validate(w);
  validate(s);
  check_frequency(f_tilde, s.f_max, "f_tilde");
  return s.pue * server_cycles(w, s) * s.power_coeff * f_tilde * f_tilde;
}

double total_delay(int b_hat, double f, double f_tilde, const Workload& w,
                   const DeviceProfile& d, const ServerProfile& s) {
  return agent_delay(b_hat, f, w, d) + server_delay(f_tilde, w, s);
}

double total_energy(int b_hat, double f, double f_tilde, const Workload& w,
                    const DeviceProfile& d, const ServerProfile& s) {
  return agent_energy(b_hat, f, w, d) + server_energy(f_tilde, w, s);
}

}  // namespace coinfer
