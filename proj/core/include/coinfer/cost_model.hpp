#pragma once

namespace coinfer {

// Delay and energy accounting for the two-stage co-inference pipeline. All
// quantities are SI: Hz, seconds, joules, FLOPs. Config files may use
// GHz/GFLOP; conversion happens at parse time, never here.

struct DeviceProfile {
  double f_max = 0.0;           // Hz
  double flops_per_cycle = 0.0; // c
  double pue = 0.0;             // eta
  double power_coeff = 0.0;     // psi, W/(cycle/s)^3
};

struct ServerProfile {
  double f_max = 0.0;
  double flops_per_cycle = 0.0;
  double pue = 0.0;
  double power_coeff = 0.0;
};

struct Workload {
  double agent_flops = 0.0;   // full-precision on-agent FLOPs
  double server_flops = 0.0;
  int native_bits = 0;        // b, storage width the FLOP count was measured at
  int b_max = 0;              // largest admissible quantization bit-width
};

void validate(const DeviceProfile& d);
void validate(const ServerProfile& s);
void validate(const Workload& w);

/// Agent compute cycles at bit-width b_hat: b_hat*N_flop/(b*c).
double agent_cycles(double b_hat, const Workload& w, const DeviceProfile& d);

/// Server compute cycles: N~_flop/c~.
double server_cycles(const Workload& w, const ServerProfile& s);

double agent_delay(int b_hat, double f, const Workload& w, const DeviceProfile& d);
double server_delay(double f_tilde, const Workload& w, const ServerProfile& s);
double agent_energy(int b_hat, double f, const Workload& w, const DeviceProfile& d);
double server_energy(double f_tilde, const Workload& w, const ServerProfile& s);

double total_delay(int b_hat, double f, double f_tilde, const Workload& w,
                   const DeviceProfile& d, const ServerProfile& s);
double total_energy(int b_hat, double f, double f_tilde, const Workload& w,
                    const DeviceProfile& d, const ServerProfile& s);

}  // namespace coinfer
