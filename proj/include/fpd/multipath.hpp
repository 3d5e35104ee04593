#pragma once

// Grid recursion for the first-passage distance when an independent
// per-step multipath term rides on the correlated shadowing: propagate the
// joint density of the shadowing state and the no-crossing-so-far event,
// step by step, with an FFT convolution against the innovation kernel.

#include <unsupported/Eigen/FFT>

#include <complex>
#include <vector>

#include "fpd/rician.hpp"
#include "fpd/types.hpp"

namespace fpd {

/// Uniform grid over the shadowing deviation (dB), symmetric about 0.
struct GammaGrid {
  double gamma_min = 0.0;  // dB
  double dgamma = 0.0;     // dB
  int m = 0;               // node count

  double at(int i) const { return gamma_min + dgamma * i; }
};

/// Grid spanning [-c*sigma, +c*sigma] with m nodes.
GammaGrid make_gamma_grid(double sigma, int m = 4096, double c = 8.0);

/// Values sampled on a GammaGrid.
struct GridFunction {
  GammaGrid grid;
  std::vector<double> values;

  /// Trapezoid integral over the grid.
  double integral() const;
};

/// Density of the shadowing deviation at the start joint with "not yet
/// connected there": stationary Gaussian times the multipath CDF below the
/// threshold margin.
GridFunction init_j0(const ChannelParams& p, const MultipathCdf& mp,
                     double gamma_pl_0, const GammaGrid& grid);

/// One-step propagator: rescale the previous joint density by the shadowing
/// correlation, convolve with the Gaussian innovation kernel (FFT), then
/// mask by the multipath CDF at the next node. Holds the FFT plan and the
/// kernel transform so repeated steps cost one forward+inverse FFT each.
class RecursionEngine {
 public:
  /// delta_d is the fixed travel step between nodes. Throws if the
  /// innovation kernel is too narrow for the grid to resolve
  /// (sigma_step < 1.5 * dgamma).
  RecursionEngine(const ChannelParams& p, const MultipathCdf& mp,
                  const GammaGrid& grid, double delta_d);

  /// Advance one step; gamma_pl_next is the path loss at the new node.
  /// Throws if mass reaches the grid edges (grid span too small).
  GridFunction step(const GridFunction& j_prev, double gamma_pl_next);

  double rho() const { return rho_; }
  double sigma_step() const { return sigma_step_; }

 private:
  ChannelParams p_;
  MultipathCdf mp_;
  GammaGrid grid_;
  double rho_ = 0.0;
  double sigma_step_ = 0.0;
  int pad_size_ = 0;
  std::vector<std::complex<double>> kernel_freq_;
  std::vector<std::complex<double>> time_buf_;
  std::vector<std::complex<double>> freq_buf_;
  Eigen::FFT<double> fft_;
};

/// Single propagation step without reusing an engine (small grids, tests).
GridFunction recursion_step(const ChannelParams& p, const MultipathCdf& mp,
                            const GridFunction& j_prev, double gamma_pl_next,
                            double delta_d);

struct SurvivalSequence {
  std::vector<double> joint;        // P(no crossing through step k)
  std::vector<double> conditional;  // joint / joint[0]
  int truncated_at = -1;  // first step whose mass underflowed, -1 if none
};

/// Survival probabilities along a node sequence with path loss gamma_pl[k]
/// at travel distance k * delta_d. Once the joint mass falls below 1e-12 the
/// recursion stops and the survival is held constant (truncated_at records
/// the step).
SurvivalSequence survival_probability(const ChannelParams& p,
                                      const MultipathCdf& mp,
                                      const std::vector<double>& gamma_pl,
                                      double delta_d, const GammaGrid& grid);

struct FirstPassagePmf {
  std::vector<double> distances;  // k * delta_d, k = 1..n
  std::vector<double> pmf;        // P(first crossing at step k | start below)
  double residual = 0.0;          // P(no crossing within the horizon | start below)
};

/// Per-step first-passage mass from the conditional survival sequence.
FirstPassagePmf first_passage_pmf(const SurvivalSequence& s, double delta_d);

/// Mean first-passage distance with the residual (censored) mass attributed
/// to the horizon distance.
double expected_first_passage(const FirstPassagePmf& pmf);

}  // namespace fpd
