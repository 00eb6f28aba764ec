#pragma once

#include <string>
#include <vector>

#include "warpflow/flow.hpp"

namespace warpflow {

enum class BlowupMode { soliton_seeking, non_soliton };

const char* to_string(BlowupMode m) noexcept;

struct BlowupParams {
  std::size_t fiber = 1;        // fiber whose profile is delta_2
  double target_c = 1.0;        // non_soliton target for delta_2(x_j) / (a_* - t_j)
  double soliton_c0 = 0.009;    // soliton_seeking targets c_j = c0 * decay^j
  double soliton_decay = 0.7;
  std::vector<double> gaps = {3.1622776601683794e-2, 1e-2, 3.1622776601683794e-3, 1e-3, 3.1622776601683794e-4, 1e-4};
  std::size_t min_usable = 3;
};

struct BlowupPoint {
  std::size_t frame = 0;
  double x = 0.0;       // grid coordinate
  double r = 0.0;       // initial radius at x
  double t = 0.0;
  double lambda = 0.0;  // 1 / (T - t)
  double target_c = 0.0;
  std::vector<double> c_achieved;  // delta_alpha(x_j) / (a_alpha - t_j)
  double certificate = 0.0;        // |Rm|(x_j, t_j) (T - t_j)
};

struct BlowupSequence {
  BlowupMode mode = BlowupMode::non_soliton;
  double T = 0.0;
  double eta = 0.0;  // delta_1 / delta_2 at the outermost usable point
  std::vector<BlowupPoint> points;
  std::vector<double> target_c;
  std::size_t skipped = 0;
  double max_lambda_gap = 0.0;
  double min_certificate = 0.0;
};

// T is the estimated singular time; x_j lies on the positive side of the grid.
BlowupSequence build_sequence(const Trajectory& tr, double T, BlowupMode mode, const BlowupParams& params = {});

struct LimitEstimate {
  double value = 0.0;
  double spread = 0.0;  // max - min over the averaged tail
  std::vector<double> series;
};

// Mean of the last three usable entries.
LimitEstimate tail_limit(const std::vector<double>& series);

LimitEstimate limit_ratio(const BlowupSequence& seq, const Trajectory& tr, std::size_t a = 0, std::size_t b = 1);

struct SolitonVerdict {
  LimitEstimate ratio;
  bool is_soliton_limit = false;
  bool consistent_with_ratio = false;  // agrees with the constant-soliton classification of u_1/u_2
};

SolitonVerdict soliton_criterion(const BlowupSequence& seq, const Trajectory& tr, double tolerance = 0.02);

struct RescaledFrame {
  double tau = 0.0;
  std::vector<double> y;
  std::vector<std::vector<double>> u;
  double oscillation = 0.0;  // max over fibers of (max - min) / mean
};

RescaledFrame rescale(const BlowupSequence& seq, const Trajectory& tr, std::size_t j, double window = 5.0,
                      std::size_t samples = 41);

// (1 + c eta) / (1 + c)
double closed_form_ratio(double eta, double c2);

}  // namespace warpflow
