#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrc/lindblad.hpp"
#include "qrc/operators.hpp"
#include "qrc/parallel.hpp"
#include "qrc/types.hpp"

namespace qrc {

/// One Gaussian increment per measurement channel, ordered like the
/// observables: Q, P, then x_i, y_i per atom. Each is N(0, dt).
struct WienerIncrements {
  std::vector<double> dw;
};

inline WienerIncrements draw_increments(std::mt19937_64& rng, int n_channels,
                                        double dt) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
  WienerIncrements w;
  w.dw.resize(n_channels);
  for (double& x : w.dw) x = gauss(rng);
  return w;
}

/// Measurement superoperator H[a] rho = a rho + rho a^dag - <a + a^dag> rho.
inline ComplexMatrix stochastic_superop_h(const ComplexMatrix& rho,
                                          const ComplexMatrix& a) {
  ComplexMatrix m = a * rho;
  double mean = 2.0 * m.trace().real();  // <a + a^dag> for Hermitian rho
  return m + ComplexMatrix(m.adjoint()) - mean * rho;
}

/// Conditional trajectory of the stochastic master equation.
struct TrajectoryState {
  DensityMatrix rho_j;
  std::uint64_t rng_seed = 0;
  // Per-channel measurement records, one row per Euler-Maruyama step when
  // record keeping is enabled.
  std::vector<std::vector<double>> records;
};

/// The four kinds of stochastic collapse operators of the continuous
/// measurement: sqrt(kc) c, i sqrt(kc) c, sqrt(ki) s_i, i sqrt(ki) s_i,
/// paired with the observables they monitor.
struct MeasurementChannels {
  std::vector<ComplexMatrix> collapse;     // stochastic collapse operators
  std::vector<const ComplexMatrix*> obs;   // matching observables

  static MeasurementChannels build(const OperatorSet& ops,
                                   const ReservoirParams& params) {
    MeasurementChannels ch;
    double sc = std::sqrt(params.kappa_c());
    double si = std::sqrt(params.kappa_i());
    ch.collapse.push_back(sc * ops.c);
    ch.collapse.push_back(kImag * sc * ops.c);
    for (size_t i = 0; i < ops.sigma.size(); ++i) {
      ch.collapse.push_back(si * ops.sigma[i]);
      ch.collapse.push_back(kImag * si * ops.sigma[i]);
    }
    ch.obs = ops.observables();
    return ch;
  }

  int count() const { return static_cast<int>(collapse.size()); }
};

/// One Euler-Maruyama step of the stochastic master equation: deterministic
/// drift plus the per-channel dW H[a] backaction, followed by trace
/// renormalization and re-symmetrization.
inline DensityMatrix sme_step(const DensityMatrix& dm, double f_k, double dt,
                              const ReservoirParams& params,
                              const OperatorSet& ops,
                              const WienerIncrements& increments) {
  MeasurementChannels channels = MeasurementChannels::build(ops, params);
  if (static_cast<int>(increments.dw.size()) != channels.count()) {
    throw std::invalid_argument("sme_step: increment count mismatch");
  }
  ComplexMatrix h = build_h0(dm.space, params.omega_c, params.omega, params.g) +
                    params.epsilon * f_k * build_drive_op(dm.space);
  ComplexMatrix next = dm.rho + dt * lindblad_rhs(dm.rho, h, params, ops);
  for (int c = 0; c < channels.count(); ++c) {
    next += increments.dw[c] * stochastic_superop_h(dm.rho, channels.collapse[c]);
  }
  if (!next.allFinite()) {
    throw std::runtime_error("sme_step: non-finite state");
  }
  next /= next.trace().real();
  next = 0.5 * (next + ComplexMatrix(next.adjoint()));
  return DensityMatrix{dm.space, next};
}

/// Homodyne current of one channel over [t, t+dt): <O>_J + dW/dt.
inline double measurement_record(const DensityMatrix& dm,
                                 const ComplexMatrix& observable, double dw,
                                 double dt) {
  return expectation(dm, observable) + dw / dt;
}

struct SmeRunConfig {
  double dt = 1e-3;          // Euler-Maruyama step
  double dt_sample = 1.0;    // spacing of sampled expectations
  bool keep_records = false; // store per-step measurement records

  int steps_per_sample() const {
    double ratio = dt_sample / dt;
    int n = static_cast<int>(std::lround(ratio));
    if (n < 1 || std::abs(ratio - n) > 1e-9 * ratio) {
      throw std::invalid_argument(
          "SmeRunConfig: dt_sample must be an integer multiple of dt");
    }
    return n;
  }
};

struct SmeTrajectoryResult {
  // Conditional expectations of every channel observable at the end of each
  // sampling interval; rows: samples, cols: channels.
  RealMatrix expectations;
  // Raw per-step records (steps x channels) when keep_records is set.
  RealMatrix records;
};

namespace detail {

/// Shared preassembled operators for trajectory runs. The drift is organized
/// around K = -i H - sum_b kappa_b b^dag b so that one product b rho per
/// physical collapse operator serves the jump term, both quadrature
/// backaction channels and the measurement records.
struct SmeContext {
  HilbertSpace space;
  ReservoirParams params;
  OperatorSet ops;
  MeasurementChannels channels;
  ComplexMatrix k_base, k_drive;
  std::vector<const ComplexMatrix*> base_ops;      // c, sigma_1, ...
  std::vector<ComplexMatrix> base_ops_dag;
  std::vector<double> base_rates;                  // kappa per base op

  SmeContext(const HilbertSpace& s, const ReservoirParams& p)
      : space(s),
        params(p),
        ops(observable_set(s)),
        channels(MeasurementChannels::build(ops, p)) {
    p.validate(s);
    k_base = -kImag * build_h0(s, p.omega_c, p.omega, p.g);
    k_drive = -kImag * p.epsilon * build_drive_op(s);
    base_ops.push_back(&ops.c);
    base_rates.push_back(p.kappa_c());
    for (size_t i = 0; i < ops.sigma.size(); ++i) {
      base_ops.push_back(&ops.sigma[i]);
      base_rates.push_back(p.kappa_i());
    }
    for (size_t b = 0; b < base_ops.size(); ++b) {
      base_ops_dag.push_back(base_ops[b]->adjoint());
      k_base -= base_rates[b] * (base_ops_dag[b] * (*base_ops[b]));
    }
  }
};

}  // namespace detail

/// Integrates one conditional trajectory through the drive series. The
/// trajectory's noise stream is fully determined by (seed, index) so ensemble
/// members are reproducible regardless of scheduling. Increments are drawn in
/// channel order within each step.
inline SmeTrajectoryResult run_trajectory(const detail::SmeContext& ctx,
                                          const std::vector<double>& drive,
                                          const SmeRunConfig& cfg,
                                          std::uint64_t seed,
                                          std::uint64_t index) {
  std::seed_seq seq{seed, index};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, std::sqrt(cfg.dt));

  const int n_ch = ctx.channels.count();
  const int n_base = static_cast<int>(ctx.base_ops.size());
  const int per_sample = cfg.steps_per_sample();
  const int dim = ctx.space.dim;
  const double dt = cfg.dt;

  DensityMatrix dm = vacuum_ground_state(ctx.space);
  SmeTrajectoryResult out;
  out.expectations.resize(drive.size(), n_ch);
  if (cfg.keep_records) {
    out.records.resize(static_cast<long>(drive.size()) * per_sample, n_ch);
  }

  ComplexMatrix k_eff(dim, dim), next(dim, dim), m0(dim, dim), p(dim, dim);
  long step_row = 0;
  for (size_t k = 0; k < drive.size(); ++k) {
    k_eff = ctx.k_base + drive[k] * ctx.k_drive;
    for (int s = 0; s < per_sample; ++s) {
      // Drift: K rho + (K rho)^dag covers the commutator and the
      // anticommutator halves for Hermitian rho.
      m0.noalias() = k_eff * dm.rho;
      next = dm.rho + dt * (m0 + ComplexMatrix(m0.adjoint()));
      for (int b = 0; b < n_base; ++b) {
        p.noalias() = (*ctx.base_ops[b]) * dm.rho;
        next.noalias() += (2.0 * dt * ctx.base_rates[b]) *
                          (p * ctx.base_ops_dag[b]);  // jump feeding
        const double sk = std::sqrt(ctx.base_rates[b]);
        const Complex tr_p = p.trace();
        // x channel: a = sk * b
        double dwx = gauss(rng);
        // y channel: a = i sk * b
        double dwy = gauss(rng);
        next += (dwx * sk) * (p + ComplexMatrix(p.adjoint()));
        next -= (dwx * sk * 2.0 * tr_p.real()) * dm.rho;
        next += (dwy * sk) *
                ComplexMatrix(kImag * p - kImag * ComplexMatrix(p.adjoint()));
        next += (dwy * sk * 2.0 * tr_p.imag()) * dm.rho;
        if (cfg.keep_records) {
          out.records(step_row, 2 * b) = 2.0 * tr_p.real() + dwx / dt;
          out.records(step_row, 2 * b + 1) = -2.0 * tr_p.imag() + dwy / dt;
        }
      }
      ++step_row;
      if (!next.allFinite()) {
        throw std::runtime_error("run_trajectory: non-finite state");
      }
      next /= next.trace().real();
      dm.rho = 0.5 * (next + ComplexMatrix(next.adjoint()));
    }
    for (int b = 0; b < n_base; ++b) {
      const Complex tr_p = ((*ctx.base_ops[b]) * dm.rho).trace();
      out.expectations(static_cast<long>(k), 2 * b) = 2.0 * tr_p.real();
      out.expectations(static_cast<long>(k), 2 * b + 1) = -2.0 * tr_p.imag();
    }
  }
  return out;
}

struct SmeEnsembleResult {
  RealMatrix mean;     // samples x channels, ensemble-averaged expectations
  RealMatrix stderr_;  // matching standard errors
  int ensemble_size = 0;
};

/// Averages M independent trajectories driven by the same input series.
/// Failures carry the trajectory index. The reduction is performed in index
/// order, so the result is bit-identical for any worker count.
inline SmeEnsembleResult ensemble_average(const HilbertSpace& space,
                                          const ReservoirParams& params,
                                          const std::vector<double>& drive,
                                          const SmeRunConfig& cfg, int ensemble,
                                          std::uint64_t seed,
                                          WorkerPool* pool = nullptr) {
  if (ensemble < 1) throw std::invalid_argument("ensemble_average: M < 1");
  detail::SmeContext ctx(space, params);
  const int n_ch = ctx.channels.count();

  std::vector<RealMatrix> slots(ensemble);
  std::vector<std::string> failures(ensemble);
  auto run_one = [&](int t) {
    try {
      SmeRunConfig traj_cfg = cfg;
      traj_cfg.keep_records = false;
      slots[t] = run_trajectory(ctx, drive, traj_cfg, seed,
                                static_cast<std::uint64_t>(t))
                     .expectations;
    } catch (const std::exception& e) {
      failures[t] = e.what();
    }
  };
  if (pool && pool->size() > 1) {
    pool->parallel_for(ensemble, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t t = lo; t < hi; ++t) run_one(static_cast<int>(t));
    });
  } else {
    for (int t = 0; t < ensemble; ++t) run_one(t);
  }
  for (int t = 0; t < ensemble; ++t) {
    if (!failures[t].empty()) {
      throw std::runtime_error("ensemble_average: trajectory " +
                               std::to_string(t) + " failed: " + failures[t]);
    }
  }

  SmeEnsembleResult r;
  r.ensemble_size = ensemble;
  r.mean = RealMatrix::Zero(drive.size(), n_ch);
  for (int t = 0; t < ensemble; ++t) r.mean += slots[t];
  r.mean /= ensemble;
  r.stderr_ = RealMatrix::Zero(drive.size(), n_ch);
  if (ensemble > 1) {
    for (int t = 0; t < ensemble; ++t) {
      r.stderr_ += (slots[t] - r.mean).cwiseAbs2();
    }
    r.stderr_ =
        (r.stderr_ / ((ensemble - 1.0) * ensemble)).cwiseSqrt();
  }
  return r;
}

/// Writes one trajectory's per-step records as plain delimited text with
/// columns (t, one record per channel).
inline void write_trajectory_records(const std::string& path,
                                     const RealMatrix& records, double dt,
                                     const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_trajectory_records: cannot open " + path);
  }
  out.precision(17);
  out << "t";
  for (const auto& n : names) out << '\t' << n;
  out << '\n';
  for (long i = 0; i < records.rows(); ++i) {
    out << (i + 1) * dt;
    for (long c = 0; c < records.cols(); ++c) out << '\t' << records(i, c);
    out << '\n';
  }
}

}  // namespace qrc
