#include "qfp/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <fftw3.h>

#include "qfp/error.hpp"
#include "spectrum.hpp"

namespace qfp {

namespace {

// FFTW planning is not thread-safe but executing an existing plan is, so
// plans and the trigonometric tables are built once per sample count under a
// lock and shared afterwards.
struct SampleGrid {
  int samples = 0;
  fftw_plan plan = nullptr;
  std::vector<double> cos_table;
  std::vector<double> sin_table;

  explicit SampleGrid(int n) : samples(n), cos_table(static_cast<std::size_t>(n)), sin_table(static_cast<std::size_t>(n)) {
    for (int j = 0; j < n; ++j) {
      const double theta = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
      cos_table[static_cast<std::size_t>(j)] = std::cos(theta);
      sin_table[static_cast<std::size_t>(j)] = std::sin(theta);
    }
    std::vector<cplx> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~SampleGrid() {
    if (plan != nullptr) fftw_destroy_plan(plan);
  }
  SampleGrid(const SampleGrid&) = delete;
  SampleGrid& operator=(const SampleGrid&) = delete;
};

const SampleGrid& sample_grid(int samples) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<SampleGrid>> grids;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = grids[samples];
  if (!slot) slot = std::make_unique<SampleGrid>(samples);
  return *slot;
}

void check_samples(int samples) {
  if (samples < 16) throw ValidationError("sample count must be at least 16, got " + std::to_string(samples));
}

}  // namespace

double wrap_phase(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double shortest_arc(double radians) {
  double r = wrap_phase(radians);
  if (r > std::numbers::pi) r -= kTwoPi;
  return r;
}

RfDrive::RfDrive(std::vector<Harmonic> harmonics) : harmonics_(std::move(harmonics)) {
  for (std::size_t i = 0; i < harmonics_.size(); ++i) {
    auto& h = harmonics_[i];
    if (!std::isfinite(h.amplitude) || h.amplitude < 0.0) {
      throw ValidationError("harmonic " + std::to_string(i + 1) + ": amplitude must be finite and non-negative");
    }
    if (!std::isfinite(h.phase)) {
      throw ValidationError("harmonic " + std::to_string(i + 1) + ": phase must be finite");
    }
    h.phase = wrap_phase(h.phase);
  }
}

double RfDrive::waveform(double t) const {
  double a = 0.0;
  for (int p = 1; p <= cutoff(); ++p) {
    const auto& h = harmonics_[static_cast<std::size_t>(p - 1)];
    a += h.amplitude * std::cos(kTwoPi * p * t + h.phase);
  }
  return a;
}

RfDrive time_reverse(const RfDrive& drive) {
  std::vector<Harmonic> reversed(drive.harmonics().begin(), drive.harmonics().end());
  for (auto& h : reversed) h.phase = wrap_phase(kTwoPi - h.phase);
  return RfDrive(std::move(reversed));
}

ModeLattice ModeLattice::centered(int comp_dim, int total_modes) {
  ModeLattice lattice{total_modes, comp_dim, (total_modes - comp_dim) / 2};
  lattice.validate();
  return lattice;
}

void ModeLattice::validate() const {
  if (comp_dim < 1) throw ValidationError("computational dimension must be >= 1");
  if (total_modes < comp_dim) throw ValidationError("lattice must hold at least d modes");
  if (comp_offset < 0 || comp_offset > total_modes - comp_dim) {
    throw ValidationError("computational band does not fit inside the lattice");
  }
}

ShaperConfig ShaperConfig::centered(std::vector<double> phases, const ModeLattice& lattice) {
  const int channels = static_cast<int>(phases.size());
  ShaperConfig shaper{std::move(phases), lattice.comp_offset - (channels - lattice.comp_dim) / 2};
  return shaper;
}

ShaperConfig ShaperConfig::flat(int channels, const ModeLattice& lattice) {
  if (channels < 0) throw ValidationError("channel count must be non-negative");
  return centered(std::vector<double>(static_cast<std::size_t>(channels), 0.0), lattice);
}

std::vector<double> ShaperConfig::lattice_phases(int total_modes) const {
  std::vector<double> out(static_cast<std::size_t>(total_modes), 0.0);
  for (int b = 0; b < channels(); ++b) {
    const int k = channel_offset + b;
    if (k >= 0 && k < total_modes) out[static_cast<std::size_t>(k)] = phases[static_cast<std::size_t>(b)];
  }
  return out;
}

void QfpConfig::validate() const {
  lattice.validate();
  const int b = shaper.channels();
  if (b < lattice.comp_dim || b > lattice.total_modes) {
    throw ValidationError("shaped channel count B=" + std::to_string(b) + " must satisfy d <= B <= M");
  }
  if (shaper.channel_offset < 0 || shaper.channel_offset + b > lattice.total_modes) {
    throw ValidationError("shaped band does not fit inside the lattice");
  }
  if (lattice.comp_offset < shaper.channel_offset ||
      lattice.comp_offset + lattice.comp_dim > shaper.channel_offset + b) {
    throw ValidationError("computational band must lie inside the shaped band");
  }
  for (double phi : shaper.phases) {
    if (!std::isfinite(phi)) throw ValidationError("shaper phases must be finite");
  }
}

FourierCoefficients::FourierCoefficients(int half_width, std::vector<cplx> values)
    : half_width_(half_width), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(2 * half_width_ + 1)) {
    throw ValidationError("coefficient list length does not match half width");
  }
}

double FourierCoefficients::mass() const {
  double m = 0.0;
  for (const auto& c : values_) m += std::norm(c);
  return m;
}

void detail::drive_spectrum(const RfDrive& drive, int samples, double alias_tol, std::vector<cplx>& out) {
  check_samples(samples);
  const auto& grid = sample_grid(samples);
  const auto n = static_cast<std::size_t>(samples);
  out.resize(n);

  thread_local std::vector<cplx> field;
  thread_local std::vector<double> phase;
  field.resize(n);
  phase.assign(n, 0.0);

  // A(t_j) = sum_p A_p [cos(p theta_j) cos(g_p) - sin(p theta_j) sin(g_p)],
  // with theta_j = 2 pi j / N taken from the shared tables.
  for (int p = 1; p <= drive.cutoff(); ++p) {
    const auto& h = drive.harmonic(p);
    if (h.amplitude == 0.0) continue;
    const double ac = h.amplitude * std::cos(h.phase);
    const double as = h.amplitude * std::sin(h.phase);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      phase[j] += ac * grid.cos_table[idx] - as * grid.sin_table[idx];
      idx += static_cast<std::size_t>(p);
      if (idx >= n) idx -= n;
    }
  }
  for (std::size_t j = 0; j < n; ++j) field[j] = cplx(std::cos(phase[j]), std::sin(phase[j]));

  // Backward transform: out_n = sum_j f_j exp(+2 pi i n j / N), so that
  // c_n = out_n / N is the mean of exp(i A(t) + i n dw t) over one period.
  fftw_execute_dft(grid.plan, reinterpret_cast<fftw_complex*>(field.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(samples);
  for (auto& c : out) c *= scale;

  double alias_mass = 0.0;
  for (std::size_t j = n / 4 + 1; j < n - n / 4; ++j) alias_mass += std::norm(out[j]);
  if (alias_mass > alias_tol) {
    throw TruncationError("drive bandwidth too large for " + std::to_string(samples) +
                              " samples per period (aliasing residual " + std::to_string(alias_mass) + ")",
                          alias_mass);
  }
}

FourierCoefficients eom_coefficients(const RfDrive& drive, int half_width, const CoefficientOptions& options) {
  if (half_width < 1) throw ValidationError("half_width must be >= 1");
  check_samples(options.samples);
  if (half_width > options.samples / 4) {
    throw ValidationError("half_width " + std::to_string(half_width) + " exceeds a quarter of the sample count");
  }
  std::vector<cplx> spectrum;
  detail::drive_spectrum(drive, options.samples, options.truncation_tol, spectrum);

  std::vector<cplx> window(static_cast<std::size_t>(2 * half_width + 1));
  double kept = 0.0;
  for (int k = -half_width; k <= half_width; ++k) {
    const cplx c = detail::spectrum_at(spectrum, k);
    window[static_cast<std::size_t>(k + half_width)] = c;
    kept += std::norm(c);
  }
  double total = 0.0;
  for (const auto& c : spectrum) total += std::norm(c);
  const double residual = std::max(0.0, total - kept);
  if (residual > options.truncation_tol) {
    throw TruncationError("half_width " + std::to_string(half_width) + " drops spectral mass " +
                              std::to_string(residual),
                          residual);
  }
  return FourierCoefficients(half_width, std::move(window));
}

int minimal_half_width(const RfDrive& drive, double tol, int cap, const CoefficientOptions& options) {
  if (cap < 1) throw ValidationError("half-width cap must be >= 1");
  std::vector<cplx> spectrum;
  detail::drive_spectrum(drive, options.samples, options.truncation_tol, spectrum);
  double total = 0.0;
  for (const auto& c : spectrum) total += std::norm(c);
  double kept = std::norm(spectrum[0]);
  for (int hw = 1; hw < cap; ++hw) {
    kept += std::norm(detail::spectrum_at(spectrum, hw)) + std::norm(detail::spectrum_at(spectrum, -hw));
    if (total - kept < tol) return hw;
  }
  return cap;
}

Matrix dft_matrix(int d) {
  if (d < 1) throw ValidationError("DFT dimension must be >= 1");
  Matrix f(d, d);
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      // Reduce m*n mod d first so the angle is exact for the symmetric cases.
      const int e = (m * n) % d;
      const double angle = -kTwoPi * static_cast<double>(e) / static_cast<double>(d);
      f(m, n) = std::polar(norm, angle);
    }
  }
  return f;
}

namespace {

struct TransferInputs {
  std::vector<cplx> first;    // spectrum of drive_a
  std::vector<cplx> second;   // spectrum of drive_b
  std::vector<cplx> shaper;   // exp(i phi_k) per lattice mode
};

void prepare_inputs(const QfpConfig& config, const CoefficientOptions& options, TransferInputs& in) {
  config.validate();
  check_samples(options.samples);
  if (config.lattice.total_modes - 1 > options.samples / 4) {
    throw ValidationError("sample count too small for the lattice size");
  }
  detail::drive_spectrum(config.drive_a, options.samples, options.truncation_tol, in.first);
  detail::drive_spectrum(config.drive_b, options.samples, options.truncation_tol, in.second);
  const auto phases = config.shaper.lattice_phases(config.lattice.total_modes);
  in.shaper.resize(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k) in.shaper[k] = std::polar(1.0, phases[k]);
}

cplx transfer_element(const TransferInputs& in, int total_modes, int out_mode, int in_mode) {
  cplx acc{};
  for (int k = 0; k < total_modes; ++k) {
    acc += detail::spectrum_at(in.second, out_mode - k) * in.shaper[static_cast<std::size_t>(k)] *
           detail::spectrum_at(in.first, k - in_mode);
  }
  return acc;
}

}  // namespace

Matrix assemble_transfer(const QfpConfig& config, const CoefficientOptions& options) {
  thread_local TransferInputs in;
  prepare_inputs(config, options, in);
  const int d = config.lattice.comp_dim;
  const int off = config.lattice.comp_offset;
  Matrix w(d, d);
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) w(m, n) = transfer_element(in, config.lattice.total_modes, off + m, off + n);
  }
  return w;
}

Matrix assemble_full_transfer(const QfpConfig& config, const CoefficientOptions& options) {
  TransferInputs in;
  prepare_inputs(config, options, in);
  const int total = config.lattice.total_modes;
  Matrix w(total, total);
  for (int m = 0; m < total; ++m) {
    for (int n = 0; n < total; ++n) w(m, n) = transfer_element(in, total, m, n);
  }
  return w;
}

Matrix computational_block(const Matrix& full, const ModeLattice& lattice) {
  lattice.validate();
  if (full.rows() != lattice.total_modes || full.cols() != lattice.total_modes) {
    throw ValidationError("full transfer matrix does not match the lattice size");
  }
  return full.block(lattice.comp_offset, lattice.comp_offset, lattice.comp_dim, lattice.comp_dim);
}

double cost(double fidelity, double success_prob, double clamp) {
  const double f = std::min(fidelity, 1.0 - clamp);
  return success_prob * std::log10(1.0 - f);
}

GateMetrics gate_metrics(const Matrix& w, const Matrix& target, double clamp) {
  if (w.rows() != w.cols() || target.rows() != target.cols() || w.rows() != target.rows() || w.rows() == 0) {
    throw ValidationError("gate_metrics: W and target must be square with matching dimensions");
  }
  const auto d = static_cast<double>(w.rows());
  const Matrix gram = target.adjoint() * target;
  const double deviation = (gram - Matrix::Identity(target.rows(), target.cols())).cwiseAbs().maxCoeff();
  if (deviation > 1e-9) throw ValidationError("gate_metrics: target is not unitary");

  const double success = w.squaredNorm() / d;
  if (!(success > 0.0)) throw NumericalError("gate_metrics: transfer matrix is identically zero");
  const cplx overlap = (w.adjoint() * target).trace();
  const double fidelity = std::clamp(std::norm(overlap) / (d * d * success), 0.0, 1.0);
  return {fidelity, success, cost(fidelity, success, clamp)};
}

}  // namespace qfp
