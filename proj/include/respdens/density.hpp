#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "respdens/kernel.hpp"
#include "respdens/scenario.hpp"
#include "respdens/smoother.hpp"

namespace respdens {

enum class DensityMethod
{
  BaselineKde,
  ResidualKde,
  SurrogateKde,
  VonMisesDirect,
  ConvolutionFft,
  OracleVonMises,
  EfficientCorrected,
};

std::string to_string(DensityMethod m);

//! Grid-sampled density curve. Values may be negative; nothing is clamped
//! unless asked for.
class DensityEstimate
{
public:
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
  DensityMethod method = DensityMethod::BaselineKde;
  std::size_t n = 0;
  Json metadata = Json::object();
  //! Re-evaluates the defining formula at an arbitrary point.
  std::function<double(double)> exact;

  //! Piecewise cubic (four-point Lagrange) interpolation, zero outside the
  //! grid.
  double operator()(double y) const;
  double evaluate_exact(double y) const;
  bool has_exact() const { return static_cast<bool>(exact); }
  //! Trapezoid rule over the grid.
  double integral() const;
  double max_value() const;

  void write_csv(const std::string& path) const;
  Json to_json() const;
};

//! max |a - b| over a common grid.
double sup_distance(std::span<const double> a, std::span<const double> b);

//! (1/n) sum k_b(x - p_j) on the grid.
DensityEstimate kde(std::span<const double> points, double b, const Kernel& k,
                    std::span<const double> grid, DensityMethod tag = DensityMethod::BaselineKde);

//! (1/n^2) sum_i sum_j K_b(y - e_i - s_j), the double sum evaluated exactly.
DensityEstimate von_mises_direct(std::span<const double> residuals,
                                 std::span<const double> surrogates, const Kernel& K, double b,
                                 std::span<const double> grid);

struct FftRange
{
  double lo;
  double hi;
};

inline constexpr std::size_t kDefaultFftSize = 8192;

//! Smallest output range that holds the full support of the estimate,
//! with a one percent margin.
FftRange default_fft_range(std::span<const double> residuals, std::span<const double> surrogates,
                           const Kernel& k, double b);

//! Binned fast path: residuals and surrogates are linearly binned on a
//! lattice of spacing (range.hi - range.lo) / (G - 1), smoothed with k_b,
//! convolved by FFT and resampled onto `grid` by cubic interpolation.
//! The exact evaluator of the result is the direct double sum with K.
DensityEstimate convolution_fft(std::span<const double> residuals,
                                std::span<const double> surrogates, const Kernel& k, double b,
                                std::span<const double> grid,
                                std::size_t grid_size = kDefaultFftSize,
                                std::optional<FftRange> range = std::nullopt);

enum class EstimatorPath
{
  Direct,
  Fft,
};

std::string to_string(EstimatorPath p);
EstimatorPath estimator_path_from_string(const std::string& s);

//! k and K = k * k, built once.
struct KernelPair
{
  Kernel k;
  Kernel K;

  static KernelPair third_order();
  explicit KernelPair(Kernel base);
};

//! Same double sum on the true errors and true r(X_j). Requires hidden truth.
DensityEstimate oracle_von_mises(const Dataset& data, const KernelPair& kernels, double b,
                                 std::span<const double> grid,
                                 EstimatorPath path = EstimatorPath::Direct,
                                 std::size_t grid_size = kDefaultFftSize);

//! Dispatch on the path; the direct path uses K, the fast path k.
DensityEstimate convolution_estimate(std::span<const double> residuals,
                                     std::span<const double> surrogates,
                                     const KernelPair& kernels, double b,
                                     std::span<const double> grid, EstimatorPath path,
                                     std::size_t grid_size = kDefaultFftSize);

//! [lo - 3 b, hi + 3 b] with `points` equispaced nodes.
std::vector<double> padded_grid(double lo, double hi, double b, std::size_t points = 1024);

//! Clamp at zero and renormalize to unit trapezoid mass.
DensityEstimate clamp_and_renormalize(const DensityEstimate& e);

struct PipelineConfig
{
  KernelPair kernels = KernelPair::third_order();
  BandwidthSchedule convolution{BandwidthRule::Convolution, 1.0, std::nullopt};
  BandwidthSchedule smoother{BandwidthRule::Smoother, 1.0, std::nullopt};
  WeightFunction weight;
  EstimatorPath path = EstimatorPath::Fft;
  std::size_t fft_size = kDefaultFftSize;
  std::size_t grid_points = 1024;
  //! Output grid of h-hat; defaults to padded_grid around the data.
  std::optional<std::vector<double>> grid;
  bool clamp = false;

  Json to_json() const;
};

struct PipelineResult
{
  SmootherFit smoother;
  DensityEstimate f_hat;
  DensityEstimate q_hat;
  DensityEstimate h_hat;
  Json provenance;
};

//! Smoother, residuals and surrogates, then f-hat, q-hat and h-hat.
PipelineResult estimate_pipeline(const Dataset& data, const PipelineConfig& config);

} // namespace respdens
