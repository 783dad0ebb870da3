#pragma once

#include <map>
#include <string>
#include <vector>

#include "ccsim/domain.hpp"
#include "ccsim/random.hpp"
#include "ccsim/time.hpp"

namespace ccsim {

/// A batch larger than the largest profiled size was requested.
class OomBoundaryError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Load/unload duration distribution of one model in one execution mode.
struct LoadProfile {
  std::string model;
  ExecMode mode = ExecMode::NoCC;
  TimeSpan load_mean;
  TimeSpan load_std;
  TimeSpan unload_mean;
  TimeSpan unload_std;
};

struct CurvePoint {
  int batch_size = 0;
  TimeSpan processing_time;
};

/// Profiled batch-size -> processing-time curve. The largest profiled size is
/// the out-of-memory boundary.
struct BatchCurve {
  std::string model;
  std::vector<CurvePoint> points;

  int max_batch() const { return points.empty() ? 0 : points.back().batch_size; }
  /// Throws SchemaError describing the first broken invariant.
  void validate() const;
};

/// Profiled size with the highest size/time; ties go to the smaller size.
int obs(const BatchCurve& curve);

/// Exact at profiled sizes, piecewise-linear in between (rounded to the microsecond).
TimeSpan processing_time(const BatchCurve& curve, int size);

/// Normal(mean, std) truncated below at mean/10; std == 0 yields the mean exactly.
TimeSpan sample_truncated_normal(TimeSpan mean, TimeSpan stddev, Rng& rng);
inline TimeSpan sample_load(const LoadProfile& p, Rng& rng) {
  return sample_truncated_normal(p.load_mean, p.load_std, rng);
}
inline TimeSpan sample_unload(const LoadProfile& p, Rng& rng) {
  return sample_truncated_normal(p.unload_mean, p.unload_std, rng);
}

struct ModelProfile {
  ModelId id;
  LoadProfile cc;
  LoadProfile nocc;
  BatchCurve curve;
  int obs = 1;

  const LoadProfile& load(ExecMode mode) const { return mode == ExecMode::CC ? cc : nocc; }
};

/// Immutable calibration data for every model of a run.
class CostModel {
 public:
  CostModel() = default;
  CostModel(std::vector<ModelProfile> models, int token_len);

  bool contains(const std::string& model) const { return index_.contains(model); }
  /// Throws ConfigError for an unknown model.
  const ModelProfile& at(const std::string& model) const;
  const std::vector<ModelProfile>& models() const { return models_; }
  std::vector<std::string> model_names() const;
  int token_len() const { return token_len_; }

 private:
  std::vector<ModelProfile> models_;
  std::map<std::string, std::size_t> index_;
  int token_len_ = 50;
};

CostModel parse_cost_model(const std::string& json_text);
/// Throws ConfigError when the file cannot be read, SchemaError when it is invalid.
CostModel load_cost_model(const std::string& path);

}  // namespace ccsim
