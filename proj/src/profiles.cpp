#include "ccsim/profiles.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ccsim {

using nlohmann::json;

void BatchCurve::validate() const {
  const std::string where = "model '" + model + "' curve";
  if (points.empty()) throw SchemaError(where + ": no points");
  if (points.front().batch_size != 1) throw SchemaError(where + ": must contain batch_size 1");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (p.batch_size < 1) throw SchemaError(at + ": batch_size must be positive");
    if (p.processing_time <= TimeSpan{}) throw SchemaError(at + ": processing time must be positive");
    if (i > 0) {
      if (p.batch_size <= points[i - 1].batch_size) {
        throw SchemaError(at + ": batch sizes must be strictly increasing");
      }
      if (p.processing_time <= points[i - 1].processing_time) {
        throw SchemaError(at + ": processing time must be strictly increasing in batch size");
      }
    }
  }
}

int obs(const BatchCurve& curve) {
  // Compare size_a/time_a against size_b/time_b by cross-multiplying so ties are exact.
  const CurvePoint* best = &curve.points.front();
  for (const auto& p : curve.points) {
    const auto lhs = static_cast<__int128>(p.batch_size) * best->processing_time.count();
    const auto rhs = static_cast<__int128>(best->batch_size) * p.processing_time.count();
    if (lhs > rhs) best = &p;
  }
  return best->batch_size;
}

TimeSpan processing_time(const BatchCurve& curve, int size) {
  if (size < 1) throw ParameterError("batch size must be >= 1, got " + std::to_string(size));
  if (size > curve.max_batch()) {
    throw OomBoundaryError("batch size " + std::to_string(size) + " exceeds profiled maximum " +
                           std::to_string(curve.max_batch()) + " for model '" + curve.model + "'");
  }
  const auto& pts = curve.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].batch_size == size) return pts[i].processing_time;
    if (pts[i].batch_size > size) {
      const auto& lo = pts[i - 1];
      const auto& hi = pts[i];
      const std::int64_t span = hi.batch_size - lo.batch_size;
      const std::int64_t rise = (hi.processing_time - lo.processing_time).count();
      const std::int64_t offset = size - lo.batch_size;
      return lo.processing_time + TimeSpan::micros((rise * offset + span / 2) / span);
    }
  }
  return pts.back().processing_time;
}

TimeSpan sample_truncated_normal(TimeSpan mean, TimeSpan stddev, Rng& rng) {
  if (stddev.is_zero()) return mean;
  const double mu = static_cast<double>(mean.count());
  const double sigma = static_cast<double>(stddev.count());
  const double floor_us = mu / 10.0;
  double draw = floor_us;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double x = rng.normal(mu, sigma);
    if (x >= floor_us) {
      draw = x;
      break;
    }
  }
  return TimeSpan::micros(std::max<std::int64_t>(1, std::llround(draw)));
}

CostModel::CostModel(std::vector<ModelProfile> models, int token_len)
    : models_(std::move(models)), token_len_(token_len) {
  for (std::size_t i = 0; i < models_.size(); ++i) {
    auto& m = models_[i];
    if (!index_.emplace(m.id.name, i).second) {
      throw SchemaError("duplicate model name '" + m.id.name + "'");
    }
    m.curve.model = m.id.name;
    m.curve.validate();
    m.obs = ccsim::obs(m.curve);
  }
}

const ModelProfile& CostModel::at(const std::string& model) const {
  auto it = index_.find(model);
  if (it == index_.end()) throw ConfigError("model '" + model + "' is not in the cost model");
  return models_[it->second];
}

std::vector<std::string> CostModel::model_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : index_) names.push_back(name);
  return names;
}

namespace {

double number_at(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw SchemaError(path + "." + key + ": missing");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw SchemaError(path + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(path + "." + key + ": not finite");
  return d;
}

TimeSpan seconds_at(const json& obj, const std::string& key, const std::string& path, bool positive) {
  const double s = number_at(obj, key, path);
  if (positive ? s <= 0.0 : s < 0.0) {
    throw SchemaError(path + "." + key + (positive ? ": must be positive" : ": must not be negative"));
  }
  return TimeSpan::seconds(s);
}

LoadProfile parse_load_profile(const json& obj, const std::string& model, ExecMode mode,
                               const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path + ": expected an object");
  return LoadProfile{
      .model = model,
      .mode = mode,
      .load_mean = seconds_at(obj, "load_mean_s", path, true),
      .load_std = seconds_at(obj, "load_std_s", path, false),
      .unload_mean = seconds_at(obj, "unload_mean_s", path, true),
      .unload_std = seconds_at(obj, "unload_std_s", path, false),
  };
}

}  // namespace

CostModel parse_cost_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("cost model is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("models") || !doc["models"].is_array()) {
    throw SchemaError("models: missing top-level array");
  }
  int token_len = 50;
  if (doc.contains("token_len")) {
    if (!doc["token_len"].is_number_integer() || doc["token_len"].get<int>() <= 0) {
      throw SchemaError("token_len: expected a positive integer");
    }
    token_len = doc["token_len"].get<int>();
  }

  std::vector<ModelProfile> models;
  const auto& entries = doc["models"];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    std::string path = "models[" + std::to_string(i) + "]";
    if (!e.is_object()) throw SchemaError(path + ": expected an object");
    if (!e.contains("name") || !e["name"].is_string() || e["name"].get<std::string>().empty()) {
      throw SchemaError(path + ".name: missing");
    }
    ModelProfile m;
    m.id.name = e["name"].get<std::string>();
    path += " ('" + m.id.name + "')";
    m.id.size_gb = e.contains("size_gb") ? number_at(e, "size_gb", path) : 0.0;

    for (auto [key, mode] : {std::pair{"cc", ExecMode::CC}, std::pair{"nocc", ExecMode::NoCC}}) {
      if (!e.contains(key)) {
        throw SchemaError(path + "." + key + ": model '" + m.id.name + "' has no " +
                          std::string(to_string(mode)) + " profile");
      }
      (mode == ExecMode::CC ? m.cc : m.nocc) =
          parse_load_profile(e[key], m.id.name, mode, path + "." + key);
    }

    if (!e.contains("curve") || !e["curve"].is_array()) throw SchemaError(path + ".curve: missing");
    m.curve.model = m.id.name;
    const auto& curve = e["curve"];
    for (std::size_t j = 0; j < curve.size(); ++j) {
      const std::string at = path + ".curve[" + std::to_string(j) + "]";
      const auto& pt = curve[j];
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number_integer() || !pt[1].is_number()) {
        throw SchemaError(at + ": expected [batch_size, processing_s]");
      }
      m.curve.points.push_back({pt[0].get<int>(), TimeSpan::seconds(pt[1].get<double>())});
    }
    try {
      m.curve.validate();
    } catch (const SchemaError& err) {
      throw SchemaError(path + ".curve: " + err.what());
    }
    models.push_back(std::move(m));
  }
  if (models.empty()) throw SchemaError("models: at least one model is required");
  return CostModel(std::move(models), token_len);
}

CostModel load_cost_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read cost model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_cost_model(buf.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

}  // namespace ccsim
