#pragma once

#include <initializer_list>
#include <optional>
#include <string>

#include "json.hpp"
#include "voxsc/camera.hpp"
#include "voxsc/consistency.hpp"
#include "voxsc/errors.hpp"
#include "voxsc/losses.hpp"
#include "voxsc/optim.hpp"

namespace voxsc {

/// Full run configuration. Every field defaults to the values the engine is
/// calibrated around: 64 depth samples on (0, 1], loss weights
/// (5, 0.125, 0.5, 0.5, 1, 0.02), positive weight 3, 48x48 masks, 32^3 grids.
struct RunConfig {
  std::optional<Intrinsics> intrinsics;  // absent: derived from image dims
  SamplingConfig sampling;
  ConsistencyWeights consistency;
  LossWeights loss_weights;
  OptimConfig optimizer;
  int mask_height = 48;
  int mask_width = 48;
  int grid_dim = 32;
  IouUnion iou_mode = IouUnion::standard;

  /// Intrinsics to use for a given image size: the configured ones if
  /// present, else focal length = width with a centered principal point.
  Intrinsics intrinsics_for(int width, int height) const {
    return intrinsics ? *intrinsics : Intrinsics::for_image(width, height);
  }
};

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& scope) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError("config: unknown key: " + scope + key);
  }
}

inline double get_num(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ValidationError(std::string("config: ") + key + " must be a number");
  return j.at(key).get<double>();
}

inline int get_int(const nlohmann::json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ValidationError(std::string("config: ") + key + " must be an integer");
  return j.at(key).get<int>();
}

}  // namespace detail

inline RunConfig read_run_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  detail::require_keys(j,
                       {"intrinsics", "sampling", "alpha1", "alpha2", "alpha3", "alpha4",
                        "alpha5", "alpha6", "alpha_p", "iou_denominator", "mask_height",
                        "mask_width", "grid_dim", "optimizer"},
                       "");

  RunConfig cfg;

  if (j.contains("intrinsics") && !j.at("intrinsics").is_null()) {
    const auto& ji = j.at("intrinsics");
    detail::require_keys(ji, {"f_u", "f_v", "u_0", "v_0"}, "intrinsics.");
    for (const char* key : {"f_u", "f_v", "u_0", "v_0"})
      if (!ji.contains(key))
        throw ValidationError(std::string("config: intrinsics.") + key + " is required");
    Intrinsics k;
    k.f_u = detail::get_num(ji, "f_u", 0.0);
    k.f_v = detail::get_num(ji, "f_v", 0.0);
    k.u_0 = detail::get_num(ji, "u_0", 0.0);
    k.v_0 = detail::get_num(ji, "v_0", 0.0);
    if (k.f_u <= 0.0) throw ValidationError("config: intrinsics.f_u must be > 0");
    if (k.f_v <= 0.0) throw ValidationError("config: intrinsics.f_v must be > 0");
    cfg.intrinsics = k;
  }

  if (j.contains("sampling")) {
    const auto& js = j.at("sampling");
    detail::require_keys(js, {"n_samples", "depth_min", "depth_max"}, "sampling.");
    cfg.sampling.n_samples = detail::get_int(js, "n_samples", cfg.sampling.n_samples);
    cfg.sampling.depth_min = detail::get_num(js, "depth_min", cfg.sampling.depth_min);
    cfg.sampling.depth_max = detail::get_num(js, "depth_max", cfg.sampling.depth_max);
    if (cfg.sampling.n_samples < 1) throw ValidationError("config: sampling.n_samples must be >= 1");
    if (!(cfg.sampling.depth_min >= 0.0 && cfg.sampling.depth_min < cfg.sampling.depth_max))
      throw ValidationError("config: sampling depth range requires 0 <= depth_min < depth_max");
  }

  cfg.consistency.alpha1 = detail::get_num(j, "alpha1", cfg.consistency.alpha1);
  cfg.consistency.alpha2 = detail::get_num(j, "alpha2", cfg.consistency.alpha2);
  if (cfg.consistency.alpha1 < 0.0) throw ValidationError("config: alpha1 must be >= 0");
  if (cfg.consistency.alpha2 < 0.0) throw ValidationError("config: alpha2 must be >= 0");

  cfg.loss_weights.alpha3 = detail::get_num(j, "alpha3", cfg.loss_weights.alpha3);
  cfg.loss_weights.alpha4 = detail::get_num(j, "alpha4", cfg.loss_weights.alpha4);
  cfg.loss_weights.alpha5 = detail::get_num(j, "alpha5", cfg.loss_weights.alpha5);
  cfg.loss_weights.alpha6 = detail::get_num(j, "alpha6", cfg.loss_weights.alpha6);
  cfg.loss_weights.alpha_p = detail::get_num(j, "alpha_p", cfg.loss_weights.alpha_p);
  if (cfg.loss_weights.alpha3 < 0.0) throw ValidationError("config: alpha3 must be >= 0");
  if (cfg.loss_weights.alpha4 < 0.0) throw ValidationError("config: alpha4 must be >= 0");
  if (cfg.loss_weights.alpha5 < 0.0) throw ValidationError("config: alpha5 must be >= 0");
  if (cfg.loss_weights.alpha6 < 0.0) throw ValidationError("config: alpha6 must be >= 0");
  if (cfg.loss_weights.alpha_p < 1.0) throw ValidationError("config: alpha_p must be >= 1");

  if (j.contains("iou_denominator")) {
    const std::string mode = j.at("iou_denominator").get<std::string>();
    if (mode == "standard")
      cfg.iou_mode = IouUnion::standard;
    else if (mode == "verbatim")
      cfg.iou_mode = IouUnion::verbatim;
    else
      throw ValidationError("config: iou_denominator must be standard or verbatim");
  }

  cfg.mask_height = detail::get_int(j, "mask_height", cfg.mask_height);
  cfg.mask_width = detail::get_int(j, "mask_width", cfg.mask_width);
  cfg.grid_dim = detail::get_int(j, "grid_dim", cfg.grid_dim);
  if (cfg.mask_height < 1) throw ValidationError("config: mask_height must be >= 1");
  if (cfg.mask_width < 1) throw ValidationError("config: mask_width must be >= 1");
  if (cfg.grid_dim < 1) throw ValidationError("config: grid_dim must be >= 1");

  if (j.contains("optimizer")) {
    const auto& jo = j.at("optimizer");
    detail::require_keys(jo, {"step_size", "beta1", "beta2", "eps", "max_iters", "tol", "seed"},
                         "optimizer.");
    cfg.optimizer.step_size = detail::get_num(jo, "step_size", cfg.optimizer.step_size);
    cfg.optimizer.beta1 = detail::get_num(jo, "beta1", cfg.optimizer.beta1);
    cfg.optimizer.beta2 = detail::get_num(jo, "beta2", cfg.optimizer.beta2);
    cfg.optimizer.eps = detail::get_num(jo, "eps", cfg.optimizer.eps);
    cfg.optimizer.max_iters = detail::get_int(jo, "max_iters", cfg.optimizer.max_iters);
    cfg.optimizer.tol = detail::get_num(jo, "tol", cfg.optimizer.tol);
    if (jo.contains("seed")) cfg.optimizer.seed = jo.at("seed").get<std::uint64_t>();
    if (cfg.optimizer.step_size <= 0.0)
      throw ValidationError("config: optimizer.step_size must be > 0");
    if (cfg.optimizer.beta1 < 0.0 || cfg.optimizer.beta1 >= 1.0)
      throw ValidationError("config: optimizer.beta1 must be in [0, 1)");
    if (cfg.optimizer.beta2 < 0.0 || cfg.optimizer.beta2 >= 1.0)
      throw ValidationError("config: optimizer.beta2 must be in [0, 1)");
    if (cfg.optimizer.eps <= 0.0) throw ValidationError("config: optimizer.eps must be > 0");
    if (cfg.optimizer.max_iters < 1)
      throw ValidationError("config: optimizer.max_iters must be >= 1");
    if (cfg.optimizer.tol < 0.0) throw ValidationError("config: optimizer.tol must be >= 0");
  }

  return cfg;
}

/// Fully resolved configuration (defaults filled in), as emitted by `info`.
inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  const Intrinsics k = cfg.intrinsics_for(cfg.mask_width, cfg.mask_height);
  return {
      {"intrinsics", {{"f_u", k.f_u}, {"f_v", k.f_v}, {"u_0", k.u_0}, {"v_0", k.v_0}}},
      {"sampling",
       {{"n_samples", cfg.sampling.n_samples},
        {"depth_min", cfg.sampling.depth_min},
        {"depth_max", cfg.sampling.depth_max}}},
      {"alpha1", cfg.consistency.alpha1},
      {"alpha2", cfg.consistency.alpha2},
      {"alpha3", cfg.loss_weights.alpha3},
      {"alpha4", cfg.loss_weights.alpha4},
      {"alpha5", cfg.loss_weights.alpha5},
      {"alpha6", cfg.loss_weights.alpha6},
      {"alpha_p", cfg.loss_weights.alpha_p},
      {"iou_denominator", cfg.iou_mode == IouUnion::standard ? "standard" : "verbatim"},
      {"mask_height", cfg.mask_height},
      {"mask_width", cfg.mask_width},
      {"grid_dim", cfg.grid_dim},
      {"optimizer",
       {{"step_size", cfg.optimizer.step_size},
        {"beta1", cfg.optimizer.beta1},
        {"beta2", cfg.optimizer.beta2},
        {"eps", cfg.optimizer.eps},
        {"max_iters", cfg.optimizer.max_iters},
        {"tol", cfg.optimizer.tol},
        {"seed", cfg.optimizer.seed}}},
  };
}

}  // namespace voxsc
