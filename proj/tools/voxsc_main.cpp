// voxsc: silhouette-consistency engine CLI.
//
// Subcommands: project, loss, estimate-pose, reconstruct, gradcheck, info.
// Diagnostic output is a single JSON object on stdout; logs go to stderr.
// Exit codes: 0 success, 1 validation error, 2 io error, 3 check failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "voxsc/voxsc.hpp"

namespace {

using nlohmann::json;

voxsc::Vec3 parse_vec3_arg(const std::string& text) {
  const auto c1 = text.find(',');
  const auto c2 = c1 == std::string::npos ? std::string::npos : text.find(',', c1 + 1);
  if (c2 == std::string::npos) throw voxsc::ValidationError("expected \"x,y,z\"");
  try {
    return {std::stod(text.substr(0, c1)), std::stod(text.substr(c1 + 1, c2 - c1 - 1)),
            std::stod(text.substr(c2 + 1))};
  } catch (...) {
    throw voxsc::ValidationError("expected \"x,y,z\"");
  }
}

voxsc::CameraPose parse_pose_arg(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw voxsc::ValidationError("pose must be \"azimuth_deg,elevation_deg\"");
  double az_deg = 0.0, el_deg = 0.0;
  try {
    az_deg = std::stod(text.substr(0, comma));
    el_deg = std::stod(text.substr(comma + 1));
  } catch (...) {
    throw voxsc::ValidationError("pose must be \"azimuth_deg,elevation_deg\"");
  }
  if (el_deg < -90.0 || el_deg > 90.0)
    throw voxsc::ValidationError("elevation must be in [-90, 90] degrees");
  voxsc::CameraPose pose;
  pose.azimuth = voxsc::wrap_angle(voxsc::deg_to_rad(az_deg));
  pose.elevation = voxsc::deg_to_rad(el_deg);
  return pose;
}

voxsc::RunConfig load_config(const std::string& path) {
  if (path.empty()) return voxsc::read_run_config("{}");
  return voxsc::read_run_config(voxsc::read_file(path));
}

void write_pose_trace(const std::string& path, const std::vector<voxsc::PoseIterate>& trace) {
  if (path.empty()) return;
  std::string out;
  for (const auto& it : trace) {
    json rec = {{"iter", it.iter},
                {"loss", it.loss},
                {"azimuth_deg", voxsc::rad_to_deg(it.azimuth)},
                {"elevation_deg", voxsc::rad_to_deg(it.elevation)}};
    out += rec.dump();
    out += '\n';
  }
  voxsc::write_file(path, out);
}

void write_loss_trace(const std::string& path, const std::vector<voxsc::LossIterate>& trace) {
  if (path.empty()) return;
  std::string out;
  for (const auto& it : trace) {
    json rec = {{"iter", it.iter}, {"loss", it.loss}};
    out += rec.dump();
    out += '\n';
  }
  voxsc::write_file(path, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxsc: volumetric silhouette-consistency engine"};
  app.require_subcommand(1);
  app.fallthrough();  // --config/--threads may follow the subcommand name

  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0 = hardware)");

  std::string config_path;
  app.add_option("--config", config_path, "run configuration JSON file");

  std::string translation_arg = "0,0,-0.5";
  app.add_option("--translation", translation_arg,
                 "camera translation \"x,y,z\" used with --pose/--init");

  // project
  auto* cmd_project = app.add_subcommand("project", "render a silhouette from a voxel grid");
  std::string pr_voxel, pr_pose, pr_out;
  int pr_width = 0, pr_height = 0;
  cmd_project->add_option("--voxel", pr_voxel, "grid file (.voxf or .binvox)")->required();
  cmd_project->add_option("--pose", pr_pose, "\"azimuth_deg,elevation_deg\"")->required();
  cmd_project->add_option("--out", pr_out, "output mask (.pgm)")->required();
  cmd_project->add_option("--width", pr_width, "mask width (default from config)");
  cmd_project->add_option("--height", pr_height, "mask height (default from config)");

  // loss
  auto* cmd_loss = app.add_subcommand("loss", "evaluate losses for a grid/mask/pose");
  std::string ls_voxel, ls_mask, ls_pose, ls_gt;
  cmd_loss->add_option("--voxel", ls_voxel)->required();
  cmd_loss->add_option("--mask", ls_mask)->required();
  cmd_loss->add_option("--pose", ls_pose)->required();
  cmd_loss->add_option("--gt-voxel", ls_gt, "ground-truth grid for the 3D loss");

  // estimate-pose
  auto* cmd_pose = app.add_subcommand("estimate-pose", "fit azimuth/elevation to a mask");
  std::string ep_voxel, ep_mask, ep_init, ep_trace;
  int ep_restarts = 1;
  cmd_pose->add_option("--voxel", ep_voxel)->required();
  cmd_pose->add_option("--mask", ep_mask)->required();
  cmd_pose->add_option("--init", ep_init, "\"azimuth_deg,elevation_deg\"")->required();
  cmd_pose->add_option("--restarts", ep_restarts, "seeded restarts, best kept");
  cmd_pose->add_option("--trace", ep_trace, "JSON-lines iteration trace file");

  // reconstruct
  auto* cmd_rec = app.add_subcommand("reconstruct", "fit a grid to silhouette views");
  std::string rc_views, rc_out, rc_trace;
  int rc_grid_dim = 0;
  cmd_rec->add_option("--views", rc_views, "view list JSON")->required();
  cmd_rec->add_option("--out", rc_out, "output grid (.voxf)")->required();
  cmd_rec->add_option("--grid-dim", rc_grid_dim, "grid resolution (default from config)");
  cmd_rec->add_option("--trace", rc_trace, "JSON-lines iteration trace file");

  // gradcheck
  auto* cmd_gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  std::uint64_t gc_seed = 0;
  int gc_grid = 8, gc_samples = 16, gc_mask = 16, gc_triples = 8;
  double gc_threshold = 1e-4, gc_corrupt = 0.0;
  cmd_gc->add_option("--seed", gc_seed);
  cmd_gc->add_option("--grid-dim", gc_grid);
  cmd_gc->add_option("--n-samples", gc_samples);
  cmd_gc->add_option("--mask-dim", gc_mask);
  cmd_gc->add_option("--triples", gc_triples);
  cmd_gc->add_option("--threshold", gc_threshold, "fail if max_rel_error exceeds this");
  cmd_gc->add_option("--corrupt-gradients", gc_corrupt, "test hook: bias analytic gradients")
      ->group("");  // hidden

  // info
  app.add_subcommand("info", "print the resolved run configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const voxsc::RunConfig cfg = load_config(config_path);

    if (app.got_subcommand("info")) {
      std::cout << voxsc::run_config_to_json(cfg).dump(2) << "\n";
      return 0;
    }

    const voxsc::Vec3 translation = parse_vec3_arg(translation_arg);

    if (app.got_subcommand(cmd_project)) {
      const voxsc::VoxelGrid grid = voxsc::read_grid_file(pr_voxel);
      voxsc::CameraPose pose = parse_pose_arg(pr_pose);
      pose.translation = translation;
      const int width = pr_width > 0 ? pr_width : cfg.mask_width;
      const int height = pr_height > 0 ? pr_height : cfg.mask_height;
      const voxsc::Intrinsics k = cfg.intrinsics_for(width, height);
      const voxsc::Mask mask =
          voxsc::project(grid, pose, k, height, width, cfg.sampling, threads);
      voxsc::write_file(pr_out, voxsc::write_mask_pgm(mask));
      std::size_t nonzero = 0;
      for (const double v : mask.values) nonzero += v > 0.0;
      std::cout << json{{"coverage", static_cast<double>(nonzero) / mask.values.size()}}.dump()
                << "\n";
      return 0;
    }

    if (app.got_subcommand(cmd_loss)) {
      const voxsc::VoxelGrid grid = voxsc::read_grid_file(ls_voxel);
      const voxsc::Mask mask = voxsc::read_mask_pgm(voxsc::read_file(ls_mask));
      voxsc::CameraPose pose = parse_pose_arg(ls_pose);
      pose.translation = translation;
      const voxsc::Intrinsics k = cfg.intrinsics_for(mask.width, mask.height);

      const double l_ray =
          voxsc::ray_consistency_loss(grid, pose, mask, k, cfg.sampling, threads);
      const voxsc::Mask projection =
          voxsc::project(grid, pose, k, mask.height, mask.width, cfg.sampling, threads);
      const double l_proj = voxsc::projection_loss(projection, mask, cfg.iou_mode);
      const double l_sc = cfg.consistency.alpha1 * l_ray + cfg.consistency.alpha2 * l_proj;
      const double l_2d = voxsc::loss_2d(projection, mask);

      json out = {{"l_ray", l_ray}, {"l_proj", l_proj}, {"l_sc", l_sc},
                  {"l_2d", l_2d},   {"l_kl", nullptr}};
      double total = cfg.loss_weights.alpha4 * l_2d + cfg.loss_weights.alpha5 * l_sc;
      if (!ls_gt.empty()) {
        const voxsc::VoxelGrid gt = voxsc::read_grid_file(ls_gt);
        if (gt.dim != grid.dim)
          throw voxsc::ValidationError("loss: --voxel and --gt-voxel dims differ");
        const double l_3d =
            voxsc::loss_3d(grid, gt, cfg.loss_weights.alpha_p, cfg.iou_mode);
        out["l_3d"] = l_3d;
        total += cfg.loss_weights.alpha3 * l_3d;
      } else {
        out["l_3d"] = nullptr;
      }
      out["total"] = total;
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (app.got_subcommand(cmd_pose)) {
      const voxsc::VoxelGrid grid = voxsc::read_grid_file(ep_voxel);
      const voxsc::Mask mask = voxsc::read_mask_pgm(voxsc::read_file(ep_mask));
      voxsc::CameraPose init = parse_pose_arg(ep_init);
      init.translation = translation;
      const voxsc::Intrinsics k = cfg.intrinsics_for(mask.width, mask.height);
      if (ep_restarts < 1) throw voxsc::ValidationError("--restarts must be >= 1");
      const voxsc::PoseEstimate estimate =
          voxsc::estimate_pose(grid, mask, init, k, cfg.sampling, cfg.consistency,
                               cfg.optimizer, ep_restarts, cfg.iou_mode, threads);
      write_pose_trace(ep_trace, estimate.trace);
      json out = {{"pose", voxsc::pose_to_json(estimate.pose)},
                  {"final_loss", estimate.final_loss},
                  {"iterations", estimate.trace.size()}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (app.got_subcommand(cmd_rec)) {
      const std::string views_text = voxsc::read_file(rc_views);
      const std::vector<voxsc::ViewSpec> specs = voxsc::read_view_list(views_text);
      if (specs.empty()) throw voxsc::ValidationError("reconstruct: empty view list");
      const std::filesystem::path base = std::filesystem::path(rc_views).parent_path();
      std::vector<voxsc::ViewObservation> views;
      for (const auto& spec : specs) {
        std::filesystem::path p(spec.mask_path);
        if (p.is_relative()) p = base / p;
        voxsc::ViewObservation view;
        view.mask = voxsc::read_mask_pgm(voxsc::read_file(p.string()));
        view.pose = spec.pose;
        if (!views.empty() && (view.mask.width != views.front().mask.width ||
                               view.mask.height != views.front().mask.height))
          throw voxsc::ValidationError("reconstruct: view masks have mixed dimensions");
        views.push_back(std::move(view));
      }
      const int grid_dim = rc_grid_dim > 0 ? rc_grid_dim : cfg.grid_dim;
      const voxsc::Intrinsics k =
          cfg.intrinsics_for(views.front().mask.width, views.front().mask.height);
      const voxsc::ReconstructionResult result =
          voxsc::reconstruct(views, grid_dim, k, cfg.sampling, cfg.consistency,
                             cfg.optimizer, cfg.iou_mode, threads);
      voxsc::write_file(rc_out, voxsc::write_voxf(result.grid));
      write_loss_trace(rc_trace, result.trace);
      json out = {{"final_loss", result.final_loss}, {"iterations", result.trace.size()}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (app.got_subcommand(cmd_gc)) {
      voxsc::oracle::GradCheckParams params;
      params.grid_dim = gc_grid;
      params.mask_dim = gc_mask;
      params.n_samples = gc_samples;
      params.n_triples = gc_triples;
      params.seed = gc_seed;
      params.threads = threads;
      params.corrupt = gc_corrupt;
      params.weights = cfg.consistency;
      params.mode = cfg.iou_mode;
      if (params.grid_dim < 1 || params.mask_dim < 1 || params.n_samples < 1 ||
          params.n_triples < 1)
        throw voxsc::ValidationError("gradcheck: dims, samples and triples must be >= 1");
      const voxsc::oracle::GradCheckReport report =
          voxsc::oracle::gradcheck_self_consistency(params);
      json out = {{"max_rel_error", report.max_rel_error},
                  {"worst_coordinate", report.worst_coordinate},
                  {"n_checked", report.n_checked},
                  {"n_skipped_near_boundary", report.n_skipped_near_boundary}};
      std::cout << out.dump() << "\n";
      return report.max_rel_error > gc_threshold ? 3 : 0;
    }
  } catch (const voxsc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const voxsc::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
