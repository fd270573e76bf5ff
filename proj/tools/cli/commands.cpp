#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <regex>

#include <CLI11.hpp>

#include "cli.hpp"
#include "cylsfm/core/error.hpp"
#include "cylsfm/core/parallel.hpp"
#include "cylsfm/datasets/image_io.hpp"
#include "cylsfm/datasets/manifest.hpp"
#include "cylsfm/datasets/prepare.hpp"
#include "cylsfm/datasets/synthetic.hpp"
#include "cylsfm/estimation/checkpoint.hpp"
#include "cylsfm/estimation/direct.hpp"
#include "cylsfm/estimation/gradcheck.hpp"
#include "cylsfm/estimation/train.hpp"
#include "cylsfm/eval/metrics.hpp"
#include "cylsfm/render/vr.hpp"
#include "run_config.hpp"

namespace cylsfm::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kFaceNames[6] = {"front", "back", "left", "right", "up", "down"};

std::string frame_name(int id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", id);
  return buf;
}

std::string snippet_stem(int k) { return "snippet_" + frame_name(k); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out << text), ErrorCode::Io, "cannot write " + path.string());
}

Pose6 parse_pose(const std::string& s) {
  std::array<double, 6> v{};
  std::size_t pos = 0;
  for (int k = 0; k < 6; ++k) {
    const auto comma = k < 5 ? s.find(',', pos) : s.size();
    require(comma != std::string::npos, ErrorCode::BadArgument, "pose needs six comma-separated numbers");
    try {
      std::size_t used = 0;
      const std::string part = s.substr(pos, comma - pos);
      v[k] = std::stod(part, &used);
      require(part.find_first_not_of(" \t", used) == std::string::npos, ErrorCode::BadArgument, "bad pose number");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::BadArgument, "bad pose '" + s + "'");
    }
    pos = comma + 1;
  }
  return Pose6::from_array(v);
}

std::vector<int> snippets_for(const SequenceManifest& m, const std::string& split, const std::vector<int>& pick) {
  if (!pick.empty()) return pick;
  if (split == "all") {
    std::vector<int> all(m.snippets.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
    return all;
  }
  return m.snippets_in(split_from_string(split));
}

CylCamera source_camera(const RunConfig& cfg, const Tensor& image) {
  const CylCamera cam = cfg.camera_h_max > 0 ? CylCamera::full(image.cols(), image.rows(), cfg.camera_h_max)
                                             : CylCamera::full(image.cols(), image.rows());
  cam.validate();
  return cam;
}

// ------------------------------------------------------------ make-synthetic

struct SyntheticArgs {
  fs::path output;
};

void cmd_make_synthetic(const RunConfig& cfg, const SyntheticArgs& a, std::ostream& out) {
  const SyntheticSequence seq = make_sequence(cfg.synthetic);
  fs::create_directories(a.output);
  std::vector<FramePose> poses;
  for (int k = 0; k < static_cast<int>(seq.cameras.size()); ++k) {
    const std::string id = frame_name(k);
    const CameraPlacement& at = seq.cameras[k];
    switch (cfg.prepare_kind) {
      case InputKind::Cylindrical: {
        const RenderedView v = render_cylindrical(seq.scene, cfg.camera(), at);
        write_ppm(a.output / (id + ".ppm"), v.image);
        write_pfm(a.output / (id + "_depth.pfm"), v.depth);
        break;
      }
      case InputKind::Cube: {
        const auto face = PinholeCamera::from_fov(cfg.prepare_face_fov, cfg.synthetic_face_size, cfg.synthetic_face_size);
        const auto views = render_cube_faces(seq.scene, face, at);
        for (int f = 0; f < 6; ++f) {
          write_ppm(a.output / (id + "_" + kFaceNames[f] + ".ppm"), views[f].image);
          write_pfm(a.output / (id + "_" + kFaceNames[f] + "_depth.pfm"), views[f].depth);
        }
        break;
      }
      case InputKind::Equirect:
        write_ppm(a.output / (id + ".ppm"),
                  render_equirect(seq.scene, cfg.synthetic_equirect_width, cfg.synthetic_equirect_width / 2, at));
        break;
    }
    poses.push_back({k, transform_to_pose(at.camera_to_world())});
  }
  write_poses(a.output / "poses.txt", poses);
  out << "frames=" << seq.cameras.size() << " output=" << a.output.string() << "\n";
}

// ------------------------------------------------------------------ prepare

struct PrepareArgs {
  fs::path input;
  fs::path output;
  fs::path poses;
};

std::vector<int> discover_frames(const fs::path& dir, InputKind kind) {
  require(fs::is_directory(dir), ErrorCode::Io, "not a directory: " + dir.string());
  const std::regex pattern(kind == InputKind::Cube ? R"((\d+)_front\.ppm)" : R"((\d+)\.ppm)");
  std::vector<int> ids;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (std::regex_match(name, m, pattern)) ids.push_back(std::stoi(m[1].str()));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

Panorama load_panorama(const fs::path& dir, int id, InputKind kind, const RunConfig& cfg, const CylCamera& cam) {
  const std::string stem = frame_name(id);
  Panorama p;
  switch (kind) {
    case InputKind::Cylindrical: {
      p.image = read_ppm(dir / (stem + ".ppm"));
      if (p.image.rows() != cam.height || p.image.cols() != cam.width)
        p.image = resize_image(p.image, cam.height, cam.width);
      const fs::path depth = dir / (stem + "_depth.pfm");
      if (fs::exists(depth)) {
        p.depth = read_pfm(depth);
        if (p.depth.rows() != cam.height || p.depth.cols() != cam.width)
          p.depth = resize_image(p.depth, cam.height, cam.width);
      }
      return p;
    }
    case InputKind::Cube: {
      CubeFaceSet set;
      bool depth = true;
      for (int f = 0; f < 6; ++f) {
        set.faces[f] = read_ppm(dir / (stem + "_" + kFaceNames[f] + ".ppm"));
        depth = depth && fs::exists(dir / (stem + "_" + kFaceNames[f] + "_depth.pfm"));
      }
      if (depth)
        for (int f = 0; f < 6; ++f) set.depth[f] = read_pfm(dir / (stem + "_" + kFaceNames[f] + "_depth.pfm"));
      set.camera = PinholeCamera::from_fov(cfg.prepare_face_fov, set.faces[0].cols(), set.faces[0].rows());
      return stitch_cubemap(set, cam);
    }
    case InputKind::Equirect:
      p.image = equirect_to_cyl(read_ppm(dir / (stem + ".ppm")), cam);
      return p;
  }
  return p;
}

void cmd_prepare(const RunConfig& cfg, const PrepareArgs& a, std::ostream& out) {
  const CylCamera cam = cfg.camera();
  const std::vector<int> ids = discover_frames(a.input, cfg.prepare_kind);
  require(ids.size() >= 3, ErrorCode::TooFewFrames, "need at least three input frames in " + a.input.string());

  std::map<int, Pose6> world;
  const fs::path pose_file = a.poses.empty() ? a.input / "poses.txt" : a.poses;
  if (!a.poses.empty() || fs::exists(pose_file))
    for (const FramePose& fp : read_poses(pose_file)) world[fp.frame] = fp.pose;
  const bool have_poses = std::all_of(ids.begin(), ids.end(), [&](int id) { return world.count(id) > 0; });

  SequenceManifest m;
  m.camera = cam;
  std::vector<int> kept(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) kept[k] = static_cast<int>(k);
  if (!cfg.prepare_static_filter) {
    m.static_filter = StaticFilter::Disabled;
  } else if (!have_poses) {
    m.static_filter = StaticFilter::SkippedNoPoses;
  } else {
    std::vector<Pose6> ordered;
    for (int id : ids) ordered.push_back(world[id]);
    kept = filter_static(ordered, cfg.prepare_static_tau);
    m.static_filter = StaticFilter::Applied;
    m.static_tau = cfg.prepare_static_tau;
  }
  require(kept.size() >= 3, ErrorCode::TooFewFrames, "fewer than three frames left after static filtering");

  fs::create_directories(a.output / "frames");
  for (std::size_t n = 0; n < kept.size(); ++n) {
    const int id = ids[static_cast<std::size_t>(kept[n])];
    const Panorama p = load_panorama(a.input, id, cfg.prepare_kind, cfg, cam);
    FrameRecord rec;
    rec.color = "frames/" + frame_name(static_cast<int>(n)) + ".ppm";
    write_ppm(a.output / rec.color, p.image);
    if (!p.depth.empty()) {
      rec.depth = "frames/" + frame_name(static_cast<int>(n)) + "_depth.pfm";
      write_pfm(a.output / rec.depth, p.depth);
    }
    if (have_poses) rec.pose = world[id];
    m.frames.push_back(std::move(rec));
  }
  m.snippets = make_sequences(static_cast<int>(kept.size()), cfg.prepare_split, cfg.seed, cfg.prepare_chunk);
  m.save(a.output / "manifest.txt");
  out << "frames=" << ids.size() << " kept=" << kept.size() << " train=" << m.snippets_in(Split::Train).size()
      << " val=" << m.snippets_in(Split::Val).size() << " test=" << m.snippets_in(Split::Test).size() << "\n";
}

// ----------------------------------------------------- optimize and predict

struct SnippetSelection {
  fs::path manifest;
  std::string split = "test";
  std::vector<int> snippets;
};

struct EstimateArgs {
  SnippetSelection sel;
  fs::path output;
  fs::path checkpoint;
};

void write_estimate(const fs::path& dir, const SequenceManifest& m, int k, const Tensor& depth,
                    const std::vector<Pose6>& poses) {
  const auto& rec = m.snippets[static_cast<std::size_t>(k)];
  write_pfm(dir / (snippet_stem(k) + "_depth.pfm"), depth);
  write_poses(dir / (snippet_stem(k) + "_poses.txt"), {{rec.frames[0], poses[0]}, {rec.frames[2], poses[1]}});
}

void cmd_optimize(const RunConfig& cfg, const EstimateArgs& a, std::ostream& out) {
  const SequenceManifest m = SequenceManifest::load(a.sel.manifest);
  const fs::path root = a.sel.manifest.parent_path();
  const OptimConfig oc = cfg.optim_config();
  fs::create_directories(a.output);
  for (int k : snippets_for(m, a.sel.split, a.sel.snippets)) {
    const Snippet s = load_snippet(m, root, k);
    const DirectResult r = direct_optimize(s, oc, cfg.loss);
    write_estimate(a.output, m, k, r.depth.depth(), r.poses);
    char line[160];
    if (r.static_snippet)
      std::snprintf(line, sizeof line, "snippet=%d static=1\n", k);
    else
      std::snprintf(line, sizeof line, "snippet=%d static=0 initial_loss=%.10g final_loss=%.10g\n", k,
                    r.loss_trace.front(), r.loss_trace.back());
    out << line;
  }
}

void cmd_predict(const EstimateArgs& a, std::ostream& out) {
  const Model model = model_from_checkpoint(Checkpoint::load(a.checkpoint));
  const SequenceManifest m = SequenceManifest::load(a.sel.manifest);
  const fs::path root = a.sel.manifest.parent_path();
  fs::create_directories(a.output);
  int count = 0;
  for (int k : snippets_for(m, a.sel.split, a.sel.snippets)) {
    const Prediction p = predict(model, load_snippet(m, root, k));
    write_estimate(a.output, m, k, p.depth(), p.pose.poses);
    ++count;
  }
  out << "predicted=" << count << " output=" << a.output.string() << "\n";
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  fs::path manifest;
  fs::path output;
  fs::path resume;
  fs::path log;
};

void cmd_train(const RunConfig& cfg, const TrainArgs& a, std::ostream& out) {
  const SequenceManifest m = SequenceManifest::load(a.manifest);
  std::vector<Snippet> data;
  for (int k : m.snippets_in(Split::Train)) data.push_back(load_snippet(m, a.manifest.parent_path(), k));
  require(!data.empty(), ErrorCode::BadArgument, "manifest has no training snippets");
  TrainConfig tc = cfg.train_config();
  tc.checkpoint_path = a.output;
  tc.log_path = a.log;
  Trainer trainer = a.resume.empty() ? Trainer(cfg.net_spec(), tc, cfg.loss)
                                     : Trainer(Checkpoint::load(a.resume), tc, cfg.loss);
  const auto trace = trainer.run(data);
  char line[160];
  std::snprintf(line, sizeof line, "steps=%lld final_loss=%.10g checkpoint=%s\n",
                static_cast<long long>(trainer.steps_done()), trace.empty() ? 0.0 : trace.back().total,
                a.output.string().c_str());
  out << line;
}

// --------------------------------------------------------------- evaluation

struct EvalArgs {
  SnippetSelection sel;
  fs::path pred_dir;
  std::vector<fs::path> pred;
  std::vector<fs::path> gt;
  fs::path output;
  bool no_median_scale = false;
};

void emit(const std::string& report, const fs::path& path, std::ostream& out) {
  out << report;
  if (!path.empty()) write_text(path, report);
}

void cmd_eval_depth(const RunConfig& cfg, const EvalArgs& a, std::ostream& out) {
  std::vector<std::string> names;
  std::vector<DepthMetrics> rows;
  auto add = [&](const std::string& name, const Tensor& pred, const Tensor& gt) {
    names.push_back(name);
    rows.push_back(depth_metrics(pred, gt, default_depth_mask(gt, cfg.bounds), !a.no_median_scale));
  };
  if (!a.pred.empty() || !a.gt.empty()) {
    require(a.pred.size() == a.gt.size(), ErrorCode::BadArgument, "--pred and --gt need the same number of files");
    for (std::size_t k = 0; k < a.pred.size(); ++k)
      add(a.pred[k].filename().string(), read_pfm(a.pred[k]), read_pfm(a.gt[k]));
  } else {
    require(!a.sel.manifest.empty() && !a.pred_dir.empty(), ErrorCode::BadArgument,
            "give --pred/--gt files or --manifest with --pred-dir");
    const SequenceManifest m = SequenceManifest::load(a.sel.manifest);
    const fs::path root = a.sel.manifest.parent_path();
    for (int k : snippets_for(m, a.sel.split, a.sel.snippets)) {
      const FrameRecord& target = m.frames.at(static_cast<std::size_t>(m.snippets[k].frames[1]));
      require(!target.depth.empty(), ErrorCode::Format, "snippet " + std::to_string(k) + " has no ground-truth depth");
      add(snippet_stem(k), read_pfm(a.pred_dir / (snippet_stem(k) + "_depth.pfm")), read_pfm(root / target.depth));
    }
  }
  require(!rows.empty(), ErrorCode::BadArgument, "nothing to evaluate");
  emit(format_depth_report(names, rows), a.output, out);
}

void cmd_eval_pose(const EvalArgs& a, std::ostream& out) {
  require(!a.sel.manifest.empty() && !a.pred_dir.empty(), ErrorCode::BadArgument,
          "eval-pose needs --manifest and --pred-dir");
  const SequenceManifest m = SequenceManifest::load(a.sel.manifest);
  std::vector<Trajectory> pred, gt;
  for (int k : snippets_for(m, a.sel.split, a.sel.snippets)) {
    const auto& rec = m.snippets[static_cast<std::size_t>(k)];
    std::array<Pose6, 3> world;
    for (int j = 0; j < 3; ++j) {
      const auto& pose = m.frames.at(static_cast<std::size_t>(rec.frames[j])).pose;
      require(pose.has_value(), ErrorCode::Format, "snippet " + std::to_string(k) + " has no ground-truth poses");
      world[j] = *pose;
    }
    std::map<int, Pose6> est;
    for (const FramePose& fp : read_poses(a.pred_dir / (snippet_stem(k) + "_poses.txt"))) est[fp.frame] = fp.pose;
    require(est.count(rec.frames[0]) && est.count(rec.frames[2]), ErrorCode::Format,
            "pose file for snippet " + std::to_string(k) + " lacks a source frame");
    pred.push_back(snippet_positions(est[rec.frames[0]], est[rec.frames[2]]));
    gt.push_back(
        snippet_positions(relative_frame_pose(world[1], world[0]), relative_frame_pose(world[1], world[2])));
  }
  require(!pred.empty(), ErrorCode::BadArgument, "nothing to evaluate");
  emit(format_ate_report(ate(pred, gt)), a.output, out);
}

// --------------------------------------------------------------- rendering

struct RenderArgs {
  fs::path color;
  fs::path depth;
  fs::path output;
  fs::path depth_output;
  fs::path ply;
  std::string pose = "0,0,0,0,0,0";
  std::string camera = "cyl";
  double fov = 90.0;
  int width = 0;
  int height = 0;
  double radius = 0.0;
  fs::path left;
  fs::path right;
  fs::path anaglyph;
};

Mesh load_mesh(const RunConfig& cfg, const RenderArgs& a, CylCamera& cam) {
  const Tensor color = read_ppm(a.color);
  cam = source_camera(cfg, color);
  return build_mesh(color, read_pfm(a.depth), cam);
}

void cmd_render_view(const RunConfig& cfg, const RenderArgs& a, std::ostream& out) {
  CylCamera src;
  const Mesh mesh = load_mesh(cfg, a, src);
  if (!a.ply.empty()) write_ply(a.ply, mesh);
  const int w = a.width > 0 ? a.width : (a.camera == "cyl" ? src.width : src.height);
  const int h = a.height > 0 ? a.height : src.height;
  VirtualCamera cam;
  if (a.camera == "cyl")
    cam = cfg.camera_h_max > 0 ? CylCamera::full(w, h, cfg.camera_h_max) : CylCamera::full(w, h);
  else
    cam = PinholeCamera::from_fov(a.fov, w, h);
  const RenderResult r = render_view(mesh, parse_pose(a.pose), cam);
  write_ppm(a.output, r.image);
  if (!a.depth_output.empty()) write_pfm(a.depth_output, r.depth);
  long covered = 0;
  for (double v : r.valid.values()) covered += v > 0;
  out << "rendered=" << a.output.string() << " covered=" << covered << "/" << r.valid.values().size() << "\n";
}

void cmd_render_ods(const RunConfig& cfg, const RenderArgs& a, std::ostream& out) {
  CylCamera src;
  const Mesh mesh = load_mesh(cfg, a, src);
  const int w = a.width > 0 ? a.width : src.width;
  const int h = a.height > 0 ? a.height : src.height;
  const CylCamera cam = cfg.camera_h_max > 0 ? CylCamera::full(w, h, cfg.camera_h_max) : CylCamera::full(w, h);
  const StereoPair pair = render_ods(mesh, a.radius, cam);
  write_ppm(a.left, pair.left);
  write_ppm(a.right, pair.right);
  if (!a.anaglyph.empty()) write_ppm(a.anaglyph, anaglyph(pair));
  out << "left=" << a.left.string() << " right=" << a.right.string() << "\n";
}

// ---------------------------------------------------------------- gradcheck

struct GradArgs {
  int trials = 20;
  std::vector<std::string> components;
};

int cmd_gradcheck(const RunConfig& cfg, const GradArgs& a, std::ostream& out) {
  std::vector<GradComponent> which;
  for (const auto& c : a.components) which.push_back(grad_component_from_string(c));
  if (which.empty()) which = all_grad_components();
  constexpr double kTolerance = 1e-4;
  bool ok = true;
  for (GradComponent c : which) {
    const GradCheckResult r = gradient_check(c, a.trials, cfg.seed);
    const bool pass = r.max_rel_error < kTolerance;
    ok = ok && pass;
    char line[160];
    std::snprintf(line, sizeof line, "component=%s max_rel_error=%.3e probes=%d skipped=%d %s\n",
                  std::string(to_string(c)).c_str(), r.max_rel_error, r.probes, r.skipped, pass ? "pass" : "FAIL");
    out << line;
  }
  return ok ? kExitOk : kExitData;
}

// CLI::PositiveNumber reports the raw double range, which reads badly.
const CLI::Validator kPositive(
    [](std::string& s) {
      double v = 0.0;
      if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0)) return std::string("must be a number > 0, got " + s);
      return std::string();
    },
    "> 0");

bool is_usage_error(ErrorCode c) {
  return c == ErrorCode::BadArgument || c == ErrorCode::BadConfig || c == ErrorCode::BadFov;
}

void add_selection(CLI::App* cmd, SnippetSelection& sel, bool manifest_required) {
  auto* opt = cmd->add_option("--manifest", sel.manifest, "sequence manifest written by prepare");
  if (manifest_required) opt->required();
  cmd->add_option("--split", sel.split, "train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}))
      ->capture_default_str();
  cmd->add_option("--snippet", sel.snippets, "snippet indices (overrides --split)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth and pose from cylindrical panoramas", "cylsfm"};
  app.require_subcommand(1);
  app.fallthrough();

  fs::path config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_file, "key = value configuration file");
  app.add_option("--set", overrides, "override one key, as key=value (repeatable)")->take_all();
  app.add_option("--seed", seed, "seed (overrides the seed key)");
  app.add_option("--threads", threads, "worker threads (overrides the threads key)")->check(kPositive);

  SyntheticArgs syn;
  auto* c_syn = app.add_subcommand("make-synthetic", "render a textured-cylinder sequence with poses and depth");
  c_syn->add_option("--output", syn.output, "output directory")->required();

  PrepareArgs prep;
  auto* c_prep = app.add_subcommand("prepare", "stitch/warp panoramas, filter static frames, write a manifest");
  c_prep->add_option("--input", prep.input, "directory of input frames")->required();
  c_prep->add_option("--output", prep.output, "dataset directory to create")->required();
  c_prep->add_option("--poses", prep.poses, "pose file (default: <input>/poses.txt when present)");

  EstimateArgs est;
  auto* c_opt = app.add_subcommand("optimize", "direct per-snippet depth and pose optimization");
  add_selection(c_opt, est.sel, true);
  c_opt->add_option("--output", est.output, "directory for depth maps and poses")->required();

  auto* c_pred = app.add_subcommand("predict", "depth and pose from a trained checkpoint");
  add_selection(c_pred, est.sel, true);
  c_pred->add_option("--checkpoint", est.checkpoint, "checkpoint written by train")->required();
  c_pred->add_option("--output", est.output, "directory for depth maps and poses")->required();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "train the depth and pose networks on a manifest's train split");
  c_train->add_option("--manifest", tr.manifest, "sequence manifest")->required();
  c_train->add_option("--output", tr.output, "checkpoint path")->required();
  c_train->add_option("--resume", tr.resume, "checkpoint to continue from");
  c_train->add_option("--log", tr.log, "per-step loss log");

  EvalArgs ev;
  auto* c_ed = app.add_subcommand("eval-depth", "depth metrics against ground truth");
  add_selection(c_ed, ev.sel, false);
  c_ed->add_option("--pred-dir", ev.pred_dir, "directory written by predict or optimize");
  c_ed->add_option("--pred", ev.pred, "predicted depth files");
  c_ed->add_option("--gt", ev.gt, "ground-truth depth files, paired with --pred");
  c_ed->add_option("--output", ev.output, "also write the report here");
  c_ed->add_flag("--no-median-scale", ev.no_median_scale, "compare without median scaling");

  auto* c_ep = app.add_subcommand("eval-pose", "trajectory error of predicted snippet poses");
  add_selection(c_ep, ev.sel, true);
  c_ep->add_option("--pred-dir", ev.pred_dir, "directory written by predict or optimize")->required();
  c_ep->add_option("--output", ev.output, "also write the report here");

  RenderArgs ren;
  auto* c_rv = app.add_subcommand("render-view", "render a panorama and its depth from a new viewpoint");
  c_rv->add_option("--color", ren.color, "panorama image")->required();
  c_rv->add_option("--depth", ren.depth, "radial depth map")->required();
  c_rv->add_option("--output", ren.output, "rendered image")->required();
  c_rv->add_option("--pose", ren.pose, "eye pose tx,ty,tz,rx,ry,rz in panorama coordinates")->capture_default_str();
  c_rv->add_option("--camera", ren.camera, "cyl or pinhole")
      ->check(CLI::IsMember({"cyl", "pinhole"}))
      ->capture_default_str();
  c_rv->add_option("--fov", ren.fov, "pinhole horizontal FOV in degrees")
      ->check(CLI::Range(0.0, 180.0))
      ->capture_default_str();
  c_rv->add_option("--width", ren.width, "output width (default: input)")->check(kPositive);
  c_rv->add_option("--height", ren.height, "output height (default: input)")->check(kPositive);
  c_rv->add_option("--depth-output", ren.depth_output, "rendered depth map");
  c_rv->add_option("--ply", ren.ply, "also write the mesh as PLY");

  auto* c_ods = app.add_subcommand("render-ods", "omnidirectional stereo pair from a panorama and its depth");
  c_ods->add_option("--color", ren.color, "panorama image")->required();
  c_ods->add_option("--depth", ren.depth, "radial depth map")->required();
  c_ods->add_option("--radius", ren.radius, "viewing circle radius (> 0)")->required()->check(kPositive);
  c_ods->add_option("--left", ren.left, "left eye panorama")->required();
  c_ods->add_option("--right", ren.right, "right eye panorama")->required();
  c_ods->add_option("--anaglyph", ren.anaglyph, "red-cyan anaglyph");
  c_ods->add_option("--width", ren.width, "output width (default: input)")->check(kPositive);
  c_ods->add_option("--height", ren.height, "output height (default: input)")->check(kPositive);

  GradArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "compare analytic gradients with finite differences");
  c_gc->add_option("--trials", gc.trials, "random instances per component")
      ->check(kPositive)
      ->capture_default_str();
  c_gc->add_option("--component", gc.components, "conv, sampler, synth, total_loss, depth_net, pose_net");

  auto* c_cfg = app.add_subcommand("config", "print the effective configuration");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    RunConfig cfg = load_run_config(config_file, overrides);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    require(cfg.threads >= 1, ErrorCode::BadConfig, "threads must be at least 1");
    set_num_threads(cfg.threads);

    if (c_syn->parsed()) cmd_make_synthetic(cfg, syn, out);
    else if (c_prep->parsed()) cmd_prepare(cfg, prep, out);
    else if (c_opt->parsed()) cmd_optimize(cfg, est, out);
    else if (c_pred->parsed()) cmd_predict(est, out);
    else if (c_train->parsed()) cmd_train(cfg, tr, out);
    else if (c_ed->parsed()) cmd_eval_depth(cfg, ev, out);
    else if (c_ep->parsed()) cmd_eval_pose(ev, out);
    else if (c_rv->parsed()) cmd_render_view(cfg, ren, out);
    else if (c_ods->parsed()) cmd_render_ods(cfg, ren, out);
    else if (c_gc->parsed()) return cmd_gradcheck(cfg, gc, out);
    else if (c_cfg->parsed()) out << cfg.dump();
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_usage_error(e.code()) ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace cylsfm::cli
