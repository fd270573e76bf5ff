#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "cylsfm/core/error.hpp"

namespace cylsfm::cli {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw Error(ErrorCode::BadConfig, std::string(key) + ": expected " + std::string(want) + ", got '" +
                                        std::string(value) + "'");
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view v, std::string_view want) {
  T out{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) bad_value(key, v, want);
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) bad_value(key, v, want);
  return out;
}

double parse_double(std::string_view k, std::string_view v) { return parse_number<double>(k, v, "a number"); }
int parse_int(std::string_view k, std::string_view v) { return parse_number<int>(k, v, "an integer"); }

bool parse_bool(std::string_view k, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(k, v, "true or false");
}

std::vector<int> parse_int_list(std::string_view k, std::string_view v) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = std::min(v.find(',', pos), v.size());
    out.push_back(parse_number<int>(k, trim(v.substr(pos, comma - pos)), "comma-separated integers"));
    pos = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

constexpr std::pair<SmoothMode, std::string_view> kSmoothNames[] = {
    {SmoothMode::SecondOrder, "second_order"},
    {SmoothMode::ImageAware, "image_aware"},
    {SmoothMode::ImageAwareFirstOrder, "image_aware_first_order"},
};
constexpr std::pair<InputKind, std::string_view> kKindNames[] = {
    {InputKind::Cylindrical, "cyl"},
    {InputKind::Cube, "cube"},
    {InputKind::Equirect, "equirect"},
};

template <class E, std::size_t N>
E parse_enum(std::string_view k, std::string_view v, const std::pair<E, std::string_view> (&names)[N]) {
  for (const auto& [e, n] : names)
    if (n == v) return e;
  std::string want = "one of";
  for (const auto& [e, n] : names) want += " " + std::string(n);
  bad_value(k, v, want);
}

template <class E, std::size_t N>
std::string enum_name(E e, const std::pair<E, std::string_view> (&names)[N]) {
  for (const auto& [x, n] : names)
    if (x == e) return std::string(n);
  return "?";
}

struct Field {
  RunConfig::Key key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define CYLSFM_DOUBLE(name, member, doc)                                                  \
  Field {                                                                                 \
    {name, doc}, [](RunConfig& c, std::string_view v) { c.member = parse_double(name, v); }, \
        [](const RunConfig& c) { return fmt(c.member); }                                  \
  }
#define CYLSFM_INT(name, member, doc)                                                  \
  Field {                                                                              \
    {name, doc}, [](RunConfig& c, std::string_view v) { c.member = parse_int(name, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                    \
  }
#define CYLSFM_BOOL(name, member, doc)                                                  \
  Field {                                                                               \
    {name, doc}, [](RunConfig& c, std::string_view v) { c.member = parse_bool(name, v); }, \
        [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      CYLSFM_INT("camera.width", camera_width, "panorama width in pixels"),
      CYLSFM_INT("camera.height", camera_height, "panorama height in pixels"),
      CYLSFM_DOUBLE("camera.h_max", camera_h_max, "half height of the unit cylinder; 0 gives square pixels"),
      CYLSFM_DOUBLE("loss.lambda_s", loss.lambda_s, "disparity smoothness weight"),
      CYLSFM_DOUBLE("loss.lambda_e", loss.lambda_e, "explainability weight; 0 disables the mask"),
      CYLSFM_DOUBLE("loss.lambda_m", loss.lambda_m, "image-aware smoothness weight"),
      CYLSFM_INT("loss.num_scales", loss.num_scales, "pyramid scales in the loss and depth network"),
      Field{{"loss.smooth_mode", "second_order, image_aware or image_aware_first_order"},
            [](RunConfig& c, std::string_view v) { c.loss.smooth_mode = parse_enum("loss.smooth_mode", v, kSmoothNames); },
            [](const RunConfig& c) { return enum_name(c.loss.smooth_mode, kSmoothNames); }},
      CYLSFM_BOOL("loss.wrap", loss.wrap, "treat the panorama seam as continuous (loss and networks)"),
      CYLSFM_DOUBLE("depth.min", bounds.d_min, "smallest representable depth"),
      CYLSFM_DOUBLE("depth.max", bounds.d_max, "largest representable depth"),
      CYLSFM_DOUBLE("optim.lr_depth", optim.lr_depth, "direct mode: depth logit step size"),
      CYLSFM_DOUBLE("optim.lr_pose", optim.lr_pose, "direct mode: pose step size"),
      CYLSFM_DOUBLE("optim.lr_mask", optim.lr_mask, "direct mode: mask logit step size"),
      CYLSFM_INT("optim.iterations", optim.iterations, "direct mode: iterations per pyramid stage"),
      CYLSFM_INT("optim.stages", optim.stages, "direct mode: pyramid stages"),
      CYLSFM_DOUBLE("optim.beta1", optim.beta1, "direct mode: first moment decay"),
      CYLSFM_DOUBLE("optim.beta2", optim.beta2, "direct mode: second moment decay"),
      CYLSFM_DOUBLE("optim.init_depth", optim.init_depth, "direct mode: starting depth; 0 uses sqrt(min * max)"),
      CYLSFM_DOUBLE("optim.init_noise", optim.init_noise, "direct mode: std of the initial logits"),
      CYLSFM_INT("optim.warmup", optim.warmup, "direct mode: step-size ramp per stage"),
      Field{{"net.depth_widths", "depth encoder channel widths, one stride-2 level each"},
            [](RunConfig& c, std::string_view v) { c.net_depth_widths = parse_int_list("net.depth_widths", v); },
            [](const RunConfig& c) { return fmt_list(c.net_depth_widths); }},
      Field{{"net.pose_widths", "pose encoder channel widths"},
            [](RunConfig& c, std::string_view v) { c.net_pose_widths = parse_int_list("net.pose_widths", v); },
            [](const RunConfig& c) { return fmt_list(c.net_pose_widths); }},
      CYLSFM_INT("net.kernel", net_kernel, "convolution kernel size (odd)"),
      CYLSFM_INT("train.steps", train_steps, "total training steps"),
      CYLSFM_DOUBLE("train.lr", train_lr, "Adam step size"),
      CYLSFM_INT("train.batch_size", train_batch_size, "snippets per step"),
      CYLSFM_DOUBLE("train.beta1", train_beta1, "Adam first moment decay"),
      CYLSFM_DOUBLE("train.beta2", train_beta2, "Adam second moment decay"),
      CYLSFM_INT("train.checkpoint_every", train_checkpoint_every, "steps between checkpoints; 0 only at the end"),
      Field{{"prepare.kind", "input panoramas: cyl, cube or equirect"},
            [](RunConfig& c, std::string_view v) { c.prepare_kind = parse_enum("prepare.kind", v, kKindNames); },
            [](const RunConfig& c) { return enum_name(c.prepare_kind, kKindNames); }},
      CYLSFM_BOOL("prepare.static_filter", prepare_static_filter, "drop frames that barely moved (needs poses)"),
      CYLSFM_DOUBLE("prepare.static_tau", prepare_static_tau, "minimum displacement between kept frames"),
      CYLSFM_DOUBLE("prepare.train", prepare_split.train, "training fraction"),
      CYLSFM_DOUBLE("prepare.val", prepare_split.val, "validation fraction"),
      CYLSFM_DOUBLE("prepare.test", prepare_split.test, "test fraction"),
      CYLSFM_INT("prepare.chunk", prepare_chunk, "consecutive snippets shuffled together"),
      CYLSFM_DOUBLE("prepare.face_fov", prepare_face_fov, "cube face field of view in degrees"),
      CYLSFM_INT("synthetic.frames", synthetic.frames, "frames in the generated sequence"),
      CYLSFM_DOUBLE("synthetic.radius", synthetic.radius, "scene cylinder radius"),
      CYLSFM_DOUBLE("synthetic.baseline", synthetic.baseline, "camera displacement per frame"),
      CYLSFM_DOUBLE("synthetic.center_x", synthetic.center.x(), "path midpoint x"),
      CYLSFM_DOUBLE("synthetic.center_z", synthetic.center.z(), "path midpoint z"),
      CYLSFM_DOUBLE("synthetic.heading", synthetic.heading, "motion azimuth in radians, 0 = +z"),
      CYLSFM_DOUBLE("synthetic.yaw", synthetic.yaw, "camera yaw in radians"),
      CYLSFM_INT("synthetic.waves", synthetic.waves_per_channel, "texture waves per color channel"),
      CYLSFM_INT("synthetic.max_freq", synthetic.max_freq, "highest azimuthal texture frequency"),
      CYLSFM_INT("synthetic.bands", synthetic.bands, "horizontal texture bands"),
      Field{{"synthetic.scene_seed", "texture seed"},
            [](RunConfig& c, std::string_view v) {
              c.synthetic.seed = parse_number<std::uint64_t>("synthetic.scene_seed", v, "an unsigned integer");
            },
            [](const RunConfig& c) { return std::to_string(c.synthetic.seed); }},
      CYLSFM_INT("synthetic.face_size", synthetic_face_size, "cube face size in pixels"),
      CYLSFM_INT("synthetic.equirect_width", synthetic_equirect_width, "equirect width (height is half)"),
      Field{{"seed", "seed for initialization, shuffling and splits"},
            [](RunConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>("seed", v, "an unsigned integer"); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      CYLSFM_INT("threads", threads, "worker threads; 1 is bit-reproducible"),
  };
  return f;
}

#undef CYLSFM_DOUBLE
#undef CYLSFM_INT
#undef CYLSFM_BOOL

const Field& find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key.name == key) return f;
  throw Error(ErrorCode::BadConfig, "unknown configuration key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<RunConfig::Key>& RunConfig::keys() {
  static const std::vector<Key> k = [] {
    std::vector<Key> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return k;
}

void RunConfig::set(std::string_view key, std::string_view value) { find_field(key).set(*this, trim(value)); }

std::string RunConfig::get(std::string_view key) const { return find_field(key).get(*this); }

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& f : fields()) out += f.key.name + " = " + f.get(*this) + "\n";
  return out;
}

CylCamera RunConfig::camera() const {
  const CylCamera cam = camera_h_max > 0 ? CylCamera::full(camera_width, camera_height, camera_h_max)
                                         : CylCamera::full(camera_width, camera_height);
  cam.validate();
  return cam;
}

NetSpec RunConfig::net_spec() const {
  NetSpec s;
  s.depth_widths = net_depth_widths;
  s.pose_widths = net_pose_widths;
  s.kernel = net_kernel;
  s.num_scales = loss.num_scales;
  s.wrap = loss.wrap;
  s.bounds = bounds;
  s.validate();
  return s;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.steps = train_steps;
  t.lr = train_lr;
  t.batch_size = train_batch_size;
  t.beta1 = train_beta1;
  t.beta2 = train_beta2;
  t.seed = seed;
  t.checkpoint_every = train_checkpoint_every;
  t.validate();
  return t;
}

OptimConfig RunConfig::optim_config() const {
  OptimConfig o = optim;
  o.bounds = bounds;
  o.seed = seed;
  o.validate();
  return o;
}

RunConfig load_run_config(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (!file.empty()) {
    std::ifstream in(file);
    require(static_cast<bool>(in), ErrorCode::Io, "cannot open config " + file.string());
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
      std::string_view s = line;
      if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
      s = trim(s);
      if (s.empty()) continue;
      const auto eq = s.find('=');
      require(eq != std::string_view::npos, ErrorCode::BadConfig,
              file.string() + ":" + std::to_string(n) + ": expected key = value");
      cfg.set(trim(s.substr(0, eq)), s.substr(eq + 1));
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    require(eq != std::string::npos, ErrorCode::BadConfig, "--set expects key=value, got '" + o + "'");
    cfg.set(trim(std::string_view(o).substr(0, eq)), std::string_view(o).substr(eq + 1));
  }
  cfg.loss.validate();
  cfg.bounds.validate();
  return cfg;
}

}  // namespace cylsfm::cli
