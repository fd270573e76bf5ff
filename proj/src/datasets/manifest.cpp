#include "cylsfm/datasets/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cylsfm/core/error.hpp"
#include "cylsfm/core/rng.hpp"
#include "cylsfm/datasets/image_io.hpp"

namespace cylsfm {

namespace {

constexpr std::string_view kMagic = "cylsfm-manifest";

std::string_view to_string(StaticFilter f) noexcept {
  switch (f) {
    case StaticFilter::Applied: return "applied";
    case StaticFilter::SkippedNoPoses: return "skipped-no-poses";
    case StaticFilter::Disabled: return "disabled";
  }
  return "disabled";
}

StaticFilter static_filter_from_string(std::string_view s) {
  for (StaticFilter f : {StaticFilter::Applied, StaticFilter::SkippedNoPoses, StaticFilter::Disabled})
    if (to_string(f) == s) return f;
  throw Error(ErrorCode::Format, "unknown static filter state '" + std::string(s) + "'");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string pose_field(const Pose6& p) {
  std::string s;
  for (double v : p.to_array()) s += (s.empty() ? "" : ",") + fmt(v);
  return s;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::Format, where + ": bad number '" + s + "'");
}

int to_int(const std::string& s, const std::string& where) {
  const double v = to_double(s, where);
  require(v == std::floor(v) && std::abs(v) < 1e9, ErrorCode::Format, where + ": bad integer '" + s + "'");
  return static_cast<int>(v);
}

// key=value fields after the record type.
std::map<std::string, std::string> fields(std::istringstream& ss, const std::string& where) {
  std::map<std::string, std::string> out;
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    require(eq != std::string::npos && eq > 0, ErrorCode::Format, where + ": expected key=value, got '" + tok + "'");
    require(out.emplace(tok.substr(0, eq), tok.substr(eq + 1)).second, ErrorCode::Format,
            where + ": duplicate field " + tok.substr(0, eq));
  }
  return out;
}

const std::string& field(const std::map<std::string, std::string>& f, const std::string& key,
                         const std::string& where) {
  const auto it = f.find(key);
  require(it != f.end(), ErrorCode::Format, where + ": missing field " + key);
  return it->second;
}

}  // namespace

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view name) {
  for (Split s : {Split::Train, Split::Val, Split::Test})
    if (to_string(s) == name) return s;
  throw Error(ErrorCode::Format, "unknown split '" + std::string(name) + "'");
}

void SequenceManifest::validate() const {
  camera.validate();
  const int n = static_cast<int>(frames.size());
  std::set<int> train_frames;
  for (const auto& s : snippets) {
    require(s.frames[0] >= 0 && s.frames[2] < n, ErrorCode::BadArgument, "snippet frame out of range");
    require(s.frames[1] == s.frames[0] + 1 && s.frames[2] == s.frames[1] + 1, ErrorCode::BadArgument,
            "snippet frames must be consecutive");
    if (s.split == Split::Train) train_frames.insert(s.frames.begin(), s.frames.end());
  }
  for (const auto& s : snippets)
    if (s.split == Split::Test)
      for (int f : s.frames)
        require(!train_frames.contains(f), ErrorCode::BadArgument, "test snippet shares a frame with training");
  for (const auto& f : frames) {
    require(!f.color.empty(), ErrorCode::BadArgument, "frame without a color image");
    for (const std::string* p : {&f.color, &f.depth})
      require(p->find_first_of(" \t\n") == std::string::npos, ErrorCode::BadArgument,
              "manifest paths cannot contain whitespace: " + *p);
  }
}

std::vector<int> SequenceManifest::snippets_in(Split split) const {
  std::vector<int> out;
  for (std::size_t k = 0; k < snippets.size(); ++k)
    if (snippets[k].split == split) out.push_back(static_cast<int>(k));
  return out;
}

void SequenceManifest::save(const std::filesystem::path& path) const {
  validate();
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  out << kMagic << " 1\n";
  out << "camera width=" << camera.width << " height=" << camera.height << " h_max=" << fmt(camera.h_max)
      << " theta_start=" << fmt(camera.theta_start) << " theta_span=" << fmt(camera.theta_span) << '\n';
  out << "static_filter state=" << to_string(static_filter) << " tau=" << fmt(static_tau) << '\n';
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const FrameRecord& f = frames[k];
    out << "frame index=" << k << " color=" << f.color;
    if (!f.depth.empty()) out << " depth=" << f.depth;
    if (f.pose) out << " pose=" << pose_field(*f.pose);
    out << '\n';
  }
  for (const auto& s : snippets)
    out << "snippet frames=" << s.frames[0] << ',' << s.frames[1] << ',' << s.frames[2]
        << " split=" << to_string(s.split) << '\n';
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

SequenceManifest SequenceManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  SequenceManifest m;
  std::string line;
  int lineno = 0;
  bool have_header = false, have_camera = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind) || kind[0] == '#') continue;
    if (!have_header) {
      std::string version;
      ss >> version;
      require(kind == kMagic && version == "1", ErrorCode::Format, where + ": not a version 1 manifest");
      have_header = true;
      continue;
    }
    const auto f = fields(ss, where);
    if (kind == "camera") {
      m.camera.width = to_int(field(f, "width", where), where);
      m.camera.height = to_int(field(f, "height", where), where);
      m.camera.h_max = to_double(field(f, "h_max", where), where);
      m.camera.theta_start = to_double(field(f, "theta_start", where), where);
      m.camera.theta_span = to_double(field(f, "theta_span", where), where);
      have_camera = true;
    } else if (kind == "static_filter") {
      m.static_filter = static_filter_from_string(field(f, "state", where));
      m.static_tau = to_double(field(f, "tau", where), where);
    } else if (kind == "frame") {
      require(to_int(field(f, "index", where), where) == static_cast<int>(m.frames.size()), ErrorCode::Format,
              where + ": frames must be listed in order");
      FrameRecord fr;
      fr.color = field(f, "color", where);
      if (f.contains("depth")) fr.depth = f.at("depth");
      if (f.contains("pose")) {
        const auto parts = split_on(f.at("pose"), ',');
        require(parts.size() == 6, ErrorCode::Format, where + ": pose needs six numbers");
        std::array<double, 6> v{};
        for (int k = 0; k < 6; ++k) v[k] = to_double(parts[k], where);
        fr.pose = Pose6::from_array(v);
      }
      m.frames.push_back(std::move(fr));
    } else if (kind == "snippet") {
      const auto parts = split_on(field(f, "frames", where), ',');
      require(parts.size() == 3, ErrorCode::Format, where + ": snippet needs three frames");
      SnippetRecord s;
      for (int k = 0; k < 3; ++k) s.frames[k] = to_int(parts[k], where);
      s.split = split_from_string(field(f, "split", where));
      m.snippets.push_back(s);
    } else {
      throw Error(ErrorCode::Format, where + ": unknown record '" + kind + "'");
    }
  }
  require(have_header && have_camera, ErrorCode::Format, path.string() + ": missing header or camera record");
  m.validate();
  return m;
}

std::vector<SnippetRecord> make_sequences(int frame_count, const SplitFractions& fr, std::uint64_t seed, int chunk) {
  require(frame_count >= 3, ErrorCode::TooFewFrames, "three-frame sequences need at least 3 frames");
  require(fr.train >= 0 && fr.val >= 0 && fr.test >= 0 && std::abs(fr.train + fr.val + fr.test - 1.0) < 1e-9,
          ErrorCode::BadArgument, "split fractions must be non-negative and sum to 1");
  require(chunk >= 1, ErrorCode::BadArgument, "chunk must be at least 1");
  const int triples = frame_count - 2;
  const int chunks = (triples + chunk - 1) / chunk;
  Rng rng(seed);
  const auto order = rng.permutation(static_cast<std::size_t>(chunks));
  const int n_train = static_cast<int>(std::lround(fr.train * chunks));
  const int n_val = std::min(chunks - n_train, static_cast<int>(std::lround(fr.val * chunks)));
  std::vector<Split> chunk_split(static_cast<std::size_t>(chunks));
  for (int k = 0; k < chunks; ++k) {
    const Split s = k < n_train ? Split::Train : k < n_train + n_val ? Split::Val : Split::Test;
    chunk_split[order[static_cast<std::size_t>(k)]] = s;
  }
  std::vector<SnippetRecord> all;
  std::vector<bool> in_train(static_cast<std::size_t>(frame_count), false);
  for (int t = 0; t < triples; ++t) {
    const Split s = chunk_split[static_cast<std::size_t>(t / chunk)];
    all.push_back({{t, t + 1, t + 2}, s});
    if (s == Split::Train)
      for (int f = t; f < t + 3; ++f) in_train[static_cast<std::size_t>(f)] = true;
  }
  std::vector<SnippetRecord> out;
  for (const auto& s : all) {
    if (s.split == Split::Test &&
        std::any_of(s.frames.begin(), s.frames.end(), [&](int f) { return in_train[static_cast<std::size_t>(f)]; }))
      continue;
    out.push_back(s);
  }
  return out;
}

Pose6 relative_frame_pose(const Pose6& target_world, const Pose6& source_world) {
  return transform_to_pose(pose_to_transform(source_world).inverse() * pose_to_transform(target_world));
}

Snippet load_snippet(const SequenceManifest& m, const std::filesystem::path& dir, int index) {
  require(index >= 0 && index < static_cast<int>(m.snippets.size()), ErrorCode::BadArgument,
          "snippet index out of range");
  const auto& rec = m.snippets[static_cast<std::size_t>(index)];
  auto frame = [&](int k) -> const FrameRecord& { return m.frames.at(static_cast<std::size_t>(rec.frames[k])); };
  auto color = [&](int k) {
    Tensor img = read_ppm(dir / frame(k).color);
    require(img.rows() == m.camera.height && img.cols() == m.camera.width, ErrorCode::ShapeMismatch,
            frame(k).color + " does not match the manifest camera");
    return img;
  };
  Snippet s;
  s.camera = m.camera;
  s.target = color(1);
  s.sources = {color(0), color(2)};
  if (!frame(1).depth.empty()) {
    s.gt_depth = read_pfm(dir / frame(1).depth);
    require(s.gt_depth.same_shape(Tensor(m.camera.height, m.camera.width, 1)), ErrorCode::ShapeMismatch,
            frame(1).depth + " does not match the manifest camera");
  }
  if (frame(0).pose && frame(1).pose && frame(2).pose)
    for (int k : {0, 2}) s.gt_poses.push_back(relative_frame_pose(*frame(1).pose, *frame(k).pose));
  s.validate();
  return s;
}

}  // namespace cylsfm
