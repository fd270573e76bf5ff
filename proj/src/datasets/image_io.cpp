#include "cylsfm/datasets/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cylsfm/core/error.hpp"

namespace cylsfm {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  return out;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::filesystem::path& path) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#' && tok.empty()) {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  require(!tok.empty(), ErrorCode::Format, "truncated header in " + path.string());
  return tok;
}

int header_int(std::istream& in, const std::filesystem::path& path) {
  const std::string tok = header_token(in, path);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::Format, "bad header field '" + tok + "' in " + path.string());
}

}  // namespace

Tensor read_ppm(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  require(header_token(in, path) == "P6", ErrorCode::Format, path.string() + " is not a binary PPM");
  const int w = header_int(in, path);
  const int h = header_int(in, path);
  const int maxval = header_int(in, path);
  require(w > 0 && h > 0 && maxval > 0 && maxval < 65536, ErrorCode::Format, "bad PPM header in " + path.string());
  const int bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * 3 * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  require(in.gcount() == static_cast<std::streamsize>(raw.size()), ErrorCode::Format, "truncated PPM " + path.string());
  Tensor img(h, w, 3);
  for (std::size_t k = 0; k < img.size(); ++k) {
    const unsigned v = bytes == 1 ? raw[k] : (static_cast<unsigned>(raw[2 * k]) << 8) | raw[2 * k + 1];
    img.data()[k] = static_cast<double>(v) / maxval;
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
  require(image.channels() == 3, ErrorCode::ShapeMismatch, "PPM needs a three-channel image");
  std::vector<unsigned char> raw(image.size());
  for (std::size_t k = 0; k < image.size(); ++k)
    raw[k] = static_cast<unsigned char>(std::lround(std::clamp(image.data()[k], 0.0, 1.0) * 255.0));
  std::ofstream out = open_out(path);
  out << "P6\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

Tensor read_pfm(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  const std::string magic = header_token(in, path);
  require(magic == "PF" || magic == "Pf", ErrorCode::Format, path.string() + " is not a PFM file");
  const int channels = magic == "PF" ? 3 : 1;
  const int w = header_int(in, path);
  const int h = header_int(in, path);
  const std::string scale_tok = header_token(in, path);
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Format, "bad PFM scale in " + path.string());
  }
  require(w > 0 && h > 0 && scale != 0.0, ErrorCode::Format, "bad PFM header in " + path.string());
  const bool little = scale < 0.0;
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * channels * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  require(in.gcount() == static_cast<std::streamsize>(raw.size()), ErrorCode::Format, "truncated PFM " + path.string());
  Tensor img(h, w, channels);
  std::size_t k = 0;
  for (int r = h - 1; r >= 0; --r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < channels; ++ch, k += 4) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
          const std::uint32_t byte = raw[k + static_cast<std::size_t>(little ? b : 3 - b)];
          bits |= byte << (8 * b);
        }
        img(r, c, ch) = std::bit_cast<float>(bits);
      }
  return img;
}

void write_pfm(const std::filesystem::path& path, const Tensor& image) {
  require(image.channels() == 1 || image.channels() == 3, ErrorCode::ShapeMismatch,
          "PFM holds one or three channels");
  std::vector<unsigned char> raw;
  raw.reserve(image.size() * 4);
  for (int r = image.rows() - 1; r >= 0; --r)
    for (int c = 0; c < image.cols(); ++c)
      for (int ch = 0; ch < image.channels(); ++ch) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(image(r, c, ch)));
        for (int b = 0; b < 4; ++b) raw.push_back(static_cast<unsigned char>(bits >> (8 * b)));
      }
  std::ofstream out = open_out(path);
  out << (image.channels() == 3 ? "PF" : "Pf") << '\n' << image.cols() << ' ' << image.rows() << "\n-1.0\n";
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

std::vector<FramePose> read_poses(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<FramePose> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    FramePose fp;
    std::array<double, 6> v{};
    ss >> fp.frame;
    for (double& x : v) ss >> x;
    std::string rest;
    require(!ss.fail() && !(ss >> rest), ErrorCode::Format,
            path.string() + ":" + std::to_string(lineno) + ": expected 7 comma-separated fields");
    fp.pose = Pose6::from_array(v);
    out.push_back(fp);
  }
  return out;
}

void write_poses(const std::filesystem::path& path, const std::vector<FramePose>& poses) {
  std::ofstream out = open_out(path);
  char buf[64];
  for (const auto& fp : poses) {
    out << fp.frame;
    for (double v : fp.pose.to_array()) {
      std::snprintf(buf, sizeof buf, ", %.17g", v);
      out << buf;
    }
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

namespace {

struct Tap {
  int index;
  double weight;
};

// Sampling taps for each output position along one axis.
std::vector<std::vector<Tap>> axis_taps(int in, int out, bool wrap) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out));
  const double s = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    auto& t = taps[static_cast<std::size_t>(o)];
    if (out < in) {
      const double a = o * s;
      const double b = (o + 1) * s;
      for (int k = static_cast<int>(std::floor(a)); k < static_cast<int>(std::ceil(b)); ++k) {
        const double overlap = std::min(b, k + 1.0) - std::max(a, static_cast<double>(k));
        if (overlap > 0.0) t.push_back({std::min(k, in - 1), overlap / s});
      }
      continue;
    }
    const double x = (o + 0.5) * s - 0.5;
    const double x0 = std::floor(x);
    const double f = x - x0;
    auto fix = [&](int k) {
      if (wrap) return ((k % in) + in) % in;
      return std::clamp(k, 0, in - 1);
    };
    t.push_back({fix(static_cast<int>(x0)), 1.0 - f});
    if (f > 0.0) t.push_back({fix(static_cast<int>(x0) + 1), f});
  }
  return taps;
}

}  // namespace

Tensor resize_image(const Tensor& image, int rows, int cols, Seam seam) {
  require(rows > 0 && cols > 0, ErrorCode::BadArgument, "resize target must be positive");
  require(!image.empty(), ErrorCode::BadArgument, "cannot resize an empty image");
  const int C = image.channels();
  const auto row_taps = axis_taps(image.rows(), rows, false);
  const auto col_taps = axis_taps(image.cols(), cols, seam == Seam::Wrap);
  Tensor tmp(image.rows(), cols, C);
  for (int r = 0; r < image.rows(); ++r)
    for (int c = 0; c < cols; ++c)
      for (const Tap& t : col_taps[static_cast<std::size_t>(c)])
        for (int k = 0; k < C; ++k) tmp(r, c, k) += t.weight * image(r, t.index, k);
  Tensor out(rows, cols, C);
  for (int r = 0; r < rows; ++r)
    for (const Tap& t : row_taps[static_cast<std::size_t>(r)])
      for (int c = 0; c < cols; ++c)
        for (int k = 0; k < C; ++k) out(r, c, k) += t.weight * tmp(t.index, c, k);
  return out;
}

}  // namespace cylsfm
