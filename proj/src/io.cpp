#include "jfbvo/io.hpp"

#include <Eigen/LU>
#include <png.h>

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace jfbvo {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view tok) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == text.size()) break;
    start = nl + 1;
  }
  return lines;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

Image load_pgm(const fs::path& path, const std::string& bytes) {
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  const std::string magic = next_token();
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw IoError("load_image: malformed PGM header in " + path.string());
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw IoError("load_image: invalid PGM dimensions in " + path.string());

  Image img(w, h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (magic == "P5") {
    ++pos;  // single whitespace after maxval
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + n * bpp) throw IoError("load_image: truncated PGM data in " + path.string());
    for (std::size_t i = 0; i < n; ++i) {
      unsigned value = bpp == 1 ? static_cast<unsigned char>(bytes[pos + i])
                                : (static_cast<unsigned char>(bytes[pos + 2 * i]) << 8) |
                                      static_cast<unsigned char>(bytes[pos + 2 * i + 1]);
      img.data[i] = static_cast<std::uint8_t>(maxval == 255 ? value : value * 255 / maxval);
    }
  } else if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string tok = next_token();
      if (tok.empty()) throw IoError("load_image: truncated PGM data in " + path.string());
      img.data[i] = static_cast<std::uint8_t>(std::stoi(tok) * 255 / maxval);
    }
  } else {
    throw IoError("load_image: unsupported PNM type '" + magic + "' in " + path.string());
  }
  return img;
}

Image load_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError("load_image: cannot decode PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  Image img(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, img.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("load_image: cannot decode PNG " + path.string() + ": " + msg);
  }
  return img;
}

}  // namespace

StereoRig parse_calibration(std::string_view text, int width, int height) {
  std::optional<std::array<double, 12>> p0, p1;
  int line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    std::optional<std::array<double, 12>>* slot = nullptr;
    if (tokens[0] == "P0:") slot = &p0;
    else if (tokens[0] == "P1:") slot = &p1;
    if (!slot) continue;
    if (tokens.size() != 13)
      throw ParseError("calibration line " + std::to_string(line_no) + " (" + std::string(tokens[0]) +
                       "): expected 12 numbers, got " + std::to_string(tokens.size() - 1));
    std::array<double, 12> vals{};
    for (int i = 0; i < 12; ++i) {
      auto v = to_double(tokens[i + 1]);
      if (!v)
        throw ParseError("calibration line " + std::to_string(line_no) + ": bad number '" +
                         std::string(tokens[i + 1]) + "'");
      vals[i] = *v;
    }
    *slot = vals;
  }
  if (!p0) throw ParseError("calibration: missing line P0:");
  if (!p1) throw ParseError("calibration: missing line P1:");

  StereoRig rig;
  rig.focal = (*p0)[0];
  rig.cu = (*p0)[2];
  rig.cv = (*p0)[6];
  if (!(rig.focal > 0.0) || !((*p1)[0] > 0.0)) throw ParseError("calibration P0:/P1: non-positive focal length");
  rig.baseline = -(*p1)[3] / (*p1)[0];
  if (!(rig.baseline > 0.0))
    throw ParseError("calibration P1: derived baseline " + format_double(rig.baseline) + " is not positive");
  rig.width = width;
  rig.height = height;
  return rig;
}

std::string format_calibration(const StereoRig& rig) {
  std::ostringstream out;
  auto row = [&](const char* name, double tx) {
    out << name << ' ' << format_double(rig.focal) << " 0 " << format_double(rig.cu) << ' ' << format_double(tx)
        << " 0 " << format_double(rig.focal) << ' ' << format_double(rig.cv) << " 0 0 0 1 0\n";
  };
  row("P0:", 0.0);
  row("P1:", -rig.focal * rig.baseline);
  return out.str();
}

Trajectory read_poses(std::string_view text) {
  Trajectory t;
  int line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 12)
      throw ParseError("poses line " + std::to_string(line_no) + ": expected 12 numbers, got " +
                       std::to_string(tokens.size()));
    Mat4 m = Mat4::Identity();
    for (int i = 0; i < 12; ++i) {
      auto v = to_double(tokens[i]);
      if (!v)
        throw ParseError("poses line " + std::to_string(line_no) + ": bad number '" + std::string(tokens[i]) + "'");
      m(i / 4, i % 4) = *v;
    }
    const Mat3 r = m.topLeftCorner<3, 3>();
    if (Rotation::orthonormalityResidual(r) > 1e-3 || r.determinant() < 0.0)
      throw ParseError("poses line " + std::to_string(line_no) + ": rotation block is not a rotation");
    const Pose p = Pose::fromMatrix(m);
    if (t.empty() && (p.matrix() - Mat4::Identity()).cwiseAbs().maxCoeff() > 1e-6)
      throw ParseError("poses line " + std::to_string(line_no) + ": first pose is not the identity");
    t.append(p, static_cast<int>(t.size()));
  }
  return t;
}

std::string write_trajectory(const Trajectory& t) {
  std::string out;
  for (const Pose& p : t.poses) {
    const Mat4 m = p.matrix();
    for (int i = 0; i < 12; ++i) {
      if (i) out += ' ';
      out += format_double(m(i / 4, i % 4) == 0.0 ? 0.0 : m(i / 4, i % 4));
    }
    out += '\n';
  }
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

Image load_image(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_image: cannot open " + path.string());
  char sig[8] = {};
  in.read(sig, 8);
  const std::streamsize got = in.gcount();
  in.close();
  if (got >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(sig), 0, 8) == 0) return load_png(path);
  if (got >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2')) return load_pgm(path, read_text_file(path));
  throw IoError("load_image: unsupported image format " + path.string());
}

void save_pgm(const fs::path& path, const Image& img) {
  std::string bytes = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  bytes.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  write_text_file(path, bytes);
}

std::string frame_stem(int frame) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", frame);
  return buf;
}

fs::path DatasetHandle::image_path(int camera, int frame) const {
  return root / "sequences" / sequence / ("image_" + std::to_string(camera)) / (frame_stem(frame) + image_extension);
}

DatasetHandle open_dataset(const fs::path& root, const std::string& sequence) {
  DatasetHandle ds;
  ds.root = root;
  ds.sequence = sequence;
  const fs::path seq_dir = root / "sequences" / sequence;
  if (!fs::is_directory(seq_dir)) throw IoError("dataset: no sequence directory " + seq_dir.string());

  for (const char* ext : {".png", ".pgm"}) {
    if (fs::exists(seq_dir / "image_0" / (frame_stem(0) + ext))) {
      ds.image_extension = ext;
      break;
    }
  }
  if (ds.image_extension.empty()) throw IoError("dataset: no frame 000000 in " + (seq_dir / "image_0").string());

  auto count = [&](int cam) {
    int n = 0;
    while (fs::exists(ds.image_path(cam, n))) ++n;
    return n;
  };
  const int left = count(0);
  const int right = count(1);
  if (left != right)
    throw IoError("dataset: image_0 has " + std::to_string(left) + " frames but image_1 has " +
                  std::to_string(right));
  ds.frame_count = left;

  const Image first = load_image(ds.image_path(0, 0));
  ds.rig = parse_calibration(read_text_file(seq_dir / "calib.txt"), first.width, first.height);

  const fs::path poses = root / "poses" / (sequence + ".txt");
  if (fs::exists(poses)) ds.ground_truth = read_poses(read_text_file(poses));
  return ds;
}

}  // namespace jfbvo
