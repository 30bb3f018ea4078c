#pragma once

// NTU-style `.skeleton` text files and the channel-augmented feature tensor
// outputs (raw float32 blob with a key=value sidecar header, or CSV).

#include <Eigen/Core>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "stdadi/errors.hpp"

namespace stdadi {

inline constexpr std::size_t kDefaultMaxBodies = 2;
inline constexpr std::size_t kNtuJointCount = 25;
inline constexpr std::size_t kInvariantCount = 8;
inline constexpr std::size_t kCoordinateChannels = 3;
inline constexpr std::size_t kFeatureChannels = kCoordinateChannels + kInvariantCount;

inline constexpr std::array<std::string_view, kFeatureChannels> kChannelNames = {
    "x", "y", "z", "I1", "I2", "I3", "I4", "I5", "I6", "I7", "I8"};

/// Positions are stored frame-major: (frames x bodies x joints x 3).
struct SkeletonSequence {
  std::size_t frame_count = 0;
  std::size_t body_count = 0;
  std::size_t joint_count = 0;
  std::vector<double> positions;
  std::vector<std::uint8_t> body_present;

  SkeletonSequence() = default;
  SkeletonSequence(std::size_t frames, std::size_t bodies, std::size_t joints)
      : frame_count(frames),
        body_count(bodies),
        joint_count(joints),
        positions(frames * bodies * joints * 3, 0.0),
        body_present(frames * bodies, 0) {}

  std::size_t offset(std::size_t frame, std::size_t body, std::size_t joint) const {
    return ((frame * body_count + body) * joint_count + joint) * 3;
  }

  Eigen::Vector3d position(std::size_t frame, std::size_t body, std::size_t joint) const {
    const std::size_t o = offset(frame, body, joint);
    return {positions[o], positions[o + 1], positions[o + 2]};
  }

  void set_position(std::size_t frame, std::size_t body, std::size_t joint, const Eigen::Vector3d& p) {
    const std::size_t o = offset(frame, body, joint);
    positions[o] = p[0];
    positions[o + 1] = p[1];
    positions[o + 2] = p[2];
  }

  bool present(std::size_t frame, std::size_t body) const { return body_present[frame * body_count + body] != 0; }
  void set_present(std::size_t frame, std::size_t body, bool value) {
    body_present[frame * body_count + body] = value ? 1 : 0;
  }

  bool operator==(const SkeletonSequence&) const = default;
};

/// Returns a copy with `bodies` body slots; extra slots are absent and zero.
inline SkeletonSequence pad_bodies(const SkeletonSequence& seq, std::size_t bodies) {
  if (bodies < seq.body_count) throw ShapeMismatch("cannot pad to fewer body slots than present");
  SkeletonSequence out(seq.frame_count, bodies, seq.joint_count);
  for (std::size_t f = 0; f < seq.frame_count; ++f) {
    for (std::size_t b = 0; b < seq.body_count; ++b) {
      out.set_present(f, b, seq.present(f, b));
      for (std::size_t j = 0; j < seq.joint_count; ++j) out.set_position(f, b, j, seq.position(f, b, j));
    }
  }
  return out;
}

/// Channel-augmented tensor, C-order (channels x frames x joints x bodies).
struct FeatureTensor {
  std::size_t channels = kFeatureChannels;
  std::size_t frames = 0;
  std::size_t joints = 0;
  std::size_t bodies = 0;
  std::vector<double> data;

  FeatureTensor() = default;
  FeatureTensor(std::size_t frames_, std::size_t joints_, std::size_t bodies_)
      : frames(frames_), joints(joints_), bodies(bodies_), data(kFeatureChannels * frames_ * joints_ * bodies_, 0.0) {}

  std::size_t index(std::size_t c, std::size_t f, std::size_t j, std::size_t b) const {
    return ((c * frames + f) * joints + j) * bodies + b;
  }
  double& at(std::size_t c, std::size_t f, std::size_t j, std::size_t b) { return data[index(c, f, j, b)]; }
  double at(std::size_t c, std::size_t f, std::size_t j, std::size_t b) const { return data[index(c, f, j, b)]; }

  bool operator==(const FeatureTensor&) const = default;
};

struct ParseOptions {
  std::size_t max_bodies = kDefaultMaxBodies;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(std::move(line));
    }
    while (!lines_.empty() && split_fields(lines_.back()).empty()) lines_.pop_back();
  }

  bool done() const { return next_ >= lines_.size(); }
  std::size_t line_number() const { return next_; }  // 1-based number of the last line taken

  std::string_view take(const char* expected) {
    if (done()) throw ParseError(lines_.size() + 1, std::string("unexpected end of input, expected ") + expected);
    return lines_[next_++];
  }

 private:
  std::vector<std::string> lines_;
  std::size_t next_ = 0;
};

inline std::size_t parse_count(std::string_view line, std::size_t line_number, const char* what) {
  const auto fields = split_fields(line);
  if (fields.size() != 1) throw ParseError(line_number, std::string("expected a single ") + what);
  std::size_t value = 0;
  const auto* end = fields[0].data() + fields[0].size();
  const auto [ptr, ec] = std::from_chars(fields[0].data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError(line_number, std::string("malformed ") + what);
  return value;
}

inline double parse_real(std::string_view field, std::size_t line_number) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError(line_number, "malformed coordinate '" + std::string(field) + "'");
  if (!std::isfinite(value)) throw ParseError(line_number, "non-finite coordinate");
  return value;
}

inline void append_shortest(std::string& out, double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  out.append(buffer, ptr);
}

inline void append_shortest(std::string& out, float value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  out.append(buffer, ptr);
}

}  // namespace detail

/// Parses the NTU layout: frame count; per frame a body count; per body a
/// metadata line, a joint count and one line per joint starting with x y z.
/// Bodies past max_bodies are dropped in order of appearance.
inline SkeletonSequence parse_skeleton(std::istream& in, const ParseOptions& options = {}) {
  detail::LineReader reader(in);
  const std::size_t declared_frames = detail::parse_count(reader.take("frame count"), 1, "frame count");
  if (declared_frames == 0) throw ParseError(1, "frame count must be positive");

  struct Body {
    std::vector<double> xyz;
  };
  std::vector<std::vector<Body>> frames;
  frames.reserve(declared_frames);
  std::size_t joint_count = 0;
  std::size_t max_seen = 0;

  for (std::size_t f = 0; f < declared_frames; ++f) {
    if (reader.done()) {
      throw FrameCountMismatch(reader.line_number() + 1, "declared " + std::to_string(declared_frames) +
                                                             " frames but input ends after " + std::to_string(f));
    }
    const std::size_t bodies = detail::parse_count(reader.take("body count"), reader.line_number(), "body count");
    std::vector<Body> kept;
    for (std::size_t b = 0; b < bodies; ++b) {
      reader.take("body metadata");
      const std::size_t joints = detail::parse_count(reader.take("joint count"), reader.line_number(), "joint count");
      if (joints == 0) throw ParseError(reader.line_number(), "joint count must be positive");
      if (joint_count == 0) {
        joint_count = joints;
      } else if (joints != joint_count) {
        throw ParseError(reader.line_number(), "inconsistent joint count " + std::to_string(joints) + ", expected " +
                                                   std::to_string(joint_count));
      }
      Body body;
      body.xyz.reserve(joints * 3);
      for (std::size_t j = 0; j < joints; ++j) {
        const auto fields = detail::split_fields(reader.take("joint line"));
        if (fields.size() < 3) throw ParseError(reader.line_number(), "joint line needs at least 3 fields");
        for (int c = 0; c < 3; ++c) body.xyz.push_back(detail::parse_real(fields[c], reader.line_number()));
      }
      if (kept.size() < options.max_bodies) kept.push_back(std::move(body));
    }
    max_seen = std::max(max_seen, kept.size());
    frames.push_back(std::move(kept));
  }
  if (!reader.done()) {
    throw FrameCountMismatch(reader.line_number() + 1,
                             "content after the declared " + std::to_string(declared_frames) + " frames");
  }

  SkeletonSequence seq(declared_frames, max_seen, joint_count == 0 ? kNtuJointCount : joint_count);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (std::size_t b = 0; b < frames[f].size(); ++b) {
      seq.set_present(f, b, true);
      std::copy(frames[f][b].xyz.begin(), frames[f][b].xyz.end(), seq.positions.begin() + seq.offset(f, b, 0));
    }
  }
  return seq;
}

inline SkeletonSequence parse_skeleton_file(const std::filesystem::path& path, const ParseOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_skeleton(in, options);
}

/// Writes NTU layout with placeholder metadata and trailing joint fields.
/// Present bodies must occupy a prefix of the slots in every frame.
inline void write_skeleton(std::ostream& out, const SkeletonSequence& seq) {
  std::string text;
  text += std::to_string(seq.frame_count) + '\n';
  for (std::size_t f = 0; f < seq.frame_count; ++f) {
    std::size_t bodies = 0;
    while (bodies < seq.body_count && seq.present(f, bodies)) ++bodies;
    for (std::size_t b = bodies; b < seq.body_count; ++b) {
      if (seq.present(f, b)) throw std::invalid_argument("present bodies must be a prefix of the body slots");
    }
    text += std::to_string(bodies) + '\n';
    for (std::size_t b = 0; b < bodies; ++b) {
      text += std::to_string(b) + " 0 0 0 0 0 0 0 0 2\n";
      text += std::to_string(seq.joint_count) + '\n';
      for (std::size_t j = 0; j < seq.joint_count; ++j) {
        const std::size_t o = seq.offset(f, b, j);
        for (int c = 0; c < 3; ++c) {
          detail::append_shortest(text, seq.positions[o + c]);
          text += ' ';
        }
        text += "0 0 0 0 0 0 0 0 2\n";
      }
    }
  }
  out << text;
}

enum class TensorFormat { raw_f32, csv };

inline std::filesystem::path header_path_for(const std::filesystem::path& blob) {
  return std::filesystem::path(blob.string() + ".hdr");
}

namespace detail {

// Invariant channels are written in float32; keep them inside the open
// interval even where the nearest float would round onto +/-1.
inline float to_output_float(double value, std::size_t channel, bool clamp_invariants) {
  float v = static_cast<float>(value);
  if (clamp_invariants && channel >= kCoordinateChannels) {
    constexpr float kBelowOne = 0x1.fffffep-1f;
    if (v >= 1.0f) v = kBelowOne;
    if (v <= -1.0f) v = -kBelowOne;
  }
  return v;
}

inline bool invariants_squashed(const FeatureTensor& tensor) {
  for (std::size_t i = kCoordinateChannels * tensor.frames * tensor.joints * tensor.bodies; i < tensor.data.size();
       ++i) {
    if (std::abs(tensor.data[i]) >= 1.0) return false;
  }
  return true;
}

inline void check_writable(const FeatureTensor& tensor) {
  if (tensor.channels != kFeatureChannels ||
      tensor.data.size() != tensor.channels * tensor.frames * tensor.joints * tensor.bodies) {
    throw ShapeMismatch("feature tensor data does not match its shape");
  }
  for (double v : tensor.data) {
    if (!std::isfinite(v)) throw std::domain_error("feature tensor contains a non-finite value");
  }
}

}  // namespace detail

/// raw_f32: `destination` receives a little-endian C-order float32 blob and
/// `destination.hdr` a key=value header. csv: one row per (frame, joint, body).
/// Values already strictly inside (-1, 1) in the invariant channels stay there
/// after the float32 conversion.
inline void write_feature_tensor(const FeatureTensor& tensor, const std::filesystem::path& destination,
                                 TensorFormat format) {
  detail::check_writable(tensor);
  const bool clamp = detail::invariants_squashed(tensor);

  if (format == TensorFormat::raw_f32) {
    std::vector<char> blob(tensor.data.size() * sizeof(float));
    for (std::size_t i = 0; i < tensor.data.size(); ++i) {
      const std::size_t channel = i / (tensor.frames * tensor.joints * tensor.bodies);
      const float v = detail::to_output_float(tensor.data[i], channel, clamp);
      auto bits = std::bit_cast<std::uint32_t>(v);
      if constexpr (std::endian::native == std::endian::big) {
        bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
      }
      std::memcpy(blob.data() + i * sizeof(float), &bits, sizeof(float));
    }
    std::ofstream out(destination, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + destination.string() + " for writing");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw std::runtime_error("write failed: " + destination.string());

    std::string header;
    header += "format=stdadi-feature-tensor\n";
    header += "version=1\n";
    header += "dtype=float32\n";
    header += "endianness=little\n";
    header += "order=C\n";
    header += "dims=channels,frames,joints,bodies\n";
    header += "shape=" + std::to_string(tensor.channels) + ',' + std::to_string(tensor.frames) + ',' +
              std::to_string(tensor.joints) + ',' + std::to_string(tensor.bodies) + '\n';
    header += "channel_order=";
    for (std::size_t c = 0; c < kChannelNames.size(); ++c) {
      if (c) header += ',';
      header += kChannelNames[c];
    }
    header += "\n";
    header += "bytes=" + std::to_string(blob.size()) + '\n';
    std::ofstream hdr(header_path_for(destination), std::ios::trunc);
    if (!hdr) throw std::runtime_error("cannot open header for " + destination.string());
    hdr << header;
    if (!hdr) throw std::runtime_error("write failed: " + header_path_for(destination).string());
    return;
  }

  std::string text = "frame,joint,body";
  for (auto name : kChannelNames) {
    text += ',';
    text += name;
  }
  text += '\n';
  for (std::size_t f = 0; f < tensor.frames; ++f) {
    for (std::size_t j = 0; j < tensor.joints; ++j) {
      for (std::size_t b = 0; b < tensor.bodies; ++b) {
        text += std::to_string(f) + ',' + std::to_string(j) + ',' + std::to_string(b);
        for (std::size_t c = 0; c < tensor.channels; ++c) {
          text += ',';
          detail::append_shortest(text, detail::to_output_float(tensor.at(c, f, j, b), c, clamp));
        }
        text += '\n';
      }
    }
  }
  std::ofstream out(destination, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + destination.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + destination.string());
}

/// Reads a raw_f32 blob and its header back into double storage.
inline FeatureTensor read_feature_tensor_raw(const std::filesystem::path& blob_path) {
  std::ifstream hdr(header_path_for(blob_path));
  if (!hdr) throw std::runtime_error("cannot open header for " + blob_path.string());
  std::map<std::string, std::string> keys;
  std::string line;
  while (std::getline(hdr, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) keys[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (keys["dtype"] != "float32" || keys["endianness"] != "little" || keys["order"] != "C") {
    throw std::runtime_error("unsupported tensor header in " + blob_path.string());
  }
  std::array<std::size_t, 4> shape{};
  {
    std::istringstream dims(keys["shape"]);
    char comma = 0;
    dims >> shape[0] >> comma >> shape[1] >> comma >> shape[2] >> comma >> shape[3];
    if (!dims || shape[0] != kFeatureChannels) throw std::runtime_error("bad shape in header of " + blob_path.string());
  }
  FeatureTensor tensor(shape[1], shape[2], shape[3]);
  std::ifstream in(blob_path, std::ios::binary);
  std::vector<char> blob(tensor.data.size() * sizeof(float));
  in.read(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!in || in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("blob size does not match header: " + blob_path.string());
  }
  for (std::size_t i = 0; i < tensor.data.size(); ++i) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, blob.data() + i * sizeof(float), sizeof(float));
    if constexpr (std::endian::native == std::endian::big) {
      bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
    }
    tensor.data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return tensor;
}

}  // namespace stdadi
