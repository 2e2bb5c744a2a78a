#ifndef RFFSVM_MODEL_IO_HPP
#define RFFSVM_MODEL_IO_HPP

// Model files are a single JSON object. Floating-point arrays are stored as
// base64 of little-endian float64 so they round-trip exactly. Feature maps
// are stored as their descriptor only; W and b are regenerated from the seed.

#include "rffsvm/core.hpp"
#include "rffsvm/dataset.hpp"
#include "rffsvm/pipeline.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace rffsvm {

inline constexpr int kModelFormatVersion = 1;

namespace base64 {

inline constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string encode(std::span<const unsigned char> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const auto rest = bytes.size() - i; rest > 0) {
    const unsigned v = (bytes[i] << 16) | (rest == 2 ? bytes[i + 1] << 8 : 0);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

inline std::vector<unsigned char> decode(std::string_view text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (std::size_t k = 0; k < kAlphabet.size(); ++k) lookup[static_cast<unsigned char>(kAlphabet[k])] = static_cast<int>(k);
  if (text.size() % 4 != 0) throw Error("base64 payload has invalid length");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int q[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char ch = text[i + static_cast<std::size_t>(k)];
      if (ch == '=' && i + 4 == text.size() && k >= 2) {
        q[k] = 0;
        ++pad;
      } else if (pad > 0 || (q[k] = lookup[static_cast<unsigned char>(ch)]) < 0) {
        throw Error("base64 payload has an invalid character");
      }
    }
    const unsigned v = (unsigned(q[0]) << 18) | (unsigned(q[1]) << 12) | (unsigned(q[2]) << 6) | unsigned(q[3]);
    out.push_back(static_cast<unsigned char>(v >> 16));
    if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
  }
  return out;
}

}  // namespace base64

namespace detail {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

inline std::string pack_doubles(const double* data, std::size_t count) {
  return base64::encode({reinterpret_cast<const unsigned char*>(data), count * sizeof(double)});
}

inline std::vector<double> unpack_doubles(const nlohmann::json& j, std::size_t expected, const char* what) {
  const auto bytes = base64::decode(j.get<std::string>());
  if (bytes.size() != expected * sizeof(double))
    throw Error(std::string("model file: '") + what + "' holds " + std::to_string(bytes.size() / sizeof(double)) +
                " values, expected " + std::to_string(expected));
  std::vector<double> out(expected);
  if (expected) std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

inline nlohmann::json kernel_json(const KernelSpec& k) {
  nlohmann::json j{{"family", family_name(k.family())}};
  if (is_shift_invariant(k.family())) j["gamma"] = k.gamma();
  return j;
}

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
  const auto family = parse_family(j.at("family").get<std::string>());
  return family == KernelFamily::linear ? KernelSpec::linear() : KernelSpec(family, j.at("gamma").get<double>());
}

}  // namespace detail

inline nlohmann::json map_descriptor_json(const MapDescriptor& d) {
  return {{"version", d.version},
          {"family", family_name(d.spec.family())},
          {"gamma", d.spec.gamma()},
          {"N", d.input_dim},
          {"M", d.target_dim},
          {"seed", d.seed}};
}

inline MapDescriptor map_descriptor_from_json(const nlohmann::json& j) {
  MapDescriptor d;
  d.version = j.at("version").get<int>();
  if (d.version != MapDescriptor::kVersion)
    throw Error("unsupported feature-map version " + std::to_string(d.version));
  d.spec = KernelSpec(parse_family(j.at("family").get<std::string>()), j.at("gamma").get<double>());
  d.input_dim = j.at("N").get<std::size_t>();
  d.target_dim = j.at("M").get<std::size_t>();
  d.seed = j.at("seed").get<std::uint64_t>();
  return d;
}

inline std::string serialize_model(const Predictor& p) {
  using nlohmann::json;
  const auto& svm = p.svm;
  json j;
  j["format_version"] = kModelFormatVersion;
  j["mode"] = mode_name(p.mode);
  j["kernel"] = detail::kernel_json(p.kernel);
  j["normalizer"] = {{"dim", p.normalizer.dim()},
                     {"mean", detail::pack_doubles(p.normalizer.mean().data(), p.normalizer.dim())},
                     {"std", detail::pack_doubles(p.normalizer.stddev().data(), p.normalizer.dim())}};
  if (p.map) j["map"] = map_descriptor_json(p.map->descriptor());
  j["classes"] = svm.class_labels;
  j["svm"] = {{"regularization_c", svm.config.regularization_c},
              {"tolerance", svm.config.tolerance},
              {"max_iterations", svm.config.max_iterations}};

  const std::size_t C = svm.class_count();
  if (svm.mode == SvmMode::linear_explicit) {
    const std::size_t width = C ? static_cast<std::size_t>(svm.linear.front().weights.size()) : 0;
    std::vector<double> flat;
    flat.reserve(C * width);
    for (const auto& m : svm.linear) flat.insert(flat.end(), m.weights.data(), m.weights.data() + m.weights.size());
    j["linear"] = {{"width", width}, {"weights", detail::pack_doubles(flat.data(), flat.size())}};
  } else {
    const auto s = static_cast<std::size_t>(p.support_vectors.rows());
    std::vector<double> coef;
    coef.reserve(C * s);
    for (const auto& m : svm.kernel) coef.insert(coef.end(), m.coefficients.data(), m.coefficients.data() + m.coefficients.size());
    j["kernel_model"] = {{"support_count", s},
                         {"support_vectors", detail::pack_doubles(p.support_vectors.data(), static_cast<std::size_t>(p.support_vectors.size()))},
                         {"coefficients", detail::pack_doubles(coef.data(), coef.size())}};
  }
  return j.dump(1) + "\n";
}

inline Predictor deserialize_model(std::string_view text, const std::string& source = "<model>") {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(source + ": not a valid model file (" + e.what() + ")");
  }
  try {
    if (!j.is_object() || !j.contains("format_version")) throw Error(source + ": missing format_version");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw Error(source + ": unsupported model format_version " + std::to_string(version) + " (expected " +
                  std::to_string(kModelFormatVersion) + ")");
    Predictor p;
    p.mode = parse_mode(j.at("mode").get<std::string>());
    p.kernel = detail::kernel_from_json(j.at("kernel"));
    const auto& jn = j.at("normalizer");
    const auto N = jn.at("dim").get<std::size_t>();
    const auto mean = detail::unpack_doubles(jn.at("mean"), N, "normalizer.mean");
    const auto sd = detail::unpack_doubles(jn.at("std"), N, "normalizer.std");
    p.normalizer = Normalizer(Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(N)),
                              Eigen::Map<const Vector>(sd.data(), static_cast<Eigen::Index>(N)));

    auto& svm = p.svm;
    svm.class_labels = j.at("classes").get<std::vector<std::string>>();
    const std::size_t C = svm.class_labels.size();
    if (C < 2) throw Error(source + ": model needs at least 2 classes");
    const auto& js = j.at("svm");
    svm.config.regularization_c = js.at("regularization_c").get<double>();
    svm.config.tolerance = js.at("tolerance").get<double>();
    svm.config.max_iterations = js.at("max_iterations").get<int>();

    if (p.mode == ExperimentMode::random_features) {
      const auto desc = map_descriptor_from_json(j.at("map"));
      if (desc.input_dim != N) throw Error(source + ": map input dimension differs from normalizer");
      if (!(desc.spec == p.kernel)) throw Error(source + ": map kernel differs from model kernel");
      p.map = std::make_shared<const RandomFeatureMap>(build_map(desc));
    }

    if (j.contains("linear")) {
      svm.mode = SvmMode::linear_explicit;
      const auto width = j.at("linear").at("width").get<std::size_t>();
      const std::size_t expected_width = (p.map ? p.map->target_dim() : N) + 1;
      if (width != expected_width) throw Error(source + ": linear weight width mismatch");
      const auto flat = detail::unpack_doubles(j.at("linear").at("weights"), C * width, "linear.weights");
      svm.linear.resize(C);
      for (std::size_t c = 0; c < C; ++c)
        svm.linear[c].weights = Eigen::Map<const Vector>(flat.data() + c * width, static_cast<Eigen::Index>(width));
    } else {
      if (p.mode != ExperimentMode::exact_kernel) throw Error(source + ": missing linear weights");
      svm.mode = SvmMode::kernel_precomputed;
      const auto& jk = j.at("kernel_model");
      const auto s = jk.at("support_count").get<std::size_t>();
      const auto sv = detail::unpack_doubles(jk.at("support_vectors"), s * N, "kernel_model.support_vectors");
      const auto coef = detail::unpack_doubles(jk.at("coefficients"), C * s, "kernel_model.coefficients");
      p.support_vectors = Eigen::Map<const Matrix>(sv.data(), static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(N));
      svm.kernel.resize(C);
      for (std::size_t c = 0; c < C; ++c) {
        auto& m = svm.kernel[c];
        m.coefficients = Eigen::Map<const Vector>(coef.data() + c * s, static_cast<Eigen::Index>(s));
        for (std::size_t k = 0; k < s; ++k)
          if (m.coefficients[static_cast<Eigen::Index>(k)] != 0.0) m.support_indices.push_back(k);
      }
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(source + ": malformed model file (" + e.what() + ")");
  }
}

inline void save_model(const Predictor& p, const std::string& path) { write_file_atomic(path, serialize_model(p)); }

inline Predictor load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str(), path);
}

}  // namespace rffsvm

#endif  // RFFSVM_MODEL_IO_HPP
