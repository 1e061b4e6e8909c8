// SPDX-License-Identifier: Apache-2.0
#include "fastssl/sim/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fastssl/error.hpp"

namespace fastssl::sim {

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  return v;
}

std::string shape_text(const Shape &s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k)
      out += 'x';
    out += std::to_string(s[k]);
  }
  return out;
}

Shape parse_shape(const std::string &text, const std::string &where) {
  Shape s;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      throw IoError(where + ": bad shape '" + text + "'");
    s.push_back(std::stoull(part));
  }
  if (s.empty())
    throw IoError(where + ": empty shape");
  return s;
}

} // namespace

void save_checkpoint(const std::string &prefix, const ModelParams<float> &params) {
  std::ofstream man(prefix + ".manifest", std::ios::binary);
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  if (!man || !bin)
    throw IoError("cannot write checkpoint " + prefix);
  for (std::size_t id = 0; id < kNumParams; ++id) {
    man << param_name(id) << ' ' << shape_text(params[id].shape) << '\n';
    for (float v : params[id].data) {
      const std::uint32_t u = to_le(std::bit_cast<std::uint32_t>(v));
      char bytes[4];
      std::memcpy(bytes, &u, 4);
      bin.write(bytes, 4);
    }
  }
  if (!man.flush() || !bin.flush())
    throw IoError("failed writing checkpoint " + prefix);
}

ModelParams<float> load_checkpoint(const std::string &prefix) {
  std::ifstream man(prefix + ".manifest", std::ios::binary);
  std::ifstream bin(prefix + ".bin", std::ios::binary);
  if (!man || !bin)
    throw IoError("cannot open checkpoint " + prefix);

  std::array<Shape, kNumParams> shapes;
  std::string line;
  std::size_t id = 0;
  while (std::getline(man, line)) {
    if (line.empty())
      continue;
    const std::string where = prefix + ".manifest line " + std::to_string(id + 1);
    if (id >= kNumParams)
      throw IoError(where + ": too many tensors");
    const auto sp = line.find(' ');
    if (sp == std::string::npos)
      throw IoError(where + ": expected 'name shape'");
    if (line.substr(0, sp) != param_name(id))
      throw IoError(where + ": expected " + std::string(param_name(id)));
    shapes[id] = parse_shape(line.substr(sp + 1), where);
    ++id;
  }
  if (id != kNumParams)
    throw IoError(prefix + ".manifest: expected " + std::to_string(kNumParams) +
                  " tensors, found " + std::to_string(id));

  // conv weights are [out, in, 3, 3]; dense weights [out, in].
  ModelSpec spec;
  if (shapes[kConv1W].size() != 4 || shapes[kConv2W].size() != 4 ||
      shapes[kConv3W].size() != 4 || shapes[kProj1W].size() != 2 ||
      shapes[kProj2W].size() != 2 || shapes[kPred1W].size() != 2)
    throw IoError(prefix + ".manifest: unexpected tensor rank");
  spec.in_channels = static_cast<int>(shapes[kConv1W][1]);
  spec.conv_channels = {static_cast<int>(shapes[kConv1W][0]),
                        static_cast<int>(shapes[kConv2W][0]),
                        static_cast<int>(shapes[kConv3W][0])};
  spec.proj_hidden = static_cast<int>(shapes[kProj1W][0]);
  spec.embed_dim = static_cast<int>(shapes[kProj2W][0]);
  spec.pred_hidden = static_cast<int>(shapes[kPred1W][0]);
  ModelParams<float> params;
  try {
    spec.validate();
    params = make_params<float>(spec);
  } catch (const Error &e) {
    throw IoError(prefix + ".manifest: " + e.what());
  }
  for (std::size_t k = 0; k < kNumParams; ++k) {
    if (params[k].shape != shapes[k])
      throw IoError(prefix + ".manifest: inconsistent shape for " +
                    std::string(param_name(k)));
    for (float &v : params[k].data) {
      char bytes[4];
      if (!bin.read(bytes, 4))
        throw IoError(prefix + ".bin: truncated");
      std::uint32_t u;
      std::memcpy(&u, bytes, 4);
      v = std::bit_cast<float>(to_le(u));
    }
  }
  if (bin.peek() != std::char_traits<char>::eof())
    throw IoError(prefix + ".bin: trailing data");
  return params;
}

} // namespace fastssl::sim
