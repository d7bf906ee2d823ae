// Copyright 2026 The mcdrop Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <bit>
#include <cstring>
#include <stdexcept>

#include "mcdrop/digest.hpp"
#include "mcdrop/jsonl.hpp"
#include "mcdrop/model.hpp"

namespace mcdrop {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are stored little-endian");

namespace {

constexpr char kMagic[8] = {'M', 'C', 'D', 'R', 'O', 'P', 'C', 'K'};

template <typename T>
void append_pod(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T read_pod(std::string_view bytes, std::size_t& offset) {
  if (offset + sizeof(T) > bytes.size()) throw std::runtime_error("truncated checkpoint");
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  offset += sizeof(T);
  return value;
}

json config_to_json(const ModelConfig& c) {
  return {{"family", to_string(c.family)},   {"layers", c.layers},
          {"heads", c.heads},                {"d_model", c.d_model},
          {"d_ffn", c.d_ffn},                {"vocab_size", c.vocab_size},
          {"max_seq_len", c.max_seq_len},    {"pooling", to_string(c.pooling)}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.family = family_from_string(j.at("family").get<std::string>());
  c.layers = j.at("layers").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.d_model = j.at("d_model").get<std::size_t>();
  c.d_ffn = j.at("d_ffn").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_seq_len = j.at("max_seq_len").get<std::size_t>();
  c.pooling = pooling_from_string(j.at("pooling").get<std::string>());
  c.validate();
  return c;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  json header;
  header["config"] = config_to_json(ckpt.config);
  header["training_seed"] = ckpt.training_seed;
  header["provenance"] = ckpt.provenance;
  header["vocabulary"] = ckpt.vocabulary;
  header["real_bytes"] = sizeof(Real);
  json params = json::array();
  for (const auto& p : ckpt.parameters) params.push_back({{"name", p.name}, {"shape", p.value.shape()}});
  header["parameters"] = std::move(params);
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  append_pod<std::uint32_t>(out, kCheckpointFormatVersion);
  append_pod<std::uint64_t>(out, header_text.size());
  out += header_text;
  for (const auto& p : ckpt.parameters) {
    const auto d = p.value.data();
    out.append(reinterpret_cast<const char*>(d.data()), d.size_bytes());
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint container (bad magic)");
  }
  std::size_t offset = sizeof(kMagic);
  const auto version = read_pod<std::uint32_t>(bytes, offset);
  if (version != kCheckpointFormatVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = read_pod<std::uint64_t>(bytes, offset);
  if (offset + header_len > bytes.size()) throw std::runtime_error("truncated checkpoint header");
  const json header = json::parse(bytes.substr(offset, header_len));
  offset += header_len;
  if (header.at("real_bytes").get<std::size_t>() != sizeof(Real)) {
    throw std::runtime_error("checkpoint real width does not match this build");
  }

  Checkpoint ckpt;
  ckpt.config = config_from_json(header.at("config"));
  ckpt.training_seed = header.at("training_seed").get<std::uint64_t>();
  ckpt.provenance = header.at("provenance").get<std::string>();
  ckpt.vocabulary = header.at("vocabulary").get<std::vector<std::string>>();

  const auto layout = parameter_layout(ckpt.config);
  const auto& params = header.at("parameters");
  if (params.size() != layout.size()) {
    throw std::runtime_error("checkpoint parameter set does not match the architecture");
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto name = params[i].at("name").get<std::string>();
    const auto shape = params[i].at("shape").get<Shape>();
    if (name != layout[i].first || shape != layout[i].second) {
      throw std::runtime_error("checkpoint parameter '" + name + "' does not match the architecture");
    }
    const std::size_t n = shape_numel(shape);
    if (offset + n * sizeof(Real) > bytes.size()) throw std::runtime_error("truncated parameter blob");
    std::vector<Real> values(n);
    std::memcpy(values.data(), bytes.data() + offset, n * sizeof(Real));
    offset += n * sizeof(Real);
    ckpt.parameters.push_back({name, Tensor(shape, std::move(values))});
  }
  if (offset != bytes.size()) throw std::runtime_error("trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

std::string checkpoint_digest(const Checkpoint& ckpt) {
  return sha256_hex(serialize_checkpoint(ckpt));
}

}  // namespace mcdrop
