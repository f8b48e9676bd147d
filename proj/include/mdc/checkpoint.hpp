// Copyright 2026 The mdc Authors
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

#ifndef MDC_CHECKPOINT_HPP_
#define MDC_CHECKPOINT_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mdc/denoiser.hpp"
#include "mdc/error.hpp"
#include "mdc/schedule.hpp"

namespace mdc {

// Self-describing binary container: 8-byte magic, a little-endian u64 JSON
// header length, the JSON header (format tag, model config, schedule,
// metadata, array directory), then each array's doubles in directory order
// (Eigen column-major). Doubles are written raw, so round-trips are bitwise.
inline constexpr char kCheckpointMagic[8] = {'M', 'D', 'C', 'K',
                                             'P', 'T', '0', '1'};

struct Checkpoint {
  ModelConfig model;
  ScheduleKind schedule_kind = ScheduleKind::cosine;
  int schedule_T = 1000;
  nlohmann::json meta;  // epochs_done, seed, training provenance
  std::map<std::string, Eigen::MatrixXd> arrays;
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return nlohmann::json{{"n_blocks", c.n_blocks},
                        {"latent_dim", c.latent_dim},
                        {"n_heads", c.n_heads},
                        {"ff_dim", c.ff_dim},
                        {"dropout", c.dropout},
                        {"n_frames", c.n_frames},
                        {"n_feats", c.n_feats},
                        {"use_gate", c.use_gate},
                        {"time_embed", to_string(c.time_embed)}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.n_blocks = j.at("n_blocks").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.ff_dim = j.at("ff_dim").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.n_frames = j.at("n_frames").get<int>();
  c.n_feats = j.at("n_feats").get<int>();
  c.use_gate = j.at("use_gate").get<bool>();
  c.time_embed = time_embed_kind_from_string(j.at("time_embed").get<std::string>());
  return c;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json header;
  header["format"] = 1;
  header["model"] = to_json(ckpt.model);
  header["schedule"] = {{"kind", to_string(ckpt.schedule_kind)},
                        {"steps", ckpt.schedule_T}};
  header["meta"] = ckpt.meta;
  auto dir = nlohmann::json::array();
  for (const auto& [name, m] : ckpt.arrays)
    dir.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  header["arrays"] = std::move(dir);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kCheckpointMagic, 8);
  const std::string h = header.dump();
  const std::uint64_t len = h.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& [name, m] : ckpt.arrays)
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!out) throw IoError("failed writing " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw ParseError(path + ": not a checkpoint file (bad magic)");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 8);
  std::string h(len, '\0');
  in.read(h.data(), static_cast<std::streamsize>(len));
  if (!in) throw ParseError(path + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(h);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": bad header: " + e.what());
  }
  if (header.at("format").get<int>() != 1)
    throw SchemaError(path + ": unsupported checkpoint format " +
                      header.at("format").dump());

  Checkpoint ckpt;
  ckpt.model = model_config_from_json(header.at("model"));
  ckpt.schedule_kind = schedule_kind_from_string(
      header.at("schedule").at("kind").get<std::string>());
  ckpt.schedule_T = header.at("schedule").at("steps").get<int>();
  ckpt.meta = header.value("meta", nlohmann::json::object());
  for (const auto& entry : header.at("arrays")) {
    const auto name = entry.at("name").get<std::string>();
    Eigen::MatrixXd m(entry.at("rows").get<Eigen::Index>(),
                      entry.at("cols").get<Eigen::Index>());
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw ParseError(path + ": truncated array data at " + name);
    ckpt.arrays[name] = std::move(m);
  }
  return ckpt;
}

// Instantiates the network stored in a checkpoint.
inline DenoiserNet net_from_checkpoint(const Checkpoint& ckpt) {
  DenoiserNet net(ckpt.model);
  for (auto& p : net.parameters()) {
    auto it = ckpt.arrays.find("param:" + p.name);
    if (it == ckpt.arrays.end())
      throw SchemaError("checkpoint is missing parameter " + p.name);
    if (it->second.rows() != p.value.rows() ||
        it->second.cols() != p.value.cols())
      throw SchemaError("checkpoint parameter " + p.name + " has wrong shape");
    p.value = it->second;
  }
  return net;
}

}  // namespace mdc

#endif  // MDC_CHECKPOINT_HPP_
