// Copyright 2026 The hpga-dp Authors
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

#include "hpga/ad/params.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hpga::ad {

namespace {
constexpr char kMagic[8] = {'H', 'P', 'G', 'A', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}
uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}
void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string read_string(std::istream& is) {
  uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}
void write_f32(std::ostream& os, float f) {
  uint32_t v;
  std::memcpy(&v, &f, 4);
  write_u32(os, v);
}
float read_f32(std::istream& is) {
  uint32_t v = read_u32(is);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}
}  // namespace

int ModelParams::add_group(const std::string& name) {
  groups_.push_back(Group{name, {}, {}, {}});
  return static_cast<int>(groups_.size()) - 1;
}

int ModelParams::group_index(const std::string& name) const {
  for (size_t i = 0; i < groups_.size(); ++i) {
    if (groups_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

ParamRef ModelParams::add_param(int group, const std::string& name, const Tensor& init) {
  Group& g = groups_[static_cast<size_t>(group)];
  Entry e;
  e.name = name;
  e.shape = init.shape();
  e.offset = static_cast<int64_t>(g.values.size());
  e.size = init.numel();
  g.entries.push_back(e);
  g.values.insert(g.values.end(), init.data(), init.data() + init.numel());
  g.grads.resize(g.values.size(), 0.0);
  return ParamRef{group, static_cast<int>(g.entries.size()) - 1};
}

const ModelParams::Entry& ModelParams::entry(const ParamRef& r) const {
  return groups_[static_cast<size_t>(r.group)].entries[static_cast<size_t>(r.entry)];
}

Tensor ModelParams::get(const ParamRef& r) const {
  const Entry& e = entry(r);
  const Group& g = groups_[static_cast<size_t>(r.group)];
  Tensor t(e.shape);
  std::memcpy(t.data(), g.values.data() + e.offset, sizeof(double) * static_cast<size_t>(e.size));
  return t;
}

void ModelParams::set(const ParamRef& r, const Tensor& v) {
  const Entry& e = entry(r);
  if (v.numel() != e.size) throw std::invalid_argument("ModelParams::set: size mismatch");
  Group& g = groups_[static_cast<size_t>(r.group)];
  std::memcpy(g.values.data() + e.offset, v.data(), sizeof(double) * static_cast<size_t>(e.size));
}

Tensor ModelParams::get_grad(const ParamRef& r) const {
  const Entry& e = entry(r);
  const Group& g = groups_[static_cast<size_t>(r.group)];
  Tensor t(e.shape);
  std::memcpy(t.data(), g.grads.data() + e.offset, sizeof(double) * static_cast<size_t>(e.size));
  return t;
}

void ModelParams::zero_grads() {
  for (Group& g : groups_) std::fill(g.grads.begin(), g.grads.end(), 0.0);
}

void ModelParams::accumulate_grad(const ParamRef& r, const Tensor& gr) {
  const Entry& e = entry(r);
  if (gr.numel() != e.size) throw std::invalid_argument("accumulate_grad: size mismatch");
  Group& g = groups_[static_cast<size_t>(r.group)];
  for (int64_t i = 0; i < e.size; ++i) g.grads[static_cast<size_t>(e.offset + i)] += gr[i];
}

int64_t ModelParams::total_size() const {
  int64_t n = 0;
  for (const Group& g : groups_) n += static_cast<int64_t>(g.values.size());
  return n;
}

void ModelParams::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("ModelParams::save: cannot open " + path);
  os.write(kMagic, 8);
  write_u32(os, kVersion);
  write_u32(os, static_cast<uint32_t>(groups_.size()));
  for (const Group& g : groups_) {
    write_string(os, g.name);
    write_u32(os, static_cast<uint32_t>(g.entries.size()));
    for (const Entry& e : g.entries) {
      write_string(os, e.name);
      write_u32(os, static_cast<uint32_t>(e.shape.size()));
      for (int d : e.shape) write_u32(os, static_cast<uint32_t>(d));
      for (int64_t i = 0; i < e.size; ++i) {
        write_f32(os, static_cast<float>(g.values[static_cast<size_t>(e.offset + i)]));
      }
    }
  }
  if (!os) throw std::runtime_error("ModelParams::save: write failed for " + path);
}

void ModelParams::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ModelParams::load: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("ModelParams::load: bad magic in " + path);
  }
  uint32_t version = read_u32(is);
  if (version != kVersion) throw std::runtime_error("ModelParams::load: unsupported version");
  uint32_t ngroups = read_u32(is);
  if (ngroups != groups_.size()) {
    throw std::runtime_error("ModelParams::load: group count mismatch");
  }
  for (Group& g : groups_) {
    std::string name = read_string(is);
    if (name != g.name) throw std::runtime_error("ModelParams::load: group name mismatch: " + name);
    uint32_t nentries = read_u32(is);
    if (nentries != g.entries.size()) {
      throw std::runtime_error("ModelParams::load: entry count mismatch in group " + name);
    }
    for (Entry& e : g.entries) {
      std::string ename = read_string(is);
      if (ename != e.name) throw std::runtime_error("ModelParams::load: entry name mismatch: " + ename);
      uint32_t rank = read_u32(is);
      std::vector<int> shape(rank);
      for (uint32_t i = 0; i < rank; ++i) shape[i] = static_cast<int>(read_u32(is));
      if (shape != e.shape) throw std::runtime_error("ModelParams::load: shape mismatch on " + ename);
      for (int64_t i = 0; i < e.size; ++i) {
        g.values[static_cast<size_t>(e.offset + i)] = static_cast<double>(read_f32(is));
      }
    }
  }
  if (!is) throw std::runtime_error("ModelParams::load: truncated file " + path);
}

}  // namespace hpga::ad
