#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "asap/nn/adam.hpp"
#include "asap/nn/mlp.hpp"

namespace asap::nn {

/* Little binary container with raw 8-byte doubles so that save/load
 * round-trips are exact and identical runs produce identical files. */
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path) : os_(path, std::ios::binary) {
    if (!os_) throw Error("cannot open checkpoint for writing: " + path);
  }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void matrix(const MatrixXd& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  void vector(const VectorXd& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  void raw(const void* p, std::size_t n) {
    os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!os_) throw Error("checkpoint write failed");
  }

 private:
  std::ofstream os_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path) : is_(path, std::ios::binary) {
    if (!is_) throw Error("cannot open checkpoint: " + path);
  }
  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, 8);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    raw(&v, 8);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
  std::string str() {
    std::string s(u64(), '\0');
    raw(s.data(), s.size());
    return s;
  }
  MatrixXd matrix() {
    const auto rows = static_cast<Eigen::Index>(u64());
    const auto cols = static_cast<Eigen::Index>(u64());
    MatrixXd m(rows, cols);
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    return m;
  }
  VectorXd vector() {
    const auto n = static_cast<Eigen::Index>(u64());
    VectorXd v(n);
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
    return v;
  }
  void raw(void* p, std::size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (is_.gcount() != static_cast<std::streamsize>(n))
      throw Error("checkpoint truncated");
  }

 private:
  std::ifstream is_;
};

inline void save_mlp(BinaryWriter& w, const Mlp& net) {
  w.u64(net.sizes().size());
  for (std::size_t s : net.sizes()) w.u64(s);
  w.u8(static_cast<std::uint8_t>(net.hidden_activation()));
  w.u8(static_cast<std::uint8_t>(net.output_activation()));
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    w.matrix(net.weights()[l]);
    w.vector(net.biases()[l]);
  }
}

inline Mlp load_mlp(BinaryReader& r) {
  std::vector<std::size_t> sizes(r.u64());
  for (auto& s : sizes) s = r.u64();
  const auto hidden = static_cast<Activation>(r.u8());
  const auto output = static_cast<Activation>(r.u8());
  Mlp net(sizes, hidden, output, /*seed=*/0);
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> biases;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    weights.push_back(r.matrix());
    biases.push_back(r.vector());
  }
  net.set_parameters(std::move(weights), std::move(biases));
  return net;
}

inline void save_adam(BinaryWriter& w, const AdamState& st) {
  w.i64(st.step);
  w.u64(st.mw.size());
  for (std::size_t l = 0; l < st.mw.size(); ++l) {
    w.matrix(st.mw[l]);
    w.matrix(st.vw[l]);
    w.vector(st.mb[l]);
    w.vector(st.vb[l]);
  }
}

inline AdamState load_adam(BinaryReader& r) {
  AdamState st;
  st.step = r.i64();
  const std::uint64_t n = r.u64();
  for (std::uint64_t l = 0; l < n; ++l) {
    st.mw.push_back(r.matrix());
    st.vw.push_back(r.matrix());
    st.mb.push_back(r.vector());
    st.vb.push_back(r.vector());
  }
  return st;
}

} // namespace asap::nn
